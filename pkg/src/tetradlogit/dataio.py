"""CSV ingestion of dyadic datasets and the matching export.

Dyads file: header ``sender,receiver,outcome`` plus optional extra dyad
columns.  Nodes file: ``node_id`` plus attribute columns.  Dyads absent from
the file, and outcomes equal to a declared missing code, are unobserved.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import IngestionError
from .network import MISSING, OrderedNetwork

RECIPE_KINDS = ("match", "both", "absdiff", "sqdiff", "dyadcol")


@dataclass(frozen=True)
class Recipe:
    """Covariate ``name`` built by ``kind`` from node attribute / dyad column ``source``."""

    name: str
    kind: str
    source: str

    def __post_init__(self):
        if self.kind not in RECIPE_KINDS:
            raise IngestionError(f"recipe {self.name!r}: unknown kind {self.kind!r}; use {RECIPE_KINDS}")

    @classmethod
    def parse(cls, text):
        """'name=kind:attr'."""
        name, eq, rest = text.partition("=")
        kind, colon, source = rest.partition(":")
        if not (eq and colon and name and source):
            raise IngestionError(f"cannot parse recipe {text!r}; expected name=kind:attr")
        return cls(name.strip(), kind.strip(), source.strip())


@dataclass(frozen=True)
class DatasetBundle:
    dyads: str
    nodes: str = None
    recipes: tuple = ()
    missing: tuple = ()
    categories: tuple = None


def _read_csv(path):
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            rows = list(reader)
            return rows, [c.strip() for c in reader.fieldnames or []]
    except OSError as err:
        raise IngestionError(f"cannot read {path}: {err}") from None


def as_int(text, what):
    try:
        v = float(text)
    except ValueError:
        raise IngestionError(f"{what}: {text!r} is not a number") from None
    if not v.is_integer():
        raise IngestionError(f"{what}: {text!r} is not an integer category")
    return int(v)


def _node_order(dyad_rows, node_rows):
    if node_rows is not None:
        ids = [r["node_id"].strip() for r in node_rows]
        if len(set(ids)) != len(ids):
            raise IngestionError("duplicate node_id in nodes file")
        return ids
    seen = {}
    for r in dyad_rows:
        for key in ("sender", "receiver"):
            seen.setdefault(r[key].strip(), None)
    ids = list(seen)
    try:
        return sorted(ids, key=float)
    except ValueError:
        return ids


def _numeric(values, attr):
    try:
        return np.array([float(v) for v in values])
    except ValueError:
        raise IngestionError(f"attribute {attr!r} must be numeric") from None


def ingest(bundle):
    """Read ``bundle`` into an OrderedNetwork.

    Raw outcomes not in ``bundle.missing`` are remapped to 0..M in ascending
    order of the retained category values (all observed values, or
    ``bundle.categories`` when given).  The raw values are kept as
    ``category_labels``.
    """
    dyad_rows, dyad_cols = _read_csv(bundle.dyads)
    for col in ("sender", "receiver", "outcome"):
        if col not in dyad_cols:
            raise IngestionError(f"dyads file lacks a {col!r} column")
    node_rows, node_cols = (None, [])
    if bundle.nodes:
        node_rows, node_cols = _read_csv(bundle.nodes)
        if "node_id" not in node_cols:
            raise IngestionError("nodes file lacks a 'node_id' column")
    for rc in bundle.recipes:
        cols = dyad_cols if rc.kind == "dyadcol" else node_cols
        if rc.source not in cols:
            where = "dyads" if rc.kind == "dyadcol" else "nodes"
            raise IngestionError(f"recipe {rc.name!r}: no column {rc.source!r} in the {where} file")

    ids = _node_order(dyad_rows, node_rows)
    index = {v: a for a, v in enumerate(ids)}
    N = len(ids)
    missing = {str(m).strip() for m in bundle.missing}

    raw = np.full((N, N), MISSING, dtype=np.int64)
    present = np.zeros((N, N), dtype=bool)
    dyadcols = {rc.source: np.full((N, N), np.nan) for rc in bundle.recipes if rc.kind == "dyadcol"}
    unknown = set()
    for line, r in enumerate(dyad_rows, start=2):
        s, t = r["sender"].strip(), r["receiver"].strip()
        if s not in index or t not in index:
            unknown.update(v for v in (s, t) if v not in index)
            continue
        i, j = index[s], index[t]
        if i == j:
            raise IngestionError(f"line {line}: self-dyad for node {s!r}")
        if present[i, j]:
            raise IngestionError(f"line {line}: duplicate dyad ({s}, {t})")
        present[i, j] = True
        text = r["outcome"].strip()
        if text == "" or text.upper() == "NA" or text in missing:
            continue
        v = as_int(text, f"line {line} outcome")
        if str(v) in missing:
            continue
        raw[i, j] = v
        for col, arr in dyadcols.items():
            cell = r[col].strip()
            arr[i, j] = float(cell) if cell not in ("", "NA") else np.nan
    if unknown:
        raise IngestionError(f"dyads reference nodes missing from the nodes file: {sorted(unknown)[:10]}")

    observed = raw != MISSING
    values = sorted(set(raw[observed].tolist()))
    if bundle.categories is not None:
        cats = [as_int(c, "category") for c in bundle.categories]
        if cats != sorted(set(cats)):
            raise IngestionError(f"categories {cats} must be strictly increasing")
        offenders = sorted(set(values) - set(cats))
        if offenders:
            raise IngestionError(f"outcome values {offenders} are neither categories nor missing codes")
    else:
        cats = values
    if len(cats) < 2:
        raise IngestionError(f"need at least two outcome categories, found {cats}")
    remap = {c: a for a, c in enumerate(cats)}
    y = np.full((N, N), MISSING, dtype=np.int64)
    y[observed] = [remap[v] for v in raw[observed]]

    attrs = {}
    if node_rows is not None:
        for col in node_cols:
            attrs[col] = [r[col].strip() for r in node_rows]
    X = np.zeros((N, N, len(bundle.recipes)))
    for c, rc in enumerate(bundle.recipes):
        if rc.kind == "dyadcol":
            X[:, :, c] = dyadcols[rc.source]
            continue
        vals = attrs[rc.source]
        if rc.kind == "match":
            a = np.array(vals, dtype=object)
            X[:, :, c] = a[:, None] == a[None, :]
        elif rc.kind == "both":
            bad = sorted(set(vals) - {"0", "1"})
            if bad:
                raise IngestionError(f"recipe {rc.name!r}: attribute {rc.source!r} is not binary (values {bad})")
            a = np.array(vals) == "1"
            X[:, :, c] = a[:, None] & a[None, :]
        else:
            a = _numeric(vals, rc.source)
            d = a[:, None] - a[None, :]
            X[:, :, c] = np.abs(d) if rc.kind == "absdiff" else d ** 2
    bad = observed & ~np.isfinite(X).all(axis=2)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise IngestionError(f"observed dyad ({ids[i]}, {ids[j]}) has a missing covariate value")
    X[~observed] = 0.0
    return OrderedNetwork(y, X, len(cats) - 1, tuple(rc.name for rc in bundle.recipes),
                          tuple(ids), tuple(cats))


def export_network(net, dyads_path, nodes_path):
    """Write ``net`` in the dyads / nodes CSV format.

    Covariates become dyad columns named after the covariates, written with
    ``repr`` so re-ingesting with ``dyadcol`` recipes is exact.  Returns the
    bundle that reads the files back.
    """
    ids = [str(v) for v in net.node_ids]
    with open(nodes_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node_id"])
        w.writerows([v] for v in ids)
    names = list(net.covariate_names)
    labels = net.category_labels
    with open(dyads_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sender", "receiver", "outcome", *names])
        for i, j in np.argwhere(net.observed):
            w.writerow([ids[i], ids[j], labels[net.outcomes[i, j]],
                        *[repr(float(v)) for v in net.covariates[i, j]]])
    return DatasetBundle(str(dyads_path), str(nodes_path),
                         tuple(Recipe(n, "dyadcol", n) for n in names),
                         categories=tuple(labels))


def covariate_means(net):
    """Mean of each covariate over observed dyads."""
    obs = net.observed
    return {name: float(net.covariates[:, :, c][obs].mean())
            for c, name in enumerate(net.covariate_names)}


def raw_to_level(net, value):
    """Index 0..M of a raw category value."""
    try:
        return net.category_labels.index(value)
    except ValueError:
        raise IngestionError(f"{value!r} is not a retained category; have {list(net.category_labels)}") from None


def level_label(net, level):
    return net.category_labels[level]


def finite_or_none(v):
    v = float(v)
    return v if math.isfinite(v) else None
