"""Command-line front end: estimate, degrees, waves, simulate, coverage, sweep, draw.

Every command writes one JSON document (``--out`` or standard output); the
table printed to the terminal is rendered from that document.  Cutoffs given
on the command line are raw category values of the data and are mapped to
the remapped levels 0..M internally.
"""

import argparse
import json
import logging
import os
import sys
import warnings
from pathlib import Path

from . import dataio
from .errors import ConfigurationError, TetradLogitError
from .estimators import EstimatorSpec, estimate, identification_diagnostics
from .inference import robust_vcov_for, wald_table
from .network import binarize, degree_summary
from .simlab import (DgpConfig, Homogeneous, SenderHeterogeneous, TypeHeterogeneous, degree_table,
                     draw_network, run_coverage, run_mc, threshold_sweep, write_rows_csv)
from .tetrads import SenderPair, Uniform, Vector, parse_cutoff

SCHEMA = "tetradlogit-report/1"

EXIT_CODES = {
    "configuration": 2, "invalid-cutoff": 2, "dgp-config": 2, "contract": 2,
    "ingestion": 3, "separation": 4, "no-information": 5, "rank-deficiency": 6,
    "empty-network": 7, "too-few-nodes": 7,
}

log = logging.getLogger("tetradlogit")


# ---------------------------------------------------------------- cutoffs

def cutoff_label(net, c):
    """Cutoff label in raw category values."""
    lab = net.category_labels
    if isinstance(c, Uniform):
        return str(lab[c.m])
    if isinstance(c, SenderPair):
        return f"{lab[c.m]};{lab[c.m2]}"
    return ",".join(str(lab[m]) for m in c.vector)


def _levels(net, text):
    return [dataio.raw_to_level(net, dataio.as_int(v, "cutoff")) for v in text]


def resolve_spec(net, estimator, cutoffs=None):
    """EstimatorSpec with raw-value cutoffs translated to levels."""
    name, _, arg = estimator.partition(":")
    name = name.strip().lower()
    if name == "binary":
        if not arg:
            raise ConfigurationError("use binary:<category>")
        return EstimatorSpec.binary(_levels(net, [arg])[0])
    spec = EstimatorSpec.parse(name)
    if not cutoffs:
        return spec
    if name in ("ptle", "etle"):
        tokens = [t for tok in cutoffs for t in tok.split(",") if t.strip()]
        return EstimatorSpec(name, tuple(_levels(net, tokens)))
    parsed = []
    for tok in cutoffs:
        c = parse_cutoff(tok)
        raw = c.vector if isinstance(c, Vector) else ((c.m, c.m2) if isinstance(c, SenderPair) else (c.m,))
        lv = _levels(net, raw)
        if name == "additive":
            if len(lv) != 4:
                raise ConfigurationError(f"additive cutoffs are 4-vectors like 2,2,3,2; got {tok!r}")
            parsed.append(Vector(*lv))
        else:
            if len(lv) != 2:
                raise ConfigurationError(f"senderhet cutoffs are pairs like 2;3; got {tok!r}")
            parsed.append(SenderPair(*lv))
    return EstimatorSpec(name, tuple(parsed))


# ---------------------------------------------------------------- reports

def _num(v):
    return dataio.finite_or_none(v) if v is not None else None


def estimate_report(net, spec, threads=1):
    """Fit ``spec`` on ``net`` and return the JSON-ready report dictionary."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        rep = estimate(net, spec, threads=threads)
    notes = list(rep.warnings)
    vc = robust_vcov_for(rep)
    rows = wald_table(rep, vc)
    if spec.variant == "etle":
        notes.append("etle: robust standard errors use the PTLE sandwich formula with ETLE weights (experimental)")
    diag = identification_diagnostics(rep)
    for c in diag.flagged:
        notes.append(f"cutoff {cutoff_label(net, c)}: covariate design rank deficient within this cutoff")
    inf = rep.informative
    coefs = []
    for row in rows:
        d = row.as_dict()
        if spec.variant == "additive" and d["name"].startswith("lambda_") and d["name"] not in net.covariate_names:
            d["name"] = f"lambda_{net.category_labels[int(d['name'][7:])]}"
        coefs.append({key: ([_num(x) for x in val] if isinstance(val, list) else
                            (_num(val) if isinstance(val, float) else val)) for key, val in d.items()})
    return {
        "schema": SCHEMA,
        "status": "ok",
        "estimator": spec.label if spec.variant != "binary"
        else f"binary:{net.category_labels[spec.cutoffs[0]]}",
        "n_nodes": net.n_nodes,
        "n_categories": net.n_categories,
        "category_labels": list(net.category_labels),
        "observed_dyads": int(net.observed.sum()),
        "coefficients": coefs,
        "counts": {
            "per_cutoff": {cutoff_label(net, c): int(n) for c, n in rep.counts_per_cutoff.items()},
            "shares": {cutoff_label(net, c): s for c, s in rep.informative_share_per_cutoff.items()},
            "q_total": int(inf.q_total),
            "total": int(rep.n_obs),
        },
        "dropped_cutoffs": [cutoff_label(net, c) for c in rep.dropped_cutoffs],
        "diagnostics": [dict(r, cutoff=cutoff_label(net, row.cutoff))
                        for r, row in zip(diag.as_records(), diag.rows)],
        "convergence": {
            "converged": bool(rep.fit.converged), "iterations": int(rep.fit.iterations),
            "gradient_norm": float(rep.fit.gradient_norm), "loglik": float(rep.fit.objective),
        },
        "covariate_means": dataio.covariate_means(net),
        "warnings": notes,
    }


def error_report(err, command):
    category = getattr(err, "category", "internal")
    return {"schema": SCHEMA, "status": "error", "command": command,
            "error": {"category": category, "message": str(err)}}


def render(doc):
    """Human-readable text derived from a report document."""
    if doc.get("status") == "error":
        e = doc["error"]
        return f"error [{e['category']}]: {e['message']}"
    if "coefficients" in doc:
        lines = [f"estimator {doc['estimator']}  nodes {doc['n_nodes']}  "
                 f"observations {doc['counts']['total']} of {doc['counts']['q_total']} tetrads"]
        lines.append(f"{'':24s}{'beta':>10s}{'se':>10s}{'se naive':>10s}{'z':>9s}{'p':>9s}")
        for c in doc["coefficients"]:
            f = lambda v, w, p: f"{v:{w}.{p}f}" if v is not None else f"{'inf':>{w}s}"
            lines.append(f"{c['name']:24s}{f(c['beta'], 10, 3)}{f(c['se_robust'], 10, 3)}"
                         f"{f(c['se_naive'], 10, 3)}{f(c['z'], 9, 2)}{f(c['p'], 9, 3)}")
        lines.append("informative per cutoff: " +
                     ", ".join(f"{k}: {v}" for k, v in doc["counts"]["per_cutoff"].items()))
        conv = doc["convergence"]
        lines.append(f"converged {conv['converged']} in {conv['iterations']} iterations")
        lines += [f"warning: {w}" for w in doc["warnings"]]
        return "\n".join(lines)
    return json.dumps(doc, indent=2, default=str)


def _emit(doc, out):
    text = json.dumps(doc, indent=2, default=str)
    if out:
        Path(out).write_text(text + "\n")
        print(render(doc))
    else:
        print(text)


# ---------------------------------------------------------------- commands

def _bundle(args, data=None):
    return dataio.DatasetBundle(
        data or args.data, args.nodes, tuple(dataio.Recipe.parse(r) for r in args.recipe),
        tuple(args.missing), tuple(args.categories.split(",")) if args.categories else None)


def cmd_estimate(args):
    net = dataio.ingest(_bundle(args))
    spec = resolve_spec(net, args.estimator, args.cutoffs)
    return estimate_report(net, spec, args.threads)


def cmd_degrees(args):
    if args.data:
        net = dataio.ingest(_bundle(args))
        levels = range(1, net.n_categories + 1) if args.cutoff is None else _levels(net, [args.cutoff])
        rows = {str(net.category_labels[m]): degree_summary(binarize(net, m)).as_dict() for m in levels}
        return {"schema": SCHEMA, "status": "ok", "command": "degrees", "degrees": rows}
    cfg = _dgp(args)
    table = degree_table(cfg, args.reps)
    if args.cutoff is not None:
        table = {int(args.cutoff): table[int(args.cutoff)]}
    return {"schema": SCHEMA, "status": "ok", "command": "degrees", "config": cfg.describe(),
            "n_replications": args.reps, "degrees": {str(m): v for m, v in table.items()}}


def cmd_waves(args):
    rows = []
    for wave, path in enumerate(args.data_files, start=1):
        net = dataio.ingest(_bundle(args, path))
        for est in args.estimators.split(","):
            spec = resolve_spec(net, est.strip(), args.cutoffs)
            try:
                doc = estimate_report(net, spec, args.threads)
            except TetradLogitError as err:
                rows.append({"wave": wave, "file": path, "estimator": est, "covariate": "",
                             "beta": "", "se_robust": "", "n_obs": "", "error": err.category})
                continue
            for c in doc["coefficients"]:
                rows.append({"wave": wave, "file": path, "estimator": doc["estimator"],
                             "covariate": c["name"], "beta": c["beta"], "se_robust": c["se_robust"],
                             "n_obs": doc["counts"]["total"], "error": ""})
    if args.csv:
        write_rows_csv(rows, args.csv)
    return {"schema": SCHEMA, "status": "ok", "command": "waves", "rows": rows}


def _floats(text):
    return tuple(float(v) for v in text.split(","))


def _dgp(args):
    try:
        sparsity = float(args.sparsity)
    except ValueError:
        sparsity = args.sparsity
    lam = _floats(args.lambdas)
    if args.scheme == "homogeneous":
        scheme = Homogeneous(lam)
    elif args.scheme == "type":
        scheme = TypeHeterogeneous(lam, _floats(args.lambdas1 or args.lambdas), args.rule)
    else:
        scheme = SenderHeterogeneous(lam, args.spread)
    return DgpConfig(args.n_nodes, scheme, args.beta0, sparsity, args.seed)


def cmd_simulate(args):
    cfg = _dgp(args)
    mc = run_mc(cfg, [e.strip() for e in args.estimators.split(",")], args.reps, args.workers,
                with_se=args.with_se, glm_compat=args.glm_compat)
    if args.records:
        mc.records_to_csv(args.records)
    return {"schema": SCHEMA, "status": "ok", "command": "simulate", "config": cfg.describe(),
            "n_replications": mc.n_replications, "stats": mc.stats, "failures": mc.failures,
            "glm_compat": args.glm_compat}


def cmd_coverage(args):
    cfg = _dgp(args)
    cov = run_coverage(cfg, args.reps, args.workers, args.estimator)
    return {"schema": SCHEMA, "status": "ok", "command": "coverage", "config": cfg.describe(),
            **cov.as_dict()}


def cmd_sweep(args):
    cfg = _dgp(args)
    rows = threshold_sweep(cfg, _floats(args.grid), args.reps, args.workers)
    if args.csv:
        write_rows_csv(rows, args.csv)
    return {"schema": SCHEMA, "status": "ok", "command": "sweep", "config": cfg.describe(), "rows": rows}


def cmd_draw(args):
    cfg = _dgp(args)
    net = draw_network(cfg, args.rep)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    bundle = dataio.export_network(net, outdir / "dyads.csv", outdir / "nodes.csv")
    return {"schema": SCHEMA, "status": "ok", "command": "draw", "config": cfg.describe(),
            "dyads": bundle.dyads, "nodes": bundle.nodes,
            "recipes": [f"{r.name}={r.kind}:{r.source}" for r in bundle.recipes],
            "categories": list(bundle.categories)}


# ---------------------------------------------------------------- parser

def _data_args(p, multi=False):
    if multi:
        p.add_argument("--data", dest="data_files", nargs="+", required=True, help="one dyads CSV per wave")
    else:
        p.add_argument("--data", help="dyads CSV (sender,receiver,outcome,...)")
    p.add_argument("--nodes", help="nodes CSV (node_id plus attributes)")
    p.add_argument("--recipe", action="append", default=[], metavar="NAME=KIND:ATTR",
                   help="covariate recipe; KIND in match, both, absdiff, sqdiff, dyadcol")
    p.add_argument("--missing", action="append", default=[], metavar="CODE",
                   help="raw outcome value treated as missing (repeatable)")
    p.add_argument("--categories", help="comma list of retained raw categories (default: observed)")


def _dgp_args(p):
    p.add_argument("--n-nodes", type=int, default=25)
    p.add_argument("--scheme", choices=("homogeneous", "type", "sender"), default="homogeneous")
    p.add_argument("--lambdas", default="0,1", help="comma list of thresholds (type 0 for --scheme type)")
    p.add_argument("--lambdas1", help="type-1 thresholds for --scheme type")
    p.add_argument("--rule", choices=("sum_of_types", "type_interaction"), default="sum_of_types")
    p.add_argument("--spread", type=float, default=1.0, help="sender threshold spread for --scheme sender")
    p.add_argument("--beta0", type=float, default=1.0)
    p.add_argument("--sparsity", default="0", help="0, loglog, logsqrt, sqrtlog, log or a number")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--workers", type=int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(prog="tetradlogit", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    threads = os.cpu_count() or 1

    p = sub.add_parser("estimate", help="fit one estimator on a dataset")
    _data_args(p)
    p.add_argument("--estimator", default="ptle", help="ptle | etle | binary:<category> | additive | senderhet")
    p.add_argument("--cutoffs", nargs="+", help="raw cutoff categories (2,3,4), vectors (2,2,3,2) or pairs (2;3)")
    p.add_argument("--threads", type=int, default=threads)
    p.add_argument("--seed", type=int, default=0, help="unused by estimation; recorded for provenance")
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("degrees", help="degree distribution per cutoff (dataset or simulated design)")
    _data_args(p)
    _dgp_args(p)
    p.add_argument("--cutoff", help="single raw cutoff category")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_degrees)

    p = sub.add_parser("waves", help="same estimators across several wave files")
    _data_args(p, multi=True)
    p.add_argument("--estimators", default="ptle")
    p.add_argument("--cutoffs", nargs="+")
    p.add_argument("--threads", type=int, default=threads)
    p.add_argument("--csv", help="long-format coefficient CSV")
    p.add_argument("--out")
    p.set_defaults(func=cmd_waves)

    p = sub.add_parser("simulate", help="Monte Carlo comparison of estimators")
    _dgp_args(p)
    p.add_argument("--estimators", default="ptle,etle,binary:1,binary:2")
    p.add_argument("--with-se", action="store_true")
    p.add_argument("--glm-compat", action="store_true",
                   help="keep separated fits as their terminal IRLS iterate")
    p.add_argument("--records", help="per-replication CSV")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("coverage", help="standard-error ratio and coverage study")
    _dgp_args(p)
    p.add_argument("--estimator", default="ptle")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("sweep", help="vary the top threshold; mean degree and estimates per value")
    _dgp_args(p)
    p.add_argument("--grid", default="0.5,1,1.5,2,2.5,3")
    p.add_argument("--csv")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("draw", help="export one simulated network as dyads/nodes CSV")
    _dgp_args(p)
    p.add_argument("--rep", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--outdir", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_draw)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command in ("estimate",) and not args.data:
        doc = error_report(ConfigurationError("--data is required"), args.command)
        _emit(doc, args.out)
        return EXIT_CODES["configuration"]
    try:
        doc = args.func(args)
        doc.setdefault("command", args.command)
        code = 0
    except TetradLogitError as err:
        doc = error_report(err, args.command)
        code = EXIT_CODES.get(err.category, 1)
    _emit(doc, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
