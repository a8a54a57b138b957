"""Tetrad enumeration and extraction of informative tetrad-cutoff observations.

A tetrad is two senders ``i1 < i2`` and two receivers ``j1 < j2``, all distinct.
For a cutoff vector ``(m11, m12, m21, m22)`` the tetrad statistic is

    Z = ((D[i1,j1](m11) - D[i1,j2](m12)) - (D[i2,j1](m21) - D[i2,j2](m22))) / 2

and the tetrad-cutoff pair is informative when ``|Z| = 1``.  Conditional on
being informative, ``1{Z = +1}`` follows a logit in the differenced covariates
``r = (X[i1,j1] - X[i1,j2]) - (X[i2,j1] - X[i2,j2])``.
"""

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .errors import ConfigurationError, InvalidCutoffError, TooFewNodesError

FAMILIES = ("main", "additive", "sender_het")


@dataclass(frozen=True, order=True)
class Uniform:
    m: int

    family = "main"

    @property
    def vector(self):
        return (self.m, self.m, self.m, self.m)

    @property
    def label(self):
        return str(self.m)


@dataclass(frozen=True, order=True)
class SenderPair:
    m: int
    m2: int

    family = "sender_het"

    @property
    def vector(self):
        return (self.m, self.m, self.m2, self.m2)

    @property
    def label(self):
        return f"{self.m};{self.m2}"


@dataclass(frozen=True, order=True)
class Vector:
    m11: int
    m12: int
    m21: int
    m22: int

    family = "additive"

    @property
    def vector(self):
        return (self.m11, self.m12, self.m21, self.m22)

    @property
    def label(self):
        return ",".join(map(str, self.vector))


def parse_cutoff(label):
    """Inverse of ``CutoffSpec.label``."""
    label = str(label)
    if "," in label:
        return Vector(*map(int, label.split(",")))
    if ";" in label:
        return SenderPair(*map(int, label.split(";")))
    return Uniform(int(label))


def default_cutoffs(family, M):
    if family == "main":
        return [Uniform(m) for m in range(1, M + 1)]
    if family == "sender_het":
        return [SenderPair(a, b) for a in range(1, M + 1) for b in range(1, M + 1)]
    if family == "additive":
        grid = np.array(np.meshgrid(*[range(1, M + 1)] * 4, indexing="ij")).reshape(4, -1).T
        return [Vector(*map(int, v)) for v in grid]
    raise ConfigurationError(f"unknown family {family!r}")


def threshold_loadings(cutoff, M):
    """Integer loadings on (lambda_2..lambda_M) so that x'theta = r'beta - lambda0(m)."""
    out = np.zeros(M - 1, dtype=np.int8)
    if isinstance(cutoff, Vector):
        m11, m12, m21, m22 = cutoff.vector
        for m in range(2, M + 1):
            out[m - 2] = -((m11 == m) - (m12 == m) - (m21 == m) + (m22 == m))
    return out


@dataclass(frozen=True)
class Tetrad:
    i1: int
    i2: int
    j1: int
    j2: int

    def __post_init__(self):
        if len({self.i1, self.i2, self.j1, self.j2}) != 4:
            raise ConfigurationError(f"tetrad nodes must be distinct: {self}")
        if not (self.i1 < self.i2 and self.j1 < self.j2):
            raise ConfigurationError(f"tetrad not in canonical orientation: {self}")

    @property
    def dyads(self):
        return ((self.i1, self.j1), (self.i1, self.j2), (self.i2, self.j1), (self.i2, self.j2))


def count_tetrads(N):
    if N < 4:
        raise TooFewNodesError(f"need at least 4 nodes, got {N}")
    return comb(N, 2) * comb(N - 2, 2)


@lru_cache(maxsize=8)
def _pair_tables(N):
    pi, pj = np.triu_indices(N, 1)
    u, v = np.triu_indices(N - 2, 1)
    # rest[p] lists the N-2 nodes not in sender pair p, ascending
    mask = np.ones((len(pi), N), dtype=bool)
    mask[np.arange(len(pi)), pi] = False
    mask[np.arange(len(pi)), pj] = False
    rest = np.nonzero(mask)[1].reshape(len(pi), N - 2)
    for a in (pi, pj, u, v, rest):
        a.setflags(write=False)
    return pi, pj, u, v, rest


def canonical_tetrads(N, pairs=None):
    """(i1, i2, j1, j2) arrays for all canonical tetrads, grouped by sender pair.

    ``pairs`` optionally restricts to a slice of sender-pair indices.
    """
    count_tetrads(N)
    pi, pj, u, v, rest = _pair_tables(N)
    sl = slice(None) if pairs is None else pairs
    q = len(u)
    rs = rest[sl]
    i1 = np.repeat(pi[sl], q).astype(np.int32)
    i2 = np.repeat(pj[sl], q).astype(np.int32)
    j1 = rs[:, u].ravel().astype(np.int32)
    j2 = rs[:, v].ravel().astype(np.int32)
    return i1, i2, j1, j2


def tetrad_statistic(d11, d12, d21, d22):
    """Half-integer Z; ``None`` when any dyad is missing."""
    if any(d is None for d in (d11, d12, d21, d22)):
        return None
    return 0.5 * ((d11 - d12) - (d21 - d22))


def differenced_covariates(net, t):
    """r for tetrad ``t``; ``None`` if any of its dyads is unobserved."""
    if not all(net.observed[d] for d in t.dyads):
        return None
    X = net.covariates
    return (X[t.i1, t.j1] - X[t.i1, t.j2]) - (X[t.i2, t.j1] - X[t.i2, t.j2])


@dataclass(frozen=True)
class TetradObservation:
    r: np.ndarray
    y_star: int
    cutoff: object
    threshold_loadings: np.ndarray
    dyads: tuple


@dataclass(frozen=True, eq=False)
class InformativeSet:
    """Informative tetrad-cutoff pairs stored column-wise.

    Rows are ordered by (tetrad enumeration index, position of the cutoff in
    ``cutoffs``), so the layout does not depend on chunking or thread count.
    """

    family: str
    cutoffs: tuple
    cutoff_id: np.ndarray
    y: np.ndarray
    r: np.ndarray
    tetrads: np.ndarray
    n_nodes: int
    n_categories: int
    q_total: int
    covariate_names: tuple = ()

    def __len__(self):
        return len(self.y)

    @property
    def k(self):
        return self.r.shape[1]

    @property
    def counts_per_cutoff(self):
        counts = np.bincount(self.cutoff_id, minlength=len(self.cutoffs))
        return {c: int(n) for c, n in zip(self.cutoffs, counts)}

    @property
    def loadings(self):
        table = np.array([threshold_loadings(c, self.n_categories) for c in self.cutoffs],
                         dtype=np.int8).reshape(len(self.cutoffs), self.n_categories - 1)
        return table[self.cutoff_id]

    def dyad_index(self):
        """Flat ids ``i * N + j`` of the four dyads of every observation, shape (n, 4)."""
        t = self.tetrads.astype(np.int64)
        N = self.n_nodes
        i1, i2, j1, j2 = t.T
        return np.stack([i1 * N + j1, i1 * N + j2, i2 * N + j1, i2 * N + j2], axis=1)

    def subset(self, cutoffs):
        cutoffs = tuple(cutoffs)
        pos = {c: a for a, c in enumerate(self.cutoffs)}
        missing = [c for c in cutoffs if c not in pos]
        if missing:
            raise ConfigurationError(f"cutoffs {missing} were not extracted")
        remap = np.full(len(self.cutoffs), -1, dtype=np.int64)
        for b, c in enumerate(cutoffs):
            remap[pos[c]] = b
        new_id = remap[self.cutoff_id]
        keep = new_id >= 0
        return InformativeSet(
            self.family, cutoffs, new_id[keep], self.y[keep], self.r[keep], self.tetrads[keep],
            self.n_nodes, self.n_categories, self.q_total, self.covariate_names,
        )

    def __iter__(self):
        L = self.loadings
        for a in range(len(self)):
            i1, i2, j1, j2 = map(int, self.tetrads[a])
            yield TetradObservation(
                self.r[a], int(self.y[a]), self.cutoffs[self.cutoff_id[a]], L[a],
                ((i1, j1), (i1, j2), (i2, j1), (i2, j2)),
            )

    def to_csv(self, path):
        k, M = self.k, self.n_categories
        names = self.covariate_names or tuple(str(c + 1) for c in range(k))
        L = self.loadings
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["y_star", *[f"r_{n}" for n in names], "cutoff",
                        *[f"loading_{m}" for m in range(2, M + 1)], "i1", "i2", "j1", "j2"])
            for a in range(len(self)):
                w.writerow([int(self.y[a]), *map(repr, self.r[a].tolist()),
                            self.cutoffs[self.cutoff_id[a]].label, *L[a].tolist(),
                            *self.tetrads[a].tolist()])


def _check_cutoffs(family, cutoffs, M):
    if family not in FAMILIES:
        raise ConfigurationError(f"unknown family {family!r}")
    if not cutoffs:
        raise ConfigurationError("cutoff set is empty")
    for c in cutoffs:
        if c.family != family:
            raise ConfigurationError(f"cutoff {c!r} is not valid for the {family} family")
        if any(not (1 <= m <= M) for m in c.vector):
            raise InvalidCutoffError(f"cutoff {c.label} outside 1..{M}")
    if len(set(cutoffs)) != len(cutoffs):
        raise ConfigurationError("duplicate cutoffs")


def _scan(N, pairs, observed, layers, vectors, X):
    i1, i2, j1, j2 = canonical_tetrads(N, pairs)
    f = (i1 * N + j1, i1 * N + j2, i2 * N + j1, i2 * N + j2)
    obs = observed[f[0]] & observed[f[1]] & observed[f[2]] & observed[f[3]]
    keep = np.flatnonzero(obs)
    f = tuple(a[keep] for a in f)
    gathered = {}

    def bits(m, pos):
        if (m, pos) not in gathered:
            gathered[m, pos] = layers[m][f[pos]]
        return gathered[m, pos]

    idx, cid, ys = [], [], []
    for c, (m11, m12, m21, m22) in enumerate(vectors):
        z2 = (bits(m11, 0) - bits(m12, 1)) - (bits(m21, 2) - bits(m22, 3))
        hit = np.flatnonzero(np.abs(z2) == 2)
        idx.append(hit)
        cid.append(np.full(len(hit), c, dtype=np.int32))
        ys.append((z2[hit] > 0).astype(np.uint8))
    idx, cid, ys = np.concatenate(idx), np.concatenate(cid), np.concatenate(ys)
    order = np.lexsort((cid, idx))
    idx, cid, ys = idx[order], cid[order], ys[order]
    r = (X[f[0][idx]] - X[f[1][idx]]) - (X[f[2][idx]] - X[f[3][idx]])
    tet = np.stack([i1[keep][idx], i2[keep][idx], j1[keep][idx], j2[keep][idx]], axis=1)
    return cid, ys, r, tet


def extract_informative(net, family="main", cutoffs=None, threads=1, chunk_tetrads=2_000_000):
    """Scan every canonical tetrad and keep the informative tetrad-cutoff pairs.

    Work is split into blocks of sender pairs; blocks may run on ``threads``
    worker threads and are concatenated in block order.
    """
    N, M = net.n_nodes, net.n_categories
    q_total = count_tetrads(N)
    cutoffs = tuple(default_cutoffs(family, M) if cutoffs is None else cutoffs)
    _check_cutoffs(family, cutoffs, M)
    vectors = [c.vector for c in cutoffs]

    observed = net.observed.ravel()
    layers = {m: (net.outcomes.ravel() >= m).astype(np.int8)
              for m in sorted({m for v in vectors for m in v})}
    X = net.covariates.reshape(N * N, net.k)

    n_pairs = comb(N, 2)
    per_pair = comb(N - 2, 2)
    step = max(1, chunk_tetrads // per_pair)
    blocks = [slice(a, min(a + step, n_pairs)) for a in range(0, n_pairs, step)]
    work = lambda b: _scan(N, b, observed, layers, vectors, X)  # noqa: E731
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(work, blocks))
    else:
        parts = [work(b) for b in blocks]

    cid = np.concatenate([p[0] for p in parts])
    return InformativeSet(
        family, cutoffs, cid,
        np.concatenate([p[1] for p in parts]),
        np.concatenate([p[2] for p in parts]).reshape(len(cid), net.k),
        np.concatenate([p[3] for p in parts]).reshape(len(cid), 4),
        N, M, q_total, net.covariate_names,
    )
