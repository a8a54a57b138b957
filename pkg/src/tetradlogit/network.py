"""Directed ordered networks, cutoff layers and degree statistics."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, EmptyNetworkError, InvalidCutoffError

MISSING = -1


def _frozen(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class OrderedNetwork:
    """Outcomes ``Y[i, j]`` in ``{0..M}`` (or ``MISSING``) with k covariates per dyad.

    ``outcomes`` is an N x N integer matrix whose diagonal is always missing;
    ``covariates`` is N x N x k.  Both are copied and made read-only.
    ``category_labels`` optionally records the raw value behind each level 0..M.
    """

    outcomes: np.ndarray
    covariates: np.ndarray
    n_categories: int
    covariate_names: tuple = ()
    node_ids: tuple = ()
    category_labels: tuple = ()

    def __post_init__(self):
        y = np.asarray(self.outcomes)
        if y.ndim != 2 or y.shape[0] != y.shape[1]:
            raise ConfigurationError(f"outcomes must be a square matrix, got shape {y.shape}")
        if not np.issubdtype(y.dtype, np.integer):
            if not np.all(np.equal(np.mod(y, 1), 0)):
                raise ConfigurationError("outcomes must be integer valued")
        y = y.astype(np.int16)
        n = y.shape[0]
        y[np.diag_indices(n)] = MISSING
        M = int(self.n_categories)
        if M < 1:
            raise ConfigurationError("n_categories must be >= 1")
        bad = (y != MISSING) & ((y < 0) | (y > M))
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise ConfigurationError(f"outcome {y[i, j]} at dyad ({i}, {j}) outside 0..{M}")

        x = np.asarray(self.covariates, dtype=float)
        if x.ndim == 2:
            x = x[:, :, None]
        if x.shape[:2] != (n, n):
            raise ConfigurationError(f"covariates shape {x.shape} does not match {n} nodes")
        k = x.shape[2]
        names = tuple(self.covariate_names) or tuple(f"x{c + 1}" for c in range(k))
        if len(names) != k:
            raise ConfigurationError(f"{len(names)} covariate names for {k} covariates")
        observed = y != MISSING
        if not np.isfinite(x[observed]).all():
            raise ConfigurationError("observed dyads must have finite covariates")
        ids = tuple(self.node_ids) or tuple(range(n))
        if len(ids) != n:
            raise ConfigurationError("node_ids length does not match the number of nodes")
        labels = tuple(self.category_labels) or tuple(range(M + 1))
        if len(labels) != M + 1:
            raise ConfigurationError(f"{len(labels)} category labels for levels 0..{M}")

        object.__setattr__(self, "outcomes", _frozen(y))
        object.__setattr__(self, "covariates", _frozen(x))
        object.__setattr__(self, "n_categories", M)
        object.__setattr__(self, "covariate_names", names)
        object.__setattr__(self, "node_ids", ids)
        object.__setattr__(self, "category_labels", labels)

    @property
    def n_nodes(self):
        return self.outcomes.shape[0]

    @property
    def k(self):
        return self.covariates.shape[2]

    @property
    def observed(self):
        return self.outcomes != MISSING

    def permute(self, perm):
        """Relabel nodes: new node ``a`` is old node ``perm[a]``."""
        perm = np.asarray(perm)
        return OrderedNetwork(
            self.outcomes[np.ix_(perm, perm)],
            self.covariates[np.ix_(perm, perm)],
            self.n_categories,
            self.covariate_names,
            tuple(self.node_ids[p] for p in perm),
            self.category_labels,
        )


@dataclass(frozen=True, eq=False)
class BinaryLayer:
    cutoff: int
    links: np.ndarray
    observed: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "links", _frozen(np.asarray(self.links, dtype=bool)))
        object.__setattr__(self, "observed", _frozen(np.asarray(self.observed, dtype=bool)))
        if (self.links & ~self.observed).any():
            raise ConfigurationError("link bit set on an unobserved dyad")


def check_cutoff(m, M):
    if not (1 <= int(m) <= M) or int(m) != m:
        raise InvalidCutoffError(f"cutoff {m} outside 1..{M}")
    return int(m)


def binarize(net, m):
    """D_ij(m) = 1{Y_ij >= m} on observed dyads."""
    m = check_cutoff(m, net.n_categories)
    observed = net.observed
    return BinaryLayer(m, observed & (net.outcomes >= m), observed)


@dataclass(frozen=True)
class DegreeSummary:
    cutoff: int
    mean: float
    q25: float
    median: float
    q75: float
    min: float
    max: float

    def as_dict(self):
        return {f: getattr(self, f) for f in ("cutoff", "mean", "q25", "median", "q75", "min", "max")}


def degree_shares(layer):
    """Outgoing degree divided by observed partners, for nodes with any observed partner."""
    partners = layer.observed.sum(axis=1)
    keep = partners > 0
    if not keep.any():
        raise EmptyNetworkError("network has no observed dyads")
    return layer.links.sum(axis=1)[keep] / partners[keep]


def degree_summary(layer):
    shares = degree_shares(layer)
    q25, q50, q75 = np.quantile(shares, [0.25, 0.5, 0.75])
    return DegreeSummary(
        layer.cutoff, float(shares.mean()), float(q25), float(q50), float(q75),
        float(shares.min()), float(shares.max()),
    )
