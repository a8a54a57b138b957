"""Simulation designs, Monte Carlo runner and the standard-error study.

Every design has a single covariate X_ij = (W_i - W_j)^2 with W_i ~ Bernoulli(1/2)
and node shifts s_i = (N - i) / (N - 1) * C_N for i = 1..N.  Dyad (i, j) has
Y_ij >= m with probability L(X_ij b0 - t_ijm); one uniform per dyad is compared
against the whole ordered threshold sequence so the layers are nested.
"""

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.special import expit
from scipy.stats import chi2

from . import clogit
from .errors import ConfigurationError, DgpConfigError, TetradLogitError
from .estimators import EstimatorSpec, estimate
from .inference import naive_vcov, robust_vcov_for, sandwich
from .network import OrderedNetwork, binarize, degree_summary
from .tetrads import default_cutoffs, extract_informative

log = logging.getLogger(__name__)

SPARSITY = {
    "0": lambda N: 0.0,
    "loglog": lambda N: math.log(math.log(N)),
    "logsqrt": lambda N: math.log(math.sqrt(N)),
    # the third sparsity level of the published degree tables is reproduced by sqrt(log N)
    "sqrtlog": lambda N: math.sqrt(math.log(N)),
    "log": lambda N: math.log(N),
}


@dataclass(frozen=True)
class Homogeneous:
    """t_ijm = lambda_m + s_i + s_j (the common threshold enters once)."""

    lambdas: tuple = (0.0, 1.0)


@dataclass(frozen=True)
class TypeHeterogeneous:
    """Thresholds depending on the node type W.

    ``lambdas0`` / ``lambdas1`` are the per-category thresholds of type 0 / 1.
    rule ``"sum_of_types"``: t = lam[W_i][m] + lam[W_j][m] + s_i + s_j.
    rule ``"type_interaction"``: t = lam0[m] + (lam1[m] - lam0[m]) (W_i + W_j) + s_i + s_j.
    """

    lambdas0: tuple = (0.0, 0.5)
    lambdas1: tuple = (0.0, 1.0)
    rule: str = "sum_of_types"


@dataclass(frozen=True)
class SenderHeterogeneous:
    """Sender thresholds lambda_m + spread * W_i * (m - 1) + s_i; receiver effect s_j for all m."""

    lambdas: tuple = (0.0, 1.0)
    spread: float = 1.0


@dataclass(frozen=True, eq=False)
class Explicit:
    """Fixed N x N x M threshold array; W is still drawn for the covariate."""

    thresholds: np.ndarray


@dataclass(frozen=True)
class DgpConfig:
    n_nodes: int = 25
    scheme: object = field(default_factory=Homogeneous)
    beta0: float = 1.0
    sparsity: object = "0"
    seed: int = 0

    def __post_init__(self):
        if self.n_nodes < 4:
            raise DgpConfigError("need at least 4 nodes")
        if isinstance(self.sparsity, str) and self.sparsity not in SPARSITY:
            raise DgpConfigError(f"unknown sparsity {self.sparsity!r}; use {list(SPARSITY)} or a number")
        s = self.scheme
        if isinstance(s, TypeHeterogeneous):
            if len(s.lambdas0) != len(s.lambdas1):
                raise DgpConfigError("type thresholds differ in length")
            if s.rule not in ("sum_of_types", "type_interaction"):
                raise DgpConfigError(f"unknown composition rule {s.rule!r}")
            for lam in (s.lambdas0, s.lambdas1):
                if np.any(np.diff(lam) < 0):
                    raise DgpConfigError(f"thresholds {lam} are not nondecreasing")
        elif isinstance(s, (Homogeneous, SenderHeterogeneous)):
            if np.any(np.diff(s.lambdas) < 0):
                raise DgpConfigError(f"thresholds {s.lambdas} are not nondecreasing")
        elif isinstance(s, Explicit):
            if s.thresholds.shape[:2] != (self.n_nodes, self.n_nodes):
                raise DgpConfigError("explicit thresholds must be N x N x M")
        else:
            raise DgpConfigError(f"unknown scheme {s!r}")

    @property
    def n_categories(self):
        s = self.scheme
        if isinstance(s, TypeHeterogeneous):
            return len(s.lambdas0)
        if isinstance(s, Explicit):
            return s.thresholds.shape[2]
        return len(s.lambdas)

    @property
    def c_n(self):
        if isinstance(self.sparsity, str):
            return SPARSITY[self.sparsity](self.n_nodes)
        return float(self.sparsity)

    def describe(self):
        d = asdict(self) if not isinstance(self.scheme, Explicit) else {"n_nodes": self.n_nodes}
        d["scheme_type"] = type(self.scheme).__name__
        d["c_n"] = self.c_n
        return d


def node_shifts(N, c_n):
    i = np.arange(1, N + 1)
    return (N - i) / (N - 1) * c_n


def rng_for(seed, rep_index):
    """Counter-based generator keyed by (seed, replication)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, rep_index])))


def dyad_thresholds(cfg, W):
    """t[i, j, m-1] for m = 1..M."""
    N = cfg.n_nodes
    s = node_shifts(N, cfg.c_n)
    shift = (s[:, None] + s[None, :])[:, :, None]
    sch = cfg.scheme
    if isinstance(sch, Homogeneous):
        t = np.asarray(sch.lambdas, dtype=float)[None, None, :] + shift
    elif isinstance(sch, TypeHeterogeneous):
        lam = np.array([sch.lambdas0, sch.lambdas1], dtype=float)
        if sch.rule == "sum_of_types":
            t = lam[W][:, None, :] + lam[W][None, :, :] + shift
        else:
            both = (W[:, None] + W[None, :])[:, :, None]
            t = lam[0][None, None, :] + (lam[1] - lam[0])[None, None, :] * both + shift
    elif isinstance(sch, SenderHeterogeneous):
        M = len(sch.lambdas)
        sender = np.asarray(sch.lambdas, dtype=float)[None, :] + sch.spread * W[:, None] * np.arange(M)[None, :]
        t = sender[:, None, :] + shift
    else:
        t = np.asarray(sch.thresholds, dtype=float)
    if np.any(np.diff(t, axis=2) < 0):
        raise DgpConfigError("dyad thresholds are not nondecreasing in m")
    return t


def draw_network(cfg, rep_index=0):
    N = cfg.n_nodes
    rng = rng_for(cfg.seed, rep_index)
    W = rng.integers(0, 2, size=N)
    U = rng.random((N, N))
    X = (W[:, None] - W[None, :]).astype(float) ** 2
    t = dyad_thresholds(cfg, W)
    prob = expit(cfg.beta0 * X[:, :, None] - t)
    Y = (U[:, :, None] <= prob).sum(axis=2)
    return OrderedNetwork(Y, X[:, :, None], cfg.n_categories, ("x",))


def _stats(values):
    v = np.asarray(values, dtype=float)
    if len(v) == 0:
        return {"mean": float("nan"), "median": float("nan"), "std": float("nan"), "iqr": float("nan")}
    q25, q50, q75 = np.quantile(v, [0.25, 0.5, 0.75])
    return {"mean": float(v.mean()), "median": float(q50),
            "std": float(v.std(ddof=1)) if len(v) > 1 else 0.0, "iqr": float(q75 - q25)}


@dataclass
class McSummary:
    """Per estimator and parameter: mean / median / std / iqr over successful replications."""

    n_replications: int
    stats: dict
    failures: dict
    records: list = field(repr=False, default_factory=list)
    config: dict = field(default_factory=dict)

    def successes(self, label):
        return self.n_replications - self.failures[label]

    def estimates(self, label, param=0):
        return np.array([r["theta"][param] for r in self.records
                         if r["estimator"] == label and r["ok"]])

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump({"n_replications": self.n_replications, "stats": self.stats,
                       "failures": self.failures, "config": self.config}, fh, indent=2, default=str)

    def records_to_csv(self, path):
        width = max((len(r["theta"]) for r in self.records if r["ok"]), default=1)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["rep", "estimator", "ok", "error", "n_obs", "se_robust", "se_naive",
                        *[f"theta_{a}" for a in range(width)]])
            for r in self.records:
                theta = list(r["theta"]) + [""] * (width - len(r["theta"]))
                w.writerow([r["rep"], r["estimator"], int(r["ok"]), r.get("error", ""),
                            r.get("n_obs", ""), r.get("se_robust", ""), r.get("se_naive", ""), *theta])


def replicate(cfg, specs, rep_index, with_se=False, glm_compat=False):
    """One replication: draw, estimate every spec, return one record per spec.

    ``glm_compat`` keeps separated fits as successes (terminal IRLS iterate,
    ``separated`` flag set), the way a standard logit routine reports them.
    """
    net = draw_network(cfg, rep_index)
    shared = {}
    out = []
    for spec in specs:
        rec = {"rep": rep_index, "estimator": spec.label, "ok": False, "theta": []}
        try:
            fam = spec.family
            if fam == "main" and fam not in shared:
                shared[fam] = extract_informative(net, "main")
            rep = estimate(net, spec, informative=shared.get(fam), glm_compat=glm_compat)
            if glm_compat:
                rec["separated"] = any("separated" in w for w in rep.warnings)
            elif not rep.fit.converged:
                rec["error"] = "not-converged"
                out.append(rec)
                continue
            rec.update(ok=True, theta=rep.fit.theta_hat.tolist(), n_obs=rep.n_obs)
            if with_se:
                rec["se_robust"] = robust_vcov_for(rep).se.tolist()
                rec["se_naive"] = np.sqrt(np.diag(naive_vcov(rep.fit.hessian))).tolist()
        except TetradLogitError as err:
            rec["error"] = err.category
        out.append(rec)
    return out


def _replicate_many(args):
    cfg, specs, reps, with_se, glm_compat = args
    return [rec for r in reps for rec in replicate(cfg, specs, r, with_se, glm_compat)]


def _run(cfg, specs, n_reps, with_se, workers, glm_compat=False):
    if n_reps < 1:
        raise ConfigurationError("n_reps must be >= 1")
    reps = list(range(n_reps))
    if workers and workers > 1:
        chunks = [reps[a::workers * 4] for a in range(workers * 4)]
        with ProcessPoolExecutor(workers) as pool:
            parts = pool.map(_replicate_many, [(cfg, specs, c, with_se, glm_compat) for c in chunks])
            records = [rec for part in parts for rec in part]
    else:
        records = _replicate_many((cfg, specs, reps, with_se, glm_compat))
    order = {s.label: a for a, s in enumerate(specs)}
    records.sort(key=lambda r: (r["rep"], order[r["estimator"]]))
    return records


def run_mc(cfg, estimators, n_reps, workers=1, with_se=False, glm_compat=False):
    """Monte Carlo over ``n_reps`` draws of ``cfg``.

    Statistics cover successful replications; failures are counted per
    estimator by error category in the records.
    """
    specs = [EstimatorSpec.parse(e) if isinstance(e, str) else e for e in estimators]
    records = _run(cfg, specs, n_reps, with_se, workers, glm_compat)
    stats, failures = {}, {}
    for spec in specs:
        mine = [r for r in records if r["estimator"] == spec.label]
        ok = [r for r in mine if r["ok"]]
        failures[spec.label] = len(mine) - len(ok)
        width = max((len(r["theta"]) for r in ok), default=1)
        stats[spec.label] = {f"theta_{a}": _stats([r["theta"][a] for r in ok]) for a in range(width)}
        stats[spec.label]["successes"] = len(ok)
        if glm_compat:
            stats[spec.label]["separated"] = sum(bool(r.get("separated")) for r in ok)
    return McSummary(n_reps, stats, failures, records, cfg.describe())


@dataclass
class CoverageSummary:
    """se/std ratio and 90% / 95% coverage of beta0, per standard-error flavour."""

    naive: dict
    robust: dict
    n_replications: int
    failures: int
    estimate_std: float = float("nan")

    def as_dict(self):
        return asdict(self)


def coverage_stats(estimates, ses, beta0):
    """Ratio of mean SE to the Monte Carlo std, and empirical coverage at 90 / 95%."""
    b = np.asarray(estimates, dtype=float)
    se = np.asarray(ses, dtype=float)
    std = b.std(ddof=1)
    dev = np.abs(b - beta0)
    return {
        "se_over_std": float(se.mean() / std),
        "coverage90": float(np.mean(dev <= 1.6448536269514722 * se)),
        "coverage95": float(np.mean(dev <= 1.959963984540054 * se)),
    }


def run_coverage(cfg, n_reps, workers=1, estimator="ptle"):
    if n_reps < 50:
        raise ConfigurationError("coverage study needs at least 50 replications")
    spec = EstimatorSpec.parse(estimator)
    records = _run(cfg, [spec], n_reps, True, workers)
    ok = [r for r in records if r["ok"]]
    b = [r["theta"][0] for r in ok]
    return CoverageSummary(
        coverage_stats(b, [r["se_naive"][0] for r in ok], cfg.beta0),
        coverage_stats(b, [r["se_robust"][0] for r in ok], cfg.beta0),
        n_reps, n_reps - len(ok), float(np.std(b, ddof=1)),
    )


def degree_table(cfg, n_reps):
    """Per cutoff, every degree statistic averaged over replications."""
    M = cfg.n_categories
    acc = {m: [] for m in range(1, M + 1)}
    for rep in range(n_reps):
        net = draw_network(cfg, rep)
        for m in acc:
            acc[m].append(degree_summary(binarize(net, m)).as_dict())
    out = {}
    for m, rows in acc.items():
        out[m] = {key: float(np.mean([r[key] for r in rows]))
                  for key in ("mean", "q25", "median", "q75", "min", "max")}
    return out


def with_top_threshold(cfg, value):
    """Copy of ``cfg`` with the last threshold (lambda_M, or lambda_{M,1} for type designs) set."""
    s = cfg.scheme
    if isinstance(s, TypeHeterogeneous):
        return replace(cfg, scheme=replace(s, lambdas1=tuple(s.lambdas1[:-1]) + (float(value),)))
    if isinstance(s, (Homogeneous, SenderHeterogeneous)):
        return replace(cfg, scheme=replace(s, lambdas=tuple(s.lambdas[:-1]) + (float(value),)))
    raise ConfigurationError("threshold sweep needs a Homogeneous or TypeHeterogeneous design")


def threshold_sweep(cfg_base, grid, n_reps, workers=1):
    """Mean degree per cutoff and mean PTLE / ETLE estimate at each grid value."""
    rows = []
    for value in grid:
        if not (0.0 <= value <= 3.0):
            raise ConfigurationError(f"sweep values must lie in [0, 3], got {value}")
        cfg = with_top_threshold(cfg_base, value)
        mc = run_mc(cfg, ["ptle", "etle"], n_reps, workers)
        deg = degree_table(cfg, n_reps)
        row = {"lambda_top": float(value)}
        for m, d in deg.items():
            row[f"mean_degree_m{m}"] = d["mean"]
        for label in ("ptle", "etle"):
            row[f"{label}_mean"] = mc.stats[label]["theta_0"]["mean"]
            row[f"{label}_failures"] = mc.failures[label]
        rows.append(row)
    return rows


def write_rows_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


@dataclass
class SufficiencyResult:
    beta0: float
    beta_hat: float
    se_robust: float
    n_pooled: int
    bins: list
    n_binned: int

    @property
    def beta_z(self):
        return (self.beta_hat - self.beta0) / self.se_robust

    @property
    def max_bin_z(self):
        return max(abs(b["z"]) for b in self.bins if b["n"] > 0)

    @property
    def chi2_pvalue(self):
        """Goodness of fit of all bins jointly (sum of squared binomial z)."""
        stat = sum(b["z"] ** 2 for b in self.bins)
        return float(chi2.sf(stat, len(self.bins)))


def sufficiency_check(cfg, n_reps, family="main", min_binned=10_000, max_reps=200_000):
    """Empirical check that P(y* = 1 | informative) = L(r'b0 - lambda0) under fixed effects.

    ``lambda0`` is zero for the main and sender_het families and the threshold
    contrast of the cutoff vector for the additive family (which needs a
    Homogeneous design, i.e. additive effects with common thresholds).

    Pooled part: all informative pairs from ``n_reps`` networks, one logit fit
    with dyad-clustered sandwich SEs (dyads of different networks are
    different clusters).

    Binned part: independent observations only.  Each network contributes
    disjoint node quadruples {4g..4g+3}, used in both sender/receiver
    orientations, each with one cutoff vector fixed in advance, so no two
    observations share a dyad.  Replications continue until ``min_binned``
    informative observations are collected.  Bins are the distinct values of
    the true index.
    """
    if family not in ("main", "sender_het", "additive"):
        raise ConfigurationError(f"unknown family {family!r}")
    if family == "additive" and not isinstance(cfg.scheme, Homogeneous):
        raise ConfigurationError("the additive check needs a Homogeneous design")
    N, M = cfg.n_nodes, cfg.n_categories
    if N < 4:
        raise ConfigurationError("need at least 4 nodes")
    ys, xs, dyads = [], [], []
    offset = 0
    for rep in range(n_reps):
        inf = extract_informative(draw_network(cfg, rep), family)
        ys.append(inf.y)
        xs.append(np.hstack([inf.r, inf.loadings]) if family == "additive" else inf.r)
        dyads.append(inf.dyad_index() + offset)
        offset += N * N
    prob = clogit.LogitProblem(np.concatenate(ys), np.vstack(xs))
    fr = clogit.fit(prob)
    vc = sandwich(clogit.score_contributions(prob, fr.theta_hat), np.vstack(dyads), offset, fr.hessian)

    # fixed disjoint tetrads: senders (a, b) -> receivers (c, d) and the reverse
    cuts = [c.vector for c in default_cutoffs(family, M)]
    lam = np.asarray(cfg.scheme.lambdas, dtype=float) if family == "additive" else np.zeros(M)
    g = 4 * np.arange(N // 4)
    quads = np.concatenate([np.stack([g, g + 1, g + 2, g + 3], 1), np.stack([g + 2, g + 3, g, g + 1], 1)])
    i1, i2, j1, j2 = quads.T
    cuts = np.array(cuts)
    sel_y, sel_idx = [], []
    rep, slot, n_sel = n_reps, 0, 0
    while n_sel < min_binned and rep < n_reps + max_reps:
        net = draw_network(cfg, rep)
        Y, X = net.outcomes, net.covariates[:, :, 0]
        m11, m12, m21, m22 = cuts[(slot + np.arange(len(quads))) % len(cuts)].T
        slot += len(quads)
        z2 = ((Y[i1, j1] >= m11).astype(int) - (Y[i1, j2] >= m12)) - \
             ((Y[i2, j1] >= m21).astype(int) - (Y[i2, j2] >= m22))
        hit = np.abs(z2) == 2
        r = (X[i1, j1] - X[i1, j2]) - (X[i2, j1] - X[i2, j2])
        lam0 = (lam[m11 - 1] - lam[m12 - 1]) - (lam[m21 - 1] - lam[m22 - 1])
        sel_y.append((z2[hit] > 0).astype(int))
        sel_idx.append(np.round(r[hit] * cfg.beta0 - lam0[hit], 12))
        n_sel += int(hit.sum())
        rep += 1
    sel_y, sel_idx = np.concatenate(sel_y), np.concatenate(sel_idx)
    bins = []
    for value in np.unique(sel_idx):
        hit = sel_idx == value
        n = int(hit.sum())
        p = float(expit(value))
        freq = float(sel_y[hit].mean())
        se = math.sqrt(p * (1 - p) / n)
        bins.append({"index": float(value), "n": n, "expected": p, "observed": freq,
                     "z": (freq - p) / se if se > 0 else 0.0})
    return SufficiencyResult(cfg.beta0, float(fr.theta_hat[0]), float(vc.se[0]), len(prob), bins, n_sel)
