"""PTLE, ETLE, single-cutoff, additive-pooled and sender-heterogeneous estimators."""

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import clogit
from .errors import ConfigurationError, NoInformationError, RankDeficiencyError
from .network import check_cutoff
from .tetrads import SenderPair, Uniform, Vector, default_cutoffs, extract_informative

log = logging.getLogger(__name__)

VARIANTS = ("ptle", "etle", "binary", "additive", "senderhet")


@dataclass(frozen=True)
class EstimatorSpec:
    """Which estimator to run.

    ``cutoffs`` lists cutoff levels for PTLE/ETLE, the single level for
    Binary, explicit ``Vector`` objects for AdditivePooled or ``(m, m')``
    pairs for SenderHet.  ``None`` means the full default grid.
    """

    variant: str
    cutoffs: tuple = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"unknown estimator {self.variant!r}")
        if self.variant == "binary" and (self.cutoffs is None or len(self.cutoffs) != 1):
            raise ConfigurationError("binary estimator needs exactly one cutoff")
        if self.cutoffs is not None:
            object.__setattr__(self, "cutoffs", tuple(self.cutoffs))

    @classmethod
    def ptle(cls, cutoffs=None):
        return cls("ptle", cutoffs)

    @classmethod
    def etle(cls, cutoffs=None):
        return cls("etle", cutoffs)

    @classmethod
    def binary(cls, m):
        return cls("binary", (m,))

    @classmethod
    def additive(cls, vectors=None):
        return cls("additive", vectors)

    @classmethod
    def senderhet(cls, pairs=None):
        return cls("senderhet", pairs)

    @classmethod
    def parse(cls, text):
        """'ptle', 'etle', 'binary:3', 'additive', 'senderhet'."""
        name, _, arg = text.partition(":")
        name = name.strip().lower()
        if name == "binary":
            if not arg:
                raise ConfigurationError("use binary:<m>")
            return cls.binary(int(arg))
        if arg:
            raise ConfigurationError(f"estimator {name!r} takes no argument")
        return cls(name)

    @property
    def label(self):
        return f"binary:{self.cutoffs[0]}" if self.variant == "binary" else self.variant

    @property
    def family(self):
        return {"additive": "additive", "senderhet": "sender_het"}.get(self.variant, "main")

    def cutoff_specs(self, M):
        if self.variant in ("ptle", "etle", "binary"):
            levels = range(1, M + 1) if self.cutoffs is None else self.cutoffs
            return tuple(Uniform(check_cutoff(m, M)) for m in levels)
        if self.variant == "additive":
            if self.cutoffs is None:
                return tuple(default_cutoffs("additive", M))
            return tuple(v if isinstance(v, Vector) else Vector(*v) for v in self.cutoffs)
        if self.cutoffs is None:
            return tuple(default_cutoffs("sender_het", M))
        return tuple(v if isinstance(v, SenderPair) else SenderPair(*v) for v in self.cutoffs)


@dataclass
class EstimateReport:
    spec: EstimatorSpec
    fit: clogit.FitResult
    informative: object
    problem: clogit.LogitProblem
    counts_per_cutoff: dict
    informative_share_per_cutoff: dict
    dropped_cutoffs: list = field(default_factory=list)
    threshold_estimates: np.ndarray = None
    param_names: tuple = ()
    warnings: list = field(default_factory=list)

    @property
    def beta(self):
        return self.fit.theta_hat[: self.informative.k]

    @property
    def n_obs(self):
        return len(self.problem)

    @property
    def q_total(self):
        return self.informative.q_total


def etle_weights(informative):
    """Per-observation ETLE weights proportional to 1 / q*_m.

    Scaled by (sum of counts) / (number of used cutoffs) so that a single
    cutoff, or equal counts, gives weights of exactly 1.
    """
    counts = np.bincount(informative.cutoff_id, minlength=len(informative.cutoffs))
    used = counts > 0
    per = np.zeros(len(counts))
    per[used] = counts.sum() / (used.sum() * counts[used])
    return per[informative.cutoff_id]


def _problem(inf, weights=None, with_loadings=False):
    x = inf.r
    if with_loadings:
        x = np.hstack([x, inf.loadings.astype(float)])
    return clogit.LogitProblem(inf.y, x, weights)


def estimate(net, spec, informative=None, threads=1, glm_compat=False, **fit_kw):
    """Run one estimator on ``net``.

    ``informative`` may be a previously extracted set of the same family that
    covers the needed cutoffs (e.g. one main-family scan shared by PTLE, ETLE
    and Binary fits).
    """
    M = net.n_categories
    cutoffs = spec.cutoff_specs(M)
    if informative is None or informative.family != spec.family:
        informative = extract_informative(net, spec.family, cutoffs, threads=threads)
    if informative.cutoffs != cutoffs:
        informative = informative.subset(cutoffs)
    return estimate_from_informative(informative, spec, glm_compat=glm_compat, **fit_kw)


def estimate_from_informative(inf, spec, glm_compat=False, **fit_kw):
    """Fit ``spec`` on an extracted informative set.

    With ``glm_compat`` the fit mimics a textbook IRLS routine: separated
    samples yield the terminal iterate (flagged in ``warnings``) instead of a
    ``SeparationError``.  Only meant for reproducing published numbers.
    """
    counts = inf.counts_per_cutoff
    shares = {c: n / inf.q_total for c, n in counts.items()}
    notes, dropped = [], []
    if len(inf) == 0:
        raise NoInformationError(
            f"{spec.label}: no informative tetrad-cutoff pairs among {inf.q_total} tetrads")

    weights = None
    if spec.variant == "etle":
        dropped = [c for c, n in counts.items() if n == 0]
        if dropped:
            msg = f"ETLE: dropped cutoffs with no informative tetrads: {[c.label for c in dropped]}"
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
            notes.append(msg)
            inf = inf.subset([c for c in inf.cutoffs if counts[c] > 0])
        weights = etle_weights(inf)

    names = list(inf.covariate_names or [f"x{c + 1}" for c in range(inf.k)])
    thresholds = None
    if spec.variant == "additive" and inf.n_categories > 1:
        # thresholds whose loading is zero on every observation are not identified
        L = inf.loadings
        used = np.flatnonzero(L.any(axis=0))
        skipped = [m + 2 for m in range(L.shape[1]) if m not in set(used)]
        try:
            if not len(used):
                raise RankDeficiencyError("no cutoff vector loads on any threshold", None)
            prob = clogit.LogitProblem(inf.y, np.hstack([inf.r, L[:, used].astype(float)]))
            fr = clogit.fit(prob, **fit_kw)
            thresholds = np.full(L.shape[1], np.nan)
            thresholds[used] = fr.theta_hat[inf.k:]
            names += [f"lambda_{m + 2}" for m in used]
            if skipped:
                notes.append(f"additive: lambda_{skipped} not identified by the chosen cutoff vectors")
        except RankDeficiencyError as err:
            # loadings carry no information (e.g. only (m,m,m,m) vectors): fit beta alone
            if np.linalg.matrix_rank(inf.r) < inf.k:
                raise
            msg = f"additive: threshold block not identified ({err}); fitted beta only"
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
            notes.append(msg)
            prob = _problem(inf)
            fr = clogit.fit(prob, **fit_kw)
    else:
        prob = _problem(inf, weights)
        if glm_compat:
            fr, separated = clogit.fit_glm_like(prob)
            if separated:
                notes.append(f"{spec.label}: separated sample; terminal IRLS iterate reported")
        else:
            fr = clogit.fit(prob, **fit_kw)
    if not fr.converged and not glm_compat:
        notes.append(f"{spec.label}: Newton did not converge (|score| = {fr.gradient_norm:.3g})")
    return EstimateReport(spec, fr, inf, prob, counts, shares, dropped, thresholds,
                          tuple(names), notes)


@dataclass(frozen=True)
class CutoffDiagnostic:
    cutoff: object
    count: int
    share: float
    rank: int
    rank_deficient: bool


@dataclass(frozen=True)
class Diagnostics:
    rows: tuple
    pooled_rank: int
    k: int

    @property
    def pooled_full_rank(self):
        return self.pooled_rank == self.k

    @property
    def flagged(self):
        return [row.cutoff for row in self.rows if row.rank_deficient]

    def as_records(self):
        return [
            {"cutoff": row.cutoff.label, "count": row.count, "share": row.share,
             "rank": row.rank, "flag": row.rank_deficient}
            for row in self.rows
        ]


def identification_diagnostics(report_or_informative):
    """Per-cutoff informative counts and rank of sum of r r' over informative pairs.

    A cutoff is flagged when its own design is rank deficient; ETLE relies on
    every cutoff, PTLE only on the pooled rank.
    """
    inf = getattr(report_or_informative, "informative", report_or_informative)
    k = inf.k
    rows = []
    for c_id, c in enumerate(inf.cutoffs):
        r = inf.r[inf.cutoff_id == c_id]
        rank = int(np.linalg.matrix_rank(r.T @ r)) if len(r) else 0
        rows.append(CutoffDiagnostic(c, len(r), len(r) / inf.q_total, rank, rank < k))
    pooled = int(np.linalg.matrix_rank(inf.r.T @ inf.r)) if len(inf) else 0
    return Diagnostics(tuple(rows), pooled, k)
