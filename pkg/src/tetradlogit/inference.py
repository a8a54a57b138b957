"""Dyad-clustered sandwich variance, naive variance and Wald tables."""

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from . import clogit
from .errors import ContractError, RankDeficiencyError


@dataclass(frozen=True)
class RobustVcov:
    omega: np.ndarray
    hessian_inv: np.ndarray
    upsilon: np.ndarray
    n_dyads_contributing: int

    @property
    def se(self):
        return np.sqrt(np.clip(np.diag(self.omega), 0.0, None))


def _inverse(H):
    H = np.atleast_2d(np.asarray(H, dtype=float))
    try:
        np.linalg.cholesky(-H)
        return np.linalg.inv(H)
    except np.linalg.LinAlgError:
        vals, vecs = np.linalg.eigh(H)
        raise RankDeficiencyError("Hessian is singular or not negative definite",
                                  vecs[:, np.argmax(vals)]) from None


def scatter_scores(scores, dyads, n_dyads):
    """Sum each row of ``scores`` into the four dyads listed in the same row of ``dyads``.

    Returns (ids of touched dyads, their summed scores).
    """
    scores = np.asarray(scores, dtype=float)
    ids = np.flatnonzero(np.bincount(dyads.ravel(), minlength=n_dyads))
    v = np.zeros((n_dyads, scores.shape[1]))
    for c in range(scores.shape[1]):
        for pos in range(dyads.shape[1]):
            v[:, c] += np.bincount(dyads[:, pos], weights=scores[:, c], minlength=n_dyads)
    return ids, v[ids]


def dyad_scores(informative, problem, theta):
    """v_ij for every dyad touched by an informative observation."""
    s = clogit.score_contributions(problem, theta)
    return scatter_scores(s, informative.dyad_index(), informative.n_nodes ** 2)


def sandwich(scores, dyads, n_dyads, H):
    """RobustVcov from per-observation scores clustered on their four dyads."""
    H = np.atleast_2d(np.asarray(H, dtype=float))
    Hinv = _inverse(H)
    _, v = scatter_scores(scores, dyads, n_dyads)
    U = v.T @ v
    U = 0.5 * (U + U.T)
    omega = Hinv @ U @ Hinv
    omega = 0.5 * (omega + omega.T)
    return RobustVcov(omega, Hinv, U, int(np.count_nonzero(np.any(v != 0, axis=1))))


def robust_vcov(informative, problem, theta_hat, hessian_at_fit):
    """Sandwich H^-1 Upsilon H^-1 with Upsilon = sum over dyads of v_ij v_ij'."""
    theta_hat = np.atleast_1d(np.asarray(theta_hat, dtype=float))
    H = np.atleast_2d(np.asarray(hessian_at_fit, dtype=float))
    if len(problem) != len(informative):
        raise ContractError(f"problem has {len(problem)} rows, informative set {len(informative)}")
    if not (problem.p == len(theta_hat) == H.shape[0] == H.shape[1]):
        raise ContractError("dimension mismatch between problem, estimate and Hessian")
    s = clogit.score_contributions(problem, theta_hat)
    return sandwich(s, informative.dyad_index(), informative.n_nodes ** 2, H)


def robust_vcov_for(report):
    return robust_vcov(report.informative, report.problem, report.fit.theta_hat, report.fit.hessian)


def naive_vcov(hessian_at_fit):
    """(-H)^-1: the variance a standard logit routine reports."""
    return -_inverse(hessian_at_fit)


@dataclass(frozen=True)
class WaldRow:
    name: str
    estimate: float
    se_robust: float
    se_naive: float
    z: float
    p: float
    ci90: tuple
    ci95: tuple
    infinite_z: bool = False

    def as_dict(self):
        return {
            "name": self.name, "beta": self.estimate, "se_robust": self.se_robust,
            "se_naive": self.se_naive, "z": self.z, "p": self.p,
            "ci90": list(self.ci90), "ci95": list(self.ci95), "infinite_z": self.infinite_z,
        }


def wald_rows(names, estimate, se_robust, se_naive=None):
    estimate = np.atleast_1d(np.asarray(estimate, dtype=float))
    se_robust = np.atleast_1d(np.asarray(se_robust, dtype=float))
    if se_naive is None:
        se_naive = np.full_like(estimate, np.nan)
    if not (len(names) == len(estimate) == len(se_robust) == len(se_naive)):
        raise ContractError("Wald table dimensions disagree")
    z90, z95 = norm.ppf(0.95), norm.ppf(0.975)
    rows = []
    for name, b, se, sn in zip(names, estimate, se_robust, se_naive):
        if se > 0:
            z, inf = b / se, False
        elif b == 0:
            z, inf = 0.0, False
        else:
            z, inf = float(np.copysign(np.inf, b)), True
        p = float(2 * norm.sf(abs(z)))
        rows.append(WaldRow(str(name), float(b), float(se), float(sn), float(z), p,
                            (b - z90 * se, b + z90 * se), (b - z95 * se, b + z95 * se), inf))
    return rows


def wald_table(report, vcov):
    theta = report.fit.theta_hat
    if vcov.omega.shape != (len(theta), len(theta)):
        raise ContractError("variance matrix does not match the estimate")
    naive = np.sqrt(np.diag(naive_vcov(report.fit.hessian)))
    return wald_rows(report.param_names, theta, vcov.se, naive)
