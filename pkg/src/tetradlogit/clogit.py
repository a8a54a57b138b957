"""Weighted binary logit: objective, derivatives and a damped Newton maximizer."""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.special import expit

from .errors import ContractError, RankDeficiencyError, SeparationError


@dataclass(frozen=True, eq=False)
class LogitProblem:
    y: np.ndarray
    x: np.ndarray
    weights: np.ndarray = None

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float).ravel()
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.shape[0] != len(y):
            raise ContractError(f"{len(y)} outcomes but {x.shape[0]} design rows")
        if not np.isin(y, (0.0, 1.0)).all():
            raise ContractError("outcomes must be 0/1")
        w = np.ones(len(y)) if self.weights is None else np.asarray(self.weights, dtype=float).ravel()
        if len(w) != len(y):
            raise ContractError("weights length mismatch")
        if not (np.isfinite(w).all() and (w > 0).all()):
            raise ContractError("weights must be finite and positive")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "weights", w)

    @property
    def p(self):
        return self.x.shape[1]

    def __len__(self):
        return len(self.y)


def log1pexp(t):
    return np.logaddexp(0.0, t)


def nll(prob, theta):
    """-sum w [y log L(x'theta) + (1 - y) log(1 - L(x'theta))]."""
    eta = prob.x @ np.asarray(theta, dtype=float)
    return float(np.sum(prob.weights * (log1pexp(eta) - prob.y * eta)))


def score(prob, theta):
    eta = prob.x @ np.asarray(theta, dtype=float)
    return prob.x.T @ (prob.weights * (prob.y - expit(eta)))


def hessian(prob, theta):
    eta = prob.x @ np.asarray(theta, dtype=float)
    lam = expit(eta)
    c = prob.weights * lam * (1.0 - lam)
    return -(prob.x * c[:, None]).T @ prob.x


def score_contributions(prob, theta):
    """Per-observation score rows w (y - L(x'theta)) x."""
    eta = prob.x @ np.asarray(theta, dtype=float)
    return prob.x * (prob.weights * (prob.y - expit(eta)))[:, None]


NOISE = 64 * np.finfo(float).eps


@dataclass
class FitResult:
    theta_hat: np.ndarray
    objective: float
    gradient_norm: float
    iterations: int
    converged: bool
    hessian: np.ndarray
    history: list = field(default_factory=list, repr=False)


def score_floor(prob):
    """Rounding error scale of the score: 8 eps sqrt(n) max_a sum_i |w_i x_ia|."""
    if len(prob) == 0:
        return 0.0
    mass = np.max(np.abs(prob.x).T @ prob.weights)
    return float(8 * np.finfo(float).eps * np.sqrt(len(prob)) * mass)


def separation_direction(prob):
    """Unit direction d with (2y - 1) x'd >= 0 everywhere and > 0 somewhere, or None.

    Solved as a linear program over the distinct signed design rows; the
    likelihood has a finite maximizer iff no such direction exists (given a
    full-rank design).
    """
    a = (2.0 * prob.y - 1.0)[:, None] * prob.x
    a = np.unique(a, axis=0)
    p = prob.p
    res = linprog(-a.sum(axis=0), A_ub=-a, b_ub=np.zeros(len(a)),
                  bounds=[(-1.0, 1.0)] * p, method="highs")
    if res.status != 0 or -res.fun <= 1e-9 * max(1.0, np.abs(a).sum()):
        return None
    d = res.x
    return d / np.linalg.norm(d)


def _null_direction(H):
    vals, vecs = np.linalg.eigh(H)
    return vecs[:, np.argmax(vals)]


def _check_rank(prob):
    G = (prob.x * prob.weights[:, None]).T @ prob.x
    vals, vecs = np.linalg.eigh(G)
    scale = max(vals.max(initial=0.0), np.finfo(float).tiny)
    bad = vals <= scale * prob.p * 1e-12
    if bad.any():
        raise RankDeficiencyError(
            f"design has rank {int((~bad).sum())} < {prob.p}", vecs[:, np.argmax(bad)])


def fit(prob, init=None, tol=1e-8, max_iter=100, max_halvings=30, divergence_bound=20.0,
        saturation=15.0):
    """Maximize the weighted logit log-likelihood by Newton steps with step halving.

    Converges when the sup-norm of the score is at most ``tol``, or at most
    the rounding floor of the score sum when that is larger (very large
    problems cannot resolve the score below it).  When the
    iterate runs past ``divergence_bound`` or the fitted index saturates
    (``|x'theta| > saturation``), an exact linear-programming check decides
    whether the data are separated and raises ``SeparationError`` if so.
    """
    if len(prob) == 0:
        raise ContractError("logit problem has no observations")
    _check_rank(prob)
    theta = np.zeros(prob.p) if init is None else np.array(init, dtype=float)
    f = nll(prob, theta)
    history = [f]
    converged = False
    it = 0
    checked = False
    floor = score_floor(prob)

    def check_separation():
        d = separation_direction(prob)
        if d is not None:
            raise SeparationError(
                "data are (quasi-)completely separated; no finite maximizer along "
                f"direction {np.round(d, 6).tolist()}", d)

    while True:
        g = score(prob, theta)
        gnorm = float(np.max(np.abs(g)))
        if gnorm <= max(tol, floor):
            converged = True
            break
        if it >= max_iter:
            break
        if not checked and np.max(np.abs(theta)) > divergence_bound:
            check_separation()
            checked = True
        H = hessian(prob, theta)
        try:
            L = np.linalg.cholesky(-H)
            step = np.linalg.solve(L.T, np.linalg.solve(L, g))
        except np.linalg.LinAlgError:
            if not checked:
                check_separation()
            raise RankDeficiencyError("Hessian is singular during Newton iterations",
                                      _null_direction(H)) from None
        t = 1.0
        # near the optimum the decrease is below the rounding noise of f
        slack = NOISE * max(abs(f), 1.0)
        for _ in range(max_halvings + 1):
            cand = theta + t * step
            fc = nll(prob, cand)
            if fc <= f + slack:
                break
            t *= 0.5
        else:
            break
        theta, f = cand, fc
        history.append(f)
        it += 1

    if not checked and np.max(np.abs(prob.x @ theta)) > saturation:
        check_separation()
    H = hessian(prob, theta)
    if converged:
        vals = np.linalg.eigvalsh(H)
        if not (vals < 0).all():
            raise RankDeficiencyError("Hessian at the optimum is not negative definite",
                                      _null_direction(H))
    return FitResult(theta, -f, gnorm, it, converged, H, history)


def fit_glm_like(prob, epsilon=1e-8, maxit=25):
    """Reproduce what a textbook IRLS routine reports, separation included.

    Newton (= IRLS for the logit link) from zero, stopping when the relative
    deviance change drops below ``epsilon`` or after ``maxit`` iterations.  On
    separated data this returns the large finite iterate such routines print
    instead of raising.  Returns (FitResult, separated flag).
    """
    _check_rank(prob)
    theta = np.zeros(prob.p)
    dev = 2 * nll(prob, theta)
    history = [dev / 2]
    converged = False
    it = 0
    for it in range(1, maxit + 1):
        H = hessian(prob, theta)
        try:
            theta = theta + np.linalg.solve(-H, score(prob, theta))
        except np.linalg.LinAlgError:
            break
        new = 2 * nll(prob, theta)
        history.append(new / 2)
        if abs(new - dev) / (abs(new) + 0.1) < epsilon:
            dev, converged = new, True
            break
        dev = new
    separated = separation_direction(prob) is not None
    g = score(prob, theta)
    return FitResult(theta, -dev / 2, float(np.max(np.abs(g))), it, converged and not separated,
                     hessian(prob, theta), history), separated
