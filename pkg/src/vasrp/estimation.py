"""Maximum-likelihood fitting of response-shape distributions.

Single Beta/Gaussian fits, shape-constrained Beta fits for the tail styles,
a deterministic two-component EM, AIC, and the tail-weight grid search.
All functions are pure over immutable inputs and safe to run in parallel
across bootstrap replicates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
from scipy.optimize import minimize
from scipy.special import betaln, digamma

from .distributions import (
    BetaParams,
    GaussianParams,
    Mixture2,
    ProfileMixture,
    beta_from_moments,
    log_pdf,
    mean_std,
)
from .errors import DegenerateDataError, InfeasibleMomentsError, InsufficientDataError

__all__ = [
    "FitResult",
    "ShapeClass",
    "aic",
    "fit_unimodal",
    "fit_beta_constrained",
    "fit_mixture2_em",
    "fit_weight_grid",
]

# Box for Beta shape parameters during optimization.
_SHAPE_MIN = 1e-3
_SHAPE_MAX = 1e3
# Strict shape constraints are clamped this close to the boundary at 1.
_BOUNDARY_EPS = 1e-6

_EM_MAX_ITER = 500
_EM_REL_TOL = 1e-6

# AIC differences below this are ties, resolved toward fewer parameters.
AIC_TIE_EPS = 1e-9


def aic(loglik: float, k: int) -> float:
    """Akaike information criterion: 2k - 2*loglik."""
    return 2.0 * k - 2.0 * loglik


@dataclass(frozen=True)
class FitResult:
    """A fitted model: parameters, log-likelihood on the fitted data, and AIC.

    ``aic`` is always derived from (loglik, k) at construction.  EM fits carry
    their accepted log-likelihood trace and a convergence flag.
    """

    params: Any
    loglik: float
    k: int
    converged: bool = True
    n_iter: int = 0
    loglik_trace: tuple[float, ...] = ()
    aic: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "aic", aic(self.loglik, self.k))


class ShapeClass(Enum):
    """Constraint regions for the tail-style Beta fits.

    ERS: alpha < 1 and beta < 1 (U shape).
    DRS: alpha <= 1 and beta > 1 (monotone decreasing).
    ARS: alpha > 1 and beta <= 1 (monotone increasing).
    """

    ERS = "ers"
    DRS = "drs"
    ARS = "ars"

    def bounds(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """((alpha_lo, alpha_hi), (beta_lo, beta_hi)) with boundary clamps."""
        below = 1.0 - _BOUNDARY_EPS
        above = 1.0 + _BOUNDARY_EPS
        if self is ShapeClass.ERS:
            return (_SHAPE_MIN, below), (_SHAPE_MIN, below)
        if self is ShapeClass.DRS:
            return (_SHAPE_MIN, 1.0), (above, _SHAPE_MAX)
        return (above, _SHAPE_MAX), (_SHAPE_MIN, 1.0)

    def satisfied_by(self, p: BetaParams) -> bool:
        if self is ShapeClass.ERS:
            return p.alpha < 1.0 and p.beta < 1.0
        if self is ShapeClass.DRS:
            return p.alpha <= 1.0 and p.beta > 1.0
        return p.alpha > 1.0 and p.beta <= 1.0


def _check_data(data, min_n: int) -> np.ndarray:
    arr = np.asarray(data, dtype=float).ravel()
    if arr.size < min_n:
        raise InsufficientDataError(f"need at least {min_n} observations, got {arr.size}")
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ValueError("observations must lie strictly inside (0, 1)")
    return arr


def _beta_loglik_and_grad(a: float, b: float, s1: float, s2: float, n: int):
    ll = n * (-betaln(a, b)) + (a - 1.0) * s1 + (b - 1.0) * s2
    dab = digamma(a + b)
    da = s1 - n * (digamma(a) - dab)
    db = s2 - n * (digamma(b) - dab)
    return ll, da, db


def _fit_beta_box(data: np.ndarray, bounds_ab) -> tuple[BetaParams, float]:
    """Maximize the Beta likelihood over a box in (alpha, beta).

    Optimizes in log-shape space from a moment-matched start (plus the box
    center as a fallback start) and clips the result exactly into the box.
    """
    n = data.size
    s1 = float(np.log(data).sum())
    s2 = float(np.log1p(-data).sum())
    (a_lo, a_hi), (b_lo, b_hi) = bounds_ab
    log_bounds = [(math.log(a_lo), math.log(a_hi)), (math.log(b_lo), math.log(b_hi))]

    def neg(u):
        a, b = np.exp(u)
        ll, da, db = _beta_loglik_and_grad(a, b, s1, s2, n)
        return -ll, -np.array([da * a, db * b])

    starts = []
    m = float(data.mean())
    s = float(data.std())
    if s > 0.0:
        try:
            mm = beta_from_moments(m, s)
            starts.append(
                (
                    min(max(mm.alpha, a_lo), a_hi),
                    min(max(mm.beta, b_lo), b_hi),
                )
            )
        except InfeasibleMomentsError:
            pass
    starts.append((math.exp(0.5 * (log_bounds[0][0] + log_bounds[0][1])),
                   math.exp(0.5 * (log_bounds[1][0] + log_bounds[1][1]))))

    best = None
    for a0, b0 in starts:
        res = minimize(
            neg,
            x0=np.log([a0, b0]),
            jac=True,
            method="L-BFGS-B",
            bounds=log_bounds,
            options={"maxiter": 500, "ftol": 1e-14, "gtol": 1e-10},
        )
        if best is None or res.fun < best.fun:
            best = res
    a, b = np.exp(best.x)
    a = float(min(max(a, a_lo), a_hi))
    b = float(min(max(b, b_lo), b_hi))
    ll, _, _ = _beta_loglik_and_grad(a, b, s1, s2, n)
    return BetaParams(a, b), float(ll)


def fit_unimodal(data, family: str, min_n: int = 3) -> FitResult:
    """Unconstrained MLE of a single Beta or Gaussian on data in (0, 1).

    Gaussian uses the closed-form MLE (mean, population std); Beta maximizes
    the likelihood numerically.  No truncation correction is applied when
    the data is a range-restricted subset.  k = 2.
    """
    arr = _check_data(data, max(min_n, 3))
    if np.ptp(arr) == 0.0:
        raise DegenerateDataError("all observations identical; no spread to fit")
    if family == "gaussian":
        mu = float(arr.mean())
        sigma = float(np.sqrt(np.mean((arr - mu) ** 2)))
        params = GaussianParams(mu, sigma)
        ll = float(log_pdf(params, arr).sum())
        return FitResult(params, ll, k=2)
    if family == "beta":
        params, ll = _fit_beta_box(arr, ((_SHAPE_MIN, _SHAPE_MAX), (_SHAPE_MIN, _SHAPE_MAX)))
        return FitResult(params, ll, k=2)
    raise ValueError(f"unknown family: {family!r}")


def fit_beta_constrained(data, shape: ShapeClass, min_n: int = 5) -> FitResult:
    """Beta MLE restricted to a tail-style shape region.

    When the unconstrained optimum violates the region, the result lies on
    the constraint boundary (shape parameter clamped at 1 within 1e-6).
    k = 2.
    """
    arr = _check_data(data, min_n)
    params, ll = _fit_beta_box(arr, shape.bounds())
    return FitResult(params, ll, k=2)


def _moment_component(values: np.ndarray, weights: np.ndarray | None, family: str):
    if weights is None:
        m = float(values.mean())
        v = float(np.mean((values - m) ** 2))
    else:
        wsum = float(weights.sum())
        m = float((weights * values).sum() / wsum)
        v = float((weights * (values - m) ** 2).sum() / wsum)
    s = math.sqrt(max(v, 0.0))
    if family == "gaussian":
        return GaussianParams(m, max(s, 1e-9))
    # Keep the moment inversion feasible for near-degenerate clusters.
    cap = 0.999 * math.sqrt(m * (1.0 - m))
    s = min(max(s, 1e-6), cap)
    return beta_from_moments(m, s)


def _ordered_mixture(w1: float, c1, c2) -> Mixture2:
    # Deterministic component labels: descending weight, ties by ascending mean.
    w2 = 1.0 - w1
    if (w1 < w2 - 1e-12) or (abs(w1 - w2) <= 1e-12 and mean_std(c1)[0] > mean_std(c2)[0]):
        return Mixture2(w2, c2, c1)
    return Mixture2(w1, c1, c2)


def fit_mixture2_em(data, family: str, min_n: int = 10) -> FitResult:
    """Two-component EM with weighted moment-matching M-steps.

    Initialization is deterministic: split the sorted data at its median,
    moment-match each half, start with equal weights.  Iterates until the
    relative log-likelihood change drops below 1e-6 or 500 iterations.  The
    accepted iterate sequence is non-decreasing in log-likelihood (a
    moment-update that lowers it terminates at the previous iterate);
    non-convergence returns the best iterate flagged, never an error.
    k = 5.
    """
    arr = _check_data(data, min_n)
    if np.ptp(arr) == 0.0:
        raise DegenerateDataError("all observations identical; no spread to fit")

    srt = np.sort(arr)
    half = arr.size // 2
    comp1 = _moment_component(srt[:half], None, family)
    comp2 = _moment_component(srt[half:], None, family)
    w1 = 0.5

    def total_loglik(w, c1, c2) -> float:
        lp = np.logaddexp(math.log(w) + log_pdf(c1, arr), math.log(1.0 - w) + log_pdf(c2, arr))
        return float(lp.sum())

    cur_ll = total_loglik(w1, comp1, comp2)
    trace = [cur_ll]
    converged = False
    it = 0
    for it in range(1, _EM_MAX_ITER + 1):
        lp1 = math.log(w1) + log_pdf(comp1, arr)
        lp2 = math.log(1.0 - w1) + log_pdf(comp2, arr)
        denom = np.logaddexp(lp1, lp2)
        r1 = np.exp(lp1 - denom)
        n1 = float(r1.sum())
        if n1 < 1e-9 or arr.size - n1 < 1e-9:
            converged = True  # one component took all the mass; stable point
            break
        try:
            new1 = _moment_component(arr, r1, family)
            new2 = _moment_component(arr, 1.0 - r1, family)
        except InfeasibleMomentsError:
            converged = True
            break
        new_w = min(max(n1 / arr.size, 1e-9), 1.0 - 1e-9)
        new_ll = total_loglik(new_w, new1, new2)
        if new_ll < cur_ll - 1e-9:
            converged = True  # moment update overshot; keep the previous iterate
            break
        if __debug__:
            assert new_ll >= trace[-1] - 1e-9
        rel = abs(new_ll - cur_ll) / max(1.0, abs(cur_ll))
        w1, comp1, comp2, cur_ll = new_w, new1, new2, new_ll
        trace.append(new_ll)
        if rel < _EM_REL_TOL:
            converged = True
            break

    mix = _ordered_mixture(w1, comp1, comp2)
    return FitResult(
        mix,
        cur_ll,
        k=5,
        converged=converged,
        n_iter=it,
        loglik_trace=tuple(trace),
    )


def fit_weight_grid(
    full_data,
    main_params,
    main_k: int,
    sub_params: BetaParams,
    step: float,
) -> tuple[float, FitResult]:
    """Grid search of the tail-mixture weight on the full dataset, main fixed.

    Evaluates w*Sub + (1-w)*Main at every w in {0, step, ..., 1} and returns
    the argmax log-likelihood; ties (within 1e-9) break toward smaller w.
    k = main_k + 3 (two sub shape parameters plus the weight).
    """
    arr = np.asarray(full_data, dtype=float).ravel()
    n_cells = round(1.0 / step)
    if not (step > 0.0 and abs(n_cells * step - 1.0) < 1e-9):
        raise ValueError(f"step must divide 1.0 into an integer grid, got {step}")
    lp_sub = log_pdf(sub_params, arr)
    lp_main = log_pdf(main_params, arr)
    grid = np.linspace(0.0, 1.0, n_cells + 1)
    best_w = 0.0
    best_ll = -math.inf
    for w in grid:
        if w <= 0.0:
            ll = float(lp_main.sum())
        elif w >= 1.0:
            ll = float(lp_sub.sum())
        else:
            ll = float(np.logaddexp(math.log(w) + lp_sub, math.log(1.0 - w) + lp_main).sum())
        if ll > best_ll + 1e-9:
            best_ll = ll
            best_w = float(w)
    combined = ProfileMixture(best_w, sub_params, main_params)
    return best_w, FitResult(combined, best_ll, k=main_k + 3)
