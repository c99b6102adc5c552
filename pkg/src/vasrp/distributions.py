"""Bounded-scale probability distributions for slider-response modeling.

Beta, Gaussian, and uniform components plus their two-component mixtures,
with log-space density evaluation, analytic moments/modes, CDFs, and seeded
sampling.  Density evaluation is done in log space throughout; the
linear-space ``pdf`` is a thin wrapper, since U-shaped Beta tails overflow
in linear space.

Randomness policy: all sampling uses numpy's PCG64 generator, fixed for the
lifetime of this package.  Independent substreams are derived by hashing an
integer path into the seed via ``numpy.random.SeedSequence([seed, *path])``
(see :func:`make_rng`), so e.g. bootstrap replicate ``i`` of a run seeded
with ``s`` is reproducible in isolation as ``make_rng(s, i)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc, betaln, ndtr

from .errors import InfeasibleMomentsError

__all__ = [
    "BetaParams",
    "GaussianParams",
    "UniformBase",
    "Mixture2",
    "ProfileMixture",
    "make_rng",
    "beta_pdf",
    "beta_logpdf",
    "beta_mode",
    "beta_moments",
    "beta_from_moments",
    "log_pdf",
    "pdf",
    "cdf",
    "mean_std",
    "sample",
    "sample_profile",
]

# Samples are clamped this far away from 0/1 so log-densities stay finite.
_OPEN_EPS = 1e-12


def make_rng(seed: int, *path: int) -> np.random.Generator:
    """PCG64 generator for ``seed``, optionally hashed with an integer path.

    ``make_rng(s)`` and ``make_rng(s, i)`` are independent streams; the
    latter is the canonical per-replicate / per-condition derivation.
    """
    entropy = [int(seed), *(int(p) for p in path)]
    if any(e < 0 for e in entropy):
        raise ValueError(f"seed path must be non-negative integers, got {entropy}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


@dataclass(frozen=True)
class BetaParams:
    """Shape parameters of a Beta distribution on (0, 1)."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0.0 and np.isfinite(self.alpha)):
            raise ValueError(f"alpha must be a positive real, got {self.alpha}")
        if not (self.beta > 0.0 and np.isfinite(self.beta)):
            raise ValueError(f"beta must be a positive real, got {self.beta}")


@dataclass(frozen=True)
class GaussianParams:
    """Location/spread of a normal distribution on the normalized scale."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0.0 and np.isfinite(self.sigma)):
            raise ValueError(f"sigma must be a positive real, got {self.sigma}")


@dataclass(frozen=True)
class UniformBase:
    """Flat null density on [lo, hi]: 1/(hi-lo) inside, 0 outside."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class Mixture2:
    """Two-component mixture; both components must be the same family.

    ``w2`` is derived as ``1 - w1`` so the weights always sum to one exactly.
    """

    w1: float
    comp1: BetaParams | GaussianParams
    comp2: BetaParams | GaussianParams

    def __post_init__(self):
        if not 0.0 <= self.w1 <= 1.0:
            raise ValueError(f"w1 must be in [0, 1], got {self.w1}")
        if type(self.comp1) is not type(self.comp2):
            raise ValueError(
                f"mixture components must share a family, got "
                f"{type(self.comp1).__name__} and {type(self.comp2).__name__}"
            )

    @property
    def w2(self) -> float:
        return 1.0 - self.w1


@dataclass(frozen=True)
class ProfileMixture:
    """Full response-profile density: tail Beta (weight w_ade) plus a main part.

    Either side may be absent: ``w_ade=1`` needs no main, ``w_ade=0`` needs
    no sub.  This is the sampling/evaluation form shared by the simulator's
    ground-truth specs and fitted profiles.
    """

    w_ade: float
    sub: BetaParams | None
    main: BetaParams | GaussianParams | UniformBase | Mixture2 | None

    def __post_init__(self):
        if not 0.0 <= self.w_ade <= 1.0:
            raise ValueError(f"w_ade must be in [0, 1], got {self.w_ade}")
        if self.w_ade < 1.0 and self.main is None:
            raise ValueError("main component required when w_ade < 1")
        if self.w_ade > 0.0 and self.sub is None:
            raise ValueError("sub component required when w_ade > 0")


# ---------------------------------------------------------------------------
# Beta helpers
# ---------------------------------------------------------------------------


def beta_logpdf(x, p: BetaParams):
    """Beta log-density; requires every x strictly inside (0, 1)."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ValueError("beta_logpdf requires x in the open interval (0, 1)")
    out = (
        (p.alpha - 1.0) * np.log(arr)
        + (p.beta - 1.0) * np.log1p(-arr)
        - betaln(p.alpha, p.beta)
    )
    return float(out) if np.isscalar(x) else out


def beta_pdf(x, p: BetaParams):
    """Beta density x^(a-1)(1-x)^(b-1)/B(a,b); thin wrapper over the log form."""
    out = np.exp(beta_logpdf(x, p))
    return float(out) if np.isscalar(x) else out


def beta_mode(p: BetaParams) -> float:
    """Mode of a Beta density, made total by boundary conventions.

    Interior mode (a-1)/(a+b-2) when both shapes exceed 1; 0 for a monotone
    decreasing density (a <= 1 < b), 1 for increasing (b <= 1 < a).  For the
    U-shaped case with both shapes <= 1 the antimode-symmetric convention is
    0.5 when a == b, else the boundary holding more mass.
    """
    a, b = p.alpha, p.beta
    if a > 1.0 and b > 1.0:
        return (a - 1.0) / (a + b - 2.0)
    if a <= 1.0 and b <= 1.0:
        if a == b:
            return 0.5
        return 0.0 if a < b else 1.0
    return 0.0 if a <= 1.0 else 1.0


def beta_moments(p: BetaParams) -> tuple[float, float]:
    """(mean, std) of a Beta distribution."""
    a, b = p.alpha, p.beta
    s = a + b
    return a / s, math.sqrt(a * b / (s * s * (s + 1.0)))


def beta_from_moments(mean: float, std: float) -> BetaParams:
    """Beta shapes with the given mean/std (inverse of :func:`beta_moments`).

    Raises InfeasibleMomentsError when std^2 >= mean*(1-mean), where no Beta
    distribution exists.
    """
    if not 0.0 < mean < 1.0:
        raise InfeasibleMomentsError(f"mean must be in (0, 1), got {mean}")
    if not std > 0.0:
        raise InfeasibleMomentsError(f"std must be positive, got {std}")
    var = std * std
    limit = mean * (1.0 - mean)
    if var >= limit:
        raise InfeasibleMomentsError(
            f"no Beta distribution has mean={mean}, std={std} (std^2 >= mean*(1-mean))"
        )
    nu = limit / var - 1.0
    return BetaParams(mean * nu, (1.0 - mean) * nu)


# ---------------------------------------------------------------------------
# Generic density evaluation (log space), CDFs, moments
# ---------------------------------------------------------------------------


def _beta_logpdf_total(arr: np.ndarray, p: BetaParams) -> np.ndarray:
    # Total version: -inf outside (0,1) instead of raising.
    out = np.full(arr.shape, -np.inf)
    m = (arr > 0.0) & (arr < 1.0)
    if np.any(m):
        xm = arr[m]
        out[m] = (
            (p.alpha - 1.0) * np.log(xm)
            + (p.beta - 1.0) * np.log1p(-xm)
            - betaln(p.alpha, p.beta)
        )
    return out


def _gaussian_logpdf(arr: np.ndarray, p: GaussianParams) -> np.ndarray:
    z = (arr - p.mu) / p.sigma
    return -0.5 * z * z - math.log(p.sigma) - 0.5 * math.log(2.0 * math.pi)


def _uniform_logpdf(arr: np.ndarray, p: UniformBase) -> np.ndarray:
    out = np.full(arr.shape, -np.inf)
    inside = (arr >= p.lo) & (arr <= p.hi)
    out[inside] = -math.log(p.hi - p.lo)
    return out


def _mix_logpdf(arr: np.ndarray, w1: float, lp1: np.ndarray, lp2: np.ndarray) -> np.ndarray:
    if w1 >= 1.0:
        return lp1
    if w1 <= 0.0:
        return lp2
    return np.logaddexp(math.log(w1) + lp1, math.log(1.0 - w1) + lp2)


def log_pdf(params, x) -> np.ndarray:
    """Log-density of any component or mixture type; -inf outside support."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if isinstance(params, BetaParams):
        out = _beta_logpdf_total(arr, params)
    elif isinstance(params, GaussianParams):
        out = _gaussian_logpdf(arr, params)
    elif isinstance(params, UniformBase):
        out = _uniform_logpdf(arr, params)
    elif isinstance(params, Mixture2):
        out = _mix_logpdf(
            arr, params.w1, log_pdf(params.comp1, arr), log_pdf(params.comp2, arr)
        )
    elif isinstance(params, ProfileMixture):
        lps = log_pdf(params.sub, arr) if params.sub is not None else None
        lpm = log_pdf(params.main, arr) if params.main is not None else None
        if params.w_ade >= 1.0:
            out = lps
        elif params.w_ade <= 0.0:
            out = lpm
        else:
            out = _mix_logpdf(arr, params.w_ade, lps, lpm)
    else:
        raise TypeError(f"unsupported distribution type: {type(params).__name__}")
    return out


def pdf(params, x) -> np.ndarray:
    """Linear-space density; thin wrapper over :func:`log_pdf`."""
    return np.exp(log_pdf(params, x))


def cdf(params, x) -> np.ndarray:
    """Cumulative distribution of any component or mixture type."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if isinstance(params, BetaParams):
        return betainc(params.alpha, params.beta, np.clip(arr, 0.0, 1.0))
    if isinstance(params, GaussianParams):
        return ndtr((arr - params.mu) / params.sigma)
    if isinstance(params, UniformBase):
        return np.clip((arr - params.lo) / (params.hi - params.lo), 0.0, 1.0)
    if isinstance(params, Mixture2):
        return params.w1 * cdf(params.comp1, arr) + params.w2 * cdf(params.comp2, arr)
    if isinstance(params, ProfileMixture):
        total = np.zeros(arr.shape)
        if params.sub is not None and params.w_ade > 0.0:
            total += params.w_ade * cdf(params.sub, arr)
        if params.main is not None and params.w_ade < 1.0:
            total += (1.0 - params.w_ade) * cdf(params.main, arr)
        return total
    raise TypeError(f"unsupported distribution type: {type(params).__name__}")


def mean_std(params) -> tuple[float, float]:
    """Analytic (mean, std) of any component or mixture type."""
    if isinstance(params, BetaParams):
        return beta_moments(params)
    if isinstance(params, GaussianParams):
        return params.mu, params.sigma
    if isinstance(params, UniformBase):
        return 0.5 * (params.lo + params.hi), (params.hi - params.lo) / math.sqrt(12.0)
    if isinstance(params, Mixture2):
        parts = [(params.w1, params.comp1), (params.w2, params.comp2)]
    elif isinstance(params, ProfileMixture):
        parts = []
        if params.sub is not None and params.w_ade > 0.0:
            parts.append((params.w_ade, params.sub))
        if params.main is not None and params.w_ade < 1.0:
            parts.append((1.0 - params.w_ade, params.main))
    else:
        raise TypeError(f"unsupported distribution type: {type(params).__name__}")
    mean = sum(w * mean_std(c)[0] for w, c in parts)
    second = sum(w * (mean_std(c)[1] ** 2 + mean_std(c)[0] ** 2) for w, c in parts)
    return mean, math.sqrt(max(second - mean * mean, 0.0))


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def _sample_gaussian_unit(p: GaussianParams, n: int, rng: np.random.Generator) -> np.ndarray:
    # Rejection into (0,1); response values live on the normalized scale.
    out = np.empty(n)
    filled = 0
    while filled < n:
        draw = rng.normal(p.mu, p.sigma, size=n - filled)
        good = draw[(draw > 0.0) & (draw < 1.0)]
        out[filled : filled + good.size] = good
        filled += good.size
    return out


def sample(params, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n i.i.d. values in (0, 1); deterministic under a fixed generator."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if isinstance(params, BetaParams):
        draws = rng.beta(params.alpha, params.beta, size=n)
    elif isinstance(params, GaussianParams):
        draws = _sample_gaussian_unit(params, n, rng)
    elif isinstance(params, UniformBase):
        draws = rng.uniform(params.lo, params.hi, size=n)
    elif isinstance(params, Mixture2):
        draws = _sample_two_way(params.w1, params.comp1, params.comp2, n, rng)
    elif isinstance(params, ProfileMixture):
        if params.w_ade >= 1.0:
            draws = sample(params.sub, n, rng)
        elif params.w_ade <= 0.0:
            draws = sample(params.main, n, rng)
        else:
            draws = _sample_two_way(params.w_ade, params.sub, params.main, n, rng)
    else:
        raise TypeError(f"unsupported distribution type: {type(params).__name__}")
    return np.clip(draws, _OPEN_EPS, 1.0 - _OPEN_EPS)


def _sample_two_way(w_first, first, second, n, rng) -> np.ndarray:
    pick_first = rng.random(n) < w_first
    n1 = int(pick_first.sum())
    out = np.empty(n)
    out[pick_first] = sample(first, n1, rng)
    out[~pick_first] = sample(second, n - n1, rng)
    return out


def sample_profile(spec: ProfileMixture, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n responses from a full profile mixture.

    With probability ``w_ade`` a value comes from the tail Beta, otherwise
    from the main (one- or two-component) distribution.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    return sample(spec, n, rng)
