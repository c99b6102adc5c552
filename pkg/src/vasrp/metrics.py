"""Histograms and distribution-similarity measures, plus correlation utilities.

The five per-user comparison measures (Pearson correlation of bin heights,
KL divergence, chi-square, intersection, Bhattacharyya distance) operate on
normalized bin vectors.  Directional measures (KL, chi-square) take the
first argument as the empirical side and the second as the model side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import stdtr
from scipy.stats import rankdata

from . import distributions
from .errors import ZeroVarianceError

__all__ = [
    "Histogram",
    "HistogramMetrics",
    "histogramize",
    "model_histogram",
    "compare",
    "pearson",
    "pearson_pvalue",
    "spearman",
    "linreg",
]

# Smoothing mass added to every bin before the KL ratio, then renormalized.
_KL_EPS = 1e-10


@dataclass(frozen=True)
class Histogram:
    """Equal-width bins over [0, 1); bins are right-open, the last closed.

    ``counts`` holds integer sample counts (None for model-derived
    histograms); ``probs`` holds normalized bin probabilities, or None when
    the histogram is empty (density undefined).
    """

    bin_width: float
    counts: np.ndarray | None
    probs: np.ndarray | None

    @property
    def n_bins(self) -> int:
        return round(1.0 / self.bin_width)

    @property
    def density(self) -> np.ndarray | None:
        if self.probs is None:
            return None
        return self.probs / self.bin_width


def _check_bin_width(bin_width: float) -> int:
    n_bins = round(1.0 / bin_width)
    if not (bin_width > 0.0 and abs(n_bins * bin_width - 1.0) < 1e-9):
        raise ValueError(f"bin width must divide 1 evenly, got {bin_width}")
    return n_bins


def histogramize(values, bin_width: float = 0.05) -> Histogram:
    """Bin values from (0, 1) into right-open bins [k*w, (k+1)*w)."""
    n_bins = _check_bin_width(bin_width)
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size and (np.any(arr <= 0.0) or np.any(arr >= 1.0)):
        raise ValueError("values must lie strictly inside (0, 1)")
    edges = np.linspace(0.0, 1.0, n_bins + 1)
    counts, _ = np.histogram(arr, bins=edges)
    total = int(counts.sum())
    probs = counts / total if total > 0 else None
    return Histogram(bin_width=bin_width, counts=counts, probs=probs)


def model_histogram(params, bin_width: float = 0.05) -> Histogram:
    """Bin probabilities of an analytic density, from its CDF differences.

    The vector is renormalized to sum to one so densities with mass outside
    (0, 1) (an unclipped Gaussian component) stay comparable.
    """
    n_bins = _check_bin_width(bin_width)
    edges = np.linspace(0.0, 1.0, n_bins + 1)
    probs = np.diff(distributions.cdf(params, edges))
    probs = np.clip(probs, 0.0, None)
    total = probs.sum()
    if total <= 0.0:
        raise ValueError("model density has no mass in (0, 1)")
    return Histogram(bin_width=bin_width, counts=None, probs=probs / total)


@dataclass(frozen=True)
class HistogramMetrics:
    """The five bin-vector comparison measures."""

    corr: float
    d_kl: float
    chisq: float
    intersect: float
    bhattacharyya: float


def _corr_of_vectors(p: np.ndarray, q: np.ndarray) -> float:
    # Degenerate convention: constant-vector inputs compare as identical (1)
    # or not (0); keeps compare(h, h) a fixed point for flat histograms.
    pd = p - p.mean()
    qd = q - q.mean()
    denom = math.sqrt(float((pd * pd).sum()) * float((qd * qd).sum()))
    if denom == 0.0:
        return 1.0 if np.allclose(p, q) else 0.0
    return float((pd * qd).sum()) / denom


def compare(h1: Histogram, h2: Histogram) -> HistogramMetrics:
    """Compare two histograms with identical binning (h1 empirical, h2 model)."""
    if h1.n_bins != h2.n_bins or abs(h1.bin_width - h2.bin_width) > 1e-12:
        raise ValueError("histograms must share the same bins")
    if h1.probs is None or h2.probs is None:
        raise ValueError("cannot compare an empty histogram")
    p = h1.probs
    q = h2.probs

    corr = _corr_of_vectors(p, q)

    ps = p + _KL_EPS
    qs = q + _KL_EPS
    ps = ps / ps.sum()
    qs = qs / qs.sum()
    d_kl = float(np.sum(ps * np.log(ps / qs)))

    mask = p > 0.0
    chisq = float(np.sum((p[mask] - q[mask]) ** 2 / p[mask]))

    intersect = float(np.minimum(p, q).sum())
    bc = float(np.sqrt(p * q).sum())
    bhattacharyya = math.sqrt(max(1.0 - min(bc, 1.0), 0.0))

    return HistogramMetrics(
        corr=corr,
        d_kl=max(d_kl, 0.0),
        chisq=chisq,
        intersect=intersect,
        bhattacharyya=bhattacharyya,
    )


def _check_pair(xs, ys) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(xs, dtype=float).ravel()
    y = np.asarray(ys, dtype=float).ravel()
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 3:
        raise ValueError(f"need at least 3 pairs, got {x.size}")
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise ZeroVarianceError("correlation input has zero variance")
    return x, y


def pearson(xs, ys) -> float:
    """Pearson correlation coefficient."""
    x, y = _check_pair(xs, ys)
    return _corr_of_vectors(x, y)


def pearson_pvalue(r: float, n: int) -> float:
    """Two-sided p-value of a Pearson r under the t reference distribution."""
    if n < 3:
        raise ValueError("need at least 3 pairs")
    r = min(max(r, -1.0), 1.0)
    if abs(r) >= 1.0:
        return 0.0
    df = n - 2
    t = abs(r) * math.sqrt(df / (1.0 - r * r))
    return 2.0 * float(stdtr(df, -t))


def spearman(xs, ys) -> float:
    """Spearman rank correlation, with average ranks for ties."""
    x, y = _check_pair(xs, ys)
    return _corr_of_vectors(rankdata(x), rankdata(y))


def linreg(xs, ys) -> tuple[float, float, float]:
    """Least-squares line y = slope*x + intercept and its R^2."""
    x, y = _check_pair(xs, ys)
    slope = float(np.sum((x - x.mean()) * (y - y.mean())) / np.sum((x - x.mean()) ** 2))
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (slope * x + intercept)
    ss_res = float((resid**2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot
    return slope, intercept, r2
