"""Two-level stratified resampling and bootstrap aggregation.

Repeated slider measurements are unbalanced: items differ in how often they
were answered.  Resampling first equalizes per-item counts (level 1), then
equalizes per-polarity counts from the level-1 pools (level 2).  Profiles
fitted to the replicates are aggregated into per-parameter medians,
percentile ranges, and one-hot profile features.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import BetaParams, GaussianParams, beta_moments, make_rng
from .errors import EmptyStratumError, InsufficientDataError
from .pipeline import HyperParams, ResponseProfile, UserDataset, estimate_profile, normalize

__all__ = [
    "SamplingPlan",
    "ParamStats",
    "BootstrapRun",
    "BootstrapSummary",
    "stratified_resample",
    "bootstrap_profiles",
    "profile_parameters",
    "aggregate",
]

_POLARITY_ORDER = ("unipolar", "bipolar")
_MAIN_KIND_ORDER = ("base", "mrs", "bimrs")
_SUB_KIND_ORDER = ("ers", "drs", "ars")


@dataclass(frozen=True)
class SamplingPlan:
    """Counts for the two resampling levels and the replicate count."""

    level1_n: int = 300
    level2_n: int = 1800
    replicates: int = 1000

    def __post_init__(self):
        for name in ("level1_n", "level2_n", "replicates"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")


def stratified_resample(
    dataset: UserDataset, plan: SamplingPlan, rng: np.random.Generator
) -> UserDataset:
    """Draw a balanced dataset: level1_n per item, then level2_n per polarity.

    Both levels sample with replacement.  The result holds
    level2_n * (number of polarity strata present) records and is
    re-normalized, since the squeeze transform depends on the record count.
    """
    if not dataset.records:
        raise EmptyStratumError("dataset has no records")
    by_item: dict[str, list] = {}
    for rec in dataset.records:
        by_item.setdefault(rec.item_id, []).append(rec)

    pool_by_polarity: dict[str, list] = {}
    for item_id in by_item:
        recs = by_item[item_id]
        picks = rng.integers(0, len(recs), size=plan.level1_n)
        for i in picks:
            rec = recs[i]
            pool_by_polarity.setdefault(rec.polarity, []).append(rec)

    out = []
    for polarity in _POLARITY_ORDER:
        if polarity not in pool_by_polarity:
            continue
        pool = pool_by_polarity[polarity]
        picks = rng.integers(0, len(pool), size=plan.level2_n)
        out.extend(pool[i] for i in picks)
    return normalize(out)


@dataclass(frozen=True)
class BootstrapRun:
    """Successful replicate profiles (in replicate order) plus failure count."""

    profiles: tuple[ResponseProfile, ...]
    n_failed: int


def bootstrap_profiles(
    dataset: UserDataset, hp: HyperParams, plan: SamplingPlan, seed: int
) -> BootstrapRun:
    """Run ``plan.replicates`` resample-then-fit cycles.

    Replicate ``i`` uses the generator stream ``make_rng(seed, i)``, so any
    replicate is reproducible in isolation and results are ordered by
    replicate index.  Replicates that cannot be fitted (insufficient data)
    are dropped and counted, never raised.
    """
    profiles = []
    n_failed = 0
    for i in range(plan.replicates):
        rng = make_rng(seed, i)
        resampled = stratified_resample(dataset, plan, rng)
        try:
            profiles.append(estimate_profile(resampled, hp))
        except InsufficientDataError:
            n_failed += 1
    return BootstrapRun(tuple(profiles), n_failed)


def _component_entries(comp, index: int) -> dict[str, float]:
    if isinstance(comp, GaussianParams):
        return {f"mu{index}": comp.mu, f"sigma{index}": comp.sigma}
    if isinstance(comp, BetaParams):
        m, s = beta_moments(comp)
        return {
            f"alpha{index}": comp.alpha,
            f"beta{index}": comp.beta,
            f"mu{index}": m,
            f"sigma{index}": s,
        }
    return {}


def profile_parameters(profile: ResponseProfile) -> dict[str, float]:
    """Flatten a fitted profile into named parameters.

    Beta components report both their shapes and the derived moments, so
    Gaussian- and Beta-family runs share the mu/sigma columns.  Parameters a
    replicate does not have (e.g. tail shapes when no tail was selected) are
    simply absent.
    """
    out: dict[str, float] = {}
    main = profile.main
    if main.kind == "mrs":
        out["w1"] = 1.0
        out.update(_component_entries(main.params, 1))
    elif main.kind == "bimrs":
        out["w1"] = main.params.w1
        out["w2"] = main.params.w2
        out.update(_component_entries(main.params.comp1, 1))
        out.update(_component_entries(main.params.comp2, 2))
    out["w_ade"] = profile.sub.w_ade
    if profile.sub.kind != "none":
        out["alpha_ade"] = profile.sub.params.alpha
        out["beta_ade"] = profile.sub.params.beta
    return out


@dataclass(frozen=True)
class ParamStats:
    """Percentile summary of one parameter over the replicates holding it."""

    median: float
    p5: float
    p25: float
    p75: float
    p95: float
    n: int


@dataclass(frozen=True)
class BootstrapSummary:
    """Aggregated bootstrap result for one user."""

    params: dict[str, ParamStats]
    features: dict[str, int]
    metrics: dict[str, ParamStats]
    main_kind_counts: dict[str, int]
    sub_kind_counts: dict[str, int]
    n_replicates: int
    n_failed: int


def _stats(values: list[float]) -> ParamStats:
    arr = np.asarray(values, dtype=float)
    p5, p25, med, p75, p95 = np.percentile(arr, [5, 25, 50, 75, 95], method="linear")
    return ParamStats(float(med), float(p5), float(p25), float(p75), float(p95), arr.size)


def _modal(counts: dict[str, int], order: tuple[str, ...]) -> str | None:
    present = [(kind, counts.get(kind, 0)) for kind in order if counts.get(kind, 0) > 0]
    if not present:
        return None
    top = max(n for _, n in present)
    return next(kind for kind, n in present if n == top)


def aggregate(profiles, n_failed: int = 0) -> BootstrapSummary:
    """Aggregate replicate profiles into medians, ranges, and one-hot features.

    Percentiles are computed per parameter over the replicates where that
    parameter exists.  The main one-hot follows the modal main kind; the sub
    one-hot follows the modal tail kind but is zeroed whenever the median
    tail weight is 0, mirroring how tail parameters are reported only when
    a tail is actually present.
    """
    profiles = list(profiles)
    if not profiles:
        raise ValueError("no profiles to aggregate")

    values: dict[str, list[float]] = {}
    metric_values: dict[str, list[float]] = {}
    main_counts: dict[str, int] = {}
    sub_counts: dict[str, int] = {}
    for p in profiles:
        for key, val in profile_parameters(p).items():
            values.setdefault(key, []).append(val)
        if p.metrics is not None:
            for key in ("corr", "d_kl", "chisq", "intersect", "bhattacharyya"):
                metric_values.setdefault(key, []).append(getattr(p.metrics, key))
        main_counts[p.main.kind] = main_counts.get(p.main.kind, 0) + 1
        if p.sub.kind != "none":
            sub_counts[p.sub.kind] = sub_counts.get(p.sub.kind, 0) + 1

    params = {key: _stats(vals) for key, vals in values.items()}
    metrics = {key: _stats(vals) for key, vals in metric_values.items()}

    modal_main = _modal(main_counts, _MAIN_KIND_ORDER)
    features = {
        "is_mrs": int(modal_main == "mrs"),
        "is_bimrs": int(modal_main == "bimrs"),
        "is_ers": 0,
        "is_drs": 0,
        "is_ars": 0,
    }
    median_w_ade = params["w_ade"].median if "w_ade" in params else 0.0
    if median_w_ade > 1e-12:
        modal_sub = _modal(sub_counts, _SUB_KIND_ORDER)
        if modal_sub is not None:
            features[f"is_{modal_sub}"] = 1

    return BootstrapSummary(
        params=params,
        features=features,
        metrics=metrics,
        main_kind_counts=main_counts,
        sub_kind_counts=sub_counts,
        n_replicates=len(profiles) + n_failed,
        n_failed=n_failed,
    )
