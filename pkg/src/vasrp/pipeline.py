"""Per-user response-profile estimation.

Normalization of raw slider responses to the open unit interval, the
threshold split into center and tail subsets, main-profile selection
(flat null vs unimodal vs gated two-component mixture), tail-style
candidate fits, and assembly of the full profile by AIC comparison on the
whole dataset.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .distributions import (
    BetaParams,
    GaussianParams,
    Mixture2,
    ProfileMixture,
    UniformBase,
    beta_mode,
    log_pdf,
)
from .errors import DegenerateDataError, InsufficientDataError
from .estimation import (
    AIC_TIE_EPS,
    FitResult,
    ShapeClass,
    aic,
    fit_beta_constrained,
    fit_mixture2_em,
    fit_unimodal,
    fit_weight_grid,
)
from .metrics import HistogramMetrics, compare, histogramize, model_histogram

__all__ = [
    "Polarity",
    "ResponseRecord",
    "UserDataset",
    "HyperParams",
    "MainProfile",
    "SubProfile",
    "ResponseProfile",
    "Candidate",
    "normalize",
    "dataset_from_values",
    "split",
    "separation",
    "estimate_main",
    "estimate_subs",
    "estimate_profile",
]

Polarity = Literal["unipolar", "bipolar"]

# Normalized values are kept at least this far from 0 and 1.
_CLAMP = 1e-6


@dataclass(frozen=True)
class ResponseRecord:
    """One raw slider response with its item and scale metadata."""

    user_id: str
    item_id: str
    polarity: Polarity
    raw_value: float
    scale_min: float = 0.0
    scale_max: float = 100.0


@dataclass(frozen=True)
class UserDataset:
    """A user's responses with values normalized strictly inside (0, 1)."""

    user_id: str
    records: tuple[ResponseRecord, ...]
    values: np.ndarray
    has_bipolar: bool

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class HyperParams:
    """Estimation settings: split threshold, bimodality gate, family, floors."""

    th: float = 0.15
    accept_bidist: float = 0.15
    family: str = "beta"
    w_step: float = 0.1
    min_sub_n: int = 5
    min_main_n: int = 10
    min_bimodal_n: int = 10

    def __post_init__(self):
        if not 0.0 < self.th < 0.5:
            raise ValueError(f"th must be in (0, 0.5), got {self.th}")
        if not 0.0 <= self.accept_bidist <= 1.0:
            raise ValueError(f"accept_bidist must be in [0, 1], got {self.accept_bidist}")
        if self.family not in ("beta", "gaussian"):
            raise ValueError(f"family must be 'beta' or 'gaussian', got {self.family!r}")
        n_cells = round(1.0 / self.w_step)
        if not (self.w_step > 0.0 and abs(n_cells * self.w_step - 1.0) < 1e-9):
            raise ValueError(f"w_step must divide 1.0 evenly, got {self.w_step}")
        for name in ("min_sub_n", "min_main_n", "min_bimodal_n"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


@dataclass(frozen=True)
class Candidate:
    """One evaluated model in a selection step, with its gate status."""

    label: str
    fit: FitResult
    eligible: bool = True
    reason: str | None = None


@dataclass(frozen=True)
class MainProfile:
    """Selected center-range model: 'base', 'mrs', or 'bimrs'."""

    kind: str
    params: UniformBase | BetaParams | GaussianParams | Mixture2
    fit: FitResult
    separation: float | None
    candidates: tuple[Candidate, ...]


@dataclass(frozen=True)
class SubProfile:
    """Selected tail style ('none', 'ers', 'drs', 'ars') with its weight."""

    kind: str
    params: BetaParams | None
    w_ade: float
    fit: FitResult | None


@dataclass(frozen=True)
class ResponseProfile:
    """Full fitted profile plus fit diagnostics on the whole dataset."""

    main: MainProfile
    sub: SubProfile
    loglik: float
    aic: float
    metrics: HistogramMetrics | None
    candidates: tuple[Candidate, ...]
    n_obs: int
    n_main: int
    n_sub: int

    def density(self) -> ProfileMixture:
        """The profile's mixture density: w_ade*sub + (1-w_ade)*main."""
        return ProfileMixture(self.sub.w_ade, self.sub.params, self.main.params)


def normalize(records) -> UserDataset:
    """Map raw responses to (0, 1).

    Each value is scaled by its record's range; if any scaled value sits
    exactly at 0 or 1, the whole dataset is squeezed by
    x' = (x*(N-1) + 0.5)/N with N the total record count.  Values are then
    clamped to [1e-6, 1-1e-6].
    """
    records = tuple(records)
    if not records:
        raise ValueError("empty dataset")
    vals = np.empty(len(records))
    for i, rec in enumerate(records):
        if not rec.scale_min < rec.scale_max:
            raise ValueError(
                f"record {i}: invalid scale [{rec.scale_min}, {rec.scale_max}]"
            )
        if not rec.scale_min <= rec.raw_value <= rec.scale_max:
            raise ValueError(
                f"record {i}: value {rec.raw_value} outside scale "
                f"[{rec.scale_min}, {rec.scale_max}]"
            )
        vals[i] = (rec.raw_value - rec.scale_min) / (rec.scale_max - rec.scale_min)
    if np.any(vals == 0.0) or np.any(vals == 1.0):
        n = vals.size
        vals = (vals * (n - 1) + 0.5) / n
    vals = np.clip(vals, _CLAMP, 1.0 - _CLAMP)
    return UserDataset(
        user_id=records[0].user_id,
        records=records,
        values=vals,
        has_bipolar=any(r.polarity == "bipolar" for r in records),
    )


def dataset_from_values(
    values, user_id: str = "sim", item_id: str = "sim", bipolar: bool = True
) -> UserDataset:
    """Wrap already-normalized values in (0, 1) as a single-item dataset."""
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError("empty dataset")
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ValueError("values must lie strictly inside (0, 1)")
    polarity: Polarity = "bipolar" if bipolar else "unipolar"
    records = tuple(
        ResponseRecord(user_id, item_id, polarity, float(v), 0.0, 1.0) for v in arr
    )
    return UserDataset(user_id, records, arr.copy(), bipolar)


def split(data, th: float) -> tuple[np.ndarray, np.ndarray]:
    """Partition into center [th, 1-th] and tails (0, th) u (1-th, 1).

    Accepts a UserDataset or a plain array of normalized values.
    """
    if not 0.0 < th < 0.5:
        raise ValueError(f"th must be in (0, 0.5), got {th}")
    values = data.values if isinstance(data, UserDataset) else data
    arr = np.asarray(values, dtype=float).ravel()
    in_main = (arr >= th) & (arr <= 1.0 - th)
    return arr[in_main], arr[~in_main]


def separation(mix: Mixture2, family: str) -> float:
    """Peak distance of a fitted two-component candidate, in [0, 1].

    Beta components: absolute mode difference (with the total-mode
    conventions); Gaussian components: absolute mean difference.
    """
    if family == "beta":
        return abs(beta_mode(mix.comp2) - beta_mode(mix.comp1))
    if family == "gaussian":
        return abs(mix.comp2.mu - mix.comp1.mu)
    raise ValueError(f"unknown family: {family!r}")


def _aic_best(cands: list[Candidate]) -> Candidate:
    # Lowest AIC among eligible candidates; ties go to fewer parameters.
    best = None
    for c in cands:
        if not c.eligible:
            continue
        if (
            best is None
            or c.fit.aic < best.fit.aic - AIC_TIE_EPS
            or (abs(c.fit.aic - best.fit.aic) <= AIC_TIE_EPS and c.fit.k < best.fit.k)
        ):
            best = c
    return best


def estimate_main(d_main, has_bipolar: bool, hp: HyperParams) -> MainProfile:
    """Select the center-range model among Base, unimodal, and gated bimodal.

    The two-component candidate wins only when bipolar data was collected,
    its fitted peak separation reaches accept_bidist, and it has the lowest
    AIC; otherwise the unimodal fit must beat Base on AIC, else Base.
    Fewer than min_main_n center points forces Base.
    """
    arr = np.asarray(d_main, dtype=float).ravel()
    n = arr.size
    base_params = UniformBase(hp.th, 1.0 - hp.th)
    base_fit = FitResult(base_params, float(-n * np.log(1.0 - 2.0 * hp.th)), k=0)
    cands = [Candidate("base", base_fit)]

    sep = None
    if n >= hp.min_main_n:
        try:
            mrs_fit = fit_unimodal(arr, hp.family)
            cands.append(Candidate("mrs", mrs_fit))
        except (InsufficientDataError, DegenerateDataError):
            pass
        if n >= hp.min_bimodal_n:
            try:
                bi_fit = fit_mixture2_em(arr, hp.family, min_n=hp.min_bimodal_n)
            except (InsufficientDataError, DegenerateDataError):
                bi_fit = None
            if bi_fit is not None:
                sep = separation(bi_fit.params, hp.family)
                if not has_bipolar:
                    gate = (False, "no bipolar scale collected")
                elif sep < hp.accept_bidist:
                    gate = (False, f"separation {sep:.4f} < accept_bidist {hp.accept_bidist}")
                else:
                    gate = (True, None)
                cands.append(Candidate("bimrs", bi_fit, eligible=gate[0], reason=gate[1]))

    chosen = _aic_best(cands)
    return MainProfile(
        kind=chosen.label,
        params=chosen.fit.params,
        fit=chosen.fit,
        separation=sep,
        candidates=tuple(cands),
    )


def estimate_subs(d_sub, hp: HyperParams) -> list[tuple[ShapeClass, FitResult]]:
    """Fit all three tail-style candidates on the tail subset.

    Returns an empty list when the tail holds fewer than min_sub_n points.
    """
    arr = np.asarray(d_sub, dtype=float).ravel()
    if arr.size < hp.min_sub_n:
        return []
    return [
        (shape, fit_beta_constrained(arr, shape, min_n=hp.min_sub_n))
        for shape in (ShapeClass.ERS, ShapeClass.DRS, ShapeClass.ARS)
    ]


def estimate_profile(
    dataset: UserDataset, hp: HyperParams, bin_width: float = 0.05
) -> ResponseProfile:
    """Fit the full response profile of one user's dataset.

    Runs the main selection on the center subset and the tail candidates on
    the tail subset, grid-fits each tail weight on the whole dataset with
    the main fixed, and keeps the AIC-best of {main alone, main+tail...}.
    The evaluated candidate list is returned for diagnostics.
    """
    x = dataset.values
    if x.size < hp.min_main_n:
        raise InsufficientDataError(
            f"need at least {hp.min_main_n} observations, got {x.size}"
        )
    d_main, d_sub = split(x, hp.th)
    main = estimate_main(d_main, dataset.has_bipolar, hp)
    subs = estimate_subs(d_sub, hp)
    k_main = main.fit.k

    main_ll = float(log_pdf(main.params, x).sum())
    main_alone = Candidate("main", FitResult(main.params, main_ll, k=k_main))
    cands = [main_alone]
    sub_fits: dict[str, tuple[ShapeClass, float, FitResult]] = {}
    for shape, sub_fit in subs:
        w, combined = fit_weight_grid(x, main.params, k_main, sub_fit.params, hp.w_step)
        label = f"main+{shape.value}"
        cands.append(Candidate(label, combined))
        sub_fits[label] = (shape, w, combined)

    chosen = _aic_best(cands)
    if chosen.label == "main":
        sub = SubProfile("none", None, 0.0, None)
        loglik = main_ll
    else:
        shape, w, combined = sub_fits[chosen.label]
        sub = SubProfile(shape.value, combined.params.sub, w, combined)
        loglik = combined.loglik

    profile_aic = aic(loglik, chosen.fit.k)
    mixture = ProfileMixture(sub.w_ade, sub.params, main.params)
    emp = histogramize(x, bin_width)
    metrics = compare(emp, model_histogram(mixture, bin_width))
    return ResponseProfile(
        main=main,
        sub=sub,
        loglik=loglik,
        aic=profile_aic,
        metrics=metrics,
        candidates=tuple(cands),
        n_obs=x.size,
        n_main=d_main.size,
        n_sub=d_sub.size,
    )
