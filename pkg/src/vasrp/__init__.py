"""Response-profile characterization for repeated visual-analogue-scale data.

Fits per-user mixtures of response-style-shaped distributions (flat,
unimodal, bimodal centers plus monotone/U-shaped tails) with AIC model
selection, handles unbalanced repeated measures by two-level stratified
bootstrap, and ships a parameter-recovery simulation harness.
"""

from .bootstrap import (
    BootstrapRun,
    BootstrapSummary,
    SamplingPlan,
    aggregate,
    bootstrap_profiles,
    stratified_resample,
)
from .distributions import (
    BetaParams,
    GaussianParams,
    Mixture2,
    ProfileMixture,
    UniformBase,
    beta_from_moments,
    beta_mode,
    beta_moments,
    beta_pdf,
    make_rng,
    sample_profile,
)
from .estimation import (
    FitResult,
    ShapeClass,
    aic,
    fit_beta_constrained,
    fit_mixture2_em,
    fit_unimodal,
    fit_weight_grid,
)
from .metrics import Histogram, HistogramMetrics, compare, histogramize, linreg, pearson, spearman
from .pipeline import (
    HyperParams,
    MainProfile,
    ResponseProfile,
    ResponseRecord,
    SubProfile,
    UserDataset,
    dataset_from_values,
    estimate_main,
    estimate_profile,
    estimate_subs,
    normalize,
    separation,
    split,
)
from .simulation import GroundTruthCondition, RecoveryCell, builtin_conditions, run_recovery

__version__ = "0.1.0"
