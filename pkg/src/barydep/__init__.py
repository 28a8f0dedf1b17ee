"""Directional dependency analysis for time series.

Points of a dynamical system are expressed as fuzzy affiliations
(barycentric coordinates) to landmark points; a lagged column-stochastic
matrix is fitted between the affiliation series of two variables; two
scalar measures on that matrix quantify how much information one variable
carries about the future of the other, and the antisymmetric relative
difference of the two directions signs the dominant influence.
"""

__version__ = "0.1.0"

from .core import (
    AffiliationSeries,
    LandmarkSet,
    SegmentedAffiliationPair,
    StochasticMatrix,
    TimeSeriesMatrix,
    project_to_simplex,
    validate_stochastic,
)
from .representation import (
    LandmarkFitConfig,
    LandmarkFitResult,
    anchored_affiliation,
    anchored_affiliation_series,
    fit_landmarks,
    reconstruct,
    solve_affiliations,
)
from .mapping import (
    MappingFit,
    fit_mapping,
    fit_mapping_segmented,
    predict,
)
from .measures import (
    DependencyReport,
    avg_row_variance,
    build_report,
    schatten1,
)
from .generators import (
    ArConfig,
    LogisticConfig,
    SdeConfig,
    draw_ar_coefficients,
    gen_block_ar,
    gen_coupled_logistic,
    gen_hierarchical_sde,
    simulate_ar,
)
from .ingest import (
    BENCH_SENTINEL,
    PhaseLabel,
    TrackingFrame,
    TrackingSchema,
    classify_phase,
    load_csv,
    pearson_lagged,
    reflect_half_court,
    segment_by,
)
from .pipeline import RunConfig, RunSummary, emit_report, run

__all__ = [
    "AffiliationSeries",
    "ArConfig",
    "BENCH_SENTINEL",
    "DependencyReport",
    "LandmarkFitConfig",
    "LandmarkFitResult",
    "LandmarkSet",
    "LogisticConfig",
    "MappingFit",
    "PhaseLabel",
    "RunConfig",
    "RunSummary",
    "SdeConfig",
    "SegmentedAffiliationPair",
    "StochasticMatrix",
    "TimeSeriesMatrix",
    "TrackingFrame",
    "TrackingSchema",
    "anchored_affiliation",
    "anchored_affiliation_series",
    "avg_row_variance",
    "build_report",
    "classify_phase",
    "draw_ar_coefficients",
    "emit_report",
    "fit_landmarks",
    "fit_mapping",
    "fit_mapping_segmented",
    "gen_block_ar",
    "gen_coupled_logistic",
    "gen_hierarchical_sde",
    "load_csv",
    "pearson_lagged",
    "predict",
    "project_to_simplex",
    "reconstruct",
    "reflect_half_court",
    "run",
    "schatten1",
    "segment_by",
    "simulate_ar",
    "solve_affiliations",
    "validate_stochastic",
]
