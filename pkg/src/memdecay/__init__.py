"""Per-video linear memory-decay curves from repeat-detection annotations."""

from memdecay._accel import backend
from memdecay.analysis import compare_trend_fits, decile_curves
from memdecay.core import (
    AnnotationRecord,
    AnnotationSet,
    DecayCurve,
    FitConfig,
    VideoScoreTable,
    base_memorability,
    score_at_lag,
)
from memdecay.fitting import FitTrace, fit_all, fit_video, ols_reference
from memdecay.metrics import (
    ConsistencyReport,
    EvalReport,
    curve_mae,
    evaluate_predictions,
    pearson_r,
    r_squared,
    spearman_rc,
    split_half_consistency,
)
from memdecay.simulate import SimResult, SimSpec, simulate_dataset, simulate_stream_session

__version__ = "0.1.0"

__all__ = [
    "AnnotationRecord",
    "AnnotationSet",
    "ConsistencyReport",
    "DecayCurve",
    "EvalReport",
    "FitConfig",
    "FitTrace",
    "SimResult",
    "SimSpec",
    "VideoScoreTable",
    "backend",
    "base_memorability",
    "compare_trend_fits",
    "curve_mae",
    "decile_curves",
    "evaluate_predictions",
    "fit_all",
    "fit_video",
    "ols_reference",
    "pearson_r",
    "r_squared",
    "score_at_lag",
    "simulate_dataset",
    "simulate_stream_session",
    "spearman_rc",
    "split_half_consistency",
]
