"""Personnel prognostics and health management toolkit."""

__version__ = "0.1.0"

from .model import BiomarkerRole, BiomarkerSample, BiomarkerSeries, SubjectProfile, validate_series
from .recovery import FitConfig, FitResult, RecoveryModel, eval_recovery, fit_recovery, recovery_time
from .monitor import (
    Alert, AlertKind, ThresholdBand, TrendModel, Zone, classify, evaluate_alerts,
    fit_trend, forecast_crossing, forecast_value,
)
from .predictor import (
    FactorMatrix, PredictorReport, SequentialEstimate, correlation_matrix, fit_linear,
    rank_predictors, sequential_update, significant_correlations, standardize,
)
from .activity import AccelSample, ActivityFeatures, kmeans, load_distribution, window_features
from .simgen import SimSpec, gen_accel, gen_drift, gen_panel, gen_recovery, simulate

__all__ = [name for name in dir() if not name.startswith("_")]
