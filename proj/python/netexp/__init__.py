"""Congestion-interference experiment simulator and estimators."""

from ._core import (
    Aggregation,
    Config,
    Estimand,
    Estimate,
    Metric,
    NetexpError,
    SessionLog,
    SessionRecord,
    SimulationResult,
    analyze,
    calibrate,
    replicate,
    simulate,
    sweep,
    weighted_share,
)

__all__ = [
    "Aggregation",
    "Config",
    "Estimand",
    "Estimate",
    "Metric",
    "NetexpError",
    "SessionLog",
    "SessionRecord",
    "SimulationResult",
    "analyze",
    "calibrate",
    "replicate",
    "simulate",
    "sweep",
    "weighted_share",
]


def find(estimates, label, metric):
    """First estimate with the given estimand label and metric, or None."""
    for e in estimates:
        if e.estimand.label == label and e.metric == metric:
            return e
    return None
