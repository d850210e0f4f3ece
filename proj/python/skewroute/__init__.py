"""Skewness-based query routing for retrieval-augmented generation."""

from ._skewroute import (  # noqa: F401
    Error,
    QueryRecord,
    Router,
    ScoreDistribution,
    average_effectiveness,
    budget_sweep,
    calibrate,
    cumulative_k,
    difficulty_score,
    entropy,
    generate_synthetic,
    gini,
    load_records,
    minmax_area,
    powerlaw_slope,
    random_baseline,
    validate_distribution,
    write_records,
)

__version__ = "0.1.0"
