"""Empirical disaster resilience scoring and socioeconomic driver inference.

The library computes per-region vulnerability, adaptability, and resilience
scores from hazard-event and population data, then explains them from lagged
socioeconomic indicators via a regression model zoo and constraint-based
causal structure learning.  A CLI (``prime``) and an HTTP service expose the
same staged workflow.
"""

from .causal import Dag, bootstrap_learn, ci_test, extract_parents, pc_stable
from .features import AlignedDataset, SplitSpec, align, correlation_matrix, \
    prune_collinear, scale_features, split
from .ingest import (
    HazardEvent,
    PopulationPanel,
    RegionGeometry,
    SocioPanel,
    interpolate_socio_panel,
    load_geometry,
    load_hazard_events,
    load_population,
    load_socio,
)
from .models import (
    ModelSpec,
    TrainedModel,
    evaluate,
    fit_gbt,
    fit_lasso,
    fit_linear,
    fit_polynomial,
    fit_random_forest,
    fit_ridge,
    run_model_suite,
    tune,
)
from .pipeline import FilterParams, TrainParams, VERSION as __version__, load_inputs, \
    run_pruning, run_scoring, run_training
from .scoring import (
    HazardTypeStats,
    RegionYearScores,
    compute_damage,
    compute_hazard_stats,
    compute_recovery,
    compute_scores,
    compute_threat,
    min_max_normalize,
    quantile_classify,
)
from .synthetic import generate_synthetic
