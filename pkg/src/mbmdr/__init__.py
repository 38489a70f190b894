"""MDR-based detection of interacting discrete features and individual prediction.

The package covers the full workflow: data ingestion, exhaustive ranking of
feature tuples by cell-labeled association models, aggregation of the top
models into probability / class / risk-score predictions, cross-validated
hyperparameter search, a penetrance-table simulator for pure epistasis and
main effects, and a replicated benchmark harness with a main-effects
logistic baseline.
"""

from .baseline import LogisticModel, fit_logistic, predict_logistic, select_l2
from .benchmark import BenchmarkConfig, run_benchmark, summarize
from .data import (
    MISSING,
    FoldAssignment,
    GenotypeDataset,
    load_dataset,
    make_dataset,
    stratified_kfold,
    write_dataset,
)
from .engine import (
    LABEL_H,
    LABEL_L,
    LABEL_O,
    CellTable,
    HyperParams,
    MdrModel,
    ModelRanking,
    arrange_cells,
    build_model,
    enumerate_and_rank,
    label_cells,
    model_statistic,
)
from .errors import InfeasibilityError, ValidationError
from .penetrance import (
    EffectVector,
    PenetranceTable,
    effects_to_penetrance,
    expit,
    generate_main_effect_table,
    generate_pure_epistasis_table,
    heritability,
    hwe_probs,
    logit,
    marginal_penetrance,
    penetrance_scale_effects,
    penetrance_to_effects,
    prevalence,
    table_from_mafs,
)
from .predictor import (
    MbmdrClassifier,
    load_model,
    predict_class,
    predict_proba,
    risk_score,
    save_model,
    train_classifier,
)
from .simulate import ComponentSpec, ScenarioSpec, build_scenario, simulate_dataset
from .stats import TestResult, adjusted_cell_lrt, chisq_sf, two_by_two_chisq
from .tuner import SearchSpace, TuneResult, auc, tune

__version__ = "0.1.0"
