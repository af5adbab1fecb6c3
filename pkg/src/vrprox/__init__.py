"""Variance-reduced proximal stochastic optimization, robust to
per-gradient perturbations, with a reproducible benchmark harness."""

from .data import SyntheticSpec, generate_synthetic, load_libsvm, save_libsvm
from .diagnostics import duality_gap, fit_linear_rate
from .estimators import (
    ExactGradient,
    GradientSample,
    SagaEstimator,
    SgdEstimator,
    SvrgEstimator,
    make_estimator,
    variance_probe,
)
from .problem import (
    Dataset,
    LossSpec,
    Perturbation,
    Problem,
    component_gradient,
    evaluate_objective,
    full_gradient,
    normalize_rows,
    smoothness_bounds,
)
from .prox import Regularizer, prox, regularizer_value
from .sampling import SamplingDistribution, build_distribution, from_weights, sample
from .schedules import (
    POLICY_KINDS,
    Schedule,
    ScheduleState,
    StepPolicy,
    TwoStageController,
    gamma_product_closed_form,
    solve_delta,
)
from .solvers import (
    RunOptions,
    run_accelerated_sgd,
    run_accelerated_svrg,
    run_basic,
    run_two_stage,
    update_averaging,
)
from .trace import CSV_HEADER, SolverTrace, TraceRow

__version__ = "0.1.0"

__all__ = [
    "CSV_HEADER",
    "Dataset",
    "ExactGradient",
    "GradientSample",
    "LossSpec",
    "POLICY_KINDS",
    "Perturbation",
    "Problem",
    "Regularizer",
    "RunOptions",
    "SagaEstimator",
    "SamplingDistribution",
    "Schedule",
    "ScheduleState",
    "SgdEstimator",
    "SolverTrace",
    "StepPolicy",
    "SvrgEstimator",
    "SyntheticSpec",
    "TraceRow",
    "TwoStageController",
    "build_distribution",
    "component_gradient",
    "duality_gap",
    "evaluate_objective",
    "fit_linear_rate",
    "from_weights",
    "full_gradient",
    "gamma_product_closed_form",
    "generate_synthetic",
    "load_libsvm",
    "make_estimator",
    "normalize_rows",
    "prox",
    "regularizer_value",
    "run_accelerated_sgd",
    "run_accelerated_svrg",
    "run_basic",
    "run_two_stage",
    "sample",
    "save_libsvm",
    "smoothness_bounds",
    "solve_delta",
    "update_averaging",
    "variance_probe",
]
