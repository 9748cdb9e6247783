"""Preference-based global optimization with RBF surrogates and IDW exploration."""

from .acquisition import (
    AcquisitionContext,
    DeltaCycle,
    Variant,
    acquisition_glisp_legacy,
    acquisition_glisp_r,
    acquisition_gradient,
    acquisition_value,
    build_context,
    cycle_step,
)
from .benchmarks import BenchmarkProblem, SyntheticDM, benchmark_catalog, get_problem
from .driver import (
    IterationRecord,
    PreferenceOracle,
    ProtocolError,
    SessionState,
    SolveResult,
    SolverConfig,
    initial_queries,
    solve,
    step,
)
from .evaluation import (
    DataProfile,
    RunRecord,
    accuracy,
    data_profile,
    n_acc,
    run_campaign,
    run_trial,
)
from .exploration import (
    IdwContext,
    idw_distance,
    idw_distance_cglisp,
    idw_distance_gradient,
    idw_weight,
)
from .problem import (
    AffineRescaler,
    ConstraintSet,
    is_feasible,
    latin_hypercube,
    make_rescaler,
)
from .pso import PsoConfig, PsoResult, minimize_acquisition, multistart_refine
from .rescaling import AugmentedSet, MinMaxStats, augment, kmeans, minmax_stats, rescale
from .surrogate import (
    DEFAULT_LOOCV_GRID,
    FitError,
    PreferenceDataset,
    RadialKind,
    RbfSurrogate,
    fit_weights,
    loocv_select_epsilon,
    radial_eval,
    surrogate_eval,
    surrogate_gradient,
    surrogate_preference,
)

__version__ = "0.1.0"
