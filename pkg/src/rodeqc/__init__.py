"""rodeqc: pathwise simulation and robust control of unitary dynamics under
bounded Hermitian noise."""

__version__ = "0.1.0"

from .controls import ControlHamiltonian, evaluate_control, zero_control
from .error_bounds import (
    BoundChainReport,
    DecorrelationResult,
    TubeEstimate,
    WorstCaseConfig,
    bound_chain,
    construct_worst_case,
    decorrelation_study,
    geometric_bound,
    linear_bound,
    tightness_gap,
    wcnc_tube_probability,
)
from .geodesics import (
    GeodesicSolution,
    chart_christoffel,
    chart_geodesic,
    chart_metric,
    euler_arnold_flow,
    frame_christoffel,
    shoot_geodesic,
    structure_constants,
)
from .integrator import (
    ErrorStats,
    UnitaryTrajectory,
    apply_to_state,
    ensemble_density,
    error_process,
    interaction_transform,
    propagate,
    propagate_interaction,
    purity,
    uniform_grid,
)
from .metrics import NoiseMetric, metric_norm, path_length
from .noise_process import (
    MaternConfig,
    NoiseModelSpec,
    NoiseTrajectory,
    build_noise_trajectory,
    matern_covariance,
    sample_mixed_unitary,
    sample_scalar_gp,
    squash_arctan,
)
from .optimizer import (
    OptimizationProblem,
    OptimizationResult,
    OptimizerOptions,
    cost_aware,
    cost_blind,
    evaluate_robust,
    experiment_noise_aware_vs_blind,
    optimize,
    snr_sweep,
)
from .su_algebra import (
    PauliFrame,
    expm_skew,
    frobenius_distance,
    logm_su,
    orthonormal_frame,
    pauli_frame,
)
