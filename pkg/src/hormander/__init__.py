"""Numerics for Hormander spaces, RO-varying weights and an elliptic problem on the disk."""

__version__ = "0.1.0"

from .errors import DomainError, HormanderError, NumericError, PreconditionError, UnsupportedError
from .weights import (
    ClassicalVerdict,
    ConvergenceVerdict,
    IndexPair,
    Oscillating,
    PiecewiseTable,
    Power,
    PowerLog,
    Product,
    RoCheck,
    RoWeight,
    analytic_indices,
    check_ro_membership,
    classical_solution_criterion,
    embed_criterion,
    estimate_indices,
    eval_weight,
    weight_from_dict,
)
from .spectra import (
    CircleSpectrum,
    EmbeddingRatio,
    LatticeSpectrum,
    analyze_circle,
    derivative_multiplier_bound,
    embedding_ratio,
    hnorm,
    smoothed_modulus,
    synthesize_circle,
)
from .interpolation import (
    InterpolationSetup,
    PseudoconcavityCheck,
    build_psi,
    check_direct_sum,
    check_pseudoconcavity,
    interp_norm,
)
from .disk import DiskField, falling_factorial, radial_nodes, random_field
from .bvp import (
    AccuracyWarning,
    AdjointTriple,
    DiskBvpProblem,
    SolveReport,
    adjoint_kernel_basis,
    apply_operator,
    apriori_probe,
    fredholm_report,
    kernel_basis,
    mode_rank_analysis,
    regularity_probe,
    solvability_residuals,
    solve,
    solve_mode,
)
from .green import GreenCheckInput, adjoint_system_residual, green_pairing_check, green_residual
