"""Minimum-relative-entropy state reconstruction and entropy calculus.

Dense Hermitian algebra, classical/quantum (relative) entropies,
generalized canonical states with the full partition-function calculus,
coarse-graining maps with the level-contraction criterion, and desk-scale
checks of frequency concentration and optimal state discrimination.
"""

from .config import DEFAULT, ToleranceConfig
from .errors import (
    CapacityError,
    ConditioningError,
    ConvergenceError,
    DimensionMismatchError,
    DomainError,
    FeasibilityError,
    RationalApproximationError,
    SupportError,
    ToolkitError,
    ValidationError,
)
from .operators import (
    DensityOperator,
    HermitianOperator,
    SpectralDecomposition,
    density,
    expectation,
    hermitian,
    identity_density,
    n_fold_power,
    operator_function,
    partial_trace,
    spectral_decompose,
    support_projector,
    tensor_product,
)
from .entropy import (
    ClassicalDistribution,
    classical_entropy,
    classical_relative_entropy,
    distribution,
    entropy_from_relative,
    meta_probability,
    quantum_relative_entropy,
    relative_entropy_via_extension,
    von_neumann_entropy,
)
from .canonical import (
    CanonicalState,
    ConstraintData,
    LevelOfDescription,
    canonical_entropy_identity,
    canonical_state,
    classical_maxent,
    correlation_matrix,
    kubo_mori_correlation,
    level_of_description,
    macrostate_relative_entropy,
    partition_gradient_check,
    second_order_divergence,
    solve_minrent,
)
from .coarsegrain import (
    CanonicalProjection,
    ContractionVerdict,
    Decorrelator,
    Pinching,
    contract_level,
    decorrelate,
    eigenspace_pinching,
    kawasaki_gunton,
    pinch,
    pinching,
    pythagorean_residual,
)
from .asymptotics import (
    ConcentrationReport,
    SteinPoint,
    classical_neyman_pearson,
    concentration_simulation,
    frequency_meta_probability,
    quantum_neyman_pearson,
    stein_rate_trace,
)

__version__ = "0.1.0"
