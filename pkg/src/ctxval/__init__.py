"""ctxval: contextual values of quantum observables under general measurements.

Computes generalized eigenvalues (contextual values) for arbitrary POVM
measurements via the SVD pseudoinverse, reconstructs averages, moments, and
postselected conditioned averages from outcome probabilities, evaluates weak
values, and reproduces three worked qubit scenarios with Monte Carlo
verification.
"""

from .averaging import (
    ConditionedSetup,
    aav_weak_value,
    conditioned_average,
    cv_moment,
    moment,
    reconstructed_average,
    sequence_probabilities,
    weak_value,
)
from .errors import (
    ContextualValueError,
    DegenerateCoupling,
    DimensionMismatch,
    DivergentPostselection,
    GridInadequate,
    IncompleteContext,
    NoPostselectedTrials,
    NonCommutingContext,
    NotHermitian,
    NotReconstructable,
    OrthogonalPostselection,
    ZeroPostselectionProbability,
    ZeroProbabilityBranch,
)
from .montecarlo import (
    EmpiricalResult,
    RunConfig,
    empirical_average,
    empirical_conditioned_average,
    empirical_moment,
    sample_outcome,
)
from .operators import (
    DensityOperator,
    MeasurementContext,
    Observable,
    context_from_kraus,
    is_hermitian,
    minimal_disturbance_check,
    outcome_probabilities,
    polar_decompose,
    pure_state_density,
    spectral_decompose,
    state_update,
)
from .scenarios import (
    DetectorModel,
    QpcParams,
    aav_conditioned_oracle,
    detector_context,
    detector_cv_analytic,
    detector_cv_grid,
    f_state,
    polarization_conditioned_oracle,
    polarization_context,
    projective_context,
    psi_state,
    qpc_conditioned_oracle,
    qpc_cv,
    qpc_full_pipeline,
)
from .solver import (
    ContextualValueSolution,
    build_contrast_matrix,
    null_space,
    pseudoinverse,
    solve_contextual_values,
)

__version__ = "0.1.0"
