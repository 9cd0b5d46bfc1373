"""Entanglement and phase-space Bell tests for two coupled, damped cavity modes."""

__version__ = "0.1.0"

from .errors import (
    CavityError,
    CutoffTooSmall,
    DegenerateBranch,
    DegenerateCat,
    NotAState,
    OutOfRange,
    PositivityLost,
    QutritRegime,
    SeriesNotConverged,
)
from .fock import (
    coherent_state_vector,
    default_cutoff,
    displacement_matrix,
    linear_entropy,
    mode_operator,
    partial_trace,
)
from .evolution import (
    CatSpec,
    CatTrajectory,
    ModelParams,
    SuperpositionSpec,
    cat_density_matrix,
    cat_trajectory,
    closed_form_single_photon,
    closed_form_superposition,
    evolved_bell_state,
    kraus_evolve,
    lindblad_step_integrate,
)
from .entanglement import (
    EffectiveTwoQubitState,
    cat_concurrence,
    closed_form_concurrence,
    effective_two_qubit,
    eof_from_concurrence,
    wootters_concurrence,
)
from .nonlocality import (
    BellResult,
    BellSettings,
    CatWignerEvaluator,
    ParityEvaluator,
    bell_measure,
    displaced_parity_expectation,
    maximize_bell,
    wigner_cat_analytic,
)
