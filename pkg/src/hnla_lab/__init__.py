"""Heralded noiseless linear amplifier as a phase-insensitive squeezer."""

from .errors import BudgetError, CutoffTooLargeError, HnlaError, TruncationWarning, UnphysicalGainError
from .fock_core import (
    DensityMatrix,
    FockVector,
    SqueezedCoherentParams,
    TwoModeSchmidtState,
    coherent_squeezed_coeffs,
    hermite,
    inner_product,
    mix,
    pure_to_density,
    quadrature_stats,
    squeezing_from_db,
    thermal_density,
    trace_distance,
    vacuum_squeezed_coeffs,
)
from .hnla_transform import (
    HnlaConfig,
    TransformResult,
    apply_filtration_bruteforce,
    quadrature_gains,
    success_weight_closed_form,
    transform,
    transform_displacement,
    transform_squeezing,
    truncated_squeezer,
)
from .ensemble_lab import (
    GridSpec,
    NoSignalReport,
    WeightedEnsemble,
    amplify_epr,
    condition_ensemble,
    heterodyne_scenario,
    homodyne_ensemble,
    no_signaling_check,
    photon_number_scenario,
)

__version__ = "0.1.0"
