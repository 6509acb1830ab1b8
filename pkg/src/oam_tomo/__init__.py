"""Poincare-sphere tomography of first-order OAM beam superpositions.

Simulates doughnut-mode superpositions, their astigmatic mode-converter
transformations (as abstract sphere rotations and as a physically propagated
tilted lens), and reconstructs states from intensity images alone, either by
scanning the converter angle or from three fixed images.
"""

from ._kernels import backend
from .analysis import (
    EmptyImageError,
    ImageReading,
    LineScanCurve,
    LowVisibilityError,
    center_of_mass,
    line_scan,
    mode_orientation,
    nodal_orientation,
    visibility,
)
from .config import ConfigError, RunConfig, load_config
from .converter import (
    Method1Reading,
    NoValidBranchError,
    PoleDegenerateError,
    apply_mc,
    bloch_rotate,
    bloch_unrotate,
    equal_modulus_residual,
    mc_unitary,
    method1_invert,
    method1_predict,
)
from .fields import (
    ComplexField,
    GridSpec,
    IntensityImage,
    add_noise,
    default_grid,
    hg_field,
    intensity,
    lg_field,
    render_state,
    superpose,
)
from .lens import (
    CalibrationFailedError,
    CalibrationResult,
    LensSpec,
    apply_tilted_lens,
    calibrate_tilt,
    simulate_tilted_lens_measurement,
    tilted_lens_mask,
)
from .propagation import AliasingRiskError, propagate
from .states import (
    PoincareState,
    amplitudes,
    amplitudes_to_state,
    bloch_to_state,
    fidelity,
    spherical_distance,
    state_to_bloch,
)
from .tomography import (
    BLIND_VISIBILITY,
    DegenerateOverlapError,
    HalfGreatCircle,
    Measurement,
    Method1Result,
    NoIntersectionError,
    TooManyBlindError,
    TriangleEstimate,
    estimate_state,
    intersect_loci,
    measurement_locus,
    method1_scan,
    visibility_threshold_cap,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "backend",
    # states
    "PoincareState",
    "amplitudes",
    "amplitudes_to_state",
    "bloch_to_state",
    "state_to_bloch",
    "fidelity",
    "spherical_distance",
    # converter
    "Method1Reading",
    "PoleDegenerateError",
    "NoValidBranchError",
    "mc_unitary",
    "apply_mc",
    "bloch_rotate",
    "bloch_unrotate",
    "method1_predict",
    "method1_invert",
    "equal_modulus_residual",
    # fields
    "GridSpec",
    "ComplexField",
    "IntensityImage",
    "default_grid",
    "lg_field",
    "hg_field",
    "superpose",
    "intensity",
    "render_state",
    "add_noise",
    # propagation
    "propagate",
    "AliasingRiskError",
    # lens
    "LensSpec",
    "CalibrationResult",
    "CalibrationFailedError",
    "tilted_lens_mask",
    "apply_tilted_lens",
    "simulate_tilted_lens_measurement",
    "calibrate_tilt",
    # analysis
    "ImageReading",
    "LineScanCurve",
    "EmptyImageError",
    "LowVisibilityError",
    "center_of_mass",
    "line_scan",
    "visibility",
    "nodal_orientation",
    "mode_orientation",
    # tomography
    "BLIND_VISIBILITY",
    "Measurement",
    "HalfGreatCircle",
    "TriangleEstimate",
    "Method1Result",
    "TooManyBlindError",
    "DegenerateOverlapError",
    "NoIntersectionError",
    "measurement_locus",
    "intersect_loci",
    "estimate_state",
    "method1_scan",
    "visibility_threshold_cap",
    # config
    "RunConfig",
    "ConfigError",
    "load_config",
]
