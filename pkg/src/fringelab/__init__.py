"""Multi-photon interference in a lossy two-mode interferometer.

Mixed photon-number inputs from an imperfect single-photon source are
propagated through a Mach-Zehnder-type network with loss, producing
detection fringes, contrasts, phase sensitivities and fits to data.
"""

from ._version import __version__
from .calib import CalibrationCurve, CalibrationError, calibrate, fit_quadratic_plate_model, phase_from_intensity
from .ensemble import (
    FITTED,
    FITTED_TWO_PHOTON,
    IDEAL,
    InputConfig,
    SourceParams,
    WeightedEnsemble,
    build_ensemble,
    ensemble_probability,
    mixed_probability,
)
from .fitsolver import (
    FitData,
    FitProblem,
    FitError,
    FitResult,
    SingularJacobianError,
    StageDependencyError,
    contrast_vs_g2_curve,
    fit,
    staged_workflow,
    synthesize,
    synthesize_stages,
)
from .fock import LabeledFockState, ModeLabel
from .fringe import (
    ContrastReport,
    FringeScan,
    NoExtremaError,
    analytic_fringe,
    contrast,
    parameter_sweep,
    photon_number_product_expectation,
    scan,
)
from .network import NetworkParams, TransferCoefficients, transfer_coefficients
from .propagator import (
    Scheme,
    TruncationError,
    detection_probability,
    exact_output_probability,
    output_distribution,
    propagate,
)
from .sensitivity import (
    CoarseGridError,
    SensitivityCurve,
    combined_scheme_fringe,
    phase_sensitivity,
    sensitivity_scan,
    sensitivity_sweep,
)
from .temporal import (
    WavepacketParams,
    contrast_decay_constant,
    contrast_vs_separation,
    emg_density,
    overlap_curve,
    temporal_overlap,
)

__all__ = [name for name in dir() if not name.startswith("_")]
