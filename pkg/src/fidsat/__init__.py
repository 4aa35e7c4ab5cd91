"""Fidelity-decay saturation levels for eigenstates of quantum-chaotic maps.

Dense linear algebra for certified unitaries, seeded CUE/COE/kicked-top
generators, fidelity series and saturation estimators, LDOS construction,
curve fits, and a declarative sweep runner with a small CLI.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    ConfigError,
    ConfigParseError,
    ConfigSemanticError,
    DecompositionFailedError,
    DimensionMismatchError,
    DimensionUnexpectedError,
    ExperimentError,
    FidsatError,
    FitDivergedError,
    GridMismatchError,
    InsufficientDecayError,
    InsufficientPointsError,
    InvalidSpinError,
    NonUnitaryError,
    NotNormalizedError,
    OutputExistsError,
    SymmetryBrokenError,
    WindowOutOfRangeError,
)
from .linalg import (  # noqa: F401
    OverlapMatrix,
    SpectralDecomposition,
    UnitaryOperator,
    certify_unitary,
    load_matrix,
    matrix_from_json,
    matrix_to_json,
    overlap_matrix,
    overlap_with_states,
    save_matrix,
    spectral_decompose,
    unitarity_defect,
    wrap_angle,
)
from .ensembles import (  # noqa: F401
    AngularMomentumOps,
    KickedTopParams,
    OeSystem,
    PerturbationSpec,
    angular_momentum_ops,
    kicked_top,
    make_coe,
    oe_subspace_projector,
    oe_system,
    parity_eigenspace_dimension,
    parity_projector,
    perturbation_generator_variance,
    perturbation_unitary,
    qubit_perturbation,
    restrict_to_subspace,
    rotation_parity_operator,
    sample_cue,
    spin_perturbation,
)
from .fidelity import (  # noqa: F401
    FidelitySeries,
    LdosHistogram,
    SaturationEstimate,
    fgr_scales,
    fidelity_direct,
    fidelity_spectral,
    fidelity_spectral_batch,
    gamma_theory,
    ipr_all,
    ldos,
    ldos_to_csv,
    saturation_ipr,
    saturation_random_state,
    saturation_time_average,
    series_to_csv,
)
from .spacings import (  # noqa: F401
    coe_spacing_pdf,
    cue_spacing_pdf,
    ks_distance,
    l1_distance_to_pdf,
    nearest_neighbor_spacings,
    phase_uniformity_pvalue,
    poisson_spacing_pdf,
)
from .analysis import (  # noqa: F401
    FitResult,
    SaturationCurve,
    ensemble_beta,
    ensemble_ratio,
    fit_exponential_decay,
    fit_lorentzian,
    fit_power_law,
    select_fgr_window,
    strong_perturbation_floor,
)
