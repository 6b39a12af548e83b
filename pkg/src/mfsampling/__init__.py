"""Multi-frequency sampling reconstruction of acoustic source supports."""

import os as _os

# Thread-count override must land in the environment before BLAS loads.
_threads = _os.environ.get("MFSAMPLING_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from .geometry import (
    Ball,
    Cube,
    GeometryError,
    LShape,
    Peanut,
    QuadratureRule,
    RoundedCylinder,
    SourceSupport,
    Union,
    annulus_radii,
    contains,
    quadrature,
)
from .forward import (
    DatasetFormatError,
    FrequencyGrid,
    MeasurementSet,
    MultiFreqDataset,
    add_noise,
    far_field,
    fundamental_solution,
    generate_dataset,
    near_field,
    read_dataset,
    write_dataset,
)
from .operators import (
    FreqFunction,
    SupportFunction,
    apply_far_multiplier,
    apply_far_operator,
    apply_near_multiplier,
    apply_near_operator,
    distance_analysis,
    distance_synthesis,
    factorization_residual,
    far_quadratic_form,
    freq_inner,
    freq_norm,
    near_quadratic_form,
    planewave_analysis,
    planewave_synthesis,
    support_inner,
    support_norm,
)
from .imaging import (
    CrossSection,
    IndicatorField,
    SamplingGrid,
    ThresholdMask,
    compute_indicator,
    cross_section,
    far_test_function,
    indicator_far,
    indicator_near,
    near_test_function,
    normalize,
    psf_closed_form,
    psf_discrete,
    threshold_mask,
)
from .verify import (
    VerificationReport,
    check_coercivity,
    check_factorization,
    check_psf,
    check_symmetries,
    symmetry_violation,
)
from .scenario import (
    ConfigError,
    PRESETS,
    Scenario,
    load_scenario,
    parse_config,
    parse_config_text,
    polar_sensor,
    scenario_hash,
    write_config,
    write_config_text,
)

__version__ = "0.1.0"
