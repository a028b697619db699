"""Two-phase microstructures from thresholded Gaussian random fields."""

__version__ = "0.1.0"

from .config import (  # noqa: E402
    ConfigError,
    DegenerateStructureError,
    GeneratorConfig,
    GRFError,
    NoPercolationError,
)
from .spectral import (  # noqa: E402
    ScalarGrid,
    SpectralField,
    build_spectral_field,
    evaluate,
    sample_directions,
    sample_magnitudes,
)
from .structure import (  # noqa: E402
    Microstructure,
    double_cut_levels,
    generate,
    inverse_erf,
    measured_solid_fraction,
    single_cut_level,
    threshold_double,
    threshold_single,
)
from .analysis import (  # noqa: E402
    CorrelationMap,
    CorrelationProfile,
    angular_average,
    directional_correlation,
    normalize_profile,
    specific_surface_area,
    two_point_correlation,
)
from .topology import BurnResult, burn, percolates, tortuosity, trim_to_percolating  # noqa: E402
