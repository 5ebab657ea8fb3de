"""Single- and two-photon interference in a birefringent Mach-Zehnder
interferometer: transfer algebra, closed-form and quadrature count rates,
HOM dips, path-imbalance visibilities, and thermal-dispersion fringe fits.
"""

from .crystal import (
    BirefringentCrystal,
    CompensatorAlignment,
    CompensatorState,
    C_MM_PER_PS,
    compensator_phase,
    dk_dT_to_dn_dT,
    dn_dT_to_dk_dT,
    omega_from_wavelength,
)
from .modes import (
    InterferometerConfig,
    OutputAmplitudes,
    PolarizationCoefficients,
    bs_transform,
    coincidence_kernel,
    output_amplitudes,
    polarization_coefficients,
    transfer_matrix,
)
from .rates import (
    CountRates,
    SpectrumParams,
    gaussian_decoherence_factor,
    rates_for_spectrum,
    rates_gaussian,
    rates_monochromatic,
    rates_sinc2,
    sinc2_visibility_factor,
)
from .spectral import (
    QuadratureError,
    QuadratureSettings,
    SpectralDensity,
    hom_dip,
    imbalance_visibility,
    integrate_coincidence,
    integrate_single,
)
from .fringe import FringeDataset, expected_rates, synthesize, visibility
from .fit import FitModel, FitResult, fit, levenberg_marquardt
from .config import ConfigError, ExperimentConfig, load_config, parse_config

__version__ = "0.1.0"
