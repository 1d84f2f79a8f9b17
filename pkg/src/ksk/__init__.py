"""Heat kernels of kinetic Lévy processes: evaluation, envelopes, simulation."""
__version__ = "0.1.0"

from .errors import (AccuracyError, ConfigurationError, DomainError, KSKError,
                     UnsupportedError)
from .geometry import PhasePoint, dilate, shear
from .levy import GaussianSurrogate, LevyKernel
from .bounds import BoundParams, EnvelopeParams, envelope, n_beta
from .kernel import (DensityGrid, GridSpec, density_from, density_gradient,
                     density_grid, density_point, kolmogorov_density, log_gradient)
from .simulate import SimConfig, simulate_endpoints

__all__ = [
    "__version__", "KSKError", "DomainError", "ConfigurationError", "UnsupportedError",
    "AccuracyError", "PhasePoint", "dilate", "shear", "LevyKernel", "GaussianSurrogate",
    "BoundParams", "EnvelopeParams", "envelope", "n_beta", "DensityGrid", "GridSpec",
    "density_point", "density_gradient", "density_grid", "density_from",
    "kolmogorov_density", "log_gradient", "SimConfig", "simulate_endpoints",
]
