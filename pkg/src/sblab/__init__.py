"""Numerical verification lab for heat-kernel coherent-state transforms on
hyperbolic 3-space and its compact dual, the 3-sphere."""

__version__ = "0.1.0"

from .rootsys import (RootSystemSpec, c_constant, delta_a, eta_a, euclidean,
                      hyperbolic3, j_half_a, rho)
from .specfun import (ComplexRadiusSquared, complex_invariant, delta_h3,
                      hyperbolic_cos_distance, sincc, sinhc)
from .heat import (HoloRadialExtension, RadialProfile, SignedMeasureSigma,
                   gangolli_fiber_density, h3_heat_kernel, heat1d_complex,
                   heat3d_radial_complex, pushforward_sigma, s3_heat_spectral,
                   s3_heat_theta, sb_radial_extension, sigma_density)
from .transform import (OffsetRadialFunction, TubeFunctional,
                        invert_radial_at_basepoint, kx_average,
                        sb_aC_extension, tube_functional_continued,
                        tube_functional_small_R)

__all__ = [
    "RootSystemSpec", "c_constant", "delta_a", "eta_a", "euclidean",
    "hyperbolic3", "j_half_a", "rho",
    "ComplexRadiusSquared", "complex_invariant", "delta_h3",
    "hyperbolic_cos_distance", "sincc", "sinhc",
    "HoloRadialExtension", "RadialProfile", "SignedMeasureSigma",
    "gangolli_fiber_density", "h3_heat_kernel", "heat1d_complex",
    "heat3d_radial_complex", "pushforward_sigma", "s3_heat_spectral",
    "s3_heat_theta", "sb_radial_extension", "sigma_density",
    "OffsetRadialFunction", "TubeFunctional", "invert_radial_at_basepoint",
    "kx_average", "sb_aC_extension", "tube_functional_continued",
    "tube_functional_small_R",
]
