"""Functions of self-adjoint elliptic operators by contour quadrature.

The main entry points are :func:`fraccal.operator.apply_function` for
``g(L) u`` and :func:`fraccal.quadrature.scalar_apply` for ``g(lambda)``;
:mod:`fraccal.models` provides the unit-square model problems and
:mod:`fraccal.harness` the reproduction experiments.
"""

from .contour import ContourParams, locate_pole_preimages, psi, psi_prime
from .operator import SpectralOperator, SpectralResolvent, apply_function, exact_apply_spectral, h_norm
from .quadrature import QuadratureDiverged, build_nodes, make_scheme, scalar_apply
from .special import MittagLefflerParams, MittagLefflerSymbol, PowerSymbol, mittag_leffler

__version__ = "0.1.0"

__all__ = [
    "ContourParams",
    "MittagLefflerParams",
    "MittagLefflerSymbol",
    "PowerSymbol",
    "QuadratureDiverged",
    "SpectralOperator",
    "SpectralResolvent",
    "apply_function",
    "build_nodes",
    "exact_apply_spectral",
    "h_norm",
    "locate_pole_preimages",
    "make_scheme",
    "mittag_leffler",
    "psi",
    "psi_prime",
    "scalar_apply",
]
