"""Model problems on the unit square with homogeneous Dirichlet conditions.

The Laplacian is represented in its sine eigenbasis
``v_mn(x, y) = 2 sin(m pi x) sin(n pi y)``, ``lambda_mn = pi^2 (m^2 + n^2)``,
truncated to ``1 <= m, n <= M``. Coefficient vectors are ordered by
ascending eigenvalue.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft
from scipy import integrate

from .operator import SpectralOperator, SpectralResolvent, apply_function, apply_nodes, exact_apply_spectral
from .quadrature import (
    BalakrishnanSpec,
    NodeSet,
    QuadratureDiverged,
    SchemeSpec,
    build_nodes,
    check_divergence,
    make_scheme,
)
from .special import (
    MittagLefflerParams,
    MittagLefflerSymbol,
    PowerSymbol,
    ProfileKind,
    TimeProfile,
    evaluate_symbol,
    ml_convolution_weight,
)

__all__ = [
    "UnitSquareLaplacian",
    "GaussianBump",
    "ParabolicProblem",
    "ExcludedConfiguration",
    "unit_square_laplacian",
    "bump_coefficients",
    "constant_coefficients",
    "elliptic_solve",
    "parabolic_solve",
    "parabolic_exact",
    "reference_solution",
    "l2_error",
]

REFERENCE_EXTRA_NODES = 8
BUMP_ATOL = 1e-13


class ExcludedConfiguration(QuadratureDiverged, ValueError):
    """The contour family is not admissible for these parameters."""


@dataclass(frozen=True)
class UnitSquareLaplacian(SpectralOperator):
    """Truncated Dirichlet Laplacian; ``m_index``/``n_index`` give each mode's wave numbers."""

    mode_cutoff: int = 40
    m_index: np.ndarray = field(default=None)
    n_index: np.ndarray = field(default=None)


def unit_square_laplacian(mode_cutoff: int = 40) -> UnitSquareLaplacian:
    """Build the operator with modes ``1 <= m, n <= mode_cutoff``.

    The physical representation is the field sampled on the interior grid
    ``x_i = i/(M+1)``, ``i = 1..M``; conversion uses type-I sine transforms.
    """
    M = int(mode_cutoff)
    if M < 1:
        raise ValueError("mode_cutoff must be positive")
    m, n = np.meshgrid(np.arange(1, M + 1), np.arange(1, M + 1), indexing="ij")
    lam = np.pi**2 * (m**2 + n**2).ravel().astype(float)
    order = np.argsort(lam, kind="stable")
    mi = m.ravel()[order]
    ni = n.ravel()[order]

    def from_coefficients(c: np.ndarray) -> np.ndarray:
        grid = np.zeros((M, M), dtype=np.result_type(c, float))
        grid[mi - 1, ni - 1] = c
        # dst type 1 along both axes gives 4 sum sin sin; the basis carries 2
        return sfft.dstn(grid, type=1) / 2.0

    def to_coefficients(u: np.ndarray) -> np.ndarray:
        grid = sfft.idstn(np.asarray(u).reshape(M, M), type=1) * 2.0
        return grid[mi - 1, ni - 1]

    return UnitSquareLaplacian(
        eigenvalues=lam[order],
        to_coefficients=to_coefficients,
        from_coefficients=from_coefficients,
        mode_cutoff=M,
        m_index=mi,
        n_index=ni,
    )


@dataclass(frozen=True)
class GaussianBump:
    """``u0(x, y) = exp(-((x - 1/2)^2 + (y - 1/2)^2) / omega) / omega``."""

    omega: float

    def __post_init__(self) -> None:
        if not self.omega > 0:
            raise ValueError("omega must be positive")


def _bump_1d(omega: float, M: int) -> np.ndarray:
    # int_0^1 exp(-(x-1/2)^2/omega) sin(m pi x) dx, zero for even m by symmetry
    out = np.zeros(M)
    for m in range(1, M + 1, 2):
        with warnings.catch_warnings():
            # QUADPACK flags roundoff once the result is at the 1e-16 level
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.quad(
                lambda x: math.exp(-((x - 0.5) ** 2) / omega),
                0.0,
                1.0,
                weight="sin",
                wvar=m * math.pi,
                epsabs=1e-14,
                epsrel=1e-13,
                limit=200,
            )
        if not err <= BUMP_ATOL:
            raise RuntimeError(f"bump coefficient m={m} not resolved (error estimate {err:.1e})")
        out[m - 1] = val
    return out


def bump_coefficients(op: UnitSquareLaplacian, bump: GaussianBump) -> np.ndarray:
    """Eigen-coefficients ``(u0, v_mn) = 2 J_m J_n / omega``."""
    J = _bump_1d(bump.omega, op.mode_cutoff)
    return 2.0 * J[op.m_index - 1] * J[op.n_index - 1] / bump.omega


def constant_coefficients(op: UnitSquareLaplacian, value: float = 1.0) -> np.ndarray:
    """Coefficients of the constant function: ``2 value J_m J_n``, ``J_m = (1 - (-1)^m)/(m pi)``."""
    m = op.m_index
    n = op.n_index
    jm = (1.0 - (-1.0) ** m) / (m * math.pi)
    jn = (1.0 - (-1.0) ** n) / (n * math.pi)
    return 2.0 * value * jm * jn


@dataclass(frozen=True)
class ParabolicProblem:
    """Subdiffusion ``d_t^alpha u + L^beta u = phi(t) f``, ``u(0) = u0`` (coefficients)."""

    alpha: float
    beta: float
    t_final: float
    u0: np.ndarray
    f_spatial: np.ndarray | None = None
    f_profile: TimeProfile = TimeProfile(ProfileKind.SIN)

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha <= 1.0 and 0.0 < self.beta <= 1.0):
            raise ValueError("alpha and beta must lie in (0, 1]")
        if not self.t_final > 0:
            raise ValueError("t_final must be positive")

    @property
    def source(self) -> np.ndarray:
        return self.u0 if self.f_spatial is None else self.f_spatial


def elliptic_solve(op: SpectralOperator, scheme: SchemeSpec | NodeSet, beta: float, f_coeffs: np.ndarray) -> np.ndarray:
    """Quadrature approximation of ``L^-beta f``."""
    return apply_function(SpectralResolvent(op), scheme, PowerSymbol(beta), f_coeffs)


def _validate_parabolic(ns: NodeSet, problem: ParabolicProblem) -> None:
    if isinstance(ns.spec, BalakrishnanSpec):
        raise ValueError("the Balakrishnan scheme applies to the elliptic problem only")
    if ns.spec.contour.sigma == 0.5 and problem.alpha == 1.0 and problem.beta == 1.0:
        raise ExcludedConfiguration("sigma = 1/2 contours are not admissible for alpha = beta = 1")


def parabolic_solve(op: SpectralOperator, scheme: SchemeSpec | NodeSet, problem: ParabolicProblem,
                    t: float) -> np.ndarray:
    """Quadrature approximation of the solution at time ``t``.

    Per node ``z_j`` the homogeneous part contributes
    ``e_{alpha,1}(-t^alpha z_j^beta)`` and the source the convolution weight
    ``c_j(t)``; when the source's spatial factor equals ``u0`` both share
    a single resolvent solve.
    """
    if not 0.0 < t <= problem.t_final:
        raise ValueError("t must lie in (0, t_final]")
    ns = scheme if isinstance(scheme, NodeSet) else build_nodes(scheme)
    _validate_parabolic(ns, problem)
    sym = MittagLefflerSymbol(MittagLefflerParams(problem.alpha, 1.0), t, problem.beta)
    g = np.asarray(evaluate_symbol(sym, ns.nodes), dtype=complex)
    reason = check_divergence(ns, sym, g)
    if reason is not None:
        raise QuadratureDiverged(reason)

    # weights for j >= 0, mirrored by conjugation
    pos = ns.index >= 0
    c_pos = np.atleast_1d(ml_convolution_weight(problem.alpha, ns.nodes[pos], t, problem.f_profile, problem.beta))
    c = np.concatenate([np.conj(c_pos[:0:-1]), c_pos])
    c[ns.index == 0] = c[ns.index == 0].real

    provider = SpectralResolvent(op)
    if problem.f_spatial is None or np.array_equal(problem.f_spatial, problem.u0):
        return apply_nodes(provider, ns, ns.weights * (g + c), problem.u0)
    return apply_nodes(provider, ns, ns.weights * g, problem.u0) + apply_nodes(
        provider, ns, ns.weights * c, problem.f_spatial
    )


def parabolic_exact(op: SpectralOperator, problem: ParabolicProblem, t: float) -> np.ndarray:
    """Mode-by-mode solution from the Mittag-Leffler representation."""
    sym = MittagLefflerSymbol(MittagLefflerParams(problem.alpha, 1.0), t, problem.beta)
    hom = exact_apply_spectral(op, sym, problem.u0)
    c = ml_convolution_weight(problem.alpha, op.eigenvalues.astype(complex), t, problem.f_profile, problem.beta)
    return hom + c.real * problem.source


def reference_solution(op: SpectralOperator, problem, n_q_finest: int, *, t: float | None = None,
                       f_coeffs: np.ndarray | None = None):
    """High-accuracy reference and its provenance.

    ``problem`` is either a :class:`ParabolicProblem` (then ``t`` is
    required) or an elliptic exponent ``beta`` with right-hand side
    ``f_coeffs``. Uses the DE1 scheme with 8 more nodes than the finest
    run; when DE1 is not admissible the exact spectral solution is used.
    Returns ``(vector, metadata)``.
    """
    n = n_q_finest + REFERENCE_EXTRA_NODES
    scheme = make_scheme("DE1", n, kappa=3.0)
    meta = {"scheme": "DE1", "n_q": n, "k": scheme.k}
    if isinstance(problem, ParabolicProblem):
        if t is None:
            raise ValueError("t is required for parabolic references")
        try:
            return parabolic_solve(op, scheme, problem, t), meta
        except QuadratureDiverged:
            return parabolic_exact(op, problem, t), {"scheme": "spectral", "n_q": 0, "k": 0.0}
    beta = float(problem)
    if f_coeffs is None:
        raise ValueError("f_coeffs is required for elliptic references")
    return elliptic_solve(op, scheme, beta, f_coeffs), meta


def l2_error(u: np.ndarray, v: np.ndarray) -> float:
    """L2 distance of two coefficient vectors (the basis is orthonormal)."""
    return float(np.linalg.norm(np.asarray(u) - np.asarray(v)))
