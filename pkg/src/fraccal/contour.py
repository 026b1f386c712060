"""Double-exponential contour map and its pole preimages.

The contour is parameterized as

    psi(y) = kappa * [cosh(sigma*w) + i*theta*sinh(w)],   w = (pi/2) sinh(y),

with sigma in {1/2, 1}. For real ``y`` it traces a curve that starts at
``kappa`` and opens into the right half plane, enclosing the spectrum of a
positive operator whose smallest eigenvalue exceeds ``kappa``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ContourParams",
    "PolePreimage",
    "PoleSolverError",
    "psi",
    "psi_prime",
    "psi_log_magnitude",
    "overflow_mask",
    "locate_pole_preimages",
    "in_strip",
    "in_dexp_strip",
]

# |w| beyond which hyperbolics are evaluated in exponent-shifted form.
SHIFT_THRESHOLD = 30.0
# cosh/sinh overflow a double a little past 710.
_EXP_LIMIT = 709.0
_LN2 = float(np.log(2.0))


@dataclass(frozen=True)
class ContourParams:
    """Shape parameters of the contour: ``sigma`` in {0.5, 1}, ``theta >= 1``, ``kappa > 0``."""

    sigma: float
    theta: float
    kappa: float = 3.0

    def __post_init__(self) -> None:
        if self.sigma not in (0.5, 1.0):
            raise ValueError(f"sigma must be 0.5 or 1, got {self.sigma!r}")
        if not self.theta >= 1.0:
            raise ValueError(f"theta must be >= 1, got {self.theta!r}")
        if not self.kappa > 0.0:
            raise ValueError(f"kappa must be positive, got {self.kappa!r}")


@dataclass(frozen=True)
class PolePreimage:
    """A point ``y`` with ``psi(y) == lam`` up to ``residual``."""

    y: complex
    w: complex
    lam: float
    residual: float


class PoleSolverError(RuntimeError):
    """Raised when the polynomial root finder fails."""


def _w_of(y):
    return 0.5 * np.pi * np.sinh(y)


def overflow_mask(params: ContourParams, y) -> np.ndarray:
    """True where ``psi`` or ``psi_prime`` at real part of ``y`` is not representable."""
    yr = np.real(np.asarray(y))
    with np.errstate(over="ignore"):
        a = np.abs(0.5 * np.pi * np.sinh(yr))
    return ~(a < _EXP_LIMIT - np.log(np.pi * params.theta * params.kappa) - np.abs(yr))


def psi(params: ContourParams, y, *, return_flag: bool = False):
    """Evaluate the contour map.

    With ``return_flag=True`` a boolean (or boolean array) is returned
    alongside the value, set where the hyperbolic arguments overflow; those
    entries of the value are complex infinities or NaN.
    """
    y = np.asarray(y, dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        w = _w_of(y)
        val = params.kappa * (np.cosh(params.sigma * w) + 1j * params.theta * np.sinh(w))
    val = val[()] if val.ndim == 0 else val
    if return_flag:
        flag = overflow_mask(params, y)
        return val, (bool(flag) if np.ndim(flag) == 0 else flag)
    return val


def psi_prime(params: ContourParams, y, *, return_flag: bool = False):
    """Analytic derivative of :func:`psi`; same overflow contract."""
    y = np.asarray(y, dtype=complex)
    s = params.sigma
    with np.errstate(over="ignore", invalid="ignore"):
        w = _w_of(y)
        val = (
            params.kappa
            * (0.5 * np.pi)
            * np.cosh(y)
            * (s * np.sinh(s * w) + 1j * params.theta * np.cosh(w))
        )
    val = val[()] if val.ndim == 0 else val
    if return_flag:
        flag = overflow_mask(params, y)
        return val, (bool(flag) if np.ndim(flag) == 0 else flag)
    return val


def _log_cosh(x):
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - _LN2


def psi_log_magnitude(params: ContourParams, y):
    """Return ``(log|psi|, arg psi, log|psi'|)`` for real ``y`` without overflow."""
    y = np.asarray(y, dtype=float)
    s, th, ka = params.sigma, params.theta, params.kappa
    with np.errstate(over="ignore"):
        w = 0.5 * np.pi * np.sinh(y)
    big = np.abs(w) > SHIFT_THRESHOLD

    log_p = np.empty_like(y)
    arg_p = np.empty_like(y)
    log_dp = np.empty_like(y)

    # direct evaluation
    ws = np.where(big, 0.0, w)
    ys = np.where(big, 0.0, y)
    p = ka * (np.cosh(s * ws) + 1j * th * np.sinh(ws))
    dp = ka * 0.5 * np.pi * np.cosh(ys) * (s * np.sinh(s * ws) + 1j * th * np.cosh(ws))
    log_p[~big] = np.log(np.abs(p[~big]))
    arg_p[~big] = np.angle(p[~big])
    log_dp[~big] = np.log(np.abs(dp[~big]))

    if np.any(big):
        wb = w[big]
        a = np.abs(wb)
        sg = np.sign(wb)
        # psi/kappa = e^a/2 * [A + iB]
        A = np.exp((s - 1.0) * a) * (1.0 + np.exp(-2.0 * s * a))
        B = th * sg * (1.0 - np.exp(-2.0 * a))
        log_p[big] = np.log(ka) + a - _LN2 + np.log(np.hypot(A, B))
        arg_p[big] = np.arctan2(B, A)
        # psi'/(kappa*pi/2*cosh y) = e^a/2 * [C + iD]
        C = s * sg * np.exp((s - 1.0) * a) * (1.0 - np.exp(-2.0 * s * a))
        D = th * (1.0 + np.exp(-2.0 * a))
        log_dp[big] = (
            np.log(ka * 0.5 * np.pi) + _log_cosh(y[big]) + a - _LN2 + np.log(np.hypot(C, D))
        )
    if y.ndim == 0:
        return float(log_p), float(arg_p), float(log_dp)
    return log_p, arg_p, log_dp


def in_strip(y, half_width: float):
    """Membership in the horizontal strip ``|Im y| < half_width``."""
    return np.abs(np.imag(y)) < half_width


def in_dexp_strip(y, delta: float):
    """Membership in the shrinking strip ``|Im y| < delta * exp(-|Re y|)``."""
    return np.abs(np.imag(y)) < delta * np.exp(-np.abs(np.real(y)))


def _phi(params: ContourParams, w):
    return np.cosh(params.sigma * w) + 1j * params.theta * np.sinh(w)


def _w_candidates_sigma_one(params: ContourParams, lam_over_kappa: float):
    # cosh(w) + i theta sinh(w) = sqrt(1+theta^2) cosh(w + i atan(theta))
    c = lam_over_kappa / np.hypot(1.0, params.theta)
    if c <= 1.0:
        return []  # only Re w = 0 solutions
    a = float(np.arccosh(c))
    b0 = -float(np.arctan(params.theta))
    return [(sign * a, b0) for sign in (1.0, -1.0)], 2.0 * np.pi


def _w_candidates_sigma_half(params: ContourParams, lam_over_kappa: float):
    th = params.theta
    # -4th^2 t^4 + 4i th t^3 + (1-4th^2) t^2 + 4i th t + (1 - L^2) = 0
    coeffs = [-4.0 * th**2, 4j * th, 1.0 - 4.0 * th**2, 4j * th, 1.0 - lam_over_kappa**2]
    try:
        roots = np.roots(coeffs)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise PoleSolverError(str(exc)) from exc
    if roots.size != 4 or not np.all(np.isfinite(roots)):
        raise PoleSolverError("quartic root finder did not return four finite roots")
    out = []
    for t in roots:
        base = 2.0 * np.arcsinh(t)
        for w in (base, 2j * np.pi - base):  # both branches of sinh(w/2) = t
            out.append((float(w.real), float(w.imag)))
    return out, 4.0 * np.pi


def locate_pole_preimages(
    params: ContourParams,
    lam: float,
    im_bound: float,
    *,
    rtol: float = 1e-10,
    max_shift: int = 64,
) -> list[PolePreimage]:
    """Find the preimages ``y`` of a real ``lam > kappa`` with ``|Im y| <= im_bound``.

    Candidates are generated in the ``w`` plane (closed form for sigma = 1,
    quartic roots for sigma = 1/2), shifted by the period of the map,
    pulled back with the principal ``asinh`` and polished by a Newton step
    on ``psi(y) - lam``. Points with ``Re w == 0`` are discarded.
    """
    if not lam > params.kappa:
        raise ValueError("lam must exceed kappa")
    L = lam / params.kappa
    if params.sigma == 1.0:
        res = _w_candidates_sigma_one(params, L)
        if not res:
            return []
        base, period = res
    else:
        base, period = _w_candidates_sigma_half(params, L)

    found: list[PolePreimage] = []
    for re_w, im_w in base:
        if abs(re_w) < 1e-12:
            continue
        if abs(_phi(params, complex(re_w, im_w)) - L) > 1e-6 * L:
            continue  # spurious root from squaring
        for direction in (1, -1):
            for ell in range(0 if direction == 1 else 1, max_shift):
                w = complex(re_w, im_w + direction * ell * period)
                y = complex(np.arcsinh(2.0 * w / np.pi))
                if abs(y.imag) > im_bound * 1.5 + 0.1:
                    break
                for _ in range(3):
                    f = complex(psi(params, y)) - lam
                    y -= f / complex(psi_prime(params, y))
                resid = abs(complex(psi(params, y)) - lam)
                if abs(y.imag) > im_bound or resid > rtol * lam:
                    continue
                if any(abs(p.y - y) < 1e-9 * (1.0 + abs(y)) for p in found):
                    continue
                found.append(PolePreimage(y=y, w=complex(_w_of(y)), lam=float(lam), residual=resid))
    found.sort(key=lambda p: (abs(p.y.imag), p.y.real, p.y.imag))
    return found
