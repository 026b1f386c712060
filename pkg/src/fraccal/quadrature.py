"""Quadrature schemes for contour-integral representations of ``g(lambda)``.

Three families share one node/weight interface so that

    Q^lambda(g) = sum_j w_j g(z_j) / (lambda - z_j)

covers all of them:

* double exponential (DE): trapezoid rule in ``y`` on ``z = psi(y)``;
* sinc: trapezoid rule on the single-exponential map
  ``w -> kappa (cosh(sigma w) + i theta sinh w)``;
* Balakrishnan: real-axis representation of ``lambda**-beta``, encoded as
  negative real shifts ``z_j = -exp(y_j)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .contour import ContourParams, overflow_mask, psi, psi_log_magnitude, psi_prime
from .special import MittagLefflerSymbol, PowerSymbol, evaluate_symbol

__all__ = [
    "DESpec",
    "SincSpec",
    "BalakrishnanSpec",
    "SchemeSpec",
    "NodeSet",
    "QuadratureDiverged",
    "NodeOverflowError",
    "PRESET_CONTOURS",
    "SINC_CONTOUR",
    "SINC_D",
    "de_default_step",
    "sinc_default_step",
    "balakrishnan_params",
    "make_scheme",
    "build_nodes",
    "scalar_terms",
    "scalar_apply",
    "scalar_error",
    "pairwise_sum",
    "check_divergence",
    "robust_rate",
    "fixed_lambda_rate",
]

PRESET_CONTOURS = {
    "DE1": ContourParams(0.5, 4.0, 3.0),
    "DE2": ContourParams(1.0, 4.0, 3.0),
    "DE3": ContourParams(1.0, 1.0, 3.0),
}
SINC_CONTOUR = ContourParams(1.0, 1.0, 3.0)
SINC_D = math.pi / 5.0

# divergence heuristics
GROWTH_FACTOR = 1e6
GROWTH_RUN = 5
PROBE_DELTA = 0.2
PROBE_FACTOR = 1e6
DROP_RTOL = 1e-18


@dataclass(frozen=True)
class DESpec:
    contour: ContourParams
    k: float
    n_q: int

    def __post_init__(self) -> None:
        _check_k_n(self.k, self.n_q)


@dataclass(frozen=True)
class SincSpec:
    contour: ContourParams
    d: float
    k: float
    n_q: int

    def __post_init__(self) -> None:
        _check_k_n(self.k, self.n_q)
        if not self.d > 0:
            raise ValueError("d must be positive")


@dataclass(frozen=True)
class BalakrishnanSpec:
    beta: float
    k: float
    n_pos: int
    n_neg: int

    def __post_init__(self) -> None:
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie strictly between 0 and 1")
        _check_k_n(self.k, max(self.n_pos, 0))


SchemeSpec = Union[DESpec, SincSpec, BalakrishnanSpec]


def _check_k_n(k: float, n_q: int) -> None:
    if not k > 0:
        raise ValueError("step k must be positive")
    if n_q < 0:
        raise ValueError("n_q must be nonnegative")


class QuadratureDiverged(ArithmeticError):
    """The quadrature sum does not converge for this symbol and contour."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class NodeOverflowError(OverflowError):
    """A node left the representable range and its term could not be bounded."""


def de_default_step(n_q: int) -> float:
    """``0.9 ln(n_q) / n_q``."""
    if n_q < 2:
        raise ValueError("the default DE step needs n_q >= 2")
    return 0.9 * math.log(n_q) / n_q


def sinc_default_step(beta: float, n_q: int, d: float = SINC_D) -> float:
    """``sqrt(2 pi d / (beta n_q))``."""
    if not beta > 0 or n_q < 1:
        raise ValueError("need beta > 0 and n_q >= 1")
    return math.sqrt(2.0 * math.pi * d / (beta * n_q))


def balakrishnan_params(beta: float, n_q: int) -> tuple[float, int, int]:
    """Step and point counts ``(k, n_pos, n_neg)`` for the real-axis scheme."""
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie strictly between 0 and 1")
    if n_q < 1:
        raise ValueError("n_q must be positive")
    k = math.sqrt(math.pi**2 / (1.8 * beta * n_q))
    n_neg = math.ceil(math.pi**2 / (2.0 * (1.0 - beta) * k * k) - 1e-9)
    return k, n_q, n_neg


def make_scheme(name: str, n_q: int, *, beta: float | None = None, kappa: float = 3.0,
                contour: ContourParams | None = None) -> SchemeSpec:
    """Build a named scheme (DE1, DE2, DE3, sinc, balakrishnan) with its default step.

    ``contour`` overrides the preset shape for the DE and sinc families.
    """
    key = name.lower()
    if key in ("de1", "de2", "de3", "de"):
        c = contour or PRESET_CONTOURS[name.upper()]
        c = ContourParams(c.sigma, c.theta, kappa)
        return DESpec(c, de_default_step(n_q), n_q)
    if key == "sinc":
        if beta is None:
            raise ValueError("the sinc step depends on beta")
        c = contour or SINC_CONTOUR
        c = ContourParams(c.sigma, c.theta, kappa)
        return SincSpec(c, SINC_D, sinc_default_step(beta, n_q), n_q)
    if key == "balakrishnan":
        if beta is None:
            raise ValueError("the Balakrishnan scheme needs beta")
        k, n_pos, n_neg = balakrishnan_params(beta, n_q)
        return BalakrishnanSpec(beta, k, n_pos, n_neg)
    raise ValueError(f"unknown scheme {name!r}")


@dataclass(frozen=True)
class NodeSet:
    """Quadrature nodes and weights ordered by the index ``j``.

    ``abscissae`` are the trapezoid points (``y_j`` for DE, ``w_j`` for
    sinc, ``y_j`` for Balakrishnan). ``dropped`` holds abscissae whose
    nodes overflowed; they are absent from ``nodes``.
    """

    spec: SchemeSpec
    index: np.ndarray
    abscissae: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    conjugate_symmetric: bool
    dropped: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self) -> None:
        if not (len(self.index) == len(self.nodes) == len(self.weights) == len(self.abscissae)):
            raise ValueError("nodes and weights must have equal length")
        for a in (self.index, self.abscissae, self.nodes, self.weights, self.dropped):
            a.setflags(write=False)

    @property
    def symmetric_half(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights with ``j >= 0``."""
        if not self.conjugate_symmetric:
            raise ValueError("node set is not conjugate symmetric")
        sel = self.index >= 0
        return self.nodes[sel], self.weights[sel]

    @property
    def overflowed(self) -> bool:
        return self.dropped.size > 0


def build_nodes(spec: SchemeSpec) -> NodeSet:
    """Generate nodes ``z_j`` and weights ``w_j`` (with ``k`` and ``1/(2 pi i)`` folded in)."""
    if isinstance(spec, DESpec):
        c = spec.contour
        y = np.arange(spec.n_q + 1) * spec.k
        bad = overflow_mask(c, y)
        z = np.atleast_1d(psi(c, y[~bad]))
        w = spec.k * np.atleast_1d(psi_prime(c, y[~bad])) / (2j * np.pi)
        return _mirrored(spec, y, bad, z, w)
    if isinstance(spec, SincSpec):
        c = spec.contour
        u = np.arange(spec.n_q + 1) * spec.k
        bad = ~(u < 700.0 - math.log(c.kappa * c.theta + 1.0))
        uk = u[~bad]
        z = c.kappa * (np.cosh(c.sigma * uk) + 1j * c.theta * np.sinh(uk))
        dz = c.kappa * (c.sigma * np.sinh(c.sigma * uk) + 1j * c.theta * np.cosh(uk))
        return _mirrored(spec, u, bad, z, spec.k * dz / (2j * np.pi))
    if isinstance(spec, BalakrishnanSpec):
        j = np.arange(-spec.n_neg, spec.n_pos + 1)
        y = j * spec.k
        bad = ~(y < 700.0)
        yk = y[~bad]
        z = (-np.exp(yk)).astype(complex)
        w = (math.sin(math.pi * spec.beta) / math.pi * spec.k * np.exp((1.0 - spec.beta) * yk)).astype(complex)
        return NodeSet(spec, j[~bad], yk, z, w, False, y[bad])
    raise TypeError(f"unsupported scheme {spec!r}")


def _mirrored(spec, x, bad, z, w) -> NodeSet:
    """Extend values for ``j >= 0`` to ``-j`` by conjugation (exact mirror symmetry)."""
    n = int(np.count_nonzero(~bad))
    j = np.arange(-(n - 1), n)
    z = z.astype(complex)
    w = w.astype(complex)
    z[0] = z[0].real
    w[0] = w[0].real
    xs = x[~bad]
    dropped = x[bad]
    return NodeSet(
        spec,
        j,
        np.concatenate([-xs[:0:-1], xs]),
        np.concatenate([np.conj(z[:0:-1]), z]),
        np.concatenate([np.conj(w[:0:-1]), w]),
        True,
        np.concatenate([-dropped[::-1], dropped]),
    )


# ---------------------------------------------------------------------------
# summation


def pairwise_sum(terms: np.ndarray, axis: int = 0) -> np.ndarray:
    """Sum along ``axis`` with a fixed balanced binary tree.

    The tree depends only on the number of terms, so results are
    reproducible regardless of how the terms were computed.
    """
    x = np.moveaxis(np.asarray(terms), axis, 0)
    if x.shape[0] == 0:
        return np.zeros(x.shape[1:], dtype=x.dtype)
    while x.shape[0] > 1:
        if x.shape[0] % 2:
            x = np.concatenate([x, np.zeros((1,) + x.shape[1:], dtype=x.dtype)])
        x = x[0::2] + x[1::2]
    return x[0]


# ---------------------------------------------------------------------------
# scalar application


def _probe_points(ns: NodeSet) -> np.ndarray | None:
    spec = ns.spec
    if isinstance(spec, DESpec):
        y = ns.abscissae
        shift = PROBE_DELTA * np.exp(-np.abs(y))
        yy = np.concatenate([y + 1j * shift, y - 1j * shift])
        with np.errstate(all="ignore"):
            return np.asarray(psi(spec.contour, yy))
    if isinstance(spec, SincSpec):
        c = spec.contour
        u = np.concatenate([ns.abscissae + 1j * spec.d, ns.abscissae - 1j * spec.d])
        with np.errstate(all="ignore"):
            return c.kappa * (np.cosh(c.sigma * u) + 1j * c.theta * np.sinh(u))
    return None


def check_divergence(ns: NodeSet, sym, g: np.ndarray | None = None) -> str | None:
    """Return a reason string if the symbol makes the quadrature sum divergent.

    Two checks are made. The symbol must stay finite and non-growing on
    the nodes. For Mittag-Leffler symbols it must also stay bounded on a
    thin strip around the integration line; otherwise the trapezoid sum
    does not converge even when every node value is modest.
    """
    if g is None:
        with np.errstate(all="ignore"):
            g = np.asarray(evaluate_symbol(sym, ns.nodes))
    if not np.all(np.isfinite(g)):
        return "symbol is not finite on the nodes"
    if isinstance(sym, MittagLefflerSymbol) and ns.conjugate_symmetric:
        kappa = ns.spec.contour.kappa
        far = np.abs(ns.nodes) > 10.0 * kappa
        if np.any(np.abs(g[far]) > 1.0):
            return "symbol grows along the contour"
        probe = _probe_points(ns)
        with np.errstate(all="ignore"):
            gp = np.asarray(evaluate_symbol(sym, probe[np.isfinite(probe)]))
        if gp.size and (not np.all(np.isfinite(gp))
                        or np.max(np.abs(gp)) > PROBE_FACTOR * max(1.0, float(np.max(np.abs(g))))):
            return "symbol is unbounded in the strip around the contour"
    return None


def _term_growth(terms: np.ndarray, index: np.ndarray) -> bool:
    """Runs of at least GROWTH_RUN monotonically growing terms that dwarf the partial sum."""
    order = np.argsort(np.abs(index), kind="stable")
    for side in (1, -1):
        sel = order[(index[order] * side >= 0)]
        t = terms[sel]
        partial = np.cumsum(t, axis=0)
        mag = np.abs(t)
        big = mag[1:] > GROWTH_FACTOR * np.abs(partial[:-1])
        grows = mag[1:] > mag[:-1]
        flag = big & grows
        run = np.zeros(flag.shape[1:], dtype=int)
        for row in flag:
            run = np.where(row, run + 1, 0)
            if np.any(run >= GROWTH_RUN):
                return True
    return False


def scalar_terms(ns: NodeSet, sym, lam) -> tuple[np.ndarray, np.ndarray]:
    """Per-node symbol values ``g(z_j)`` and terms ``w_j g(z_j)/(lam - z_j)`` (terms have shape (J, len(lam)))."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if isinstance(ns.spec, BalakrishnanSpec):
        if not isinstance(sym, PowerSymbol) or abs(sym.beta - ns.spec.beta) > 1e-15:
            raise ValueError("the Balakrishnan scheme only represents z**-beta for its own beta")
        g = np.ones(ns.nodes.shape, dtype=complex)
    else:
        with np.errstate(all="ignore"):
            g = np.asarray(evaluate_symbol(sym, ns.nodes), dtype=complex)
    terms = (ns.weights * g)[:, None] / (lam[None, :] - ns.nodes[:, None])
    return g, terms


def _check_dropped(ns: NodeSet, sym, lam: np.ndarray, scale: np.ndarray) -> None:
    if not ns.overflowed:
        return
    if not isinstance(sym, PowerSymbol):
        raise NodeOverflowError(f"{ns.dropped.size} nodes overflowed for a non-power symbol")
    spec = ns.spec
    if isinstance(spec, DESpec):
        log_p, _, log_dp = psi_log_magnitude(spec.contour, ns.dropped)
        # |w g/(lam - z)| <= k |psi'| |psi|^-beta / (|psi| - lam) / 2pi
        log_term = math.log(spec.k / (2 * math.pi)) + log_dp - (1.0 + sym.beta) * log_p + math.log(2.0)
    elif isinstance(spec, SincSpec):
        u = np.abs(ns.dropped)
        log_term = math.log(spec.k / (2 * math.pi)) - sym.beta * (u + math.log(spec.contour.kappa / 2)) + math.log(2.0)
    else:
        y = ns.dropped
        log_term = np.log(spec.k) + (1.0 - spec.beta) * y - y
    if np.max(log_term) > math.log(DROP_RTOL) + float(np.log(np.min(scale) + 1e-300)):
        raise NodeOverflowError("dropped nodes may carry non-negligible terms")


def scalar_apply(spec_or_nodes, sym, lam, *, half: bool = False, check: bool = True):
    """Quadrature approximation of ``g(lam)``.

    ``lam`` may be a scalar or an array (one value per entry). With
    ``half=True`` only the terms with ``j >= 0`` are summed and the result
    is assembled as ``center + 2 Re(rest)``, which is exact for conjugate
    symmetric symbols and real ``lam``.

    Raises :class:`QuadratureDiverged` instead of returning NaN or inf.
    """
    ns = spec_or_nodes if isinstance(spec_or_nodes, NodeSet) else build_nodes(spec_or_nodes)
    scalar = np.ndim(lam) == 0
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
    g, terms = scalar_terms(ns, sym, lam_arr)
    if check:
        reason = None if isinstance(ns.spec, BalakrishnanSpec) else check_divergence(ns, sym, g)
        if reason is None and (not np.all(np.isfinite(terms)) or _term_growth(terms, ns.index)):
            reason = "quadrature terms grow without bound"
        if reason is not None:
            raise QuadratureDiverged(reason)
    if half:
        if not ns.conjugate_symmetric:
            raise ValueError("halving needs a conjugate-symmetric node set")
        center = terms[ns.index == 0]
        rest = pairwise_sum(terms[ns.index > 0])
        out = (pairwise_sum(center) + 2.0 * rest.real).astype(complex)
    else:
        out = pairwise_sum(terms)
    if check:
        _check_dropped(ns, sym, lam_arr, np.abs(out))
    return out[0] if scalar else out


def scalar_error(spec_or_nodes, sym, lam, exact, **kwargs):
    """``|scalar_apply(...) - exact|``."""
    return np.abs(scalar_apply(spec_or_nodes, sym, lam, **kwargs) - exact)


# ---------------------------------------------------------------------------
# predicted rates


def robust_rate(contour: ContourParams, beta: float, rho: float = 0.0, r: float = 0.0) -> float:
    """Predicted exponent ``p`` of the lambda-uniform bound ``exp(-p / sqrt(k))``."""
    if contour.sigma == 0.5:
        p = 2.0 * math.pi
    else:
        p = 2.0 * math.sqrt(2.0 * math.pi * math.atan(contour.theta))
    s = beta + rho - r
    if s <= 0:
        raise ValueError("beta + rho - r must be positive")
    return p * math.sqrt(s)


def fixed_lambda_rate(contour: ContourParams, lam: float) -> float:
    """Predicted exponent ``p`` of the fixed-lambda bound ``exp(-p / k)``."""
    if contour.sigma == 0.5:
        p = math.pi**2
    else:
        p = 2.0 * math.pi * math.atan(contour.theta)
    return p / math.log(lam / contour.kappa)
