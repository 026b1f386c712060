"""Operator-valued quadrature through a resolvent interface.

A :class:`ResolventProvider` only has to apply ``(L - z)^{-1}``; the
spectral backend does so exactly in an eigenbasis and also serves as the
reference for ``g(L)`` and for the spectral Sobolev norms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Protocol, runtime_checkable

import numpy as np

from .parallel import ordered_map
from .quadrature import (
    BalakrishnanSpec,
    NodeSet,
    QuadratureDiverged,
    build_nodes,
    check_divergence,
    pairwise_sum,
)
from .special import PowerSymbol, evaluate_symbol

__all__ = [
    "SpectralOperator",
    "ResolventProvider",
    "SpectralResolvent",
    "SolveError",
    "apply_nodes",
    "apply_function",
    "exact_apply_spectral",
    "h_norm",
]


class SolveError(RuntimeError):
    """A resolvent solve failed; ``index`` is the offending node index."""

    def __init__(self, index: int, cause: BaseException):
        super().__init__(f"resolvent solve failed at node j={index}: {cause}")
        self.index = index


@dataclass(frozen=True)
class SpectralOperator:
    """A positive self-adjoint operator given by its eigenvalues.

    Vectors are stored as eigen-coefficients. ``to_coefficients`` and
    ``from_coefficients`` convert to and from a physical representation;
    both default to the identity.
    """

    eigenvalues: np.ndarray
    to_coefficients: Callable[[np.ndarray], np.ndarray] | None = None
    from_coefficients: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self) -> None:
        ev = np.array(self.eigenvalues, dtype=float).ravel()
        if ev.size == 0 or not np.all(ev > 0):
            raise ValueError("eigenvalues must be positive")
        if np.any(np.diff(ev) < 0):
            raise ValueError("eigenvalues must be sorted ascending")
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def size(self) -> int:
        return int(self.eigenvalues.size)

    def coefficients(self, u: np.ndarray) -> np.ndarray:
        return u if self.to_coefficients is None else self.to_coefficients(u)

    def physical(self, c: np.ndarray) -> np.ndarray:
        return c if self.from_coefficients is None else self.from_coefficients(c)


@runtime_checkable
class ResolventProvider(Protocol):
    """Applies ``(L - z)^{-1}`` to coefficient vectors."""

    lambda_min: float
    thread_safe: bool

    def solve(self, z: complex, rhs: np.ndarray) -> np.ndarray: ...


class SpectralResolvent:
    """Exact resolvent of a :class:`SpectralOperator`: ``u_j / (lambda_j - z)``."""

    thread_safe = True

    def __init__(self, op: SpectralOperator):
        self.op = op
        self.lambda_min = op.lambda_min

    def solve(self, z: complex, rhs: np.ndarray) -> np.ndarray:
        return np.asarray(rhs) / (self.op.eigenvalues - z)

    def solve_batch(self, zs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        """Row ``j`` holds the solve for ``zs[j]``."""
        return np.asarray(rhs)[None, :] / (self.op.eigenvalues[None, :] - np.asarray(zs)[:, None])


def _solutions(provider, zs: np.ndarray, idx: np.ndarray, u: np.ndarray) -> np.ndarray:
    batch = getattr(provider, "solve_batch", None)
    if batch is not None:
        return batch(zs, u)

    def one(pair):
        j, z = pair
        try:
            return np.asarray(provider.solve(complex(z), u), dtype=complex)
        except Exception as exc:  # noqa: BLE001 - rewrapped with the node index
            raise SolveError(int(j), exc) from exc

    workers = None if getattr(provider, "thread_safe", False) else 1
    return np.stack(ordered_map(one, list(zip(idx, zs)), workers=workers))


def apply_nodes(provider, ns: NodeSet, scalars: np.ndarray, u: np.ndarray, *, half: bool | None = None) -> np.ndarray:
    """``sum_j scalars_j (L - z_j)^{-1} u`` for the nodes of ``ns``.

    With ``half`` (default: whenever the node set is conjugate symmetric
    and ``u`` is real) only the nodes with ``j >= 0`` are solved, assuming
    ``scalars[-j] == conj(scalars[j])``; the result is then real.
    """
    u = np.asarray(u)
    scalars = np.asarray(scalars, dtype=complex)
    if half is None:
        half = ns.conjugate_symmetric and not np.iscomplexobj(u)
    if half:
        if not ns.conjugate_symmetric:
            raise ValueError("halving needs a conjugate-symmetric node set")
        sel = ns.index >= 0
        x = _solutions(provider, ns.nodes[sel], ns.index[sel], u) * scalars[sel][:, None]
        center = x[0]
        rest = pairwise_sum(x[1:])
        return center.real + 2.0 * rest.real
    x = _solutions(provider, ns.nodes, ns.index, u) * scalars[:, None]
    return pairwise_sum(x)


def apply_function(provider, spec_or_nodes, sym, u: np.ndarray, *, half: bool | None = None,
                   check: bool = True) -> np.ndarray:
    """Quadrature approximation of ``g(L) u``.

    Raises :class:`QuadratureDiverged` for divergent symbol/contour pairs.
    """
    ns = spec_or_nodes if isinstance(spec_or_nodes, NodeSet) else build_nodes(spec_or_nodes)
    if not isinstance(ns.spec, BalakrishnanSpec) and not ns.spec.contour.kappa < provider.lambda_min:
        raise ValueError("the contour offset kappa must lie below the spectrum")
    if isinstance(ns.spec, BalakrishnanSpec):
        if not isinstance(sym, PowerSymbol) or abs(sym.beta - ns.spec.beta) > 1e-15:
            raise ValueError("the Balakrishnan scheme only represents L**-beta for its own beta")
        g = np.ones(ns.nodes.shape, dtype=complex)
    else:
        with np.errstate(all="ignore"):
            g = np.asarray(evaluate_symbol(sym, ns.nodes), dtype=complex)
        if check:
            reason = check_divergence(ns, sym, g)
            if reason is not None:
                raise QuadratureDiverged(reason)
    return apply_nodes(provider, ns, ns.weights * g, u, half=half)


def exact_apply_spectral(op: SpectralOperator, sym, u: np.ndarray) -> np.ndarray:
    """``g(L) u`` computed mode by mode: coefficients ``g(lambda_j) u_j``."""
    g = np.asarray(evaluate_symbol(sym, op.eigenvalues.astype(complex)))
    if np.all(g.imag == 0) or np.max(np.abs(g.imag)) <= 1e-14 * np.max(np.abs(g)):
        g = g.real
    return g * np.asarray(u)


def h_norm(op: SpectralOperator, u: np.ndarray, two_r: float) -> float:
    """``sqrt(sum_j lambda_j**two_r |u_j|**2)``."""
    if two_r < 0:
        raise ValueError("two_r must be nonnegative")
    u = np.asarray(u)
    return float(np.sqrt(np.sum(op.eigenvalues**two_r * np.abs(u) ** 2)))
