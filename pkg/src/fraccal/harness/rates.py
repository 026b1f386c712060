"""Least-squares rate fits of log-errors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["RateFit", "fit_log_slope", "abscissa", "window_by_error", "log_correlation"]


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    residual: float  # root-mean-square misfit of ln(error)
    n_points: int


def abscissa(kind: str, n_q=None, k=None) -> np.ndarray:
    """``1/sqrt(k)``, ``1/k`` or ``sqrt(n_q)`` as a float array."""
    if kind == "inv_sqrt_k":
        return 1.0 / np.sqrt(np.asarray(k, dtype=float))
    if kind == "inv_k":
        return 1.0 / np.asarray(k, dtype=float)
    if kind == "sqrt_nq":
        return np.sqrt(np.asarray(n_q, dtype=float))
    raise ValueError(f"unknown abscissa {kind!r}")


def window_by_error(errors, lo: float, hi: float) -> np.ndarray:
    """Boolean mask of finite errors inside ``[lo, hi]``."""
    e = np.asarray(errors, dtype=float)
    return np.isfinite(e) & (e >= lo) & (e <= hi)


def fit_log_slope(x, errors, mask=None) -> RateFit:
    """Fit ``ln(error) = intercept + slope * x`` over ``mask`` (default: positive finite errors)."""
    x = np.asarray(x, dtype=float)
    e = np.asarray(errors, dtype=float)
    m = np.isfinite(e) & (e > 0)
    if mask is not None:
        m &= np.asarray(mask, dtype=bool)
    if np.count_nonzero(m) < 2:
        raise ValueError("need at least two points to fit a rate")
    y = np.log(e[m])
    slope, intercept = np.polyfit(x[m], y, 1)
    resid = float(np.sqrt(np.mean((intercept + slope * x[m] - y) ** 2)))
    return RateFit(float(slope), float(intercept), resid, int(np.count_nonzero(m)))


def log_correlation(x, errors, mask=None) -> float:
    """Pearson correlation between ``x`` and ``ln(error)``."""
    x = np.asarray(x, dtype=float)
    e = np.asarray(errors, dtype=float)
    m = np.isfinite(e) & (e > 0)
    if mask is not None:
        m &= np.asarray(mask, dtype=bool)
    return float(np.corrcoef(x[m], np.log(e[m]))[0, 1])
