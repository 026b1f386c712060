"""Experiment runners producing error tables.

Work items (scheme, N_q) are independent and run on the thread pool from
:mod:`fraccal.parallel`; rows are assembled in input order afterwards, so
tables do not depend on the worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..contour import ContourParams, locate_pole_preimages
from ..models import (
    GaussianBump,
    ParabolicProblem,
    bump_coefficients,
    constant_coefficients,
    elliptic_solve,
    l2_error,
    parabolic_solve,
    reference_solution,
    unit_square_laplacian,
)
from ..parallel import ordered_map
from ..quadrature import (
    PRESET_CONTOURS,
    SINC_CONTOUR,
    QuadratureDiverged,
    make_scheme,
    robust_rate,
    scalar_apply,
)
from ..special import (
    MittagLefflerParams,
    MittagLefflerSymbol,
    PowerSymbol,
    ProfileKind,
    TimeProfile,
    mittag_leffler,
)
from .config import Experiment, ExperimentConfig

__all__ = [
    "Row",
    "ExperimentResult",
    "LambdaSamples",
    "lambda_samples",
    "scheme_for",
    "run_scalar_experiment",
    "run_lambda_sweep",
    "run_pde_experiment",
    "run_pole_map",
    "run_experiment",
    "DEFAULT_SWEEP_LAMBDAS",
    "DEFAULT_POLE_LAMBDAS",
]

LAMBDA_CLAMP = 1e300
DEFAULT_SWEEP_LAMBDAS = (1e3, 1e5, 1e7, 1e9)
DEFAULT_POLE_LAMBDAS = (1e2, 1e4, 1e6, 1e8)
POLE_IM_BOUND = 4.0


@dataclass(frozen=True)
class Row:
    """One table entry; ``value is None`` marks a diverged run."""

    scheme: str
    n_q: int
    k: float
    param: float
    value: float | None

    @property
    def diverged(self) -> bool:
        return self.value is None


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list[Row]
    metadata: dict = field(default_factory=dict)

    def series(self, scheme: str, param: float | None = None):
        """``(n_q, k, value)`` arrays for one scheme; diverged entries become NaN."""
        sel = [r for r in self.rows if r.scheme == scheme and (param is None or r.param == param)]
        n = np.array([r.n_q for r in sel], dtype=int)
        k = np.array([r.k for r in sel], dtype=float)
        v = np.array([np.nan if r.value is None else r.value for r in sel], dtype=float)
        return n, k, v


@dataclass(frozen=True)
class LambdaSamples:
    values: np.ndarray
    clamped: int


def lambda_samples(beta: float, n_q_max: int) -> LambdaSamples:
    """Union over ``N_q = 2..n_q_max`` of ``5 + exp(2 sqrt(beta/k))`` and ``5 + exp(beta/k)``.

    Values above ``1e300`` (or overflowing) are removed and counted.
    """
    if n_q_max < 2:
        raise ValueError("n_q_max must be at least 2")
    n = np.arange(2, n_q_max + 1)
    k = 0.9 * np.log(n) / n
    with np.errstate(over="ignore"):
        cand = np.concatenate([5.0 + np.exp(2.0 * np.sqrt(beta / k)), 5.0 + np.exp(beta / k)])
    keep = np.isfinite(cand) & (cand <= LAMBDA_CLAMP)
    vals = np.unique(cand[keep])
    vals.setflags(write=False)
    return LambdaSamples(vals, int(np.count_nonzero(~keep)))


def scheme_for(name: str, n_q: int, cfg: ExperimentConfig):
    """Scheme spec for ``name``; the custom ``DE`` family takes ``sigma``/``theta`` from the config."""
    contour = ContourParams(cfg.sigma, cfg.theta, cfg.kappa) if name == "DE" else None
    return make_scheme(name, n_q, beta=cfg.beta, kappa=cfg.kappa, contour=contour)


def _contour_of(name: str, cfg: ExperimentConfig) -> ContourParams | None:
    if name == "DE":
        return ContourParams(cfg.sigma, cfg.theta, cfg.kappa)
    if name in PRESET_CONTOURS:
        c = PRESET_CONTOURS[name]
        return ContourParams(c.sigma, c.theta, cfg.kappa)
    if name == "sinc":
        return ContourParams(SINC_CONTOUR.sigma, SINC_CONTOUR.theta, cfg.kappa)
    return None


def predicted_rates(cfg: ExperimentConfig) -> dict:
    """Exponents ``p`` of ``exp(-p/sqrt(k))`` from the rate law, per DE scheme."""
    out = {}
    for name in cfg.schemes:
        c = _contour_of(name, cfg)
        if c is None or name == "sinc":
            continue
        try:
            out[name] = robust_rate(c, cfg.beta, cfg.rho, cfg.r)
        except ValueError:
            continue
    return out


def _items(cfg: ExperimentConfig, schemes=None):
    return [(s, n) for s in (schemes or cfg.schemes) for n in cfg.n_q]


def _scalar_symbol(cfg: ExperimentConfig):
    if cfg.experiment is Experiment.SCALAR_ML:
        return MittagLefflerSymbol(MittagLefflerParams(cfg.alpha, 1.0), cfg.t, cfg.beta)
    return PowerSymbol(cfg.beta)


def _scalar_exact(cfg: ExperimentConfig, lam: np.ndarray) -> np.ndarray:
    if cfg.experiment is Experiment.SCALAR_ML:
        z = -(cfg.t**cfg.alpha) * lam**cfg.beta
        return np.asarray(mittag_leffler(MittagLefflerParams(cfg.alpha, 1.0), z.astype(complex))).real
    return lam ** (-cfg.beta)


def run_scalar_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Max-over-lambda absolute error of the scalar quadrature per scheme and ``N_q``."""
    if cfg.lambdas:
        lam = np.array(sorted(set(cfg.lambdas)), dtype=float)
        clamped = 0
    else:
        ls = lambda_samples(cfg.beta, cfg.lambda_samples_nq_max or cfg.n_q_max)
        lam, clamped = ls.values, ls.clamped
    sym = _scalar_symbol(cfg)
    exact = _scalar_exact(cfg, lam)

    def work(item):
        name, n = item
        spec = scheme_for(name, n, cfg)
        try:
            approx = scalar_apply(spec, sym, lam)
        except QuadratureDiverged:
            return Row(name, n, float(spec.k), cfg.beta, None)
        return Row(name, n, float(spec.k), cfg.beta, float(np.max(np.abs(approx - exact))))

    rows = ordered_map(work, _items(cfg))
    meta = {
        "lambda_count": int(lam.size),
        "lambda_clamped": clamped,
        "lambda_min": float(lam[0]),
        "lambda_max": float(lam[-1]),
        "predicted_rates": predicted_rates(cfg),
    }
    return ExperimentResult(cfg, rows, meta)


def run_lambda_sweep(cfg: ExperimentConfig) -> ExperimentResult:
    """Relative error of ``lambda**-beta`` at fixed ``lambda`` values."""
    lam = np.array(cfg.lambdas or DEFAULT_SWEEP_LAMBDAS, dtype=float)
    sym = PowerSymbol(cfg.beta)
    exact = lam ** (-cfg.beta)

    def work(item):
        name, n = item
        spec = scheme_for(name, n, cfg)
        try:
            rel = np.abs(scalar_apply(spec, sym, lam) - exact) / exact
        except QuadratureDiverged:
            return [Row(name, n, float(spec.k), float(x), None) for x in lam]
        return [Row(name, n, float(spec.k), float(x), float(e)) for x, e in zip(lam, rel)]

    # rows grouped by scheme, then lambda, then N_q
    chunks = ordered_map(work, _items(cfg))
    rows = []
    for s in cfg.schemes:
        mine = [c for (name, _), c in zip(_items(cfg), chunks) if name == s]
        for i in range(lam.size):
            rows.extend(c[i] for c in mine)
    return ExperimentResult(cfg, rows, {"lambdas": [float(x) for x in lam]})


def run_pde_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """L2 error against a high-accuracy reference on the unit square."""
    op = unit_square_laplacian(cfg.mode_cutoff)
    if cfg.experiment is Experiment.ELLIPTIC_2D:
        f = constant_coefficients(op)
        ref, ref_meta = reference_solution(op, cfg.beta, cfg.n_q_max, f_coeffs=f)
        param = cfg.beta

        def solve(spec):
            return elliptic_solve(op, spec, cfg.beta, f)

        data_norm = float(np.linalg.norm(f))
    elif cfg.experiment is Experiment.PARABOLIC_2D:
        u0 = bump_coefficients(op, GaussianBump(cfg.omega))
        problem = ParabolicProblem(cfg.alpha, cfg.beta, cfg.t, u0, None, TimeProfile(ProfileKind.SIN))
        ref, ref_meta = reference_solution(op, problem, cfg.n_q_max, t=cfg.t)
        param = cfg.omega

        def solve(spec):
            return parabolic_solve(op, spec, problem, cfg.t)

        data_norm = float(np.linalg.norm(u0))
    else:
        raise ValueError(f"{cfg.experiment.value} is not a PDE experiment")

    def work(item):
        name, n = item
        spec = scheme_for(name, n, cfg)
        try:
            return Row(name, n, float(spec.k), param, l2_error(solve(spec), ref))
        except QuadratureDiverged:
            return Row(name, n, float(spec.k), param, None)

    rows = ordered_map(work, _items(cfg))
    meta = {
        "quoted_rates": cfg.extra.get("quoted_rates", ""),
        "reference": ref_meta,
        "reference_norm": float(np.linalg.norm(ref)),
        "data_norm": data_norm,
        "modes": op.size,
        "predicted_rates": predicted_rates(cfg),
    }
    return ExperimentResult(cfg, rows, meta)


def run_pole_map(cfg: ExperimentConfig) -> ExperimentResult:
    """Distance of the nearest pole preimage to the real axis.

    Rows carry ``param = lambda`` and ``value = min |Im y|``; ``n_q`` and
    ``k`` are zero. The metadata also lists ``min |Im y| * ln(lambda/kappa)``
    and, for sigma = 1, its limit ``atan(theta)``.
    """
    lam = cfg.lambdas or DEFAULT_POLE_LAMBDAS
    names = [s for s in cfg.schemes if _contour_of(s, cfg) is not None and s != "sinc"]

    def work(item):
        name, x = item
        c = _contour_of(name, cfg)
        pts = locate_pole_preimages(c, x, POLE_IM_BOUND)
        d = min(abs(p.y.imag) for p in pts) if pts else None
        return Row(name, 0, 0.0, float(x), d)

    rows = ordered_map(work, [(s, x) for s in names for x in lam])
    scaled = {}
    for r in rows:
        if r.value is not None:
            c = _contour_of(r.scheme, cfg)
            scaled.setdefault(r.scheme, []).append(r.value * math.log(r.param / c.kappa))
    # known limit only for sigma = 1: atan(theta)
    limits = {s: math.atan(_contour_of(s, cfg).theta) for s in names if _contour_of(s, cfg).sigma == 1.0}
    return ExperimentResult(cfg, rows, {"scaled_distance": scaled, "scaled_limit": limits})


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Dispatch on ``cfg.experiment``."""
    e = cfg.experiment
    if e in (Experiment.SCALAR_POWER, Experiment.SCALAR_ML):
        return run_scalar_experiment(cfg)
    if e is Experiment.LAMBDA_SWEEP:
        return run_lambda_sweep(cfg)
    if e in (Experiment.ELLIPTIC_2D, Experiment.PARABOLIC_2D):
        return run_pde_experiment(cfg)
    if e is Experiment.POLE_MAP:
        return run_pole_map(cfg)
    raise ValueError(f"unsupported experiment {e!r}")
