"""Acceptance criteria 1-10.

Each test records ``(passed, detail)`` for its criterion before asserting,
and the terminal summary prints one PASS/FAIL line per criterion.
"""

import math
import time

import numpy as np
import pytest

from fraccal.contour import ContourParams, locate_pole_preimages, psi, psi_log_magnitude
from fraccal.harness.cli import main
from fraccal.harness.config import load_preset, preset_names
from fraccal.harness.experiments import run_experiment
from fraccal.harness.rates import fit_log_slope, log_correlation, window_by_error
from fraccal.operator import SpectralOperator, SpectralResolvent, apply_function
from fraccal.quadrature import make_scheme, scalar_apply
from fraccal.special import (
    MittagLefflerParams,
    MittagLefflerSymbol,
    PowerSymbol,
    ProfileKind,
    TimeProfile,
    complex_power,
    mittag_leffler,
    ml_convolution_weight,
)

pytestmark = pytest.mark.slow


def record(criteria, n, checks, elapsed, budget=None):
    """Store the verdict for criterion ``n``; ``checks`` maps label -> (ok, text)."""
    if budget is not None:
        checks["runtime"] = (elapsed < budget, f"{elapsed:.1f}s < {budget:g}s")
    ok = all(c[0] for c in checks.values())
    failed = [k for k, c in checks.items() if not c[0]]
    detail = "; ".join(f"{k}: {t}" for k, (_, t) in checks.items())
    if failed:
        detail += f"  [failed: {', '.join(failed)}]"
    criteria[n] = (ok, detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok, failed


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


@pytest.fixture(scope="module")
def runs():
    """Preset runs shared by the criteria, with wall times."""
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = timed(lambda: run_experiment(load_preset(name)))
        return cache[name]

    return get


def test_criterion_01_mittag_leffler_identities(criteria):
    t0 = time.perf_counter()
    checks = {}

    r = np.linspace(1.5, 30.0, 20)
    z = []
    for rad in r:
        a0 = math.acos(min(1.0, 5.0 / rad))
        z.extend(rad * np.exp(1j * np.linspace(a0, 2 * math.pi - a0, 20)))
    z = np.array(z)
    e11 = mittag_leffler(MittagLefflerParams(1, 1), z)
    dev = float(np.max(np.abs(e11 - np.exp(z)) / np.abs(np.exp(z))))
    checks["e11 vs exp"] = (z.size == 400 and np.all(z.real <= 5 + 1e-12) and dev <= 1e-12,
                            f"max rel {dev:.1e} over {z.size} pts")

    x = np.linspace(0, 6, 241)
    e21 = mittag_leffler(MittagLefflerParams(2, 1), -(x**2) + 0j)
    dev2 = float(np.max(np.abs(e21 - np.cos(x))))
    checks["e21 vs cos"] = (dev2 <= 1e-10, f"max abs {dev2:.1e}")

    h, worst = 1e-5, 0.0
    for alpha, lam, z0 in [(0.5, -1.0, 0.7), (0.7, -2.0, 1.3 + 0.4j), (0.9, 0.5, 2.0), (0.3, -4.0, 0.4 - 0.2j)]:
        p1 = MittagLefflerParams(alpha, alpha + 1)
        F = lambda s: complex_power(s, alpha) * mittag_leffler(p1, lam * complex_power(s, alpha))  # noqa: E731
        fd = (F(z0 + h) - F(z0 - h)) / (2 * h)
        ex = complex_power(z0, alpha - 1) * mittag_leffler(MittagLefflerParams(alpha, alpha), lam * complex_power(z0, alpha))
        worst = max(worst, abs(fd - ex) / abs(ex))
    checks["derivative identity"] = (worst <= 1e-6, f"max rel {worst:.1e}")

    ok, failed = record(criteria, 1, checks, time.perf_counter() - t0, 5)
    assert ok, failed


def test_criterion_02_contour(criteria):
    t0 = time.perf_counter()
    checks = {}
    shapes = [ContourParams(s, th, 3.0) for s in (0.5, 1.0) for th in (1.0, 4.0)]

    y = np.linspace(-4, 4, 801)
    sym = max(float(np.max(np.abs(psi(p, -y) - np.conj(psi(p, y))) / np.abs(psi(p, y)))) for p in shapes)
    origin = all(psi(p, 0.0) == p.kappa for p in shapes)
    checks["symmetry, psi(0)"] = (sym <= 1e-15 and origin, f"max rel {sym:.1e}, psi(0)=kappa {origin}")

    yy = np.linspace(1.0, 3.5, 60)
    slopes = {f"({p.sigma:g},{p.theta:g})": np.polyfit(yy, np.log(psi_log_magnitude(p, yy)[0]), 1)[0] for p in shapes}
    checks["growth slope"] = (all(abs(s - 1) <= 0.05 for s in slopes.values()),
                              " ".join(f"{k}={v:.3f}" for k, v in slopes.items()))

    worst, counts = 0.0, 0
    for p in shapes:
        for lam in (1e2, 1e4, 1e8):
            for q in locate_pole_preimages(p, lam, 4.0):
                worst = max(worst, abs(psi(p, q.y) - lam) / lam)
                counts += 1
    checks["pole residuals"] = (counts > 0 and worst <= 1e-10, f"max {worst:.1e} over {counts} preimages")

    lam = 1e8
    d = min(abs(q.y.imag) for q in locate_pole_preimages(ContourParams(1, 4, 3), lam, 4.0))
    scaled = d * math.log(lam / 3)
    checks["asymptotic distance"] = (abs(scaled / math.atan(4) - 1) <= 0.10, f"{scaled:.4f} vs {math.atan(4):.4f}")

    ok, failed = record(criteria, 2, checks, time.perf_counter() - t0, 5)
    assert ok, failed


def test_criterion_03_scalar_power(criteria, runs):
    res, elapsed = runs("scalar_pow06")
    checks = {}
    n, k, de1 = res.series("DE1")
    _, _, sinc = res.series("sinc")
    at120 = float(de1[n == 120][0])
    checks["DE1 at N=120"] = (at120 <= 1e-10, f"{at120:.1e}")

    m = window_by_error(de1, 1e-10, 1e-3)
    fit = fit_log_slope(1 / np.sqrt(k), de1, m)
    target = -2 * math.pi * math.sqrt(0.6)
    checks["DE1 slope"] = (abs(fit.slope / target - 1) <= 0.25,
                           f"{fit.slope:.2f} vs {target:.2f} ({fit.n_points} pts, rms {fit.residual:.2f})")

    sel = n >= 40
    bad = n[sel][~(de1[sel] < sinc[sel])]
    checks["DE1 < sinc for N>=40"] = (bad.size == 0, f"violations at {bad.tolist()}")

    ok, failed = record(criteria, 3, checks, elapsed, 30)
    assert ok, failed


def test_criterion_04_divergence(criteria, runs):
    res, elapsed = runs("scalar_ml11")
    checks = {}
    rows = [r for r in res.rows if r.scheme == "DE1" and r.n_q >= 20]
    checks["DE1 diverged"] = (bool(rows) and all(r.diverged for r in rows), f"{sum(r.diverged for r in rows)}/{len(rows)}")
    nan_free = all(r.value is None or np.isfinite(r.value) for r in res.rows)
    checks["no NaN"] = (nan_free, str(nan_free))
    vals = {}
    for s in ("DE2", "DE3", "sinc"):
        n, _, v = res.series(s)
        vals[s] = float(v[n == 100][0])
    checks["others at N=100"] = (all(v <= 1e-6 for v in vals.values()),
                                 " ".join(f"{s}={v:.1e}" for s, v in vals.items()))
    ok, failed = record(criteria, 4, checks, elapsed, 30)
    assert ok, failed


def test_criterion_05_lambda_dependence(criteria, runs):
    res, elapsed = runs("lambda_dependence")
    checks = {}
    lams = res.metadata["lambdas"]
    assert lams == [1e3, 1e5, 1e7, 1e9]

    def rates(scheme, kind):
        out = []
        for lam in lams:
            n, k, v = res.series(scheme, lam)
            x = 1 / k if kind == "inv_k" else np.sqrt(n)
            out.append(fit_log_slope(x, v, window_by_error(v, 1e-13, 1e-1)).slope)
        return np.array(out)

    de3 = -rates("DE3", "inv_k") * np.log(np.array(lams) / 3)
    spread = de3.max() / de3.min()
    checks["DE3 rate*ln(lam/3)"] = (spread <= 1.3, f"{np.round(de3, 2).tolist()} spread {spread:.3f}")

    sinc = -rates("sinc", "sqrt_nq")
    spread_s = sinc.max() / sinc.min()
    checks["sinc rates"] = (spread_s <= 1.3, f"{np.round(sinc, 3).tolist()} spread {spread_s:.3f}")

    ok, failed = record(criteria, 5, checks, elapsed, 60)
    assert ok, failed


def test_criterion_06_operator_diagonalisation(criteria):
    t0 = time.perf_counter()
    checks = {}
    i, j = np.meshgrid(np.arange(1, 17), np.arange(1, 17))
    op = SpectralOperator(np.sort(math.pi**2 * (i**2 + j**2).ravel().astype(float)))
    assert op.size == 256
    u = np.random.default_rng(7).standard_normal(256)
    provider = SpectralResolvent(op)
    worst_diag, worst_half = 0.0, 0.0
    for name, sym in [("DE1", PowerSymbol(0.4)), ("DE2", PowerSymbol(0.7)), ("sinc", PowerSymbol(0.4)),
                      ("DE3", MittagLefflerSymbol(MittagLefflerParams(2**-0.5, 1.0), 0.1, 0.7))]:
        s = make_scheme(name, 60, beta=sym.beta)
        full = apply_function(provider, s, sym, u, half=False)
        modewise = scalar_apply(s, sym, op.eigenvalues) * u
        worst_diag = max(worst_diag, np.linalg.norm(full - modewise) / np.linalg.norm(modewise))
        if isinstance(sym, PowerSymbol):
            half = apply_function(provider, s, sym, u, half=True)
            worst_half = max(worst_half, np.linalg.norm(half - full) / np.linalg.norm(full))
    checks["diagonalisation"] = (worst_diag <= 1e-14, f"max rel {worst_diag:.1e}")
    checks["halving"] = (worst_half <= 1e-15, f"max rel {worst_half:.1e}")
    ok, failed = record(criteria, 6, checks, time.perf_counter() - t0, 5)
    assert ok, failed


def test_criterion_07_elliptic(criteria, runs):
    res, elapsed = runs("elliptic_2d")
    checks = {}
    n, k, de1 = res.series("DE1")
    _, _, de2 = res.series("DE2")
    _, _, sinc = res.series("sinc")
    _, _, bal = res.series("balakrishnan")
    sel = (n >= 30) & (n <= 120)
    worst_other = np.minimum(sinc, bal)[sel]
    bad = n[sel][~((de1[sel] < worst_other) & (de2[sel] < worst_other))]
    checks["DE1, DE2 below sinc, Balakrishnan"] = (bad.size == 0, f"violations at N={bad.tolist()}")
    at120 = float(de1[n == 120][0])
    checks["DE1 at N=120"] = (at120 <= 1e-9, f"{at120:.1e}")
    slopes = {}
    for s, v in (("DE1", de1), ("DE2", de2)):
        slopes[s] = -fit_log_slope(1 / np.sqrt(k), v, window_by_error(v, 1e-13, 1e-3)).slope
    checks["slopes in [3.7, 6.5]"] = (all(3.7 <= v <= 6.5 for v in slopes.values()),
                                      " ".join(f"{s}={v:.2f}" for s, v in slopes.items()))
    ok, failed = record(criteria, 7, checks, elapsed, 60)
    assert ok, failed


def test_criterion_08_parabolic(criteria, runs):
    inc, t1 = runs("parabolic_incompatible")
    com, t2 = runs("parabolic_compatible")
    checks = {}
    corr = {}
    for s in inc.config.schemes:
        n, _, v = inc.series(s)
        sel = (n >= 20) & (n <= 120)
        corr[s] = log_correlation(np.sqrt(n[sel]), v[sel])
    checks["(a) correlation"] = (all(c <= -0.98 for c in corr.values()),
                                 " ".join(f"{s}={c:.4f}" for s, c in corr.items()))

    n, k, de2 = inc.series("DE2")
    fit = fit_log_slope(1 / np.sqrt(k), de2, window_by_error(de2, 1e-13, 1e-6))
    checks["(a) DE2 slope"] = (abs(fit.slope / -5.62 - 1) <= 0.25, f"{fit.slope:.2f} vs -5.62 ({fit.n_points} pts)")

    bad = []
    for s in inc.config.schemes:
        n1, _, v1 = inc.series(s)
        n2, _, v2 = com.series(s)
        assert np.array_equal(n1, n2)
        sel = n1 >= 20
        bad.extend(f"{s}@{m}" for m in n1[sel][~(v2[sel] <= v1[sel])])
    checks["(b) compatible <= incompatible"] = (not bad, f"{len(bad)} violations" + (f", first {bad[:4]}" if bad else ""))

    n, _, v = com.series("DE1")
    at100 = float(np.nanmin(v[n <= 100]))
    checks["(b) DE1 by N=100"] = (at100 <= 1e-9, f"{at100:.1e}")

    ok, failed = record(criteria, 8, checks, t1 + t2, 120)
    assert ok, failed


def test_criterion_09_convolution_closed_form(criteria):
    t0 = time.perf_counter()
    worst = 0.0
    prof = TimeProfile(ProfileKind.SIN)
    for s in (2.0, 2 * math.pi**2, 1e4):
        for t in (0.1, 1.0):
            c = complex(ml_convolution_weight(1.0, s, t, prof))
            exact = (s * math.sin(t) - math.cos(t) + math.exp(-s * t)) / (1 + s * s)
            worst = max(worst, abs(c - exact) / abs(exact))
    ok, failed = record(criteria, 9, {"closed form": (worst <= 1e-10, f"max rel {worst:.1e}")},
                        time.perf_counter() - t0, 1)
    assert ok, failed


def test_criterion_10_determinism(criteria, tmp_path, monkeypatch):
    t0 = time.perf_counter()
    mismatched = []
    for name in preset_names():
        blobs = []
        for threads in ("1", "8"):
            monkeypatch.setenv("FRACCAL_THREADS", threads)
            out = tmp_path / threads / f"{name}.csv"
            assert main(["run", "--preset", name, "--nq-max", "30", "--output", str(out), "--no-figure"]) == 0
            blobs.append(out.read_bytes())
        if blobs[0] != blobs[1]:
            mismatched.append(name)
    ok, failed = record(criteria, 10, {"byte-identical CSVs": (not mismatched, f"{len(preset_names())} presets, "
                                                                                 f"mismatched {mismatched}")},
                        time.perf_counter() - t0)
    assert ok, failed
