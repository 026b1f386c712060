import math

import numpy as np
import pytest

from fraccal.models import unit_square_laplacian
from fraccal.operator import (
    SolveError,
    SpectralOperator,
    SpectralResolvent,
    apply_function,
    exact_apply_spectral,
    h_norm,
)
from fraccal.quadrature import make_scheme, scalar_apply
from fraccal.special import MittagLefflerParams, MittagLefflerSymbol, PowerSymbol


def grid_operator(m):
    """``pi^2 (i^2 + j^2)`` for ``1 <= i, j <= m``, as a bare spectral operator."""
    i, j = np.meshgrid(np.arange(1, m + 1), np.arange(1, m + 1))
    return SpectralOperator(np.sort(math.pi**2 * (i**2 + j**2).ravel().astype(float)))


@pytest.fixture
def op16():
    return grid_operator(4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def test_single_eigenvector(op16):
    s = make_scheme("DE2", 30)
    sym = PowerSymbol(0.6)
    for j in (0, 5, 15):
        u = np.zeros(16)
        u[j] = 1.0
        out = apply_function(SpectralResolvent(op16), s, sym, u)
        assert out[j] == pytest.approx(scalar_apply(s, sym, op16.eigenvalues[j]).real, rel=1e-14)
        assert np.all(out[np.arange(16) != j] == 0)


def test_converges_to_power(op16, rng):
    u = rng.standard_normal(16)
    out = apply_function(SpectralResolvent(op16), make_scheme("DE3", 120), PowerSymbol(0.5), u)
    np.testing.assert_allclose(out, op16.eigenvalues**-0.5 * u, rtol=1e-10)


def test_error_bound_16_modes(op16, rng):
    u = rng.standard_normal(16)
    s = make_scheme("DE1", 50)
    sym = PowerSymbol(0.6)
    per_mode = np.abs(scalar_apply(s, sym, op16.eigenvalues) - op16.eigenvalues**-0.6)
    err = np.linalg.norm(apply_function(SpectralResolvent(op16), s, sym, u) - exact_apply_spectral(op16, sym, u))
    assert err <= per_mode.max() * np.linalg.norm(u)


@pytest.mark.parametrize("m", [4, 16])
@pytest.mark.parametrize("name", ["DE1", "DE3", "sinc"])
def test_diagonalisation(m, name, rng):
    op = grid_operator(m)
    u = rng.standard_normal(op.size)
    s = make_scheme(name, 40, beta=0.4)
    sym = PowerSymbol(0.4)
    out = apply_function(SpectralResolvent(op), s, sym, u)
    modewise = scalar_apply(s, sym, op.eigenvalues).real * u
    assert np.linalg.norm(out - modewise) <= 1e-14 * np.linalg.norm(modewise)


@pytest.mark.parametrize("name", ["DE1", "DE2", "DE3", "sinc"])
def test_halving(op16, rng, name):
    u = rng.standard_normal(16)
    s = make_scheme(name, 40, beta=0.7)
    p = SpectralResolvent(op16)
    half = apply_function(p, s, PowerSymbol(0.7), u, half=True)
    full = apply_function(p, s, PowerSymbol(0.7), u, half=False)
    assert np.linalg.norm(half - full.real) <= 1e-15 * np.linalg.norm(full) * math.sqrt(16)
    assert np.max(np.abs(full.imag)) <= 1e-15 * np.linalg.norm(full)


def test_error_transfer(op16, rng):
    s = make_scheme("DE2", 25)
    sym = MittagLefflerSymbol(MittagLefflerParams(0.7, 1.0), 0.1, 0.7)
    lam = op16.eigenvalues
    per_mode = np.abs(scalar_apply(s, sym, lam) - exact_apply_spectral(op16, sym, np.ones(16)))
    for _ in range(5):
        u = rng.standard_normal(16)
        e = apply_function(SpectralResolvent(op16), s, sym, u) - exact_apply_spectral(op16, sym, u)
        assert h_norm(op16, e, 0.0) <= per_mode.max() * h_norm(op16, u, 0.0) * (1 + 1e-12)


def test_linearity(op16, rng):
    u, v = rng.standard_normal(16), rng.standard_normal(16)
    a, b = 2.5, -0.75
    p = SpectralResolvent(op16)
    s = make_scheme("DE3", 30)
    f = lambda x: apply_function(p, s, PowerSymbol(0.3), x)  # noqa: E731
    lhs = f(a * u + b * v)
    rhs = a * f(u) + b * f(v)
    assert np.linalg.norm(lhs - rhs) <= 1e-13 * np.linalg.norm(rhs)


class TestExactApply:
    def test_inverse(self, op16, rng):
        u = rng.standard_normal(16)
        np.testing.assert_allclose(exact_apply_spectral(op16, PowerSymbol(1.0), u), u / op16.eigenvalues, rtol=1e-15)

    def test_heat_semigroup(self, op16, rng):
        u = rng.standard_normal(16)
        sym = MittagLefflerSymbol(MittagLefflerParams(1, 1), 0.01, 1.0)
        np.testing.assert_allclose(exact_apply_spectral(op16, sym, u), np.exp(-0.01 * op16.eigenvalues) * u, rtol=1e-14)

    def test_exponent_additivity(self, op16, rng):
        u = rng.standard_normal(16)
        twice = exact_apply_spectral(op16, PowerSymbol(0.35), exact_apply_spectral(op16, PowerSymbol(0.35), u))
        np.testing.assert_allclose(twice, exact_apply_spectral(op16, PowerSymbol(0.7), u), rtol=1e-13)


class TestHNorm:
    def test_single_mode(self, op16):
        for j in (0, 7):
            u = np.zeros(16)
            u[j] = 1.0
            assert h_norm(op16, u, 1.2) == pytest.approx(op16.eigenvalues[j] ** 0.6, rel=1e-15)

    def test_l2(self, op16, rng):
        u = rng.standard_normal(16)
        assert h_norm(op16, u, 0.0) == pytest.approx(np.linalg.norm(u), rel=1e-15)

    def test_axioms(self, op16, rng):
        for _ in range(20):
            u, v = rng.standard_normal(16), rng.standard_normal(16)
            c = rng.standard_normal()
            assert h_norm(op16, u + v, 0.8) <= h_norm(op16, u, 0.8) + h_norm(op16, v, 0.8)
            assert h_norm(op16, c * u, 0.8) == pytest.approx(abs(c) * h_norm(op16, u, 0.8), rel=1e-14)

    def test_negative_index(self, op16):
        with pytest.raises(ValueError):
            h_norm(op16, np.ones(16), -1.0)


class TestInterface:
    def test_kappa_below_spectrum(self):
        op = SpectralOperator(np.array([2.0, 5.0]))
        with pytest.raises(ValueError):
            apply_function(SpectralResolvent(op), make_scheme("DE1", 10), PowerSymbol(0.5), np.ones(2))

    def test_solve_error_carries_index(self, op16):
        class Failing:
            lambda_min = op16.lambda_min
            thread_safe = False

            def solve(self, z, rhs):
                if abs(z.imag) > 100:
                    raise np.linalg.LinAlgError("singular")
                return rhs / (op16.eigenvalues - z)

        with pytest.raises(SolveError) as info:
            apply_function(Failing(), make_scheme("DE1", 20), PowerSymbol(0.5), np.ones(16))
        assert info.value.index > 0

    def test_custom_provider_matches_batch(self, op16, rng):
        class Plain:
            lambda_min = op16.lambda_min
            thread_safe = True

            def solve(self, z, rhs):
                return rhs / (op16.eigenvalues - z)

        u = rng.standard_normal(16)
        s = make_scheme("DE2", 30)
        a = apply_function(Plain(), s, PowerSymbol(0.5), u)
        b = apply_function(SpectralResolvent(op16), s, PowerSymbol(0.5), u)
        np.testing.assert_allclose(a, b, rtol=1e-15)

    def test_balakrishnan_apply(self, rng):
        op = unit_square_laplacian(4)
        u = rng.standard_normal(op.size)
        s = make_scheme("balakrishnan", 80, beta=0.4)
        out = apply_function(SpectralResolvent(op), s, PowerSymbol(0.4), u)
        modewise = scalar_apply(s, PowerSymbol(0.4), op.eigenvalues).real * u
        np.testing.assert_allclose(out.real, modewise, rtol=1e-14, atol=1e-17)
        np.testing.assert_allclose(out.real, op.eigenvalues**-0.4 * u, rtol=1e-4)
        with pytest.raises(ValueError):
            apply_function(SpectralResolvent(op), s, PowerSymbol(0.5), u)

    def test_invalid_operator(self):
        with pytest.raises(ValueError):
            SpectralOperator(np.array([3.0, 1.0]))
        with pytest.raises(ValueError):
            SpectralOperator(np.array([0.0, 1.0]))
