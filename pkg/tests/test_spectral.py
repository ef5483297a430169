import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from benjamin_lab.spectral import (
    Grid1D, RealField, SpectralField, apply_multiplier, bessel_potential, derivative,
    forward_transform, fractional_derivative, hilbert, inverse_transform, linear_group,
)
from conftest import random_field

seeds = st.integers(0, 2**32 - 1)


def mode(grid, k, fn=np.cos, amplitude=1.0):
    xi = grid.frequencies[k]
    return grid.sample(lambda x: amplitude * fn(xi * x)), xi


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid1D(100, 10.0)
    with pytest.raises(ValueError):
        Grid1D(4, 10.0)
    with pytest.raises(ValueError):
        Grid1D(64, -1.0)
    with pytest.raises(TypeError):
        Grid1D(64.0, 1.0)
    g = Grid1D(64, 8.0)
    assert g.x[0] == -4.0 and g.dx == 0.125
    assert g.sign[0] == 0 and g.sign[32] == -1 and g.wavenumbers[32] == -32


def test_field_validation(grid):
    with pytest.raises(ValueError):
        RealField(grid, np.zeros(3))
    with pytest.raises(ValueError):
        RealField(grid, np.full(grid.n, np.nan))
    with pytest.raises(ValueError):
        SpectralField(grid, np.full(grid.n, np.inf, complex))
    f = grid.field(np.zeros(grid.n))
    with pytest.raises(ValueError):
        f.samples[0] = 1.0


def test_constant_coefficient_is_integral(grid):
    f = grid.sample(lambda x: np.exp(-x**2))
    F = forward_transform(f)
    assert F.coefficients[0].real == pytest.approx(np.sqrt(np.pi), rel=1e-13)


def test_gaussian_transform_against_quadrature():
    # independent route: direct numerical Fourier integral of exp(-x^2)
    g = Grid1D(512, 40.0)
    F = forward_transform(g.sample(lambda x: np.exp(-x**2))).coefficients
    for k in (0, 1, 5, 13, 30):
        xi = g.frequencies[k]
        ref = quad(lambda x: np.exp(-x**2) * np.cos(xi * x), -np.inf, np.inf, epsabs=1e-14)[0]
        assert abs(F[k] - ref) < 1e-8
        assert abs(F[k] - np.sqrt(np.pi) * np.exp(-xi**2 / 4)) < 1e-8


@given(seeds)
def test_round_trip(seed):
    g = Grid1D(128, 30.0)
    f = random_field(g, np.random.default_rng(seed), decay=seed % 2 == 0)
    back = inverse_transform(forward_transform(f)).samples
    assert np.max(np.abs(back - f.samples)) <= 1e-12 * max(np.max(np.abs(f.samples)), 1e-300)


@given(seeds)
def test_parseval(seed):
    g = Grid1D(128, 30.0)
    f = random_field(g, np.random.default_rng(seed), decay=False)
    assert forward_transform(f).l2_norm() == pytest.approx(f.l2_norm(), rel=1e-13)


@given(seeds, st.floats(-5, 5))
def test_hermitian_symmetry_preserved(seed, theta):
    g = Grid1D(128, 30.0)
    F = forward_transform(random_field(g, np.random.default_rng(seed), decay=False))
    assert F.hermitian_defect() < 1e-14
    for m in (lambda xi: np.exp(1j * theta * xi**3), lambda xi: -1j * np.sign(xi), lambda xi: xi**2):
        assert apply_multiplier(F, m).hermitian_defect() < 1e-13
    assert apply_multiplier(F, lambda xi: 1j * np.ones_like(xi)).hermitian_defect() > 0.1


def test_multiplier_examples(grid):
    F = forward_transform(random_field(grid, np.random.default_rng(0)))
    assert np.array_equal(apply_multiplier(F, 1.0).coefficients, F.coefficients)
    twice = apply_multiplier(apply_multiplier(F, lambda xi: 1j * xi), lambda xi: 1j * xi)
    once = apply_multiplier(F, lambda xi: -xi**2)
    assert np.allclose(twice.coefficients, once.coefficients, rtol=0, atol=1e-13)
    unit = apply_multiplier(F, lambda xi: np.exp(1j * np.sin(xi)))
    assert np.allclose(np.abs(unit.coefficients), np.abs(F.coefficients), rtol=1e-14, atol=0)
    with pytest.raises(ValueError):
        with np.errstate(divide="ignore"):
            apply_multiplier(F, lambda xi: 1.0 / xi)


def test_hilbert_examples(grid):
    for k in (1, 3, 17):
        c, xi = mode(grid, k)
        s, _ = mode(grid, k, np.sin)
        assert np.allclose(hilbert(c).samples, s.samples, atol=1e-13)
    const = grid.field(np.full(grid.n, 2.5))
    assert np.max(np.abs(hilbert(const).samples)) < 1e-14


def test_hilbert_removes_nyquist_mode():
    g = Grid1D(16, 16.0)
    nyq = g.field(np.where(np.arange(16) % 2 == 0, 1.0, -1.0))
    assert np.max(np.abs(hilbert(nyq).samples)) < 1e-15


@given(seeds)
def test_hilbert_involution_and_isometry(seed):
    g = Grid1D(128, 30.0)
    f = random_field(g, np.random.default_rng(seed), decay=False)
    mean = f.samples.mean()
    hh = hilbert(hilbert(f)).samples
    assert np.allclose(hh, -(f.samples - mean), atol=1e-12 * np.max(np.abs(f.samples)))
    f0 = g.field(f.samples - mean)
    assert hilbert(f0).l2_norm() == pytest.approx(f0.l2_norm(), rel=1e-12)
    assert abs(hilbert(f).samples.mean()) < 1e-14 * np.max(np.abs(f.samples))


def test_derivatives(grid):
    f = grid.sample(lambda x: np.exp(-x**2))
    assert np.allclose(derivative(f).samples, -2 * grid.x * np.exp(-grid.x**2), atol=1e-12)
    assert np.allclose(fractional_derivative(f, 2).samples, -derivative(f, 2).samples, atol=1e-12)
    assert bessel_potential(f, 0).samples == pytest.approx(f.samples, abs=1e-14)
    assert fractional_derivative(f, 0) is f
    c, xi = mode(grid, 5)
    for s in (0.5, 1.0, 2.5):
        assert bessel_potential(c, s).l2_norm() == pytest.approx((1 + xi**2) ** (s / 2) * c.l2_norm(), rel=1e-12)
        assert fractional_derivative(c, s).l2_norm() == pytest.approx(abs(xi) ** s * c.l2_norm(), rel=1e-12)
    with pytest.raises(ZeroDivisionError):
        fractional_derivative(f, -0.5)
    s_neg = fractional_derivative(c, -1.0)
    assert s_neg.l2_norm() == pytest.approx(c.l2_norm() / xi, rel=1e-12)
    with pytest.raises(ValueError):
        derivative(f, -1)


def test_linear_group_examples(grid):
    F = forward_transform(random_field(grid, np.random.default_rng(1)))
    assert np.array_equal(linear_group(F, 0.0).coefficients, F.coefficients)
    g = Grid1D(64, 2 * np.pi)  # frequencies are the integers
    c1, _ = mode(g, 1)
    for t in (0.3, 7.0, -11.0):
        assert np.allclose(inverse_transform(linear_group(forward_transform(c1), t)).samples, c1.samples,
                           atol=1e-14)
    F2 = forward_transform(mode(g, 2)[0])
    out = linear_group(F2, 0.7).coefficients
    assert out[2] == pytest.approx(F2.coefficients[2] * np.exp(4j * 0.7), abs=1e-13)
    with pytest.raises(ValueError):
        linear_group(F2, np.inf)


@given(seeds, st.floats(-3, 3), st.floats(-3, 3))
def test_linear_group_unitary_and_group_law(seed, t, s):
    g = Grid1D(128, 30.0)
    f = random_field(g, np.random.default_rng(seed))
    F = forward_transform(f)
    Ut = linear_group(F, t)
    assert Ut.l2_norm() == pytest.approx(F.l2_norm(), rel=1e-13)
    assert Ut.coefficients[0] == F.coefficients[0]
    both = linear_group(Ut, s).coefficients
    direct = linear_group(F, t + s).coefficients
    assert np.max(np.abs(both - direct)) <= 1e-12 * np.max(np.abs(F.coefficients))
