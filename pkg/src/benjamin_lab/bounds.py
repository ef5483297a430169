"""Sampled inequality ratios over a fixed corpus of pulses.

Each check evaluates LHS/RHS of a weighted or fractional inequality with unit
constant and records the maximum over the corpus and parameter grid. The
maxima are regression values, not proofs of the inequalities.

Corpus (on a grid of length 64 by default):

===================  ==========================================
gaussian             exp(-x^2)
gaussian_derivative  -2 x exp(-x^2)
sech                 sech(x)
bump                 exp(-1/(1 - (x/6)^2)) for |x| < 6, else 0
===================  ==========================================
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Sequence

import numpy as np

from .diagnostics import (
    WeightSpec,
    stein_norm_of_samples,
    weighted_norm,
)
from .spectral import Grid1D, RealField, derivative, forward_transform, hilbert

__all__ = [
    "CORPUS",
    "corpus_fields",
    "interpolation_ratio",
    "weighted_sobolev_ratio",
    "weighted_derivative_ratio",
    "unimodular_stein_derivative",
    "quadratic_phase_ratio",
    "cubic_phase_ratio",
    "frequency_stein_ratio",
    "hilbert_weight_ratio",
    "BoundsConfig",
    "BoundsReport",
    "bound_check_suite",
]


def _bump(x, width=6.0):
    r = np.abs(x) / width
    out = np.zeros_like(x)
    inside = r < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return out


CORPUS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "gaussian": lambda x: np.exp(-x * x),
    "gaussian_derivative": lambda x: -2.0 * x * np.exp(-x * x),
    "sech": lambda x: 1.0 / np.cosh(x),
    "bump": _bump,
}

# closed-form transforms int exp(-i xi x) f(x) dx used by the frequency-side check
SPECTRA: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "gaussian": lambda k: np.sqrt(np.pi) * np.exp(-k * k / 4.0) + 0j,
    "gaussian_derivative": lambda k: 1j * np.sqrt(np.pi) * k * np.exp(-k * k / 4.0),
    "sech": lambda k: np.pi / np.cosh(0.5 * np.pi * k) + 0j,
}


def corpus_fields(grid: Grid1D, names: Sequence[str] = tuple(CORPUS)) -> Dict[str, RealField]:
    return {name: grid.sample(CORPUS[name]) for name in names}


def _sobolev(f: RealField, s: float, floor: float = 1e-12) -> float:
    """||J^s f|| with coefficients below ``floor`` * max |f^| dropped.

    High Sobolev orders amplify FFT roundoff by <xi>^s; discarding the
    roundoff floor keeps the norm independent of the grid's top frequency.
    """
    F = forward_transform(f).coefficients
    F = np.where(np.abs(F) < floor * np.max(np.abs(F)), 0.0, F)
    xi = f.grid.frequencies
    return float(np.sqrt(np.sum((1.0 + xi * xi) ** s * np.abs(F) ** 2) / f.grid.length))


def _bracket_power(f: RealField, p: float) -> RealField:
    return RealField(f.grid, (1.0 + f.grid.x**2) ** (0.5 * p) * f.samples)


def _wnorm(f: RealField, r: float) -> float:
    return weighted_norm(f, WeightSpec(r), edge_tol=None)


def interpolation_ratio(f: RealField, beta: float, delta: float, nu: float) -> float:
    """||J^(beta delta)(<x>^((1-beta) nu) f)|| / (||<x>^nu f||^(1-beta) ||J^delta f||^beta)."""
    lhs = _sobolev(_bracket_power(f, (1.0 - beta) * nu), beta * delta)
    rhs = _wnorm(f, nu) ** (1.0 - beta) * _sobolev(f, delta) ** beta
    return lhs / rhs


def _xpow(f: RealField, j: int) -> RealField:
    return RealField(f.grid, f.grid.x**j * f.samples)


def weighted_sobolev_ratio(f: RealField, theta: float, j: int, k: int) -> float:
    """||J^(2 theta)(x^j f^(k))|| / (||J^(2(theta + j) + k) f|| + ||<x>^(theta + j + k/2) f||)."""
    lhs = _sobolev(_xpow(derivative(f, k), j), 2.0 * theta)
    rhs = _sobolev(f, 2.0 * (theta + j) + k) + _wnorm(f, theta + j + 0.5 * k)
    return lhs / rhs


def weighted_derivative_ratio(f: RealField, theta: float, j: int, k: int) -> float:
    """|||x|^theta (x^j f)^(k)|| / (||J^(2(4 + theta)) f|| + ||<x>^e f||), e = 2(4+theta)(j+theta)/(2(4+theta)-k)."""
    s = 2.0 * (4.0 + theta)
    if not k < s:
        raise ValueError("need k < 2(4 + theta)")
    g = derivative(_xpow(f, j), k)
    lhs = np.sqrt(f.grid.dx * np.sum((np.abs(f.grid.x) ** theta * g.samples) ** 2))
    rhs = _sobolev(f, s) + _wnorm(f, s * (j + theta) / (s - k))
    return float(lhs / rhs)


# ---------------------------------------------------------------- pointwise Stein derivative

_GL8 = np.polynomial.legendre.leggauss(8)


def _gl_panels(edges: np.ndarray, fn: Callable[[np.ndarray], np.ndarray]) -> float:
    a, b = edges[:-1], edges[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    nodes = mid[:, None] + half[:, None] * _GL8[0][None, :]
    return float(np.sum(half * (fn(nodes) @ _GL8[1])))


def unimodular_stein_derivative(psi: Callable, dpsi: Callable, x: float, b: float,
                                rate_cut: float = 200.0, search: float = 2000.0) -> float:
    """D^b (exp(i psi))(x) = (int (2 - 2 cos(psi(x+h) - psi(x))) |h|^(-1-2b) dh)^(1/2).

    On each side, s = |h| runs over a graded mesh near 0 (with the leading
    Taylor term below its first node) and panels of at most
    one radian of phase change up to s_c, the point beyond which the phase rate
    stays above ``rate_cut``. The remainder is 2 s_c^(-2b)/(2b) minus the cosine
    part, taken from two integrations by parts (error O(rate^-3)).
    """
    if not 0 < b < 1:
        raise ValueError("b must lie in (0, 1)")
    q = 1.0 + 2.0 * b
    total = 0.0
    s_grid = np.linspace(0.0, search, 40001)
    for side in (1.0, -1.0):
        rate = np.abs(dpsi(x + side * s_grid))
        low = np.nonzero(rate < rate_cut)[0]
        if len(low) and low[-1] + 1 >= len(s_grid):
            raise ValueError("phase rate does not exceed the cut inside the search range")
        s_c = max(s_grid[low[-1] + 1] if len(low) else 0.0, 1.0)

        def integrand(s):
            d = psi(x + side * s) - psi(x)
            return 4.0 * np.sin(0.5 * d) ** 2 * s**-q

        first = min(s_c, 1.0 / max(abs(float(dpsi(x))), 1.0), 0.05)
        graded = first * 2.0 ** -np.arange(20, -1, -1)
        dense = np.linspace(0.0, s_c, 4097)
        phase = psi(x + side * dense)
        cum = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(phase)))])
        npan = max(int(math.ceil(cum[-1])), 1)
        breaks = np.interp(np.linspace(0.0, cum[-1], npan + 1), cum, dense)
        breaks = np.union1d(breaks, np.linspace(0.0, s_c, 65))
        edges = np.union1d(graded, breaks[breaks > first])
        total += _gl_panels(edges, integrand)
        # below graded[0] the integrand is psi'(x)^2 s^(1-2b) to leading order
        total += float(dpsi(x)) ** 2 * graded[0] ** (2.0 - 2.0 * b) / (2.0 - 2.0 * b)

        y = x + side * s_c
        d_c = psi(y) - psi(x)
        d1 = side * dpsi(y)
        step = 1e-6 * (1.0 + abs(y))
        d2 = (dpsi(y + step) - dpsi(y - step)) / (2.0 * step)
        g, g1 = s_c**-q, -q * s_c ** (-q - 1.0)
        k = g1 / d1 - g * d2 / d1**2
        cosine_tail = -np.sin(d_c) * g / d1 - np.cos(d_c) * k / d1
        total += s_c ** (-2.0 * b) / b - 2.0 * cosine_tail
    return float(np.sqrt(total))


def quadratic_phase_ratio(x: float, t: float, b: float) -> float:
    """D^b(exp(-i t y|y|))(x) / (t^(b/2) + t^b |x|^b)."""
    lhs = unimodular_stein_derivative(lambda y: -t * y * np.abs(y), lambda y: -2.0 * t * np.abs(y), x, b)
    return lhs / (t ** (0.5 * b) + t**b * abs(x) ** b)


def cubic_phase_ratio(x: float, t: float, b: float) -> float:
    """D^b(exp(i t y^3))(x) / (t^(b/3) + t^(1/3 + 2b/9) + (t^(1/3 + 2b/3) + t^(2b/3)) |x|^(2b))."""
    lhs = unimodular_stein_derivative(lambda y: t * y**3, lambda y: 3.0 * t * y * y, x, b)
    rhs = t ** (b / 3) + t ** (1 / 3 + 2 * b / 9) + (t ** (1 / 3 + 2 * b / 3) + t ** (2 * b / 3)) * abs(x) ** (2 * b)
    return lhs / rhs


def frequency_stein_ratio(name: str, f: RealField, theta: float, t: float, xi_grid: Grid1D) -> float:
    """||D^theta_xi(mu(., t) f^)|| / (||J^(2 theta) f|| + |||x|^theta f||), f^ in closed form."""
    xi = xi_grid.x
    F = np.exp(1j * t * (xi**3 - xi * np.abs(xi))) * SPECTRA[name](xi)
    lhs = stein_norm_of_samples(F, xi_grid, theta)
    absx = np.sqrt(f.grid.dx * np.sum((np.abs(f.grid.x) ** theta * f.samples) ** 2))
    return lhs / (_sobolev(f, 2.0 * theta) + absx)


def hilbert_weight_ratio(f: RealField, nu: float, N: float) -> float:
    """||<x>_N^nu H f|| / ||<x>_N^nu f||."""
    spec = WeightSpec(nu, N)
    return weighted_norm(hilbert(f), spec) / weighted_norm(f, spec)


# ---------------------------------------------------------------- suite


@dataclass(frozen=True)
class BoundsConfig:
    n: int = 2048
    length: float = 64.0
    betas: tuple = (0.25, 0.5, 0.75)
    deltas: tuple = (1.0, 2.0, 4.0)
    nus: tuple = (1.0, 2.0, 4.0)
    thetas: tuple = (0.25, 0.5, 0.75)
    js: tuple = (0, 1, 2)
    ks: tuple = (0, 1, 2)
    x_samples: int = 41
    x_max: float = 20.0
    times: tuple = (0.5, 1.0, 2.0)
    bs: tuple = (0.25, 0.5, 0.75)
    df_times: tuple = (0.25, 0.5, 1.0)
    df_n: int = 2048
    df_length: float = 24.0
    hilbert_nus: tuple = (0.3, 0.49)
    truncations: tuple = (5.0, 10.0, 20.0, 40.0)

    def refined(self) -> "BoundsConfig":
        """Every discretization doubled: spatial, x-sample and frequency grids."""
        return BoundsConfig(**{**self.__dict__, "n": 2 * self.n, "df_n": 2 * self.df_n,
                               "x_samples": 2 * self.x_samples - 1})


@dataclass
class BoundsReport:
    maxima: Dict[str, float] = field(default_factory=dict)
    argmax: Dict[str, str] = field(default_factory=dict)

    def update(self, key: str, value: float, where: str) -> None:
        if key not in self.maxima or value > self.maxima[key]:
            self.maxima[key] = float(value)
            self.argmax[key] = where


def bound_check_suite(config: BoundsConfig = BoundsConfig()) -> BoundsReport:
    """Maxima of every inequality ratio over the corpus and parameter grids."""
    grid = Grid1D(config.n, config.length)
    fields = corpus_fields(grid)
    rep = BoundsReport()
    for name, f in fields.items():
        for beta, delta, nu in itertools.product(config.betas, config.deltas, config.nus):
            rep.update("interpolation", interpolation_ratio(f, beta, delta, nu),
                       f"{name} beta={beta} delta={delta} nu={nu}")
        for theta, j, k in itertools.product(config.thetas, config.js, config.ks):
            where = f"{name} theta={theta} j={j} k={k}"
            rep.update("weighted_sobolev", weighted_sobolev_ratio(f, theta, j, k), where)
            rep.update("weighted_derivative", weighted_derivative_ratio(f, theta, j, k), where)
        if abs(f.integral()) < 1e-12 * f.l2_norm():
            for nu, N in itertools.product(config.hilbert_nus, config.truncations):
                rep.update("hilbert_weight", hilbert_weight_ratio(f, nu, N), f"{name} nu={nu} N={N}")
    xs = np.linspace(-config.x_max, config.x_max, config.x_samples)
    for t, b in itertools.product(config.times, config.bs):
        for x in xs:
            where = f"t={t} b={b} x={x:.4g}"
            rep.update("quadratic_phase", quadratic_phase_ratio(float(x), t, b), where)
            rep.update("cubic_phase", cubic_phase_ratio(float(x), t, b), where)
    xi_grid = Grid1D(config.df_n, config.df_length)
    for name in SPECTRA:
        for theta, t in itertools.product(config.thetas, config.df_times):
            rep.update("frequency_stein", frequency_stein_ratio(name, fields[name], theta, t, xi_grid),
                       f"{name} theta={theta} t={t}")
    return rep
