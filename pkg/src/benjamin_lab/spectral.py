"""Periodic grids, scaled discrete Fourier transforms and Fourier multipliers.

Transform convention
--------------------
The grid is ``x_j = -L/2 + j*dx`` for ``j = 0..n-1``. Coefficients approximate
the continuum transform ``f^(xi) = int exp(-i xi x) f(x) dx``::

    f^_k = dx * exp(-i xi_k x_0) * DFT(f)_k = dx * (-1)^k * DFT(f)_k

Coefficients are stored in numpy FFT order, matching ``Grid1D.frequencies``.
With this scaling the discrete Parseval identity is exact::

    dx * sum |f_j|^2 = (1/L) * sum |f^_k|^2

Real fields are recovered by taking the real part of the inverse DFT. An odd
multiplier leaves an imaginary Nyquist coefficient, which is therefore dropped;
operators that are odd in xi (derivatives of odd order, the Hilbert transform)
annihilate the Nyquist mode.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Union

import numpy as np

__all__ = [
    "Grid1D",
    "RealField",
    "SpectralField",
    "forward_transform",
    "inverse_transform",
    "apply_multiplier",
    "dispersion_symbol",
    "group_multiplier",
    "hilbert",
    "derivative",
    "fractional_derivative",
    "bessel_potential",
    "linear_group",
]


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on ``[-L/2, L/2)`` with ``n`` points."""

    n: int
    length: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise TypeError("n must be an integer")
        if self.n < 8 or not _is_power_of_two(int(self.n)):
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")
        if not np.isfinite(self.length) or self.length <= 0:
            raise ValueError(f"length must be positive and finite, got {self.length}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "length", float(self.length))

    @property
    def dx(self) -> float:
        return self.length / self.n

    @cached_property
    def x(self) -> np.ndarray:
        x = -0.5 * self.length + self.dx * np.arange(self.n)
        x.flags.writeable = False
        return x

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Integer mode indices k in FFT order (the Nyquist index is -n/2)."""
        k = np.fft.fftfreq(self.n, d=1.0 / self.n).astype(np.int64)
        k.flags.writeable = False
        return k

    @cached_property
    def frequencies(self) -> np.ndarray:
        xi = (2.0 * np.pi / self.length) * self.wavenumbers
        xi.flags.writeable = False
        return xi

    @cached_property
    def sign(self) -> np.ndarray:
        """sgn(xi) with sgn(0) = 0; the unpaired Nyquist mode gets -1."""
        s = np.sign(self.wavenumbers).astype(float)
        s.flags.writeable = False
        return s

    @cached_property
    def shift_phase(self) -> np.ndarray:
        """(-1)^k, the phase exp(-i xi_k x_0) for x_0 = -L/2."""
        p = np.where(self.wavenumbers % 2 == 0, 1.0, -1.0)
        p.flags.writeable = False
        return p

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Two-thirds rule: keep modes with |k| < n/3."""
        m = np.abs(self.wavenumbers) < self.n / 3.0
        m.flags.writeable = False
        return m

    def field(self, samples) -> "RealField":
        return RealField(self, samples)

    def sample(self, fn: Callable[[np.ndarray], np.ndarray]) -> "RealField":
        return RealField(self, fn(self.x))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class RealField:
    """Real samples of a function on a :class:`Grid1D`."""

    grid: Grid1D
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("field samples must be finite")
        object.__setattr__(self, "samples", _frozen(s))

    def __add__(self, other: "RealField") -> "RealField":
        _same_grid(self.grid, other.grid)
        return RealField(self.grid, self.samples + other.samples)

    def __sub__(self, other: "RealField") -> "RealField":
        _same_grid(self.grid, other.grid)
        return RealField(self.grid, self.samples - other.samples)

    def __mul__(self, c: float) -> "RealField":
        return RealField(self.grid, c * self.samples)

    __rmul__ = __mul__

    def __neg__(self) -> "RealField":
        return RealField(self.grid, -self.samples)

    def integral(self) -> float:
        return float(self.grid.dx * np.sum(self.samples))

    def l2_norm(self) -> float:
        return float(np.sqrt(self.grid.dx * np.dot(self.samples, self.samples)))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Scaled Fourier coefficients on a :class:`Grid1D`, in FFT order."""

    grid: Grid1D
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} coefficients, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coefficients", _frozen(c))

    def l2_norm(self) -> float:
        """Discrete Parseval norm sqrt((1/L) sum |f^_k|^2)."""
        c = self.coefficients
        return float(np.sqrt(np.vdot(c, c).real / self.grid.length))

    def hermitian_defect(self) -> float:
        """Relative violation of f^(-xi) = conj(f^(xi)) over the paired modes."""
        c = self.coefficients
        n = self.grid.n
        mirror = c[(-np.arange(n)) % n]
        paired = np.ones(n, bool)
        paired[n // 2] = False
        scale = max(np.max(np.abs(c)), np.finfo(float).tiny)
        defect = np.max(np.abs(c[paired] - np.conj(mirror[paired])), initial=0.0)
        return float(max(defect, abs(c[n // 2].imag)) / scale)


def _same_grid(a: Grid1D, b: Grid1D) -> None:
    if a != b:
        raise ValueError(f"grid mismatch: {a} vs {b}")


def forward_transform(f: RealField) -> SpectralField:
    g = f.grid
    return SpectralField(g, g.dx * g.shift_phase * np.fft.fft(f.samples))


def inverse_transform(F: SpectralField) -> RealField:
    g = F.grid
    return RealField(g, np.fft.ifft(F.coefficients * g.shift_phase).real / g.dx)


Multiplier = Union[Callable[[np.ndarray], np.ndarray], np.ndarray, complex, float]


def _evaluate_multiplier(grid: Grid1D, m: Multiplier) -> np.ndarray:
    values = m(grid.frequencies) if callable(m) else m
    values = np.broadcast_to(np.asarray(values, dtype=complex), (grid.n,))
    if not np.all(np.isfinite(values)):
        raise ValueError("multiplier is not finite on the grid frequencies")
    return values


def apply_multiplier(F: SpectralField, m: Multiplier) -> SpectralField:
    """Multiply coefficients pointwise by ``m(xi)`` (callable or array)."""
    return SpectralField(F.grid, F.coefficients * _evaluate_multiplier(F.grid, m))


def _real_op(f: RealField, m: Multiplier) -> RealField:
    return inverse_transform(apply_multiplier(forward_transform(f), m))


def dispersion_symbol(xi):
    """Phase rate xi^3 - xi|xi| of the linear flow."""
    xi = np.asarray(xi, dtype=float)
    return xi**3 - xi * np.abs(xi)


def group_multiplier(xi, t: float):
    """mu(xi, t) = exp(i t (xi^3 - xi|xi|)); equals 1 at xi = 0."""
    return np.exp(1j * t * dispersion_symbol(xi))


def hilbert(f: RealField) -> RealField:
    """Hilbert transform, multiplier -i sgn(xi) with sgn(0) = 0."""
    return _real_op(f, -1j * f.grid.sign)


def derivative(f: RealField, order: int = 1) -> RealField:
    if order < 0:
        raise ValueError("order must be nonnegative")
    return _real_op(f, (1j * f.grid.frequencies) ** order)


def fractional_derivative(f: RealField, s: float) -> RealField:
    """D^s f with multiplier |xi|^s; |0|^0 is taken as 1."""
    if not np.isfinite(s):
        raise ValueError("s must be finite")
    xi = np.abs(f.grid.frequencies)
    if s == 0:
        return f
    if s < 0:
        F = forward_transform(f)
        if abs(F.coefficients[0]) > 1e-14 * max(np.max(np.abs(F.coefficients)), 1e-300):
            raise ZeroDivisionError("D^s with s < 0 needs a mean-zero input")
        m = np.zeros_like(xi)
        m[1:] = xi[1:] ** s
        return inverse_transform(apply_multiplier(F, m))
    return _real_op(f, xi**s)


def bessel_potential(f: RealField, s: float) -> RealField:
    """J^s f with multiplier (1 + xi^2)^(s/2)."""
    if not np.isfinite(s):
        raise ValueError("s must be finite")
    return _real_op(f, (1.0 + f.grid.frequencies**2) ** (0.5 * s))


def linear_group(F: SpectralField, t: float) -> SpectralField:
    """Exact evolution of u_t + H u_xx + u_xxx = 0 over time t."""
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    return apply_multiplier(F, group_multiplier(F.grid.frequencies, t))
