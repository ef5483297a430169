"""Time integration of u_t + H u_xx + u_xxx + u u_x = 0 on a periodic grid.

The linear part is integrated exactly in Fourier space (multiplier
exp(i t (xi^3 - xi|xi|))). The quadratic term is advanced either by classical
RK4 in integrating-factor form or by ETDRK4 with contour-evaluated coefficients.

Three right-hand-side models are available:

``full``
    the Benjamin equation itself.
``linear``
    the nonlinearity switched off, so the flow is the exact linear group.
``duhamel1``
    first Picard iterate of the Duhamel formula: the quadratic term is frozen
    at the linear evolution of the initial datum, i.e.
    ``v(t) = U(t)phi - int_0^t U(t - s) (1/2) d/dx (U(s)phi)^2 ds``.
    It is linear in time-stepping terms (a forced linear equation) but keeps the
    first nonlinear correction to the low-frequency moments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .spectral import Grid1D, RealField, dispersion_symbol
from . import diagnostics

__all__ = [
    "SCHEMES",
    "DEALIAS",
    "MODELS",
    "SolverConfig",
    "Trajectory",
    "InstabilityError",
    "BoundaryError",
    "nonlinear_rhs",
    "step",
    "solve",
    "stable_dt",
    "boundary_ratio",
]

SCHEMES = ("IF_RK4", "ETDRK4")
DEALIAS = ("two_thirds", "none")
MODELS = ("full", "linear", "duhamel1")
RK4_IMAG_STABILITY = 2.8284271247461903  # RK4 stability interval on the imaginary axis


class InstabilityError(RuntimeError):
    """Raised when the solution stops being finite."""


class BoundaryError(RuntimeError):
    """Raised when the solution is not negligible near the domain edge."""


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    t_final: float
    scheme: str = "IF_RK4"
    dealias: str = "two_thirds"
    snapshot_stride: int = 1
    model: str = "full"
    # max |u| over the outer boundary_fraction of the domain, relative to max |u|;
    # None disables the check
    boundary_tol: Optional[float] = 1e-10
    boundary_fraction: float = 0.05
    stability_safety: float = 0.5
    check_stability: bool = True

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (np.isfinite(self.t_final) and self.t_final >= 0):
            raise ValueError(f"t_final must be finite and nonnegative, got {self.t_final}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.dealias not in DEALIAS:
            raise ValueError(f"dealias must be one of {DEALIAS}, got {self.dealias!r}")
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if int(self.snapshot_stride) != self.snapshot_stride or self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be a positive integer")
        if not 0 < self.boundary_fraction < 1:
            raise ValueError("boundary_fraction must lie in (0, 1)")

    def step_plan(self) -> tuple[int, float]:
        """Number of full steps and the length of a trailing partial step (0 if none)."""
        ratio = self.t_final / self.dt
        nfull = int(math.floor(ratio + 1e-9))
        rem = self.t_final - nfull * self.dt
        if rem <= 1e-12 * self.dt:
            rem = 0.0
        return nfull, rem


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: tuple
    config: Optional[SolverConfig]
    grid: Grid1D
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if len(times) != len(self.states):
            raise ValueError("times and states differ in length")
        if np.any(np.diff(times) <= 0):
            raise ValueError("snapshot times must be strictly increasing")
        for s in self.states:
            if s.grid != self.grid:
                raise ValueError("all states must share the trajectory grid")
        times.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", tuple(self.states))

    def __len__(self):
        return len(self.states)

    @property
    def final(self) -> RealField:
        return self.states[-1]

    def samples(self) -> np.ndarray:
        """Snapshots stacked as an array of shape (len, n)."""
        if not self.states:
            return np.zeros((0, self.grid.n))
        return np.stack([s.samples for s in self.states])


class _Operators:
    """Raw-FFT-coefficient operators shared by the integrators."""

    def __init__(self, grid: Grid1D, dealias: str):
        xi = grid.frequencies
        self.grid = grid
        self.lin = 1j * dispersion_symbol(xi)
        ik = 1j * xi
        ik[grid.n // 2] = 0.0  # odd operators annihilate the Nyquist mode
        if dealias == "two_thirds":
            self.mask = grid.dealias_mask.astype(float)
        else:
            self.mask = np.ones(grid.n)
        self.half_ik = -0.5 * ik * self.mask

    def quadratic(self, vh: np.ndarray) -> np.ndarray:
        """Coefficients of -(1/2) d/dx (v^2) with dealiasing."""
        v = np.fft.ifft(vh * self.mask).real
        return self.half_ik * np.fft.fft(v * v)


def _etd_coefficients(lin: np.ndarray, h: float, m: int = 32):
    """ETDRK4 coefficients by averaging over a circle of radius 1 around each h*L."""
    roots = np.exp(2j * np.pi * (np.arange(1, m + 1) - 0.5) / m)
    z = h * lin[:, None] + roots[None, :]
    ez = np.exp(z)
    ez2 = np.exp(z / 2)
    q = h * np.mean((ez2 - 1.0) / z, axis=1)
    f1 = h * np.mean((-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z**3, axis=1)
    f2 = h * np.mean((2.0 + z + ez * (z - 2.0)) / z**3, axis=1)
    f3 = h * np.mean((-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z**3, axis=1)
    return np.exp(h * lin), np.exp(0.5 * h * lin), q, f1, f2, f3


class _Stepper:
    """One fixed step size of one scheme; rhs(vh, t) gives nonlinear coefficients."""

    def __init__(self, lin, rhs: Optional[Callable], h: float, scheme: str):
        self.h = h
        self.rhs = rhs
        self.scheme = scheme
        if scheme == "IF_RK4":
            self.e = np.exp(lin * h)
            self.e2 = np.exp(lin * (0.5 * h))
        else:
            self.e, self.e2, self.q, self.f1, self.f2, self.f3 = _etd_coefficients(lin, h)

    def __call__(self, vh: np.ndarray, t: float) -> np.ndarray:
        # overflow surfaces as non-finite output and is reported by _check_finite
        with np.errstate(over="ignore", invalid="ignore"):
            return self._advance(vh, t)

    def _advance(self, vh: np.ndarray, t: float) -> np.ndarray:
        h, rhs = self.h, self.rhs
        if rhs is None:
            return self.e * vh
        if self.scheme == "IF_RK4":
            e, e2 = self.e, self.e2
            k1 = rhs(vh, t)
            k2 = rhs(e2 * (vh + 0.5 * h * k1), t + 0.5 * h)
            k3 = rhs(e2 * vh + 0.5 * h * k2, t + 0.5 * h)
            k4 = rhs(e * vh + h * e2 * k3, t + h)
            return e * vh + (h / 6.0) * (e * k1 + 2.0 * e2 * (k2 + k3) + k4)
        e, e2, q = self.e, self.e2, self.q
        nv = rhs(vh, t)
        a = e2 * vh + q * nv
        na = rhs(a, t + 0.5 * h)
        b = e2 * vh + q * na
        nb = rhs(b, t + 0.5 * h)
        c = e2 * a + q * (2.0 * nb - nv)
        nc = rhs(c, t + h)
        return e * vh + self.f1 * nv + 2.0 * self.f2 * (na + nb) + self.f3 * nc


def _make_rhs(ops: _Operators, model: str, phi_hat: np.ndarray):
    if model == "full":
        return lambda vh, t: ops.quadratic(vh)
    if model == "linear":
        return None
    lin = ops.lin
    return lambda vh, t: ops.quadratic(np.exp(lin * t) * phi_hat)


def nonlinear_rhs(u: RealField, dealias: str = "two_thirds") -> RealField:
    """-(1/2) d/dx (u^2), computed spectrally with the requested dealiasing."""
    if dealias not in DEALIAS:
        raise ValueError(f"dealias must be one of {DEALIAS}")
    ops = _Operators(u.grid, dealias)
    return RealField(u.grid, np.fft.ifft(ops.quadratic(np.fft.fft(u.samples))).real)


def _check_finite(vh: np.ndarray, t: float) -> None:
    if not np.all(np.isfinite(vh)):
        raise InstabilityError(f"non-finite solution at t = {t!r}; reduce dt or the data size")


def step(u: RealField, dt: float, scheme: str = "IF_RK4", dealias: str = "two_thirds",
         model: str = "full") -> RealField:
    """Advance ``u`` by one step of length ``dt`` (``full`` or ``linear`` model)."""
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}")
    if model not in ("full", "linear"):
        raise ValueError("step supports the 'full' and 'linear' models")
    if not (np.isfinite(dt) and dt > 0):
        raise ValueError("dt must be positive")
    ops = _Operators(u.grid, dealias)
    rhs = _make_rhs(ops, model, None)
    out = _Stepper(ops.lin, rhs, dt, scheme)(np.fft.fft(u.samples), 0.0)
    _check_finite(out, dt)
    return RealField(u.grid, np.fft.ifft(out).real)


def stable_dt(u: RealField, dealias: str = "two_thirds", safety: float = 0.5) -> float:
    """Largest dt for which RK4 is stable on the linearized quadratic term, times safety."""
    g = u.grid
    kept = g.dealias_mask if dealias == "two_thirds" else np.ones(g.n, bool)
    xi_max = np.max(np.abs(g.frequencies[kept]))
    amp = np.max(np.abs(u.samples))
    if amp == 0 or xi_max == 0:
        return math.inf
    return safety * RK4_IMAG_STABILITY / (amp * xi_max)


def boundary_ratio(u: RealField, fraction: float = 0.05) -> float:
    """max |u| over the outer ``fraction`` of the domain divided by max |u|."""
    g = u.grid
    peak = np.max(np.abs(u.samples))
    if peak == 0:
        return 0.0
    edge = np.abs(g.x) >= (1.0 - fraction) * 0.5 * g.length
    return float(np.max(np.abs(u.samples[edge])) / peak)


def _check_boundary(u: RealField, config: SolverConfig, t: float) -> None:
    if config.boundary_tol is None:
        return
    r = boundary_ratio(u, config.boundary_fraction)
    if r > config.boundary_tol:
        raise BoundaryError(
            f"boundary mass ratio {r:.3e} exceeds {config.boundary_tol:.1e} at t = {t!r}; "
            "enlarge the domain"
        )


def _snapshot_diagnostics(u: RealField) -> dict:
    return {
        "I1": u.integral(),
        "I2": u.l2_norm() ** 2,
        "I3": diagnostics.conserved_I3(u),
        "first_moment": diagnostics.moment(u, 1, edge_tol=None),
    }


def solve(phi: RealField, config: SolverConfig) -> Trajectory:
    """Integrate from ``u(0) = phi`` to ``config.t_final``.

    Snapshots are stored every ``snapshot_stride`` steps, always including t = 0
    and t_final, together with I1, I2, I3 and the first moment.
    """
    grid = phi.grid
    _check_boundary(phi, config, 0.0)
    if config.check_stability and config.model == "full":
        limit = stable_dt(phi, config.dealias, config.stability_safety)
        if config.dt > limit:
            raise ValueError(f"dt = {config.dt} exceeds the stability budget {limit:.4g}")
    ops = _Operators(grid, config.dealias)
    phi_hat = np.fft.fft(phi.samples)
    rhs = _make_rhs(ops, config.model, phi_hat)
    nfull, rem = config.step_plan()
    stepper = _Stepper(ops.lin, rhs, config.dt, config.scheme)

    times, states = [], []
    diag = {key: [] for key in ("I1", "I2", "I3", "first_moment")}

    def record(vh, t, u=None):
        u = u if u is not None else RealField(grid, np.fft.ifft(vh).real)
        _check_boundary(u, config, t)
        times.append(t)
        states.append(u)
        for key, value in _snapshot_diagnostics(u).items():
            diag[key].append(value)

    vh = phi_hat
    record(vh, 0.0, phi)
    stride = int(config.snapshot_stride)
    for j in range(1, nfull + 1):
        vh = stepper(vh, (j - 1) * config.dt)
        _check_finite(vh, j * config.dt)
        if j % stride == 0 or (j == nfull and rem == 0.0):
            record(vh, j * config.dt)
    if rem > 0.0:
        vh = _Stepper(ops.lin, rhs, rem, config.scheme)(vh, nfull * config.dt)
        _check_finite(vh, config.t_final)
        record(vh, float(config.t_final))
    return Trajectory(
        np.array(times),
        tuple(states),
        config,
        grid,
        {key: np.array(v) for key, v in diag.items()},
    )
