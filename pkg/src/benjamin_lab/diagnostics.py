"""Moments, conserved quantities, weighted and fractional norms, tail plateaus."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import gamma, zeta

from .spectral import (
    Grid1D,
    RealField,
    derivative,
    forward_transform,
    hilbert,
)

__all__ = [
    "EdgeError",
    "WeightSpec",
    "truncated_weight",
    "weight_values",
    "moment",
    "conserved_I3",
    "weighted_norm",
    "sobolev_norm",
    "fractional_seminorm",
    "stein_constant",
    "stein_derivative_norm",
    "stein_norm_of_samples",
    "tail_plateau",
    "tail_amplitude",
    "CertificateReport",
    "uniqueness_certificate",
    "NormReport",
    "norm_report",
    "write_diagnostics_csv",
]


class EdgeError(ValueError):
    """A weighted quantity picks up too much from the domain edge."""


# ---------------------------------------------------------------- weights

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(40)


def _smoothstep(tau):
    tau = np.clip(tau, 0.0, 1.0)
    return tau**3 * (10.0 - 15.0 * tau + 6.0 * tau * tau)


def _smoothstep_prime(tau):
    tau = np.clip(tau, 0.0, 1.0)
    return 30.0 * tau * tau * (1.0 - tau) ** 2


def _bracket(r):
    return np.sqrt(1.0 + r * r)


class _Blend:
    """Slope profile of the truncated weight on [N, 3N].

    w'(r) = (r/<r>) (1 - S(tau))^m with S the quintic smoothstep in
    tau = (r - N)/(2N). The exponent m >= 1/2 is solved so that w reaches exactly
    2N at r = 3N. The slope is positive, at most 1, and w is C^2 at both junctions.
    """

    def __init__(self, N: float):
        self.N = float(N)
        target = 2.0 * N - _bracket(N)
        self.m = brentq(lambda m: self._integral(np.array([3.0 * N]), m)[0] - target, 0.5, 50.0,
                        xtol=1e-15, rtol=4 * np.finfo(float).eps)

    def _tau(self, r):
        return (r - self.N) / (2.0 * self.N)

    def _one_minus_s(self, r):
        # clipped: the smoothstep polynomial can exceed 1 by a rounding error
        return np.clip(1.0 - _smoothstep(self._tau(r)), 0.0, 1.0)

    def slope(self, r, m=None):
        m = self.m if m is None else m
        return (r / _bracket(r)) * self._one_minus_s(r) ** m

    def curvature(self, r):
        tau = self._tau(r)
        one_s = self._one_minus_s(r)
        sp = _smoothstep_prime(tau) / (2.0 * self.N)
        safe = np.where(one_s > 0, one_s, 1.0)
        return np.where(one_s > 0, safe**self.m / _bracket(r) ** 3
                        - (r / _bracket(r)) * self.m * safe ** (self.m - 1.0) * sp, 0.0)

    def _integral(self, r, m=None):
        half = 0.5 * (r - self.N)
        s = self.N + half[:, None] * (_GL_NODES[None, :] + 1.0)
        return half * (self.slope(s, m) @ _GL_WEIGHTS)

    def value(self, r):
        return _bracket(self.N) + self._integral(r)


def truncated_weight(x, N: float, order: int = 0) -> np.ndarray:
    """<x>_N and its derivatives in |x| (order 0, 1 or 2).

    Equal to <x> = sqrt(1 + x^2) for |x| <= N and to 2N for |x| >= 3N, with a
    smooth monotone blend in between. For order 1 and 2 the derivative is taken
    with respect to r = |x|.
    """
    if not N >= 1:
        raise ValueError(f"truncation N must be at least 1, got {N}")
    r = np.abs(np.asarray(x, dtype=float))
    out = np.empty_like(r)
    inner = r <= N
    outer = r >= 3.0 * N
    mid = ~(inner | outer)
    blend = _Blend(N)
    if order == 0:
        out[inner] = _bracket(r[inner])
        out[outer] = 2.0 * N
        out[mid] = blend.value(r[mid])
    elif order == 1:
        out[inner] = r[inner] / _bracket(r[inner])
        out[outer] = 0.0
        out[mid] = blend.slope(r[mid])
    elif order == 2:
        out[inner] = 1.0 / _bracket(r[inner]) ** 3
        out[outer] = 0.0
        out[mid] = blend.curvature(r[mid])
    else:
        raise ValueError("order must be 0, 1 or 2")
    return out


@dataclass(frozen=True)
class WeightSpec:
    """Weight w^r with w = <x> (truncation_N None) or the truncated <x>_N."""

    r: float
    truncation_N: Optional[float] = None

    def __post_init__(self):
        if not (np.isfinite(self.r) and self.r >= 0):
            raise ValueError("r must be finite and nonnegative")
        if self.truncation_N is not None and not self.truncation_N >= 1:
            raise ValueError("truncation_N must be at least 1")


def weight_values(x, spec: WeightSpec) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if spec.truncation_N is None:
        base = _bracket(x)
    else:
        base = truncated_weight(x, spec.truncation_N)
    return base**spec.r


def _edge_share(grid: Grid1D, density: np.ndarray, fraction: float) -> float:
    total = np.sum(density)
    if total == 0:
        return 0.0
    edge = np.abs(grid.x) >= (1.0 - fraction) * 0.5 * grid.length
    return float(np.sum(density[edge]) / total)


# ---------------------------------------------------------------- moments and invariants


def moment(f: RealField, k: int, edge_tol: Optional[float] = 1e-8,
           edge_fraction: float = 0.05) -> float:
    """int x^k f dx by the rectangle rule (spectrally accurate for decaying f).

    The share of int |x|^k |f| coming from the outer ``edge_fraction`` of the
    domain must stay below ``edge_tol`` (None skips the check).
    """
    if int(k) != k or k < 0:
        raise ValueError("k must be a nonnegative integer")
    x = f.grid.x
    xk = x**k if k else np.ones_like(x)
    if edge_tol is not None:
        share = _edge_share(f.grid, np.abs(xk * f.samples), edge_fraction)
        if share > edge_tol:
            raise EdgeError(f"moment of order {k}: edge share {share:.2e} exceeds {edge_tol:.1e}")
    return float(f.grid.dx * np.dot(xk, f.samples))


def conserved_I3(u: RealField, cubic_coefficient=Fraction(1, 6)) -> float:
    """int (1/2) u_x^2 - (1/2) u H u_x - c u^3 dx.

    The Hamiltonian of u_t + H u_xx + u_xxx + u u_x = 0 has c = 1/6; other values
    can be passed to compare alternative normalizations.
    """
    ux = derivative(u, 1).samples
    hux = hilbert(derivative(u, 1)).samples
    s = u.samples
    c = float(cubic_coefficient)
    return float(u.grid.dx * np.sum(0.5 * ux * ux - 0.5 * s * hux - c * s**3))


# ---------------------------------------------------------------- norms


def weighted_norm(f: RealField, spec: WeightSpec, edge_tol: Optional[float] = 1e-8,
                  edge_fraction: float = 0.05) -> float:
    """||w^r f||_2 for the weight described by ``spec``."""
    w = weight_values(f.grid.x, spec)
    dens = (w * f.samples) ** 2
    if spec.truncation_N is None and edge_tol is not None:
        share = _edge_share(f.grid, dens, edge_fraction)
        if share > edge_tol:
            raise EdgeError(f"weighted norm r={spec.r}: edge share {share:.2e} exceeds {edge_tol:.1e}")
    return float(np.sqrt(f.grid.dx * np.sum(dens)))


def sobolev_norm(f: RealField, s: float) -> float:
    """||J^s f|| computed from the coefficients via the discrete Parseval identity."""
    F = forward_transform(f)
    m = (1.0 + f.grid.frequencies**2) ** (0.5 * s)
    return float(np.sqrt(np.sum(np.abs(m * F.coefficients) ** 2) / f.grid.length))


def _singular_power_sum(values_sq, spacing, alpha, g0, g2):
    """int |y|^alpha g(y) dy from samples on a uniform symmetric lattice.

    ``values_sq`` holds g on the lattice points (the origin included), ``g0`` and
    ``g2`` are g(0) and g''(0). The plain sum misses the |y|^alpha kink at the
    origin; the generalized Euler-Maclaurin (Navot) expansion removes the
    leading two error terms 2 zeta(-alpha) g0 h^(1+alpha) + zeta(-alpha-2) g2 h^(3+alpha).
    """
    raw = spacing * np.sum(values_sq)
    if alpha == 0 or alpha == 2:
        return raw
    corr = 2.0 * zeta(-alpha) * g0 * spacing ** (alpha + 1) + zeta(-alpha - 2) * g2 * spacing ** (alpha + 3)
    return raw - corr


def fractional_seminorm(f: RealField, b: float) -> float:
    """||D^b f|| = sqrt((1/2pi) int |xi|^(2b) |f^|^2), with the xi = 0 kink corrected."""
    if b < 0:
        raise ValueError("b must be nonnegative")
    g = f.grid
    F = forward_transform(f).coefficients
    xi = np.abs(g.frequencies)
    dxi = 2.0 * np.pi / g.length
    a = 2.0 * b
    m0 = moment(f, 0, edge_tol=None)
    m1 = moment(f, 1, edge_tol=None)
    m2 = moment(f, 2, edge_tol=None)
    g0 = m0 * m0
    g2 = 2.0 * m1 * m1 - 2.0 * m0 * m2
    total = _singular_power_sum(xi**a * np.abs(F) ** 2, dxi, a, g0, g2)
    return float(np.sqrt(max(total, 0.0) / (2.0 * np.pi)))


def stein_constant(b: float) -> float:
    """c_b = int 4 sin^2(z/2) |z|^(-1-2b) dz, so that ||D_stein^b f||^2 = c_b ||D^b f||^2."""
    if not 0 < b < 1:
        raise ValueError("b must lie in (0, 1)")
    if b == 0.5:
        return 2.0 * np.pi
    a = 2.0 * b
    return float(4.0 * gamma(1.0 - a) * np.cos(np.pi * b) / a)


def stein_norm_of_samples(values: np.ndarray, grid: Grid1D, b: float, ell: float = 1.0) -> float:
    """||D_stein^b F||_2 for (possibly complex) samples F of a decaying function.

    D_stein^b F(x)^2 = int |F(x) - F(y)|^2 / |x - y|^(1 + 2b) dy over the whole line.
    Pairs inside the domain are summed on the grid after subtracting the local
    Taylor model (|F'|^2 h^2 + Re(F' conj F'') h^3 + (|F''|^2/4 + Re(F' conj F''')/3) h^4)
    times exp(-h^2/ell^2), whose integral is added back in closed form. The
    remainder vanishes like |h|^(4-2b) at h = 0 and its odd part cancels, so the
    rectangle rule converges fast. F is taken as zero outside the domain; those
    pairs contribute |F(x)|^2 times an explicit power integral.
    """
    if not 0 < b < 1:
        raise ValueError("b must lie in (0, 1)")
    F = np.asarray(values, dtype=complex)
    if F.shape != (grid.n,):
        raise ValueError("samples do not match the grid")
    n, dx, half = grid.n, grid.dx, 0.5 * grid.length
    x = grid.x
    xi = grid.frequencies
    Fh = np.fft.fft(F)
    d1, d2, d3 = (np.fft.ifft((1j * xi) ** m * Fh) for m in (1, 2, 3))
    c2 = np.abs(d1) ** 2
    c3 = (d1 * np.conj(d2)).real
    c4 = np.abs(d2) ** 2 / 4.0 + (d1 * np.conj(d3)).real / 3.0
    q = 1.0 + 2.0 * b
    i2 = ell ** (3.0 - q) * gamma(0.5 * (3.0 - q))
    i4 = ell ** (5.0 - q) * gamma(0.5 * (5.0 - q))

    offsets = dx * np.arange(-(n - 1), n)
    absh = np.abs(offsets)
    absh[n - 1] = 1.0
    kern = absh**-q
    gauss = np.exp(-((offsets / ell) ** 2)) * kern
    h2, h3, h4 = offsets**2 * gauss, offsets**3 * gauss, offsets**4 * gauss
    kern[n - 1] = 0.0
    for arr in (h2, h3, h4):
        arr[n - 1] = 0.0

    total = 0.0
    for i in range(n):
        sl = slice(n - 1 - i, 2 * n - 1 - i)
        diff2 = np.abs(F - F[i]) ** 2
        row = np.dot(diff2, kern[sl]) - c2[i] * h2[sl].sum() - c3[i] * h3[sl].sum() - c4[i] * h4[sl].sum()
        total += dx * row + c2[i] * i2 + c4[i] * i4
    # cells are centred on the grid points: the sampled region is [-L/2 - dx/2, L/2 - dx/2)
    right = half - 0.5 * dx - x
    left = half + 0.5 * dx + x
    outside = (right ** (-2.0 * b) + left ** (-2.0 * b)) / (2.0 * b)
    total += 2.0 * np.dot(np.abs(F) ** 2, outside)
    return float(np.sqrt(max(total * dx, 0.0)))


def stein_derivative_norm(f: RealField, b: float, ell: float = 1.0) -> float:
    """||D_stein^b f||_2 for a real decaying field."""
    return stein_norm_of_samples(f.samples, f.grid, b, ell)


# ---------------------------------------------------------------- tails


def _default_window(grid: Grid1D):
    half = 0.5 * grid.length
    return 0.25 * half, 0.45 * half


def tail_plateau(u: RealField, window=None, side: str = "both", core_tol: float = 1e-3,
                 margin_fraction: float = 0.02):
    """Mean of x^4 u over the tail window and its relative spread.

    ``side`` selects the right window [x1, x2], the mirrored left window, or the
    even part (the average of both). Returns ``(value, spread)`` where spread is
    (max - min)/|value| of the sampled plateau (inf when value is 0).
    """
    g = u.grid
    x1, x2 = window if window is not None else _default_window(g)
    half = 0.5 * g.length
    if not 0 < x1 < x2 < half * (1.0 - margin_fraction):
        raise ValueError(f"tail window ({x1}, {x2}) must satisfy 0 < x1 < x2 < L/2 - margin")
    if side not in ("both", "right", "left"):
        raise ValueError("side must be 'both', 'right' or 'left'")
    x, s = g.x, u.samples
    peak = np.max(np.abs(s))
    right = (x >= x1) & (x <= x2)
    left = (x <= -x1) & (x >= -x2)
    if peak > 0:
        for mask, used in ((right, side != "left"), (left, side != "right")):
            if used and np.max(np.abs(s[mask]), initial=0.0) >= core_tol * peak:
                raise ValueError("tail window overlaps the solution core")
    pr = x[right] ** 4 * s[right]
    pl = x[left][::-1] ** 4 * s[left][::-1]
    if side == "right":
        prof = pr
    elif side == "left":
        prof = pl
    else:
        m = min(len(pr), len(pl))
        prof = 0.5 * (pr[:m] + pl[:m])
    value = float(np.mean(prof))
    spread = float(np.ptp(prof) / abs(value)) if value != 0 else float("inf")
    return value, spread


def tail_amplitude(u: RealField, window=None, side: str = "both", core_tol: float = 1e-3) -> float:
    """Constant component of x^4 u in the far field (plateau mean)."""
    return tail_plateau(u, window, side, core_tol)[0]


# ---------------------------------------------------------------- certificate


@dataclass(frozen=True)
class CertificateReport:
    interval: tuple
    max_w: float
    max_dtw: float
    residual: float
    radii: np.ndarray
    local_integrals: np.ndarray
    global_deviation: float


def _time_derivative(u: RealField) -> np.ndarray:
    """u_t from the equation: -H u_xx - u_xxx - u u_x."""
    uxx = derivative(u, 2)
    return -hilbert(uxx).samples - derivative(u, 3).samples - u.samples * derivative(u, 1).samples


def uniqueness_certificate(u_traj, v_traj, interval, n_radii: int = 24) -> CertificateReport:
    """Quantities of the interval-uniqueness argument at t = 0 for w = u - v.

    Reports max |w|, max |w_t| and the residual max |H w_xx + w_t| on the interval,
    the local integrals R -> int_{|x - c| <= R} |H w_xx|^2 around the interval
    centre c, and ||w(t_final)||.
    """
    if u_traj.grid != v_traj.grid:
        raise ValueError("trajectories live on different grids")
    if len(u_traj) == 0 or len(v_traj) == 0:
        raise ValueError("trajectories must contain the t = 0 snapshot")
    if u_traj.times[0] != 0.0 or v_traj.times[0] != 0.0:
        raise ValueError("trajectories must start at t = 0")
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise ValueError("interval must be increasing")
    g = u_traj.grid
    u0, v0 = u_traj.states[0], v_traj.states[0]
    w0 = u0 - v0
    on = (g.x >= a) & (g.x <= b)
    if not np.any(on):
        raise ValueError("interval contains no grid points")
    wt = _time_derivative(u0) - _time_derivative(v0)
    hwxx = hilbert(derivative(w0, 2)).samples
    centre = 0.5 * (a + b)
    dist = np.abs(g.x - centre)
    radii = np.geomspace(max(g.dx, 1e-3), 0.45 * g.length, n_radii)
    local = np.array([g.dx * np.sum(hwxx[dist <= r] ** 2) for r in radii])
    return CertificateReport(
        interval=(a, b),
        max_w=float(np.max(np.abs(w0.samples[on]))),
        max_dtw=float(np.max(np.abs(wt[on]))),
        residual=float(np.max(np.abs(hwxx[on] + wt[on]))),
        radii=radii,
        local_integrals=local,
        global_deviation=(u_traj.final - v_traj.final).l2_norm(),
    )


# ---------------------------------------------------------------- reports and CSV


@dataclass(frozen=True)
class NormReport:
    l2: float
    sobolev: dict
    weighted: dict
    stein: dict
    mean: float
    first_moment: float


def norm_report(f: RealField, sobolev_s: Sequence[float] = (), weighted_r: Sequence[float] = (),
                stein_b: Sequence[float] = ()) -> NormReport:
    return NormReport(
        l2=f.l2_norm(),
        sobolev={s: sobolev_norm(f, s) for s in sobolev_s},
        weighted={r: weighted_norm(f, WeightSpec(r)) for r in weighted_r},
        stein={b: stein_derivative_norm(f, b) for b in stein_b},
        mean=moment(f, 0, edge_tol=None),
        first_moment=moment(f, 1, edge_tol=None),
    )


def write_diagnostics_csv(path, traj, norms: Sequence[float] = (), tail_window=None,
                          tail_side: str = "both") -> None:
    """One row per snapshot: time, I1, I2, I3, first_moment, H^s norms, tail amplitude.

    ``norms`` lists Sobolev exponents s for extra ``sobolev_<s>`` columns. The
    tail column is left empty when the window overlaps the solution core.
    """
    header = ["time", "I1", "I2", "I3", "first_moment"] + [f"sobolev_{s:g}" for s in norms]
    header.append("tail_amplitude")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for j, (t, u) in enumerate(zip(traj.times, traj.states)):
            d = traj.diagnostics
            if d:
                row = [d["I1"][j], d["I2"][j], d["I3"][j], d["first_moment"][j]]
            else:
                row = [u.integral(), u.l2_norm() ** 2, conserved_I3(u), moment(u, 1, edge_tol=None)]
            row += [sobolev_norm(u, s) for s in norms]
            try:
                tail = repr(float(tail_amplitude(u, tail_window, tail_side)))
            except ValueError:
                tail = ""
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in row] + [tail])
