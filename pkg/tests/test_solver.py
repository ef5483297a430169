import numpy as np
import pytest

from benjamin_lab.checkpoint import MAGIC, CheckpointFormatError, checkpoint_read, checkpoint_write
from benjamin_lab.solver import (
    BoundaryError, InstabilityError, SolverConfig, Trajectory, nonlinear_rhs, solve, stable_dt, step,
)
from benjamin_lab.spectral import Grid1D, forward_transform, inverse_transform, linear_group


def gaussian_derivative(grid, amplitude=1.0, scale=1.0):
    return grid.sample(lambda x: -2 * amplitude * (x / scale) * np.exp(-(x / scale) ** 2))


def test_config_validation():
    for bad in (dict(dt=0, t_final=1), dict(dt=0.1, t_final=-1), dict(dt=0.1, t_final=1, scheme="RK45"),
                dict(dt=0.1, t_final=1, dealias="half"), dict(dt=0.1, t_final=1, snapshot_stride=0),
                dict(dt=0.1, t_final=1, model="burgers")):
        with pytest.raises(ValueError):
            SolverConfig(**bad)


def test_step_plan():
    assert SolverConfig(dt=0.1, t_final=1.0).step_plan() == (10, 0.0)
    n, rem = SolverConfig(dt=0.3, t_final=1.0).step_plan()
    assert n == 3 and rem == pytest.approx(0.1)


def test_nonlinear_rhs_examples():
    g = Grid1D(64, 2 * np.pi)
    zero = g.field(np.zeros(g.n))
    assert np.all(nonlinear_rhs(zero).samples == 0)
    assert np.max(np.abs(nonlinear_rhs(g.field(np.full(g.n, 3.0))).samples)) < 1e-13
    for k in (1, 3, 7):
        u = g.sample(lambda x: np.cos(k * x))
        expected = 0.5 * k * np.sin(2 * k * g.x)
        for dealias in ("two_thirds", "none"):
            assert np.allclose(nonlinear_rhs(u, dealias).samples, expected, atol=1e-12)


def test_dealiasing_removes_high_product_modes():
    g = Grid1D(64, 2 * np.pi)
    u = g.sample(lambda x: np.cos(20 * x))
    assert np.max(np.abs(nonlinear_rhs(u, "two_thirds").samples)) < 1e-13
    assert np.max(np.abs(nonlinear_rhs(u, "none").samples)) > 1.0


@pytest.mark.parametrize("scheme", ["IF_RK4", "ETDRK4"])
def test_step_zero_and_linear_exact(scheme):
    g = Grid1D(256, 40.0)
    assert np.all(step(g.field(np.zeros(g.n)), 0.01, scheme).samples == 0)
    u = gaussian_derivative(g)
    for dt in (1e-3, 0.05, 0.4):
        out = step(u, dt, scheme, model="linear").samples
        ref = inverse_transform(linear_group(forward_transform(u), dt)).samples
        assert np.max(np.abs(out - ref)) <= 1e-12 * np.max(np.abs(ref))


@pytest.mark.parametrize("scheme", ["IF_RK4", "ETDRK4"])
def test_step_order_four(scheme):
    g = Grid1D(256, 60.0)
    u = g.sample(lambda x: np.exp(-(x / 2) ** 2))

    def run(dt):
        return solve(u, SolverConfig(dt=dt, t_final=1.0, scheme=scheme, boundary_tol=None)).final.samples

    ref = run(0.01 / 16)
    e1, e2 = (np.max(np.abs(run(dt) - ref)) for dt in (0.01, 0.005))
    assert 12 < e1 / e2 < 20


def test_schemes_agree():
    g = Grid1D(256, 60.0)
    u = gaussian_derivative(g, scale=2.0)
    a, b = (solve(u, SolverConfig(dt=0.005, t_final=1.0, scheme=s, boundary_tol=None)).final.samples
            for s in ("IF_RK4", "ETDRK4"))
    assert np.max(np.abs(a - b)) < 1e-8


def test_solve_zero_datum():
    g = Grid1D(64, 20.0)
    traj = solve(g.field(np.zeros(g.n)), SolverConfig(dt=0.1, t_final=1.0))
    assert np.all(traj.samples() == 0)
    assert len(traj) == 11


def test_snapshot_schedule():
    g = Grid1D(128, 40.0)
    u = g.sample(lambda x: 0.1 * np.exp(-x**2))
    traj = solve(u, SolverConfig(dt=0.1, t_final=1.05, snapshot_stride=4, boundary_tol=None))
    assert traj.times.tolist() == pytest.approx([0.0, 0.4, 0.8, 1.05])
    assert set(traj.diagnostics) >= {"I1", "I2", "I3", "first_moment"}


def test_small_amplitude_mode_is_linear():
    g = Grid1D(64, 2 * np.pi)
    u = g.sample(lambda x: 1e-6 * np.cos(2 * x))
    out = solve(u, SolverConfig(dt=0.01, t_final=0.5, boundary_tol=None)).final.samples
    ref = inverse_transform(linear_group(forward_transform(u), 0.5)).samples
    assert np.max(np.abs(out - ref)) / 1e-6 < 1e-6


def test_linear_model_matches_group_at_every_snapshot():
    g = Grid1D(256, 80.0)
    u = gaussian_derivative(g)
    traj = solve(u, SolverConfig(dt=0.05, t_final=1.0, model="linear", snapshot_stride=5, boundary_tol=None))
    F = forward_transform(u)
    for t, s in zip(traj.times, traj.states):
        ref = inverse_transform(linear_group(F, t)).samples
        assert np.max(np.abs(s.samples - ref)) <= 1e-12 * np.max(np.abs(ref))


def test_conservation_regression():
    g = Grid1D(1024, 80.0)
    u = g.sample(lambda x: np.exp(-x**2 / 4))
    traj = solve(u, SolverConfig(dt=1e-4, t_final=1.0, snapshot_stride=1000, boundary_tol=None))
    d = {k: np.asarray(v) for k, v in traj.diagnostics.items()}
    assert np.max(np.abs(d["I1"] - d["I1"][0])) < 1e-10 * abs(d["I1"][0])
    assert np.max(np.abs(d["I2"] - d["I2"][0])) < 1e-8 * d["I2"][0]
    assert np.max(np.abs(d["I3"] - d["I3"][0])) < 1e-6 * abs(d["I3"][0])


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_stability_budget_and_instability():
    g = Grid1D(128, 20.0)
    u = g.sample(lambda x: 50 * np.exp(-x**2))
    limit = stable_dt(u)
    with pytest.raises(ValueError, match="stability budget"):
        solve(u, SolverConfig(dt=2 * limit, t_final=1.0, boundary_tol=None))
    with pytest.raises(InstabilityError):
        solve(u, SolverConfig(dt=0.5, t_final=200.0, boundary_tol=None, check_stability=False))


def test_boundary_error_names_time():
    g = Grid1D(128, 20.0)
    u = g.sample(lambda x: np.exp(-(x / 2) ** 2))
    with pytest.raises(BoundaryError, match="t = "):
        solve(u, SolverConfig(dt=0.01, t_final=2.0, boundary_tol=1e-12))


def test_trajectory_validation():
    g = Grid1D(16, 1.0)
    z = g.field(np.zeros(16))
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0, 0.0]), (z, z), None, g)
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0]), (z, z), None, g)


def test_checkpoint_round_trip(tmp_path):
    g = Grid1D(128, 40.0)
    traj = solve(gaussian_derivative(g), SolverConfig(dt=0.01, t_final=0.1, snapshot_stride=3, boundary_tol=None))
    path = tmp_path / "traj.benj"
    checkpoint_write(traj, path)
    back = checkpoint_read(path)
    assert back.grid == g
    assert np.array_equal(back.times, traj.times)
    assert np.array_equal(back.samples(), traj.samples())
    data = path.read_bytes()
    assert data.startswith(MAGIC) and len(data) == 8 + 24 + len(traj) * 8 * (g.n + 1)


def test_checkpoint_empty(tmp_path):
    g = Grid1D(32, 3.0)
    path = tmp_path / "empty.benj"
    checkpoint_write(Trajectory(np.array([]), (), None, g), path)
    back = checkpoint_read(path)
    assert len(back) == 0 and back.grid == g


def test_checkpoint_errors(tmp_path):
    g = Grid1D(32, 3.0)
    path = tmp_path / "one.benj"
    checkpoint_write(Trajectory(np.array([0.0]), (g.field(np.ones(32)),), None, g), path)
    data = path.read_bytes()
    bad = tmp_path / "bad.benj"
    bad.write_bytes(b"XXXXXXX\n" + data[8:])
    with pytest.raises(CheckpointFormatError, match="magic"):
        checkpoint_read(bad)
    bad.write_bytes(data[:-5])
    with pytest.raises(CheckpointFormatError, match="payload"):
        checkpoint_read(bad)
    bad.write_bytes(data[:20])
    with pytest.raises(CheckpointFormatError, match="header"):
        checkpoint_read(bad)
