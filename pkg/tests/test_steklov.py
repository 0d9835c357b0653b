import numpy as np
import pytest

from fractime import (SpatialMesh, SteklovParams, Trajectory, antiderivative,
                      check_shift_identity, check_steklov_commutation,
                      check_steklov_convergence, check_switch_lemma,
                      integrate_linear, make_graded_grid, steklov)


def bump(t, c, w):
    t = np.asarray(t, dtype=float)
    x = (t - c) / w
    out = np.zeros_like(t)
    m = np.abs(x) < 1
    out[m] = np.exp(1 - 1 / (1 - x[m] ** 2))
    return out


def bump_traj(n_steps, r=2.0, c=0.4, w=0.35):
    g = make_graded_grid(1.0, 1.0, n_steps, r)
    return Trajectory.from_time_function(g, lambda t: bump(t, c, w))


def test_steklov_params_validation():
    with pytest.raises(ValueError):
        SteklovParams(0.0)
    with pytest.raises(ValueError):
        SteklovParams(0.1, "sideways")


def test_window_average_of_linear():
    g = make_graded_grid(1.0, 1.0, 64, 1.0)
    u = Trajectory.from_time_function(g, lambda t: np.asarray(t, dtype=float))
    bwd = steklov(u, SteklovParams(0.125, "backward"))
    fwd = steklov(u, SteklovParams(0.125, "forward"))
    i = g.index_of(0.5)
    assert np.isclose(bwd.values[i], 0.4375, rtol=1e-13)
    assert np.isclose(fwd.values[i], 0.5625, rtol=1e-13)
    c = Trajectory(g, np.full(g.n_nodes, 2.5))
    assert np.allclose(steklov(c, SteklovParams(0.2)).values, 2.5)


def test_integrate_linear_constant_extension():
    g = make_graded_grid(1.0, 1.0, 16, 1.0)
    u = Trajectory.from_time_function(g, lambda t: np.asarray(t, dtype=float))
    # before the grid the reconstruction is frozen at u(-1) = -1
    assert np.isclose(integrate_linear(u, -3.0, -1.0), -2.0, rtol=1e-14)
    assert np.isclose(integrate_linear(u, 0.0, 1.0), 0.5, rtol=1e-14)
    assert np.isclose(integrate_linear(u, 1.0, 2.0), 1.0, rtol=1e-14)


def test_antiderivative_of_ramp():
    g = make_graded_grid(1.0, 1.0, 128, 1.0)
    u = Trajectory.from_time_function(
        g, lambda t: np.maximum(np.asarray(t, dtype=float), 0.0))
    q = antiderivative(u)
    pos = g.nodes[g.history_cut:]
    assert np.allclose(q.values[g.history_cut:], pos ** 2 / 2, atol=1e-14)


def test_switch_lemma_decay():
    reports = [check_switch_lemma(bump_traj(n), 0.5) for n in (128, 256, 512)]
    res = [r.residual for r in reports]
    assert res[-1] <= 5e-4
    assert res[0] / res[1] >= 2.0 and res[1] / res[2] >= 2.0


def test_commutation_decay():
    reports = [check_steklov_commutation(bump_traj(n), 0.5, 1 / 16)
               for n in (128, 256, 512)]
    res = [r.residual for r in reports]
    assert res[-1] <= 5e-4
    assert res[0] / res[1] >= 2.0 and res[1] / res[2] >= 2.0


def test_shift_identity_decay():
    res = []
    for n in (128, 256, 512):
        g = make_graded_grid(1.0, 1.0, n, 2.0)
        u = Trajectory.from_time_function(g, lambda t: bump(t, 0.4, 0.35))
        eta = Trajectory.from_time_function(g, lambda t: bump(t, 0.45, 0.25))
        res.append(check_shift_identity(u, eta, 1 / 16, alpha=0.5).residual)
    assert res[-1] <= 5e-5
    assert res[0] / res[1] >= 3.0 and res[1] / res[2] >= 3.0


def test_shift_identity_support_guard():
    g = make_graded_grid(1.0, 1.0, 128, 1.0)
    late = Trajectory.from_time_function(g, lambda t: bump(t, 0.95, 0.2))
    ok = Trajectory.from_time_function(g, lambda t: bump(t, 0.4, 0.3))
    with pytest.raises(ValueError):
        check_shift_identity(late, ok, 1 / 16)


def test_steklov_convergence_ratios():
    g = make_graded_grid(1.0, 1.0, 1024, 1.0)
    mesh = SpatialMesh(16)
    prof = mesh.interpolate(lambda x: np.sin(np.pi * x))
    f = Trajectory.from_time_function(g, lambda t: bump(t, 0.45, 0.4),
                                      mesh=mesh, profile=prof)
    rep = check_steklov_convergence(f, (1 / 8, 1 / 16, 1 / 32, 1 / 64))
    dists = [d for _, d in rep.series]
    assert all(b < a for a, b in zip(dists, dists[1:]))
    for a, b in zip(dists, dists[1:]):
        assert a / b >= 1.5
