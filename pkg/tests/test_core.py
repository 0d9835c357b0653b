import math

import numpy as np
import pytest
from scipy.integrate import quad

from fractime import (CutoffFn, FracOrder, KernelQuadrature, SpatialMesh,
                      TimeGrid, Trajectory, as_alpha, frac_energy,
                      history_bracket, make_graded_grid, pair_integral,
                      resample, weighted_pair_integral)


def test_frac_order_bounds():
    assert as_alpha(FracOrder(0.5)) == 0.5
    assert as_alpha(0.25) == 0.25
    for bad in (0.0, 1.0, -0.3, 1.7):
        with pytest.raises(ValueError):
            FracOrder(bad)


def test_graded_grid_nodes():
    g = make_graded_grid(1.0, 1.0, 4, 1.0)
    assert np.allclose(g.nodes, [-1.0, -0.5, 0.0, 0.25, 0.5, 0.75, 1.0])
    assert g.nodes[g.history_cut] == 0.0
    assert g.nodes[0] == -1.0 and g.nodes[-1] == 1.0
    g2 = make_graded_grid(1.0, 1.0, 4, 2.0)
    assert np.allclose(g2.nodes[g2.history_cut:], [0.0, 0.0625, 0.25, 0.5625, 1.0])
    assert np.all(g2.spacings > 0)


def test_graded_grid_validation():
    with pytest.raises(ValueError):
        make_graded_grid(1.0, 1.0, 3, 1.0)
    with pytest.raises(ValueError):
        make_graded_grid(1.0, 1.0, 8, 0.5)


def test_grid_index_and_weights():
    g = make_graded_grid(1.0, 2.0, 8, 1.5)
    for i in (0, 3, g.history_cut, g.n_nodes - 1):
        assert g.index_of(g.nodes[i]) == i
    with pytest.raises(ValueError):
        g.index_of(g.nodes[2] + 1e-3)
    w = g.trapezoid_weights(g.history_cut, g.n_nodes - 1)
    assert w[: g.history_cut].sum() == 0.0
    assert np.isclose(w.sum(), g.t_final)


def test_mesh_matrices():
    mesh = SpatialMesh(4)
    h = 0.25
    assert mesh.n_interior == 3
    assert np.allclose(np.diag(mesh.mass), 2 * h / 3)
    assert np.allclose(np.diag(mesh.mass, 1), h / 6)
    assert np.allclose(np.diag(mesh.stiffness), 2 / h)
    assert np.allclose(np.diag(mesh.stiffness, 1), -1 / h)
    # stiffness of the linear-in-x interpolant pairs to zero against itself
    # only for constants, which are excluded by the Dirichlet ends
    v = mesh.interpolate(lambda x: x * (1 - x))
    assert mesh.v_inner(v, v) > 0


def test_mesh_load_vectors():
    mesh = SpatialMesh(8)
    # constant force: load = h * 1 per interior hat (exact for P1)
    load = mesh.load_from_function(lambda x, t: np.ones_like(x), 0.0)
    assert np.allclose(load, mesh.h)
    with pytest.raises(ValueError):
        mesh.load_from_values(np.ones(mesh.n_interior))


def test_trajectory_eval_constant_extension():
    g = make_graded_grid(1.0, 1.0, 8, 1.0)
    u = Trajectory.from_time_function(g, lambda t: np.asarray(t) ** 1)
    assert u.eval(-5.0) == -1.0          # frozen at the grid start value
    assert u.eval(3.0) == 1.0            # frozen at the final value
    assert np.isclose(u.eval(0.3125), 0.3125)  # linear between nodes
    got = u.eval(np.array([-2.0, 0.5, 2.0]))
    assert np.allclose(got, [-1.0, 0.5, 1.0])


def test_trajectory_algebra_and_profiles():
    g = make_graded_grid(1.0, 1.0, 8, 1.0)
    mesh = SpatialMesh(4)
    prof = mesh.interpolate(lambda x: np.sin(np.pi * x))
    u = Trajectory.from_time_function(g, lambda t: np.cos(np.asarray(t)),
                                      mesh=mesh, profile=prof)
    w = (u + u) * 0.5 - u
    assert np.max(np.abs(w.values)) == 0.0
    psi = CutoffFn("smooth", 1.0, 0.2)
    cut = u.scale_time_profile(psi)
    tail = g.nodes >= 1.0 - 0.2 - 1e-12
    assert np.max(np.abs(cut.values[tail])) == 0.0


def test_resample_reproduces_eval():
    rng = np.random.default_rng(7)
    g = make_graded_grid(1.0, 1.0, 16, 1.0)
    u = Trajectory(g, rng.standard_normal(g.n_nodes))
    g2 = make_graded_grid(1.0, 1.0, 64, 2.0)
    v = resample(u, g2)
    assert np.allclose(v.values, u.eval(g2.nodes), atol=1e-14)


def test_cutoff_values():
    psi = CutoffFn("piecewise_linear", 1.0, 0.2, 0.1)
    # ramp value delta^-1 (T - eps - t) at t = 0.75
    assert np.isclose(psi(0.75), 0.5)
    assert psi(0.69) == 1.0 and psi(0.81) == 0.0 and psi(0.95) == 0.0
    assert np.isclose(psi.plateau_end, 0.7)
    sm = CutoffFn("smooth", 1.0, 0.2)
    assert sm(0.6) == 1.0 and sm(0.81) == 0.0
    assert np.isclose(sm(0.7), 0.5)
    assert np.isclose(sm.plateau_end, 0.6)
    with pytest.raises(ValueError):
        CutoffFn("smooth", 1.0, 0.2, 0.1)
    with pytest.raises(ValueError):
        CutoffFn("piecewise_linear", 1.0, 0.2)


def test_kernel_moments_match_quadrature():
    rng = np.random.default_rng(11)
    for _ in range(24):
        a = float(rng.uniform(0.05, 0.95))
        kq = KernelQuadrature(a)
        t1 = float(rng.uniform(0.01, 2.0))
        t2 = t1 + float(rng.uniform(0.05, 1.0))
        ref_sing = quad(lambda x: a * x ** (-1 - a), t1, t2)[0]
        ref_lin = quad(lambda x: a * x ** -a, t1, t2)[0]
        for k in range(3):
            ref_weak = quad(lambda x: x ** (k - a), t1, t2)[0]
            assert np.isclose(kq.weak_mom(k, t1, t2), ref_weak, rtol=1e-9)
        assert np.isclose(kq.sing_mom(t1, t2), ref_sing, rtol=1e-9)
        assert np.isclose(kq.lin_mom(t1, t2), ref_lin, rtol=1e-9)


def test_pair_integral_exactness():
    g = make_graded_grid(1.0, 1.0, 16, 1.0)
    u = Trajectory.from_time_function(g, lambda t: np.asarray(t))
    assert np.isclose(pair_integral(u, u, 0.0, 1.0), 1.0 / 3.0, rtol=1e-14)
    assert np.isclose(pair_integral(u, u, -1.0, 1.0), 2.0 / 3.0, rtol=1e-14)
    rng = np.random.default_rng(3)
    for _ in range(8):
        v = Trajectory(g, rng.standard_normal(g.n_nodes))
        w = Trajectory(g, rng.standard_normal(g.n_nodes))
        assert np.isclose(pair_integral(v, w, -1.0, 1.0),
                          pair_integral(w, v, -1.0, 1.0), rtol=1e-12)


def test_weighted_pair_integral_analytic():
    for a in (0.25, 0.5, 0.75):
        g = make_graded_grid(1.0, 1.0, 32, 1.0)
        one = Trajectory(g, np.ones(g.n_nodes))
        # int_0^1 (1-t)^(-a) dt
        assert np.isclose(weighted_pair_integral(one, one, a, 1.0, 0.0, 1.0),
                          1.0 / (1.0 - a), rtol=1e-12)
        t = Trajectory.from_time_function(g, lambda s: np.maximum(np.asarray(s), 0.0))
        # int_0^1 t^2 (1-t)^(-a) dt = 2 / ((1-a)(2-a)(3-a))
        ref = 2.0 / ((1 - a) * (2 - a) * (3 - a))
        assert np.isclose(weighted_pair_integral(t, t, a, 1.0, 0.0, 1.0),
                          ref, rtol=1e-12)


def test_history_bracket_analytic():
    a, m, t_fin = 0.5, 1.0, 1.0
    g = make_graded_grid(m, t_fin, 32, 1.0)
    one = Trajectory(g, np.ones(g.n_nodes))
    ref = (((t_fin + m) ** (1 - a) - t_fin ** (1 - a)) - m ** (1 - a)) / (1 - a)
    assert np.isclose(history_bracket(one, one, a), ref, rtol=1e-12)


def test_frac_energy_symmetry_and_sign():
    g = make_graded_grid(1.0, 1.0, 48, 1.0)

    def bump(t, c, w):
        t = np.asarray(t, dtype=float)
        x = (t - c) / w
        out = np.zeros_like(t)
        mask = np.abs(x) < 1
        out[mask] = np.exp(1 - 1 / (1 - x[mask] ** 2))
        return out

    u = Trajectory.from_time_function(g, lambda t: bump(t, 0.3, 0.5))
    w = Trajectory.from_time_function(g, lambda t: bump(t, 0.6, 0.3))
    a = 0.4
    euw = frac_energy(u, w, a, -1.0)
    ewu = frac_energy(w, u, a, -1.0)
    assert np.isclose(euw, ewu, rtol=1e-10)
    assert frac_energy(u, u, a, -1.0) > 0
