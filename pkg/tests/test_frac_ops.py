import math

import numpy as np
import pytest

from fractime import (Trajectory, caputo, formulations_agree,
                      frac_sobolev_seminorm, make_graded_grid, marchaud,
                      marchaud_nodes, norm_scale, riemann_form,
                      short_marchaud)


def ramp_traj(n_steps, m_depth=4.0, r=1.0):
    g = make_graded_grid(m_depth, 1.0, n_steps, r)
    return Trajectory.from_time_function(
        g, lambda t: np.maximum(np.asarray(t, dtype=float), 0.0))


def test_norm_scale():
    assert norm_scale(0.5, "paper") == 1.0
    assert np.isclose(norm_scale(0.5, "classical"), 1.0 / math.gamma(0.5))
    with pytest.raises(ValueError):
        norm_scale(0.5, "weird")


def test_marchaud_of_ramp_closed_form():
    # d^a applied to max(t, 0) at t = 1 equals 1/(1-a) in the plain
    # normalization; piecewise-linear inputs are integrated exactly
    for a in (0.25, 0.5, 0.75):
        u = ramp_traj(64)
        got = marchaud(u, 1.0, a)
        assert np.isclose(got, 1.0 / (1.0 - a), rtol=1e-12)
        classical = marchaud(u, 1.0, a, normalization="classical")
        assert np.isclose(classical, got / math.gamma(1.0 - a), rtol=1e-12)


def test_marchaud_constant_is_zero():
    g = make_graded_grid(2.0, 1.0, 32, 1.0)
    c = Trajectory(g, np.full(g.n_nodes, 3.7))
    assert marchaud(c, 1.0, 0.5) == 0.0


def test_marchaud_matches_split_form():
    # splitting the defining integral at an anchor and adding the boundary
    # term is exact whenever the trajectory is frozen before the anchor
    rng = np.random.default_rng(5)
    g = make_graded_grid(2.0, 1.0, 40, 1.0)
    for _ in range(12):
        vals = np.cumsum(rng.standard_normal(g.n_nodes)) * 0.1
        ia = int(rng.integers(0, g.history_cut + 3))
        vals[: ia + 1] = vals[ia]
        u = Trajectory(g, vals)
        a = float(rng.uniform(0.1, 0.9))
        t = float(g.nodes[g.history_cut + int(rng.integers(5, 40))])
        full = marchaud(u, t, a)
        split = short_marchaud(u, float(g.nodes[ia]), t, a)
        assert np.isclose(full, split, rtol=1e-10, atol=1e-13)


def test_marchaud_nodes_row_consistency():
    u = ramp_traj(32)
    vals = marchaud_nodes(u, 0.5)
    i = u.grid.index_of(0.5)
    assert np.isclose(vals[i], marchaud(u, 0.5, 0.5), rtol=1e-13)
    assert np.all(vals[: u.grid.history_cut + 1] == 0.0)


def test_caputo_classical_anchor():
    # Caputo derivative of t on [0, 1] at t = 1, order 1/2: 2/sqrt(pi)
    u = ramp_traj(256)
    got = caputo(u, 0.0, 1.0, 0.5, normalization="classical")
    assert np.isclose(got, 2.0 / math.sqrt(math.pi), rtol=1e-12)
    # paper normalization differs by the Gamma(1-a) factor
    plain = caputo(u, 0.0, 1.0, 0.5)
    assert np.isclose(plain, got * math.gamma(0.5), rtol=1e-12)


def test_riemann_form_approaches_marchaud():
    u = ramp_traj(512)
    a, t = 0.5, 0.625
    ref = marchaud(u, t, a)
    errs = [abs(riemann_form(u, -1.0, t, a, dt) - ref)
            for dt in (0.05, 0.025, 0.0125)]
    assert errs[0] > errs[1] > errs[2]


def test_formulations_agree_report():
    u = ramp_traj(256)
    ts = u.grid.nodes[u.grid.history_cut + 64 : -1 : 64]
    rep = formulations_agree(u, 0.5, ts)
    assert rep.passes(1e-2)
    assert rep.name == "formulations_agree"
    assert "residual" in str(rep)


def test_frac_sobolev_of_identity():
    # |t|-type seminorm of u(t) = t on (0, 1), order 1/2, no prefactor:
    # 2/((2-a)(3-a)) = 8/15
    g = make_graded_grid(1.0, 1.0, 2048, 1.0)
    u = Trajectory.from_time_function(
        g, lambda t: np.maximum(np.asarray(t, dtype=float), 0.0))
    got = frac_sobolev_seminorm(u, 0.5)
    assert np.isclose(got, 8.0 / 15.0, rtol=1e-4)


def test_frac_sobolev_scaling():
    rng = np.random.default_rng(9)
    g = make_graded_grid(1.0, 1.0, 128, 1.0)
    u = Trajectory(g, rng.standard_normal(g.n_nodes))
    s = frac_sobolev_seminorm(u, 0.3)
    s2 = frac_sobolev_seminorm(u * 2.0, 0.3)
    assert np.isclose(s2, 4.0 * s, rtol=1e-12)
