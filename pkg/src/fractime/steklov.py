"""Window averages, the running integral, and their interplay with the
fractional derivative.

The backward average (1/h) int_{t-h}^t and forward average (1/h) int_t^{t+h}
are computed exactly for the piecewise-linear reconstruction (the result is
piecewise quadratic) and re-sampled onto the grid through node values.  The
checks below verify, at the discrete level, that the running integral and the
window averages commute with the order-alpha derivative and that the window
can be shifted across an H pairing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (Trajectory, as_alpha, frac_energy, pair_integral,
                   weighted_pair_integral)
from .frac_ops import marchaud_nodes
from .report import ResidualReport, normalized

__all__ = [
    "SteklovParams",
    "integrate_linear",
    "steklov",
    "antiderivative",
    "check_switch_lemma",
    "check_steklov_commutation",
    "check_shift_identity",
    "check_steklov_convergence",
]


@dataclass(frozen=True)
class SteklovParams:
    h: float
    direction: str = "backward"

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("averaging window h must be positive")
        if self.direction not in ("backward", "forward"):
            raise ValueError("direction must be 'backward' or 'forward'")


def effective_window(grid, h: float) -> float:
    """Snap h to the nearest positive multiple of the spacing if uniform."""
    d = grid.spacings
    if np.max(d) - np.min(d) <= 1e-12 * np.max(d):
        step = float(np.mean(d))
        return max(1, round(h / step)) * step
    return float(h)


def _cumint(u: Trajectory) -> np.ndarray:
    """Exact node values of int_{-M}^t of the reconstruction (trapezoid)."""
    v = u.values
    d = u.grid.spacings
    mids = 0.5 * (v[1:] + v[:-1])
    segs = mids * (d if u.is_scalar else d[:, None])
    zero = np.zeros_like(v[:1])
    return np.concatenate([zero, np.cumsum(segs, axis=0)])


def _running_at(u: Trajectory, q: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Evaluate the running integral at arbitrary points.

    Constant extension of u outside the grid makes the running integral
    linear there: q0 + (x - t0) u0 below, qN + (x - T) uT above.
    """
    g = u.grid
    nodes = g.nodes
    x = np.asarray(x, dtype=float)
    i = np.clip(np.searchsorted(nodes, x, side="right") - 1, 0, nodes.size - 2)
    dx = x - nodes[i]
    s = u.slopes()
    if u.is_scalar:
        inner = q[i] + u.values[i] * dx + 0.5 * s[i] * dx * dx
        below = q[0] + u.values[0] * (x - nodes[0])
        above = q[-1] + u.values[-1] * (x - nodes[-1])
    else:
        dxc = dx[..., None]
        inner = q[i] + u.values[i] * dxc + 0.5 * s[i] * dxc * dxc
        below = q[0] + u.values[0] * (x - nodes[0])[..., None]
        above = q[-1] + u.values[-1] * (x - nodes[-1])[..., None]
    out = np.where((x < nodes[0])[..., None] if not u.is_scalar else x < nodes[0],
                   below, inner)
    out = np.where((x > nodes[-1])[..., None] if not u.is_scalar else x > nodes[-1],
                   above, out)
    return out


def integrate_linear(u: Trajectory, lo: float, hi: float):
    """int_lo^hi of the reconstruction, constant extensions included."""
    if hi < lo:
        raise ValueError("need lo <= hi")
    q = _cumint(u)
    vals = _running_at(u, q, np.asarray([lo, hi]))
    res = vals[1] - vals[0]
    return float(res) if u.is_scalar else res


def steklov(u: Trajectory, p: SteklovParams) -> Trajectory:
    """Window average of u, re-sampled to the grid through node values."""
    h = effective_window(u.grid, p.h)
    nodes = u.grid.nodes
    q = _cumint(u)
    if p.direction == "backward":
        lo, hi = nodes - h, nodes
    else:
        lo, hi = nodes, nodes + h
    vals = (_running_at(u, q, hi) - _running_at(u, q, lo)) / h
    return Trajectory(u.grid, vals, mesh=u.mesh)


def antiderivative(u: Trajectory) -> Trajectory:
    """Running integral from -infinity; requires vanishing history at -M."""
    v0 = np.atleast_1d(u.values[0])
    if np.max(np.abs(v0)) != 0.0:
        raise ValueError("running integral needs u(-M) = 0 (vanishing past)")
    return Trajectory(u.grid, _cumint(u), mesh=u.mesh)


def _as_traj(u: Trajectory, values) -> Trajectory:
    return Trajectory(u.grid, values, mesh=u.mesh)


def check_switch_lemma(u: Trajectory, alpha) -> ResidualReport:
    """Running integral of the derivative vs derivative of the running integral."""
    a = as_alpha(alpha)
    d_nodes = marchaud_nodes(u, a)
    lhs = antiderivative(_as_traj(u, d_nodes)).values
    rhs = marchaud_nodes(antiderivative(u), a)
    gap = np.max(np.abs(lhs - rhs))
    scale = max(np.max(np.abs(lhs)), np.max(np.abs(rhs)))
    return ResidualReport(
        name="switch_lemma",
        params={"alpha": a, "n_nodes": u.grid.n_nodes},
        terms={"sup_lhs": float(np.max(np.abs(lhs))),
               "sup_rhs": float(np.max(np.abs(rhs)))},
        residual=normalized(gap, [scale]),
    )


def check_steklov_commutation(u: Trajectory, alpha, h: float) -> ResidualReport:
    """Backward average of the derivative vs derivative of the average."""
    a = as_alpha(alpha)
    p = SteklovParams(h, "backward")
    lhs = steklov(_as_traj(u, marchaud_nodes(u, a)), p).values
    rhs = marchaud_nodes(steklov(u, p), a)
    gap = np.max(np.abs(lhs - rhs))
    scale = max(np.max(np.abs(lhs)), np.max(np.abs(rhs)))
    return ResidualReport(
        name="steklov_commutation",
        params={"alpha": a, "h": effective_window(u.grid, h),
                "n_nodes": u.grid.n_nodes},
        terms={"sup_lhs": float(np.max(np.abs(lhs))),
               "sup_rhs": float(np.max(np.abs(rhs)))},
        residual=normalized(gap, [scale]),
    )


def _check_support(traj: Trajectory, lo: float, label: str) -> None:
    nodes = traj.grid.nodes
    mask = nodes >= lo - 1e-12
    if np.max(np.abs(np.atleast_2d(traj.values.T).T[mask])) > 0.0:
        raise ValueError(f"{label} must vanish on [T-2h, T]")


def check_shift_identity(u: Trajectory, eta: Trajectory, h: float,
                         alpha=None) -> ResidualReport:
    """Move the window across the pairing: int (u, eta_bwd) = int (u_fwd, eta).

    With alpha given, additionally checks the weighted-plus-energy version
    term by term (both sides combine the (T-t)^(-alpha) pairing with the
    double-kernel energy).  Both u and eta must vanish on [T-2h, T] and at
    the grid start.
    """
    u._compat(eta)
    g = u.grid
    h_eff = effective_window(g, h)
    t_final = g.t_final
    _check_support(u, t_final - 2.0 * h_eff, "u")
    _check_support(eta, t_final - 2.0 * h_eff, "eta")
    for traj, label in ((u, "u"), (eta, "eta")):
        if np.max(np.abs(np.atleast_1d(traj.values[0]))) > 0.0:
            raise ValueError(f"{label} must vanish at the grid start")
    eta_b = steklov(eta, SteklovParams(h_eff, "backward"))
    u_f = steklov(u, SteklovParams(h_eff, "forward"))
    lo = -g.m_depth
    lhs = pair_integral(u, eta_b, lo, t_final)
    rhs = pair_integral(u_f, eta, lo, t_final)
    terms = {"pair_bwd": lhs, "pair_fwd": rhs}
    gap = abs(lhs - rhs)
    scale_terms = [lhs, rhs]
    if alpha is not None:
        a = as_alpha(alpha)
        w_l = weighted_pair_integral(u, eta_b, a, t_final, lo, t_final)
        w_r = weighted_pair_integral(u_f, eta, a, t_final, lo, t_final)
        e_l = frac_energy(u, eta_b, a, lo)
        e_r = frac_energy(u_f, eta, a, lo)
        terms.update({"weighted_bwd": w_l, "weighted_fwd": w_r,
                      "energy_bwd": e_l, "energy_fwd": e_r})
        gap = max(gap, abs((w_l + e_l) - (w_r + e_r)))
        scale_terms += [w_l, w_r, e_l, e_r]
    return ResidualReport(
        name="shift_identity",
        params={"h": h_eff, "n_nodes": g.n_nodes,
                **({"alpha": as_alpha(alpha)} if alpha is not None else {})},
        terms=terms,
        residual=normalized(gap, scale_terms),
    )


def check_steklov_convergence(f: Trajectory, h_sequence,
                              space: str = "V") -> ResidualReport:
    """L^2(0,T) distances ||f_h - f|| for a decreasing window sequence.

    f is treated as extended by zero outside [0, T]; for the forward average
    to respect that, f must vanish at T (interior-supported inputs).
    space "V" uses the stiffness pairing, "H" the mass pairing; scalar
    trajectories use plain absolute values.
    """
    h_sequence = [float(h) for h in h_sequence]
    if not h_sequence:
        raise ValueError("need at least one window size")
    if np.max(np.abs(np.atleast_1d(f.values[-1]))) > 0.0:
        raise ValueError("f must vanish at T (zero extension beyond T)")
    if space not in ("V", "H"):
        raise ValueError("space must be 'V' or 'H'")
    g = f.grid
    pairing = f.mesh.stiffness if (f.mesh is not None and space == "V") else None
    series = []
    for h in h_sequence:
        fh = steklov(f, SteklovParams(h, "forward"))
        diff = fh - f
        if pairing is None:
            dist2 = pair_integral(diff, diff, 0.0, g.t_final)
        else:
            # Simpson-exact in time with the stiffness pairing in space
            dist2 = _pair_integral_matrix(diff, pairing, 0.0, g.t_final)
        series.append((h, float(np.sqrt(max(dist2, 0.0)))))
    residual = series[-1][1]
    return ResidualReport(
        name="steklov_convergence",
        params={"n_nodes": g.n_nodes, "space": space},
        terms={"first_distance": series[0][1], "last_distance": series[-1][1]},
        residual=residual,
        series=series,
    )


def _pair_integral_matrix(d: Trajectory, mat: np.ndarray, lo: float, hi: float) -> float:
    g = d.grid
    i0, i1 = g.index_of(lo), g.index_of(hi)
    va, vb = d.values[i0:i1], d.values[i0 + 1:i1 + 1]
    s = (vb - va)
    dd = g.spacings[i0:i1][:, None]
    s = s / dd
    c0 = np.einsum("ij,ij->i", va, va @ mat)
    c1 = 2.0 * np.einsum("ij,ij->i", va, s @ mat)
    c2 = np.einsum("ij,ij->i", s, s @ mat)
    w = g.spacings[i0:i1]
    return float(np.sum(c0 * w + c1 * w * w / 2.0 + c2 * w ** 3 / 3.0))
