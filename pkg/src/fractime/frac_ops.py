"""Four formulations of the order-alpha time derivative on trajectories.

All four act on the piecewise-linear interpolant, so for a trajectory with
constant history the Marchaud, Caputo, and boundary-term forms agree to
round-off; only the difference quotient of the shifted integral carries a
genuine discretization error.  Two normalizations: "paper" drops the
1/Gamma(1-alpha) prefactor, "classical" keeps it.
"""

from __future__ import annotations

import math

import numpy as np

from .core import (FracOrder, KernelQuadrature, Trajectory, as_alpha)
from .report import ResidualReport

__all__ = [
    "NORMALIZATIONS",
    "norm_scale",
    "marchaud",
    "marchaud_nodes",
    "caputo",
    "riemann_form",
    "short_marchaud",
    "formulations_agree",
    "frac_sobolev_seminorm",
]

NORMALIZATIONS = ("paper", "classical")


def norm_scale(alpha, normalization: str) -> float:
    """1 for the prefactor-free convention, 1/Gamma(1-alpha) otherwise."""
    a = as_alpha(alpha)
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    return 1.0 if normalization == "paper" else 1.0 / math.gamma(1.0 - a)


def _node_index(u: Trajectory, t: float) -> int:
    i = u.grid.index_of(t)
    if i == 0:
        raise ValueError("t must lie strictly above the grid start -M")
    return i


def _marchaud_at(u: Trajectory, i: int, kq: KernelQuadrature):
    """Marchaud value at node i via per-cell closed forms."""
    nodes = u.grid.nodes
    ti = nodes[i]
    la, lb = nodes[:i], nodes[1:i + 1]
    tau1, tau2 = ti - lb, ti - la
    s = u.slopes()[:i]
    uv = u.values
    if u.is_scalar:
        a_coef = uv[i] - uv[:i] - s * tau2
    else:
        a_coef = uv[i] - uv[:i] - s * tau2[:, None]
    lin = kq.lin_mom(tau1, tau2)
    val = (s.T @ lin).T if not u.is_scalar else float(s @ lin)
    if i > 1:
        sing = kq.sing_mom(tau1[:-1], tau2[:-1])
        val = val + ((a_coef[:-1].T @ sing).T if not u.is_scalar
                     else float(a_coef[:-1] @ sing))
    tail = (uv[i] - uv[0]) * (ti - nodes[0]) ** -kq.alpha
    return val + tail


def marchaud(u: Trajectory, t: float, alpha, normalization: str = "paper"):
    """alpha * int_{-inf}^t (u(t) - u(s)) (t-s)^(-1-alpha) ds at a grid node."""
    a = as_alpha(alpha)
    i = _node_index(u, t)
    scale = norm_scale(a, normalization)
    return scale * _marchaud_at(u, i, KernelQuadrature(a))


def marchaud_nodes(u: Trajectory, alpha, normalization: str = "paper",
                   start: int = 0) -> np.ndarray:
    """Marchaud values at every node (0 at the grid start by convention)."""
    a = as_alpha(alpha)
    kq = KernelQuadrature(a)
    scale = norm_scale(a, normalization)
    shape = (u.grid.n_nodes,) if u.is_scalar else (u.grid.n_nodes, u.values.shape[1])
    out = np.zeros(shape)
    for i in range(max(1, start), u.grid.n_nodes):
        out[i] = _marchaud_at(u, i, kq)
    return scale * out


def caputo(u: Trajectory, a_point: float, t: float, alpha,
           normalization: str = "paper"):
    """int_a^t u'(s) (t-s)^(-alpha) ds for grid nodes a_point < t."""
    al = as_alpha(alpha)
    g = u.grid
    ia, it = g.index_of(a_point), _node_index(u, t)
    if ia >= it:
        raise ValueError("need a < t")
    kq = KernelQuadrature(al)
    nodes = g.nodes
    la, lb = nodes[ia:it], nodes[ia + 1:it + 1]
    wts = kq.caputo_cell(nodes[it], la, lb)
    s = u.slopes()[ia:it]
    scale = norm_scale(al, normalization)
    val = (s.T @ wts).T if not u.is_scalar else float(s @ wts)
    return scale * val


def _shifted_integral(u: Trajectory, a_point: float, tau: float, alpha) -> float:
    """I(tau) = int_a^tau (u(s) - u(a)) (tau-s)^(-alpha) ds, any tau in (a, T]."""
    al = as_alpha(alpha)
    g = u.grid
    ia = g.index_of(a_point)
    nodes = g.nodes
    if not a_point < tau <= g.t_final + 1e-12:
        raise ValueError("tau must lie in (a, T]")
    kq = KernelQuadrature(al)
    ua = u.values[ia]
    slopes = u.slopes()
    total = 0.0 if u.is_scalar else np.zeros_like(ua)
    j = ia
    while j < g.n_nodes - 1 and nodes[j] < tau - 1e-15:
        lo, hi = nodes[j], min(nodes[j + 1], tau)
        s = slopes[j]
        w_lo = u.values[j] - ua
        # w(s) = w_lo + s*(s - lo); against (tau - s)^(-alpha):
        # int = (w_lo + s*(tau - lo)) * m0 - s * m1, moments in tau - s
        t1, t2 = tau - hi, tau - lo
        m0 = kq.weak_mom(0, t1, t2)
        m1 = kq.weak_mom(1, t1, t2)
        total = total + (w_lo + s * (tau - lo)) * m0 - s * m1
        j += 1
    return total


def riemann_form(u: Trajectory, a_point: float, t: float, alpha, dt: float,
                 normalization: str = "paper"):
    """Centered difference quotient of I(tau) at tau = t.

    The shifted integral itself is exact for the interpolant, so the only
    error is the O(dt^2)-or-worse differencing error.
    """
    g = u.grid
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t - dt < a_point - 1e-12 or t + dt > g.t_final + 1e-12:
        raise ValueError("t +/- dt falls outside the grid span")
    i_hi = _shifted_integral(u, a_point, t + dt, alpha)
    i_lo = (_shifted_integral(u, a_point, t - dt, alpha)
            if t - dt > a_point + 1e-15 else 0.0)
    scale = norm_scale(alpha, normalization)
    return scale * (i_hi - i_lo) / (2.0 * dt)


def short_marchaud(u: Trajectory, a_point: float, t: float, alpha,
                   normalization: str = "paper"):
    """(u(t)-u(a))(t-a)^(-alpha) + alpha * int_a^t (u(t)-u(s)) K ds."""
    al = as_alpha(alpha)
    g = u.grid
    ia, it = g.index_of(a_point), _node_index(u, t)
    if ia >= it:
        raise ValueError("need a < t")
    kq = KernelQuadrature(al)
    nodes = g.nodes
    ti = nodes[it]
    la, lb = nodes[ia:it], nodes[ia + 1:it + 1]
    tau1, tau2 = ti - lb, ti - la
    s = u.slopes()[ia:it]
    uv = u.values
    if u.is_scalar:
        a_coef = uv[it] - uv[ia:it] - s * tau2
    else:
        a_coef = uv[it] - uv[ia:it] - s * tau2[:, None]
    lin = kq.lin_mom(tau1, tau2)
    val = (s.T @ lin).T if not u.is_scalar else float(s @ lin)
    if it - ia > 1:
        sing = kq.sing_mom(tau1[:-1], tau2[:-1])
        val = val + ((a_coef[:-1].T @ sing).T if not u.is_scalar
                     else float(a_coef[:-1] @ sing))
    boundary = (uv[it] - uv[ia]) * (ti - nodes[ia]) ** -al
    scale = norm_scale(al, normalization)
    return scale * (val + boundary)


def formulations_agree(u: Trajectory, alpha, t_samples,
                       normalization: str = "paper") -> ResidualReport:
    """Evaluate all four formulations at the samples and compare.

    Requires constant history (the formulations only coincide then).  The
    difference-quotient form uses dt equal to the smaller adjacent spacing.
    """
    t_samples = [float(t) for t in np.atleast_1d(t_samples)]
    if not t_samples:
        raise ValueError("need at least one sample time")
    g = u.grid
    hist = u.values[: g.history_cut + 1]
    if np.max(np.abs(hist - hist[0])) > 1e-14 * max(1.0, np.max(np.abs(hist))):
        raise ValueError("formulations only agree for constant-history trajectories")
    if not u.is_scalar:
        raise ValueError("agreement report is for scalar trajectories")
    names = ("marchaud", "caputo", "riemann", "short_marchaud")
    worst = 0.0
    maxima = dict.fromkeys(names, 0.0)
    for t in t_samples:
        i = g.index_of(t)
        if not 0.0 < g.nodes[i] < g.t_final:
            raise ValueError("samples must be interior nodes of (0, T)")
        dt = min(g.spacings[i - 1], g.spacings[i])
        vals = {
            "marchaud": marchaud(u, t, alpha, normalization),
            "caputo": caputo(u, 0.0, t, alpha, normalization),
            "riemann": riemann_form(u, 0.0, t, alpha, dt, normalization),
            "short_marchaud": short_marchaud(u, 0.0, t, alpha, normalization),
        }
        scale = max(max(abs(v) for v in vals.values()), 1e-30)
        spread = max(vals.values()) - min(vals.values())
        worst = max(worst, spread / scale)
        for k, v in vals.items():
            maxima[k] = max(maxima[k], abs(v))
    return ResidualReport(
        name="formulations_agree",
        params={"alpha": as_alpha(alpha), "n_nodes": g.n_nodes,
                "normalization": normalization, "n_samples": len(t_samples)},
        terms=maxima,
        residual=worst,
    )


def frac_sobolev_seminorm(u: Trajectory, alpha) -> float:
    """[u]^2 = int_0^T int_0^T ||u(t)-u(s)||_H^2 |t-s|^(-1-alpha) ds dt.

    By symmetry this is twice the integral over s < t; the inner integral is
    exact per cell, the outer one uses the trapezoid rule on the nodes.
    Only the [0, T] segment of the trajectory enters.
    """
    a = as_alpha(alpha)
    kq = KernelQuadrature(a)
    g = u.grid
    hc = g.history_cut
    nodes = g.nodes
    wts = g.trapezoid_weights(hc, g.n_nodes - 1)
    su = u.slopes()
    uv = u.values
    total = 0.0
    for i in range(hc + 1, g.n_nodes):
        ti = nodes[i]
        la, lb = nodes[hc:i], nodes[hc + 1:i + 1]
        tau1, tau2 = ti - lb, ti - la
        s = su[hc:i]
        if u.is_scalar:
            a_coef = uv[i] - uv[hc:i] - s * tau2
        else:
            a_coef = uv[i] - uv[hc:i] - s * tau2[:, None]
        pam = 2.0 * u.pair_rows(a_coef, s)
        pmm = u.pair_rows(s, s)
        b = float(np.sum(pam * kq.lin_mom(tau1, tau2) + pmm * kq.quad_mom(tau1, tau2)))
        if i - hc > 1:
            paa = u.pair_rows(a_coef[:-1], a_coef[:-1])
            b += float(np.sum(paa * kq.sing_mom(tau1[:-1], tau2[:-1])))
        total += wts[i] * b
    # pair_rows moments carried the Marchaud prefactor alpha; remove it and
    # account for the symmetric half
    return 2.0 * total / a
