"""Integration-by-parts identities, the cutoff-transfer equation, the
G-function, and the vanishing-cutoff limit study.

Each check evaluates every term of its identity with the closed-form cell
moments and reports the normalized mismatch.  The identities are exact in the
continuum; the discrete residual is pure scheme error and must shrink under
time refinement at first order or better.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (CutoffFn, KernelQuadrature, Trajectory, as_alpha,
                   frac_energy, history_bracket, pair_integral,
                   weighted_pair_integral)
from .frac_ops import marchaud_nodes, norm_scale
from .report import ResidualReport, normalized

__all__ = [
    "IBP_VARIANTS",
    "ibp_residual",
    "GFunction",
    "g_function",
    "cutoff_transfer_residual",
    "PsiDeltaStudy",
    "psidelta_limit_study",
    "weighted_history_integral",
]

IBP_VARIANTS = ("full_line", "rewritten", "zero_to_T")


def _marchaud_traj(u: Trajectory, alpha) -> Trajectory:
    return Trajectory(u.grid, marchaud_nodes(u, alpha), mesh=u.mesh)


def _product_traj(u: Trajectory, phi: Trajectory) -> Trajectory:
    """Scalar trajectory of the pointwise H pairing (u(t), phi(t))."""
    return Trajectory(u.grid, u.pair_nodes(phi), mesh=None)


def ibp_residual(u: Trajectory, phi: Trajectory, alpha,
                 variant: str = "rewritten") -> ResidualReport:
    """Check one of the three integration-by-parts identities.

    full_line:  int phi D^a u + int u D^a phi = int D^a(u phi) + energy
    rewritten:  same LHS        = int u phi (T-t)^(-a) + energy
    zero_to_T:  int_0^T phi D^a u = int_0^T u phi (T-t)^(-a) + energy_0
                - int_0^T u D^a phi + history bracket

    The full_line variant evaluates int D^a(u phi) directly and is meaningful
    for smooth inputs only; everything else goes through the rewritten form.
    """
    u._compat(phi)
    a = as_alpha(alpha)
    if variant not in IBP_VARIANTS:
        raise ValueError(f"variant must be one of {IBP_VARIANTS}")
    if np.max(np.abs(np.atleast_1d(phi.values[0]))) > 0.0:
        raise ValueError("phi must vanish at the grid start (support violation)")
    g = u.grid
    lo, t_final = -g.m_depth, g.t_final
    du, dphi = _marchaud_traj(u, a), _marchaud_traj(phi, a)
    if variant in ("full_line", "rewritten"):
        if variant == "full_line" and np.max(np.abs(np.atleast_1d(u.values[0]))) > 0.0:
            raise ValueError("full_line needs u vanishing at the grid start")
        lhs1 = pair_integral(phi, du, lo, t_final)
        lhs2 = pair_integral(u, dphi, lo, t_final)
        energy = frac_energy(u, phi, a, lo)
        if variant == "full_line":
            prod = _product_traj(u, phi)
            rhs1 = pair_integral(_marchaud_traj(prod, a),
                                 Trajectory(g, np.ones(g.n_nodes)), lo, t_final)
        else:
            rhs1 = weighted_pair_integral(u, phi, a, t_final, lo, t_final)
        terms = {"pair_du": lhs1, "pair_dphi": lhs2,
                 "boundary": rhs1, "energy": energy}
        mismatch = lhs1 + lhs2 - rhs1 - energy
    else:
        lhs = pair_integral(phi, du, 0.0, t_final)
        boundary = weighted_pair_integral(u, phi, a, t_final, 0.0, t_final)
        energy = frac_energy(u, phi, a, 0.0)
        cross = pair_integral(u, dphi, 0.0, t_final)
        bracket = history_bracket(u, phi, a)
        terms = {"pair_du": lhs, "boundary": boundary, "energy": energy,
                 "pair_dphi": cross, "history_bracket": bracket}
        mismatch = lhs - (boundary + energy - cross + bracket)
    return ResidualReport(
        name=f"ibp_{variant}",
        params={"alpha": a, "n_nodes": g.n_nodes},
        terms=terms,
        residual=normalized(mismatch, terms.values()),
    )


@dataclass
class GFunction:
    """Node values of G(t) = alpha int_{-inf}^t u(s)[psi(t)-psi(s)] K ds.

    support_ok records that G vanishes identically (exact zeros) wherever psi
    is still constant on (-inf, t]; l2_norm is the discrete L^2(0,T;H) norm.
    """

    psi: CutoffFn
    alpha: float
    values: np.ndarray
    grid: object
    mesh: object = None
    support_ok: bool = True
    l2_norm: float = 0.0

    def as_trajectory(self) -> Trajectory:
        return Trajectory(self.grid, self.values, mesh=self.mesh)


def g_function(u: Trajectory, psi: CutoffFn, alpha) -> GFunction:
    """Evaluate the cutoff commutator kernel integral at every node.

    The inner integrand u(s)[psi(t_i) - psi(s)] is re-sampled piecewise
    linearly in s through its node values; it vanishes exactly at s = t_i, so
    the singular moment never multiplies a nonzero coefficient there.  Below
    the plateau the factor is exactly zero cell by cell.
    """
    a = as_alpha(alpha)
    kq = KernelQuadrature(a)
    g = u.grid
    nodes = g.nodes
    if psi.plateau_end < nodes[0] - 1e-12:
        raise ValueError("cutoff must still be constant at the grid start")
    psi_n = np.asarray(psi(nodes), dtype=float)
    n = g.n_nodes
    d = g.spacings
    values = np.zeros_like(u.values)
    for i in range(1, n):
        ti = nodes[i]
        if ti <= psi.plateau_end + 1e-15:
            continue  # psi constant on (-inf, t_i]: integrand identically 0
        dpsi = psi_n[i] - psi_n[:i + 1]
        wv = u.values[:i + 1] * (dpsi if u.is_scalar else dpsi[:, None])
        sw = np.diff(wv, axis=0) / (d[:i] if u.is_scalar else d[:i, None])
        tau2 = ti - nodes[:i]
        tau1 = ti - nodes[1:i + 1]
        # w(s) = B_j - sw_j * (t_i - s) on cell j, B_j extrapolated to s = t_i
        b = wv[:-1] + sw * (tau2 if u.is_scalar else tau2[:, None])
        lin = kq.lin_mom(tau1, tau2)
        val = (sw.T @ -lin).T if not u.is_scalar else float(sw @ -lin)
        if i > 1:
            sing = kq.sing_mom(tau1[:-1], tau2[:-1])
            val = val + ((b[:-1].T @ sing).T if not u.is_scalar
                         else float(b[:-1] @ sing))
        # constant tail below the grid start
        val = val + wv[0] * (ti - nodes[0]) ** -a
        values[i] = val
    traj = Trajectory(g, values, mesh=u.mesh)
    mask = nodes <= psi.plateau_end + 1e-15
    flat = np.atleast_2d(values.T).T
    support_ok = bool(np.max(np.abs(flat[mask])) == 0.0) if mask.any() else True
    l2 = float(np.sqrt(max(pair_integral(traj, traj, 0.0, g.t_final), 0.0)))
    return GFunction(psi=psi, alpha=a, values=values, grid=g, mesh=u.mesh,
                     support_ok=support_ok, l2_norm=l2)


def cutoff_transfer_residual(u, phi: Trajectory, form, psi: CutoffFn,
                             alpha) -> ResidualReport:
    """Check that psi*u satisfies the cutoff-transferred equation.

    u must be a solver output (flagged .is_solution) with vanishing history;
    its source enters on the right as int <f, psi*phi> dt, which drops out in
    the source-free setting of the underlying identity.
    """
    if not getattr(u, "is_solution", False):
        raise ValueError("u is not flagged as a solver-produced solution")
    data = u.data
    traj = u.trajectory
    a = as_alpha(alpha)
    if not traj.history_is_zero(tol=0.0):
        raise ValueError("cutoff transfer requires vanishing history data")
    g = traj.grid
    lo, t_final = -g.m_depth, g.t_final
    scale = norm_scale(a, data.normalization)
    w = traj.scale_time_profile(psi)
    t1 = scale * weighted_pair_integral(w, phi, a, t_final, lo, t_final)
    t2 = scale * frac_energy(w, phi, a, lo)
    t3 = -scale * pair_integral(w, _marchaud_traj(phi, a), lo, t_final)
    t4 = form.pairing_time_integral(w, phi, 0.0, t_final)
    gfun = g_function(traj, psi, a)
    rhs_g = scale * pair_integral(phi, gfun.as_trajectory(), lo, t_final)
    phi_psi = phi.scale_time_profile(psi)
    rhs_f = data.load_pair_integral(phi_psi, 0.0, t_final)
    terms = {"weighted": t1, "energy": t2, "pair_dphi": t3, "form": t4,
             "g_pair": rhs_g, "source": rhs_f}
    mismatch = t1 + t2 + t3 + t4 - rhs_g - rhs_f
    return ResidualReport(
        name="cutoff_transfer",
        params={"alpha": a, "n_nodes": g.n_nodes, "kind": psi.kind,
                "epsilon": psi.epsilon},
        terms=terms,
        residual=normalized(mismatch, terms.values()),
    )


def weighted_history_integral(u: Trajectory, t: float, t0: float, alpha) -> float:
    """F(t, t0) = int_{t0}^t ||u(s)||_H (t-s)^(-alpha) ds, cell-exact.

    The proof's control function: the vanishing-cutoff values are bounded by
    delta^(-1) * int ||psi_d u(t)|| F(t, t0) dt with t0 the plateau edge.
    """
    a = as_alpha(alpha)
    kq = KernelQuadrature(a)
    g = u.grid
    # snap t0 down to a node: extra nonnegative mass keeps the bound valid
    i0 = max(0, int(np.searchsorted(g.nodes, t0, side="right")) - 1)
    i1 = g.index_of(t)
    if i0 >= i1:
        raise ValueError("need t0 < t")
    norms = u.hnorm_nodes()
    nodes = g.nodes
    total = 0.0
    for j in range(i0, i1):
        lo, hi = nodes[j], nodes[j + 1]
        s = (norms[j + 1] - norms[j]) / (hi - lo)
        t1, t2 = nodes[i1] - hi, nodes[i1] - lo
        m0, m1 = kq.weak_mom(0, t1, t2), kq.weak_mom(1, t1, t2)
        # ||u(s)|| ~ piecewise linear chord; against (t-s)^(-alpha):
        total += (norms[j] + s * (nodes[i1] - lo)) * m0 - s * m1
    return float(total)


@dataclass
class PsiDeltaStudy:
    """Decay record of the double integral of the vanishing-cutoff lemma."""

    epsilon: float
    alpha: float
    deltas: list
    values: list
    abs_values: list = field(default_factory=list)
    bound_values: list = field(default_factory=list)

    def monotone_decay(self) -> bool:
        v = self.abs_values
        return all(v[i + 1] < v[i] for i in range(len(v) - 1))


def psidelta_limit_study(u: Trajectory, t_final: float, epsilon: float,
                         delta_sequence, alpha) -> PsiDeltaStudy:
    """Values of int int (psi_d u(t), u(s)[psi_d(t)-psi_d(s)]) K ds dt per delta.

    u must vanish on (-inf, 0].  Also records the proof's upper bound
    delta^(-1) int ||psi_d u(t)|| F(t, t0) dt as a diagnostic.
    """
    a = as_alpha(alpha)
    deltas = [float(d) for d in delta_sequence]
    if not deltas:
        raise ValueError("need at least one delta")
    for d in deltas:
        if d > epsilon:
            raise ValueError("every delta must satisfy delta <= epsilon")
    if not u.history_is_zero(tol=0.0):
        raise ValueError("study requires u(t) = 0 for t <= 0")
    g = u.grid
    values, bounds = [], []
    norms = u.hnorm_nodes()
    for d in deltas:
        psi = CutoffFn("piecewise_linear", t_final, epsilon, d)
        gfun = g_function(u, psi, a)
        w = u.scale_time_profile(psi)
        # e:deltazero carries no alpha prefactor; G does
        values.append(pair_integral(w, gfun.as_trajectory(), -g.m_depth,
                                    g.t_final) / a)
        # |values| <= d^-1 int ||psi_d u(t)|| F(t, 0) dt: Cauchy-Schwarz plus
        # the Lipschitz step |psi_d(t)-psi_d(s)| <= (t-s)/d, valid because u
        # vanishes below 0 so F can start at the support edge
        wts = g.trapezoid_weights(g.index_of(0.0), g.n_nodes - 1)
        wnorm = w.hnorm_nodes()
        bound = 0.0
        for i in range(g.n_nodes):
            if wts[i] == 0.0 or wnorm[i] == 0.0 or g.nodes[i] <= 0.0:
                continue
            bound += wts[i] * wnorm[i] * weighted_history_integral(u, g.nodes[i], 0.0, a)
        bounds.append(bound / d)
    return PsiDeltaStudy(epsilon=float(epsilon), alpha=a, deltas=deltas,
                         values=values, abs_values=[abs(v) for v in values],
                         bound_values=bounds)
