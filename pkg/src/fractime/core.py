"""Time grids, piecewise-linear trajectories, P1 elements, cutoffs, kernel moments.

Everything downstream assumes trajectories are piecewise linear in time with
constant extension outside the grid.  Under that assumption every singular
integral in the package reduces to per-cell moments of tau**(-1-alpha) and
tau**(-alpha), which are evaluated in closed form here.  No adaptive
quadrature is used outside the test oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "FracOrder",
    "TimeGrid",
    "make_graded_grid",
    "SpatialMesh",
    "h_inner",
    "Trajectory",
    "resample",
    "CutoffFn",
    "eval_cutoff",
    "KernelQuadrature",
    "pair_integral",
    "weighted_pair_integral",
    "history_bracket",
    "frac_energy",
    "frac_energy_nodes",
]

_FLOOR = 1e-30  # normalization floor shared by all residual reports


@dataclass(frozen=True)
class FracOrder:
    """Order of the fractional time derivative, restricted to 0 < alpha < 1."""

    alpha: float

    def __post_init__(self):
        a = self.alpha
        if not (isinstance(a, (int, float)) and math.isfinite(a)):
            raise ValueError("fractional order must be a finite number")
        if not 0.0 < a < 1.0:
            raise ValueError(f"fractional order must satisfy 0 < alpha < 1, got {a}")


def as_alpha(alpha) -> float:
    """Accept FracOrder or a bare float; validate either way."""
    if isinstance(alpha, FracOrder):
        return float(alpha.alpha)
    return float(FracOrder(float(alpha)).alpha)


class TimeGrid:
    """Strictly increasing nodes t_0 = -M < ... < 0 < ... < t_N = T.

    Both 0 and T must be nodes; ``history_cut`` is the index of the node at 0.
    Nodes on [-M, 0] are the history segment, nodes on [0, T] the evolution
    segment.  Instances are immutable.
    """

    __slots__ = ("nodes", "history_cut", "r", "spacings")

    def __init__(self, nodes, r: float = 1.0):
        nodes = np.array(nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 3:
            raise ValueError("grid needs at least nodes -M, 0, T")
        d = np.diff(nodes)
        if not np.all(d > 0):
            raise ValueError("grid nodes must be strictly increasing")
        if not nodes[0] < 0.0:
            raise ValueError("grid must start at -M with M > 0")
        if not nodes[-1] > 0.0:
            raise ValueError("grid must end at T > 0")
        hc = np.flatnonzero(nodes == 0.0)
        if hc.size != 1:
            raise ValueError("0 must be a grid node")
        nodes.setflags(write=False)
        d.setflags(write=False)
        self.nodes = nodes
        self.history_cut = int(hc[0])
        self.r = float(r)
        self.spacings = d

    def __setattr__(self, name, value):
        if name in self.__slots__ and hasattr(self, "spacings"):
            raise AttributeError("TimeGrid is immutable")
        object.__setattr__(self, name, value)

    @property
    def m_depth(self) -> float:
        return -float(self.nodes[0])

    @property
    def t_final(self) -> float:
        return float(self.nodes[-1])

    @property
    def n_nodes(self) -> int:
        return self.nodes.size

    def __repr__(self):
        return (f"TimeGrid(M={self.m_depth:g}, T={self.t_final:g}, "
                f"n_nodes={self.n_nodes}, r={self.r:g})")

    def index_of(self, t: float) -> int:
        """Index of the node equal to t (up to round-off); error otherwise."""
        i = int(np.searchsorted(self.nodes, t))
        tol = 1e-12 * max(1.0, self.m_depth + self.t_final)
        for j in (i - 1, i, i + 1):
            if 0 <= j < self.n_nodes and abs(self.nodes[j] - t) <= tol:
                return j
        raise ValueError(f"t={t!r} is not a grid node")

    def trapezoid_weights(self, lo: int, hi: int) -> np.ndarray:
        """Composite trapezoid weights for node indices lo..hi inclusive."""
        if not 0 <= lo < hi < self.n_nodes:
            raise ValueError("bad trapezoid index range")
        w = np.zeros(self.n_nodes)
        d = self.spacings[lo:hi]
        w[lo:hi] += 0.5 * d
        w[lo + 1:hi + 1] += 0.5 * d
        return w


def make_graded_grid(m_depth: float, t_final: float, n_steps: int, r: float = 1.0) -> TimeGrid:
    """Grid on [-M, T]: uniform history, evolution nodes T*(k/N)**r.

    The history segment gets ceil(N*M/(2T)) uniform cells, so for M = T the
    history spacing is twice the mean evolution spacing.
    """
    if m_depth <= 0 or t_final <= 0:
        raise ValueError("need M > 0 and T > 0")
    n_steps = int(n_steps)
    if n_steps < 4:
        raise ValueError("need at least 4 evolution steps")
    if r < 1.0:
        raise ValueError("grading exponent must satisfy r >= 1")
    k = np.arange(n_steps + 1, dtype=float)
    pos = t_final * (k / n_steps) ** r
    pos[0], pos[-1] = 0.0, t_final  # exact endpoints
    n_hist = max(1, math.ceil(n_steps * m_depth / (2.0 * t_final) - 1e-12))
    hist = np.linspace(-m_depth, 0.0, n_hist + 1)[:-1]
    return TimeGrid(np.concatenate([hist, pos]), r=r)


class SpatialMesh:
    """Uniform P1 Lagrange mesh on (0,1), homogeneous Dirichlet ends.

    Coefficient vectors carry the n_cells-1 interior hat functions only.
    Mass and stiffness are the exact tridiagonal P1 matrices.
    """

    __slots__ = ("n_cells", "h", "x", "x_interior", "mass", "stiffness")

    def __init__(self, n_cells: int):
        n_cells = int(n_cells)
        if n_cells < 2:
            raise ValueError("need at least 2 cells for one interior node")
        h = 1.0 / n_cells
        m = n_cells - 1
        mass = np.zeros((m, m))
        stiff = np.zeros((m, m))
        idx = np.arange(m)
        mass[idx, idx] = 2.0 * h / 3.0
        stiff[idx, idx] = 2.0 / h
        mass[idx[:-1], idx[:-1] + 1] = h / 6.0
        mass[idx[:-1] + 1, idx[:-1]] = h / 6.0
        stiff[idx[:-1], idx[:-1] + 1] = -1.0 / h
        stiff[idx[:-1] + 1, idx[:-1]] = -1.0 / h
        for a in (mass, stiff):
            a.setflags(write=False)
        self.n_cells = n_cells
        self.h = h
        self.x = np.linspace(0.0, 1.0, n_cells + 1)
        self.x_interior = self.x[1:-1]
        self.mass = mass
        self.stiffness = stiff

    @property
    def n_interior(self) -> int:
        return self.n_cells - 1

    def _check(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape[-1] != self.n_interior:
            raise ValueError(
                f"vector length {u.shape[-1]} does not match "
                f"{self.n_interior} interior nodes")
        return u

    def h_inner(self, u, w) -> float:
        """Mass-matrix pairing of two interior coefficient vectors."""
        u, w = self._check(u), self._check(w)
        return float(u @ self.mass @ w)

    def v_inner(self, u, w) -> float:
        """Stiffness pairing (the H^1_0 energy inner product)."""
        u, w = self._check(u), self._check(w)
        return float(u @ self.stiffness @ w)

    def interpolate(self, f, t=None) -> np.ndarray:
        """Interior nodal values of f(x) or f(x, t)."""
        xi = self.x_interior
        return np.asarray(f(xi) if t is None else f(xi, t), dtype=float)

    def load_from_values(self, f_nodes) -> np.ndarray:
        """Loads <f, phi_i> for f the P1 interpolant given at ALL mesh nodes."""
        f_nodes = np.asarray(f_nodes, dtype=float)
        if f_nodes.shape[-1] != self.n_cells + 1:
            raise ValueError("need values at every mesh node incl. boundary")
        h = self.h
        return (h / 6.0) * (f_nodes[..., :-2] + 4.0 * f_nodes[..., 1:-1] + f_nodes[..., 2:])

    def load_from_function(self, f, t) -> np.ndarray:
        return self.load_from_values(np.asarray(f(self.x, t), dtype=float))


def h_inner(mesh: SpatialMesh, u, w) -> float:
    return mesh.h_inner(u, w)


class Trajectory:
    """Piecewise-linear-in-time nodal values on a TimeGrid.

    values has shape (n_nodes,) for scalar paths or (n_nodes, m) for interior
    P1 coefficients on ``mesh``.  Extension outside [-M, T] is constant by the
    first / last value; that is what every kernel integral below assumes.
    """

    __slots__ = ("grid", "values", "mesh")

    def __init__(self, grid: TimeGrid, values, mesh: SpatialMesh | None = None):
        values = np.array(values, dtype=float)
        if values.shape[0] != grid.n_nodes:
            raise ValueError("values must have one row per grid node")
        if values.ndim not in (1, 2):
            raise ValueError("values must be 1-d (scalar) or 2-d (spatial)")
        if mesh is not None:
            if values.ndim != 2 or values.shape[1] != mesh.n_interior:
                raise ValueError("spatial values must match mesh interior size")
        values.setflags(write=False)
        self.grid = grid
        self.values = values
        self.mesh = mesh

    # -- construction -----------------------------------------------------
    @classmethod
    def from_time_function(cls, grid, fn, mesh=None, profile=None):
        """Sample scalar fn(t) at the nodes; tensorize with a spatial profile."""
        g = np.asarray([float(fn(t)) for t in grid.nodes])
        if profile is None:
            return cls(grid, g, mesh=None)
        profile = np.asarray(profile, dtype=float)
        return cls(grid, np.outer(g, profile), mesh=mesh)

    @classmethod
    def from_space_time(cls, grid, mesh, fn):
        vals = np.stack([mesh.interpolate(fn, t) for t in grid.nodes])
        return cls(grid, vals, mesh=mesh)

    # -- algebra ----------------------------------------------------------
    def _like(self, values):
        return Trajectory(self.grid, values, mesh=self.mesh)

    def __add__(self, other):
        self._compat(other)
        return self._like(self.values + other.values)

    def __sub__(self, other):
        self._compat(other)
        return self._like(self.values - other.values)

    def __mul__(self, c):
        return self._like(self.values * float(c))

    __rmul__ = __mul__

    def __neg__(self):
        return self._like(-self.values)

    def _compat(self, other):
        if not isinstance(other, Trajectory) or other.grid is not self.grid:
            raise ValueError("trajectories must share a grid")
        if (self.mesh is None) != (other.mesh is None):
            raise ValueError("trajectories must share a spatial mesh")

    def scale_time_profile(self, fn):
        """Multiply nodal values by the scalar profile fn(t)."""
        g = np.asarray(fn(self.grid.nodes), dtype=float)
        vals = self.values * (g if self.values.ndim == 1 else g[:, None])
        return self._like(vals)

    # -- evaluation -------------------------------------------------------
    @property
    def is_scalar(self) -> bool:
        return self.values.ndim == 1

    def eval(self, t):
        """Evaluate the interpolant; constant extension outside the grid."""
        t = np.asarray(t, dtype=float)
        nodes = self.grid.nodes
        if self.is_scalar:
            return np.interp(t, nodes, self.values)
        i = np.clip(np.searchsorted(nodes, t, side="right") - 1, 0, nodes.size - 2)
        d = self.grid.spacings[i]
        w = np.clip((t - nodes[i]) / d, 0.0, 1.0)
        lo, hi = self.values[i], self.values[i + 1]
        return lo + np.asarray(w)[..., None] * (hi - lo)

    def slopes(self) -> np.ndarray:
        d = self.grid.spacings
        dv = np.diff(self.values, axis=0)
        return dv / (d if self.is_scalar else d[:, None])

    # -- pairings ---------------------------------------------------------
    def _apply_mass(self, arr):
        if self.mesh is None:
            return arr
        return arr @ self.mesh.mass

    def pair_rows(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Row-wise H pairing of stacked value arrays (mass-weighted if meshed)."""
        if self.is_scalar:
            return np.asarray(a * b, dtype=float)
        return np.einsum("...i,...i->...", a, self._apply_mass(b))

    def pair_nodes(self, other: Trajectory) -> np.ndarray:
        self._compat(other)
        return self.pair_rows(self.values, other.values)

    def hnorm_nodes(self) -> np.ndarray:
        return np.sqrt(np.maximum(self.pair_rows(self.values, self.values), 0.0))

    def history_is_zero(self, tol: float = 0.0) -> bool:
        hist = self.values[: self.grid.history_cut + 1]
        return bool(np.max(np.abs(hist)) <= tol) if hist.size else True


def resample(u: Trajectory, new_grid: TimeGrid) -> Trajectory:
    """Sample u's interpolant on another grid (exact if nodes are nested)."""
    return Trajectory(new_grid, u.eval(new_grid.nodes), mesh=u.mesh)


@dataclass(frozen=True)
class CutoffFn:
    """Time cutoff psi: 1 up to its ramp, 0 near t_final, nonincreasing.

    kind "smooth": quintic smoothstep ramp on [t_final-2*epsilon,
    t_final-epsilon], identically 0 on the last epsilon.  kind
    "piecewise_linear": 1 up to t_final-epsilon-delta, linear ramp of width
    delta, 0 from t_final-epsilon on.
    """

    kind: str
    t_final: float
    epsilon: float
    delta: float | None = None

    def __post_init__(self):
        if self.kind not in ("smooth", "piecewise_linear"):
            raise ValueError(f"unknown cutoff kind {self.kind!r}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.kind == "piecewise_linear":
            if self.delta is None or not 0 < self.delta:
                raise ValueError("piecewise_linear cutoff needs delta > 0")
        elif self.delta is not None:
            raise ValueError("delta only applies to the piecewise_linear kind")

    @property
    def plateau_end(self) -> float:
        """Largest t below which psi is identically 1."""
        if self.kind == "smooth":
            return self.t_final - 2.0 * self.epsilon
        return self.t_final - self.epsilon - self.delta

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "smooth":
            x = (t - (self.t_final - 2.0 * self.epsilon)) / self.epsilon
            x = np.clip(x, 0.0, 1.0)
            s = x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
            out = 1.0 - s
        else:
            out = np.clip((self.t_final - self.epsilon - t) / self.delta, 0.0, 1.0)
        return out if out.ndim else float(out)


def eval_cutoff(psi: CutoffFn, t):
    return psi(t)


@dataclass(frozen=True)
class KernelQuadrature:
    """Closed-form cell moments of the kernels tau**(-1-alpha), tau**(-alpha).

    sing/lin/quad carry the Marchaud prefactor alpha; weak_mom does not.
    All methods are vectorized over cell arrays; tau1 may be 0 wherever the
    corresponding exponent stays integrable.
    """

    alpha: float

    def __post_init__(self):
        FracOrder(self.alpha)

    def sing_mom(self, tau1, tau2):
        """alpha * int tau^(-1-alpha) over [tau1, tau2]; needs tau1 > 0."""
        a = self.alpha
        return tau1 ** -a - tau2 ** -a

    def lin_mom(self, tau1, tau2):
        """alpha * int tau^(-alpha) over [tau1, tau2]."""
        a = self.alpha
        return (a / (1.0 - a)) * (tau2 ** (1.0 - a) - tau1 ** (1.0 - a))

    def quad_mom(self, tau1, tau2):
        """alpha * int tau^(1-alpha) over [tau1, tau2]."""
        a = self.alpha
        return (a / (2.0 - a)) * (tau2 ** (2.0 - a) - tau1 ** (2.0 - a))

    def weak_mom(self, k: int, tau1, tau2):
        """int tau^(k-alpha) over [tau1, tau2] for k = 0, 1, 2 (no prefactor)."""
        p = k + 1.0 - self.alpha
        return (tau2 ** p - tau1 ** p) / p

    def caputo_cell(self, t, a, b):
        """int_a^b (t-s)^(-alpha) ds for a <= b <= t."""
        return self.weak_mom(0, t - b, t - a)


# ---------------------------------------------------------------------------
# trajectory-pair integrals (shared by the identity, averaging, weak-form code)

def _pair_coeffs(u: Trajectory, w: Trajectory):
    """Per-cell quadratic coefficients of t -> (u(t), w(t))_H.

    On cell [a,b] the pairing is c0 + c1*(t-a) + c2*(t-a)**2; returns (c0, c1, c2)
    as arrays over cells.
    """
    ua, wa = u.values[:-1], w.values[:-1]
    su, sw = u.slopes(), w.slopes()
    c0 = u.pair_rows(ua, wa)
    c1 = u.pair_rows(ua, sw) + u.pair_rows(su, wa)
    c2 = u.pair_rows(su, sw)
    return c0, c1, c2


def _cell_range(grid: TimeGrid, lo: float, hi: float):
    i0, i1 = grid.index_of(lo), grid.index_of(hi)
    if i0 >= i1:
        raise ValueError("empty integration range")
    return i0, i1


def pair_integral(u: Trajectory, w: Trajectory, lo: float, hi: float) -> float:
    """int_lo^hi (u(t), w(t))_H dt, exact for the interpolants (Simpson)."""
    u._compat(w)
    i0, i1 = _cell_range(u.grid, lo, hi)
    c0, c1, c2 = _pair_coeffs(u, w)
    d = u.grid.spacings[i0:i1]
    c0, c1, c2 = c0[i0:i1], c1[i0:i1], c2[i0:i1]
    return float(np.sum(c0 * d + c1 * d * d / 2.0 + c2 * d ** 3 / 3.0))


def weighted_pair_integral(u: Trajectory, w: Trajectory, alpha, cpoint: float,
                           lo: float, hi: float) -> float:
    """int_lo^hi (u(t), w(t))_H (cpoint - t)^(-alpha) dt, cell-exact.

    Requires hi <= cpoint; the endpoint singularity at hi == cpoint is
    integrable and handled in closed form.
    """
    u._compat(w)
    a = as_alpha(alpha)
    if hi > cpoint + 1e-12:
        raise ValueError("weight point must lie at or beyond the upper limit")
    kq = KernelQuadrature(a)
    i0, i1 = _cell_range(u.grid, lo, hi)
    nodes = u.grid.nodes
    c0, c1, c2 = (c[i0:i1] for c in _pair_coeffs(u, w))
    la, lb = nodes[i0:i1], nodes[i0 + 1:i1 + 1]
    beta = cpoint - la
    # rewrite the quadratic in tau = cpoint - t
    d0 = c0 + c1 * beta + c2 * beta * beta
    d1 = -c1 - 2.0 * c2 * beta
    d2 = c2
    t1, t2 = np.maximum(cpoint - lb, 0.0), cpoint - la
    return float(np.sum(d0 * kq.weak_mom(0, t1, t2)
                        + d1 * kq.weak_mom(1, t1, t2)
                        + d2 * kq.weak_mom(2, t1, t2)))


def history_bracket(u: Trajectory, w: Trajectory, alpha) -> float:
    """int_{-M}^0 (u, w)_H [ (T-t)^(-alpha) - (-t)^(-alpha) ] dt."""
    g = u.grid
    t_final = g.t_final
    m0 = weighted_pair_integral(u, w, alpha, t_final, -g.m_depth, 0.0)
    m1 = weighted_pair_integral(u, w, alpha, 0.0, -g.m_depth, 0.0)
    return m0 - m1


def frac_energy_nodes(u: Trajectory, w: Trajectory, alpha) -> np.ndarray:
    """b(t_i) = alpha * int_{-inf}^{t_i} (u(t_i)-u(s), w(t_i)-w(s))_H K ds.

    K = (t_i - s)^(-1-alpha).  The integrand vanishes quadratically at
    s = t_i, so the final cell contributes only through the slope moment and
    everything is finite.  Constant tails below -M contribute the bracket
    (u_i - u_0, w_i - w_0)_H (t_i - t_0)^(-alpha).
    """
    u._compat(w)
    a = as_alpha(alpha)
    kq = KernelQuadrature(a)
    nodes = u.grid.nodes
    n = nodes.size
    su, sw = u.slopes(), w.slopes()
    uv, wv = u.values, w.values
    out = np.zeros(n)
    for i in range(1, n):
        ti = nodes[i]
        la, lb = nodes[:i], nodes[1:i + 1]
        tau1, tau2 = ti - lb, ti - la
        su_c, sw_c = su[:i], sw[:i]
        # on cell j: u(t_i) - u(s) = A_j + su_j * (t_i - s)
        if u.is_scalar:
            au = uv[i] - uv[:i] - su_c * tau2
            aw = wv[i] - wv[:i] - sw_c * tau2
        else:
            au = uv[i] - uv[:i] - su_c * tau2[:, None]
            aw = wv[i] - wv[:i] - sw_c * tau2[:, None]
        pam = u.pair_rows(au, sw_c) + u.pair_rows(su_c, aw)
        pmm = u.pair_rows(su_c, sw_c)
        total = float(np.sum(pam * kq.lin_mom(tau1, tau2) + pmm * kq.quad_mom(tau1, tau2)))
        if i > 1:
            # A vanishes identically on the final cell; keep 0 * inf out
            paa = u.pair_rows(au[:-1], aw[:-1])
            total += float(np.sum(paa * kq.sing_mom(tau1[:-1], tau2[:-1])))
        gap = u.pair_rows(uv[i] - uv[0], wv[i] - wv[0])
        total += float(gap) * (ti - nodes[0]) ** -a
        out[i] = total
    return out


def frac_energy(u: Trajectory, w: Trajectory, alpha, lo: float) -> float:
    """alpha * int_lo^T int_{-inf}^t (u(t)-u(s), w(t)-w(s))_H K ds dt.

    Outer integral by the trapezoid rule on the grid nodes in [lo, T]; inner
    integral exact per cell.
    """
    g = u.grid
    i0 = g.index_of(lo)
    wts = g.trapezoid_weights(i0, g.n_nodes - 1)
    b = frac_energy_nodes(u, w, alpha)
    return float(wts @ b)
