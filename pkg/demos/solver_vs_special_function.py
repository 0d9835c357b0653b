"""The time-stepping solver checked against closed-form references.

For constant-coefficient diffusion started from the lowest spatial mode, the
semi-discrete amplitude is a Mittag-Leffler relaxation of the generalized
eigenvalue; for a manufactured polynomial solution the load is known exactly.
Every strong solution is then replayed through the weak form.
"""
import math

import numpy as np
from scipy.special import gamma as gamma_fn

from fractime import (BilinearForm, ProblemData, SpatialMesh, Trajectory,
                      l2h_distance, make_graded_grid, mittag_leffler,
                      solve_strong, test_family, weak_residual)


def main():
    print("mode amplitude vs Mittag-Leffler relaxation (n_x=32, n_t=512)")
    mesh = SpatialMesh(32)
    form = BilinearForm.local_div(mesh, time_dependent=False)
    g = make_graded_grid(1.0, 1.0, 512, 2.0)
    h = mesh.h
    mu1 = (6 / h ** 2) * (1 - math.cos(math.pi * h)) / (2 + math.cos(math.pi * h))
    mid = mesh.n_interior // 2
    for a in (0.4, 0.6, 0.8):
        data = ProblemData(g, mesh, form, a,
                           history=lambda x, t: np.sin(np.pi * x),
                           normalization="classical")
        sol = solve_strong(data)
        amp = sol.trajectory.values[:, mid] / math.sin(np.pi * mesh.x_interior[mid])
        worst = max(abs(amp[i] - mittag_leffler(a, -mu1 * g.nodes[i] ** a))
                    / mittag_leffler(a, -mu1 * g.nodes[i] ** a)
                    for i in range(g.history_cut + 1, g.n_nodes))
        print(f"  alpha={a:4.2f}  max rel err {worst:.3e}")

    print("\nmanufactured solution sin(pi x) t^2: spatial refinement")
    a = 0.5

    def load(x, t):
        return np.sin(np.pi * x) * (
            2 * t ** (2 - a) / gamma_fn(3 - a) + np.pi ** 2 * t ** 2)

    gt = make_graded_grid(1.0, 1.0, 512, 2.0)
    for nc in (8, 16, 32):
        m2 = SpatialMesh(nc)
        f2 = BilinearForm.local_div(m2, time_dependent=False)
        d2 = ProblemData(gt, m2, f2, a, load=load, normalization="classical")
        s2 = solve_strong(d2)
        prof = m2.interpolate(lambda x: np.sin(np.pi * x))
        ref = Trajectory.from_time_function(
            gt, lambda t: np.maximum(np.asarray(t), 0.0) ** 2,
            mesh=m2, profile=prof)
        err = l2h_distance(s2.trajectory, ref, m2)
        print(f"  n_cells={nc:3d}  L2(0,T;H) error {err:.3e}")

    print("\nreplaying the strong solution through the weak form")
    m3 = SpatialMesh(16)
    f3 = BilinearForm.local_div(
        m3, coefficient=lambda x, t: 1 + 0.25 * np.cos(np.pi * x) * np.sin(t))
    g3 = make_graded_grid(1.0, 1.0, 512, 2.0)
    d3 = ProblemData(g3, m3, f3, 0.5,
                     load=lambda x, t: np.sin(np.pi * x) * t * np.exp(-t))
    s3 = solve_strong(d3)
    fam = test_family(m3, g3, 12)
    worst = max(weak_residual(s3, d3, p).residual for p in fam)
    print(f"  worst residual over 12 test functions: {worst:.3e}")


if __name__ == "__main__":
    main()
