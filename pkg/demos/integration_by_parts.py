"""The three integration-by-parts identities and their discrete residuals.

Each identity moves the memory derivative from one factor to the other; the
rewritten form trades the product-rule term for a weighted boundary integral,
and the (0, T) form keeps an explicit bracket for the inherited past.
"""
import numpy as np

from fractime import Trajectory, ibp_residual, make_graded_grid


def bump(t, c, w):
    t = np.asarray(t, dtype=float)
    x = (t - c) / w
    out = np.zeros_like(t)
    m = np.abs(x) < 1
    out[m] = np.exp(1 - 1 / (1 - x[m] ** 2))
    return out


def main():
    print("residuals for two smooth bumps, refined in time")
    print(f"{'n':>6} {'full_line':>12} {'rewritten':>12} {'zero_to_T':>12}")
    for n in (128, 256, 512, 1024):
        g = make_graded_grid(1.0, 1.0, n, 1.0)
        u = Trajectory.from_time_function(g, lambda t: bump(t, 0.35, 0.45))
        phi = Trajectory.from_time_function(g, lambda t: bump(t, 0.5, 0.35))
        row = [ibp_residual(u, phi, 0.5, variant=v).residual
               for v in ("full_line", "rewritten", "zero_to_T")]
        print(f"{n:6d} " + " ".join(f"{r:12.3e}" for r in row))

    print("\nwith u alive before t = 0 the history bracket turns on")
    for n in (256, 1024):
        g = make_graded_grid(1.0, 1.0, n, 1.0)
        u = Trajectory.from_time_function(
            g, lambda t: bump(t, -0.1, 0.5) + bump(t, 0.6, 0.3))
        phi = Trajectory.from_time_function(g, lambda t: bump(t, 0.1, 0.4))
        rep = ibp_residual(u, phi, 0.5, variant="zero_to_T")
        print(f"  n={n:5d}  bracket {rep.terms['history_bracket']:+.6f}"
              f"  residual {rep.residual:.3e}")


if __name__ == "__main__":
    main()
