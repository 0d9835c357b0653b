"""Fractional-time evolution toolkit.

Nonlocal-in-time derivatives of piecewise-linear trajectories with exact
kernel moments, the identities that connect their weak and strong forms,
window-average (Steklov) calculus, cutoff transfer machinery, and an
implicit solver for history-aware parabolic problems, all verifiable at
desk scale.
"""

from .core import (CutoffFn, FracOrder, KernelQuadrature, SpatialMesh,
                   TimeGrid, Trajectory, as_alpha, eval_cutoff, frac_energy,
                   h_inner, history_bracket, make_graded_grid, pair_integral,
                   resample, weighted_pair_integral)
from .frac_ops import (NORMALIZATIONS, caputo, formulations_agree,
                       frac_sobolev_seminorm, marchaud, marchaud_nodes,
                       norm_scale, riemann_form, short_marchaud)
from .identities import (IBP_VARIANTS, GFunction, PsiDeltaStudy,
                         cutoff_transfer_residual, g_function, ibp_residual,
                         psidelta_limit_study, weighted_history_integral)
from .parabolic import (BilinearForm, DiscreteSolution, MittagLeffler,
                        PerturbationSpec, ProblemData, assemble_form,
                        check_form_average, l2h_distance, mittag_leffler,
                        solve_strong, test_family, uniqueness_experiment,
                        weak_residual)
from .report import (ResidualReport, format_float, normalized,
                     write_reports_csv, write_series_csv, write_solution_csv)
from .steklov import (SteklovParams, antiderivative, check_shift_identity,
                      check_steklov_commutation, check_steklov_convergence,
                      check_switch_lemma, effective_window, integrate_linear,
                      steklov)

__version__ = "0.1.0"

__all__ = [
    "FracOrder", "as_alpha", "TimeGrid", "make_graded_grid", "SpatialMesh",
    "Trajectory", "resample", "CutoffFn", "eval_cutoff", "KernelQuadrature",
    "pair_integral", "weighted_pair_integral", "history_bracket",
    "frac_energy", "h_inner",
    "NORMALIZATIONS", "norm_scale", "marchaud", "marchaud_nodes", "caputo",
    "riemann_form", "short_marchaud", "formulations_agree",
    "frac_sobolev_seminorm",
    "SteklovParams", "effective_window", "steklov", "antiderivative",
    "integrate_linear",
    "check_switch_lemma", "check_steklov_commutation", "check_shift_identity",
    "check_steklov_convergence",
    "IBP_VARIANTS", "ibp_residual", "GFunction", "g_function",
    "cutoff_transfer_residual", "PsiDeltaStudy", "psidelta_limit_study",
    "weighted_history_integral",
    "BilinearForm", "assemble_form", "ProblemData", "DiscreteSolution",
    "solve_strong", "weak_residual", "test_family", "check_form_average",
    "MittagLeffler", "mittag_leffler", "PerturbationSpec",
    "uniqueness_experiment", "l2h_distance",
    "ResidualReport", "format_float", "normalized", "write_reports_csv",
    "write_series_csv", "write_solution_csv",
    "__version__",
]
