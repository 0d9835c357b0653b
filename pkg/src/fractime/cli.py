"""Configuration-driven experiment runner emitting CSV reports.

Config format: line-oriented ``key = value`` with ``#`` comments.  Exit codes:
0 pass, 2 config error, 3 tolerance failure, 4 I/O failure.  Identical config
text produces bitwise-identical CSV.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from .core import (CutoffFn, SpatialMesh, Trajectory, as_alpha,
                   make_graded_grid)
from .frac_ops import formulations_agree
from .identities import cutoff_transfer_residual, ibp_residual, psidelta_limit_study
from .parabolic import (BilinearForm, PerturbationSpec, ProblemData,
                        solve_strong, test_family, uniqueness_experiment,
                        weak_residual)
from .report import (ResidualReport, format_float, write_reports_csv,
                     write_series_csv, write_solution_csv)
from .steklov import (check_shift_identity, check_steklov_commutation,
                      check_steklov_convergence, check_switch_lemma)

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "run", "main"]

COMMANDS = ("verify-identities", "convergence", "solve", "uniqueness", "psidelta")

#: key -> (type, default, help); type in {choice:..., float, int, floatlist, str}
SCHEMA = {
    "command": ("choice:" + "|".join(COMMANDS), None, "experiment to run (required)"),
    "alpha": ("float", 0.5, "fractional order, 0 < alpha < 1"),
    "n_t": ("int", 512, "time steps on (0, T]"),
    "n_cells": ("int", 16, "spatial cells on (0, 1)"),
    "m_depth": ("float", 1.0, "history depth M (grid starts at -M)"),
    "t_final": ("float", 1.0, "final time T"),
    "epsilon": ("float", 0.2, "cutoff width near T"),
    "delta": ("floatlist", [0.2, 0.1, 0.05, 0.025], "ramp widths for psidelta"),
    "r": ("float", 1.0, "time-grid grading exponent"),
    "r_b": ("float", 2.0, "grading exponent of the second run (uniqueness)"),
    "strategy": ("choice:identical|refine|grading|ordering", "refine",
                 "perturbation between the two uniqueness runs"),
    "n_cells_b": ("int", None, "spatial cells of the second run (must equal n_cells)"),
    "h": ("floatlist", [0.125, 0.0625, 0.03125, 0.015625],
          "window sizes for convergence"),
    "flavor": ("choice:local_div|nonlocal_kernel", "local_div", "bilinear form kind"),
    "coefficient": ("str", "1.0", "constant, or one of smooth | checker"),
    "kernel_scale": ("float", 1.0, "amplitude of the nonlocal Gaussian kernel"),
    "lam": ("float", 1.0, "coercivity shift of the nonlocal form"),
    "normalization": ("choice:paper|classical", "paper", "derivative prefactor convention"),
    "history": ("choice:zero|sinpi|ramp", "zero", "trajectory data on [-M, 0]"),
    "load": ("choice:zero|one|smooth", "zero", "right-hand side"),
    "tolerance": ("float", 1e-2, "pass/fail gate for normalized residuals"),
    "out": ("str", None, "main output file name (defaults per command)"),
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    command: str = ""
    alpha: float = 0.5
    n_t: int = 512
    n_cells: int = 16
    m_depth: float = 1.0
    t_final: float = 1.0
    epsilon: float = 0.2
    delta: list = field(default_factory=lambda: [0.2, 0.1, 0.05, 0.025])
    r: float = 1.0
    r_b: float = 2.0
    strategy: str = "refine"
    n_cells_b: int | None = None
    h: list = field(default_factory=lambda: [0.125, 0.0625, 0.03125, 0.015625])
    flavor: str = "local_div"
    coefficient: str = "1.0"
    kernel_scale: float = 1.0
    lam: float = 1.0
    normalization: str = "paper"
    history: str = "zero"
    load: str = "zero"
    tolerance: float = 1e-2
    out: str | None = None


def _convert(key: str, kind: str, raw: str, line_no: int):
    raw = raw.strip()
    if kind.startswith("choice:"):
        choices = kind.split(":", 1)[1].split("|")
        if raw not in choices:
            raise ConfigError(
                f"line {line_no}: {key} must be one of {', '.join(choices)}; got {raw!r}")
        return raw
    if kind == "float":
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"line {line_no}: {key} expects a number, got {raw!r}") from None
    if kind == "int":
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"line {line_no}: {key} expects an integer, got {raw!r}") from None
    if kind == "floatlist":
        try:
            vals = [float(p) for p in raw.split(",") if p.strip()]
        except ValueError:
            raise ConfigError(
                f"line {line_no}: {key} expects comma-separated numbers, got {raw!r}") from None
        if not vals:
            raise ConfigError(f"line {line_no}: {key} must not be empty")
        return vals
    return raw


def parse_config(text: str) -> ExperimentConfig:
    """Parse line-oriented ``key = value`` text into a validated config."""
    cfg = ExperimentConfig()
    seen = set()
    for line_no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {line.strip()!r}")
        key, raw = body.split("=", 1)
        key = key.strip()
        if key not in SCHEMA:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"line {line_no}: duplicate key {key!r}")
        seen.add(key)
        setattr(cfg, key, _convert(key, SCHEMA[key][0], raw, line_no))
    if not cfg.command:
        raise ConfigError("missing required key: command")
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    """Check every numeric field against its consuming module up front."""
    try:
        as_alpha(cfg.alpha)
    except ValueError as e:
        raise ConfigError(f"alpha: {e}") from None
    if cfg.n_t < 4:
        raise ConfigError("n_t must be at least 4")
    if cfg.n_cells < 2:
        raise ConfigError("n_cells must be at least 2")
    if cfg.m_depth <= 0 or cfg.t_final <= 0:
        raise ConfigError("m_depth and t_final must be positive")
    if cfg.r < 1.0:
        raise ConfigError("grading exponent r must be >= 1")
    if not 0 < cfg.epsilon < cfg.t_final:
        raise ConfigError("epsilon must lie in (0, t_final)")
    for d in cfg.delta:
        if not 0 < d <= cfg.epsilon:
            raise ConfigError("every delta must satisfy 0 < delta <= epsilon")
    for w in cfg.h:
        if not 0 < w < cfg.t_final:
            raise ConfigError("every window h must lie in (0, t_final)")
    if cfg.n_cells_b is not None and cfg.n_cells_b != cfg.n_cells:
        raise ConfigError(
            f"n_cells_b={cfg.n_cells_b} does not match n_cells={cfg.n_cells}; "
            f"the two uniqueness runs must share one spatial mesh")
    if cfg.coefficient not in ("smooth", "checker"):
        try:
            float(cfg.coefficient)
        except ValueError:
            raise ConfigError(
                f"coefficient must be a number or one of smooth, checker; "
                f"got {cfg.coefficient!r}") from None


# ---------------------------------------------------------------------------
# ingredient builders

def _coefficient_fn(cfg: ExperimentConfig):
    if cfg.coefficient == "smooth":
        return lambda x, t: 1.0 + 0.25 * np.cos(np.pi * x) * np.sin(t), True
    if cfg.coefficient == "checker":
        return (lambda x, t: (1.0 + 0.5 * np.sign(np.sin(20.0 * t)))
                * np.ones_like(np.asarray(x, dtype=float))), True
    return float(cfg.coefficient), False


def _build_form(cfg: ExperimentConfig, mesh: SpatialMesh) -> BilinearForm:
    if cfg.flavor == "local_div":
        coeff, timedep = _coefficient_fn(cfg)
        return BilinearForm.local_div(mesh, coeff, time_dependent=timedep)
    scale = cfg.kernel_scale

    def kernel(x, y, t):
        return scale * np.exp(-(((x - y) / 0.25) ** 2)) * (1.0 + 0.0 * t)

    return BilinearForm.nonlocal_kernel(mesh, kernel, lam=cfg.lam)


def _history_fn(cfg: ExperimentConfig):
    if cfg.history == "zero":
        return None
    if cfg.history == "sinpi":
        return lambda x, t: np.sin(np.pi * x) * np.ones_like(np.asarray(t, dtype=float))
    return lambda x, t: np.sin(np.pi * x) * (1.0 + 0.2 * t)


def _load_fn(cfg: ExperimentConfig):
    if cfg.load == "zero":
        return None
    if cfg.load == "one":
        return lambda x, t: np.ones_like(np.asarray(x, dtype=float))
    return lambda x, t: np.sin(np.pi * x) * t * np.exp(-t) + x * (1 - x) * t * t


def _build_data(cfg: ExperimentConfig) -> ProblemData:
    grid = make_graded_grid(cfg.m_depth, cfg.t_final, cfg.n_t, cfg.r)
    mesh = SpatialMesh(cfg.n_cells)
    form = _build_form(cfg, mesh)
    return ProblemData(grid, mesh, form, cfg.alpha, history=_history_fn(cfg),
                       load=_load_fn(cfg), normalization=cfg.normalization)


def _bump(t, center, width):
    t = np.asarray(t, dtype=float)
    x = (t - center) / width
    out = np.zeros_like(t)
    m = np.abs(x) < 1.0
    out[m] = np.exp(1.0 - 1.0 / (1.0 - x[m] ** 2))
    return out


# ---------------------------------------------------------------------------
# commands

def _cmd_verify_identities(cfg: ExperimentConfig, out_dir: str, verbose: bool):
    a = cfg.alpha
    t_final, m_depth = cfg.t_final, cfg.m_depth
    grid = make_graded_grid(m_depth, t_final, cfg.n_t, cfg.r)
    reports: list[ResidualReport] = []

    sq = Trajectory.from_time_function(
        grid, lambda t: np.where(np.asarray(t) > 0, np.asarray(t) ** 2, 0.0))
    pos = grid.nodes[grid.history_cut:]
    samples = [pos[int(round(f * (len(pos) - 1)))] for f in
               (0.25, 0.4, 0.55, 0.7, 0.85)]
    reports.append(formulations_agree(sq, a, samples, cfg.normalization))

    u = Trajectory.from_time_function(
        grid, lambda t: _bump(t, 0.30 * t_final, 0.55 * t_final))
    phi = Trajectory.from_time_function(
        grid, lambda t: _bump(t, 0.55 * t_final, 0.35 * t_final))
    for variant in ("full_line", "rewritten", "zero_to_T"):
        reports.append(ibp_residual(u, phi, a, variant))

    h = t_final / 16.0
    reports.append(check_switch_lemma(u, a))
    reports.append(check_steklov_commutation(u, a, h))
    us = Trajectory.from_time_function(
        grid, lambda t: _bump(t, 0.35 * t_final, 0.30 * t_final))
    eta = Trajectory.from_time_function(
        grid, lambda t: _bump(t, 0.45 * t_final, 0.25 * t_final))
    reports.append(check_shift_identity(us, eta, h, alpha=a))

    solve_cfg = cfg
    if cfg.history == "zero" and cfg.load == "zero":
        solve_cfg = replace(cfg, load="smooth")  # zero data verifies nothing
    data = _build_data(solve_cfg)
    sol = solve_strong(data)
    fam = test_family(data.mesh, data.grid, 2)
    rep_weak = weak_residual(sol, data, fam[0])
    reports.append(rep_weak)
    if solve_cfg.history == "zero":
        psi = CutoffFn("smooth", t_final, cfg.epsilon)
        reports.append(cutoff_transfer_residual(sol, fam[1], data.form, psi, a))

    status = {r.name: ("pass" if r.passes(cfg.tolerance) else "fail") for r in reports}
    path = os.path.join(out_dir, cfg.out or "verify-identities.csv")
    write_reports_csv(reports, path, status)
    if verbose:
        for r in reports:
            print(f"{status[r.name]}: {r}")
        print(f"wrote {path}")
    return 0 if all(v == "pass" for v in status.values()) else 3


def _cmd_convergence(cfg: ExperimentConfig, out_dir: str, verbose: bool):
    grid = make_graded_grid(cfg.m_depth, cfg.t_final, cfg.n_t, cfg.r)
    mesh = SpatialMesh(cfg.n_cells)
    prof = mesh.interpolate(lambda x: np.sin(np.pi * x))
    f = Trajectory.from_time_function(
        grid, lambda t: _bump(t, 0.45 * cfg.t_final, 0.35 * cfg.t_final),
        mesh=mesh, profile=prof)
    rep = check_steklov_convergence(f, cfg.h, space="V")
    dists = [v for _, v in rep.series]
    ok = all(dists[i + 1] < dists[i] for i in range(len(dists) - 1))
    status = {rep.name: "pass" if ok else "fail"}
    path = os.path.join(out_dir, cfg.out or "convergence.csv")
    write_reports_csv([rep], path, status)
    if verbose:
        print(f"{status[rep.name]}: {rep} distances={dists}")
        print(f"wrote {path}")
    return 0 if ok else 3


def _cmd_solve(cfg: ExperimentConfig, out_dir: str, verbose: bool):
    data = _build_data(cfg)
    sol = solve_strong(data)
    res = sol.diagnostics["max_linear_residual"]
    rep = ResidualReport(
        name="solve",
        params={"alpha": cfg.alpha, "n_t": cfg.n_t, "n_cells": cfg.n_cells,
                "flavor": cfg.flavor, "normalization": cfg.normalization},
        terms={"history_norm": data.history_norm},
        residual=res,
    )
    ok = res <= 1e-12
    sol_path = os.path.join(out_dir, cfg.out or "solution.csv")
    write_solution_csv(sol.trajectory, sol_path)
    rep_path = os.path.join(out_dir, "report-solve.csv")
    write_reports_csv([rep], rep_path, {rep.name: "pass" if ok else "fail"})
    if verbose:
        print(f"{'pass' if ok else 'fail'}: {rep}")
        print(f"wrote {sol_path} and {rep_path}")
    return 0 if ok else 3


def _cmd_uniqueness(cfg: ExperimentConfig, out_dir: str, verbose: bool):
    data = _build_data(cfg)
    if cfg.strategy in ("refine", "grading"):
        n_seq = tuple(cfg.n_t * (2 ** k) for k in range(4))
        gate = "ratio"
    else:
        n_seq = (cfg.n_t,)
        gate = "tiny"
    spec = PerturbationSpec(kind=cfg.strategy, n_sequence=n_seq, r=cfg.r, r_b=cfg.r_b)
    rep = uniqueness_experiment(data, spec)
    dists = [v for _, v in rep.series]
    if gate == "ratio":
        ok = all(dists[i] >= 1.5 * dists[i + 1] for i in range(len(dists) - 1))
    else:
        ok = dists[-1] <= 1e-12
    status = {rep.name: "pass" if ok else "fail"}
    path = os.path.join(out_dir, cfg.out or "uniqueness.csv")
    write_reports_csv([rep], path, status)
    if verbose:
        print(f"{status[rep.name]}: {rep} distances={dists}")
        print(f"wrote {path}")
    return 0 if ok else 3


def _cmd_psidelta(cfg: ExperimentConfig, out_dir: str, verbose: bool):
    grid = make_graded_grid(cfg.m_depth, cfg.t_final, cfg.n_t, cfg.r)
    u = Trajectory.from_time_function(
        grid, lambda t: _bump(t, 0.5 * cfg.t_final, 0.45 * cfg.t_final))
    deltas = sorted(cfg.delta, reverse=True)
    study = psidelta_limit_study(u, cfg.t_final, cfg.epsilon, deltas, cfg.alpha)
    rows = [(d, v, av, b) for d, v, av, b in
            zip(study.deltas, study.values, study.abs_values, study.bound_values)]
    ok = study.monotone_decay()
    path = os.path.join(out_dir, cfg.out or "psidelta.csv")
    write_series_csv(rows, path, ["delta", "value", "abs_value", "upper_bound"])
    if verbose:
        print(f"{'pass' if ok else 'fail'}: psidelta decay "
              f"{[format_float(v) for v in study.abs_values]}")
        print(f"wrote {path}")
    return 0 if ok else 3


_RUNNERS = {
    "verify-identities": _cmd_verify_identities,
    "convergence": _cmd_convergence,
    "solve": _cmd_solve,
    "uniqueness": _cmd_uniqueness,
    "psidelta": _cmd_psidelta,
}


def run(cfg: ExperimentConfig, out_dir: str = ".", verbose: bool = False) -> int:
    """Execute one configured experiment; returns the process exit code."""
    try:
        _validate(cfg)
        if cfg.command not in _RUNNERS:
            raise ConfigError(f"unknown command {cfg.command!r}")
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    try:
        return _RUNNERS[cfg.command](cfg, out_dir, verbose)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (ValueError, FloatingPointError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 4


def _help_epilog() -> str:
    lines = ["config keys (key = value per line, '#' comments):"]
    for key, (kind, default, doc) in SCHEMA.items():
        kind_h = kind.split(":", 1)[1] if kind.startswith("choice:") else kind
        if isinstance(default, list):
            default = ",".join(format_float(v) for v in default)
        lines.append(f"  {key:<14} {doc} [{kind_h}"
                     + (f", default {default}]" if default is not None else ", required]"))
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fractime",
        description="Run fractional-time evolution experiments from a config file.",
        epilog=_help_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--config", required=True, help="path to a key = value config file")
    parser.add_argument("--out", default=".", help="directory for CSV outputs")
    parser.add_argument("--verbose", action="store_true", help="print per-check results")
    args = parser.parse_args(argv)
    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as e:
        print(f"config error: cannot read {args.config}: {e}", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(text)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    return run(cfg, out_dir=args.out, verbose=args.verbose)


if __name__ == "__main__":
    sys.exit(main())
