import os

import numpy as np
import pytest

from fractime.cli import ConfigError, main, parse_config, run


def write_cfg(tmp_path, text, name="exp.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_parse_defaults():
    cfg = parse_config("command = solve\n")
    assert cfg.command == "solve"
    assert cfg.alpha == 0.5
    assert cfg.n_t == 512
    assert cfg.n_cells == 16
    assert cfg.flavor == "local_div"
    assert cfg.normalization == "paper"
    assert cfg.delta == [0.2, 0.1, 0.05, 0.025]


def test_parse_comments_and_lists():
    cfg = parse_config(
        "# experiment\ncommand = psidelta\n\nalpha = 0.25\n"
        "delta = 0.1, 0.05\nh = 0.125,0.0625\n")
    assert cfg.alpha == 0.25
    assert cfg.delta == [0.1, 0.05]
    assert cfg.h == [0.125, 0.0625]


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("command = solve\nn_t = abc\n")
    with pytest.raises(ConfigError, match="line 3"):
        parse_config("command = solve\nalpha = 0.5\nwhatever = 1\n")
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("command = solve\ncommand = solve\n")
    with pytest.raises(ConfigError, match="line 1"):
        parse_config("just some words\n")
    with pytest.raises(ConfigError, match="command"):
        parse_config("alpha = 0.5\n")


def test_verify_identities_runs_and_is_deterministic(tmp_path):
    cfg = write_cfg(tmp_path, "command = verify-identities\nn_t = 128\nn_cells = 8\n")
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["--config", cfg, "--out", str(out1)]) == 0
    assert main(["--config", cfg, "--out", str(out2)]) == 0
    b1 = (out1 / "verify-identities.csv").read_bytes()
    b2 = (out2 / "verify-identities.csv").read_bytes()
    assert b1 == b2
    text = b1.decode()
    assert "fail" not in text
    for name in ("formulations_agree", "ibp_rewritten", "switch_lemma",
                 "steklov_commutation", "shift_identity", "weak_form"):
        assert name in text


def test_verify_identities_tolerance_failure(tmp_path):
    cfg = write_cfg(tmp_path,
                    "command = verify-identities\nn_t = 128\nn_cells = 8\n"
                    "tolerance = 1e-9\n")
    assert main(["--config", cfg, "--out", str(tmp_path)]) == 3
    text = (tmp_path / "verify-identities.csv").read_text()
    assert "fail" in text


def test_solve_writes_solution(tmp_path):
    cfg = write_cfg(tmp_path,
                    "command = solve\nn_t = 64\nn_cells = 8\n"
                    "history = sinpi\nout = run.csv\n")
    assert main(["--config", cfg, "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "run.csv").read_text().splitlines()
    assert lines[0] == "t," + ",".join(f"u{k}" for k in range(1, 8))
    assert len(lines) > 64
    rep = (tmp_path / "report-solve.csv").read_text()
    assert rep.splitlines()[1].startswith("solve,")
    assert "pass" in rep


def test_solve_zero_data_is_zero(tmp_path):
    cfg = write_cfg(tmp_path, "command = solve\nn_t = 32\nn_cells = 4\n")
    assert main(["--config", cfg, "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "solution.csv").read_text().splitlines()[1:]
    for ln in lines:
        assert all(float(v) == 0.0 for v in ln.split(",")[1:])


def test_convergence_command(tmp_path):
    cfg = write_cfg(tmp_path, "command = convergence\nn_t = 256\nn_cells = 8\n")
    assert main(["--config", cfg, "--out", str(tmp_path)]) == 0
    assert "steklov_convergence" in (tmp_path / "convergence.csv").read_text()


def test_uniqueness_command_identical_and_refine(tmp_path):
    cfg = write_cfg(tmp_path,
                    "command = uniqueness\nstrategy = identical\n"
                    "n_t = 64\nn_cells = 8\nhistory = sinpi\n")
    assert main(["--config", cfg, "--out", str(tmp_path)]) == 0
    text = (tmp_path / "uniqueness.csv").read_text()
    assert "uniqueness_identical" in text and "pass" in text
    cfg2 = write_cfg(tmp_path,
                     "command = uniqueness\nstrategy = refine\n"
                     "n_t = 64\nn_cells = 8\nhistory = sinpi\n"
                     "coefficient = checker\n", name="u2.cfg")
    assert main(["--config", cfg2, "--out", str(tmp_path)]) == 0
    assert "uniqueness_refine" in (tmp_path / "uniqueness.csv").read_text()


def test_psidelta_command(tmp_path):
    cfg = write_cfg(tmp_path,
                    "command = psidelta\nn_t = 128\nn_cells = 8\n"
                    "epsilon = 0.2\ndelta = 0.2,0.1,0.05\n")
    assert main(["--config", cfg, "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "psidelta.csv").read_text().splitlines()
    assert lines[0] == "delta,value,abs_value,upper_bound"
    rows = [[float(v) for v in ln.split(",")] for ln in lines[1:]]
    absv = [r[2] for r in rows]
    assert all(b < a for a, b in zip(absv, absv[1:]))
    for r in rows:
        assert r[2] <= r[3]  # bound dominates


def test_validation_failures_exit_2(tmp_path):
    bad = [
        "command = solve\nalpha = 1.5\n",
        "command = solve\nn_t = 2\n",
        "command = solve\nflavor = magic\n",
        "command = uniqueness\nstrategy = custom\nn_cells_b = 12\n",
        "command = solve\ncoefficient = 2words\n",
        "command = psidelta\nepsilon = 0.2\ndelta = 0.3\n",
    ]
    for i, text in enumerate(bad):
        cfg = write_cfg(tmp_path, text, name=f"bad{i}.cfg")
        out = tmp_path / f"out{i}"
        assert main(["--config", cfg, "--out", str(out)]) == 2
        assert not out.exists() or not list(out.iterdir())


def test_unreadable_config_exits_2(tmp_path):
    assert main(["--config", str(tmp_path / "missing.cfg")]) == 2


def test_out_dir_collision_exits_4(tmp_path):
    blocker = tmp_path / "blocked"
    blocker.write_text("already a file")
    cfg = write_cfg(tmp_path, "command = solve\nn_t = 32\nn_cells = 4\n")
    assert main(["--config", cfg, "--out", str(blocker / "sub")]) == 4


def test_help_lists_schema():
    import contextlib
    import io
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        with pytest.raises(SystemExit) as exc:
            main(["--help"])
    assert exc.value.code == 0
    text = buf.getvalue()
    for key in ("command", "alpha", "n_t", "flavor", "normalization",
                "tolerance", "kernel_scale"):
        assert key in text
