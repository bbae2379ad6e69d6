import math

import numpy as np
import pytest
import yaml

from hammerstein.cli import emit_convergence_table, main, run
from hammerstein.picard import SolveReport

BASE_CONFIG = """\
kernel:
  family: C
  epsilon: 0.5
nonlinearity:
  family: I
  alpha: 0.5
grid:
  x_max: 25.0
  n_panels: 100
  rule: gauss
  points_per_panel: 4
solver:
  tol: 1.0e-10
  max_iter: 300
nemytsky:
  xi: 0.25
certificates:
  probe_trials: 2
  seed: 7
"""


def write_config(tmp_path, text=BASE_CONFIG, name="run.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_happy_path_writes_artifacts(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "out"
    code = main(["solve", "--config", str(cfg), "--out-dir", str(out)])
    assert code == 0
    report = yaml.safe_load((out / "report.yaml").read_text())
    assert report["status"]["certificates_passed"] is True
    assert report["solve"]["monotone_ok"] is True
    assert report["solve"]["rate_bound_ok"] is True
    assert len(report["solve"]["envelope"]) == len(report["solve"]["sup_diffs"])
    assert report["solve"]["envelope"][0] is None
    header = (out / "profile.csv").read_text().splitlines()[0]
    assert header == "x,f_star,gamma,eta_minus_fstar"
    assert (out / "run_meta.txt").exists()


def test_full_pipeline_profile_has_envelopes(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "out"
    code = main(["solve-nemytsky", "--config", str(cfg), "--out-dir", str(out)])
    assert code == 0
    lines = (out / "profile.csv").read_text().splitlines()
    assert lines[0] == "x,f_star,gamma,eta_minus_fstar,phi,lower_env,upper_env"
    first = [float(v) for v in lines[1].split(",")]
    assert first[5] <= first[4] + 1e-10 <= first[6] + 2e-10  # sandwich at node 0
    report = yaml.safe_load((out / "report.yaml").read_text())
    assert report["nemytsky_solve"]["sandwich_ok"] is True


def test_check_only(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "out"
    assert main(["check", "--config", str(cfg), "--out-dir", str(out)]) == 0
    report = yaml.safe_load((out / "report.yaml").read_text())
    assert report["conditions"]["kernel"]["passed"] is True
    assert "solve" not in report
    assert not (out / "profile.csv").exists()


def test_exp_mixture_base_kernel_runs(tmp_path):
    text = BASE_CONFIG.replace(
        "kernel:\n  family: C\n  epsilon: 0.5\n",
        "kernel:\n  family: C\n  epsilon: 0.5\n"
        "  base:\n    variant: exp-mixture\n    atoms: [[0.25, 1.0], [0.125, 0.5]]\n")
    text = text.replace("x_max: 25.0", "x_max: 90.0").replace("n_panels: 100",
                                                              "n_panels: 360")
    cfg = write_config(tmp_path, text)
    out = tmp_path / "out"
    assert main(["solve", "--config", str(cfg), "--out-dir", str(out)]) == 0
    echoed = yaml.safe_load((out / "report.yaml").read_text())["config"]
    assert echoed["kernel"]["base"]["variant"] == "exp-mixture"
    assert echoed["kernel"]["base"]["atoms"] == [[0.25, 1.0], [0.125, 0.5]]


def test_bad_mixture_atoms_exit_2(tmp_path, capsys):
    text = BASE_CONFIG.replace(
        "kernel:\n  family: C\n  epsilon: 0.5\n",
        "kernel:\n  family: C\n  epsilon: 0.5\n"
        "  base:\n    variant: exp-mixture\n    atoms: [[0.25, 1.0]]\n")
    cfg = write_config(tmp_path, text)
    code = main(["solve", "--config", str(cfg), "--out-dir", str(tmp_path / "o")])
    assert code == 2
    assert "kernel.base" in capsys.readouterr().err


def test_out_of_range_parameter_exits_2(tmp_path, capsys):
    cfg = write_config(tmp_path, BASE_CONFIG.replace("alpha: 0.5", "alpha: 1.2"))
    code = main(["solve", "--config", str(cfg), "--out-dir", str(tmp_path / "o")])
    assert code == 2
    assert "nonlinearity.alpha" in capsys.readouterr().err


def test_unknown_key_exits_2(tmp_path, capsys):
    cfg = write_config(tmp_path, BASE_CONFIG + "  bogus: 1\n")
    code = main(["solve", "--config", str(cfg), "--out-dir", str(tmp_path / "o")])
    assert code == 2
    assert "certificates.bogus" in capsys.readouterr().err


def test_missing_nemytsky_section_exits_2(tmp_path, capsys):
    text = BASE_CONFIG.replace("nemytsky:\n  xi: 0.25\n", "")
    cfg = write_config(tmp_path, text)
    code = main(["solve-nemytsky", "--config", str(cfg), "--out-dir", str(tmp_path / "o")])
    assert code == 2


def test_condition_failure_exits_3_with_report(tmp_path):
    # near-unit image-term weight on a coarse trapezoid grid: the row-mass
    # and mass-defect checks genuinely fail at this resolution
    text = """\
kernel:
  family: B
  delta: 0.999999
nonlinearity:
  family: I
  alpha: 0.5
grid:
  x_max: 40.0
  n_panels: 20
  rule: trapezoid
"""
    cfg = write_config(tmp_path, text)
    out = tmp_path / "out"
    code = main(["solve", "--config", str(cfg), "--out-dir", str(out)])
    assert code == 3
    report = yaml.safe_load((out / "report.yaml").read_text())
    assert report["conditions"]["kernel"]["passed"] is False
    assert report["status"]["conditions_passed"] is False


def test_non_convergence_exits_4(tmp_path):
    cfg = write_config(tmp_path, BASE_CONFIG.replace("max_iter: 300", "max_iter: 3"))
    out = tmp_path / "out"
    code = main(["solve", "--config", str(cfg), "--out-dir", str(out)])
    assert code == 4
    report = yaml.safe_load((out / "report.yaml").read_text())
    assert report["status"]["converged"] is False


def test_reports_byte_identical_for_same_seed(tmp_path):
    cfg = write_config(tmp_path)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["solve", "--config", str(cfg), "--out-dir", str(out1), "--seed", "3"]) == 0
    assert main(["solve", "--config", str(cfg), "--out-dir", str(out2), "--seed", "3"]) == 0
    assert (out1 / "report.yaml").read_bytes() == (out2 / "report.yaml").read_bytes()
    assert (out1 / "profile.csv").read_bytes() == (out2 / "profile.csv").read_bytes()


def test_config_echo_round_trips(tmp_path):
    cfg = write_config(tmp_path)
    out1 = tmp_path / "first"
    assert main(["solve", "--config", str(cfg), "--out-dir", str(out1)]) == 0
    echoed = yaml.safe_load((out1 / "report.yaml").read_text())["config"]
    cfg2 = tmp_path / "echoed.yaml"
    cfg2.write_text(yaml.safe_dump(echoed))
    out2 = tmp_path / "second"
    assert main(["solve", "--config", str(cfg2), "--out-dir", str(out2)]) == 0
    assert (out1 / "report.yaml").read_bytes() == (out2 / "report.yaml").read_bytes()


def test_table_subcommand(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = tmp_path / "out"
    assert main(["solve", "--config", str(cfg), "--out-dir", str(out)]) == 0
    assert main(["table", "--report", str(out / "report.yaml")]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "n sup_diff envelope ratio"
    ratios = [float(line.split()[3]) for line in lines[1:]]
    assert ratios and all(r <= 1.0 for r in ratios)


def test_convergence_table_degenerate_and_empty():
    flat = SolveReport(iterations=3, sup_diffs=[0.3, 0.0, 0.0], sigma0=1.0,
                       rate_bound_ok=True, monotone_ok=True, residual_inf=0.0,
                       profile=np.ones(2), eta=1.0)
    table = emit_convergence_table(flat, 0.5)
    rows = table.strip().splitlines()
    assert [row.split()[2] for row in rows[1:]] == ["0", "0"]
    empty = SolveReport(iterations=0, sup_diffs=[], sigma0=1.0,
                        rate_bound_ok=True, monotone_ok=True, residual_inf=0.0,
                        profile=np.ones(2), eta=1.0)
    assert emit_convergence_table(empty, 0.5).strip() == "n sup_diff envelope ratio"


def test_run_entry_point(tmp_path):
    cfg = write_config(tmp_path)
    assert run(cfg, tmp_path / "out", mode="check") == 0
    assert run(tmp_path / "missing.yaml", tmp_path / "out2") == 2
