import pytest

from main import EXIT_CONFIG, EXIT_FAILURE, EXIT_OK, MMS_CSV, main, sweep_configs
from config import RunConfig
from output_manager import FIELDS_FILE, MANIFEST_FILE, SUMMARY_FILE, read_summary


def test_run_linear(tmp_path, capsys):
    code = main(["run", "--refinements", "2", "--model", "linear", "--outdir", str(tmp_path)])
    assert code == EXIT_OK
    directory = tmp_path / "example1_case1_linear"
    assert (directory / FIELDS_FILE).is_file()
    assert (directory / SUMMARY_FILE).is_file()
    assert "results in" in capsys.readouterr().out


def test_zero_beta_nonlinear_is_config_error(tmp_path, capsys):
    code = main(["run", "--refinements", "2", "--beta", "0", "--outdir", str(tmp_path)])
    assert code == EXIT_CONFIG
    assert "beta" in capsys.readouterr().out
    assert not any(tmp_path.iterdir())


def test_config_file_error(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("refinements = two\n")
    assert main(["run", "--config", str(path)]) == EXIT_CONFIG
    assert "line 1" in capsys.readouterr().out


def test_iteration_cap_prints_history(tmp_path, capsys):
    code = main(["run", "--refinements", "2", "--max-iter", "1", "--outdir", str(tmp_path)])
    assert code == EXIT_FAILURE
    out = capsys.readouterr().out
    assert "FAILED" in out
    assert "residual history" in out


def test_mms_two_cycles(tmp_path):
    assert main(["mms", "--cycles", "2", "--outdir", str(tmp_path)]) == EXIT_OK
    lines = (tmp_path / MMS_CSV).read_text().splitlines()
    assert lines[0] == "cycle,h,l2_error,rate"
    assert len(lines) == 3


def test_mms_needs_two_cycles(tmp_path):
    assert main(["mms", "--cycles", "1", "--outdir", str(tmp_path)]) == EXIT_FAILURE


def test_sweep_covers_every_combination():
    configs = sweep_configs(RunConfig(refinements=2))
    assert len(configs) == 8
    assert len({(c.domain, c.case, c.model) for c in configs}) == 8


@pytest.mark.slow
def test_sweep(tmp_path):
    code = main(["sweep", "--refinements", "2", "--outdir", str(tmp_path)])
    assert code == EXIT_OK
    assert len([p for p in tmp_path.iterdir() if p.is_dir()]) == 8
    assert len((tmp_path / MANIFEST_FILE).read_text().splitlines()) == 9


def test_strain_limit_failure_leaves_summary(tmp_path, capsys):
    code = main(["run", "--refinements", "2", "--beta", "2.0", "--outdir", str(tmp_path)])
    assert code == EXIT_FAILURE
    assert "Strain limit violated" in capsys.readouterr().out
    summary = read_summary(tmp_path / "example1_case1_nonlinear" / SUMMARY_FILE)
    assert summary["converged"] == "false"
    assert summary["error"] == "StrainLimitViolation"
    assert summary["iterations"] == "1"


@pytest.mark.slow
def test_sweep_manifest_lists_failed_runs(tmp_path):
    code = main(["sweep", "--refinements", "2", "--beta", "2.0", "--outdir", str(tmp_path)])
    assert code == EXIT_FAILURE
    rows = [line.split(",") for line in (tmp_path / MANIFEST_FILE).read_text().splitlines()[1:]]
    assert len(rows) == 8
    failed = [row for row in rows if row[4] == "false"]
    assert failed and all(row[3] == "nonlinear" for row in failed)
    assert all("Strain limit violated" in row[-1] for row in failed)
    for row in failed:
        assert (tmp_path / row[0] / SUMMARY_FILE).is_file()
