from dataclasses import replace

import pytest

from config import OUTDIR_ENV, RunConfig, format_config, parse_config, parse_config_text
from errors import ConfigError
from models import Domain, ModelKind, TemperatureCase


def write(tmp_path, text):
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return path


class TestDefaults:
    def test_material_defaults(self):
        params = RunConfig().material()
        assert (params.lam, params.mu, params.a, params.beta) == (1.0, 1.0, 0.5, 0.02)
        assert (params.k, params.g, params.alpha_t) == (20.0, -10.0, 0.1)
        assert params.alpha == pytest.approx(0.5)

    def test_run_defaults(self):
        config = RunConfig()
        assert config.refinements == 7
        assert config.newton().tol == 1e-8 and config.newton().max_iter == 50
        assert config.validate() == {"valid": True, "errors": []}


class TestParse:
    def test_file_values(self, tmp_path):
        path = write(tmp_path, "# comment\ndomain = example2\ncase = 2\nmodel = linear\nrefinements = 3\n"
                               "lambda = 2.5  # trailing comment\nexport_vtk = no\n")
        config = parse_config(path, environ={})
        assert config.domain is Domain.EXAMPLE2
        assert config.case is TemperatureCase.CASE2
        assert config.model is ModelKind.LINEAR
        assert config.refinements == 3
        assert config.lam == 2.5
        assert config.export_vtk is False

    def test_flag_overrides_file(self, tmp_path):
        path = write(tmp_path, "beta = 0.01\nrefinements = 4\n")
        config = parse_config(path, {"beta": 0.03, "refinements": None}, environ={})
        assert config.beta == 0.03
        assert config.refinements == 4

    def test_zero_beta_nonlinear_names_key_and_line(self, tmp_path):
        path = write(tmp_path, "model = nonlinear\nbeta = 0\n")
        with pytest.raises(ConfigError) as info:
            parse_config(path, environ={})
        assert info.value.key == "beta"
        assert info.value.line == 2

    def test_zero_beta_from_flag_has_no_line(self):
        with pytest.raises(ConfigError) as info:
            parse_config(None, {"beta": 0.0}, environ={})
        assert info.value.key == "beta"
        assert info.value.line is None

    def test_zero_beta_allowed_for_linear(self):
        config = parse_config(None, {"beta": 0.0, "model": ModelKind.LINEAR}, environ={})
        assert config.material().beta == 0.0

    def test_unknown_key(self, tmp_path):
        with pytest.raises(ConfigError) as info:
            parse_config(write(tmp_path, "refinements = 3\ncolour = red\n"), environ={})
        assert info.value.key == "colour" and info.value.line == 2

    def test_bad_value(self):
        with pytest.raises(ConfigError) as info:
            parse_config_text("tol = small\n")
        assert info.value.key == "tol" and info.value.line == 1

    def test_missing_equals(self):
        with pytest.raises(ConfigError):
            parse_config_text("refinements 3\n")

    def test_slit_needs_refinement(self):
        with pytest.raises(ConfigError) as info:
            parse_config(None, {"domain": Domain.EXAMPLE2, "refinements": 0}, environ={})
        assert info.value.key == "refinements"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_config(tmp_path / "absent.cfg", environ={})


class TestOutdir:
    def test_environment_sets_outdir(self):
        assert parse_config(None, environ={OUTDIR_ENV: "/tmp/elsewhere"}).outdir == "/tmp/elsewhere"

    def test_file_beats_environment(self, tmp_path):
        path = write(tmp_path, "outdir = from_file\n")
        assert parse_config(path, environ={OUTDIR_ENV: "from_env"}).outdir == "from_file"

    def test_flag_beats_environment(self):
        config = parse_config(None, {"outdir": "from_flag"}, environ={OUTDIR_ENV: "from_env"})
        assert config.outdir == "from_flag"


def test_format_round_trip(tmp_path):
    config = replace(RunConfig(), domain=Domain.EXAMPLE2, case=TemperatureCase.CASE2, beta=0.015,
                     refinements=5, total_stress=True, profile_samples=11, mechanics_solver="cg")
    path = write(tmp_path, format_config(config))
    assert parse_config(path, environ={}) == config


def test_validate_reports_every_problem():
    config = replace(RunConfig(), beta=0.0, tol=-1.0, workers=0)
    report = config.validate()
    assert report["valid"] is False
    assert len(report["errors"]) == 3
    assert any(error.startswith("beta:") for error in report["errors"])
