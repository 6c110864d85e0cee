import numpy as np
import pytest
from numpy.testing import assert_allclose

from fem_core import interpolate
from mesh import build_unit_square
from mms import (MANUFACTURED_PARAMS, ConvergenceRow, ConvergenceTable, ManufacturedCase,
                 convergence_study, exact_displacement, format_convergence_table, l2_error,
                 manufactured_forcing, numerical_forcing, solve_cycle, write_convergence_csv)
from models import FieldKind


class TestForcing:
    def test_linear_closed_form(self, rng):
        x, y = rng.uniform(0, 1, (2, 20))
        linear = MANUFACTURED_PARAMS.linearized()
        # -div E[eps(u*)] = 2 mu u* since div u* = 0 and laplace u* = -2 u*
        assert_allclose(manufactured_forcing(x, y, linear), 2.0 * exact_displacement(x, y), rtol=1e-14)
        assert_allclose(numerical_forcing(x, y, linear), manufactured_forcing(x, y, linear), atol=1e-8)

    def test_finite_differences_match_closed_form(self, rng):
        x = rng.uniform(0.0, 1.0, 10)
        y = rng.uniform(0.05, 1.0, 10)
        assert_allclose(numerical_forcing(x, y), manufactured_forcing(x, y), atol=1e-6)

    def test_origin(self):
        assert_allclose(manufactured_forcing(0.0, 0.0), [0.0, 2.0])
        assert np.all(np.isfinite(manufactured_forcing(0.0, 0.0)))

    def test_hook_shape(self, rng):
        x, y = rng.uniform(0, 1, (2, 3, 4))
        assert manufactured_forcing(x, y, MANUFACTURED_PARAMS).shape == (3, 4, 2)


class TestManufacturedCase:
    def test_coercive_on_unit_square(self):
        value = ManufacturedCase().check_coercive()
        # beta * 2 sqrt(mu) * max |cos x sin y| = sin(1) at (0, 1)
        assert value == pytest.approx(np.sin(1.0), rel=1e-6)
        assert value < 1.0

    def test_boundary_trace(self):
        assert len(ManufacturedCase().boundary_conditions()) == 8


class TestL2Error:
    def test_interpolant_error_is_second_order(self):
        errors = []
        for r in (2, 3, 4):
            mesh = build_unit_square(r)
            u = interpolate(mesh, lambda x, y: np.moveaxis(exact_displacement(x, y), -1, 0), FieldKind.VECTOR)
            errors.append(l2_error(mesh, u))
        assert all(e > 0 for e in errors)
        rates = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
        assert_allclose(rates, 2.0, atol=0.15)

    def test_linear_field_exact(self):
        mesh = build_unit_square(2)

        def linear(x, y):
            return np.stack([x + 2 * y, 3 * x - y], axis=-1)

        u = interpolate(mesh, lambda x, y: np.moveaxis(linear(x, y), -1, 0), FieldKind.VECTOR)
        assert l2_error(mesh, u, linear) < 1e-14


class TestConvergenceStudy:
    def test_first_cycle(self):
        row = solve_cycle(1)
        assert row.h == 0.5
        assert row.l2_error > 0.0
        assert row.l2_error == pytest.approx(0.030660254881, rel=0.15)

    @pytest.mark.slow
    def test_errors_decrease_at_second_order(self):
        table = convergence_study(4)
        errors = table.errors
        assert all(b < a for a, b in zip(errors, errors[1:]))
        assert [row.h for row in table.rows] == [0.5, 0.25, 0.125, 0.0625]
        assert table.rows[0].rate is None
        for rate in table.rates:
            assert 1.5 <= rate <= 3.5
        assert table.rates[-1] == pytest.approx(2.0, abs=0.5)

    def test_needs_two_cycles(self):
        with pytest.raises(ValueError):
            convergence_study(1)


def test_table_outputs(tmp_path):
    table = ConvergenceTable([ConvergenceRow(1, 0.5, 0.03), ConvergenceRow(2, 0.25, 0.005, 2.585)])
    text = format_convergence_table(table)
    assert "cycle" in text and "2.5850" in text
    lines = write_convergence_csv(table, tmp_path / "mms.csv").read_text().splitlines()
    assert lines[0] == "cycle,h,l2_error,rate"
    assert len(lines) == 3
    assert lines[1].endswith(",")
    assert float(lines[2].split(",")[3]) == pytest.approx(2.585)
