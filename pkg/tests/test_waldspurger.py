"""Tests for the theta combination g, twist tables, central-value ratios and package checks"""

from dataclasses import replace
from fractions import Fraction

import pytest

from errors import DivisionByZero, IrrationalRatio
from export_import import DataExporter, PackageImporter
from field_arith import shintani_reduce
from waldspurger import (
    TwistRecord, build_g, central_value_ratio, central_value_ratio_float, rational_verification_ratios,
    twist_table, verify_package,
)


def _record(F, a, b, c, norm=None):
    D = F(a, b)
    return TwistRecord(
        D=D,
        abs_norm=norm if norm is not None else D.norm(),
        trace_abs=-D.trace(),
        is_rational=(b == 0),
        c=Fraction(c),
        vanishes=(c == 0),
        normalized=0.0,
    )


@pytest.fixture(scope="module")
def g(pkg):
    return build_g(pkg, 130)


class TestBuildG:
    """g = sum of weighted theta series"""

    def test_prefix(self, g, F):
        assert g[F(0)] == 0
        assert g[F(2, 1)] == 1
        assert g[F(3, -1)] == 1
        assert g[F(3, 4)] == 1
        assert g[F(3)] == -1
        assert g[F(3, 3)] == -1
        assert g[F(6, -3)] == -1

    def test_integral_coefficients(self, g):
        assert all(c.denominator == 1 for c in g.coeffs.values())

    def test_unit_square_invariance(self, g, F):
        for nu, c in g.sorted_items():
            moved = nu * F.eps
            if moved.trace() <= g.bound:
                assert g[moved] == c

    def test_resume_from_partials(self, pkg):
        seen = {}
        full = build_g(pkg, 40, on_chunk=lambda i, j, part: seen.__setitem__((i, j), part))
        half = dict(list(seen.items())[: len(seen) // 2])
        resumed = build_g(pkg, 40, done=half)
        assert resumed.coeffs == full.coeffs

    def test_invalid_bound(self, pkg):
        with pytest.raises(ValueError):
            build_g(pkg, 0)


class TestTwistTable:
    """Coefficients at permitted discriminants"""

    def test_bound_100(self, pkg, g):
        table = twist_table(pkg, 100, g=g)
        assert [r.D.key for r in table] == [(-3, 1), (-3, 0), (-10, 3)]
        assert not any(r.vanishes for r in table)
        assert table[0].c == 1
        assert table[1].c == -1

    def test_listed_nonvanishing(self, g, F):
        for D in (F(-2, -1), F(-3, 1), F(-3), F(-3, -3), F(-6, 3), F(-3, -4)):
            rep, _ = shintani_reduce(-D)
            assert g[rep] != 0

    def test_first_vanishing(self, pkg, g):
        table = twist_table(pkg, 1705, g=g)
        vanishing = [r for r in table if r.vanishes]
        assert [r.D.key for r in vanishing[:2]] == [(-43, 8), (-67, 29)]
        assert [r.abs_norm for r in vanishing[:2]] == [1441, 1705]
        assert all(r.abs_norm >= 1441 for r in vanishing)

    def test_character_values_recorded(self, pkg, g):
        table = twist_table(pkg, 100, g=g)
        norms = sorted(q.norm for q in table[0].chi)
        assert 4 not in norms
        assert 31 not in norms
        assert norms[0] == 5

    def test_normalized_weight_two(self, pkg, g):
        for r in twist_table(pkg, 100, g=g):
            assert r.normalized == pytest.approx(float(r.c) / r.abs_norm ** 0.25)

    @pytest.mark.slow
    def test_vanishing_count_10000(self, pkg):
        table = twist_table(pkg, 10 ** 4, workers=4)
        assert len(table) == 439
        assert sum(r.vanishes for r in table) == 41

    @pytest.mark.slow
    def test_vanishing_count_100000(self, pkg):
        table = twist_table(pkg, 10 ** 5, workers=4)
        assert len(table) == 4481
        assert sum(r.vanishes for r in table) == 397


@pytest.mark.slow
class TestDeterminism:
    """Exported tables do not depend on the worker count"""

    def test_twists_csv_identical(self, pkg, tmp_path):
        paths = []
        for workers in (1, 2, 8):
            path = tmp_path / f"twists_{workers}.csv"
            DataExporter.export_twists(twist_table(pkg, 10 ** 4, workers=workers), path)
            paths.append(path)
        assert paths[0].read_bytes() == paths[1].read_bytes() == paths[2].read_bytes()

    def test_g_csv_identical(self, pkg, tmp_path):
        paths = []
        for workers in (1, 2, 8):
            path = tmp_path / f"g_{workers}.csv"
            DataExporter.export_theta(build_g(pkg, 120, workers), path)
            paths.append(path)
        assert paths[0].read_bytes() == paths[1].read_bytes() == paths[2].read_bytes()


class TestCentralValueRatio:
    def test_identity(self, F):
        r = _record(F, -3, 0, -1)
        assert central_value_ratio(r, r, 2) == 1

    def test_vanishing_numerator(self, F):
        assert central_value_ratio(_record(F, -7, 0, 0), _record(F, -3, 0, 1), 2) == 0

    def test_vanishing_denominator(self, F):
        with pytest.raises(DivisionByZero):
            central_value_ratio(_record(F, -3, 0, 1), _record(F, -7, 0, 0), 2)

    def test_rational_value(self, F):
        r1, r2 = _record(F, -7, 0, 2), _record(F, -3, 0, 1)
        assert central_value_ratio(r1, r2, 2) == Fraction(4) * Fraction(3, 7)

    def test_irrational(self, F):
        r1, r2 = _record(F, -2, -1, 1), _record(F, -3, 0, 1)
        with pytest.raises(IrrationalRatio):
            central_value_ratio(r1, r2, 2)
        assert central_value_ratio_float(r1, r2, 2) == pytest.approx((9 / 5) ** 0.5)

    def test_verification_ratios(self, F):
        base = _record(F, -3, 0, 1)
        records = [base, _record(F, -7, 0, 2), _record(F, -2, -1, 1)]
        rows = rational_verification_ratios(records, base)
        assert len(rows) == 2
        assert rows[1][1] == Fraction(7, 3) * Fraction(4) * Fraction(3, 7)
        assert all(square for _, _, square in rows)


class TestVerifyPackage:
    """Structural checks on a form package"""

    def test_shipped_package(self, pkg):
        report = verify_package(pkg)
        assert report.passed, report.as_dict()
        assert report.discriminant_norms == [31, 31]
        assert report.unit_orders == [5, 3]

    def test_wrong_unit_order(self, pkg):
        report = verify_package(replace(pkg, gamma_orders=[4, 3]))
        assert not report.passed
        assert [c.name for c in report.failures] == ["order 1 unit group"]

    def test_even_level(self, pkg, F):
        report = verify_package(replace(pkg, level_gen=F(2)))
        names = {c.name for c in report.failures}
        assert "level odd and squarefree" in names
        assert "Atkin-Lehner signs" in names

    def test_template(self):
        pkg = PackageImporter.load("q5_11a_w4")
        report = verify_package(pkg)
        assert not report.passed
        assert "package complete" in {c.name for c in report.failures}
