"""Tests for vanishing counts, congruence ratios, histograms and log-power fits"""

from fractions import Fraction
from math import log

import pytest

from errors import EmptyDenominator
from field_arith import normalize_prime
from stats import (
    CountSeries, conjectured_power, congruence_ratio, congruence_table, logpower_fit, normalized_count_series,
    normalized_histogram, ratio_prediction, slice_stats, vanishing_counts,
)
from waldspurger import TwistRecord, twist_table


def _record(F, a, b, c, chi=None):
    D = F(a, b)
    n = D.norm()
    return TwistRecord(
        D=D,
        abs_norm=n,
        trace_abs=-D.trace(),
        is_rational=(b == 0),
        c=Fraction(c),
        vanishes=(c == 0),
        normalized=c / n ** 0.25,
        chi=chi or {},
    )


@pytest.fixture
def records(F):
    return [
        _record(F, -3, 1, 1),
        _record(F, -3, 0, -1),
        _record(F, -10, 3, 2),
        _record(F, -43, 8, 0),
        _record(F, -67, 29, 0),
        _record(F, -7, 0, 0),
    ]


class TestVanishingCounts:
    def test_counts(self, records):
        series = vanishing_counts(records, [10, 100, 2000])
        assert series.counts_permitted == [2, 4, 6]
        assert series.vanish_ZF == [0, 1, 3]
        assert series.counts_Z == [1, 2, 2]
        assert series.vanish_Z == [0, 1, 1]

    def test_empty(self):
        series = vanishing_counts([], [10, 100])
        assert series.counts_all == [0, 0]
        assert series.vanish_ZF == [0, 0]

    def test_rows(self, records):
        rows = vanishing_counts(records, [100]).rows()
        assert rows == [{'X': 100, 'n_all': 4, 'n_permitted': 4, 'n_vanish': 1, 'n_rational': 2, 'n_vanish_rational': 1}]


class TestCongruenceRatio:
    """Vanishing ratios split by chi_D(q)"""

    def test_predictions(self):
        assert ratio_prediction(5, -2) == pytest.approx(1.41421356, abs=1e-6)
        assert ratio_prediction(9, 2) == pytest.approx(0.81649658, abs=1e-6)
        assert ratio_prediction(11, 4) == pytest.approx(0.70710678, abs=1e-6)
        assert ratio_prediction(19, -4) == pytest.approx(1.22474487, abs=1e-6)
        assert ratio_prediction(29, -2) == pytest.approx(1.06904497, abs=1e-6)

    def test_symmetry(self):
        for n, a in ((5, -2), (11, 4), (19, 4), (29, -2)):
            assert ratio_prediction(n, -a) == pytest.approx(1 / ratio_prediction(n, a))

    def test_counts(self, records, F):
        ratio = congruence_ratio(records, normalize_prime(F, F(-1, 2)), -2)
        assert (ratio.num, ratio.den) == (1, 1)
        assert ratio.ratio == 1.0
        assert ratio.prediction == pytest.approx(2 ** 0.5)

    def test_empty_denominator(self, F):
        q = normalize_prime(F, F(-1, 2))
        with pytest.raises(EmptyDenominator):
            congruence_ratio([_record(F, -3, 1, 1)], q, -2)

    def test_table_rows(self, pkg, F, records):
        rows = congruence_table(records, pkg)
        norms = [r.q.norm for r in rows]
        assert 4 not in norms
        assert norms == sorted(norms)
        for r in rows:
            assert r.prediction == pytest.approx(ratio_prediction(r.q.norm, r.a_q))

    @pytest.mark.slow
    def test_ratios_near_prediction_at_one_million(self, pkg):
        table = twist_table(pkg, 10 ** 6, workers=8)
        rows = congruence_table(table, pkg)
        assert sorted(r.q.norm for r in rows) == [5, 9, 11, 11, 19, 19, 29, 29]
        for r in rows:
            assert abs(r.ratio - r.prediction) <= 0.10 * r.prediction, r.as_row()


class TestHistogram:
    def test_counts(self, records):
        histogram = normalized_histogram(records, 4)
        assert int(histogram.counts.sum()) == len(records)
        assert len(histogram.edges) == 5
        assert histogram.max_abs == pytest.approx(max(abs(r.normalized) for r in records))

    def test_empty(self):
        histogram = normalized_histogram([], 10)
        assert histogram.counts.size == 0
        assert histogram.rows() == []

    def test_bins_validated(self, records):
        with pytest.raises(ValueError):
            normalized_histogram(records, 0)


class TestLogPowerFit:
    """Fixed-power least squares in log log X"""

    def test_conjectured_power(self):
        assert conjectured_power(2) == 0.75
        assert conjectured_power(2, rational=True) == 0.25

    def test_recovers_exponent(self):
        grid = [10 ** k for k in range(2, 8)]
        counts = [3.0 * X ** 0.75 * log(X) ** 1.375 for X in grid]
        fit = logpower_fit((grid, counts), 2)
        assert fit.exponent == pytest.approx(1.375, abs=1e-6)
        assert fit.constant == pytest.approx(3.0, rel=1e-6)
        assert not fit.degenerate

    def test_degenerate(self):
        fit = logpower_fit(([100, 1000, 10000, 100000], [5, 5, 5, 5]), 2)
        assert fit.degenerate

    def test_too_few_points(self):
        with pytest.raises(ValueError, match="at least 3"):
            logpower_fit(([100, 1000], [1, 2]), 2)

    def test_from_series(self):
        series = CountSeries([10 ** k for k in range(2, 6)])
        series.vanish_ZF = [int(X ** 0.75 * log(X) ** 2) for X in series.grid]
        series.vanish_Z = [0] * 4
        fit = logpower_fit(series, 2)
        assert fit.exponent == pytest.approx(2.0, abs=0.05)

    def test_normalized_series(self):
        series = CountSeries([100, 1000], vanish_ZF=[10, 50], vanish_Z=[1, 2])
        curves = normalized_count_series(series, 2, exponents=(1.0,))
        (X, value), _ = curves[1.0]
        assert X == 100
        assert value == pytest.approx(10 / (100 ** 0.75 * log(100)))


class TestSliceStats:
    def test_full_window(self, records):
        stats = slice_stats(records, 0, 10 ** 6)
        assert stats.total == len(records)
        assert stats.vanishing == 3

    def test_empty_window(self, records):
        stats = slice_stats(records, 5, 5)
        assert (stats.vanishing, stats.total) == (0, 0)
        with pytest.raises(ValueError):
            slice_stats(records, 10, 5)

    def test_split_by_character(self, records, F):
        q = normalize_prime(F, F(-1, 2))
        stats = slice_stats(records, 0, 10 ** 6, q)
        assert (stats.plus, stats.minus) == (1, 1)
        assert stats.vanishing == 3
