import math

import pytest

from src.reports import SweepRow
from src.sweep_stats import SweepStatistics, sweep_statistics


def _rows(constant=1.3):
    return [SweepRow(m=m, N=m * m, D_arch=constant / (m * m), D_lower=2 * constant / (m * m),
                     rhs=(math.log(m * m) / 2 + 3.2) / (m * m), slack=0.1 * m)
            for m in (4, 2, 5, 3)]


def test_rows_are_sorted_by_level():
    stats = SweepStatistics(_rows())
    assert [row.m for row in stats.rows] == [2, 3, 4, 5]
    assert stats.calculate_row_count() == 4


def test_inverse_square_decay():
    stats = SweepStatistics(_rows())
    assert stats.calculate_decay_exponent() == pytest.approx(-2.0)
    assert stats.calculate_scaled_spread() == pytest.approx(0.0, abs=1e-12)
    assert stats.is_decreasing()
    assert stats.calculate_min_slack() == pytest.approx(0.2)


def test_all_statistics():
    stats = sweep_statistics(_rows())
    assert stats['rows'] == 4.0
    assert stats['decreasing'] == 1.0
    assert stats['exponent_error'] == pytest.approx(0.0, abs=1e-9)


def test_empty_and_single_row():
    empty = sweep_statistics([])
    assert empty['decay_exponent'] is None
    assert empty['min_slack'] is None
    single = SweepStatistics(_rows()[:1])
    assert single.calculate_decay_exponent() is None
    assert single.is_decreasing()


def test_non_monotone_series_is_flagged():
    rows = _rows()
    rows.append(SweepRow(m=6, N=36, D_arch=1.0, D_lower=1.0, rhs=1.0, slack=0.0))
    assert not SweepStatistics(rows).is_decreasing()
