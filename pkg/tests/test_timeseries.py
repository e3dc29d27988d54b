import numpy as np
import pytest
from hypothesis import given, strategies as st

from cpipricing.errors import EmptyIntersection, ParseError
from cpipricing.timeseries import (
    MonthlyIndex, MonthlySeries, Window, align, months_between, shift, time_trend, trend_values,
)

months = st.builds(MonthlyIndex, st.integers(1950, 2050), st.integers(1, 12))


def series(id, start, values):
    return MonthlySeries(id, MonthlyIndex.parse(start), np.asarray(values, dtype=float))


@st.composite
def random_series(draw, id="S"):
    start = draw(months)
    n = draw(st.integers(1, 40))
    values = draw(st.lists(st.floats(-1e6, 1e6), min_size=n, max_size=n))
    return MonthlySeries(id, start, values)


class TestMonthlyIndex:
    def test_parse_and_str(self):
        m = MonthlyIndex.parse("2003-07")
        assert (m.year, m.month) == (2003, 7)
        assert str(m) == "2003-07"

    @pytest.mark.parametrize("text", ["2003-13", "2003-00", "03-07", "2003/07", "", "abcd-ef"])
    def test_parse_rejects(self, text):
        with pytest.raises(ParseError):
            MonthlyIndex.parse(text)

    def test_month_range_checked(self):
        with pytest.raises(ValueError):
            MonthlyIndex(2000, 13)

    def test_arithmetic_across_year(self):
        assert MonthlyIndex(2003, 11) + 3 == MonthlyIndex(2004, 2)
        assert MonthlyIndex(2004, 2) - 3 == MonthlyIndex(2003, 11)
        assert MonthlyIndex(2004, 2) - MonthlyIndex(2003, 11) == 3
        assert months_between(MonthlyIndex(2003, 7), MonthlyIndex(2009, 12)) == 78

    @given(months, months)
    def test_order_matches_ordinal(self, a, b):
        assert (a < b) == (12 * a.year + a.month < 12 * b.year + b.month)

    @given(months, st.integers(-500, 500))
    def test_add_sub_roundtrip(self, m, k):
        assert (m + k) - k == m
        assert (m + k) - m == k


class TestWindow:
    def test_length_and_iteration(self):
        w = Window.parse("2003-07", "2009-12")
        assert len(w) == 78
        assert list(w)[0] == MonthlyIndex(2003, 7)
        assert list(w)[-1] == MonthlyIndex(2009, 12)

    def test_first_after_last_rejected(self):
        with pytest.raises(ValueError):
            Window.parse("2004-01", "2003-12")

    def test_intersect(self):
        a = Window.parse("2003-01", "2003-12")
        assert a.intersect(Window.parse("2003-06", "2004-06")) == Window.parse("2003-06", "2003-12")
        assert a.intersect(Window.parse("2005-01", "2005-02")) is None


class TestSeries:
    def test_values_read_only(self):
        s = series("S", "2003-01", [1, 2, 3])
        with pytest.raises(ValueError):
            s.values[0] = 5

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            series("S", "2003-01", [1, np.nan])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            series("S", "2003-01", [])

    def test_at_and_slice(self):
        s = series("S", "2003-01", [1, 2, 3, 4])
        assert s.at(MonthlyIndex(2003, 3)) == 3
        np.testing.assert_array_equal(s.slice(Window.parse("2003-02", "2003-03")), [2, 3])
        with pytest.raises(KeyError):
            s.slice(Window.parse("2003-03", "2003-05"))

    def test_truncate(self):
        s = series("S", "2003-01", [1, 2, 3, 4])
        assert s.truncate(MonthlyIndex(2003, 2)) == series("S", "2003-01", [1, 2])
        assert s.truncate(MonthlyIndex(2002, 12)) is None


class TestShift:
    def test_zero_is_identity(self):
        s = series("S", "2003-01", [1, 2, 3])
        assert shift(s, 0) == s

    def test_moves_start_forward(self):
        s = series("S", "2003-01", [1, 2, 3])
        moved = shift(s, 2)
        assert moved.start == MonthlyIndex(2003, 3)
        assert moved.at(MonthlyIndex(2003, 3)) == 1
        np.testing.assert_array_equal(moved.values, [1, 2, 3])

    def test_inverse(self):
        s = series("S", "2003-01", [1, 2, 3])
        assert shift(shift(s, 5), -5) == s

    @given(random_series(), st.integers(-30, 30), st.integers(-30, 30))
    def test_group_action(self, s, a, b):
        assert shift(shift(s, a), b) == shift(s, a + b)

    @given(random_series(), st.integers(-30, 30))
    def test_value_reindexing(self, s, lag):
        moved = shift(s, lag)
        for m in s.window:
            assert moved.at(m + lag) == s.at(m)


class TestAlign:
    def test_single_series(self):
        s = series("S", "2003-01", [1, 2, 3])
        window, matrix = align([s])
        assert window == s.window
        np.testing.assert_array_equal(matrix[:, 0], s.values)

    def test_overlap(self):
        a = series("A", "2003-01", np.arange(12))
        b = series("B", "2003-06", np.arange(13))
        window, matrix = align([a, b])
        assert window == Window.parse("2003-06", "2003-12")
        assert matrix.shape == (7, 2)
        np.testing.assert_array_equal(matrix[:, 0], np.arange(5, 12))
        np.testing.assert_array_equal(matrix[:, 1], np.arange(7))

    def test_disjoint(self):
        with pytest.raises(EmptyIntersection):
            align([series("A", "2003-01", [1, 2]), series("B", "2004-01", [1, 2])])

    @given(st.lists(random_series(), min_size=2, max_size=4), st.randoms())
    def test_permutation(self, items, rnd):
        order = list(range(len(items)))
        rnd.shuffle(order)
        try:
            window, matrix = align(items)
        except EmptyIntersection:
            with pytest.raises(EmptyIntersection):
                align([items[i] for i in order])
            return
        window2, matrix2 = align([items[i] for i in order])
        assert window2 == window
        np.testing.assert_array_equal(matrix2, matrix[:, order])


class TestTrend:
    @pytest.mark.parametrize("month,expected", [("2000-01", 0.0), ("2000-07", 0.5),
                                                ("2009-12", 9 + 11 / 12)])
    def test_values(self, month, expected):
        assert time_trend(MonthlyIndex.parse(month)) == pytest.approx(expected, abs=1e-12)

    @given(months)
    def test_affine_slope(self, m):
        assert time_trend(m + 1) - time_trend(m) == pytest.approx(1 / 12, abs=1e-9)
        assert time_trend(m + 1) > time_trend(m)

    def test_trend_values_matches_scalar(self):
        w = Window.parse("2003-07", "2004-03")
        np.testing.assert_allclose(trend_values(w), [time_trend(m) for m in w], atol=1e-12)
