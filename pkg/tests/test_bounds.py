import pytest
from hypothesis import given
from hypothesis import strategies as st

from fcl import ast as A
from fcl.bounds import BoundRole, ResolvedWindow, check_bounds, resolve_bound, resolve_window
from fcl.errors import FclLoadError, UnresolvedEndcountError

# floor(0.8 * m) for m = 1..39
SCALED_MAX = [0, 1, 2, 3, 4, 4, 5, 6, 7, 8, 8, 9, 10, 11, 12, 12, 13, 14, 15, 16,
              16, 17, 18, 19, 20, 20, 21, 22, 23, 24, 24, 25, 26, 27, 28, 28, 29, 30, 31]


def within(n, t):
    return A.Within(n, t, A.Const(True))


@pytest.mark.parametrize("remaining, expected", list(enumerate(SCALED_MAX, start=1)))
def test_scaled_max_is_floored(remaining, expected):
    bound = A.Bound(A.BoundKind.MAX, factor=0.8)
    assert resolve_bound(bound, 0, remaining + 1, BoundRole.COUNT) == expected


def test_factor_uses_decimal_arithmetic():
    bound = A.Bound(A.BoundKind.MAX, factor=0.29)
    assert resolve_bound(bound, 0, 101, BoundRole.COUNT) == 29


def test_endcounts():
    assert resolve_bound(A.MAX, 2, 10, BoundRole.COUNT) == 7
    assert resolve_bound(A.BEG, 2, 10, BoundRole.COUNT) == 2
    assert resolve_bound(A.BEG, 2, 10, BoundRole.WINDOW) == -2
    assert resolve_bound(A.INF, 2, 10, BoundRole.WINDOW) == 7


def test_max_needs_the_trace_length():
    with pytest.raises(UnresolvedEndcountError):
        resolve_bound(A.MAX, 0, None, BoundRole.WINDOW)
    # BEG is always known
    assert resolve_bound(A.BEG, 4, None, BoundRole.COUNT) == 4


def test_inf_is_not_a_count():
    with pytest.raises(FclLoadError):
        resolve_bound(A.INF, 0, 10, BoundRole.COUNT)


class TestClamping:
    def test_forward_window_clamped_to_the_trace_end(self):
        assert resolve_bound(A.Bound.literal(5), 0, 4, BoundRole.WINDOW, n=2) == 3

    def test_forward_window_kept_when_count_exceeds_the_rest(self):
        assert resolve_bound(A.Bound.literal(5), 0, 4, BoundRole.WINDOW, n=4) == 5

    def test_backward_window_clamped_to_the_trace_start(self):
        assert resolve_bound(A.Bound.literal(-10), 3, None, BoundRole.WINDOW, n=2) == -3

    def test_backward_window_kept_when_count_exceeds_the_past(self):
        assert resolve_bound(A.Bound.literal(-10), 3, None, BoundRole.WINDOW, n=5) == -10

    def test_resolve_window_applies_clamping(self):
        window = resolve_window(within(A.Bound.literal(1), A.Bound.literal(15)), 0, 6)
        assert window == ResolvedWindow(1, 5)


def test_inf_count_takes_the_whole_window():
    assert resolve_window(within(A.INF, A.MAX), 2, 10) == ResolvedWindow(7, 7)
    assert resolve_window(within(A.INF, A.INF), 9, 10) == ResolvedWindow(0, 0)


class TestResolvedWindow:
    def test_vacuous(self):
        assert ResolvedWindow(0, 5).vacuous
        assert ResolvedWindow(3, 0).vacuous
        assert not ResolvedWindow(1, 1).vacuous

    def test_impossible(self):
        assert ResolvedWindow(4, 3).impossible
        assert ResolvedWindow(4, -3).impossible
        assert not ResolvedWindow(3, -3).impossible

    def test_forward_steps_stop_at_the_last_step(self):
        assert list(ResolvedWindow(1, 5).steps(2, 5)) == [3, 4]

    def test_backward_steps_stop_at_step_zero(self):
        assert list(ResolvedWindow(1, -5).steps(3, 10)) == [0, 1, 2]
        assert list(ResolvedWindow(1, -2).steps(3, 10)) == [1, 2]

    def test_truncated(self):
        assert ResolvedWindow(1, 5).truncated(2, 5)
        assert not ResolvedWindow(1, 2).truncated(2, 5)


@given(st.integers(1, 60), st.data())
def test_forward_windows_stay_inside_the_trace(length, data):
    step = data.draw(st.integers(0, length - 1))
    n = data.draw(st.integers(0, 10))
    t = data.draw(st.integers(1, 70))
    window = resolve_window(within(A.Bound.literal(n), A.Bound.literal(t)), step, length)
    steps = list(window.steps(step, length))
    assert all(step < s < length for s in steps)
    assert len(steps) <= window.t
    if n <= length - 1 - step:
        # clamped windows always fit
        assert len(steps) == window.t


@given(st.integers(0, 60), st.integers(-70, -1), st.integers(0, 10))
def test_backward_windows_stay_inside_the_trace(step, t, n):
    window = resolve_window(within(A.Bound.literal(n), A.Bound.literal(t)), step, None)
    assert all(0 <= s < step for s in window.steps(step, step + 1))


class TestCheckBounds:
    def test_well_formed(self):
        assert check_bounds(within(A.Bound(A.BoundKind.MAX, factor=0.8), A.MAX)) == []
        assert check_bounds(within(A.INF, A.INF)) == []

    def test_factor_range(self):
        problems = check_bounds(within(A.Bound(A.BoundKind.MAX, factor=1.5), A.MAX))
        assert problems == ["count factor 1.5 must lie in (0, 1]"]

    def test_factor_needs_an_endcount(self):
        problems = check_bounds(within(A.Bound(A.BoundKind.LITERAL, 3, factor=0.5), A.MAX))
        assert problems == ["count factor needs MAX or BEG"]

    def test_negative_count(self):
        assert check_bounds(within(A.Bound.literal(-1), A.MAX)) == ["count -1 must not be negative"]

    def test_inf_count_needs_an_open_window(self):
        assert check_bounds(within(A.INF, A.Bound.literal(5))) == [
            "INF as a count needs an INF or MAX window"
        ]

    def test_inf_count_needs_an_unscaled_window(self):
        assert check_bounds(within(A.INF, A.Bound(A.BoundKind.MAX, factor=0.5))) == [
            "INF as a count needs an unscaled window"
        ]
