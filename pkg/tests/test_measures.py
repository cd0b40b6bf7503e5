"""Measure coordinates, the sup metric, equivalence and grid enumeration."""
from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from binarycps.errors import GridCapError, ShapeError
from binarycps.measures import (
    Measure,
    d_infinity,
    equivalent_to_P,
    flat_dim,
    grid_count,
    grid_measures,
)


def flat_measures(n_steps: int):
    return st.lists(
        st.floats(0, 1), min_size=flat_dim(n_steps), max_size=flat_dim(n_steps)
    ).map(lambda flat: Measure.from_flat(n_steps, flat))


class TestDInfinity:
    def test_identical_measures(self):
        q = Measure.constant(2, 0.4)
        assert d_infinity(q, q) == 0

    def test_single_coordinate(self):
        a = Measure(2, ((0.5,), (0.5, 0.5)))
        b = Measure(2, ((0.6,), (0.5, 0.5)))
        assert d_infinity(a, b) == pytest.approx(0.1, abs=1e-15)

    def test_takes_the_max(self):
        a = Measure(2, ((0.5,), (0.5, 0.5)))
        b = Measure(2, ((0.55,), (0.7, 0.51)))
        assert d_infinity(a, b) == pytest.approx(0.2, abs=1e-15)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            d_infinity(Measure.constant(1, 0.5), Measure.constant(2, 0.5))

    @given(st.integers(1, 3), st.data())
    @settings(max_examples=100, deadline=None)
    def test_metric_laws(self, n_steps, data):
        a = data.draw(flat_measures(n_steps))
        b = data.draw(flat_measures(n_steps))
        c = data.draw(flat_measures(n_steps))
        assert d_infinity(a, b) == d_infinity(b, a)
        assert d_infinity(a, a) == 0
        if d_infinity(a, b) == 0:
            assert a.q == b.q
        assert d_infinity(a, c) <= d_infinity(a, b) + d_infinity(b, c) + 1e-15


class TestEquivalence:
    def test_interior(self):
        assert equivalent_to_P(Measure.constant(3, 0.5))

    def test_boundary_coordinate(self):
        assert not equivalent_to_P(Measure(2, ((0.5,), (1.0, 0.5))))

    def test_open_interval_is_enough(self):
        assert equivalent_to_P(Measure.constant(2, 1 - 1e-12))


class TestGrid:
    def test_one_step_three_points(self):
        got = list(grid_measures(1, 2))
        assert [g.q[0][0] for g in got] == [0.0, 0.5, 1.0]

    def test_two_step_counting(self):
        got = list(grid_measures(2, 1))
        assert len(got) == 8 == grid_count(2, 1)

    def test_cap_refusal_names_count(self):
        with pytest.raises(GridCapError, match=str(65**15)):
            next(grid_measures(4, 64, cap=10_000_000))

    def test_requires_positive_subdivisions(self):
        with pytest.raises(ValueError):
            next(grid_measures(1, 0))

    @given(st.integers(1, 3), st.integers(1, 6), st.data())
    @settings(max_examples=60, deadline=None)
    def test_rounding_lands_within_half_step(self, n_steps, m, data):
        target = data.draw(flat_measures(n_steps))
        rounded = Measure.from_flat(
            n_steps, [round(v * m) / m for v in target.flat()]
        )
        assert d_infinity(target, rounded) <= 1 / (2 * m) + 1e-12
        assert all(any(abs(v - k / m) < 1e-12 for k in range(m + 1)) for v in rounded.flat())


class TestLayout:
    def test_flat_roundtrip(self):
        q = Measure(3, ((0.1,), (0.2, 0.3), (0.4, 0.5, 0.6, 0.7)))
        assert Measure.from_flat(3, list(q.flat())).q == q.q

    def test_entries_order(self):
        q = Measure(2, ((0.1,), (0.2, 0.3)))
        assert list(q.entries()) == [(1, 0, 0.1), (2, 0, 0.2), (2, 1, 0.3)]

    def test_clamped_pushes_boundaries_inside(self):
        q = Measure(1, ((1.0,),)).clamped(1e-6)
        assert q.q[0][0] == 1 - 1e-6
