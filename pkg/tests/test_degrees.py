import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ppsg.degrees import (
    DegreeSet,
    binom,
    build_total_order,
    downward_closure,
    multi_binom,
    partial_leq,
    validate_degree_set,
)

# Degree pattern of a 2-D set that is NOT downward closed: the full staircase
# minus the interior point (2, 2), while (3, 2) stays in.
STAIRCASE = [
    (m0, 0) for m0 in range(5)
] + [
    (m0, 1) for m0 in range(5)
] + [
    (m0, 2) for m0 in range(4)
] + [
    (m0, 3) for m0 in range(2)
] + [(0, 4)]
STAIRCASE_HOLED = [m for m in STAIRCASE if m != (2, 2)]


def test_binom_small_values():
    assert binom(5, 2) == 10
    assert binom(3, -1) == 0
    assert binom(-1, 2) == 1  # (-1)(-2)/2!
    assert binom(0, 0) == 1
    assert binom(2, 3) == 0


def test_binom_pascal_recurrence_exhaustive():
    for n in range(-10, 11):
        for k in range(0, 11):
            assert binom(n, k) == binom(n - 1, k) + binom(n - 1, k - 1)


def test_multi_binom():
    assert multi_binom((3, 4), (1, 2)) == 18
    assert multi_binom((7, -2, 5), (0, 0, 0)) == 1
    assert multi_binom((2, 5), (3, 1)) == 0
    with pytest.raises(ValueError):
        multi_binom((1, 2), (1,))


def test_partial_leq():
    assert partial_leq((1, 2), (2, 2))
    assert not partial_leq((2, 1), (1, 2))
    assert partial_leq((0, 0), (3, 2))
    with pytest.raises(ValueError):
        partial_leq((1,), (1, 2))


def test_build_total_order_1d_chain():
    M = build_total_order([(2,), (0,), (1,)])
    assert M.degrees == ((0,), (1,), (2,))


def test_build_total_order_tie_break():
    M = build_total_order([(0, 0), (1, 0), (0, 1)])
    assert M.degrees == ((0, 0), (0, 1), (1, 0))
    _assert_compatible(M)


def test_build_total_order_singleton():
    M = build_total_order([(3, 2)])
    assert M.degrees == ((3, 2),)


def _assert_compatible(M: DegreeSet) -> None:
    for i, mi in enumerate(M.degrees):
        for mj in M.degrees[i + 1 :]:
            assert not (partial_leq(mj, mi) and mj != mi)


@settings(max_examples=200, deadline=None)
@given(
    st.sets(
        st.tuples(st.integers(0, 4), st.integers(0, 4)),
        min_size=1,
        max_size=12,
    )
)
def test_build_total_order_always_compatible(degrees):
    _assert_compatible(build_total_order(degrees))


def test_degree_set_rejects_duplicates_and_negatives():
    with pytest.raises(ValueError):
        DegreeSet(((1,), (1,)))
    with pytest.raises(ValueError):
        DegreeSet(((-1,),))
    with pytest.raises(ValueError):
        DegreeSet(())


def test_degree_set_rejects_incompatible_order():
    with pytest.raises(ValueError):
        DegreeSet(((1,), (0,)))


def test_degree_set_accepts_any_compatible_order():
    M = DegreeSet(((0, 0), (1, 0), (0, 1), (1, 1)))
    assert M.position((1, 0)) == 1


def test_degree_set_json_roundtrip():
    M = build_total_order([(0, 0), (0, 1), (1, 0)])
    assert M.to_json() == [[0, 0], [0, 1], [1, 0]]
    assert DegreeSet.from_json(M.to_json()) == M


def test_validate_degree_set_boundary_window():
    M = build_total_order([(0,), (1,), (2,)])
    report = validate_degree_set(M, (3,))
    assert report.window_ok and report.downward_closed


def test_validate_degree_set_monomial_not_closed():
    M = build_total_order([(3,)])
    report = validate_degree_set(M, (16,))
    assert report.window_ok and not report.downward_closed


def test_validate_degree_set_staircase_hole():
    M = build_total_order(STAIRCASE_HOLED)
    report = validate_degree_set(M, (5, 5))
    assert report.window_ok and not report.downward_closed
    assert validate_degree_set(build_total_order(STAIRCASE), (5, 5)).downward_closed


def test_downward_closure_monomial():
    M = build_total_order([(3,)])
    assert downward_closure(M).degrees == ((0,), (1,), (2,), (3,))


def test_downward_closure_fixed_point():
    M = build_total_order([(0, 0), (0, 1), (1, 0), (1, 1)])
    assert downward_closure(M) == M


def test_downward_closure_box():
    M = build_total_order([(1, 1)])
    assert set(downward_closure(M).degrees) == {(0, 0), (0, 1), (1, 0), (1, 1)}


@settings(max_examples=150, deadline=None)
@given(
    st.sets(
        st.tuples(st.integers(0, 3), st.integers(0, 3)),
        min_size=1,
        max_size=6,
    )
)
def test_downward_closure_properties(degrees):
    M = build_total_order(degrees)
    closed = downward_closure(M)
    assert set(M.degrees) <= set(closed.degrees)
    assert downward_closure(closed) == closed
    N = tuple(max(m[d] for m in closed.degrees) + 1 for d in range(2))
    assert validate_degree_set(closed, N).downward_closed


def test_closure_matches_box_union():
    M = build_total_order([(2, 0), (0, 1)])
    expected = set(itertools.product(range(3), range(1))) | {(0, 1)} | {(0, 0)}
    assert set(downward_closure(M).degrees) == expected
