import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rmtlaws.union_metric import (
    InvalidPointError,
    TaggedPoint,
    UnionSpace,
    convergence_trace,
    delta,
    delta_terms,
    metric_axiom_suite,
    parse_dims_rule,
)


def P(n, *c):
    return TaggedPoint(n, c)


# -- delta ------------------------------------------------------------------


def test_delta_identity():
    space = UnionSpace([2, 3, 1])
    for x in (P(0, 1.0, 2.0), P(1, 0.5, -1.0, 3.0), P(2, 7.0)):
        assert delta(space, x, x) == 0.0


def test_delta_same_space_branch():
    # rho_0(phi x, phi y) = 0.2, eps_3 = 0.5, rho_3(x, y) = 0.3 -> 0.2 + min(0.5, 0.3)
    space = UnionSpace([1, 1, 1, 2], mapping=lambda n, c: (c[0],), epsilon=lambda n: 0.5 if n == 3 else 1.0 / n)
    x = P(3, 0.0, 0.0)
    y = P(3, 0.2, math.sqrt(0.3**2 - 0.2**2))
    image, sep = delta_terms(space, x, y)
    assert image == pytest.approx(0.2, abs=1e-15)
    assert sep == pytest.approx(0.3, abs=1e-15)
    assert delta(space, x, y) == pytest.approx(0.5, abs=1e-15)


def test_delta_cross_space_branch():
    # eps_1 = 0.5, eps_2 = 0.25, rho_0(phi x, phi y) = 0.1 -> 0.1 + max(0.5, 0.25)
    space = UnionSpace([1, 1, 1], epsilon=lambda n: 0.5 / n)
    assert delta(space, P(1, 0.0), P(2, 0.1)) == pytest.approx(0.6, abs=1e-15)


def test_delta_rejects_bad_dimension():
    space = UnionSpace([2, 3])
    with pytest.raises(InvalidPointError):
        delta(space, P(0, 1.0), P(1, 0.0, 0.0, 0.0))
    with pytest.raises(InvalidPointError):
        delta(space, P(5, 1.0), P(0, 0.0, 0.0))


def test_delta_single_space_reduces_to_base_metric():
    space = UnionSpace([3])
    rng = np.random.default_rng(0)
    for _ in range(50):
        a, b = rng.normal(size=3), rng.normal(size=3)
        assert delta(space, P(0, *a), P(0, *b)) == math.dist(a, b)
    report = metric_axiom_suite(space, 3, 500)
    assert report.max_triangle_violation <= 0.0
    assert report.max_symmetry_violation == 0.0
    assert report.zero_distance_failures == 0


def test_default_mapping_truncates_and_pads():
    space = UnionSpace([2, 3, 1])
    assert space.phi(P(1, 1.0, 2.0, 3.0)) == (1.0, 2.0)
    assert space.phi(P(2, 4.0)) == (4.0, 0.0)


def test_unbounded_family_by_rule():
    space = UnionSpace(lambda n: n + 1)
    x, y = P(4, *range(5)), P(9, *range(10))
    assert delta(space, x, y) == pytest.approx(0.25)
    space.check_epsilons(1000)


def test_epsilon_schedule_must_strictly_decrease():
    flat = UnionSpace([1, 1, 1], epsilon=lambda n: 0.5)
    with pytest.raises(ValueError):
        flat.check_epsilons(3)


# -- convergence trace: same-space vs climbing-space limits -------------------


def test_trace_within_one_space():
    space = UnionSpace([2, 1, 1, 1])
    x0 = P(3, 0.7)
    seq = [P(3, 0.7 + 1.0 / n) for n in range(1, 200)]
    trace = convergence_trace(space, seq, x0)
    assert {row.space_index for row in trace} == {3}
    d = np.array([row.delta_value for row in trace])
    assert np.all(np.diff(d) < 0)
    # image term 1/n plus min(eps_3, 1/n) = 1/n once n >= 3
    n = np.arange(3, 200)
    np.testing.assert_allclose(d[2:], 2.0 / n, rtol=1e-9)


def test_trace_climbing_spaces_to_base_point():
    space = UnionSpace(lambda n: 1 if n == 0 else 2)
    x0 = P(0, 0.3)
    seq = [P(n, 0.3, float(n)) for n in range(1, 300)]
    trace = convergence_trace(space, seq, x0)
    for n, row in enumerate(trace, start=1):
        assert row.space_index == n
        assert row.rho0_value == 0.0
        assert row.delta_value == 1.0 / n


def test_trace_bounded_spaces_never_reach_base_point():
    N = 4
    space = UnionSpace([1] * (N + 1))
    x0 = P(0, 0.0)
    seq = [P(1 + n % N, 1.0 / (n + 1)) for n in range(500)]
    floor = min(space.eps(k) for k in range(1, N + 1))
    trace = convergence_trace(space, seq, x0)
    assert all(row.delta_value >= floor for row in trace)


def test_trace_rho0_column_bounded_by_delta():
    space = UnionSpace(lambda n: 2)
    rng = np.random.default_rng(5)
    seq = [P(n, *(rng.normal(size=2) / n)) for n in range(1, 100)]
    for row in convergence_trace(space, seq, P(0, 0.0, 0.0)):
        assert row.rho0_value <= row.delta_value


# -- properties ---------------------------------------------------------------

coords = st.floats(min_value=-5, max_value=5, allow_nan=False)


@st.composite
def points(draw, dims=(1, 3, 2, 4, 1, 2)):
    n = draw(st.integers(0, len(dims) - 1))
    return TaggedPoint(n, tuple(draw(st.lists(coords, min_size=dims[n], max_size=dims[n]))))


SPACE = UnionSpace([1, 3, 2, 4, 1, 2])


@given(points(), points())
def test_symmetry_exact(x, y):
    assert delta(SPACE, x, y) == delta(SPACE, y, x)


@given(points(), points(), points())
def test_triangle_inequality(x, y, z):
    assert delta(SPACE, x, z) <= delta(SPACE, x, y) + delta(SPACE, y, z) + 1e-12


@given(points(), points())
def test_zero_only_on_equal_points(x, y):
    if x != y:
        assert delta(SPACE, x, y) > 0


@given(points(), points(), points())
def test_separation_term_triangle_when_all_spaces_differ(x, y, z):
    if len({x.space_index, y.space_index, z.space_index}) == 3:
        sep = lambda p, q: delta_terms(SPACE, p, q)[1]  # noqa: E731
        assert sep(x, y) + sep(y, z) >= sep(x, z)
        assert sep(x, z) == max(SPACE.eps(x.space_index), SPACE.eps(z.space_index))


@settings(max_examples=200)
@given(st.integers(1, 5), st.integers(0, 5), st.floats(-1, 1))
def test_small_distance_forces_same_space(k, other, offset):
    """delta(x, x0) < eps_k with x0 in S_k (k > 0) is only possible when s(x) = k."""
    x0 = TaggedPoint(k, (0.0,) * SPACE.dim(k))
    c = [0.0] * SPACE.dim(other)
    c[0] = offset
    x = TaggedPoint(other, tuple(c))
    d = delta(SPACE, x, x0)
    if d < SPACE.eps(k) / 2:
        assert other == k
    if other != k:
        assert d >= SPACE.eps(k)


def test_axiom_suite_covers_all_patterns():
    report = metric_axiom_suite(UnionSpace(parse_dims_rule("1-8", 5, seed=1)), 11, 10_000)
    assert set(report.pattern_counts) == {"xxx", "xxz", "xzz", "xzx", "xyz"}
    assert report.max_triangle_violation <= 1e-12
    assert report.max_symmetry_violation == 0.0
    assert report.zero_distance_failures == 0
    assert report.identity_failures == 0


def test_parse_dims_rule():
    assert parse_dims_rule("3", 4) == [3, 3, 3, 3]
    assert parse_dims_rule("2,5", 5) == [2, 5, 2, 5, 2]
    dims = parse_dims_rule("1-8", 50, seed=2)
    assert min(dims) >= 1 and max(dims) <= 8
    assert dims == parse_dims_rule("1-8", 50, seed=2)
    with pytest.raises(ValueError):
        parse_dims_rule("0", 3)
