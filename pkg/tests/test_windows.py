"""Windows, distances, greedy nets, packing numbers."""

from __future__ import annotations

import pytest

from couplingcert.errors import PreconditionError, ResolutionError, WindowBudgetError
from couplingcert.groups import make_group
from couplingcert.windows import (
    build_window,
    distance,
    greedy_net,
    is_dense,
    is_discrete,
    packing_number,
    packing_number_naive,
)


@pytest.mark.parametrize(
    "desc,radius,count",
    [
        ("Z^1", 3, 7),
        ("Z^2", 2, 13),
        ("F_2", 2, 17),
        ("Z^1", 0, 1),
        ("Heis", 2, 17),  # x*y != y*x: 1 + 4 + 12
    ],
)
def test_ball_sizes(desc, radius, count):
    W = build_window(make_group(desc), radius)
    assert len(W) == count
    assert W.elements[0] == W.group.identity
    assert W.lengths[0] == 0


def test_bfs_levels_and_determinism():
    W = build_window(make_group("Z^1"), 3)
    assert W.elements == [(0,), (1,), (-1,), (2,), (-2,), (3,), (-3,)]
    assert W.lengths == [0, 1, 1, 2, 2, 3, 3]


def test_bfs_levels_match_l1_norm_on_z2():
    W = build_window(make_group("Z^2"), 4)
    for e, l in zip(W.elements, W.lengths):
        assert l == abs(e[0]) + abs(e[1])


def test_product_word_metric_is_l1_sum_of_factors():
    W = build_window(make_group("Z^1 x F_2"), 4)
    for (z, w), l in zip(W.elements, W.lengths):
        assert l == abs(z[0]) + len(w)


def test_budget_error_reports_radius():
    with pytest.raises(WindowBudgetError) as exc:
        build_window(make_group("F_2"), 10, budget=50)
    assert exc.value.radius_reached >= 1


@pytest.mark.parametrize(
    "desc,a,b,d",
    [
        ("Z^1", (3,), (-2,), 5),
        ("F_2", (1, 2), (2, 1), 4),  # (ab)^-1(ba) = b^-1 a^-1 b a
        ("Z^2", (1, 1), (1, 1), 0),
    ],
)
def test_distance_examples(desc, a, b, d):
    W = build_window(make_group(desc), 6)
    assert distance(W, a, b) == d


def test_distance_outside_window_errors():
    W = build_window(make_group("Z^1"), 4)
    with pytest.raises(ResolutionError):
        distance(W, (-4,), (4,))


@pytest.mark.parametrize("desc,r", [("Z^1", 4), ("F_2", 2), ("Heis", 2)])
def test_metric_axioms_exhaustive(desc, r):
    G = make_group(desc)
    small = build_window(G, r)
    big = build_window(G, 4 * r)  # resolves every distance among the points
    pts = small.elements
    for a in pts:
        assert distance(big, a, a) == 0
        for b in pts:
            dab = distance(big, a, b)
            assert dab == distance(big, b, a)
            assert (dab == 0) == (a == b)
            for c in pts:
                assert dab <= distance(big, a, c) + distance(big, c, b)


def test_greedy_net_z_example():
    W = build_window(make_group("Z^1"), 10)
    net = greedy_net(W, 3)
    assert net.points == [(0,), (3,), (-3,), (6,), (-6,), (9,), (-9,)]


def test_greedy_net_scale_one_is_everything():
    W = build_window(make_group("F_2"), 3)
    assert greedy_net(W, 1).points == W.elements


def test_greedy_net_coarser_than_diameter():
    W = build_window(make_group("Z^2"), 2)
    assert greedy_net(W, 5).points == [W.group.identity]


@pytest.mark.parametrize("desc,radius,s", [("Z^1", 10, 3), ("Z^2", 4, 2),
                                           ("F_2", 4, 3), ("Heis", 3, 2)])
def test_net_invariants_exhaustive(desc, radius, s):
    G = make_group(desc)
    W = build_window(G, radius)
    net = greedy_net(W, s)
    assert is_discrete(W, net.points, s)
    assert is_dense(W, net.points, s)


@pytest.mark.parametrize(
    "sep,diam,value",
    [(3, 16, 6), (3, 12, 5), (3, 0, 1), (3, 8, 3), (2, 10, 6)],
)
def test_packing_examples_on_z(sep, diam, value):
    W = build_window(make_group("Z^1"), 20)
    res = packing_number(W, sep, diam)
    assert res.exact
    assert res.value == value


def test_packing_invariant_under_enumeration_order():
    G = make_group("Z^2")
    W = build_window(G, 6)
    v1 = packing_number(W, 3, 6)
    G2 = make_group("Z^2")
    G2.generators = list(reversed(G2.generators))
    W2 = build_window(G2, 6)
    v2 = packing_number(W2, 3, 6)
    assert v1.exact and v2.exact
    assert v1.value == v2.value


def test_packing_budget_paths_give_safe_upper_bounds():
    W = build_window(make_group("Z^1"), 20)
    exact = packing_number(W, 3, 16)
    capped = packing_number(W, 3, 16, candidate_cap=5)
    starved = packing_number(W, 3, 16, node_budget=2)
    for res in (capped, starved):
        assert not res.exact
        assert res.value >= exact.value
        assert res.note


def test_packing_preconditions():
    W = build_window(make_group("Z^1"), 5)
    with pytest.raises(PreconditionError):
        packing_number(W, 3, 9)  # diam + sep > 2*radius... (9+3 > 10)
    with pytest.raises(PreconditionError):
        packing_number(W, 0, 2)


def test_rational_scales_supported():
    from fractions import Fraction

    W = build_window(make_group("Z^1"), 10)
    net = greedy_net(W, Fraction(5, 2))
    assert net.points == [(0,), (3,), (-3,), (6,), (-6,), (9,), (-9,)]
    res = packing_number(W, Fraction(5, 2), 10)
    assert res.exact
    assert res.value == 4  # e.g. {0, 3, 6, 9}... distances >= 2.5 means >= 3


def test_packing_matches_naive_oracle_small():
    W = build_window(make_group("Z^1"), 6)
    for sep in (2, 3, 4):
        for diam in (0, 2, 4, 6):
            if diam + sep > 2 * W.radius:
                continue
            assert packing_number(W, sep, diam).value == packing_number_naive(W, sep, diam)
