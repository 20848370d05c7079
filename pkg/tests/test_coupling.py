"""Partition of unity, psi densities, L1 geometry, group actions."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from couplingcert.coarse import analytic_moduli, make_coarse_map
from couplingcert.coupling import (
    PartitionOfUnity,
    SparseDensity,
    act_left,
    build_partition,
    l1_distance,
    orbit_point,
    psi,
    serialize_density,
    support_distance,
    unit_ball,
)
from couplingcert.errors import PreconditionError
from couplingcert.groups import make_group
from couplingcert.windows import Net, build_window, distance

Z = make_group("Z^1")


@pytest.fixture(scope="module")
def z_identity():
    """The (Z, identity, s=3) reference configuration."""
    phi = make_coarse_map("identity", Z, Z)
    W_H = build_window(Z, 24)
    W_G = build_window(Z, 40)
    m = analytic_moduli(phi, 2 * (24 + 40) + 8)
    P = build_partition(W_H, W_G, phi, m, 3)
    return P, phi, W_H, W_G


def test_partition_reference_values(z_identity):
    P, phi, W_H, W_G = z_identity
    assert P.Theta((0,)) == 6  # 4 + 1 + 1
    assert P.Theta((1,)) == 5  # 3 + 2, only y = 0 and y = 3 contribute
    alpha0 = {P.net.points[i]: a for i, a in P.alpha_terms((0,))}
    assert alpha0 == {(0,): Fraction(2, 3), (3,): Fraction(1, 6), (-3,): Fraction(1, 6)}
    alpha1 = {P.net.points[i]: a for i, a in P.alpha_terms((1,))}
    assert alpha1 == {(0,): Fraction(3, 5), (3,): Fraction(2, 5)}
    assert sum(alpha1.values()) == 1


def test_partition_constants(z_identity):
    P, *_ = z_identity
    assert P.M == 3 and P.M_exact
    assert P.omega_s1 == 4
    assert P.inner_radius == 20
    assert P.N_empirical == Fraction(7, 30)
    assert P.N_apriori == 13  # 1 + C*(s+1) with C = 3
    assert P.N == 13


def test_partition_sums_exactly_one_everywhere(z_identity):
    P, *_ = z_identity
    for h in P.inner_elements:
        assert sum(a for _, a in P.alpha_terms(h)) == 1
        assert P.Theta(h) >= 1


def test_bumps_are_one_lipschitz(z_identity):
    P, phi, W_H, _ = z_identity
    s1 = P.scale + 1
    pair_window = build_window(Z, 2 * W_H.radius)

    def theta(yi, h):
        d = distance(pair_window, P.net.points[yi], h)
        return max(0, s1 - d)

    pts = W_H.elements[::3]
    for yi in range(len(P.net.points)):
        for h in pts:
            for h2 in pts:
                lhs = abs(theta(yi, h) - theta(yi, h2))
                assert lhs <= distance(pair_window, h, h2)


def test_psi_reference_density(z_identity):
    P, phi, _, _ = z_identity
    d0 = psi(P, phi, (0,))
    assert d0.blocks == [((0,), Fraction(2, 3)), ((3,), Fraction(1, 6)),
                         ((-3,), Fraction(1, 6))]
    assert d0.normalizer == Fraction(1, 3)  # B = {-1, 0, 1}
    assert d0.mass() == 1
    assert sorted(d0.support()) == [(-4,), (-3,), (-2,), (-1,), (0,), (1,),
                                    (2,), (3,), (4,)]


def test_psi_single_block_case():
    # a one-point net makes alpha identically 1 and psi a single block
    phi = make_coarse_map("identity", Z, Z)
    W_H = build_window(Z, 8)
    W_G = build_window(Z, 12)
    m = analytic_moduli(phi, 40)
    P = PartitionOfUnity(
        scale=Fraction(3), net=Net(scale=Fraction(3), points=[(0,)]),
        images=[(0,)], window_H=W_H, window_G=W_G, inner_radius=2,
        inner_elements=[e for e, l in zip(W_H.elements, W_H.lengths) if l <= 2],
        N_empirical=Fraction(0), N_apriori=Fraction(1), overlap_count=1,
        M=1, M_exact=True, omega_s1=4,
    )
    d = psi(P, phi, (0,))
    assert d.blocks == [((0,), Fraction(1))]
    assert d.mass() == 1


def test_psi_outside_inner_window_rejected(z_identity):
    P, phi, *_ = z_identity
    with pytest.raises(PreconditionError):
        psi(P, phi, (21,))


def test_z_h_bounded_by_m(z_identity):
    P, phi, *_ = z_identity
    sizes = {len(psi(P, phi, h).blocks) for h in P.inner_elements}
    assert max(sizes) <= P.M
    assert max(sizes) == 3


def test_block_disjointness_and_support_containment(z_identity):
    P, phi, W_H, W_G = z_identity
    from couplingcert.coarse import apply

    for h in P.inner_elements:
        d = psi(P, phi, h)
        seen = set()
        for z, _ in d.blocks:
            blk = {W_G.group.mul(z, b) for b in unit_ball(W_G.group)}
            assert not (blk & seen)
            seen |= blk
            assert distance(W_G, apply(phi, h), z) <= P.omega_s1
        for a in d.support():
            assert distance(W_G, apply(phi, h), a) <= P.omega_s1 + 1


def test_l1_examples(z_identity):
    P, phi, _, _ = z_identity
    d0 = psi(P, phi, (0,))
    d1 = psi(P, phi, (1,))
    assert l1_distance(d0, d0) == 0
    assert l1_distance(d0, d1) == Fraction(7, 15)
    far = act_left((20,), d0)
    assert l1_distance(d0, far) == 2  # disjoint unit masses


def test_lipschitz_bound_over_inner_pairs(z_identity):
    P, phi, W_H, _ = z_identity
    pair_window = build_window(Z, 2 * P.inner_radius)
    bound = 2 * P.M * P.N
    cache = {h: psi(P, phi, h) for h in P.inner_elements}
    for i, f1 in enumerate(P.inner_elements):
        for f2 in P.inner_elements[i + 1:]:
            t = distance(pair_window, f1, f2)
            assert l1_distance(cache[f1], cache[f2]) <= bound * t


def test_support_distance_examples(z_identity):
    P, phi, _, W_G = z_identity
    d0 = psi(P, phi, (0,))
    assert support_distance(d0, d0, W_G) == 0
    b0 = act_left((0,), _single_block(W_G.group))
    b10 = act_left((10,), _single_block(W_G.group))
    assert support_distance(b0, b10, W_G) == 8  # {0 +-1} vs {10 +-1}
    assert support_distance(d0, psi(P, phi, (1,)), W_G) == 0  # overlap


def _single_block(G):
    B = unit_ball(G)
    return SparseDensity(group=G, normalizer=Fraction(1, len(B)),
                         atoms={b: Fraction(1) for b in B},
                         blocks=[(G.identity, Fraction(1))], base=B)


def test_act_left_examples(z_identity):
    P, phi, _, _ = z_identity
    d0 = psi(P, phi, (0,))
    assert act_left((0,), d0).atoms == d0.atoms
    moved = act_left((5,), _single_block(Z))
    assert sorted(moved.atoms) == [(4,), (5,), (6,)]
    assert moved.mass() == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=-8, max_value=8), st.integers(min_value=-8, max_value=8),
       st.integers(min_value=-6, max_value=6))
def test_left_action_law(g1, g2, h):
    phi = make_coarse_map("identity", Z, Z)
    W_H = build_window(Z, 12)
    W_G = build_window(Z, 16)
    m = analytic_moduli(phi, 60)
    P = build_partition(W_H, W_G, phi, m, 3)
    if abs(h) > P.inner_radius:
        return
    xi = psi(P, phi, (h,))
    lhs = act_left((g1,), act_left((g2,), xi))
    rhs = act_left((g1 + g2,), xi)
    assert lhs.atoms == rhs.atoms and lhs.blocks == rhs.blocks


def test_orbit_point_reference(z_identity):
    P, phi, W_H, _ = z_identity
    ew = build_window(Z, 3)
    base = orbit_point(P, phi, (0,), (0,), ew)
    for f in ew.elements:
        assert base.coord(f).atoms == psi(P, phi, f).atoms
    # (5 . psi . 0)_0 = translate of psi_0 by 5: blocks at 5, 8, 2
    pt = orbit_point(P, phi, (5,), (0,), ew)
    assert [z for z, _ in pt.coord((0,)).blocks] == [(5,), (8,), (2,)]


def test_actions_commute_and_right_action_composes(z_identity):
    P, phi, W_H, _ = z_identity
    ew = build_window(Z, 2)
    g, h1, h2 = (4,), (3,), (-2,)
    left_then_right = orbit_point(P, phi, g, Z.mul(h1, h2), ew)
    plain = orbit_point(P, phi, (0,), Z.mul(h1, h2), ew)
    for f in ew.elements:
        # commuting: g . (psi . h) evaluated at f = lambda(g)(psi_{hf})
        assert left_then_right.coord(f).atoms == act_left(g, plain.coord(f)).atoms
        # right action composes through the index: ((psi . h1) . h2)_f = psi_{h1 h2 f}
        assert plain.coord(f).atoms == psi(P, phi, Z.mul(Z.mul(h1, h2), f)).atoms


def test_orbit_point_escape_rejected(z_identity):
    P, phi, *_ = z_identity
    ew = build_window(Z, 3)
    with pytest.raises(PreconditionError):
        orbit_point(P, phi, (0,), (19,), ew)


def test_support_sandwich_on_orbit_pairs(z_identity):
    P, phi, W_H, W_G = z_identity
    m = analytic_moduli(phi, 140)
    ew = build_window(Z, 4)
    pair_window = build_window(Z, 8)
    pt = orbit_point(P, phi, (3,), (2,), ew)
    pad = 2 * P.omega_s1 + 2
    fs = ew.elements
    for i, f1 in enumerate(fs):
        for f2 in fs[i + 1:]:
            t = distance(pair_window, f1, f2)
            sd = support_distance(pt.coord(f1), pt.coord(f2), W_G)
            assert m.kappa[t] - pad <= sd <= m.omega[t] + pad


def test_serialization_is_stable(z_identity):
    P, phi, *_ = z_identity
    d1 = serialize_density(psi(P, phi, (1,)))
    assert d1 == serialize_density(psi(P, phi, (1,)))
    assert "# block 0 3/5" in d1
    assert "# block 3 2/5" in d1
    assert d1.endswith("\n")
    first = d1.splitlines()[0].split()
    assert first[0] == "-1"  # atoms sorted by element
