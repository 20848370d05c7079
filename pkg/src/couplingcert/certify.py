"""Executable verdicts for the quantitative claims of the coupling
construction, restricted to orbit points and finite windows.

Every check returns a :class:`CheckResult` with a status in
``{pass, fail, vacuous}``, an extremal witness, an exact rational margin
(status is ``pass`` iff the margin is >= 0) and the population of
instances examined.  ``vacuous`` means the qualifying set was empty and
is always reported, never silently passed.

Checks run on orbit points g.psi.h only; the closure of the orbit is not
materializable, and the underlying estimates transfer to limits by
continuity.  Certificates are orbit-scale statements.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .coarse import (
    CoarseMap,
    Moduli,
    analytic_moduli,
    choose_scale,
    cobounded_radius,
    estimate_moduli,
    make_coarse_map,
)
from .coupling import (
    PartitionOfUnity,
    act_left,
    build_partition,
    l1_distance,
    orbit_point,
    psi,
    support_distance,
)
from .errors import (
    CouplingCertError,
    PipelineError,
    PreconditionError,
    ResolutionError,
)
from .groups import make_group
from .windows import Window, build_window, resolved_distance

SAMPLE_CAP = 10_000

CHECK_NAMES = (
    "cocompactness_h",
    "g_action",
    "lipschitz",
    "membership_x",
    "properness_h",
    "sandwich",
)


@dataclass
class CheckResult:
    name: str
    status: str
    witness: Optional[dict]
    margin: Optional[Fraction]
    population: int
    details: dict = field(default_factory=dict)


@dataclass
class Certificate:
    constants: dict
    checks: list
    window_metadata: dict

    def all_pass(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def to_report(self) -> dict:
        return {
            "constants": _canon(self.constants),
            "checks": [
                {
                    "name": c.name,
                    "status": c.status,
                    "margin": _canon(c.margin),
                    "witness": _canon(c.witness),
                    "population": c.population,
                    "details": _canon(c.details),
                }
                for c in sorted(self.checks, key=lambda c: c.name)
            ],
            "window_metadata": _canon(self.window_metadata),
        }


def fmt_rat(x) -> str:
    return str(Fraction(x))


def _canon(value):
    """Canonical JSON form: rationals become num/den strings, dict keys
    are sorted, tuples become lists."""
    if value is None or isinstance(value, (str, bool, int)):
        return value
    if isinstance(value, Fraction):
        return fmt_rat(value)
    if isinstance(value, (list, tuple)):
        return [_canon(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _canon(value[k]) for k in sorted(value, key=str)}
    raise TypeError(f"value {value!r} is not canonically serializable")


class _Worst:
    """Track the minimum margin and its witness."""

    def __init__(self):
        self.margin: Optional[Fraction] = None
        self.witness: Optional[dict] = None

    def update(self, margin, witness) -> None:
        margin = Fraction(margin)
        if self.margin is None or margin < self.margin:
            self.margin = margin
            self.witness = witness


def _pair_diameter(points: list, W: Window) -> Optional[int]:
    """Max pairwise distance; None when some pair does not resolve."""
    worst = 0
    for i, a in enumerate(points):
        for b in points[i + 1:]:
            d = resolved_distance(W, a, b)
            if d is None:
                return None
            worst = max(worst, d)
    return worst


def _set_distance(xs: list, ys: list, W: Window) -> Optional[int]:
    """Min pairwise distance between two finite sets; None if nothing resolves."""
    best = None
    for a in xs:
        for b in ys:
            d = resolved_distance(W, a, b)
            if d is not None and (best is None or d < best):
                best = d
                if best == 0:
                    return 0
    return best


def check_membership_x(
    labeled_points: list,
    W_G: Window,
    two_omega: int,
) -> CheckResult:
    """Each density must be a convex combination of unit-ball blocks over a
    3-discrete center set of diameter <= 2*omega(s+1)."""
    worst = _Worst()
    diam_worst = _Worst()
    sep_worst = _Worst()
    fmt = W_G.group.format_element
    for label, dens in labeled_points:
        if dens.blocks is None:
            worst.update(-1, {"point": label, "reason": "no block structure"})
            continue
        coeffs = [a for _, a in dens.blocks]
        if any(a < 0 for a in coeffs) or sum(coeffs, Fraction(0)) != 1:
            worst.update(-1, {"point": label, "reason": "not a convex combination"})
            continue
        centers = [z for z, _ in dens.blocks]
        for i, z in enumerate(centers):
            for z2 in centers[i + 1:]:
                d = resolved_distance(W_G, z, z2)
                # an unresolved distance exceeds the window radius >= 3
                if d is not None:
                    sep_worst.update(d - 3, {"point": label, "pair": [fmt(z), fmt(z2)],
                                             "reason": "center separation"})
        diam = _pair_diameter(centers, W_G)
        if diam is None:
            diam_worst.update(two_omega - (W_G.radius + 1),
                              {"point": label, "reason": "diameter exceeds window radius"})
        else:
            diam_worst.update(two_omega - diam, {"point": label, "reason": "diameter",
                                                 "diameter": diam})
    if not labeled_points:
        return CheckResult("membership_x", "vacuous", None, None, 0)
    for w in (diam_worst, sep_worst):
        if w.margin is not None:
            worst.update(w.margin, w.witness)
    status = "pass" if worst.margin >= 0 else "fail"
    return CheckResult(
        "membership_x", status, worst.witness, worst.margin, len(labeled_points),
        details={"diameter_bound": two_omega,
                 "worst_diameter_margin": diam_worst.margin,
                 "worst_separation_margin": sep_worst.margin},
    )


def check_lipschitz(
    P: PartitionOfUnity,
    phi: CoarseMap,
    pair_window: Window,
    psi_of: Callable,
    bound_M: Optional[int] = None,
    bound_N: Optional[Fraction] = None,
) -> CheckResult:
    """L1 increments of psi are bounded by 2*M*N times the source distance,
    over every unordered pair of inner-window points."""
    M = P.M if bound_M is None else bound_M
    N = P.N if bound_N is None else Fraction(bound_N)
    coeff = 2 * M * N
    fmt = P.window_H.group.format_element
    worst = _Worst()
    tightest = Fraction(0)
    population = 0
    inner = P.inner_elements
    for i, f1 in enumerate(inner):
        d1 = psi_of(f1)
        for f2 in inner[i + 1:]:
            t = resolved_distance(pair_window, f1, f2)
            if t is None:
                raise ResolutionError(
                    "inner pair distance does not resolve; pair window too small"
                )
            val = l1_distance(d1, psi_of(f2))
            worst.update(coeff * t - val, {"pair": [fmt(f1), fmt(f2)],
                                           "distance": t, "l1": val})
            tightest = max(tightest, Fraction(val) / t)
            population += 1
    if population == 0:
        return CheckResult("lipschitz", "vacuous", None, None, 0)
    status = "pass" if worst.margin >= 0 else "fail"
    return CheckResult(
        "lipschitz", status, worst.witness, worst.margin, population,
        details={"bound_coefficient": coeff, "tightest_constant": tightest,
                 "M": M, "N": N},
    )


def check_sandwich(
    P: PartitionOfUnity,
    phi: CoarseMap,
    orbit_points: list,
    m: Moduli,
    W_G: Window,
    pair_window: Window,
    psi_of: Callable,
) -> CheckResult:
    """Support distances of orbit coordinates are sandwiched between
    kappa(d) - 2*omega(s+1) - 2 and omega(d) + 2*omega(s+1) + 2.

    The support distance of (g.psi.h)_f1 and (g.psi.h)_f2 equals that of
    psi_{h f1} and psi_{h f2} by left-invariance, so distinct coordinate
    pairs are evaluated once.
    """
    pad = 2 * P.omega_s1 + 2
    H = phi.source
    idx = P.window_H.index
    fmt = H.format_element
    lower_worst = _Worst()
    upper_worst = _Worst()
    cache: dict = {}
    population = 0
    skipped = 0
    for pt in orbit_points:
        fs = pt.eval_window.elements
        for i, f1 in enumerate(fs):
            for f2 in fs[i + 1:]:
                t = resolved_distance(pair_window, f1, f2)
                if t is None:
                    raise ResolutionError("eval pair distance does not resolve")
                kap = m.kappa_at(t)
                ome = m.omega_at(t)
                if kap is None or ome is None:
                    skipped += 1
                    continue
                a = H.mul(pt.h, f1)
                b = H.mul(pt.h, f2)
                key = (idx[a], idx[b]) if idx[a] <= idx[b] else (idx[b], idx[a])
                sd = cache.get(key)
                if sd is None:
                    sd = support_distance(psi_of(a), psi_of(b), W_G)
                    cache[key] = sd
                wit = {"pair": [fmt(f1), fmt(f2)], "h": fmt(pt.h),
                       "distance": t, "support_distance": sd}
                lower_worst.update(sd - (kap - pad), wit)
                upper_worst.update((ome + pad) - sd, wit)
                population += 1
    if population == 0:
        return CheckResult("sandwich", "vacuous", None, None, 0,
                           details={"skipped_unsupported_t": skipped})
    margin = min(lower_worst.margin, upper_worst.margin)
    witness = (lower_worst if lower_worst.margin <= upper_worst.margin else upper_worst).witness
    status = "pass" if margin >= 0 else "fail"
    return CheckResult(
        "sandwich", status, witness, margin, population,
        details={
            "lower_margin": lower_worst.margin,
            "upper_margin": upper_worst.margin,
            "skipped_unsupported_t": skipped,
            "distinct_coordinate_pairs": len(cache),
        },
    )


def check_properness_h(
    P: PartitionOfUnity,
    phi: CoarseMap,
    zeta_samples: list,
    K: list,
    m: Moduli,
    W_G: Window,
    epsilon: Fraction,
    psi_of: Callable,
    threshold_override=None,
) -> CheckResult:
    """For h with kappa(d(h,1)) above diam(K) + 2*omega(s+1) + 2, the h-slice
    of any orbit point meeting [K, eps] at the identity has support disjoint
    from K."""
    G = phi.target
    H = phi.source
    diam_K = _pair_diameter(K, W_G)
    if diam_K is None:
        raise ResolutionError("diameter of K does not resolve in the target window")
    threshold = (diam_K + 2 * P.omega_s1 + 2 if threshold_override is None
                 else Fraction(threshold_override))
    K_set = set(K)
    worst = _Worst()
    confinement = _Worst()
    population = 0
    margin_is_floor = False
    for g, h0 in zeta_samples:
        zeta_1 = act_left(g, psi_of(h0))
        if zeta_1.inner_product(K_set) < epsilon:
            raise PreconditionError(
                "a zeta sample does not meet [K, epsilon] at the identity"
            )
        # members of [K, eps] stay confined near K: the finite-window
        # analogue of the compactness of [K, eps]
        for a in zeta_1.support():
            d = _set_distance([a], K, W_G)
            if d is None:
                raise ResolutionError("support-to-K distance does not resolve")
            confinement.update(2 * P.omega_s1 + 2 - d,
                               {"zeta": [G.format_element(g), H.format_element(h0)],
                                "atom": G.format_element(a)})
        # work with g^-1 K so every test runs on untranslated psi slices
        g_inv = G.inv(g)
        K_back = [G.mul(g_inv, k) for k in K]
        K_back_set = set(K_back)
        for h, lh in zip(P.window_H.elements, P.window_H.lengths):
            kap = m.kappa_at(lh)
            if kap is None or kap <= threshold:
                continue
            h0h = H.mul(h0, h)
            if not P.is_inner(h0h):
                continue
            slice_supp = psi_of(h0h).support()
            hit = [a for a in slice_supp if a in K_back_set]
            wit = {"h": H.format_element(h), "zeta": [G.format_element(g),
                                                      H.format_element(h0)]}
            if hit:
                worst.update(-1, dict(wit, meeting_point=G.format_element(hit[0])))
            else:
                d = _set_distance(slice_supp, K_back, W_G)
                if d is None:
                    # every gap exceeds the window radius; report the floor
                    margin_is_floor = True
                    d = W_G.radius + 1
                worst.update(d - 1, wit)
            population += 1
    if population == 0:
        return CheckResult(
            "properness_h", "vacuous", None, None, 0,
            details={"threshold": threshold, "diam_K": diam_K,
                     "confinement_margin": confinement.margin},
        )
    if confinement.margin is not None:
        worst.update(confinement.margin, confinement.witness)
    status = "pass" if worst.margin >= 0 else "fail"
    return CheckResult(
        "properness_h", status, worst.witness, worst.margin, population,
        details={"threshold": threshold, "diam_K": diam_K,
                 "margin_is_floor": margin_is_floor,
                 "confinement_margin": confinement.margin},
    )


def check_cocompactness_h(
    P: PartitionOfUnity,
    phi: CoarseMap,
    samples: list,
    m: Moduli,
    R: int,
    W_G: Window,
    psi_of: Callable,
    K_radius_override=None,
) -> CheckResult:
    """Every sampled orbit point right-translates into
    {xi : xi_1 in [K, 1/2]} for K the ball of radius R + omega(s+1) + 1.

    The witness f is searched in BFS order; integer word metrics make the
    search exhaustive over the ball of radius r, so no 1/(5MN)-dense net
    is needed.  When the inner window truncates the search below r, a
    found witness still certifies the instance; exhausting the full
    r-ball without one is a failure, and truncation without a witness is
    a window-size error.
    """
    H, G = phi.source, phi.target
    K_radius = (R + P.omega_s1 + 1) if K_radius_override is None else K_radius_override
    if K_radius > W_G.radius:
        raise PreconditionError(
            f"K radius {K_radius} exceeds the target window radius {W_G.radius}"
        )
    K_set = {e for e, l in zip(W_G.elements, W_G.lengths) if l <= K_radius}
    half = Fraction(1, 2)
    worst = _Worst()
    population = 0
    truncated = 0
    r_seen = []
    for g, h in samples:
        xi_1 = act_left(g, psi_of(h))
        C = xi_1.support()
        diam_C = _pair_diameter(C, W_G)
        dists = [W_G.length_of(c) for c in C]
        if diam_C is None or any(d is None for d in dists):
            raise ResolutionError(
                "the support of a sampled orbit point straddles the target "
                "window edge; enlarge the window or shrink the sample radii"
            )
        d_C1 = min(dists)
        bound = P.omega_s1 + 1 + diam_C + d_C1 + R
        r = _kappa_sublevel_radius(m, bound)
        lh = P.window_H.length_of(h)
        f_cap = P.inner_radius - lh
        search_radius = f_cap if r is None else min(r, f_cap)
        found = None
        best_ip = Fraction(0)
        for f, lf in zip(P.window_H.elements, P.window_H.lengths):
            if lf > search_radius:
                break  # BFS order is nondecreasing in length
            ip = act_left(g, psi_of(H.mul(h, f))).inner_product(K_set)
            if ip > best_ip:
                best_ip = ip
            if ip >= half:
                found = f
                break
        wit = {"g": G.format_element(g), "h": H.format_element(h),
               "r": "unresolved" if r is None else r}
        r_seen.append(-1 if r is None else r)
        if found is not None:
            worst.update(best_ip - half, dict(wit, f=H.format_element(found)))
            if r is None or r > f_cap:
                truncated += 1
        elif r is not None and r <= f_cap:
            worst.update(best_ip - half, wit)
        else:
            raise ResolutionError(
                f"witness search truncated at radius {search_radius} below "
                f"r={'>' + str(m.t_max) if r is None else r}; enlarge the source window"
            )
        population += 1
    if population == 0:
        return CheckResult("cocompactness_h", "vacuous", None, None, 0)
    status = "pass" if worst.margin >= 0 else "fail"
    return CheckResult(
        "cocompactness_h", status, worst.witness, worst.margin, population,
        details={
            "K_radius": K_radius,
            "R": R,
            "max_r": max(r_seen),
            "witness_searches_truncated": truncated,
            "search": "exhaustive over the r-ball (integer metric); no 1/(5MN) net",
        },
    )


def _kappa_sublevel_radius(m: Moduli, bound) -> Optional[int]:
    """Largest t in the table with kappa(t) <= bound; None when the whole
    table stays below the bound (r exceeds the table)."""
    if bound < 0:
        return -1
    top = m.kappa_at(m.t_max)
    if top is not None and top <= bound:
        return None
    r = -1
    for t in range(m.t_max + 1):
        k = m.kappa_at(t)
        if k is not None and k <= bound:
            r = t
    return r


def check_g_action(
    P: PartitionOfUnity,
    phi: CoarseMap,
    xi_samples: list,
    K_G: list,
    epsilon: Fraction,
    W_G: Window,
    g_candidates: list,
    psi_of: Callable,
    recenter_bound_override=None,
) -> CheckResult:
    """Properness and cocompactness of the left action.

    (a) properness: translates of [K_G, eps] by far g miss it -- supports
    become disjoint from K_G beyond 2*omega(s+1) + 2 + 2*diam(K_G);
    (b) cocompactness: recentring the BFS-least support point confines any
    sampled orbit support in the ball of radius 4*omega(s+1) + 4 with full
    mass;
    (c) the ingredient diameter bound diam(supp psi_h) <= 2*omega(s+1) + 2,
    exhaustively over the inner window.
    """
    G = phi.target
    fmtG = G.format_element
    diam_K = _pair_diameter(K_G, W_G)
    if diam_K is None:
        raise ResolutionError("diameter of K_G does not resolve")
    tau = 2 * P.omega_s1 + 2 + 2 * diam_K
    K_set = set(K_G)
    worst = _Worst()
    pop_proper = 0
    margin_is_floor = False
    qualifying = []
    for g, h in xi_samples:
        xi_1 = act_left(g, psi_of(h))
        if xi_1.inner_product(K_set) >= epsilon:
            qualifying.append((g, h, xi_1))
    for gc in g_candidates:
        for g, h, xi_1 in qualifying:
            moved = [G.mul(gc, a) for a in xi_1.support()]
            hit = [a for a in moved if a in K_set]
            wit = {"g": fmtG(gc), "xi": [fmtG(g), phi.source.format_element(h)]}
            if hit:
                worst.update(-1, dict(wit, meeting_point=fmtG(hit[0])))
            else:
                d = _set_distance(moved, K_G, W_G)
                if d is None:
                    margin_is_floor = True
                    d = W_G.radius + 1
                worst.update(d - 1, wit)
            pop_proper += 1

    recenter_bound = (4 * P.omega_s1 + 4 if recenter_bound_override is None
                      else recenter_bound_override)
    pop_recenter = 0
    for g, h, xi_1 in qualifying or [
        (W_G.group.identity, phi.source.identity,
         act_left(W_G.group.identity, psi_of(phi.source.identity)))
    ]:
        supp = xi_1.support()
        indexed = [(W_G.index.get(a), a) for a in supp]
        if any(i is None for i, _ in indexed):
            raise ResolutionError("support of a sample leaves the target window")
        least = min(indexed)[1]
        g_rec = G.inv(least)
        lengths = [W_G.length_of(G.mul(g_rec, a)) for a in supp]
        if any(l is None for l in lengths):
            raise ResolutionError("recentred support does not resolve")
        m_len = max(lengths)
        recentred = act_left(g_rec, xi_1)
        K_ball = {e for e, l in zip(W_G.elements, W_G.lengths) if l <= recenter_bound}
        ip = recentred.inner_product(K_ball)
        wit = {"xi": [fmtG(g), phi.source.format_element(h)],
               "recentring_g": fmtG(g_rec), "max_length": m_len}
        worst.update(recenter_bound - m_len, wit)
        worst.update(ip - 1, wit)  # full mass must sit inside the ball
        pop_recenter += 1

    two_omega_2 = 2 * P.omega_s1 + 2
    pop_diam = 0
    for h in P.inner_elements:
        diam = _pair_diameter(psi_of(h).support(), W_G)
        if diam is None:
            raise ResolutionError("inner support diameter does not resolve")
        worst.update(two_omega_2 - diam,
                     {"h": phi.source.format_element(h), "diameter": diam,
                      "reason": "support diameter"})
        pop_diam += 1

    population = pop_proper + pop_recenter + pop_diam
    if population == 0:
        return CheckResult("g_action", "vacuous", None, None, 0,
                           details={"properness_threshold": tau})
    status = "pass" if worst.margin >= 0 else "fail"
    return CheckResult(
        "g_action", status, worst.witness, worst.margin, population,
        details={
            "properness_threshold": tau,
            "properness_population": pop_proper,
            "recenter_bound": recenter_bound,
            "recenter_population": pop_recenter,
            "diameter_population": pop_diam,
            "margin_is_floor": margin_is_floor,
        },
    )


def _stratified_sample(pairs: list, strata: list, cap: int, seed: int) -> list:
    """Deterministic seeded subsample, proportionally by stratum."""
    if len(pairs) <= cap:
        return pairs
    rnd = random.Random(seed)
    by_stratum: dict = {}
    for p, s in zip(pairs, strata):
        by_stratum.setdefault(s, []).append(p)
    out = []
    total = len(pairs)
    for s in sorted(by_stratum):
        bucket = by_stratum[s]
        want = max(1, cap * len(bucket) // total)
        out.extend(bucket if len(bucket) <= want else rnd.sample(bucket, want))
    return out


def run_all(config) -> Certificate:
    """Run the full pipeline and aggregate the certificate.

    Deterministic given the config (including the seed): windows are BFS
    ordered, samples are enumerated exhaustively below the sample cap, and
    every margin is an exact rational.
    """
    stage = "configure"
    try:
        selected = set(config.checks) if config.checks else set(CHECK_NAMES)
        unknown = selected - set(CHECK_NAMES)
        if unknown:
            raise PreconditionError(f"unknown checks: {sorted(unknown)}")
        epsilon = Fraction(config.epsilon)

        stage = "groups"
        H = make_group(config.group_H)
        G = make_group(config.group_G)
        phi = make_coarse_map(config.map_descriptor, H, G)

        stage = "windows"
        if config.radius_H <= 0 or config.radius_G <= 0:
            raise PreconditionError("window radii must be positive")
        W_H = build_window(H, config.radius_H)
        W_G = build_window(G, config.radius_G)

        stage = "moduli"
        if phi.has_analytic_moduli:
            m = analytic_moduli(phi, 2 * (config.radius_G + config.radius_H) + 8)
        else:
            t_req = config.t_max if config.t_max else 2 * config.radius_H
            m = estimate_moduli(phi, W_H, W_G, min(t_req, 2 * config.radius_H),
                                strict=False)

        stage = "scale"
        s = config.scale_override if config.scale_override else choose_scale(m)
        if config.eval_radius + (s + 1) > config.radius_H:
            raise PreconditionError(
                f"eval radius {config.eval_radius} + (s+1) = {s + 1} exceeds "
                f"radius_H = {config.radius_H}"
            )

        stage = "coboundedness"
        core_radius = config.core_radius if config.core_radius else max(
            2, min(5, config.radius_G // 8))
        core = build_window(G, core_radius)
        R = cobounded_radius(phi, W_H, core)

        stage = "partition"
        P = build_partition(W_H, W_G, phi, m, s, m_slack=config.m_slack)

        stage = "samples"
        eval_window = build_window(H, config.eval_radius)
        pair_window = build_window(H, min(2 * P.inner_radius, 2 * W_H.radius))
        cache: dict = {}

        def psi_of(h):
            d = cache.get(h)
            if d is None:
                d = psi(P, phi, h)
                cache[h] = d
            return d

        h_rad = max(0, min(4, P.inner_radius - config.eval_radius))
        g_rad = min(core_radius, 4)
        grid = [(g, h)
                for g, lg in zip(W_G.elements, W_G.lengths) if lg <= g_rad
                for h, lh in zip(W_H.elements, W_H.lengths) if lh <= h_rad]
        strata = [(W_G.length_of(g) + W_H.length_of(h)) for g, h in grid]
        samples = _stratified_sample(grid, strata, SAMPLE_CAP, config.seed)
        orbit_pts = [orbit_point(P, phi, g, h, eval_window) for g, h in samples]

        K_base = psi_of(H.identity).support()

        checks = []
        if "membership_x" in selected:
            stage = "membership_x"
            pts = [(H.format_element(h), psi_of(h)) for h in P.inner_elements]
            checks.append(check_membership_x(pts, W_G, 2 * P.omega_s1))
        if "lipschitz" in selected:
            stage = "lipschitz"
            checks.append(check_lipschitz(P, phi, pair_window, psi_of))
        if "sandwich" in selected:
            stage = "sandwich"
            checks.append(check_sandwich(P, phi, orbit_pts, m, W_G, pair_window, psi_of))
        if "properness_h" in selected:
            stage = "properness_h"
            zetas = [(g, h) for g, h in samples
                     if act_left(g, psi_of(h)).inner_product(set(K_base)) >= epsilon]
            zetas = zetas[:8] or [(G.identity, H.identity)]
            checks.append(check_properness_h(
                P, phi, zetas, K_base, m, W_G, epsilon, psi_of))
        if "cocompactness_h" in selected:
            stage = "cocompactness_h"
            h_cc = min(h_rad, max(0, (P.inner_radius - config.eval_radius) // 3))
            cc_samples = [(g, h) for g, h in samples
                          if W_H.length_of(h) <= h_cc][:64]
            checks.append(check_cocompactness_h(
                P, phi, cc_samples, m, R, W_G, psi_of))
        if "g_action" in selected:
            stage = "g_action"
            diam_K = _pair_diameter(K_base, W_G)
            tau = 2 * P.omega_s1 + 2 + 2 * diam_K
            if tau + 2 <= W_G.radius:
                aux = W_G
            else:
                aux = build_window(G, tau + 2)
            g_candidates = [e for e, l in zip(aux.elements, aux.lengths)
                            if tau < l <= tau + 2][:512]
            checks.append(check_g_action(
                P, phi, samples[:8], K_base, epsilon, W_G, g_candidates, psi_of))

        stage = "assemble"
        constants = {
            "s": Fraction(s),
            "M": P.M,
            "M_exact": P.M_exact,
            "m_slack": config.m_slack,
            "N_empirical": P.N_empirical,
            "N_apriori": P.N_apriori,
            "N_used": P.N,
            "omega_s_plus_1": P.omega_s1,
            "lipschitz_bound_2MN": 2 * P.M * P.N,
            "R": R,
            "core_radius": core_radius,
            "inner_radius": P.inner_radius,
            "cocompact_K_radius": R + P.omega_s1 + 1,
            "properness_h_threshold": _pair_diameter(K_base, W_G) + 2 * P.omega_s1 + 2,
            "g_properness_threshold": 2 * P.omega_s1 + 2 + 2 * _pair_diameter(K_base, W_G),
            "g_recenter_radius": 4 * P.omega_s1 + 4,
            "net_size": len(P.net.points),
            "overlap_count": P.overlap_count,
        }
        window_metadata = {
            "group_H": H.descriptor,
            "group_G": G.descriptor,
            "map": phi.descriptor,
            "radius_H": config.radius_H,
            "radius_G": config.radius_G,
            "eval_radius": config.eval_radius,
            "seed": config.seed,
            "epsilon": epsilon,
            "moduli_provenance": m.provenance,
            "moduli_t_max": m.t_max,
            "sample_count": len(samples),
            "sample_g_radius": g_rad,
            "sample_h_radius": h_rad,
            "checks_selected": sorted(selected),
            "scope": "orbit-scale certificate on finite windows",
        }
        return Certificate(constants=constants, checks=checks,
                           window_metadata=window_metadata)
    except CouplingCertError as exc:
        raise PipelineError(stage, exc) from exc
