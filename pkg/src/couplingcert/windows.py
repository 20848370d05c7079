"""Finite balls in a group: exact word-metric distances, greedy maximal
nets, and packing numbers.

A :class:`Window` is the radius-R ball of the word metric, enumerated by
breadth-first search from the identity in the model's fixed generator
order.  Distances are resolved by normal-form lookup: ``d(a, b)`` is the
cached word length of ``a^-1 b``, and a lookup miss means the distance
exceeds the window radius.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import PreconditionError, ResolutionError, WindowBudgetError
from .groups import GroupModel

DEFAULT_ELEMENT_BUDGET = 5_000_000

# packing search limits; beyond these the volume upper bound is returned
DEFAULT_NODE_BUDGET = 200_000
DEFAULT_CANDIDATE_CAP = 600


@dataclass
class Window:
    group: GroupModel
    radius: int
    elements: list
    index: dict
    lengths: list

    def length_of(self, a) -> Optional[int]:
        """Word length of ``a``, or None when ``a`` is outside the ball."""
        i = self.index.get(a)
        return None if i is None else self.lengths[i]

    def __len__(self):
        return len(self.elements)


def build_window(G: GroupModel, R: int, budget: int = DEFAULT_ELEMENT_BUDGET) -> Window:
    """Enumerate the radius-R ball by BFS in fixed generator order."""
    if R < 0:
        raise PreconditionError(f"radius must be nonnegative, got {R}")
    identity = G.identity
    elements = [identity]
    index = {identity: 0}
    lengths = [0]
    frontier = deque([identity])
    mul = G.mul
    gens = G.generators
    level = 0
    while frontier and level < R:
        level += 1
        for _ in range(len(frontier)):
            e = frontier.popleft()
            for g in gens:
                child = mul(e, g)
                if child in index:
                    continue
                if len(elements) >= budget:
                    raise WindowBudgetError(
                        f"ball of {G.descriptor} exceeded the {budget}-element "
                        f"budget at radius {level}",
                        radius_reached=level - 1,
                    )
                index[child] = len(elements)
                elements.append(child)
                lengths.append(level)
                frontier.append(child)
    return Window(group=G, radius=R, elements=elements, index=index, lengths=lengths)


def distance(W: Window, a, b) -> int:
    """Word-metric distance d(a, b) = |a^-1 b|; left-invariant by construction."""
    d = resolved_distance(W, a, b)
    if d is None:
        raise ResolutionError(
            f"d({W.group.format_element(a)}, {W.group.format_element(b)}) exceeds "
            f"the window radius {W.radius} of {W.group.descriptor}"
        )
    return d


def resolved_distance(W: Window, a, b) -> Optional[int]:
    """Like :func:`distance` but returns None instead of raising."""
    G = W.group
    return W.length_of(G.mul(G.inv(a), b))


@dataclass
class Net:
    scale: Fraction
    points: list


def greedy_net(W: Window, s) -> Net:
    """Greedy maximal s-discrete subset, scanned in BFS order.

    Maximality of the scan makes the result s-dense in the window.  An
    unresolvable pairwise distance exceeds the window radius and hence s,
    so it never blocks a candidate.
    """
    s = Fraction(s)
    if s < 1:
        raise PreconditionError(f"net scale must be >= 1, got {s}")
    G = W.group
    mul, inv = G.mul, G.inv
    if s > W.radius + 1:
        # a lookup miss must certify d >= s, so resolve in a ball that
        # reaches just below s (pairwise distances stay <= 2*radius)
        lookup = build_window(G, min(math.ceil(s) - 1, 2 * W.radius))
        length_of = lookup.length_of
    else:
        length_of = W.length_of
    chosen = []
    inverses = []
    for e in W.elements:
        ok = True
        for y_inv in inverses:
            d = length_of(mul(y_inv, e))
            if d is not None and d < s:
                ok = False
                break
        if ok:
            chosen.append(e)
            inverses.append(inv(e))
    return Net(scale=s, points=chosen)


def is_discrete(W: Window, points, s) -> bool:
    s = Fraction(s)
    for i, y in enumerate(points):
        for y2 in points[i + 1:]:
            d = resolved_distance(W, y, y2)
            if d is not None and d < s:
                return False
    return True


def is_dense(W: Window, points, s) -> bool:
    s = Fraction(s)
    for e in W.elements:
        if not any(
            (d := resolved_distance(W, y, e)) is not None and d < s for y in points
        ):
            return False
    return True


@dataclass
class PackingResult:
    value: int
    exact: bool
    witness: Optional[list] = None
    nodes: int = 0
    note: str = ""


def packing_number(
    W: Window,
    separation,
    diam_bound,
    node_budget: int = DEFAULT_NODE_BUDGET,
    candidate_cap: int = DEFAULT_CANDIDATE_CAP,
) -> PackingResult:
    """Maximum size of a subset with pairwise distances >= separation and
    diameter <= diam_bound.

    By left-invariance any maximizing configuration translates to one
    containing the identity, so the search runs over the centered ball of
    radius diam_bound via branch and bound.  When the candidate set or the
    node budget is exceeded the volume upper bound is returned with the
    exactness flag cleared; an overestimate is always safe downstream.
    """
    separation = Fraction(separation)
    diam_bound = Fraction(diam_bound)
    if separation <= 0 or diam_bound < 0:
        raise PreconditionError("separation must be positive and diam_bound nonnegative")
    if diam_bound + separation > 2 * W.radius:
        raise PreconditionError(
            f"need diam_bound + separation <= 2*radius, got {diam_bound} + "
            f"{separation} > {2 * W.radius}"
        )
    if diam_bound > W.radius:
        raise PreconditionError(
            f"diam_bound {diam_bound} exceeds the window radius {W.radius}; "
            "build a larger window"
        )

    candidates = [e for e, l in zip(W.elements, W.lengths) if l <= diam_bound]
    ub = _volume_upper_bound(W, separation, diam_bound, len(candidates))
    if len(candidates) > candidate_cap:
        return PackingResult(
            value=ub,
            exact=False,
            witness=None,
            nodes=0,
            note=f"candidate set of size {len(candidates)} exceeds cap {candidate_cap}",
        )

    # adjacency under "compatible in one configuration": >= separation apart
    # and <= diam_bound apart.  Unresolvable distances exceed the radius,
    # hence exceed diam_bound (incompatible) and separation (discrete).
    n = len(candidates)
    length_of = W.length_of
    mul, inv = W.group.mul, W.group.inv
    compat = [set() for _ in range(n)]
    for i in range(n):
        inv_i = inv(candidates[i])
        for j in range(i + 1, n):
            d = length_of(mul(inv_i, candidates[j]))
            if d is not None and separation <= d <= diam_bound:
                compat[i].add(j)
                compat[j].add(i)

    best = [1 if n else 0]
    best_set = [[0] if n else []]
    nodes = [0]
    aborted = [False]

    def extend(current: list, allowed: list):
        nodes[0] += 1
        if nodes[0] > node_budget:
            aborted[0] = True
            return
        if len(current) > best[0]:
            best[0] = len(current)
            best_set[0] = list(current)
        for pos, j in enumerate(allowed):
            if len(current) + (len(allowed) - pos) <= best[0]:
                return
            rest = [k for k in allowed[pos + 1:] if k in compat[j]]
            current.append(j)
            extend(current, rest)
            current.pop()
            if aborted[0]:
                return

    if n:
        # configurations are translated so candidate 0 (the identity) is a member
        extend([0], sorted(compat[0]))
    if aborted[0]:
        return PackingResult(
            value=ub,
            exact=False,
            witness=None,
            nodes=nodes[0],
            note=f"node budget {node_budget} exceeded",
        )
    return PackingResult(
        value=best[0],
        exact=True,
        witness=[candidates[i] for i in best_set[0]],
        nodes=nodes[0],
    )


def _volume_upper_bound(W: Window, separation: Fraction, diam_bound: Fraction, n_candidates: int) -> int:
    """Disjoint-ball counting bound; falls back to the candidate count."""
    r = (math.ceil(separation) - 1) // 2
    big = diam_bound + r
    if r >= 1 and big <= W.radius:
        outer = sum(1 for l in W.lengths if l <= big)
        inner = sum(1 for l in W.lengths if l <= r)
        return min(n_candidates, outer // inner)
    return n_candidates


def packing_number_naive(W: Window, separation, diam_bound) -> int:
    """Independent oracle: exhaustive subset search over the whole window.

    No translation trick, no bound pruning; only feasibility pruning.
    Intended for windows of a few dozen elements.
    """
    separation = Fraction(separation)
    diam_bound = Fraction(diam_bound)
    n = len(W.elements)
    length_of = W.length_of
    mul, inv = W.group.mul, W.group.inv

    def dist(i: int, j: int):
        return length_of(mul(inv(W.elements[i]), W.elements[j]))

    best = [0]

    def extend(start: int, current: list):
        if len(current) > best[0]:
            best[0] = len(current)
        for j in range(start, n):
            ok = True
            for i in current:
                d = dist(i, j)
                if d is None or d < separation or d > diam_bound:
                    ok = False
                    break
            if ok:
                current.append(j)
                extend(j + 1, current)
                current.pop()

    extend(0, [])
    return best[0]
