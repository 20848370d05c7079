"""Coarse maps between group models and their compression / expansion
moduli.

``kappa[t]`` is the least image distance over scanned pairs at source
distance >= t, ``omega[t]`` the largest over pairs at source distance
<= t.  Window estimation scans every unordered pair of window elements
whose source distance is at most ``t_max``; per-``t`` witness pairs and
populations are recorded so downstream checks can refuse unsupported
table entries.  Built-in maps with easy closed forms carry analytic
moduli, which are valid at every scale and are preferred by the
certificate pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

from .errors import (
    DescriptorError,
    PreconditionError,
    ResolutionError,
    ScaleSelectionError,
    TableMapError,
)
from .groups import FreeGroup, GroupModel, ZdGroup
from .windows import Window, build_window


@dataclass
class CoarseMap:
    source: GroupModel
    target: GroupModel
    kind: str
    descriptor: str
    fn: Callable
    # exact integer-valued closed forms t -> kappa(t), t -> omega(t)
    analytic_kappa: Optional[Callable[[int], int]] = None
    analytic_omega: Optional[Callable[[int], int]] = None

    @property
    def has_analytic_moduli(self) -> bool:
        return self.analytic_kappa is not None and self.analytic_omega is not None


def apply(phi: CoarseMap, h):
    """Evaluate phi at h, returning a target normal form."""
    phi.source.validate(h)
    out = phi.fn(h)
    phi.target.validate(out)
    return out


def identity_map(H: GroupModel, G: GroupModel) -> CoarseMap:
    if H.descriptor != G.descriptor:
        raise DescriptorError(
            f"identity map needs matching groups, got {H.descriptor} vs {G.descriptor}"
        )
    return CoarseMap(H, G, "identity", "identity", lambda h: h,
                     analytic_kappa=lambda t: t, analytic_omega=lambda t: t)


def scale_map(H: GroupModel, G: GroupModel, k: int) -> CoarseMap:
    """Componentwise n -> k*n on Z^d; also models finite-index inclusions
    such as (2Z)^d in Z^d, with the source carrying its own word metric."""
    if not (isinstance(H, ZdGroup) and isinstance(G, ZdGroup) and H.d == G.d):
        raise DescriptorError("scale map needs Z^d source and target of equal rank")
    if k < 1:
        raise DescriptorError(f"scale factor must be >= 1, got {k}")
    return CoarseMap(H, G, "scale", f"scale:{k}",
                     lambda h: tuple(k * x for x in h),
                     analytic_kappa=lambda t: k * t, analytic_omega=lambda t: k * t)


def embed_map(H: GroupModel, G: GroupModel) -> CoarseMap:
    """Coordinate embedding Z^d -> Z^e, d <= e (an l1 isometry)."""
    if not (isinstance(H, ZdGroup) and isinstance(G, ZdGroup) and H.d <= G.d):
        raise DescriptorError("embed map needs Z^d -> Z^e with d <= e")
    pad = (0,) * (G.d - H.d)
    return CoarseMap(H, G, "embed", "embed", lambda h: h + pad,
                     analytic_kappa=lambda t: t, analytic_omega=lambda t: t)


def swap_map(H: GroupModel, G: GroupModel) -> CoarseMap:
    """The automorphism of F_k exchanging the first two letters; it permutes
    the generating set, hence is an isometry."""
    if not (isinstance(H, FreeGroup) and isinstance(G, FreeGroup) and H.k == G.k and H.k >= 2):
        raise DescriptorError("swap map needs F_k source and target with k >= 2")

    def sw(x: int) -> int:
        a = abs(x)
        if a == 1:
            a = 2
        elif a == 2:
            a = 1
        return a if x > 0 else -a

    return CoarseMap(H, G, "swap", "swap", lambda h: tuple(sw(x) for x in h),
                     analytic_kappa=lambda t: t, analytic_omega=lambda t: t)


def matrix_map(H: GroupModel, G: GroupModel, entries: tuple) -> CoarseMap:
    """v -> Av for A in GL_2(Z), acting on Z^2."""
    if not (isinstance(H, ZdGroup) and isinstance(G, ZdGroup) and H.d == 2 and G.d == 2):
        raise DescriptorError("matrix map needs Z^2 source and target")
    a, b, c, d = entries
    if a * d - b * c not in (1, -1):
        raise DescriptorError(f"matrix {entries} is not in GL_2(Z)")
    desc = "matrix:" + ",".join(str(x) for x in entries)
    return CoarseMap(H, G, "matrix", desc,
                     lambda h: (a * h[0] + b * h[1], c * h[0] + d * h[1]))


def table_map(H: GroupModel, G: GroupModel, mapping: dict, descriptor: str = "table") -> CoarseMap:
    def look(h):
        try:
            return mapping[h]
        except KeyError:
            raise TableMapError(
                f"lookup-table map has no entry for {H.format_element(h)}"
            ) from None

    return CoarseMap(H, G, "table", descriptor, look)


def load_map_table(path, H: GroupModel, G: GroupModel) -> CoarseMap:
    """Read a lookup table: one ``<source> -> <target>`` per line, ``#``
    comments and blank lines ignored."""
    mapping = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "->" not in line:
            raise TableMapError(f"{path}:{lineno}: expected '<src> -> <tgt>', got {raw!r}")
        left, _, right = line.partition("->")
        try:
            src = H.parse_element(left.strip())
            tgt = G.parse_element(right.strip())
        except Exception as exc:
            raise TableMapError(f"{path}:{lineno}: {exc}") from None
        mapping[src] = tgt
    return table_map(H, G, mapping, descriptor=f"table:{path}")


def make_coarse_map(descriptor: str, H: GroupModel, G: GroupModel) -> CoarseMap:
    """Parse a map descriptor: identity, scale:k, embed, swap,
    matrix:a,b,c,d, or table:path."""
    if descriptor == "identity":
        return identity_map(H, G)
    if descriptor == "embed":
        return embed_map(H, G)
    if descriptor == "swap":
        return swap_map(H, G)
    if descriptor.startswith("scale:"):
        try:
            k = int(descriptor.split(":", 1)[1])
        except ValueError:
            raise DescriptorError(f"bad scale descriptor: {descriptor!r}") from None
        return scale_map(H, G, k)
    if descriptor.startswith("matrix:"):
        parts = descriptor.split(":", 1)[1].split(",")
        if len(parts) != 4:
            raise DescriptorError(f"matrix descriptor needs 4 entries: {descriptor!r}")
        try:
            entries = tuple(int(p) for p in parts)
        except ValueError:
            raise DescriptorError(f"bad matrix descriptor: {descriptor!r}") from None
        return matrix_map(H, G, entries)
    if descriptor.startswith("table:"):
        return load_map_table(descriptor.split(":", 1)[1], H, G)
    raise DescriptorError(f"unknown map descriptor: {descriptor!r}")


@dataclass
class Moduli:
    t_max: int
    kappa: list
    omega: list
    provenance: str  # "window-estimated" | "analytic"
    # per t: number of scanned pairs at source distance exactly / >= / <= t
    pair_counts: Optional[list] = None
    kappa_support: Optional[list] = None
    omega_support: Optional[list] = None
    # per t: a pair (h1, h2, d_H, d_G) attaining the extremum
    kappa_witness: Optional[list] = None
    omega_witness: Optional[list] = None
    requested_t_max: Optional[int] = None

    def kappa_at(self, t: int) -> Optional[int]:
        """kappa at integer t (step interpolation); None when unsupported."""
        if t < 0:
            t = 0
        if t > self.t_max:
            return None
        if self.kappa_support is not None and self.kappa_support[t] == 0:
            return None
        return self.kappa[t]

    def omega_at(self, t: int) -> Optional[int]:
        if t < 0:
            t = 0
        if t > self.t_max:
            return None
        return self.omega[t]


def analytic_moduli(phi: CoarseMap, t_max: int) -> Moduli:
    if not phi.has_analytic_moduli:
        raise PreconditionError(f"map {phi.descriptor} has no analytic moduli")
    ks = [phi.analytic_kappa(t) for t in range(t_max + 1)]
    os_ = [phi.analytic_omega(t) for t in range(t_max + 1)]
    return Moduli(t_max=t_max, kappa=ks, omega=os_, provenance="analytic",
                  requested_t_max=t_max)


def estimate_moduli(
    phi: CoarseMap,
    W_H: Window,
    W_G: Window,
    t_max: int,
    strict: bool = True,
) -> Moduli:
    """Exhaustive pair scan over the source window.

    Pairs at source distance above ``t_max`` are outside the scan.  An
    image distance that does not resolve in ``W_G`` raises in strict mode;
    otherwise the table is truncated below the first affected distance
    (enlarging the source window can only shrink kappa and grow omega, so
    truncation keeps every recorded entry exact for the scanned window).
    """
    if t_max < 0 or t_max > 2 * W_H.radius:
        raise PreconditionError(f"need 0 <= t_max <= 2*radius_H, got {t_max}")
    H, G = phi.source, phi.target
    if W_H.radius >= t_max:
        diff = W_H
    else:
        diff = build_window(H, t_max)
    elements = W_H.elements
    n = len(elements)
    images = [apply(phi, h) for h in elements]

    min_img = [None] * (t_max + 1)
    max_img = [None] * (t_max + 1)
    counts = [0] * (t_max + 1)
    min_wit = [None] * (t_max + 1)
    max_wit = [None] * (t_max + 1)
    t_bad = None

    mulH, invH = H.mul, H.inv
    mulG, invG = G.mul, G.inv
    diff_len = diff.length_of
    g_len = W_G.length_of
    for i in range(n):
        hi = elements[i]
        inv_hi = invH(hi)
        inv_img = invG(images[i])
        for j in range(i + 1, n):
            dH = diff_len(mulH(inv_hi, elements[j]))
            if dH is None or dH > t_max:
                continue
            dG = g_len(mulG(inv_img, images[j]))
            if dG is None:
                if strict:
                    raise ResolutionError(
                        f"image distance of a pair at source distance {dH} does "
                        f"not resolve in the target window (radius {W_G.radius}); "
                        "enlarge the target window or lower t_max"
                    )
                t_bad = dH if t_bad is None else min(t_bad, dH)
                continue
            counts[dH] += 1
            if min_img[dH] is None or dG < min_img[dH]:
                min_img[dH] = dG
                min_wit[dH] = (hi, elements[j], dH, dG)
            if max_img[dH] is None or dG > max_img[dH]:
                max_img[dH] = dG
                max_wit[dH] = (hi, elements[j], dH, dG)

    # the diagonal: every element pairs with itself at distance 0
    counts[0] += n
    if min_img[0] is None or min_img[0] > 0:
        min_img[0] = 0
        min_wit[0] = (elements[0], elements[0], 0, 0)
    if max_img[0] is None:
        max_img[0] = 0
        max_wit[0] = (elements[0], elements[0], 0, 0)

    eff = t_max if t_bad is None else min(t_max, t_bad - 1)
    while eff > 0 and counts[eff] == 0:
        eff -= 1

    kappa = [0] * (eff + 1)
    omega = [0] * (eff + 1)
    k_wit = [None] * (eff + 1)
    o_wit = [None] * (eff + 1)
    k_support = [0] * (eff + 1)
    o_support = [0] * (eff + 1)

    running_min, running_wit, running_count = None, None, 0
    for t in range(eff, -1, -1):
        if min_img[t] is not None and (running_min is None or min_img[t] < running_min):
            running_min = min_img[t]
            running_wit = min_wit[t]
        running_count += counts[t]
        kappa[t] = running_min if running_min is not None else 0
        k_wit[t] = running_wit
        k_support[t] = running_count
    running_max, running_wit, running_count = None, None, 0
    for t in range(eff + 1):
        if max_img[t] is not None and (running_max is None or max_img[t] > running_max):
            running_max = max_img[t]
            running_wit = max_wit[t]
        running_count += counts[t]
        omega[t] = running_max if running_max is not None else 0
        o_wit[t] = running_wit
        o_support[t] = running_count

    return Moduli(
        t_max=eff,
        kappa=kappa,
        omega=omega,
        provenance="window-estimated",
        pair_counts=counts[: eff + 1],
        kappa_support=k_support,
        omega_support=o_support,
        kappa_witness=k_wit,
        omega_witness=o_wit,
        requested_t_max=t_max,
    )


def choose_scale(m: Moduli) -> int:
    """Least integer s with kappa(s) >= 3."""
    for t in range(1, m.t_max + 1):
        k = m.kappa_at(t)
        if k is not None and k >= 3:
            return t
    tail = m.kappa[m.t_max] if m.t_max >= 0 else 0
    earlier = m.kappa[max(0, m.t_max - 2)]
    if m.t_max >= 1 and tail > earlier:
        raise ScaleSelectionError(
            f"kappa reaches only {tail} at t_max={m.t_max} but is still "
            "growing; re-estimate with a larger window / t_max",
            kind="t-max-too-small",
        )
    raise ScaleSelectionError(
        f"kappa is bounded (value {tail} at t_max={m.t_max}); the map does "
        "not expand distances and is not a coarse equivalence at this scale",
        kind="kappa-bounded",
    )


def cobounded_radius(phi: CoarseMap, W_H: Window, W_G_core: Window) -> int:
    """R = 1 + max over core g of the distance from g to the image of the
    source window; the +1 keeps the coboundedness inequality strict."""
    G = phi.target
    mulG, invG = G.mul, G.inv
    core_len = W_G_core.length_of
    images = [apply(phi, h) for h in W_H.elements]
    worst = 0
    for g in W_G_core.elements:
        inv_g = invG(g)
        dmin = None
        for img in images:
            d = core_len(mulG(inv_g, img))
            if d is not None and (dmin is None or d < dmin):
                dmin = d
                if dmin == 0:
                    break
        if dmin is None:
            raise ResolutionError(
                f"no image of the source window is visible from "
                f"{G.format_element(g)} within the core window; enlarge windows"
            )
        worst = max(worst, dmin)
    return worst + 1
