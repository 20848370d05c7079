"""Finitely generated group models with canonical normal forms.

Every element is a plain hashable value (an int or a tuple of ints); the
model object owns multiplication, inversion, validation and the string
syntax.  Equality of normal forms is equality of group elements, and the
identity is always the designated zero form.

Built-in models and their encodings:

* ``Z^d``   -- tuple of ``d`` ints, generators ``+-e_i``.
* ``C_n``   -- int in ``[0, n)``, generators ``+-1 mod n``.
* ``F_k``   -- reduced word as a tuple of nonzero ints in ``+-{1..k}``
  (``1 -> a``, ``-1 -> a^-1``, ...), generators ``a, a^-1, b, b^-1, ...``.
* ``Heis``  -- triple ``(a, b, c)`` meaning ``x^a y^b z^c`` with
  ``(a,b,c)(a',b',c') = (a+a', b+b', c+c'+a*b')``; generators ``x^-+1,
  y^-+1`` and ``z = [x, y]`` derived.
* ``A x B`` -- tuple of factor normal forms; generators are the factor
  generators embedded with identity elsewhere, so the word metric is the
  l1-sum of the factor word metrics.
"""

from __future__ import annotations

import re
from typing import Iterable

from .errors import DescriptorError, NormalFormError

MAX_ZD_RANK = 4
MAX_FREE_RANK = 3
MAX_CYCLIC_ORDER = 10**6

_FREE_LETTERS = "abc"


class GroupModel:
    """Base class; concrete models fill in the arithmetic."""

    name: str
    descriptor: str
    generators: list
    identity: object

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def validate(self, a) -> None:
        """Raise NormalFormError unless ``a`` is a canonical normal form."""
        raise NotImplementedError

    def format_element(self, a) -> str:
        raise NotImplementedError

    def parse_element(self, s: str):
        raise NotImplementedError

    def __repr__(self):
        return f"<GroupModel {self.descriptor}>"


class ZdGroup(GroupModel):
    def __init__(self, d: int):
        if not 1 <= d <= MAX_ZD_RANK:
            raise DescriptorError(f"Z^d supports 1 <= d <= {MAX_ZD_RANK}, got d={d}")
        self.d = d
        self.descriptor = f"Z^{d}"
        self.name = self.descriptor
        self.identity = (0,) * d
        gens = []
        for i in range(d):
            e = [0] * d
            e[i] = 1
            gens.append(tuple(e))
            e[i] = -1
            gens.append(tuple(e))
        self.generators = gens

    def mul(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inv(self, a):
        return tuple(-x for x in a)

    def validate(self, a):
        if not (isinstance(a, tuple) and len(a) == self.d and all(isinstance(x, int) for x in a)):
            raise NormalFormError(f"not a Z^{self.d} normal form: {a!r}")

    def format_element(self, a):
        if self.d == 1:
            return str(a[0])
        return "(" + ",".join(str(x) for x in a) + ")"

    def parse_element(self, s):
        s = s.strip()
        if self.d == 1 and not s.startswith("("):
            try:
                return (int(s),)
            except ValueError:
                raise NormalFormError(f"bad Z^1 element: {s!r}") from None
        if not (s.startswith("(") and s.endswith(")")):
            raise NormalFormError(f"bad Z^{self.d} element: {s!r}")
        parts = s[1:-1].split(",")
        if len(parts) != self.d:
            raise NormalFormError(f"expected {self.d} coordinates: {s!r}")
        try:
            return tuple(int(p) for p in parts)
        except ValueError:
            raise NormalFormError(f"bad Z^{self.d} element: {s!r}") from None


class CyclicGroup(GroupModel):
    def __init__(self, n: int):
        if not 1 <= n <= MAX_CYCLIC_ORDER:
            raise DescriptorError(f"C_n supports 1 <= n <= {MAX_CYCLIC_ORDER}, got n={n}")
        self.n = n
        self.descriptor = f"C_{n}"
        self.name = self.descriptor
        self.identity = 0
        # +-1 coincide for n <= 2; keep the generating set duplicate-free.
        self.generators = sorted({1 % n, (n - 1) % n})

    def mul(self, a, b):
        return (a + b) % self.n

    def inv(self, a):
        return (-a) % self.n

    def validate(self, a):
        if not (isinstance(a, int) and 0 <= a < self.n):
            raise NormalFormError(f"not a C_{self.n} normal form: {a!r}")

    def format_element(self, a):
        return str(a)

    def parse_element(self, s):
        try:
            return int(s.strip()) % self.n
        except ValueError:
            raise NormalFormError(f"bad C_{self.n} element: {s!r}") from None


class FreeGroup(GroupModel):
    def __init__(self, k: int):
        if not 1 <= k <= MAX_FREE_RANK:
            raise DescriptorError(f"F_k supports 1 <= k <= {MAX_FREE_RANK}, got k={k}")
        self.k = k
        self.descriptor = f"F_{k}"
        self.name = self.descriptor
        self.identity = ()
        gens = []
        for i in range(1, k + 1):
            gens.append((i,))
            gens.append((-i,))
        self.generators = gens

    def mul(self, a, b):
        # free reduction at the seam only; both inputs are already reduced
        i = len(a)
        j = 0
        while i > 0 and j < len(b) and a[i - 1] == -b[j]:
            i -= 1
            j += 1
        return a[:i] + b[j:]

    def inv(self, a):
        return tuple(-x for x in reversed(a))

    def validate(self, a):
        if not isinstance(a, tuple):
            raise NormalFormError(f"not an F_{self.k} normal form: {a!r}")
        for x in a:
            if not isinstance(x, int) or x == 0 or abs(x) > self.k:
                raise NormalFormError(f"letter out of range in {a!r}")
        for u, v in zip(a, a[1:]):
            if u == -v:
                raise NormalFormError(f"word not reduced: {a!r}")

    def format_element(self, a):
        if not a:
            return "1"
        out = []
        for x in a:
            c = _FREE_LETTERS[abs(x) - 1]
            out.append(c if x > 0 else c.upper())
        return "".join(out)

    def parse_element(self, s):
        s = s.strip()
        if s == "1":
            return ()
        word = []
        for ch in s:
            low = ch.lower()
            if low not in _FREE_LETTERS[: self.k]:
                raise NormalFormError(f"bad F_{self.k} letter {ch!r} in {s!r}")
            x = _FREE_LETTERS.index(low) + 1
            word.append(x if ch.islower() else -x)
        w = tuple(word)
        self.validate(w)
        return w


class HeisenbergGroup(GroupModel):
    """Discrete Heisenberg group on generators x, y with z = [x, y]."""

    def __init__(self):
        self.descriptor = "Heis"
        self.name = "Heis"
        self.identity = (0, 0, 0)
        self.generators = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)]

    def mul(self, a, b):
        return (a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1])

    def inv(self, a):
        # (a,b,c)(-a,-b,ab-c) = (0,0,0)
        return (-a[0], -a[1], a[0] * a[1] - a[2])

    def validate(self, a):
        if not (isinstance(a, tuple) and len(a) == 3 and all(isinstance(x, int) for x in a)):
            raise NormalFormError(f"not a Heis normal form: {a!r}")

    def format_element(self, a):
        return "(" + ",".join(str(x) for x in a) + ")"

    def parse_element(self, s):
        s = s.strip()
        if not (s.startswith("(") and s.endswith(")")):
            raise NormalFormError(f"bad Heis element: {s!r}")
        parts = s[1:-1].split(",")
        if len(parts) != 3:
            raise NormalFormError(f"bad Heis element: {s!r}")
        try:
            return tuple(int(p) for p in parts)
        except ValueError:
            raise NormalFormError(f"bad Heis element: {s!r}") from None


class ProductGroup(GroupModel):
    def __init__(self, factors: Iterable[GroupModel]):
        self.factors = list(factors)
        if len(self.factors) < 2:
            raise DescriptorError("a product needs at least two factors")
        self.descriptor = " x ".join(f.descriptor for f in self.factors)
        self.name = self.descriptor
        self.identity = tuple(f.identity for f in self.factors)
        gens = []
        for i, f in enumerate(self.factors):
            for g in f.generators:
                gens.append(tuple(g if j == i else other.identity
                                  for j, other in enumerate(self.factors)))
        self.generators = gens

    def mul(self, a, b):
        return tuple(f.mul(x, y) for f, x, y in zip(self.factors, a, b))

    def inv(self, a):
        return tuple(f.inv(x) for f, x in zip(self.factors, a))

    def validate(self, a):
        if not (isinstance(a, tuple) and len(a) == len(self.factors)):
            raise NormalFormError(f"not a {self.descriptor} normal form: {a!r}")
        for f, x in zip(self.factors, a):
            f.validate(x)

    def format_element(self, a):
        return "|".join(f.format_element(x) for f, x in zip(self.factors, a))

    def parse_element(self, s):
        parts = s.strip().split("|")
        if len(parts) != len(self.factors):
            raise NormalFormError(f"expected {len(self.factors)} factors: {s!r}")
        return tuple(f.parse_element(p) for f, p in zip(self.factors, parts))


_ZD_RE = re.compile(r"^Z(?:\^(\d+))?$")
_FREE_RE = re.compile(r"^F_?(\d+)$")
_CYCLIC_RE = re.compile(r"^C_?(\d+)$")


def make_group(descriptor: str) -> GroupModel:
    """Build a group model from a descriptor string.

    Accepted: ``Z^d`` (``Z`` means ``Z^1``), ``F_k``, ``Heis``, ``C_n``,
    and products ``A x B`` (flattened left to right).
    """
    parts = [p.strip() for p in descriptor.split(" x ")]
    if any(not p for p in parts):
        raise DescriptorError(f"bad group descriptor: {descriptor!r}")
    factors = [_make_atomic(p) for p in parts]
    if len(factors) == 1:
        return factors[0]
    return ProductGroup(factors)


def _make_atomic(part: str) -> GroupModel:
    m = _ZD_RE.match(part)
    if m:
        return ZdGroup(int(m.group(1) or "1"))
    m = _FREE_RE.match(part)
    if m:
        return FreeGroup(int(m.group(1)))
    m = _CYCLIC_RE.match(part)
    if m:
        return CyclicGroup(int(m.group(1)))
    if part == "Heis":
        return HeisenbergGroup()
    raise DescriptorError(f"unknown group descriptor: {part!r}")


def multiply(G: GroupModel, a, b):
    """Validated product a*b in normal form."""
    G.validate(a)
    G.validate(b)
    return G.mul(a, b)


def inverse(G: GroupModel, a):
    """Validated inverse of a."""
    G.validate(a)
    return G.inv(a)
