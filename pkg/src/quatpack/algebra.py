"""Exact arithmetic in imaginary quadratic fields and definite quaternion algebras.

An element is stored as four rational coordinates on the basis 1, i, j, ij of
the algebra (a, b / Q).  The commutative case Q(sqrt a) is the same code path
with b = 0 and the last two coordinates pinned to zero.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

STANDARD = "standard"
ORTHOGONAL = "orthogonal"


class StructureError(ValueError):
    pass


def _q(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class AlgebraSig:
    dim: int
    a: Fraction
    b: Fraction | None = None
    involution: str = STANDARD

    def __post_init__(self):
        object.__setattr__(self, "a", _q(self.a))
        if self.b is not None:
            object.__setattr__(self, "b", _q(self.b))
        if self.dim not in (3, 4, 5):
            raise StructureError(f"dim must be 3, 4 or 5, got {self.dim}")
        if self.a >= 0:
            raise StructureError("a must be negative")
        if self.dim == 3:
            if self.b is not None or self.involution != STANDARD:
                raise StructureError("dim 3 takes no b and the standard involution")
        else:
            if self.b is None or self.b >= 0:
                raise StructureError("b must be negative")
            want = ORTHOGONAL if self.dim == 4 else STANDARD
            if self.involution != want:
                raise StructureError(f"dim {self.dim} requires the {want} involution")

    @classmethod
    def field(cls, n: int) -> "AlgebraSig":
        """Q(sqrt(-n)) for n > 0."""
        return cls(3, Fraction(-n))

    @classmethod
    def quaternion(cls, a, b, dim: int = 5) -> "AlgebraSig":
        return cls(dim, _q(a), _q(b), ORTHOGONAL if dim == 4 else STANDARD)

    @property
    def bb(self) -> Fraction:
        return self.b if self.b is not None else Fraction(0)

    @property
    def rank(self) -> int:
        return 2 if self.dim == 3 else 4

    def to_json(self) -> dict:
        return {"dim": self.dim, "a": str(self.a),
                "b": None if self.b is None else str(self.b),
                "involution": self.involution}

    @classmethod
    def from_json(cls, d: dict) -> "AlgebraSig":
        b = d.get("b")
        return cls(int(d["dim"]), Fraction(d["a"]), None if b is None else Fraction(b),
                   d.get("involution", ORTHOGONAL if int(d["dim"]) == 4 else STANDARD))


class QuatElem:
    __slots__ = ("sig", "c")

    def __init__(self, sig: AlgebraSig, coords: Iterable):
        c = tuple(_q(x) for x in coords)
        if len(c) < 4:
            c = c + (Fraction(0),) * (4 - len(c))
        if len(c) != 4:
            raise StructureError("expected at most four coordinates")
        if sig.dim == 3 and (c[2] or c[3]):
            raise StructureError("dim-3 elements have no j or ij part")
        self.sig = sig
        self.c = c

    # constructors
    @classmethod
    def scalar(cls, sig, r) -> "QuatElem":
        return cls(sig, (r, 0, 0, 0))

    @classmethod
    def basis(cls, sig, k: int) -> "QuatElem":
        v = [0, 0, 0, 0]
        v[k] = 1
        return cls(sig, v)

    def _check(self, other):
        if not isinstance(other, QuatElem):
            return QuatElem.scalar(self.sig, other)
        if other.sig != self.sig:
            raise StructureError("signature mismatch")
        return other

    def __add__(self, other):
        o = self._check(other)
        return QuatElem(self.sig, (x + y for x, y in zip(self.c, o.c)))

    __radd__ = __add__

    def __neg__(self):
        return QuatElem(self.sig, (-x for x in self.c))

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        if not isinstance(other, QuatElem):
            r = _q(other)
            return QuatElem(self.sig, (r * x for x in self.c))
        o = self._check(other)
        return QuatElem(self.sig, qmul(self.c, o.c, self.sig.a, self.sig.bb))

    def __rmul__(self, other):
        r = _q(other)
        return QuatElem(self.sig, (r * x for x in self.c))

    def __truediv__(self, r):
        if isinstance(r, QuatElem):
            return self * r.inverse()
        r = _q(r)
        return QuatElem(self.sig, (x / r for x in self.c))

    def __eq__(self, other):
        if isinstance(other, QuatElem):
            return self.sig == other.sig and self.c == other.c
        if isinstance(other, (int, Fraction)):
            return self.c == (_q(other), 0, 0, 0)
        return NotImplemented

    def __hash__(self):
        return hash((self.sig, self.c))

    def __repr__(self):
        return f"QuatElem({format_elem(self)})"

    def conj(self) -> "QuatElem":
        x, y, z, t = self.c
        return QuatElem(self.sig, (x, -y, -z, -t))

    def dagger(self) -> "QuatElem":
        if self.sig.involution != ORTHOGONAL:
            raise StructureError("dagger is only defined for the orthogonal involution")
        x, y, z, t = self.c
        return QuatElem(self.sig, (x, y, z, -t))

    def trace(self) -> Fraction:
        return 2 * self.c[0]

    def norm(self) -> Fraction:
        return qnorm(self.c, self.sig.a, self.sig.bb)

    def inverse(self) -> "QuatElem":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("zero has no inverse")
        return self.conj() / n

    def is_zero(self) -> bool:
        return not any(self.c)


def qmul(x, y, a, b):
    """Product of coordinate 4-tuples in (a, b)."""
    x0, x1, x2, x3 = x
    y0, y1, y2, y3 = y
    return (
        x0 * y0 + a * x1 * y1 + b * x2 * y2 - a * b * x3 * y3,
        x0 * y1 + x1 * y0 - b * x2 * y3 + b * x3 * y2,
        x0 * y2 + x2 * y0 + a * x1 * y3 - a * x3 * y1,
        x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1,
    )


def qnorm(x, a, b):
    return x[0] * x[0] - a * x[1] * x[1] - b * x[2] * x[2] + a * b * x[3] * x[3]


def trace(x: QuatElem) -> Fraction:
    return x.trace()


def norm(x: QuatElem) -> Fraction:
    return x.norm()


def mul(x: QuatElem, y: QuatElem) -> QuatElem:
    return x * y


def conj(x: QuatElem) -> QuatElem:
    return x.conj()


def dagger(x: QuatElem) -> QuatElem:
    return x.dagger()


def dot(x: QuatElem, y: QuatElem) -> Fraction:
    """Euclidean inner product tr(x conj(y)) / 2."""
    return (x * y.conj()).trace() / 2


_NAMES = ("", "*i", "*j", "*k")


def format_elem(x: QuatElem) -> str:
    n = 2 if x.sig.dim == 3 else 4
    return " + ".join(f"{x.c[k]}{_NAMES[k]}" for k in range(n))


_TERM = re.compile(r"^\s*([+-]?)\s*(\d+(?:/\d+)?)?\s*(?:\*?\s*([ijk]))?\s*$")


def parse_elem(sig: AlgebraSig, text: str) -> QuatElem:
    """Parse 'p/q + p/q*i + p/q*j + p/q*k' (terms in any order, signs allowed)."""
    coords = [Fraction(0)] * 4
    s = text.replace("- ", "+ -").replace("-", "+-")
    for raw in s.split("+"):
        if not raw.strip():
            continue
        m = _TERM.match(raw)
        if not m or not (m.group(2) or m.group(3)):
            raise ValueError(f"cannot parse term {raw!r}")
        val = Fraction(m.group(2) or 1) * (-1 if m.group(1) == "-" else 1)
        coords["_ijk".index(m.group(3)) if m.group(3) else 0] += val
    return QuatElem(sig, coords)
