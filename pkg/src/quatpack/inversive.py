"""Inversive coordinates of oriented spheres and the Hermitian Möbius action.

Two representations live here:

* ``InvCoord``: exact coordinates (bend, co-bend, bend-center) with the
  bend-center a ``QuatElem``; an optional common factor sqrt(scale_sq) keeps
  irrational scalings exact.
* ``Frame``: integer coordinates relative to a basis of R(Z)+ adapted to a
  covering vector.  All packing enumeration runs in this representation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebra import QuatElem, StructureError, format_elem


# ---------------------------------------------------------------- surds

@dataclass(frozen=True)
class Surd:
    """The real number rat * sqrt(rad) with rad >= 0."""
    rat: Fraction
    rad: Fraction = Fraction(1)

    def __float__(self):
        return float(self.rat) * math.sqrt(self.rad)

    def square(self) -> Fraction:
        return self.rat * self.rat * self.rad

    def sign(self) -> int:
        return 0 if self.rat == 0 or self.rad == 0 else (1 if self.rat > 0 else -1)

    def abs_gt(self, t) -> bool:
        """|self| > t for a rational t >= 0, decided exactly."""
        t = Fraction(t)
        return self.square() > t * t

    def abs_le(self, t) -> bool:
        return not self.abs_gt(t)

    def __eq__(self, other):
        if isinstance(other, Surd):
            return self.sign() == other.sign() and self.square() == other.square()
        if isinstance(other, (int, Fraction)):
            o = Fraction(other)
            return self.sign() == (o > 0) - (o < 0) and self.square() == o * o
        return NotImplemented

    def __hash__(self):
        return hash((self.sign(), self.square()))

    def __repr__(self):
        return f"{self.rat}*sqrt({self.rad})" if self.rad != 1 else f"{self.rat}"


# ---------------------------------------------------------------- exact coordinates

@dataclass(frozen=True)
class InvCoord:
    bend: Fraction
    cobend: Fraction
    xi: QuatElem
    normalized: bool = True
    scale_sq: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "bend", Fraction(self.bend))
        object.__setattr__(self, "cobend", Fraction(self.cobend))
        object.__setattr__(self, "scale_sq", Fraction(self.scale_sq))

    @property
    def sig(self):
        return self.xi.sig

    def rational_q(self) -> Fraction:
        return -self.bend * self.cobend + self.xi.norm()

    def negate(self) -> "InvCoord":
        return InvCoord(-self.bend, -self.cobend, -self.xi, self.normalized, self.scale_sq)

    def float_geometry(self):
        """(center as a 4-vector or None for planes, radius or inf)."""
        s = math.sqrt(self.scale_sq)
        k = float(self.bend) * s
        if self.bend == 0:
            return None, math.inf
        c = [float(v) / float(self.bend) for v in self.xi.c]
        q = float(self.rational_q()) * float(self.scale_sq)
        return c, math.sqrt(q) / abs(k)

    def to_json(self, frame_norm: int | None = None) -> dict:
        d = {"bend": str(self.bend), "cobend": str(self.cobend),
             "xi": [str(v) for v in self.xi.c], "normalized": self.normalized}
        if self.scale_sq != 1:
            d["scale_sq"] = str(self.scale_sq)
        c, r = self.float_geometry()
        if c is not None:
            d["float"] = {"center": c[: self.sig.dim - 1], "radius": r}
        return d


def q_form(c: InvCoord) -> Surd:
    """-bend*cobend + nrm(xi), including the scale factor."""
    return Surd(c.rational_q() * c.scale_sq)


def b_form(c1: InvCoord, c2: InvCoord) -> Surd:
    if c1.normalized != c2.normalized:
        raise StructureError("mixed normalization in b_form")
    if c1.sig != c2.sig:
        raise StructureError("signature mismatch")
    r = (-c1.bend * c2.cobend - c2.bend * c1.cobend + (c1.xi * c2.xi.conj()).trace()) / 2
    return Surd(r, c1.scale_sq * c2.scale_sq)


# ---------------------------------------------------------------- 2x2 matrices

class Mat2:
    __slots__ = ("a", "b", "c", "d", "sig")

    def __init__(self, a, b, c, d, sig=None):
        sig = sig or next(x.sig for x in (a, b, c, d) if isinstance(x, QuatElem))
        self.sig = sig

        def e(x):
            return x if isinstance(x, QuatElem) else QuatElem.scalar(sig, x)

        self.a, self.b, self.c, self.d = e(a), e(b), e(c), e(d)

    @classmethod
    def identity(cls, sig):
        return cls(1, 0, 0, 1, sig)

    def __mul__(self, o: "Mat2") -> "Mat2":
        if not isinstance(o, Mat2):
            return Mat2(self.a * o, self.b * o, self.c * o, self.d * o, self.sig)
        return Mat2(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                    self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d, self.sig)

    def __neg__(self):
        return Mat2(-self.a, -self.b, -self.c, -self.d, self.sig)

    def __eq__(self, o):
        return isinstance(o, Mat2) and (self.a, self.b, self.c, self.d) == (o.a, o.b, o.c, o.d)

    def __hash__(self):
        return hash((self.a, self.b, self.c, self.d))

    def __repr__(self):
        return f"Mat2([[{format_elem(self.a)}, {format_elem(self.b)}], [{format_elem(self.c)}, {format_elem(self.d)}]])"

    def conj_transpose(self) -> "Mat2":
        return Mat2(self.a.conj(), self.c.conj(), self.b.conj(), self.d.conj(), self.sig)

    def sigma_hat(self) -> "Mat2":
        """[[s(d), -s(b)], [-s(c), s(a)]] with s the ring's involution."""
        if self.sig.dim == 3:
            s = (lambda x: x)
        elif self.sig.dim == 4:
            s = QuatElem.dagger
        else:
            s = QuatElem.conj
        return Mat2(s(self.d), -s(self.b), -s(self.c), s(self.a), self.sig)

    def real_matrix(self):
        """Left multiplication on the algebra squared, as a rational matrix."""
        n = self.sig.rank
        sig = self.sig
        cols = []
        for blk in range(2):
            for k in range(n):
                e = [0] * 4
                e[k] = 1
                v = QuatElem(sig, e)
                top = (self.a * v) if blk == 0 else (self.b * v)
                bot = (self.c * v) if blk == 0 else (self.d * v)
                cols.append(list(top.c[:n]) + list(bot.c[:n]))
        return [[cols[c][r] for c in range(2 * n)] for r in range(2 * n)]

    def in_group(self) -> bool:
        """Membership in G(Q): SL(2) for dim 3, SL^dagger for dim 4, SL(2,H) for dim 5."""
        one = Mat2.identity(self.sig)
        if self.sig.dim == 3:
            return self.a * self.d - self.b * self.c == 1
        if self.sig.dim == 4:
            return self.sigma_hat() * self == one and self * self.sigma_hat() == one
        from .lattice import det
        return det(self.real_matrix()) == 1

    def is_invertible(self) -> bool:
        from .lattice import det
        return det(self.real_matrix()) != 0


def W(alpha: QuatElem) -> Mat2:
    """Cohn matrix [[alpha, 1], [-1, 0]]."""
    return Mat2(alpha, 1, -1, 0, alpha.sig)


def upper(alpha: QuatElem) -> Mat2:
    return Mat2(1, alpha, 0, 1, alpha.sig)


def lower(alpha: QuatElem) -> Mat2:
    return Mat2(1, 0, alpha, 1, alpha.sig)


def act(M: Mat2, c: InvCoord) -> InvCoord:
    """Image of an oriented sphere: M [[cobend, xi], [conj xi, bend]] conj(M)^T."""
    if not M.is_invertible():
        raise StructureError("matrix is not invertible")
    sig = c.sig
    X = Mat2(QuatElem.scalar(sig, c.cobend), c.xi, c.xi.conj(), QuatElem.scalar(sig, c.bend), sig)
    Y = M * X * M.conj_transpose()
    return InvCoord(Y.d.c[0], Y.a.c[0], Y.b, c.normalized, c.scale_sq)


def base_plane(u: QuatElem) -> InvCoord:
    return InvCoord(0, 0, u, True)


@dataclass
class GroupWord:
    """Word in Cohn matrices; letters[0] is applied first."""
    letters: tuple

    def matrix(self, sig) -> Mat2:
        M = Mat2.identity(sig)
        for a in self.letters:
            M = W(a) * M
        return M


def inv_u_closed_form(M: Mat2, u: QuatElem) -> InvCoord:
    if u.conj() != -u:
        raise StructureError("u must have trace zero")
    a, b, c, d = M.a, M.b, M.c, M.d
    k = c * u * d.conj() - d * u * c.conj()
    kp = a * u * b.conj() - b * u * a.conj()
    xi = a * u * d.conj() - b * u * c.conj()
    return InvCoord(k.c[0], kp.c[0], xi, True)


def inv_u_of_word(w: GroupWord, cover) -> InvCoord:
    return inv_u_closed_form(w.matrix(cover.sig), cover.u)


# ---------------------------------------------------------------- integer frame

class Frame:
    """Integer model of normalized inversive coordinates for one covering vector.

    A sphere is a tuple (bend, cobend, x_1..x_r) with xi = sum x_k e_k over the
    basis e = (S_u basis, tau) of R(Z)+.
    """

    def __init__(self, cover):
        self.cover = cover
        self.sig = cover.sig
        self.basis = list(cover.plus_basis)
        self.r = len(self.basis)
        self.N = cover.nrm_u
        from .orders import _plus_coords
        self._coords = lambda x: _plus_coords(self.basis, x)
        T = [[(x * y.conj()).trace() for y in self.basis] for x in self.basis]
        if any(v.denominator != 1 for row in T for v in row):
            raise StructureError("trace form is not integral on R(Z)+")
        self.T = [[int(v) for v in row] for row in T]
        C = []
        for e in self.basis:
            cc = self._coords(e.conj())
            if any(v.denominator != 1 for v in cc):
                raise StructureError("R(Z)+ is not closed under conjugation")
            C.append([int(v) for v in cc])
        self.C = C  # rows: coordinates of conj(e_i)
        self.u_vec = tuple(int(v) for v in self._coords(cover.u))
        self.Tn = np.array(self.T, dtype=np.int64)
        self.Cn = np.array(self.C, dtype=np.int64)
        G = np.array(self.T, dtype=float) / 2
        self.embed = np.linalg.cholesky(G)  # rows: Euclidean images of the basis
        self.height2 = self.tr(self.u_vec, self.vec_of(cover.tau))  # tr(u conj tau)
        self.r_s = self.r - 1  # rank of the S_u lattice

    # exact helpers on coordinate vectors
    def vec_of(self, x: QuatElem):
        c = self._coords(x)
        if any(v.denominator != 1 for v in c):
            raise StructureError("element is not in R(Z)+")
        return tuple(int(v) for v in c)

    def elem_of(self, v) -> QuatElem:
        out = QuatElem.scalar(self.sig, 0)
        for x, e in zip(v, self.basis):
            if x:
                out = out + e * x
        return out

    def tr(self, x, y) -> int:
        T = self.T
        return sum(x[i] * T[i][j] * y[j] for i in range(self.r) if x[i] for j in range(self.r) if y[j])

    def nrm2(self, x) -> int:
        """Twice the norm (always an integer)."""
        return self.tr(x, x)

    def conj(self, x):
        C = self.C
        return tuple(sum(x[i] * C[i][k] for i in range(self.r) if x[i]) for k in range(self.r))

    def q(self, s) -> Fraction:
        return Fraction(-2 * s[0] * s[1] + self.nrm2(s[2:]), 2)

    def b(self, s, t) -> Fraction:
        return Fraction(-s[0] * t[1] - t[0] * s[1] + self.tr(s[2:], t[2:]), 2)

    # generators
    def translate(self, s, beta):
        k, kp, x = s[0], s[1], s[2:]
        nb2 = self.nrm2(beta)
        return (k, kp + self.tr(x, beta) + k * nb2 // 2) + tuple(xi + k * bi for xi, bi in zip(x, beta))

    def w0(self, s):
        cx = self.conj(s[2:])
        return (s[1], s[0]) + tuple(-v for v in cx)

    def W(self, s, alpha):
        """Cohn matrix W(alpha) = T_{-alpha} W(0)."""
        return self.translate(self.w0(s), tuple(-a for a in alpha))

    def reflect(self, s):
        """Euclidean reflection z -> -conj(z)."""
        cx = self.conj(s[2:])
        return (s[0], s[1]) + tuple(-v for v in cx)

    def iota(self, s):
        """Inversion in the unit sphere at the origin."""
        return (s[1], s[0]) + tuple(s[2:])

    def phi(self, s, z):
        """Inversion in the unit sphere centered at z."""
        return self.translate(self.iota(self.translate(s, tuple(-v for v in z))), z)

    def neg(self, s):
        return tuple(-v for v in s)

    # seeds
    def s_u(self):
        return (0, 0) + self.u_vec

    def to_inv(self, s) -> InvCoord:
        return InvCoord(s[0], s[1], self.elem_of(s[2:]), True)

    def from_inv(self, c: InvCoord):
        if c.scale_sq != 1 or c.bend.denominator != 1 or c.cobend.denominator != 1:
            raise StructureError("coordinates are not integral")
        return (int(c.bend), int(c.cobend)) + self.vec_of(c.xi)

    # float geometry
    def center_radius(self, s):
        k = s[0]
        if k == 0:
            return None, math.inf
        x = np.array(s[2:], dtype=float) @ self.embed / k
        return x, math.sqrt(self.N) / abs(k)

    def euclid(self, v):
        return np.asarray(v, dtype=float) @ self.embed
