"""Forbidden balls: oriented spheres whose interior meets no sphere of the super-packing.

A ball is stored as an integer vector g = (bend, cobend, xi coords) in the
frame of its cover together with a rational ``scale_sq``; its normalized
inversive coordinates are sqrt(scale_sq) * g.  All b-values against packing
spheres are then sqrt(scale_sq) times a rational, and every comparison with
nrm(u) is done on squares.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .algebra import QuatElem
from .inversive import Frame, InvCoord
from .lattice import voronoi_vertices
from .orders import (CoveringData, StructureError, field_discriminant, is_squarefree, squarefree_part,
                     quadratic_cover, table1_at, table2_cover, _plus_coords)
from .packing import BallSearch, PackingCensus
from . import kernels


class DomainError(ValueError):
    pass


class NotCovered(LookupError):
    """No tabulated forbidden ball applies to this cover."""


# ---------------------------------------------------------------- the ball type

@dataclass
class ForbiddenBall:
    cover: CoveringData
    g: tuple                     # integer (bend, cobend, x_1..x_r) in frame coordinates
    scale_sq: Fraction
    table_ref: str
    params: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def frame(self) -> Frame:
        f = self.__dict__.get("_frame")
        if f is None:
            f = Frame(self.cover)
            self.__dict__["_frame"] = f
        return f

    @property
    def N(self) -> int:
        return self.cover.nrm_u

    def q(self) -> Fraction:
        return self.scale_sq * self.frame.q(self.g)

    @property
    def inv(self) -> InvCoord:
        f = self.frame
        return InvCoord(Fraction(self.g[0]), Fraction(self.g[1]), f.elem_of(self.g[2:]), True,
                        scale_sq=self.scale_sq)

    def center_radius(self):
        c, _ = self.frame.center_radius(self.g)
        k = self.g[0] * math.sqrt(self.scale_sq)
        return c, math.sqrt(self.N) / abs(k)

    def radius_sq(self) -> Fraction:
        return Fraction(self.N) / (self.scale_sq * self.g[0] ** 2)

    def b_rational(self, s) -> Fraction:
        """b(ball, s) / sqrt(scale_sq)."""
        return self.frame.b(self.g, s)

    def misses(self, s) -> bool:
        """|b(ball, s)| > nrm(u), decided exactly."""
        b = self.b_rational(s)
        return self.scale_sq * b * b > self.N ** 2

    def to_json(self) -> dict:
        c, r = self.center_radius()
        return {"table_ref": self.table_ref, "params": self.params,
                "scale_sq": str(self.scale_sq), "g": [str(v) for v in self.g],
                "inv": self.inv.to_json(), "q": str(self.q()),
                "float": {"center": [float(v) for v in c], "radius": r}, "notes": self.notes}


def _integral(vec) -> tuple[tuple, int]:
    den = 1
    for v in vec:
        den = den * Fraction(v).denominator // math.gcd(den, Fraction(v).denominator)
    w = [int(Fraction(v) * den) for v in vec]
    g = 0
    for v in w:
        g = math.gcd(g, v)
    g = g or 1
    return tuple(v // g for v in w), Fraction(den, g)


def ball_from_rational(cover, bend, cobend, xi: QuatElem, scale_sq, table_ref, params=None,
                       notes=None) -> ForbiddenBall:
    """Build a ball from tabulated data sqrt(scale_sq) * (bend, cobend, xi)."""
    basis = list(cover.plus_basis)
    coords = _plus_coords(basis, xi)
    g, m = _integral([bend, cobend] + list(coords))
    return ForbiddenBall(cover, g, Fraction(scale_sq) / (m * m), table_ref, dict(params or {}),
                         list(notes or []))


# ---------------------------------------------------------------- dim 3 ghost circles

def ghost_circle_geometry(d: int):
    """Closed-form ghost circle for |disc| = d.

    Returns (real part of centre, coefficient of sqrt(d) in the imaginary part,
    squared radius), all exact rationals.
    """
    if d <= 11:
        raise DomainError("ghost circles need |disc| > 11")
    if d % 4 == 0:
        return Fraction(1, 2), Fraction(1, 4), Fraction(d - 12, 16)
    if d % 4 == 2:
        raise DomainError("no ghost-circle formula for d = 2 mod 4")
    # centre 1/2 + (d-1)/(4 sqrt(-d)) = 1/2 - (d-1)/(4d) * sqrt(-d)
    return Fraction(1, 2), Fraction(-(d - 1), 4 * d), Fraction(d * d - 14 * d + 1, 16 * d)


def discriminant_to_field(d: int) -> int:
    """Square-free m with |disc Q(sqrt(-m))| = d; raises if d is not a discriminant."""
    if d % 4 == 0:
        m = d // 4
        if m % 4 in (1, 2) and is_squarefree(m):
            return m
    elif d % 4 == 3 and is_squarefree(d):
        return d
    raise DomainError(f"{d} is not the absolute discriminant of an imaginary quadratic field")


def ghost_circle(disc: int) -> ForbiddenBall:
    d = abs(disc)
    m = discriminant_to_field(d)
    re, im, r2 = ghost_circle_geometry(d)
    cover = quadratic_cover(m)
    sig = cover.sig
    # sqrt(-d) = 2 sqrt(-m) when d = 4m, and sqrt(-m) itself otherwise
    im_i = im * (2 if d % 4 == 0 else 1)
    c = QuatElem(sig, (re, im_i))
    N = cover.nrm_u
    cob = c.norm() - r2
    ref = "Dim3GhostMod0" if d % 4 == 0 else "Dim3GhostMod1"
    return ball_from_rational(cover, 1, cob, c, Fraction(N) / r2, ref, {"disc": d})


# ---------------------------------------------------------------- Voronoi-hole construction

def hole_balls(cover, min_depth: Fraction = Fraction(1)) -> list[ForbiddenBall]:
    """Spheres orthogonal to the unit spheres at the vertices of each deep hole of R(Z)+.

    A Voronoi vertex c at squared distance R2 > 1 from its nearest lattice
    points gives the sphere centred at c with radius^2 = R2 - 1.  One
    representative per lattice class (and per sign) is returned, deepest first.
    """
    f = Frame(cover)
    G = [[Fraction(v, 2) for v in row] for row in f.T]
    out = []
    seen = set()
    for x, R2 in voronoi_vertices(G):
        if R2 <= min_depth:
            continue
        key = tuple(v % 1 for v in x)
        nkey = tuple((-v) % 1 for v in x)
        if key in seen or nkey in seen:
            continue
        seen.add(key)
        r2 = R2 - 1
        cob = R2 - r2  # nrm(c) - r^2 with nrm(c) = R2
        g, m = _integral([1, cob] + list(x))
        out.append(ForbiddenBall(cover, g, Fraction(cover.nrm_u) / r2 / (m * m), "VoronoiHole",
                                 {"hole_depth_sq": str(R2)}))
    return out


# ---------------------------------------------------------------- tabulated rows (dim 4 and 5)

F = Fraction
H = F(1, 2)


def _e(*c):
    return tuple(F(v) for v in c) + (F(0),) * (4 - len(c))


@dataclass(frozen=True)
class TableRow:
    ref: str
    a: int
    b_of: Callable[[int], int]
    n_ok: Callable[[int], bool]
    n_start: int
    plus_bases: tuple            # alternative R(Z)+ bases as coefficient tuples on 1, i, j, ij
    scale_of: Callable           # (D, n) -> Fraction
    vec_of: Callable             # n -> (bend, cobend, x1, xi, xj)
    note: str = ""


def _sqmod11(n):
    return n % 11 != 0 and pow(n % 11, 5, 11) == 1


TABLE4 = [
    TableRow("Table4Row(1)", -1, lambda n: -1 - 4 * n, lambda n: True, 1,
             ((_e(1), _e(0, 1), _e(0, 0, 1)),),
             lambda D, n: F(D, D - 4), lambda n: (2, 2, 1, 1, 1)),
    TableRow("Table4Row(2)", -1, lambda n: -2 * n, lambda n: True, 1,
             ((_e(1), _e(0, 1), _e(H, H, H)),),
             lambda D, n: F(D * D, D * D - 12 * D + 4), lambda n: (4, 4, 2, 2, F(n - 1, n))),
    TableRow("Table4Row(3)", -1, lambda n: 1 - 4 * n, lambda n: True, 1,
             ((_e(1), _e(0, 1), _e(H, 0, H)), (_e(1), _e(0, 1), _e(0, H, H))),
             lambda D, n: F(D * D, D * D - 10 * D + 1), lambda n: (4, 4, 2, 2, F(n - 1, n))),
    TableRow("Table4Row(4)", -2, lambda n: -1 - 4 * n, lambda n: True, 1,
             ((_e(1), _e(0, 1), _e(H, H, H)),),
             lambda D, n: F(D * D, (D - 2) * (D - 18)), lambda n: (4, 4, 2, 2, F(4 * n - 2, 4 * n + 1))),
    TableRow("Table4Row(5)", -2, lambda n: 1 - 4 * n, lambda n: True, 1,
             ((_e(1), _e(0, 1), _e(H, 0, H)),),
             lambda D, n: F(D * D, D * D - 12 * D + 4), lambda n: (4, 4, 2, 2, F(4 * n - 2, 4 * n - 1))),
    TableRow("Table4Row(6)", -2, lambda n: -2 * (-3 + 8 * n), lambda n: True, 1,
             ((_e(1), _e(0, 1), _e(H, F(1, 4), F(1, 4))),),
             lambda D, n: F(D * D, D * D - 18 * D + 25), lambda n: (8, 8, 4, 4, F(8 * n - 13, 8 * n - 3))),
    TableRow("Table4Row(7)", -2, lambda n: -2 * (-1 + 8 * n), lambda n: True, 1,
             ((_e(1), _e(0, 1), _e(0, F(1, 4), F(1, 4))),),
             lambda D, n: F(D * D, D * D - 14 * D + 9), lambda n: (8, 8, 4, 4, F(8 * n - 7, 8 * n - 1))),
    TableRow("Table4Row(8)", -3, lambda n: -n, lambda n: n % 3 != 0, 1,
             ((_e(1), _e(H, H), _e(0, 0, 1)),),
             lambda D, n: F(D, D - 8), lambda n: (2, 2, 1, F(1, 3), 1)),
    TableRow("Table4Row(9)", -3, lambda n: -3 * (-1 + 3 * n), lambda n: True, 1,
             ((_e(1), _e(H, H), _e(0, F(1, 3), F(1, 3))),),
             lambda D, n: F(D, D - 8), lambda n: (6, 6, 3, 1, 1)),
    TableRow("Table4Row(10)", -7, lambda n: -n, lambda n: n % 7 != 0, 1,
             ((_e(1), _e(H, H), _e(0, 0, 1)),),
             lambda D, n: F(D, D - 12), lambda n: (2, 2, 1, F(3, 7), 1)),
    TableRow("Table4Row(11)", -11, lambda n: -11 * n, lambda n: n % 11 != 0, 1,
             ((_e(1), _e(H, H), _e(0, 0, 1)),),
             lambda D, n: F(D, D - 8), lambda n: (2, 2, 1, F(5, 11), 1)),
]

TABLE5 = [
    TableRow("Table5Row(1)", -2, lambda n: -2 * (1 + 8 * n), lambda n: True, 0,
             ((_e(1), _e(0, 1), _e(0, H, H)),),
             lambda D, n: F(D, D * D - 8 * D + 4), lambda n: (4, 4, 2, 2, F(8 * n, 1 + 8 * n))),
    TableRow("Table5Row(2)", -2, lambda n: -2 * (3 + 8 * n), lambda n: True, 0,
             ((_e(1), _e(0, 1), _e(0, H, H)),),
             lambda D, n: F(D, D * D - 8 * D + 4), lambda n: (4, 4, 2, 2, F(8 * n, 1 + 8 * n))),
    TableRow("Table5Row(3)", -3, lambda n: -3 * (1 + 3 * n), lambda n: True, 0,
             ((_e(1), _e(H, H), _e(0, 0, 1)),),
             lambda D, n: F(3 * D, 3 * D - 8), lambda n: (2, 2, 1, F(1, 3), 1)),
    TableRow("Table5Row(4)", -7, lambda n: -7 * n, lambda n: n > 0, 0,
             ((_e(1), _e(H, H), _e(0, 0, 1)),),
             lambda D, n: F(D, D - 12), lambda n: (2, 2, 1, F(3, 7), 1)),
    TableRow("Table5Row(5)", -11, lambda n: -11 * n, _sqmod11, 0,
             ((_e(1), _e(H, H), _e(0, 0, 1)),),
             lambda D, n: F(11 * D, 11 * D - 8), lambda n: (2, 2, 1, F(5, 11), 1)),
    TableRow("Table5Row(6)", -11, lambda n: -11 * (2 + 11 * n), lambda n: True, 0,
             ((_e(1), _e(H, H), _e(0, F(3, 11), F(1, 11))),),
             lambda D, n: F(D, D - 24), lambda n: (22, 22, 11, 3, 1)),
    TableRow("Table5Row(7)", -11, lambda n: -11 * (-5 + 11 * n), lambda n: True, 1,
             ((_e(1), _e(H, H), _e(0, F(4, 11), F(1, 11))),),
             lambda D, n: F(D, D - 28), lambda n: (22, 22, 0, 4, 1)),
    TableRow("Table5Row(8)", -11, lambda n: -11 * (-4 + 11 * n), lambda n: True, 1,
             ((_e(1), _e(H, H), _e(0, F(2, 11), F(1, 11))),),
             lambda D, n: F(D, D - 40), lambda n: (22, 22, 0, 2, 1)),
    TableRow("Table5Row(9)", -11, lambda n: -11 * (-3 + 11 * n), lambda n: True, 1,
             ((_e(1), _e(H, H), _e(0, F(5, 11), F(1, 11))),),
             lambda D, n: F(D, D - 8), lambda n: (22, 22, 0, -6, 1)),
    TableRow("Table5Row(10)", -11, lambda n: -11 * (-1 + 11 * n), lambda n: True, 1,
             ((_e(1), _e(H, H), _e(0, F(1, 11), F(1, 11))),),
             lambda D, n: F(D, D - 32), lambda n: (22, 66, 0, -10, 1)),
]

# Corrected directions for rows whose tabulated j-component fails the
# orthogonality conditions.  The Table 4 ones are point reflections of the
# Voronoi-hole ball of the cover; all of them certify symbolically.
ERRATA = {
    "Table4Row(3)": lambda n: (4, 4, 2, 2, F(4 * n - 2, 4 * n - 1)),
    "Table4Row(6)": lambda n: (8, 8, 4, 4, F(8 * n - 8, 8 * n - 3)),
    "Table4Row(7)": lambda n: (8, 8, 4, 4, F(4 - 8 * n, 8 * n - 1)),
    "Table5Row(2)": lambda n: (4, 4, 2, 2, F(4 * n + 1, 8 * n + 3)),
}

TABLE6 = [
    ("Table6Row(1)", "T2:(-1,-7)", F(1), (7, 7), _e(F(7, 2), F(7, 2), F(3, 2), F(3, 2))),
    ("Table6Row(2)", "T2:(-2,-26)", F(1, 5), (13, 13), _e(F(13, 2), F(13, 2), 1, F(5, 4))),
]


def _same_lattice(basis_a, basis_b) -> bool:
    try:
        for x in basis_a:
            if any(v.denominator != 1 for v in _plus_coords(basis_b, x)):
                return False
        for x in basis_b:
            if any(v.denominator != 1 for v in _plus_coords(basis_a, x)):
                return False
    except (StructureError, ValueError, ZeroDivisionError):
        return False
    return True


def _row_cover(row: TableRow, n: int):
    """The covering order of Table 1 whose R(Z)+ matches the row, or None."""
    b = row.b_of(n)
    if b >= 0 or not row.n_ok(n):
        return None
    for name, O, cov in table1_at(row.a, b):
        plus = list(cov.plus_basis)
        for alt in row.plus_bases:
            want = [QuatElem(O.sig, c) for c in alt]
            if _same_lattice(plus, want):
                return name, O, cov
    return None


def _row_vec(row: TableRow, n: int, corrected: bool):
    return ERRATA[row.ref](n) if corrected and row.ref in ERRATA else row.vec_of(n)


def _row_direction_ok(row: TableRow, n: int, cov, corrected: bool = True) -> bool:
    """The direction is space-like, i.e. describes a real sphere."""
    k, kp, x1, xi, xj = (F(v) for v in _row_vec(row, n, corrected))
    x = QuatElem(cov.sig, (x1, xi, xj, 0))
    return -k * kp + x.norm() > 0


def row_admissible_n(row: TableRow, count: int = 3, n_max: int = 200,
                     corrected: bool = True) -> list[int]:
    """Smallest n with a tabulated covering order and a real sphere."""
    out = []
    for n in range(row.n_start, n_max + 1):
        hit = _row_cover(row, n)
        if hit is not None and _row_direction_ok(row, n, hit[2], corrected):
            out.append(n)
            if len(out) == count:
                break
    return out


def table_row_ball(row: TableRow, n: int, corrected: bool = True) -> ForbiddenBall:
    """Instantiate a Table 4/5 row at n.

    With ``corrected`` the direction comes from ERRATA when the row has one,
    and a scale that does not give q = nrm(u) is replaced by the one that does.
    Both changes are recorded in ``notes``.  Without it the raw tabulated entry
    is returned as is.
    """
    hit = _row_cover(row, n)
    if hit is None:
        raise NotCovered(f"{row.ref} has no covering order at n={n}")
    return _ball_on(row, n, *hit, corrected=corrected)


def table_row_balls(row: TableRow, n: int, corrected: bool = True) -> list[ForbiddenBall]:
    """One ball per covering order whose R(Z)+ matches any lattice listed for the row."""
    b = row.b_of(n)
    if b >= 0 or not row.n_ok(n):
        raise NotCovered(f"{row.ref} has no covering order at n={n}")
    out = []
    for name, O, cov in table1_at(row.a, b):
        plus = list(cov.plus_basis)
        if any(_same_lattice(plus, [QuatElem(O.sig, c) for c in alt]) for alt in row.plus_bases):
            out.append(_ball_on(row, n, name, O, cov, corrected=corrected))
    if not out:
        raise NotCovered(f"{row.ref} has no covering order at n={n}")
    return out


def _ball_on(row: TableRow, n: int, name, O, cov, corrected: bool = True) -> ForbiddenBall:
    if not _row_direction_ok(row, n, cov, corrected):
        raise DomainError(f"{row.ref} at n={n} does not describe a real sphere")
    D = int(O.discrd)
    fixed = corrected and row.ref in ERRATA
    vec = _row_vec(row, n, corrected)
    k, kp, x1, xi, xj = (F(v) for v in vec)
    xi_e = QuatElem(O.sig, (x1, xi, xj, 0))
    scale = row.scale_of(D, n)
    ball = ball_from_rational(cov, k, kp, xi_e, scale, row.ref, {"n": n, "D": D, "order": name})
    ball.params["tabulated_scale_sq"] = str(scale)
    if fixed:
        ball.notes.append("tabulated direction replaced by erratum")
    q = ball.q()
    ball.params["tabulated_q"] = str(q)
    if q != cov.nrm_u or scale <= 0:
        ball.notes.append(f"tabulated scale gives q = {q}, expected {cov.nrm_u}")
        q0 = ball.frame.q(ball.g)
        if corrected and q0 > 0:
            ball.scale_sq = F(cov.nrm_u) / q0
            ball.notes.append("rescaled to q = nrm(u)")
    return ball


def table6_ball(ref: str) -> ForbiddenBall:
    for r, t2, scale, (k, kp), xi in TABLE6:
        if r == ref:
            cov = table2_cover(t2)
            return ball_from_rational(cov, k, kp, QuatElem(cov.sig, xi), scale, r, {"order": t2})
    raise KeyError(ref)


def table_forbidden_ball(cover: CoveringData) -> ForbiddenBall:
    """Look up the tabulated ball for a cover (by algebra and R(Z)+ lattice)."""
    sig = cover.sig
    if sig.dim == 5:
        for r, t2, *_ in TABLE6:
            c2 = table2_cover(t2)
            if (c2.sig.a, c2.sig.b) == (sig.a, sig.b) and _same_lattice(list(c2.order.basis), list(cover.order.basis)):
                return table6_ball(r)
        raise NotCovered("no Table 6 row for this order")
    if sig.dim == 4:
        for row in TABLE4 + TABLE5:
            if row.a != sig.a:
                continue
            for n in range(0, 400):
                if row.b_of(n) == sig.b:
                    hit = _row_cover(row, n)
                    if hit and _same_lattice(list(hit[2].plus_basis), list(cover.plus_basis)):
                        return table_row_ball(row, n)
        raise NotCovered("no Table 4/5 row for this order (the order may be dagger-Euclidean)")
    raise NotCovered("use ghost_circle for dim 3")


# ---------------------------------------------------------------- certificates

def orbit_residues(frame: Frame, L: int, limit: int = 500_000) -> set:
    """Exact orbit of S_u modulo L under W(0) and the basis translations.

    The action of W(alpha) on integer sphere vectors is well defined modulo L,
    so this finite orbit is exactly the set of residues the packing realises.
    """
    def red(s):
        return tuple(v % L for v in s)

    start = red(frame.s_u())
    seen = {start}
    todo = deque([start])
    basis = [tuple(1 if i == k else 0 for i in range(frame.r)) for k in range(frame.r)]
    while todo:
        s = todo.popleft()
        nxt = [frame.w0(s)] + [frame.translate(s, e) for e in basis]
        for t in nxt:
            t = red(t)
            if t not in seen:
                seen.add(t)
                if len(seen) > limit:
                    raise OverflowError("orbit too large")
                todo.append(t)
    return seen


def _rat_gcd(vals) -> Fraction:
    vals = [Fraction(v) for v in vals if v != 0]
    if not vals:
        return Fraction(0)
    den = 1
    for v in vals:
        den = den * v.denominator // math.gcd(den, v.denominator)
    g = 0
    for v in vals:
        g = math.gcd(g, int(v * den))
    return Fraction(g, den)


def symbolic_certificate(ball: ForbiddenBall, multipliers=(1, 2, 4, 3)) -> dict:
    """Show that b(ball, s) avoids [-nrm(u), nrm(u)] for every sphere s of the packing.

    Uses the orbit residues modulo L = nrm(u) * t: for each residue x the
    values b(ball, x + L v) form sqrt(scale_sq) * (b(g, x) + L h Z) with h the
    gcd of b(g, e) over the integer basis.  The first multiplier t that
    certifies is reported.
    """
    f = ball.frame
    N = ball.N
    dimv = f.r + 2
    unit = [tuple(1 if i == k else 0 for i in range(dimv)) for k in range(dimv)]
    h = _rat_gcd(f.b(ball.g, e) for e in unit)
    attempts = []
    for t in multipliers:
        L = N * t
        try:
            res = orbit_residues(f, L)
        except OverflowError:
            attempts.append({"modulus": L, "status": "orbit too large"})
            continue
        step = L * h
        worst = None
        classes = set()
        for x in res:
            b0 = f.b(ball.g, x)
            r = b0 % step if step else b0
            m = min(r, step - r) if step else abs(b0)
            classes.add(r)
            if worst is None or m < worst:
                worst = m
        ok = ball.scale_sq * worst * worst > N * N
        attempts.append({"modulus": L, "residues": len(res), "step": str(step),
                         "classes": sorted(str(c) for c in classes), "min_abs": str(worst),
                         "min_abs_float": float(worst) * math.sqrt(ball.scale_sq), "pass": ok})
        if ok:
            return {"pass": True, "modulus": L, "scale_sq": str(ball.scale_sq),
                    "class": f"sqrt({ball.scale_sq}) * ({{{', '.join(sorted(str(c) for c in classes))}}} + {step} Z)",
                    "attempts": attempts}
    return {"pass": False, "modulus": None, "scale_sq": str(ball.scale_sq), "attempts": attempts}


def empirical_check(ball: ForbiddenBall, census: PackingCensus, margin: float = 1e-6) -> dict:
    """Exact |b| > nrm(u) test of the ball against every census sphere and its nearby translates."""
    f = census.frame
    if f.cover is not ball.cover and f.basis != ball.frame.basis:
        raise ValueError("census and ball use different covers")
    cg, rg = ball.center_radius()
    G = np.array(f.T, dtype=float) / 2
    ball_search = BallSearch(G)
    scanned = 0
    failures = []
    spheres = [census.spheres[k] for k in sorted(census.keys())]
    diam = float(sum(np.linalg.norm(f.embed[k]) for k in range(f.r)))
    for s in spheres:
        if s[0] != 0:
            c, r = f.center_radius(s)
            # translates with |c + beta - cg| <= r + rg
            coords_c = np.linalg.solve(f.embed.T, cg - c)
            betas = ball_search.points(coords_c, (r + rg + margin) ** 2)
        else:
            betas = ball_search.points(np.zeros(f.r), (rg + diam + margin) ** 2 + 4 * diam * diam)
        done = set()
        # the representative itself is always tested, near the ball or not
        for beta in [(0,) * f.r] + list(betas):
            t = f.translate(s, tuple(beta))
            if t in done:
                continue
            done.add(t)
            scanned += 1
            if not ball.misses(t):
                failures.append(t)
    return {"representatives": len(spheres), "scanned": scanned, "failures": failures,
            "pass": not failures}


def verify_forbidden(ball: ForbiddenBall, census: PackingCensus) -> dict:
    sym = symbolic_certificate(ball)
    emp = empirical_check(ball, census)
    if emp["failures"]:
        raise CertificateFailure(f"{len(emp['failures'])} census spheres meet {ball.table_ref}")
    return {"cover": ball.cover.to_json(), "table_ref": ball.table_ref, "inv": ball.inv.to_json(),
            "congruence_class": sym.get("class"), "symbolic_pass": sym["pass"],
            "symbolic": sym, "empirical_scanned": emp["scanned"],
            "empirical_representatives": emp["representatives"], "empirical_pass": emp["pass"],
            "density_upper_bound": density_upper_bound(ball)["upper_bound"], "notes": ball.notes}


class CertificateFailure(RuntimeError):
    pass


# ---------------------------------------------------------------- density bounds

def strip_leftover(d: int) -> float:
    """Area of the cell outside the horizontal band cut by the ghost circle (dim 3)."""
    if d % 4 == 0:
        # 2 (sqrt(d) - sqrt(d - 16)) / 4, written without cancellation
        return 8.0 / (math.sqrt(d) + math.sqrt(d - 16)) if d >= 16 else float("nan")
    s = d * d - 22 * d - 7
    if s < 0:
        return float("nan")
    # sqrt(d)/2 - sqrt(d s)/(2(d+1)) = sqrt(d) ((d+1)^2 - s) / (2 (d+1) ((d+1) + sqrt(s)))
    return math.sqrt(d) * ((d + 1) ** 2 - s) / (2 * (d + 1) * ((d + 1) + math.sqrt(s)))


def strip_constant(d: int) -> float:
    """sqrt(d) * strip_leftover(d); tends to 4 (d = 0 mod 4) or 6 (otherwise)."""
    return strip_leftover(d) * math.sqrt(d)


def cell_area_dim3(d: int) -> float:
    return math.sqrt(d) / 2


def density_upper_bound(ball: ForbiddenBall, samples: int = 400_000, seed: int = 0) -> dict:
    """1 - (volume of the cell covered by translates of the ball) / (cell volume).

    dim 3 uses a polygonal union (shapely) accurate to ~1e-7; dims 4 and 5 use
    Monte Carlo with the float kernel.  For ghost circles the strip bound is
    reported alongside.
    """
    f = ball.frame
    c, r = ball.center_radius()
    E = f.embed
    cellvol = abs(np.linalg.det(E))
    diam = float(np.linalg.norm(E.sum(0))) + float(sum(np.linalg.norm(E[k]) for k in range(f.r)))
    coords0 = np.linalg.solve(E.T, c)
    mid = np.full(f.r, 0.5)
    betas = BallSearch(np.array(f.T, dtype=float) / 2).points(mid - coords0, (r + diam) ** 2)
    centers = np.array([(coords0 + np.array(b, dtype=float)) @ E for b in betas])
    out = {"cell_volume": cellvol, "ball_radius": r}
    if f.r == 2:
        from shapely.geometry import Point, Polygon
        from shapely.ops import unary_union
        cell = Polygon([tuple(p) for p in (0 * E[0], E[0], E[0] + E[1], E[1])])
        discs = unary_union([Point(*p).buffer(r, quad_segs=2048) for p in centers])
        covered = cell.intersection(discs).area
        out["method"] = "polygon"
    else:
        rng = np.random.default_rng(seed)
        pts = rng.random((samples, f.r)) @ E
        hit = kernels.covered_mask(pts, centers, np.full(len(centers), r))
        covered = cellvol * float(hit.mean())
        out["method"] = "monte-carlo"
        out["stderr"] = cellvol * math.sqrt(hit.mean() * (1 - hit.mean()) / samples) / cellvol
    out["upper_bound"] = 1 - covered / cellvol
    if ball.table_ref.startswith("Dim3Ghost"):
        d = ball.params["disc"]
        out["strip_leftover"] = strip_leftover(d)
        out["strip_bound"] = strip_leftover(d) / cell_area_dim3(d)
        out["strip_constant"] = strip_constant(d)
    return out


def forbidden_ball(cover: CoveringData) -> ForbiddenBall:
    """Tabulated forbidden ball for a cover, else a Voronoi-hole ball.

    Raises NotCovered when the cover has neither (Euclidean and dagger-Euclidean
    orders, and the dim-5 orders with nrm(u) <= 3).
    """
    if cover.sig.dim == 3:
        m = squarefree_part(-int(Fraction(cover.sig.a)))
        d = abs(field_discriminant(m))
        try:
            return ghost_circle(d)
        except DomainError as e:
            raise NotCovered(f"no ghost circle for d={d}: {e}") from None
    try:
        return table_forbidden_ball(cover)
    except NotCovered:
        holes = hole_balls(cover)
        if holes:
            return holes[0]
        raise
