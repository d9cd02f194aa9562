"""Z-orders, discriminants, covering vectors and the order catalogs."""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from sympy import factorint, legendre_symbol

from .algebra import AlgebraSig, QuatElem, StructureError, dot
from . import lattice as lat

log = logging.getLogger(__name__)

# 12*pi^2 rounded up; the dim-5 search only considers algebras below this
MINKOWSKI_BOUND = 119


class ConsistencyError(RuntimeError):
    """Raised when recomputed data contradicts a tabulated relation."""


# ---------------------------------------------------------------- number theory

def is_squarefree(n: int) -> bool:
    n = abs(int(n))
    return n != 0 and all(e == 1 for e in factorint(n).values())


def squarefree_part(n: int) -> int:
    out = 1
    for p, e in factorint(abs(int(n))).items():
        if e % 2:
            out *= p
    return out


def _int_rep(x: Fraction) -> int:
    """An integer in the same square class as the rational x."""
    x = Fraction(x)
    return x.numerator * x.denominator


def _val(n: int, p: int) -> tuple[int, int]:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


def hilbert_symbol(a, b, p: int) -> int:
    """Local Hilbert symbol (a, b)_p over Q for a prime p."""
    a, b = _int_rep(a), _int_rep(b)
    if a == 0 or b == 0:
        raise ValueError("Hilbert symbol needs nonzero entries")
    al, u = _val(a, p)
    be, v = _val(b, p)
    if p == 2:
        def eps(x):
            return ((x - 1) // 2) % 2

        def omg(x):
            return ((x * x - 1) // 8) % 2

        e = (eps(u) * eps(v) + al * omg(v) + be * omg(u)) % 2
        return -1 if e else 1
    s = (-1) ** (al * be * ((p - 1) // 2))
    if be % 2:
        s *= legendre_symbol(u % p, p)
    if al % 2:
        s *= legendre_symbol(v % p, p)
    return s


def algebra_discriminant(a, b) -> int:
    """Product of the finite primes at which (a, b / Q) ramifies."""
    primes = set(factorint(2 * abs(_int_rep(a)) * abs(_int_rep(b))))
    d = 1
    for p in sorted(primes):
        if hilbert_symbol(a, b, p) == -1:
            d *= p
    return d


def field_discriminant(m: int) -> int:
    """Discriminant of Q(sqrt(-m)) for square-free m > 0 (negative integer)."""
    return -m if m % 4 == 3 else -4 * m


# ---------------------------------------------------------------- orders

def _elem_rows(sig, rows):
    return tuple(r if isinstance(r, QuatElem) else QuatElem(sig, r) for r in rows)


def _integral(x: QuatElem) -> bool:
    return x.trace().denominator == 1 and x.norm().denominator == 1


def generate_order(sig: AlgebraSig, gens, max_rounds: int = 12):
    """Smallest multiplicatively closed lattice containing gens and 1, or None
    if some element along the way is not integral."""
    n = sig.rank
    rows = [list(g.c[:n]) for g in gens] + [[1] + [0] * (n - 1)]
    basis = lat.lattice_basis(rows)
    for _ in range(max_rounds):
        elems = [QuatElem(sig, r) for r in basis]
        if any(not _integral(e) for e in elems):
            return None
        prods = [list((x * y).c[:n]) for x in elems for y in elems]
        nb = lat.lattice_basis(basis + prods)
        if nb == basis:
            return elems if len(elems) == n else None
        basis = nb
    return None


class ArithOrder:
    """A Z-order given by a basis inside its algebra."""

    def __init__(self, sig: AlgebraSig, basis, label: str = "", check: bool = True):
        self.sig = sig
        self.basis = _elem_rows(sig, basis)
        self.label = label
        n = sig.rank
        if len(self.basis) != n:
            raise StructureError(f"expected {n} basis elements")
        M = [list(e.c[:n]) for e in self.basis]
        if lat.det(M) == 0:
            raise StructureError("basis is not linearly independent")
        self._M = M
        if check:
            self.check()

    # coordinates
    @cached_property
    def _inv(self):
        n = self.sig.rank
        cols = []
        for k in range(n):
            e = [1 if r == k else 0 for r in range(n)]
            # solve c * M = e, i.e. M^T c = e
            cols.append(lat.solve([[self._M[r][c] for r in range(n)] for c in range(n)], e))
        return cols  # cols[k] = coordinate vector of the k-th unit vector

    def coords(self, x: QuatElem) -> list[Fraction]:
        n = self.sig.rank
        out = [Fraction(0)] * n
        for k in range(n):
            if x.c[k]:
                ck = self._inv[k]
                for r in range(n):
                    out[r] += x.c[k] * ck[r]
        return out

    def elem(self, coords) -> QuatElem:
        n = self.sig.rank
        c = [Fraction(0)] * 4
        for x, e in zip(coords, self.basis):
            if x:
                for k in range(n):
                    c[k] += x * e.c[k]
        return QuatElem(self.sig, c)

    def contains(self, x: QuatElem) -> bool:
        return all(c.denominator == 1 for c in self.coords(x))

    def check(self):
        if not self.contains(QuatElem.scalar(self.sig, 1)):
            raise StructureError("order does not contain 1")
        for x in self.basis:
            for y in self.basis:
                if not self.contains(x * y):
                    raise StructureError("basis is not closed under multiplication")
        if self.sig.involution == "orthogonal" and not self.is_dagger_stable():
            raise StructureError("order is not stable under the orthogonal involution")
        return True

    def is_dagger_stable(self) -> bool:
        if self.sig.dim != 4:
            return True  # identity (dim 3) or conjugation (dim 5): every order is stable
        return all(self.contains(e.dagger()) for e in self.basis)

    @cached_property
    def structure(self):
        """Integer structure constants: e_i e_j = sum_k C[i][j][k] e_k."""
        C = []
        for x in self.basis:
            row = []
            for y in self.basis:
                c = self.coords(x * y)
                if any(v.denominator != 1 for v in c):
                    raise StructureError("not closed under multiplication")
                row.append([int(v) for v in c])
            C.append(row)
        return C

    @cached_property
    def trace_gram(self) -> list[list[int]]:
        return [[int((x * y.conj()).trace()) for y in self.basis] for x in self.basis]

    @cached_property
    def disc(self) -> int:
        return int(lat.det(self.trace_gram))

    @cached_property
    def discrd(self) -> int:
        d = abs(self.disc)
        if self.sig.dim == 3:
            return d
        r = math.isqrt(d)
        if r * r != d:
            raise StructureError("quaternion order discriminant is not a square")
        return r

    def discrd_squarefree(self) -> int:
        return squarefree_part(self.discrd)

    def key(self) -> tuple:
        n = self.sig.rank
        return (self.sig, tuple(tuple(r) for r in lat.lattice_basis([e.c[:n] for e in self.basis])))

    def __eq__(self, other):
        return isinstance(other, ArithOrder) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"ArithOrder({self.sig.a},{self.sig.b}; discrd={self.discrd})"

    # "+"-part: the whole order for dims 3 and 5, fixed points of the involution for dim 4
    @cached_property
    def plus_basis(self) -> tuple[QuatElem, ...]:
        if self.sig.dim != 4:
            return self.basis
        n = 4
        D = [[int(v) for v in self.coords(e.dagger())] for e in self.basis]
        # x = sum c_i e_i is fixed iff (D^T - I) c = 0
        A = [[D[i][k] - (1 if i == k else 0) for i in range(n)] for k in range(n)]
        ker = lat.integer_kernel(A, n)
        return tuple(self.elem(v) for v in ker)

    def theta(self, upto: int = 6) -> tuple[int, ...]:
        """Counts of elements of norm 1..upto (up to sign)."""
        G = [[Fraction(v, 2) for v in r] for r in self.trace_gram]
        counts = [0] * upto
        for _, q in lat.short_vectors(G, upto):
            counts[int(q) - 1] += 1
        return tuple(counts)

    def to_json(self) -> dict:
        return {"sig": self.sig.to_json(),
                "basis": [[str(v) for v in e.c] for e in self.basis],
                "discrd": self.discrd, "label": self.label}

    @classmethod
    def from_json(cls, d: dict) -> "ArithOrder":
        sig = AlgebraSig.from_json(d["sig"])
        return cls(sig, [[Fraction(v) for v in r] for r in d["basis"]], d.get("label", ""))


def reduced_discriminant(order: ArithOrder) -> int:
    order.check()
    return order.discrd


def dagger_discriminant(sig: AlgebraSig) -> int:
    """Positive generator of the ideal generated by disc(dagger) ∩ Z."""
    return squarefree_part(_int_rep(sig.a * sig.bb))


def is_maximal(order: ArithOrder) -> bool:
    """Maximality among orders (dims 3, 5) or among dagger-stable orders (dim 4)."""
    sig = order.sig
    if sig.dim == 3:
        m = squarefree_part(_int_rep(sig.a))
        return order.discrd == abs(field_discriminant(m)) and _field_gen_matches(sig, m)
    if sig.dim == 5:
        return order.discrd == algebra_discriminant(sig.a, sig.b)
    return not any(True for _ in _dagger_overorders(order, first_only=True))


def _field_gen_matches(sig, m):
    a = Fraction(sig.a)
    r = a / -m
    return r > 0 and math.isqrt(r.numerator) ** 2 == r.numerator and \
        math.isqrt(r.denominator) ** 2 == r.denominator


def _line_reps(p: int, n: int):
    for lead in range(n):
        for tail in itertools.product(range(p), repeat=n - lead - 1):
            yield (0,) * lead + (1,) + tail


def _integral_fractions(order: ArithOrder, p: int):
    """Elements v/p (v in order, v not in p*order) with integral trace and norm,
    one per line of (order/p order)."""
    T = order.trace_gram
    tr = [int(e.trace()) for e in order.basis]
    n = order.sig.rank
    p2 = p * p
    for c in _line_reps(p, n):
        if sum(ci * ti for ci, ti in zip(c, tr)) % p:
            continue
        q2 = sum(c[i] * c[j] * T[i][j] for i in range(n) for j in range(n))
        if (q2 // 2) % p2:
            continue
        yield order.elem([Fraction(ci, p) for ci in c])


def _dagger_overorders(order: ArithOrder, first_only=False):
    seen = set()
    for p in factorint(order.discrd):
        for x in _integral_fractions(order, p):
            gens = list(order.basis) + [x, x.dagger()]
            b = generate_order(order.sig, gens)
            if b is None:
                continue
            o = ArithOrder(order.sig, b, check=False)
            if o.key() in seen:
                continue
            seen.add(o.key())
            yield o
            if first_only:
                return


def maximal_overorders(order: ArithOrder, target: int | None = None) -> list[ArithOrder]:
    """All maximal orders containing a dim-5 order (discrd equal to disc(H))."""
    sig = order.sig
    target = algebra_discriminant(sig.a, sig.b) if target is None else target
    found: dict = {}
    seen = set()
    stack = [order]
    while stack:
        o = stack.pop()
        k = o.key()
        if k in seen:
            continue
        seen.add(k)
        if o.discrd == target:
            found[k] = o
            continue
        for p in factorint(o.discrd // target):
            for x in _integral_fractions(o, p):
                b = generate_order(sig, list(o.basis) + [x])
                if b is None:
                    continue
                no = ArithOrder(sig, b, check=False)
                if no.key() not in seen:
                    stack.append(no)
    return [found[k] for k in sorted(found, key=repr)]


# ---------------------------------------------------------------- covering vectors

def _rational_row_to_int(row):
    d = lat.common_denominator([row])
    return [int(v * d) for v in row]


def _primitive_in(order_coords):
    d = lat.common_denominator([order_coords])
    ints = [int(v * d) for v in order_coords]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    return [v // g for v in ints]


@dataclass
class CoveringData:
    order: ArithOrder
    u: QuatElem
    su_basis: tuple
    tau: QuatElem
    nrm_u: int
    covering_radius_sq: Fraction = Fraction(0)
    relation: dict = field(default_factory=dict)

    @property
    def sig(self):
        return self.order.sig

    @property
    def plus_basis(self) -> tuple:
        """Basis of R(Z)+ made of the S_u basis followed by tau."""
        return tuple(self.su_basis) + (self.tau,)

    @property
    def dim(self):
        return self.order.sig.dim

    def to_json(self) -> dict:
        from .algebra import format_elem
        return {"u": format_elem(self.u), "nrm_u": self.nrm_u,
                "su_basis": [format_elem(e) for e in self.su_basis],
                "tau": format_elem(self.tau),
                "covering_radius_sq": str(self.covering_radius_sq),
                "relation": {k: str(v) for k, v in self.relation.items()}}


def _plus_lattice(order):
    return list(order.plus_basis)


def _plus_coords(basis, x: QuatElem):
    """Coordinates of x on a list of independent elements (exact solve)."""
    k = len(basis)
    rows = [list(e.c) for e in basis]
    cols = [c for c in range(4) if any(r[c] for r in rows)]
    # pick k independent columns
    chosen = []
    for c in cols:
        trial = chosen + [c]
        sub = [[rows[r][cc] for cc in trial] for r in range(k)]
        if lat._rank([list(col) for col in zip(*sub)]) == len(trial):
            chosen = trial
        if len(chosen) == k:
            break
    A = [[rows[r][c] for r in range(k)] for c in chosen]
    sol = lat.solve(A, [x.c[c] for c in chosen])
    if sol is None:
        raise StructureError("degenerate basis")
    back = [sum(sol[r] * rows[r][c] for r in range(k)) for c in range(4)]
    if tuple(back) != x.c:
        raise StructureError("element is not in the span")
    return sol


def sublattice_orthogonal(basis, u: QuatElem):
    """Z-basis of {x in span(basis) ∩ lattice : <x, u> = 0}."""
    f = [dot(e, u) for e in basis]
    row = _rational_row_to_int(f)
    ker = lat.integer_kernel([row], len(basis))
    return [sum((e * c for e, c in zip(basis, v) if c), QuatElem.scalar(u.sig, 0)) for v in ker]


def gram_of(elems):
    return [[dot(x, y) for y in elems] for x in elems]


def covering_radius_sq_of(elems) -> Fraction:
    if not elems:
        return Fraction(0)
    return lat.covering_radius_sq(gram_of(elems))


def is_covering_vector(order: ArithOrder, u: QuatElem) -> bool:
    if u.is_zero():
        raise ValueError("u must be nonzero")
    if u.trace() != 0:
        raise ValueError("u must have trace zero")
    L = _plus_lattice(order)
    _plus_coords(L, u)  # raises if u is outside the "+"-part
    S = sublattice_orthogonal(L, u)
    return covering_radius_sq_of(S) < 1


# allowed ratios between discrd and nrm(u) for a normalized covering vector, by dimension
NORM_RATIO_SETS = {3: {Fraction(1), Fraction(2)},
              # reciprocals occur for the split-prime rows of the dim-4 families
              4: {Fraction(v) for v in (1, 2, 3, 7, 11)} | {Fraction(1, v) for v in (2, 3, 11)},
              5: {Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3, 2), Fraction(3), Fraction(5)}}


def _choose_tau(L, S, u):
    """Element completing a basis of S to one of L, on the positive side of u,
    of minimal norm; ties broken lexicographically on coordinates."""
    f = _rational_row_to_int([dot(e, u) for e in L])
    g = 0
    for v in f:
        g = math.gcd(g, v)
    # extended gcd combination hitting g
    coeffs = [0] * len(f)
    cur = 0
    acc = []
    for idx, v in enumerate(f):
        if v == 0:
            continue
        if not acc:
            coeffs[idx] = 1
            cur = v
            acc.append(idx)
            continue
        gg, s, t = _egcd(cur, v)
        coeffs = [c * s for c in coeffs]
        coeffs[idx] = t
        cur = gg
    if cur < 0:
        coeffs = [-c for c in coeffs]
    t0 = sum((e * c for e, c in zip(L, coeffs) if c), QuatElem.scalar(u.sig, 0))
    if not S:
        return t0
    # minimise the norm over t0 + span(S)
    G = gram_of(S)
    rhs = [dot(t0, s) for s in S]
    x = lat.solve(G, [-r for r in rhs])
    center = [round(v) for v in x]
    base = t0 + sum((s * c for s, c in zip(S, center) if c), QuatElem.scalar(u.sig, 0))
    best = None
    rng = range(-2, 3)
    for off in itertools.product(rng, repeat=len(S)):
        cand = base + sum((s * c for s, c in zip(S, off) if c), QuatElem.scalar(u.sig, 0))
        k = (cand.norm(), cand.c)
        if best is None or k < best[0]:
            best = (k, cand)
    return best[1]


def _egcd(a, b):
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, x, y = _egcd(b, a % b)
    return g, y, x - (a // b) * y


def normalize_covering_vector(order: ArithOrder, u: QuatElem, check_relation=True) -> CoveringData:
    if u.trace() != 0 or u.is_zero():
        raise ValueError("u must be a nonzero trace-zero element")
    L = _plus_lattice(order)
    c = _primitive_in(_plus_coords(L, u))
    un = sum((e * v for e, v in zip(L, c) if v), QuatElem.scalar(order.sig, 0))
    S = sublattice_orthogonal(L, un)
    mu2 = covering_radius_sq_of(S)
    if not mu2 < 1:
        raise ValueError("u is not a covering vector")
    nrm = un.norm()
    if nrm.denominator != 1:
        raise StructureError("normalized u has non-integral norm")
    nrm = int(nrm)
    S = _reduce_basis(S)
    tau = _choose_tau(L, S, un)
    rel = norm_discrd_ratio(order, nrm)
    if check_relation:
        if order.sig.dim == 3:
            if not (rel["p_squarefree"] in NORM_RATIO_SETS[3] or rel["p_abs_disc"] in NORM_RATIO_SETS[3]):
                raise ConsistencyError(f"dim-3 covering relation fails: {rel}")
        elif rel["p"] not in NORM_RATIO_SETS[order.sig.dim]:
            raise ConsistencyError(f"covering relation fails: {rel}")
        if not is_squarefree(nrm):
            raise ConsistencyError(f"nrm(u) = {nrm} is not square-free")
    return CoveringData(order, un, tuple(S), tau, nrm, mu2, rel)


def norm_discrd_ratio(order: ArithOrder, nrm: int) -> dict:
    D = order.discrd
    if order.sig.dim == 3:
        return {"p_abs_disc": Fraction(D, nrm), "p_squarefree": Fraction(squarefree_part(D), nrm)}
    if order.sig.dim == 4:
        return {"p": Fraction(D, nrm)}
    return {"p": Fraction(nrm, D)}


def _reduce_basis(S):
    if len(S) <= 1:
        return list(S)
    U, _ = lat.lll(gram_of(S))
    out = [sum((s * c for s, c in zip(S, row) if c), QuatElem.scalar(S[0].sig, 0)) for row in U]
    return out


# ---------------------------------------------------------------- catalogs

@dataclass
class CatalogEntry:
    order: ArithOrder
    cover: CoveringData
    table_ref: str
    nrm_set: tuple = ()
    params: dict = field(default_factory=dict)

    def __iter__(self):
        yield self.order
        yield self.cover

    def to_json(self) -> dict:
        d = self.order.to_json()
        d.update(self.cover.to_json())
        d["covering_vector"] = d.pop("u")
        d["table_ref"] = self.table_ref
        d["nrm_set"] = list(self.nrm_set)
        d["params"] = {k: str(v) for k, v in self.params.items()}
        return d


def quadratic_order(m: int) -> ArithOrder:
    """Ring of integers of Q(sqrt(-m)), m > 0 square-free."""
    if not is_squarefree(m) or m <= 0:
        raise ValueError("m must be a positive square-free integer")
    sig = AlgebraSig.field(m)
    if m % 4 == 3:
        basis = [(1, 0), (Fraction(1, 2), Fraction(1, 2))]
    else:
        basis = [(1, 0), (0, 1)]
    return ArithOrder(sig, basis, label=f"Q(sqrt(-{m}))")


def quadratic_cover(m: int) -> CoveringData:
    O = quadratic_order(m)
    return normalize_covering_vector(O, QuatElem(O.sig, (0, 1)))


def dim3_catalog(disc_bound: int) -> list[CatalogEntry]:
    out = []
    for m in range(1, disc_bound + 1):
        if not is_squarefree(m):
            continue
        d = abs(field_discriminant(m))
        if d > disc_bound:
            continue
        cov = quadratic_cover(m)
        out.append(CatalogEntry(cov.order, cov, f"dim3:m={m}", (cov.nrm_u,), {"m": m, "disc": d}))
    return out


def _q(s):
    return Fraction(s)


# Table 1 families: (a, condition(n), basis, discrd(n)).  Bases use (1, i, j, ij) coordinates.
# Rows where the prime of a splits carry discrd |n|/p, not |n| (lattice index computed directly).
H = Fraction(1, 2)
Q4 = Fraction(1, 4)


def _c(*xs):
    return tuple(Fraction(x) for x in xs)


def _t1_rows():
    r = []
    r.append(("T1:(-1,n):n=-1mod4", -1, lambda n: n % 4 == 3,
              [_c(1, 0, 0, 0), _c(0, 1, 0, 0), _c(0, 0, 1, 0), _c(H, H, H, H)], lambda n: 2 * abs(n)))
    r.append(("T1:(-1,n):n=2mod4", -1, lambda n: n % 4 == 2,
              [_c(1, 0, 0, 0), _c(0, 1, 0, 0), _c(H, H, H, 0), _c(0, 0, H, H)], lambda n: abs(n)))
    r.append(("T1:(-1,n):n=1mod4:a", -1, lambda n: n % 4 == 1,
              [_c(1, 0, 0, 0), _c(0, 1, 0, 0), _c(H, 0, H, 0), _c(0, H, 0, H)], lambda n: abs(n)))
    r.append(("T1:(-1,n):n=1mod4:b", -1, lambda n: n % 4 == 1,
              [_c(1, 0, 0, 0), _c(0, 1, 0, 0), _c(0, H, H, 0), _c(H, 0, 0, H)], lambda n: abs(n)))
    r.append(("T1:(-2,n):n=-1mod4", -2, lambda n: n % 4 == 3,
              [_c(1, 0, 0, 0), _c(0, 1, 0, 0), _c(H, H, H, 0), _c(0, H, 0, H)], lambda n: 2 * abs(n)))
    r.append(("T1:(-2,n):n=1mod4", -2, lambda n: n % 4 == 1,
              [_c(1, 0, 0, 0), _c(0, 1, 0, 0), _c(H, 0, H, 0), _c(0, H, 0, H)], lambda n: 2 * abs(n)))
    r.append(("T1:(-2,n):n/2=-1mod8", -2, lambda n: n % 2 == 0 and (n // 2) % 8 == 7,
              [_c(1, 0, 0, 0), _c(0, 1, 0, 0), _c(0, H, H, 0), _c(H, 0, H, Q4)], lambda n: abs(n)))
    r.append(("T1:(-2,n):n/2=-3mod8", -2, lambda n: n % 2 == 0 and (n // 2) % 8 == 5,
              [_c(1, 0, 0, 0), _c(0, 1, 0, 0), _c(0, H, H, 0), _c(H, 0, 0, Q4)], lambda n: abs(n)))
    r.append(("T1:(-2,n):n/2=3mod8", -2, lambda n: n % 2 == 0 and (n // 2) % 8 == 3,
              [_c(1, 0, 0, 0), _c(0, 1, 0, 0), _c(H, Q4, Q4, 0), _c(0, Q4, -Q4, Q4)], lambda n: abs(n) // 2))
    r.append(("T1:(-2,n):n/2=1mod8", -2, lambda n: n % 2 == 0 and (n // 2) % 8 == 1,
              [_c(1, 0, 0, 0), _c(0, 1, 0, 0), _c(0, Q4, Q4, 0), _c(H, 0, 0, Q4)], lambda n: abs(n) // 2))
    r.append(("T1:(-3,n):3∤n", -3, lambda n: n % 3 != 0,
              [_c(1, 0, 0, 0), _c(H, H, 0, 0), _c(0, 0, 1, 0), _c(0, 0, H, H)], lambda n: 3 * abs(n)))
    r.append(("T1:(-3,n):n/3=-1mod3", -3, lambda n: n % 3 == 0 and (n // 3) % 3 == 2,
              [_c(1, 0, 0, 0), _c(H, H, 0, 0), _c(0, 0, 1, 0), _c(0, 0, H, Fraction(1, 6))], lambda n: abs(n)))
    r.append(("T1:(-3,n):n/3=1mod3", -3, lambda n: n % 3 == 0 and (n // 3) % 3 == 1,
              [_c(1, 0, 0, 0), _c(H, H, 0, 0), _c(0, Fraction(1, 3), Fraction(1, 3), 0),
               _c(0, 0, H, Fraction(1, 6))], lambda n: abs(n) // 3))
    r.append(("T1:(-7,n):7∤n", -7, lambda n: n % 7 != 0,
              [_c(1, 0, 0, 0), _c(H, H, 0, 0), _c(0, 0, 1, 0), _c(0, 0, H, H)], lambda n: 7 * abs(n)))
    r.append(("T1:(-7,n):7|n", -7, lambda n: n % 7 == 0,
              [_c(1, 0, 0, 0), _c(H, H, 0, 0), _c(0, 0, 1, 0), _c(0, 0, H, Fraction(1, 14))], lambda n: abs(n)))
    r.append(("T1:(-11,n):11∤n", -11, lambda n: n % 11 != 0,
              [_c(1, 0, 0, 0), _c(H, H, 0, 0), _c(0, 0, 1, 0), _c(0, 0, H, H)], lambda n: 11 * abs(n)))
    e22 = Fraction(1, 22)
    r.append(("T1:(-11,n):11|n:nonres", -11,
              lambda n: n % 11 == 0 and (n // 11) % 11 != 0 and legendre_symbol((n // 11) % 11, 11) == -1,
              [_c(1, 0, 0, 0), _c(H, H, 0, 0), _c(0, 0, 1, 0), _c(0, 0, H, e22)], lambda n: abs(n)))
    for k, res in ((3, -2), (4, 5), (2, 4), (5, 3), (1, 1)):
        r.append((f"T1:(-11,n):11|n:n/11={res}mod11", -11,
                  (lambda res: lambda n: n % 11 == 0 and (n // 11 - res) % 11 == 0)(res),
                  [_c(1, 0, 0, 0), _c(H, H, 0, 0), _c(0, Fraction(k, 11), Fraction(1, 11), 0),
                   _c(0, 0, H, e22)], lambda n: abs(n) // 11))
    return r


TABLE1 = _t1_rows()


def table1_order(ref: str, n: int) -> ArithOrder:
    for name, a, cond, basis, _ in TABLE1:
        if name == ref:
            if not cond(n):
                raise ValueError(f"n={n} does not satisfy the condition of {ref}")
            sig = AlgebraSig.quaternion(a, n, dim=4)
            return ArithOrder(sig, basis, label=f"{ref}:n={n}")
    raise KeyError(ref)


def table1_rows_for(a: int):
    return [row for row in TABLE1 if row[1] == a]


def _table1_try(name, a, basis, drd, n):
    sig = AlgebraSig.quaternion(a, n, dim=4)
    try:
        O = ArithOrder(sig, basis, label=f"{name}:n={n}")
    except StructureError:
        return None
    if O.discrd != drd(n) or not is_maximal(O):
        return None
    j = QuatElem(sig, (0, 0, 1, 0))
    try:
        return O, normalize_covering_vector(O, j)
    except (ValueError, ConsistencyError):
        return None


def table1_instances(n_min: int = -400, disc_bound: int | None = None, per_row: int | None = None,
                     families=None):
    """Yield (row name, n, order, cover) for admissible negative n, most negative last."""
    for name, a, cond, basis, drd in TABLE1:
        if families and name not in families and f"({a},n)" not in families:
            continue
        count = 0
        for n in range(-1, n_min - 1, -1):
            if not cond(n) or not is_squarefree(n):
                continue
            if disc_bound is not None and drd(n) > disc_bound:
                continue
            hit = _table1_try(name, a, basis, drd, n)
            if hit is None:
                continue
            yield name, n, hit[0], hit[1]
            count += 1
            if per_row is not None and count >= per_row:
                break


def table1_at(a: int, n: int) -> list:
    """All tabulated covering orders of ((a, n)) as (row name, order, cover)."""
    out = []
    if not is_squarefree(n):
        return out
    for name, a2, cond, basis, drd in TABLE1:
        if a2 == a and cond(n):
            hit = _table1_try(name, a, basis, drd, n)
            if hit is not None:
                out.append((name, hit[0], hit[1]))
    return out


def table1_cover(a: int, n: int) -> tuple[str, ArithOrder, CoveringData]:
    """The tabulated order of ((a, n)) with its covering vector j."""
    for name, O, cov in table1_at(a, n):
        return name, O, cov
    raise KeyError(f"no tabulated covering order for ({a},{n})")


def dim4_catalog(disc_bound: int, families=None) -> list[CatalogEntry]:
    out = []
    for name, n, O, cov in table1_instances(n_min=-disc_bound, disc_bound=disc_bound, families=families):
        out.append(CatalogEntry(O, cov, name, (cov.nrm_u,), {"n": n}))
    return out


# Table 2 golden rows
TABLE2 = [
    ("T2:(-1,-1)", -1, -1, [_c(1, 0, 0, 0), _c(0, 1, 0, 0), _c(0, 0, 1, 0), _c(H, H, H, H)], 2, (1, 2, 3, 6, 10)),
    ("T2:(-1,-3)", -1, -3, [_c(1, 0, 0, 0), _c(0, 1, 0, 0), _c(0, H, H, 0), _c(H, 0, 0, H)], 3, (3, 6)),
    ("T2:(-2,-10)", -2, -10, [_c(1, 0, 0, 0), _c(0, 1, 0, 0), _c(H, Q4, Q4, 0), _c(H, H, 0, Q4)], 5, (5, 10)),
    ("T2:(-1,-7)", -1, -7, [_c(1, 0, 0, 0), _c(0, 1, 0, 0), _c(0, H, H, 0), _c(H, 0, 0, H)], 7, (7,)),
    ("T2:(-2,-26)", -2, -26, [_c(1, 0, 0, 0), _c(0, 1, 0, 0), _c(H, Q4, Q4, 0), _c(H, H, 0, Q4)], 13, (13,)),
]


def table2_order(ref: str) -> ArithOrder:
    for name, a, b, basis, _, _ in TABLE2:
        if name == ref or name == f"T2:{ref}" or name.endswith(ref):
            return ArithOrder(AlgebraSig.quaternion(a, b, dim=5), basis, label=name)
    raise KeyError(ref)


def table2_cover(ref: str) -> CoveringData:
    O = table2_order(ref)
    a, b = O.sig.a, O.sig.b
    g = math.gcd(int(a), int(b))
    u = QuatElem(O.sig, (0, 0, 0, Fraction(1, g)))
    return normalize_covering_vector(O, u)


# ---------------------------------------------------------------- dim-5 search

@dataclass
class Dim5SearchLog:
    bound: float = 12 * math.pi ** 2
    gate: int = MINKOWSKI_BOUND
    tuples_total: int = 0
    pruned_by_gate: int = 0
    algebras: set = field(default_factory=set)
    maximal_orders_examined: int = 0
    covering_pairs: int = 0


def _pure(x: QuatElem) -> QuatElem:
    return QuatElem(x.sig, (0,) + x.c[1:])


def _dim5_tuples(max_norm: int):
    for tx, ty in itertools.product((0, 1), repeat=2):
        for nx in range(1, max_norm + 1):
            for ny in range(nx, max_norm + 1):
                A4 = 4 * nx - tx * tx      # 4 * |pure x|^2
                B4 = 4 * ny - ty * ty
                if A4 <= 0 or B4 <= 0:
                    continue
                smax = math.isqrt(4 * nx * ny) + 2
                for s in range(-smax, smax + 1):
                    C4 = 2 * s - tx * ty   # 4 * <pure x, pure y>
                    if A4 * B4 - C4 * C4 <= 0:
                        continue
                    yield tx, ty, nx, ny, s


def _tuple_algebra(tx, ty, nx, ny, s):
    """An algebra (a, b) together with x, y realising the given traces, norms and tr(x conj y)."""
    A = Fraction(4 * nx - tx * tx, 4)
    B = Fraction(4 * ny - ty * ty, 4)
    C = Fraction(2 * s - tx * ty, 4)
    a = -4 * A
    det = A * B - C * C
    b = -64 * A * det
    sig = AlgebraSig.quaternion(a, b, dim=5)
    # i = 2x', j = 8A y' - 8C x'  =>  x' = i/2, y' = (j + 4C i) / (8A)
    i = QuatElem.basis(sig, 1)
    j = QuatElem.basis(sig, 2)
    xp = i / 2
    yp = (j + i * (4 * C)) / (8 * A)
    x = xp + Fraction(tx, 2)
    y = yp + Fraction(ty, 2)
    return sig, x, y


def dim5_search(max_norm: int = 4, gate: int = MINKOWSKI_BOUND, log_data: Dim5SearchLog | None = None):
    """All (maximal order, normalized covering vector) pairs up to isomorphism of the order.

    Returns a dict discrd -> {"orders": [ArithOrder], "nrms": set, "theta": set}.
    """
    lg = log_data if log_data is not None else Dim5SearchLog(gate=gate)
    classes: dict = {}
    seen_orders: dict = {}
    for tup in _dim5_tuples(max_norm):
        lg.tuples_total += 1
        sig, x, y = _tuple_algebra(*tup)
        dH = algebra_discriminant(sig.a, sig.b)
        if dH >= gate:
            lg.pruned_by_gate += 1
            continue
        lg.algebras.add((sig.a, sig.b, dH))
        b = generate_order(sig, [x, y, x * y])
        if b is None:
            continue
        sub = ArithOrder(sig, b, check=False)
        u0 = _pure(_pure(x) * _pure(y))
        for O in maximal_overorders(sub, dH):
            key = O.key()
            lg.maximal_orders_examined += 1
            coords = _primitive_in(O.coords(u0))
            u = O.elem(coords)
            S = sublattice_orthogonal(list(O.basis), u)
            if not covering_radius_sq_of(S) < 1:
                continue
            lg.covering_pairs += 1
            if key not in seen_orders:
                seen_orders[key] = (O.discrd, O.theta())
            fp = seen_orders[key]
            c = classes.setdefault(fp, {"orders": [], "nrms": set(), "discrd": O.discrd})
            if len(c["orders"]) < 1:
                c["orders"].append(O)
            c["nrms"].add(int(u.norm()))
    log.info("dim-5 search: Minkowski bound 12*pi^2 = %.4f < %d; %d candidate tuples, %d pruned by the gate",
             lg.bound, lg.gate, lg.tuples_total, lg.pruned_by_gate)
    return classes, lg


def dim5_catalog(gate: int = MINKOWSKI_BOUND, log_data: Dim5SearchLog | None = None):
    """Classify dim-5 covering orders and map each class onto a golden Table 2 row."""
    classes, lg = dim5_search(gate=gate, log_data=log_data)
    golden = {}
    for name, a, b, basis, drd, nrms in TABLE2:
        O = ArithOrder(AlgebraSig.quaternion(a, b, dim=5), basis, label=name)
        golden[(O.discrd, O.theta())] = (name, O, nrms)
    out = []
    unmatched = []
    for fp in sorted(classes, key=lambda f: (f[0], f[1])):
        c = classes[fp]
        if fp not in golden:
            unmatched.append((fp, sorted(c["nrms"])))
            continue
        name, O, _ = golden[fp]
        cov = table2_cover(name)
        out.append(CatalogEntry(O, cov, name, tuple(sorted(c["nrms"])), {"fingerprint": fp}))
    return out, unmatched, lg


def enumerate_covering_orders(dim: int, disc_bound: int = 0):
    if dim == 3:
        return dim3_catalog(disc_bound or 50)
    if dim == 4:
        return dim4_catalog(disc_bound or 60)
    if dim == 5:
        out, unmatched, _ = dim5_catalog(gate=disc_bound or MINKOWSKI_BOUND)
        if unmatched:
            raise ConsistencyError(f"dim-5 classes without a tabulated match: {unmatched}")
        return out
    raise ValueError("dim must be 3, 4 or 5")
