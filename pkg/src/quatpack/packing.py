"""Orbit enumeration for the restricted super-packing and the Apollonian-type packing.

Both censuses work on integer sphere vectors (see ``inversive.Frame``).  The
super-packing is stored modulo translations by all of R(Z)+ (it is invariant
under them); the Apollonian packing modulo translations by S_u ∩ R(Z)+.
"""
from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .inversive import Frame, GroupWord, inv_u_closed_form
from . import kernels


class DomainError(ValueError):
    pass


# ---------------------------------------------------------------- lattice point search

class BallSearch:
    """Integer points y with (y - c)^T G (y - c) <= R2 for a fixed float Gram G."""

    def __init__(self, G):
        G = np.asarray(G, dtype=float)
        n = G.shape[0]
        self.n = n
        d = np.zeros(n)
        m = np.zeros((n, n))
        A = G.copy()
        for i in range(n):
            d[i] = A[i, i]
            for j in range(i + 1, n):
                m[i, j] = A[i, j] / d[i]
            for j in range(i + 1, n):
                for k in range(i + 1, n):
                    A[j, k] -= d[i] * m[i, j] * m[i, k]
        self.d = d
        self.m = m

    def points(self, c, R2, slack=1e-9):
        n = self.n
        c = np.asarray(c, dtype=float)
        out = []
        y = [0] * n
        d, m = self.d, self.m
        R2 = R2 + slack * (1 + abs(R2))

        def rec(i, rem):
            if i < 0:
                out.append(tuple(y))
                return
            shift = -c[i] + sum(m[i, j] * (y[j] - c[j]) for j in range(i + 1, n))
            # (y_i + shift)^2 * d_i <= rem
            r = math.sqrt(max(rem, 0.0) / d[i])
            lo = math.ceil(-shift - r - 1e-12)
            hi = math.floor(-shift + r + 1e-12)
            for yi in range(lo, hi + 1):
                t = d[i] * (yi + shift) ** 2
                if t <= rem:
                    y[i] = yi
                    rec(i - 1, rem - t)
            y[i] = 0

        if R2 >= 0:
            rec(n - 1, R2)
        return out


# ---------------------------------------------------------------- census container

@dataclass
class PackingCensus:
    cover: object
    frame: Frame
    kind: str                      # "super" or "apollonian"
    bend_bound: int
    explore_bound: int
    spheres: dict                  # canonical key -> sphere vector
    words: dict                    # canonical key -> witness word
    planes: list = field(default_factory=list)
    depth: int = 0
    saturated: bool | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def N(self):
        return self.frame.N

    def non_planes(self):
        return [s for k, s in sorted(self.spheres.items()) if s[0] != 0]

    def within(self, B: int):
        """Spheres (planes included) with |bend| <= B."""
        return {k: s for k, s in self.spheres.items() if abs(s[0]) <= B}

    @property
    def bend_counts(self) -> dict:
        c = Counter(s[0] for s in self.spheres.values() if s[0] != 0 and abs(s[0]) <= self.bend_bound)
        return dict(sorted(c.items()))

    def keys(self):
        return set(k for k, s in self.spheres.items() if abs(s[0]) <= self.bend_bound)

    def __len__(self):
        return len(self.keys())

    def header(self) -> dict:
        return {"kind": self.kind, "cover": self.cover.to_json(), "bend_bound": self.bend_bound,
                "explore_bound": self.explore_bound, "depth": self.depth,
                "saturated": self.saturated, "count": len(self),
                "counts": {str(k): v for k, v in self.bend_counts.items()},
                "diagnostics": self.diagnostics}

    def records(self):
        f = self.frame
        for k in sorted(self.keys()):
            s = self.spheres[k]
            c, r = f.center_radius(s)
            rec = f.to_inv(s).to_json()
            rec["float"] = {"center": None if c is None else [float(v) for v in c],
                            "radius": None if c is None else r}
            yield rec


def _nonneg_mod(v, m):
    return v % m


def _key_full(frame: Frame, s):
    """Canonical translate modulo all of R(Z)+; returns (key, translation vector)."""
    k = s[0]
    x = s[2:]
    if k != 0:
        m = abs(k)
        red = tuple(_nonneg_mod(v, m) for v in x)
        beta = tuple((rv - v) // k for rv, v in zip(red, x))
        return frame.translate(s, beta), beta
    Tx = [sum(frame.T[i][j] * x[j] for j in range(frame.r)) for i in range(frame.r)]
    g, coeffs = _gcd_vec(Tx)
    if g == 0:
        raise DomainError("degenerate plane")
    target = _nonneg_mod(s[1], g) - s[1]
    beta = tuple(c * (target // g) for c in coeffs)
    t = frame.translate(s, beta)
    return t, beta


def _gcd_vec(v):
    g = 0
    coeffs = [0] * len(v)
    for i, a in enumerate(v):
        if a == 0:
            continue
        if g == 0:
            g = abs(a)
            coeffs[i] = 1 if a > 0 else -1
            continue
        gg, s, t = _egcd(g, a)
        coeffs = [c * s for c in coeffs]
        coeffs[i] = t
        g = gg
    return g, coeffs


def _egcd(a, b):
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, x, y = _egcd(b, a % b)
    return g, y, x - (a // b) * y


def _key_su(frame: Frame, s):
    """Canonical translate modulo S_u ∩ R(Z)+ (the first r-1 basis vectors)."""
    k = s[0]
    if k == 0:
        return s, (0,) * frame.r
    m = abs(k)
    rs = frame.r_s
    beta = tuple((_nonneg_mod(v, m) - v) // k for v in s[2:2 + rs]) + (0,)
    return frame.translate(s, beta), beta


def _neg(v):
    return tuple(-x for x in v)


# ---------------------------------------------------------------- super-packing

def enumerate_superpacking(cover, bend_bound: int, generator_norm_bound: int | None = None,
                           explore_bound: int | None = None, max_depth: int | None = None,
                           order: str = "bfs") -> PackingCensus:
    """Orbit of S_u under the Cohn group, modulo R(Z)+ translations.

    From a representative S the neighbours are W(0)(S + beta) for beta in R(Z)+;
    only images with |bend| <= explore_bound are kept, which makes every step
    finite.  ``generator_norm_bound`` (if given) additionally restricts beta by norm.
    """
    if bend_bound < 0:
        raise DomainError("bend_bound must be non-negative")
    cap = max(bend_bound, explore_bound or 0)
    f = Frame(cover)
    Gf = np.array(f.T, dtype=float) / 2
    ball = BallSearch(Gf)
    s0 = f.s_u()
    k0, b0 = _key_full(f, s0)
    spheres = {k0: k0}
    words = {k0: _translation_word(b0)}
    frontier = deque([k0]) if order == "bfs" else [k0]
    depth = 0
    level = {k0: 0}
    while frontier:
        key = frontier.popleft() if order == "bfs" else frontier.pop()
        if max_depth is not None and level[key] >= max_depth:
            continue
        s = spheres[key]
        for beta in _super_steps(f, ball, s, cap, generator_norm_bound):
            t = f.w0(f.translate(s, beta))
            if abs(t[0]) > cap:
                continue
            kt, b2 = _key_full(f, t)
            if kt in spheres:
                continue
            spheres[kt] = kt
            words[kt] = _simplify(words[key] + _translation_word(beta) + ((0,) * f.r,) + _translation_word(b2))
            level[kt] = level[key] + 1
            depth = max(depth, level[kt])
            frontier.append(kt)
    census = PackingCensus(cover, f, "super", bend_bound, cap, spheres, words, depth=depth)
    census.planes = [k for k in spheres if k[0] == 0]
    return census


def _translation_word(beta):
    """T_beta = -W(-beta) W(0): apply W(0) first, then W(-beta)."""
    if not any(beta):
        return ()
    return ((0,) * len(beta), tuple(-b for b in beta))


def _simplify(word):
    out = []
    for a in word:
        if out and not any(a) and not any(out[-1]):
            out.pop()  # W(0)^2 = -1 acts trivially
        else:
            out.append(a)
    return tuple(out)


def _super_steps(f: Frame, ball: BallSearch, s, cap, norm_bound):
    k = s[0]
    x = s[2:]
    N = f.N
    if k != 0:
        # |new bend| = |nrm(xi + k beta) - N| / |k| <= cap
        c = -np.array(x, dtype=float) / k
        R2 = (N + cap * abs(k)) / (k * k)
        for beta in ball.points(c, R2):
            if norm_bound is not None and f.nrm2(beta) > 2 * norm_bound:
                continue
            nb2 = f.nrm2(tuple(xi + k * bi for xi, bi in zip(x, beta)))
            if abs(nb2 - 2 * N) <= 2 * cap * abs(k):
                yield beta
        return
    Tx = [sum(f.T[i][j] * x[j] for j in range(f.r)) for i in range(f.r)]
    g, coeffs = _gcd_vec(Tx)
    lo = math.ceil((-cap - s[1]) / g)
    hi = math.floor((cap - s[1]) / g)
    for t in range(lo, hi + 1):
        beta = tuple(c * t for c in coeffs)
        if norm_bound is not None and f.nrm2(beta) > 2 * norm_bound and t != 0:
            continue
        yield beta


# ---------------------------------------------------------------- Apollonian packing

def apollonian_seeds(f: Frame):
    """The two boundary planes, oriented so that the strip between them is exterior
    to both and every other sphere of the packing has positive bend."""
    p0 = (0, 0) + _neg(f.u_vec)
    tau = (0,) * f.r_s + (1,)
    p1 = f.translate((0, 0) + f.u_vec, tau)
    return p0, p1


def enumerate_apollonian(cover, bend_bound: int, explore_bound: int | None = None,
                         max_depth: int | None = None, order: str = "bfs") -> PackingCensus:
    if bend_bound < 0:
        raise DomainError("bend_bound must be non-negative")
    cap = max(bend_bound, explore_bound or 0)
    f = Frame(cover)
    Gf = np.array(f.T, dtype=float) / 2
    ball = BallSearch(Gf)
    p0, p1 = apollonian_seeds(f)
    spheres = {p0: p0, p1: p1}
    words = {p0: (("seed", 0),), p1: (("seed", 1),)}
    level = {p0: 0, p1: 0}
    frontier = deque([p0, p1]) if order == "bfs" else [p1, p0]
    depth = 0
    negative = []
    while frontier:
        key = frontier.popleft() if order == "bfs" else frontier.pop()
        if max_depth is not None and level[key] >= max_depth:
            continue
        s = spheres[key]
        for z in _reflection_centers(f, ball, s, cap):
            t = f.phi(s, z)
            if t[0] < 0:
                negative.append((key, z))
                continue
            if t[0] > cap:
                continue
            kt, w = _key_su(f, t)
            if kt in spheres:
                continue
            spheres[kt] = kt
            words[kt] = words[key] + (("phi", z),) + ((("T", w),) if any(w) else ())
            level[kt] = level[key] + 1
            depth = max(depth, level[kt])
            frontier.append(kt)
    census = PackingCensus(cover, f, "apollonian", bend_bound, cap, spheres, words, depth=depth)
    census.planes = [p0, p1]
    census.diagnostics["negative_bend_images"] = len(negative)
    return census


def _reflection_centers(f: Frame, ball: BallSearch, s, cap):
    """z in (S_u ∪ S_u + tau) ∩ R(Z)+ whose reflection keeps |bend| <= cap."""
    k = s[0]
    N = f.N
    rs = f.r_s
    if k == 0:
        # a plane: only one class of centres off the plane matters modulo S_u translations
        zs = [(0,) * f.r, (0,) * rs + (1,)]
        for z in zs:
            t = f.phi(s, z)
            if t[0] != 0:
                yield z
        return
    x = s[2:]
    c = np.array(x, dtype=float) / k
    R2 = (N + cap * k) / (k * k)
    for z in ball.points(c, R2):
        if z[-1] not in (0, 1):
            continue
        yield z


def eval_apollonian_word(f: Frame, word):
    """Re-evaluate a stored Apollonian witness word with the frame operations."""
    p0, p1 = apollonian_seeds(f)
    s = None
    for letter in word:
        tag, v = letter
        if tag == "seed":
            s = p0 if v == 0 else p1
        elif tag == "phi":
            s = f.phi(s, v)
        elif tag == "T":
            s = f.translate(s, v)
    return s


# ---------------------------------------------------------------- checks

def word_matches_closed_form(census: PackingCensus, key) -> bool:
    """Super-packing witness word evaluated by the closed-form inv_u equals the stored sphere."""
    f = census.frame
    letters = tuple(f.elem_of(a) for a in census.words[key])
    M = GroupWord(letters).matrix(f.sig)
    c = inv_u_closed_form(M, f.cover.u)
    return f.from_inv(c) == census.spheres[key]


def word_matches_frame(census: PackingCensus, key) -> bool:
    f = census.frame
    s = f.s_u()
    for a in census.words[key]:
        s = f.W(s, a)
    return s == census.spheres[key]


def congruence_failures(census: PackingCensus):
    """Spheres violating inv_u ≡ (0, 0, u) mod nrm(u) (coordinatewise on R(Z)+)."""
    f = census.frame
    N = f.N
    target = (0, 0) + f.u_vec
    bad = []
    for k in sorted(census.keys()):
        s = census.spheres[k]
        if any((a - b) % N for a, b in zip(s, target)):
            bad.append(s)
    return bad


def pairwise_b_failures(census: PackingCensus, limit: int | None = None):
    """Pairs whose b_form is outside nrm(u) + (nrm(u)^2 / 2) Z."""
    f = census.frame
    N = f.N
    keys = sorted(census.keys())
    if limit:
        keys = keys[:limit]
    V = np.array([census.spheres[k] for k in keys], dtype=object)
    bad = []
    # 2b = -k1 k2' - k2 k1' + x1^T T x2 ; require 2b ≡ 2N mod N^2
    Tn = np.array(f.T, dtype=object)
    X = V[:, 2:]
    XT = X.dot(Tn)
    K = V[:, 0]
    Kp = V[:, 1]
    for i in range(len(keys)):
        twob = -K[i] * Kp - K * Kp[i] + XT[i].dot(X.T)
        r = [(int(t) - 2 * N) % (N * N) for t in twob]
        for j, v in enumerate(r):
            if v:
                bad.append((keys[i], keys[j], Fraction(int(twob[j]), 2)))
    return bad, len(keys) ** 2


def reflection_closed(census: PackingCensus) -> bool:
    f = census.frame
    keys = census.keys()
    for k in keys:
        t, _ = _key_full(f, f.reflect(census.spheres[k]))
        if abs(t[0]) <= census.bend_bound and t not in keys:
            return False
    return True


def canonical_super_key(f: Frame, s):
    return _key_full(f, s)[0]


def apollonian_in_super(apo: PackingCensus, sup: PackingCensus, bound: int):
    """Apollonian spheres (bend <= bound) missing from the super-packing census in either orientation."""
    f = sup.frame
    keys = set(sup.spheres)
    missing = []
    for k, s in apo.spheres.items():
        if abs(s[0]) > bound:
            continue
        a = _key_full(f, s)[0]
        b = _key_full(f, _neg(s))[0]
        if a not in keys and b not in keys:
            missing.append(s)
    return missing


def saturation(enum, cover, bend_bound, caps):
    """Census key sets restricted to bend_bound for increasing exploration caps."""
    sizes = []
    prev = None
    stable = False
    for cap in caps:
        c = enum(cover, bend_bound, explore_bound=cap)
        ks = frozenset(c.keys())
        sizes.append((cap, len(ks)))
        stable = prev is not None and ks == prev
        prev = ks
    return stable, sizes


# ---------------------------------------------------------------- geometry checks on the Apollonian census

def _su_shifts(f: Frame, R: float):
    """Coordinates (length r_s) of all S_u translates of Euclidean length <= R."""
    rs = f.r_s
    if rs == 0:
        return [()]
    Gs = np.array(f.T, dtype=float)[:rs, :rs] / 2
    return BallSearch(Gs).points(np.zeros(rs), R * R)


def disjointness_report(census: PackingCensus):
    """Exact pairwise check that sphere interiors are disjoint, translates included.

    A float screen (kernels.candidate_pairs) finds nearby pairs; the decision
    itself is exact: positively oriented spheres are disjoint iff b <= -nrm(u),
    tangent iff equality.
    """
    f = census.frame
    N = f.N
    spheres = census.non_planes()
    viol = []
    tangent = []
    for s in spheres:
        for p in census.planes:
            b = f.b(s, p)
            if b > -N:
                viol.append((s, p, b))
            elif b == -N:
                tangent.append((s, p, None))
    checked = len(spheres) * len(census.planes)
    if spheres:
        rs = f.r_s
        geo = [f.center_radius(s) for s in spheres]
        centers = np.array([g[0] for g in geo])
        radii = np.array([g[1] for g in geo])
        # canonical centres lie in one fundamental cell of S_u
        diam = float(sum(np.linalg.norm(f.embed[k]) for k in range(rs)))
        shifts = _su_shifts(f, 2 * radii.max() + diam + 1e-6)
        cand = kernels.candidate_pairs(centers, radii, f.embed[:rs], shifts)
        for i, j, k in cand.tolist():
            w = tuple(shifts[k])
            if i > j or (i == j and (not any(w) or w < tuple(-v for v in w))):
                continue  # each unordered pair once
            si = spheres[i]
            tj = f.translate(spheres[j], w + (0,))
            checked += 1
            b = f.b(si, tj)
            if b > -N:
                viol.append((si, tj, b))
            elif b == -N:
                tangent.append((si, tj, None))
    return {"violations": viol, "tangent_pairs": tangent, "pairs_checked": checked}


def tangency_point(f: Frame, s, t):
    """Exact tangency point (as a rational combination of the R(Z)+ basis)."""
    if s[0] != 0 and t[0] != 0:
        k = s[0] + t[0]
        return tuple(Fraction(a + b, k) for a, b in zip(s[2:], t[2:]))
    if s[0] == 0:
        s, t = t, s
    # t is a plane, s a sphere: project the centre onto the plane
    c = [Fraction(v, s[0]) for v in s[2:]]
    n = t[2:]
    # plane: {z : tr(z conj n) = -t[1]}?  use <z, n> = h with h from the cobend
    nn = Fraction(f.nrm2(n), 2)
    cz = Fraction(sum(c[i] * f.T[i][j] * n[j] for i in range(f.r) for j in range(f.r)), 2)
    h = Fraction(t[1], 2)
    lam = (cz - h) / nn
    return tuple(ci - lam * ni for ci, ni in zip(c, n))


def immediate_tangency_check(census: PackingCensus, report=None):
    """Every tangency point is rational and lies on no third sphere of the census."""
    f = census.frame
    rep = report or disjointness_report(census)
    spheres = census.non_planes()
    pts = [(tangency_point(f, s, t), s, t) for s, t, _ in rep["tangent_pairs"]]
    rational = all(isinstance(v, Fraction) for rho, _, _ in pts for v in rho)
    violations = []
    if spheres and pts:
        rs = f.r_s
        geo = [f.center_radius(s) for s in spheres]
        centers = np.array([g[0] for g in geo])
        radii = np.array([g[1] for g in geo])
        P = np.array([f.euclid([float(v) for v in rho]) for rho, _, _ in pts])
        # tangency points of canonical spheres stay within one cell plus a radius
        diam = float(sum(np.linalg.norm(f.embed[k]) for k in range(rs)))
        shifts = _su_shifts(f, 3 * radii.max() + diam + 1e-6)
        cand = kernels.near_pairs(P, np.zeros(len(P)), centers, radii, f.embed[:rs], shifts, 1e-6)
        for i, j, k in cand.tolist():
            rho, s, t = pts[i]
            s3 = f.translate(spheres[j], tuple(shifts[k]) + (0,))
            if s3 == s or s3 == t:
                continue
            if _on_sphere(f, s3, rho):
                violations.append((rho, s, t, s3))
    for rho, s, t in pts:
        for p in census.planes:
            if p not in (s, t) and _on_sphere(f, p, rho):
                violations.append((rho, s, t, p))
    return {"tangent_pairs": len(pts), "violations": violations, "rational_points": rational}


def _on_sphere(f: Frame, s, rho) -> bool:
    """Exact test that the rational point rho lies on sphere s."""
    # point z lies on the sphere iff k nrm(z) - tr(z conj xi) + k' = 0
    k, kp, x = s[0], s[1], s[2:]
    nz = sum(rho[i] * f.T[i][j] * rho[j] for i in range(f.r) for j in range(f.r)) / 2
    tz = sum(rho[i] * f.T[i][j] * x[j] for i in range(f.r) for j in range(f.r))
    return k * nz - tz + kp == 0
