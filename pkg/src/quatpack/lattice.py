"""Integer lattice utilities: Hermite form, kernels, LLL, short vectors,
successive minima and exact covering radii for ranks up to 3."""
from __future__ import annotations

import itertools
import math

import numpy as np
from fractions import Fraction
from typing import Sequence

Vec = tuple
Mat = list


class DegenerateLattice(ValueError):
    pass


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def common_denominator(rows) -> int:
    d = 1
    for r in rows:
        for x in r:
            d = _lcm(d, Fraction(x).denominator)
    return d


def hnf_rows(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Row-style Hermite normal form; returns a basis of the row lattice."""
    A = [list(r) for r in rows if any(r)]
    if not A:
        return []
    ncol = len(A[0])
    out = []
    col = 0
    while A and col < ncol:
        nz = [r for r in A if r[col]]
        if not nz:
            col += 1
            continue
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            p = nz[0]
            nxt = [p]
            for r in nz[1:]:
                q = r[col] // p[col]
                r2 = [x - q * y for x, y in zip(r, p)]
                if any(r2):
                    nxt.append(r2)
            A = [r for r in A if not r[col]] + nxt
            nz = [r for r in A if r[col]]
        p = nz[0]
        if p[col] < 0:
            p = [-x for x in p]
        out.append(p)
        A = [r for r in A if not r[col]]
        col += 1
    # reduce entries above pivots
    for i in range(len(out)):
        piv = next(k for k, x in enumerate(out[i]) if x)
        for j in range(i):
            q = out[j][piv] // out[i][piv]
            if q:
                out[j] = [x - q * y for x, y in zip(out[j], out[i])]
    return out


def lattice_basis(gens: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Z-basis (canonical Hermite form) of the lattice spanned by rational vectors."""
    d = common_denominator(gens)
    ints = [[int(Fraction(x) * d) for x in g] for g in gens]
    return [[Fraction(x, d) for x in r] for r in hnf_rows(ints)]


def integer_kernel(A: Sequence[Sequence[int]], n: int) -> list[list[int]]:
    """Basis of {x in Z^n : A x = 0} for an integer matrix A with n columns."""
    m = len(A)
    rows = [[A[r][c] for r in range(m)] + [1 if k == c else 0 for k in range(n)]
            for c in range(n)]
    for col in range(m):
        piv_rows = [r for r in rows if r[col]]
        rest = [r for r in rows if not r[col]]
        while len(piv_rows) > 1:
            piv_rows.sort(key=lambda r: abs(r[col]))
            p = piv_rows[0]
            new = [p]
            for r in piv_rows[1:]:
                q = r[col] // p[col]
                r2 = [x - q * y for x, y in zip(r, p)]
                (new if r2[col] else rest).append(r2)
            piv_rows = new
        rows = rest  # the surviving pivot row is not in the kernel
    return hnf_rows([r[m:] for r in rows])


def gram(vectors, inner) -> list[list[Fraction]]:
    return [[inner(x, y) for y in vectors] for x in vectors]


def det(M) -> Fraction:
    n = len(M)
    A = [[Fraction(x) for x in r] for r in M]
    d = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            A[c], A[p] = A[p], A[c]
            d = -d
        d *= A[c][c]
        for r in range(c + 1, n):
            f = A[r][c] / A[c][c]
            if f:
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return d


def solve(A, b):
    """Exact solution of the square system A x = b, or None if singular."""
    n = len(A)
    M = [[Fraction(x) for x in A[r]] + [Fraction(b[r])] for r in range(n)]
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c] != 0), None)
        if p is None:
            return None
        M[c], M[p] = M[p], M[c]
        inv = 1 / M[c][c]
        M[c] = [x * inv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c]:
                f = M[r][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return [M[r][n] for r in range(n)]


def qform(G, x) -> Fraction:
    n = len(x)
    return sum(G[i][j] * x[i] * x[j] for i in range(n) for j in range(n) if x[i] and x[j])


def bform(G, x, y) -> Fraction:
    n = len(x)
    return sum(G[i][j] * x[i] * y[j] for i in range(n) for j in range(n) if x[i] and y[j])


def lll(G, delta=Fraction(99, 100)):
    """LLL on a Gram matrix.  Returns (U, G') with G' = U G U^T and U unimodular."""
    n = len(G)
    U = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    G = [[Fraction(x) for x in r] for r in G]

    def gso():
        mu = [[Fraction(0)] * n for _ in range(n)]
        B = [Fraction(0)] * n
        for i in range(n):
            for j in range(i):
                mu[i][j] = (G[i][j] - sum(mu[j][k] * mu[i][k] * B[k] for k in range(j))) / B[j]
            B[i] = G[i][i] - sum(mu[i][k] ** 2 * B[k] for k in range(i))
            if B[i] <= 0:
                raise DegenerateLattice("Gram matrix is not positive definite")
        return mu, B

    def sub(i, j, q):
        # b_i -= q b_j
        U[i] = [x - q * y for x, y in zip(U[i], U[j])]
        gii = G[i][i] - 2 * q * G[i][j] + q * q * G[j][j]
        row = [G[i][k] - q * G[j][k] for k in range(n)]
        for k in range(n):
            G[i][k] = G[k][i] = row[k]
        G[i][i] = gii

    k = 1
    while k < n:
        mu, B = gso()
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                sub(k, j, q)
                mu, B = gso()
        if B[k] >= (delta - mu[k][k - 1] ** 2) * B[k - 1]:
            k += 1
        else:
            U[k], U[k - 1] = U[k - 1], U[k]
            G[k], G[k - 1] = G[k - 1], G[k]
            for r in G:
                r[k], r[k - 1] = r[k - 1], r[k]
            k = max(k - 1, 1)
    return U, G


def short_vectors(G, bound) -> list[tuple[tuple[int, ...], Fraction]]:
    """All nonzero integer x (up to sign: first nonzero coordinate positive)
    with x^T G x <= bound, via Fincke-Pohst on an LDL^T factorisation."""
    n = len(G)
    G = [[Fraction(x) for x in r] for r in G]
    bound = Fraction(bound)
    # LDL^T with unit upper factor: q(x) = sum d_i (x_i + sum_{j>i} m_ij x_j)^2
    d = [Fraction(0)] * n
    m = [[Fraction(0)] * n for _ in range(n)]
    A = [r[:] for r in G]
    for i in range(n):
        d[i] = A[i][i]
        if d[i] <= 0:
            raise DegenerateLattice("Gram matrix is not positive definite")
        for j in range(i + 1, n):
            m[i][j] = A[i][j] / d[i]
        for j in range(i + 1, n):
            for k in range(i + 1, n):
                A[j][k] -= d[i] * m[i][j] * m[i][k]
    out = []
    x = [0] * n
    # float pruning with a safety margin; exact filter at the leaves
    df = [float(v) for v in d]
    mf = [[float(v) for v in r] for r in m]
    slack = 1e-9 * (1 + float(bound))

    def rec(i, rem):
        if i < 0:
            if any(x):
                v = tuple(x)
                first = next(c for c in v if c)
                if first > 0:
                    out.append(v)
            return
        c = sum(mf[i][j] * x[j] for j in range(i + 1, n))
        r = math.sqrt(max(rem, 0.0) / df[i])
        lo = math.floor(-c - r) - 1
        hi = math.ceil(-c + r) + 1
        for xi in range(lo, hi + 1):
            t = df[i] * (xi + c) ** 2
            if t <= rem + slack:
                x[i] = xi
                rec(i - 1, rem - t)
        x[i] = 0

    rec(n - 1, float(bound))
    out = [(v, qform(G, v)) for v in out]
    out = [t for t in out if t[1] <= bound]
    out.sort(key=lambda t: (t[1], t[0]))
    return out


def _rank(vecs) -> int:
    if not vecs:
        return 0
    A = [[Fraction(x) for x in v] for v in vecs]
    r = 0
    ncol = len(A[0])
    for c in range(ncol):
        p = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        for i in range(len(A)):
            if i != r and A[i][c]:
                f = A[i][c] / A[r][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        r += 1
    return r


def successive_minima(G, k: int | None = None) -> list[Fraction]:
    """Squared successive minima of the lattice with Gram matrix G."""
    n = len(G)
    k = n if k is None else k
    if k > n:
        raise ValueError("k exceeds the rank")
    _, Gr = lll(G)
    bound = max(Gr[i][i] for i in range(n))  # the reduced basis certifies this bound
    vecs = short_vectors(G, bound)
    chosen, mins = [], []
    for v, q in vecs:
        if _rank(chosen + [v]) > len(chosen):
            chosen.append(v)
            mins.append(q)
            if len(mins) == k:
                break
    return mins


def voronoi_relevant(G) -> list[tuple[int, ...]]:
    """Voronoi-relevant vectors (both signs) of the lattice with Gram matrix G."""
    n = len(G)
    classes = [c for c in itertools.product((0, 1), repeat=n) if any(c)]
    bound = max(qform(G, c) for c in classes)
    best: dict = {}
    for v, q in short_vectors(G, bound):
        key = tuple(x % 2 for x in v)
        cur = best.get(key)
        if cur is None or q < cur[0]:
            best[key] = (q, [v])
        elif q == cur[0]:
            cur[1].append(v)
    rel = []
    for key, (q, vs) in best.items():
        if len(vs) == 1:  # stored up to sign, so exactly +-v
            v = vs[0]
            rel.append(v)
            rel.append(tuple(-x for x in v))
    return rel


def voronoi_vertices(G) -> list[tuple[tuple[Fraction, ...], Fraction]]:
    """Vertices of the Voronoi cell at the origin, as (coordinates, squared norm).

    Candidates come from a float screen over n-subsets of relevant vectors;
    every returned vertex is solved and checked exactly.
    """
    n = len(G)
    if n == 0:
        return []
    if n > 4:
        raise NotImplementedError("Voronoi vertices implemented for rank <= 4")
    G = [[Fraction(x) for x in r] for r in G]
    rel = voronoi_relevant(G)
    Gf = np.array(G, dtype=float)
    relf = np.array(rel, dtype=float)
    R = relf @ Gf
    H = np.einsum("ij,ij->i", R, relf) / 2
    half = {v: qform(G, v) / 2 for v in rel}
    rows = {v: [sum(G[i][j] * v[j] for j in range(n)) for i in range(n)] for v in rel}
    out = {}
    for combo in itertools.combinations(range(len(rel)), n):
        A = R[list(combo)]
        if abs(np.linalg.det(A)) < 1e-9:
            continue
        x = np.linalg.solve(A, H[list(combo)])
        if not np.all(R @ x <= H + 1e-7 * (1 + np.abs(H))):
            continue
        key = tuple(np.round(x, 6))
        if key in out:
            continue
        vs = [rel[k] for k in combo]
        xe = solve([rows[v] for v in vs], [half[v] for v in vs])
        if xe is None:
            continue
        if all(sum(rows[w][i] * xe[i] for i in range(n)) <= half[w] for w in rel):
            out[key] = (tuple(xe), qform(G, xe))
    return sorted(set(out.values()), key=lambda t: (-t[1], t[0]))


def covering_radius_sq(G) -> Fraction:
    """Exact squared covering radius: the largest squared norm of a Voronoi vertex."""
    n = len(G)
    if n == 0:
        return Fraction(0)
    if n > 4:
        raise NotImplementedError("exact covering radius implemented for rank <= 4")
    G = [[Fraction(x) for x in r] for r in G]
    _, G = lll(G)  # the covering radius is basis independent
    rel = voronoi_relevant(G)
    Gf = np.array(G, dtype=float)
    R = np.array(rel, dtype=float) @ Gf
    H = np.einsum("ij,ij->i", R, np.array(rel, dtype=float)) / 2
    # float screen over vertex candidates, exact solve for the near-maximal ones
    cands = []
    for combo in itertools.combinations(range(len(rel)), n):
        A = R[list(combo)]
        if abs(np.linalg.det(A)) < 1e-9:
            continue
        x = np.linalg.solve(A, H[list(combo)])
        if np.all(R @ x <= H + 1e-7 * (1 + np.abs(H))):
            cands.append((float(x @ Gf @ x), combo))
    if not cands:
        raise DegenerateLattice("no Voronoi vertex found")
    top = max(c[0] for c in cands)
    half = {v: qform(G, v) / 2 for v in rel}
    rows = {v: [sum(G[i][j] * v[j] for j in range(n)) for i in range(n)] for v in rel}
    best = Fraction(0)
    for qf, combo in cands:
        if qf < top - 1e-6 * (1 + top):
            continue
        vs = [rel[k] for k in combo]
        x = solve([rows[v] for v in vs], [half[v] for v in vs])
        if x is None:
            continue
        if all(sum(rows[w][i] * x[i] for i in range(n)) <= half[w] for w in rel):
            best = max(best, qform(G, x))
    return best
