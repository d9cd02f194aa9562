import itertools
from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from quatpack.lattice import (DegenerateLattice, covering_radius_sq, det, hnf_rows, integer_kernel,
                              lattice_basis, lll, qform, short_vectors, solve, successive_minima,
                              voronoi_relevant, voronoi_vertices)

A2 = [[2, 1], [1, 2]]
A3 = [[2, -1, 0], [-1, 2, -1], [0, -1, 2]]
D4 = [[2, -1, 0, 0], [-1, 2, -1, -1], [0, -1, 2, 0], [0, -1, 0, 2]]
Z3 = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]


@st.composite
def bases(draw, n=3):
    B = [[draw(st.integers(-6, 6)) for _ in range(n)] for _ in range(n)]
    # push towards full rank without rejecting the natural minimal example
    for i in range(n):
        B[i][i] += 7 * (1 if B[i][i] >= 0 else -1)
    assume(det(B) != 0)
    return B


def gram_of_rows(B):
    return [[sum(a * b for a, b in zip(x, y)) for y in B] for x in B]


@pytest.mark.parametrize("G,expected", [(A2, Fraction(2, 3)), (Z3, Fraction(3, 4)), (A3, Fraction(1)),
                                        (D4, Fraction(1)), ([[1, 0], [0, 5]], Fraction(3, 2))])
def test_covering_radius_known(G, expected):
    assert covering_radius_sq(G) == expected


def test_voronoi_relevant_counts():
    # hexagonal cell: 6 facets; A3 (fcc): 12; D4: 24
    assert len(voronoi_relevant(A2)) == 6
    assert len(voronoi_relevant(A3)) == 12
    assert len(voronoi_relevant(D4)) == 24


def test_voronoi_vertices_hexagonal():
    vs = voronoi_vertices(A2)
    assert len(vs) == 6
    assert all(r2 == Fraction(2, 3) for _, r2 in vs)


def test_hnf_example():
    assert hnf_rows([[2, 4], [3, 5]]) == [[1, 1], [0, 2]]


@given(bases())
def test_hnf_same_lattice(B):
    H = hnf_rows(B)
    assert abs(det(H)) == abs(det(B))
    for i, row in enumerate(H):
        assert all(v == 0 for v in row[:i]) and row[i] > 0
    # every original row is an integer combination of H
    for r in B:
        x = solve([list(col) for col in zip(*H)], r)
        assert all(Fraction(v).denominator == 1 for v in x)


@given(bases())
def test_lll_is_unimodular_and_preserves_det(B):
    G = gram_of_rows(B)
    U, G2 = lll(G)
    assert abs(det(U)) == 1
    assert det(G2) == det(G)
    UG = [[sum(U[i][k] * G[k][l] * U[j][l] for k in range(3) for l in range(3)) for j in range(3)]
          for i in range(3)]
    assert UG == G2
    # the first reduced vector is within 2^(n-1) of the minimum
    assert G2[0][0] <= 4 * successive_minima(G)[0]


@given(bases(2))
def test_short_vectors_match_brute_force(B):
    G = gram_of_rows(B)
    bound = 40
    got = {v for v, _ in short_vectors(G, bound)}
    got |= {tuple(-x for x in v) for v in got}
    brute = set()
    R = 60
    for v in itertools.product(range(-R, R + 1), repeat=2):
        if any(v) and qform(G, v) <= bound:
            brute.add(v)
    assert got == brute


def test_successive_minima_and_degeneracy():
    assert successive_minima(A3) == [2, 2, 2]
    with pytest.raises(DegenerateLattice):
        lll([[1, 1], [1, 1]])


def test_kernel_and_basis():
    K = integer_kernel([[1, 2, 3]], 3)
    assert len(K) == 2 and all(k[0] + 2 * k[1] + 3 * k[2] == 0 for k in K)
    F = Fraction
    assert lattice_basis([[F(1, 2), 0], [0, 1], [F(1, 2), 1]]) == [[F(1, 2), 0], [0, 1]]
