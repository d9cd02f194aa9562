from fractions import Fraction

import pytest
import sympy

from quatpack import orders as o
from quatpack.algebra import AlgebraSig, QuatElem

# (a, b) -> disc of the quaternion algebra, via Hilbert symbols
ALGEBRA_DISCS = {(-1, -1): 2, (-1, -3): 3, (-2, -10): 5, (-1, -7): 7, (-2, -26): 13,
                 (-2, -5): 5, (-3, -6): 2, (-11, -22): 2}


@pytest.mark.parametrize("ab,disc", sorted(ALGEBRA_DISCS.items()))
def test_algebra_discriminant(ab, disc):
    assert o.algebra_discriminant(*ab) == disc


def test_hilbert_symbol_examples():
    assert o.hilbert_symbol(-1, -1, 2) == -1
    assert o.hilbert_symbol(-1, -1, 3) == 1
    assert o.hilbert_symbol(2, 3, 3) == -1
    # product formula over ramified places including infinity
    for a, b in [(-2, -26), (-1, -7), (-3, -5)]:
        prod = -1  # both negative: ramified at infinity
        for p in (2, 3, 5, 7, 13):
            prod *= o.hilbert_symbol(a, b, p)
        assert prod == 1


def test_squarefree_helpers():
    assert o.squarefree_part(72) == 2
    assert o.squarefree_part(-45) == 5
    assert o.is_squarefree(30) and not o.is_squarefree(12)
    assert [o.field_discriminant(m) for m in (1, 2, 3, 5, 7)] == [-4, -8, -3, -20, -7]


@pytest.mark.parametrize("m,nrm", [(1, 1), (2, 2), (5, 5), (6, 6), (7, 7), (3, 3)])
def test_quadratic_covers(m, nrm):
    c = o.quadratic_cover(m)
    assert c.nrm_u == nrm
    assert c.covering_radius_sq == Fraction(1, 4)
    assert o.is_covering_vector(c.order, c.u)
    assert c.u.trace() == 0


def test_dim3_catalog_size():
    cat = o.dim3_catalog(200)
    ds = [e.params["disc"] for e in cat]
    # every imaginary quadratic discriminant of absolute value <= 200
    expected = sorted(d for d in range(3, 201)
                      if (d % 4 == 3 and o.is_squarefree(d))
                      or (d % 4 == 0 and (d // 4) % 4 in (1, 2) and o.is_squarefree(d // 4)))
    assert sorted(ds) == expected
    assert all(e.order.is_dagger_stable() for e in cat)


def trace_form_det(O):
    """|det tr(x conj y)| over the basis, computed with sympy."""
    M = sympy.Matrix([[sympy.Rational(str((x * y.conj()).trace())) for y in O.basis] for x in O.basis])
    return abs(int(M.det()))


# rows where the split prime divides n carry discrd |n| / p
@pytest.mark.parametrize("a,n,row,discrd,p", [
    (-2, -10, "T1:(-2,n):n/2=3mod8", 5, Fraction(1, 2)),
    (-2, -14, "T1:(-2,n):n/2=1mod8", 7, Fraction(1, 2)),
    (-3, -6, "T1:(-3,n):n/3=1mod3", 2, Fraction(1, 3)),
    (-11, -22, "T1:(-11,n):11|n:n/11=-2mod11", 2, Fraction(1, 11)),
    (-11, -66, "T1:(-11,n):11|n:n/11=5mod11", 6, Fraction(1, 11)),
    (-11, -77, "T1:(-11,n):11|n:n/11=4mod11", 7, Fraction(1, 11)),
    (-11, -110, "T1:(-11,n):11|n:n/11=1mod11", 10, Fraction(1, 11)),
])
def test_split_prime_rows(a, n, row, discrd, p):
    (name, O, cov), = o.table1_at(a, n)
    assert name == row
    assert O.discrd == discrd
    assert trace_form_det(O) == discrd ** 2
    assert discrd % o.algebra_discriminant(a, n) == 0
    assert o.is_maximal(O)
    assert cov.relation["p"] == p
    assert cov.nrm_u == abs(n)


@pytest.mark.parametrize("a,n,nrm", [(-1, -6, 6), (-1, -1, 1), (-2, -6, 6), (-3, -3, 3), (-7, -14, 14),
                                     (-11, -33, 33)])
def test_table1_covers(a, n, nrm):
    for name, O, cov in o.table1_at(a, n):
        assert O.is_dagger_stable()
        assert o.is_maximal(O)
        assert trace_form_det(O) == O.discrd ** 2
        assert O.discrd % o.algebra_discriminant(a, n) == 0
        assert cov.nrm_u == nrm
        assert cov.covering_radius_sq < 1
        assert o.is_covering_vector(O, cov.u)


def test_seven_divides_n_nonmaximal():
    # n/7 a nonzero square mod 7: the tabulated lattice is not maximal
    O = o.table1_order("T1:(-7,n):7|n", -21)
    assert not o.is_maximal(O)
    assert O.discrd == 21
    assert {M.discrd for M in o.maximal_overorders(O)} == {3}
    assert o.table1_at(-7, -21) == []
    assert o.table1_at(-7, -14)


def test_covering_vector_rejects_bad_input():
    O = o.quadratic_order(5)
    with pytest.raises(ValueError):
        o.normalize_covering_vector(O, QuatElem(O.sig, (1, 0)))
    with pytest.raises(ValueError):
        o.quadratic_order(4)


def test_normalization_makes_u_primitive():
    O = o.quadratic_order(5)
    c = o.normalize_covering_vector(O, QuatElem(O.sig, (0, 3)))
    assert c.u == QuatElem(O.sig, (0, 1))


def test_table2_orders():
    got = {(r[1], r[2]): (r[4], r[5]) for r in o.TABLE2}
    assert got == {(-1, -1): (2, (1, 2, 3, 6, 10)), (-1, -3): (3, (3, 6)), (-2, -10): (5, (5, 10)),
                   (-1, -7): (7, (7,)), (-2, -26): (13, (13,))}
    for name, a, b, *_ in o.TABLE2:
        c = o.table2_cover(name)
        assert c.order.discrd == o.algebra_discriminant(a, b)
        assert o.is_maximal(c.order)


def test_dim4_catalog_entries_are_maximal():
    cat = o.dim4_catalog(30)
    assert cat
    for e in cat:
        assert o.is_maximal(e.order)
        assert e.cover.relation["p"] in o.NORM_RATIO_SETS[4]
        d = e.to_json()
        assert d["covering_vector"] and d["table_ref"].startswith("T1:")


def test_order_json_roundtrip():
    O = o.table2_order("T2:(-1,-7)")
    O2 = o.ArithOrder.from_json(O.to_json())
    assert O2 == O and O2.discrd == 7


def test_signature_of_dagger_discriminant():
    assert o.dagger_discriminant(AlgebraSig.quaternion(-2, -6, 4)) == 3
    assert o.dagger_discriminant(AlgebraSig.quaternion(-1, -6, 4)) == 6
