import pytest

from conftest import apollonian, cover, superpacking
from quatpack.density import bend_step
from quatpack.packing import (DomainError, apollonian_in_super, congruence_failures, disjointness_report,
                              enumerate_apollonian, enumerate_superpacking, immediate_tangency_check,
                              pairwise_b_failures, reflection_closed, saturation, tangency_point,
                              word_matches_closed_form, word_matches_frame)


def test_depth_zero():
    z5 = cover("m=5")
    sup = enumerate_superpacking(z5, 10, max_depth=0)
    assert list(sup.spheres.values()) == [sup.frame.s_u()]
    apo = enumerate_apollonian(z5, 10, max_depth=0)
    assert len(apo.spheres) == 2 and all(s[0] == 0 for s in apo.spheres.values())


def test_negative_bound_rejected():
    with pytest.raises(DomainError):
        enumerate_superpacking(cover("m=5"), -1)
    with pytest.raises(DomainError):
        enumerate_apollonian(cover("m=5"), -1)


@pytest.mark.parametrize("sel,bound", [("m=5", 60), ("m=6", 60), ("T1:-1,-6", 30), ("T2:(-1,-7)", 21)])
def test_super_census_congruence(sel, bound):
    sup = superpacking(sel, bound)
    assert len(sup) > 1
    assert congruence_failures(sup) == []
    bad, _ = pairwise_b_failures(sup)
    assert bad == []


def test_super_census_reflection_symmetry():
    assert reflection_closed(superpacking("m=5", 100))
    assert reflection_closed(superpacking("m=6", 100))


def test_super_words_two_code_paths():
    sup = superpacking("m=5", 100)
    for k in sorted(sup.keys())[:60]:
        assert word_matches_frame(sup, k)
        assert word_matches_closed_form(sup, k)


def test_traversal_order_irrelevant():
    z5 = cover("m=5")
    a = enumerate_superpacking(z5, 80)
    b = enumerate_superpacking(z5, 80, order="dfs")
    assert a.keys() == b.keys()
    c = enumerate_apollonian(z5, 200)
    d = enumerate_apollonian(z5, 200, order="dfs")
    assert c.keys() == d.keys()


def test_monotone_in_bend_bound():
    small, large = apollonian("m=5", 200), apollonian("m=5", 400)
    assert small.keys() <= large.keys()
    assert superpacking("m=5", 60).keys() <= superpacking("m=5", 100).keys()


def test_saturation_reported():
    stable, sizes = saturation(enumerate_apollonian, cover("m=5"), 100, [100, 200])
    assert stable and sizes[0][1] == sizes[1][1]


def test_apollonian_geometry():
    apo = apollonian("m=5", 200)
    assert all(s[0] > 0 for s in apo.non_planes())
    rep = disjointness_report(apo)
    assert rep["violations"] == []
    assert rep["tangent_pairs"]
    tan = immediate_tangency_check(apo, rep)
    assert tan["violations"] == [] and tan["rational_points"]


def test_planes_are_tangent_at_infinity():
    apo = apollonian("m=5", 30)
    p0, p1 = apo.planes
    assert apo.frame.b(p0, p1) == -apo.N


def test_apollonian_inside_superpacking():
    apo, sup = apollonian("m=5", 60), superpacking("m=5", 60)
    assert apollonian_in_super(apo, sup, 60) == []


def test_bends_share_step():
    apo = apollonian("m=5", 400)
    assert bend_step(apo) == 10
    assert all(s[0] % 10 == 0 for s in apo.non_planes())


def test_tangency_points_lie_on_both_spheres():
    apo = apollonian("m=5", 100)
    f = apo.frame
    from quatpack.packing import _on_sphere
    for s, t, _ in disjointness_report(apo)["tangent_pairs"][:40]:
        rho = tangency_point(f, s, t)
        assert _on_sphere(f, s, rho) and _on_sphere(f, t, rho)


def test_gaussian_control_runs():
    apo = apollonian("m=1", 50)
    assert disjointness_report(apo)["violations"] == []
    # strip of width 1: the largest circles have radius 1/2
    bends = sorted(s[0] for s in apo.non_planes())
    assert bends[:2] == [2, 8]


def test_census_export():
    apo = apollonian("m=5", 30)
    head = apo.header()
    assert head["count"] == len(apo) and head["kind"] == "apollonian"
    recs = list(apo.records())
    assert len(recs) == len(apo)
    assert any(r["float"]["radius"] for r in recs)
