import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import apollonian, cover, superpacking
from quatpack import density as dn
from quatpack.forbidden import density_upper_bound, ghost_circle
from quatpack.orders import ConsistencyError, dim3_catalog, table2_cover


def test_ball_volume_constants():
    assert math.isclose(dn.ball_volume_const(2), math.pi)
    assert math.isclose(dn.ball_volume_const(3), 4 * math.pi / 3)
    assert math.isclose(dn.ball_volume_const(4), math.pi ** 2 / 2)


def test_cell_volume_examples():
    assert dn.cell_volume(cover("m=5")).squared == 5
    assert dn.cell_volume(cover("m=1")).squared == 1
    assert dn.cell_volume(cover("m=7")).squared == Fraction(7, 4)
    # dim 4: discrd^2 / (4 * squarefree(ab)); (-1,-6): 36 / 24
    assert dn.cell_volume(cover("T1:-1,-6")).squared == Fraction(3, 2)
    assert dn.cell_volume(table2_cover("T2:(-1,-7)")).squared == Fraction(49, 16)


def test_cell_volume_dual_paths_dim3():
    for e in dim3_catalog(200):
        assert dn.cell_volume_sq_gram(e.cover) == dn.cell_volume_sq_closed(e.cover)


def test_cell_volume_mismatch_raises(monkeypatch):
    monkeypatch.setattr(dn, "cell_volume_sq_closed", lambda c: Fraction(1))
    with pytest.raises(ConsistencyError):
        dn.cell_volume(cover("m=5"))


def test_partial_density_monotone_and_bounded():
    apo = apollonian("m=5", 2000)
    pts = dn.partial_density(apo)
    ds = [p.density for p in pts]
    assert ds == sorted(ds)
    assert pts[-1].bend == 2000 and pts[-1].error < 1e-12
    ub = density_upper_bound(ghost_circle(20))["upper_bound"]
    assert 0.15 < ds[-1] < ub


def test_partial_density_needs_planes():
    with pytest.raises(ValueError):
        dn.partial_density(superpacking("m=5", 60))


def test_partial_density_thresholds():
    apo = apollonian("m=5", 400)
    pts = dn.partial_density(apo, thresholds=[10, 100, 400])
    assert [p.bend for p in pts] == [10, 100, 400]
    # the two largest circles have normalized bend 10: radius sqrt(5)/10
    assert pts[0].count == 2
    assert math.isclose(pts[0].density, 2 * math.pi * 0.05 / math.sqrt(5))


@settings(max_examples=60)
@given(alpha=st.floats(0.8, 1.9), c=st.floats(0.5, 4.0), lam=st.sampled_from([1, 2]))
def test_fit_recovers_planted_exponent(alpha, c, lam):
    T = np.arange(1, 3001)
    cum = np.floor(c * T ** (alpha / lam) * 50).astype(int)
    counts = np.diff(np.concatenate([[0], cum]))
    keep = counts > 0
    fit = dn.fit_counts(T[keep], counts[keep], lam)
    assert abs(fit.alpha - alpha) < 0.01
    assert fit.stable


def test_fit_needs_points():
    with pytest.raises(dn.Unfittable):
        dn.fit_counts([1, 2, 3], [1, 1, 1])


def test_gaussian_alpha_near_known_value():
    fit = dn.bend_census_fit(apollonian("m=1", 2000))
    assert 1.2 < fit.alpha < 1.4
    assert fit.to_json()["stable"] == fit.stable


def test_density_model_variants():
    cov = cover("m=5")
    a = dn.density_model(cov, 1.3, l=1, variant="corrected")
    b = dn.density_model(cov, 1.3, l=1, variant="literal")
    assert a > 0 and b > 0 and not math.isclose(a, b)
    with pytest.raises(ValueError):
        dn.density_model(cov, 1.3, variant="other")
    with pytest.raises(ValueError):
        dn.density_model(cov, 2.5)


def test_report_fields():
    apo = apollonian("m=5", 1000)
    rep = dn.report(apo, superpacking("m=5", 200), upper_bound=0.4252)
    d = rep.to_json()
    assert d["provenance"]["bend_step"] == 10
    assert d["zeta_model_prediction"]["l"] == 1
    assert rep.superpacking_series > 0
    assert rep.density <= 0.4252


def test_report_rejects_impossible_bound():
    apo = apollonian("m=5", 1000)
    with pytest.raises(ConsistencyError):
        dn.report(apo, upper_bound=0.01)


def test_discriminant_sweep_small():
    rows = dn.discriminant_sweep((20, 24), bend_bound=100)
    assert [r["disc"] for r in rows] == [20, 24]
    assert all(0 < r["density"] < 1 for r in rows)
