import math
import os
import subprocess
import sys

import numpy as np
import pytest

from quatpack import kernels

needs_numba = pytest.mark.skipif(not kernels.HAVE_NUMBA, reason="numba unavailable")


def _sorted(a):
    return sorted(map(tuple, np.asarray(a).tolist()))


def _data(seed, n=60, dim=2):
    rng = np.random.default_rng(seed)
    return rng.random((n, dim)) * 4, rng.random(n) * 0.4


@needs_numba
@pytest.mark.parametrize("seed", range(5))
def test_near_pairs_parity(seed):
    A, rA = _data(seed)
    B, rB = _data(seed + 100)
    shifts = np.array([[0.0, 0.0], [4.0, 0.0], [-4.0, 0.0], [0.0, 4.0]])
    a = kernels._near_pairs_nb(A, rA, B, rB, shifts, 1e-7)
    b = kernels._near_pairs_np(A, rA, B, rB, shifts, 1e-7)
    assert _sorted(a) == _sorted(b)


@needs_numba
def test_power_sum_parity():
    r = np.random.default_rng(0).random(10_000) * 1e-3
    for p in (1, 2, 3, 4):
        assert math.isclose(kernels._power_sum_nb(r, float(p)), kernels._power_sum_np(r, p), rel_tol=1e-12)


@needs_numba
def test_covered_mask_parity():
    pts = np.random.default_rng(1).random((5000, 3))
    C, R = _data(2, 30, 3)
    assert (kernels._count_covered_nb(pts, C / 4, R) == kernels._count_covered_np(pts, C / 4, R)).all()


def test_power_sum_compensated():
    # many tiny terms after a large one: naive float summation drops them
    r = np.concatenate([[1.0], np.full(100_000, 1e-9)])
    assert math.isclose(kernels.power_sum(r, 1), 1.0 + 1e-4, rel_tol=1e-14)


def test_near_pairs_simple():
    A = np.array([[0.0, 0.0]])
    B = np.array([[1.0, 0.0], [3.0, 0.0]])
    got = kernels.near_pairs(A, [0.5], B, [0.5, 0.5], [[1.0, 0.0]], [[0], [-3]])
    # B_0 touches A directly, B_1 after the shift by -3
    assert _sorted(got) == [(0, 0, 0), (0, 1, 1)]
    assert len(kernels.near_pairs(A, [0.5], B[:0], [], [[1.0, 0.0]], [[0]])) == 0


def test_covered_mask_open_interior():
    m = kernels.covered_mask([[0.0, 0.0], [1.0, 0.0], [0.5, 0.0]], [[0.0, 0.0]], [1.0])
    assert m.tolist() == [True, False, True]


def test_env_switch_selects_numpy():
    env = dict(os.environ, QUATPACK_NO_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "from quatpack import kernels; print(kernels.backend())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
