"""Float kernels used for screening and sums.

numba-compiled when available; set QUATPACK_NO_NUMBA=1 to force the numpy
versions.  Kernel results only ever feed screens or float estimates: every
geometric decision made from them is re-checked exactly by the caller.
"""
from __future__ import annotations

import math
import os

import numpy as np

_DISABLED = os.environ.get("QUATPACK_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    HAVE_NUMBA = False


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"


# ---------------------------------------------------------------- numpy versions

def _near_pairs_np(A, rA, B, rB, shifts, tol):
    out = []
    for k in range(len(shifts)):
        moved = B + shifts[k]
        diff = A[:, None, :] - moved[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        lim = (rA[:, None] + rB[None, :] + tol) ** 2
        ii, jj = np.nonzero(d2 <= lim)
        for i, j in zip(ii.tolist(), jj.tolist()):
            out.append((i, j, k))
    return np.array(out, dtype=np.int64).reshape(-1, 3)


def _power_sum_np(radii, p):
    return math.fsum((radii ** p).tolist())


def _count_covered_np(points, centers, radii):
    hit = np.zeros(len(points), dtype=np.bool_)
    step = max(1, 2_000_000 // max(1, len(centers)))
    for s in range(0, len(points), step):
        P = points[s:s + step]
        d2 = ((P[:, None, :] - centers[None, :, :]) ** 2).sum(-1)
        hit[s:s + step] = (d2 < radii[None, :] ** 2).any(1)
    return hit


# ---------------------------------------------------------------- numba versions

if HAVE_NUMBA:

    @njit(cache=True)
    def _near_pairs_nb(A, rA, B, rB, shifts, tol):
        n, d = A.shape
        nb = B.shape[0]
        m = shifts.shape[0]
        cap = 1024
        out = np.empty((cap, 3), dtype=np.int64)
        cnt = 0
        for k in range(m):
            for i in range(n):
                for j in range(nb):
                    s = 0.0
                    for a in range(d):
                        t = A[i, a] - B[j, a] - shifts[k, a]
                        s += t * t
                    lim = rA[i] + rB[j] + tol
                    if s <= lim * lim:
                        if cnt == cap:
                            cap *= 2
                            new = np.empty((cap, 3), dtype=np.int64)
                            new[:cnt] = out[:cnt]
                            out = new
                        out[cnt, 0] = i
                        out[cnt, 1] = j
                        out[cnt, 2] = k
                        cnt += 1
        return out[:cnt]

    @njit(cache=True)
    def _power_sum_nb(radii, p):
        # Neumaier compensated summation
        s = 0.0
        c = 0.0
        for x in radii:
            v = x ** p
            t = s + v
            if abs(s) >= abs(v):
                c += (s - t) + v
            else:
                c += (v - t) + s
            s = t
        return s + c

    @njit(cache=True)
    def _count_covered_nb(points, centers, radii):
        n, d = points.shape
        m = centers.shape[0]
        hit = np.zeros(n, dtype=np.bool_)
        for i in range(n):
            for j in range(m):
                s = 0.0
                for a in range(d):
                    t = points[i, a] - centers[j, a]
                    s += t * t
                if s < radii[j] * radii[j]:
                    hit[i] = True
                    break
        return hit


# ---------------------------------------------------------------- public entry points

def near_pairs(A, rA, B, rB, shift_basis, shift_coords, tol: float = 1e-7):
    """Index triples (i, j, k) with |A_i - B_j - w_k| <= rA_i + rB_j + tol,
    where w_k = shift_coords[k] @ shift_basis."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    B = np.ascontiguousarray(B, dtype=np.float64)
    rA = np.ascontiguousarray(rA, dtype=np.float64)
    rB = np.ascontiguousarray(rB, dtype=np.float64)
    sc = np.asarray(shift_coords, dtype=np.float64)
    sb = np.asarray(shift_basis, dtype=np.float64)
    if sc.size == 0 or sb.size == 0:
        shifts = np.zeros((1, A.shape[1]))
    else:
        shifts = np.ascontiguousarray(sc.reshape(len(shift_coords), -1) @ sb)
    if len(A) == 0 or len(B) == 0:
        return np.zeros((0, 3), dtype=np.int64)
    if HAVE_NUMBA:
        return _near_pairs_nb(A, rA, B, rB, shifts, tol)
    return _near_pairs_np(A, rA, B, rB, shifts, tol)


def candidate_pairs(centers, radii, shift_basis, shift_coords, tol: float = 1e-7):
    """Pairs of balls from one family that may touch or overlap after a shift."""
    return near_pairs(centers, radii, centers, radii, shift_basis, shift_coords, tol)


def power_sum(radii, p: int) -> float:
    radii = np.ascontiguousarray(radii, dtype=np.float64)
    if HAVE_NUMBA:
        return float(_power_sum_nb(radii, float(p)))
    return _power_sum_np(radii, p)


def covered_mask(points, centers, radii):
    """Boolean mask: point lies in the open interior of some ball."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    centers = np.ascontiguousarray(centers, dtype=np.float64)
    radii = np.ascontiguousarray(radii, dtype=np.float64)
    if len(centers) == 0:
        return np.zeros(len(points), dtype=np.bool_)
    if HAVE_NUMBA:
        return _count_covered_nb(points, centers, radii)
    return _count_covered_np(points, centers, radii)
