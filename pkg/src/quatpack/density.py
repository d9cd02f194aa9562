"""Cell volumes, partial densities, bend-count exponent fits and the zeta-series model."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from . import kernels
from .orders import (ConsistencyError, CoveringData, dagger_discriminant, field_discriminant,
                     gram_of, squarefree_part)
from .packing import PackingCensus

EPS = 2.0 ** -52


class Unfittable(ValueError):
    pass


def ball_volume_const(k: int) -> float:
    """Volume of the unit ball in R^k."""
    return math.pi ** (k / 2) / math.gamma(k / 2 + 1)


# ---------------------------------------------------------------- cell volume

@dataclass(frozen=True)
class CellVolume:
    squared: Fraction

    @property
    def value(self) -> float:
        return math.sqrt(self.squared)

    def __float__(self):
        return self.value

    def __str__(self):
        return f"sqrt({self.squared})"


def cell_volume_sq_gram(cover: CoveringData) -> Fraction:
    """det of the norm form on R(Z)+: the squared Euclidean covolume."""
    import sympy
    G = gram_of(list(cover.order.plus_basis))
    return Fraction(str(sympy.Matrix(G).det()))


def order_disc(cover: CoveringData) -> int:
    """|disc(R(Z))|: the field discriminant in dim 3, discrd^2 for quaternion orders."""
    sig = cover.sig
    if sig.dim == 3:
        return abs(field_discriminant(squarefree_part(-int(Fraction(sig.a)))))
    return int(cover.order.discrd) ** 2


def cell_volume_sq_closed(cover: CoveringData) -> Fraction:
    dim = cover.sig.dim
    D = order_disc(cover)
    if dim == 3:
        return Fraction(D, 4)
    if dim == 4:
        return Fraction(D, 4 * dagger_discriminant(cover.sig))
    return Fraction(D, 16)


def cell_volume(cover: CoveringData) -> CellVolume:
    g = cell_volume_sq_gram(cover)
    c = cell_volume_sq_closed(cover)
    if g != c:
        raise ConsistencyError(f"covolume mismatch: Gram {g} vs closed form {c}")
    return CellVolume(g)


# ---------------------------------------------------------------- partial density

@dataclass
class DensityPoint:
    bend: int
    count: int
    density: float
    error: float          # bound on float accumulation error

    def to_json(self):
        return {"bend": self.bend, "count": self.count, "density": self.density, "error": self.error}


def _interior_volumes(census: PackingCensus, bends: np.ndarray) -> np.ndarray:
    k = census.frame.r            # ambient dimension n - 1
    radii = math.sqrt(census.N) / bends.astype(float)
    return ball_volume_const(k) * radii ** k


def partial_density(census: PackingCensus, thresholds=None, vol: CellVolume | None = None) -> list[DensityPoint]:
    """Covered fraction of the cell by census spheres with normalized bend <= T, for each T.

    Radii are exact up to one rounding (sqrt(N)/bend); sums are compensated and
    each entry carries an accumulation error bound.
    """
    if census.kind != "apollonian" or not census.planes:
        raise ValueError("partial density needs an Apollonian census (super-packing spheres overlap)")
    vol = vol or cell_volume(census.cover)
    bends = np.array(sorted(abs(s[0]) for s in census.non_planes() if abs(s[0]) <= census.bend_bound),
                     dtype=np.int64)
    if thresholds is None:
        thresholds = sorted(set(bends.tolist()))
        if len(thresholds) > 40:
            idx = np.unique(np.geomspace(1, len(thresholds), 40).astype(int) - 1)
            thresholds = [thresholds[i] for i in idx]
        if not thresholds or thresholds[-1] != census.bend_bound:
            thresholds.append(census.bend_bound)
    k = census.frame.r
    out = []
    for T in sorted(thresholds):
        sel = bends[bends <= T]
        if len(sel) == 0:
            out.append(DensityPoint(int(T), 0, 0.0, 0.0))
            continue
        radii = math.sqrt(census.N) / sel.astype(float)
        s = kernels.power_sum(radii, k)
        dens = ball_volume_const(k) * s / vol.value
        # per-term rounding (sqrt, division, power) plus the compensated sum
        err = dens * (k + 4) * EPS + len(sel) * EPS * EPS * dens
        out.append(DensityPoint(int(T), int(len(sel)), dens, err))
    return out


def superpacking_series(census: PackingCensus, vol: CellVolume | None = None) -> float:
    """Volume sum over positive-bend super-packing representatives, over the cell volume.

    Super-packing spheres overlap, so this can exceed 1; it is reported next to
    the Apollonian density because the zeta series is phrased over this orbit.
    """
    vol = vol or cell_volume(census.cover)
    bends = np.array([s[0] for s in census.non_planes() if 0 < s[0] <= census.bend_bound], dtype=np.int64)
    if len(bends) == 0:
        return 0.0
    k = census.frame.r
    return ball_volume_const(k) * kernels.power_sum(math.sqrt(census.N) / bends.astype(float), k) / vol.value


# ---------------------------------------------------------------- exponent fit

@dataclass
class AlphaFit:
    alpha: float
    stderr: float
    window: tuple
    residual: float
    points: int
    halves: tuple          # slopes on the lower and upper half of the window
    lam: int = 1

    @property
    def band(self):
        return (self.alpha - 2 * self.stderr, self.alpha + 2 * self.stderr)

    @property
    def stable(self) -> bool:
        lo, hi = self.halves
        return abs(lo - hi) <= max(0.1, 4 * self.stderr)

    def to_json(self):
        return {"alpha": self.alpha, "stderr": self.stderr, "band": list(self.band),
                "window": list(self.window), "residual": self.residual, "points": self.points,
                "half_window_slopes": list(self.halves), "stable": self.stable, "lambda": self.lam}


def _slope(x, y):
    A = np.vstack([x, np.ones_like(x)]).T
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    pred = A @ coef
    r = y - pred
    n = len(x)
    s2 = float(r @ r) / max(1, n - 2)
    sxx = float(((x - x.mean()) ** 2).sum())
    se = math.sqrt(s2 / sxx) if sxx > 0 else math.inf
    return float(coef[0]), se, math.sqrt(s2)


def fit_counts(bends, counts, lam: int = 1, min_points: int = 10) -> AlphaFit:
    """Fit log N(T) = (alpha/lam) log T + c, N the cumulative count.

    Candidate windows are [T_max / 2^j, T_max] for growing j.  The widest
    window whose two halves give matching slopes is kept.
    """
    b = np.asarray(bends, dtype=float)
    c = np.asarray(counts, dtype=float)
    order = np.argsort(b)
    b, c = b[order], c[order]
    if len(b) < min_points:
        raise Unfittable(f"only {len(b)} distinct bends")
    cum = np.cumsum(c)
    x, y = np.log(b), np.log(cum)
    hi = b[-1]
    best = None
    for j in range(1, 40):
        lo = hi / 2 ** j
        if lo < b[0]:
            break
        m = b >= lo
        if m.sum() < min_points:
            continue
        slope, se, res = _slope(x[m], y[m])
        mid = math.sqrt(lo * hi)
        m1, m2 = m & (b <= mid), m & (b >= mid)
        if m1.sum() < 3 or m2.sum() < 3:
            continue
        h1, _, _ = _slope(x[m1], y[m1])
        h2, _, _ = _slope(x[m2], y[m2])
        fit = AlphaFit(slope * lam, se * lam, (float(lo), float(hi)), res, int(m.sum()),
                       (h1 * lam, h2 * lam), lam)
        if best is None or fit.stable:
            best = fit
        if not fit.stable and best.stable:
            break
    if best is None:
        raise Unfittable("no window with enough points")
    return best


def bend_census_fit(census: PackingCensus, lam: int = 1) -> AlphaFit:
    counts = census.bend_counts
    pos = {k: v for k, v in counts.items() if k > 0}
    return fit_counts(list(pos), list(pos.values()), lam)


def bend_step(census: PackingCensus) -> int:
    """gcd of the normalized bends in the census (2^l in the series when a power of 2)."""
    g = 0
    for s in census.non_planes():
        g = math.gcd(g, abs(s[0]))
    return g


# ---------------------------------------------------------------- zeta-series model

def density_model(cover: CoveringData, alpha: float, l: int = 0, lam: int = 1,
                  variant: str = "corrected", vol: CellVolume | None = None) -> float:
    """Series prediction for the density divided by the unknown constant c(Gamma_u).

    ``literal`` uses the volume factor pi^(n/2)/Gamma(n/2+1) and 2^(-l(2-a/lam));
    ``corrected`` uses the (n-1)-ball volume and 2^(-l(n-a/lam)), which is what the
    sum over radii sqrt(N)/(2^l k) actually produces.
    """
    n = cover.sig.dim
    N = cover.nrm_u
    s = alpha / lam
    if n - s <= 1:
        raise ValueError("zeta argument must exceed 1")
    z = float(mpmath.zeta(n - s))
    vol = vol or cell_volume(cover)
    if variant == "literal":
        pref = math.pi ** (n / 2) / math.gamma(n / 2 + 1) * 2.0 ** (-l * (2 - s))
    elif variant == "corrected":
        pref = ball_volume_const(n - 1) * 2.0 ** (-l * (n - s))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return pref * N ** ((n - s) / 2) * z / alpha / vol.value


# ---------------------------------------------------------------- report

@dataclass
class DensityReport:
    cover: CoveringData
    cell_volume: CellVolume
    partial_density: list
    upper_bound: float | None = None
    alpha_fit: AlphaFit | None = None
    zeta_model_prediction: dict = field(default_factory=dict)
    superpacking_series: float | None = None
    provenance: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def density(self) -> float:
        return self.partial_density[-1].density if self.partial_density else 0.0

    def check_invariants(self):
        ds = [p.density for p in self.partial_density]
        if any(b + 1e-15 < a for a, b in zip(ds, ds[1:])):
            raise ConsistencyError("partial density not monotone")
        top = self.upper_bound if self.upper_bound is not None else 1.0
        if ds and not (0 <= ds[-1] <= top + self.partial_density[-1].error):
            raise ConsistencyError(f"partial density {ds[-1]} exceeds bound {top}")

    def to_json(self):
        return {"cover": self.cover.to_json(),
                "cell_volume": {"squared": str(self.cell_volume.squared), "value": self.cell_volume.value},
                "partial_density": [p.to_json() for p in self.partial_density],
                "upper_bound": self.upper_bound,
                "alpha_fit": None if self.alpha_fit is None else self.alpha_fit.to_json(),
                "zeta_model_prediction": self.zeta_model_prediction,
                "superpacking_series": self.superpacking_series,
                "provenance": self.provenance, "notes": self.notes}


def report(apollonian: PackingCensus, superpacking: PackingCensus | None = None,
           upper_bound: float | None = None, lam: int = 1) -> DensityReport:
    cover = apollonian.cover
    vol = cell_volume(cover)
    table = partial_density(apollonian, vol=vol)
    rep = DensityReport(cover, vol, table, upper_bound)
    rep.provenance = {"bend_bound": apollonian.bend_bound, "depth": apollonian.depth,
                      "saturated": apollonian.saturated, "spheres": len(apollonian.non_planes())}
    try:
        rep.alpha_fit = bend_census_fit(apollonian, lam)
    except Unfittable as e:
        rep.notes.append(f"alpha fit skipped: {e}")
    step = bend_step(apollonian)
    rep.provenance["bend_step"] = step
    if rep.alpha_fit is not None:
        l = (step & -step).bit_length() - 1 if step else 0
        rep.zeta_model_prediction = {
            "l": l, "scale": "c(Gamma_u), unknown",
            "corrected": density_model(cover, rep.alpha_fit.alpha, l, lam, "corrected", vol),
            "literal": density_model(cover, rep.alpha_fit.alpha, l, lam, "literal", vol)}
    if superpacking is not None:
        rep.superpacking_series = superpacking_series(superpacking, vol)
    rep.check_invariants()
    return rep


def discriminant_sweep(discs=(20, 24, 40, 52, 68, 88), bend_bound: int = 400):
    """Partial density at a common bend bound across dim-3 orders (reported, not asserted)."""
    from .orders import quadratic_cover
    from .packing import enumerate_apollonian
    rows = []
    for d in discs:
        m = d // 4 if d % 4 == 0 else d
        cen = enumerate_apollonian(quadratic_cover(m), bend_bound)
        pd = partial_density(cen)
        rows.append({"disc": d, "density": pd[-1].density, "spheres": pd[-1].count})
    return rows
