"""Fermat spiral points sqrt(n) * e^(2*pi*i*alpha*n) at arbitrary index.

Positions are produced with certified error bounds.  Window enumeration runs
a fast double-double filter over the annulus of candidate indices (the only
indices that can fall in a ball, since |x_n| = sqrt(n)) and then certifies
every candidate with interval arithmetic, so windows are complete.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from mpmath import iv, mp

from .errors import InvalidSpec, PrecisionExhausted, WindowTooLarge
from .number_theory import (
    AngleSpec,
    QuadraticAngle,
    RationalAngle,
    _iv_of,
    _quad_floor,
    largest_denominator_at_most,
)

PREC_PAD = 96  # default evaluation bits beyond bits(n)
_ANCHOR_PREC = 220
_FILTER_SLACK = 1e-6  # float-filter inclusion margin, certified away later
_SPLIT = 134217729.0  # 2^27 + 1, Dekker splitter


# ---------------------------------------------------------------------------
# exact fractional parts of alpha * n
# ---------------------------------------------------------------------------

def _frac_exact(alpha: AngleSpec, n: int):
    """Tagged exact representation of frac(alpha * n) in [0, 1)."""
    if isinstance(alpha, RationalAngle):
        return ("frac", Fraction((alpha.num * n) % alpha.den, alpha.den))
    if isinstance(alpha, QuadraticAngle):
        e, f, g = alpha.a * n, alpha.b * n, alpha.c
        fl = _quad_floor(e, f, g, alpha.d)
        return ("quad", e - fl * g, f, g, alpha.d)
    lo, hi = alpha.bounds_fraction()
    lo, hi = lo * n, hi * n
    flo, fhi = math.floor(lo), math.floor(hi)
    if flo != fhi:
        raise PrecisionExhausted(
            f"frac({alpha.canonical()} * {n}) straddles an integer; literal too coarse"
        )
    return ("ivl", lo - flo, hi - flo)


def default_prec(n: int) -> int:
    return max(int(n).bit_length(), 1) + PREC_PAD


def angle_fraction(alpha: AngleSpec, n: int, prec: int | None = None):
    """frac(alpha * n) as an arbitrary-precision real with certified error.

    Returns (value, error_bound); the bound is <= 2^-64 or PrecisionExhausted
    is raised.
    """
    if n < 0:
        raise InvalidSpec("index must be nonnegative")
    working = prec if prec is not None else default_prec(n)
    x = _iv_of(_frac_exact(alpha, n), working)
    err = float(mp.mpf(x.delta) / 2)
    if err > 2.0**-64:
        raise PrecisionExhausted(f"frac(alpha*{n}) certified only to {err:.3e}")
    with mp.workprec(working + 16):
        val = (mp.mpf(x.a) + mp.mpf(x.b)) / 2
        if val >= 1:
            val -= 1
        if val < 0:
            val += 1
    return val, err


# ---------------------------------------------------------------------------
# single points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpiralPoint:
    """Planar spiral point with a certified bound on the exported floats."""

    n: int
    x: float
    y: float
    error_bound: float

    @property
    def position(self):
        return (self.x, self.y)


def _position_iv(alpha: AngleSpec, n: int, prec: int):
    """Interval position of x_n at the given working precision."""
    old = iv.prec
    iv.prec = prec
    try:
        theta = _iv_of(_frac_exact(alpha, n), prec)
        ang = 2 * iv.pi * theta
        r = iv.sqrt(iv.mpf(n))
        return r * iv.cos(ang), r * iv.sin(ang)
    finally:
        iv.prec = old


def spiral_point(alpha: AngleSpec, n: int, prec: int | None = None) -> SpiralPoint:
    """x_n = sqrt(n) e^(2 pi i alpha n), exported as float64 with error bound."""
    if n < 0:
        raise InvalidSpec("index must be nonnegative")
    working = prec if prec is not None else default_prec(n)
    xi, yi = _position_iv(alpha, n, working)
    x = float(mp.mpf(xi.a) + mp.mpf(xi.b)) / 2
    y = float(mp.mpf(yi.a) + mp.mpf(yi.b)) / 2
    # interval width plus float64 quantization of the exported coordinates
    err = float(mp.mpf(xi.delta) + mp.mpf(yi.delta)) / 2
    quant = max(abs(x), abs(y)) * 2.0**-52
    return SpiralPoint(n=n, x=x, y=y, error_bound=err + quant)


# ---------------------------------------------------------------------------
# double-double angle kernel
# ---------------------------------------------------------------------------

def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _two_prod(a, b):
    p = a * b
    ta = _SPLIT * a
    ahi = ta - (ta - a)
    alo = a - ahi
    tb = _SPLIT * b
    bhi = tb - (tb - b)
    blo = b - bhi
    return p, ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo


def _dd_split(value) -> tuple[float, float]:
    """Split a high-precision real into a double-double pair."""
    hi = float(value)
    lo = float(value - mp.mpf(hi))
    return hi, lo


def _frac_mid(alpha: AngleSpec, n: int, prec: int = _ANCHOR_PREC):
    x = _iv_of(_frac_exact(alpha, n), prec)
    with mp.workprec(prec + 16):
        return (mp.mpf(x.a) + mp.mpf(x.b)) / 2


class _AngleKernel:
    """Per-angle cache of double-double data for vectorized windows."""

    def __init__(self, alpha: AngleSpec):
        self.alpha = alpha
        with mp.workprec(_ANCHOR_PREC):
            self.delta_dd = _dd_split(_frac_mid(alpha, 1))

    def theta_dd_at(self, n: int):
        with mp.workprec(_ANCHOR_PREC):
            return _dd_split(_frac_mid(self.alpha, n))

    def frac_array(self, n_anchor: int, k: np.ndarray):
        """frac(alpha * (n_anchor + k)) as a double-double array pair."""
        thi, tlo = self.theta_dd_at(n_anchor)
        dhi, dlo = self.delta_dd
        kf = k.astype(np.float64)
        ph, pl = _two_prod(kf, dhi)
        q = kf * dlo
        sh, sl = _two_sum(ph, thi)
        lo = sl + (pl + q) + tlo
        rh, rl = _two_sum(sh, lo)
        f = rh - np.floor(rh)
        fh, fl = _two_sum(f, rl)
        total = fh + fl
        fh = np.where(total < 0, fh + 1.0, fh)
        fh = np.where(total >= 1.0, fh - 1.0, fh)
        return fh, fl


def _signed_angle_gap(fh, fl, chi, clo):
    """Wrap (theta - theta_c) to [-1/2, 1/2) turns, returned as float64."""
    dh = fh - chi  # rounding <= 2^-53 absolute on [0,1) operands
    dl = fl - clo
    d = dh + dl
    d = np.where(d >= 0.5, d - 1.0, d)
    d = np.where(d < -0.5, d + 1.0, d)
    return d


# ---------------------------------------------------------------------------
# windows
# ---------------------------------------------------------------------------

@dataclass
class IndexWindow:
    """All spiral indices whose points lie in a closed ball."""

    center: tuple
    radius: float
    indices: np.ndarray
    n_min: int

    def __len__(self):
        return len(self.indices)


def _annulus_bounds(rc_low, rc_high, radius: float, n_min: int):
    lo = max(rc_low - radius, 0.0) ** 2
    hi = (rc_high + radius) ** 2
    n_lo = max(n_min, int(math.floor(lo)) - 1)
    n_hi = int(math.ceil(hi)) + 1
    return n_lo, n_hi


def _filter_candidates(kernel: _AngleKernel, rc: float, theta_c, radius: float,
                       n_lo: int, n_hi: int, chunk: int = 1 << 20):
    """Annulus scan; returns indices passing the float filter with slack."""
    chi, clo = theta_c
    keep = []
    limit2 = (radius + _FILTER_SLACK) ** 2
    for start in range(n_lo, n_hi + 1, chunk):
        stop = min(start + chunk, n_hi + 1)
        k = np.arange(0, stop - start, dtype=np.int64)
        fh, fl = kernel.frac_array(start, k)
        ns = np.arange(start, stop, dtype=np.int64)
        rn = np.sqrt(ns.astype(np.float64))
        dtheta = _signed_angle_gap(fh, fl, chi, clo)
        s = np.sin(np.pi * dtheta)
        d2 = (rn - rc) ** 2 + 4.0 * rn * rc * s * s
        mask = d2 <= limit2
        if mask.any():
            keep.append(ns[mask])
    if keep:
        return np.concatenate(keep)
    return np.empty(0, dtype=np.int64)


def _fast_offsets(kernel: _AngleKernel, alpha: AngleSpec, cand: np.ndarray,
                  n_center: int, radius: float, prec: int):
    """Vectorized recentered offsets with a conservative analytic error bound.

    Angles come from the double-double kernel (error < 2^-69 turns); offsets
    are assembled in the frame rotated to the center's angle, where every term
    is O(window) so float64 keeps the absolute error near sqrt(n) * 2^-52.
    Membership within a thin shell of the boundary is settled by interval
    arithmetic; everything else is decided by the filter values outright.
    """
    if len(cand) == 0:
        return cand, np.empty((0, 2)), np.empty(0)
    theta_c = kernel.theta_dd_at(n_center)
    with mp.workprec(_ANCHOR_PREC):
        tc = _frac_mid(alpha, n_center)
        ex = float(mp.cos(2 * mp.pi * tc))
        ey = float(mp.sin(2 * mp.pi * tc))
    rc = math.sqrt(float(n_center))
    anchor = int(cand[0])
    fh, fl = kernel.frac_array(anchor, cand - anchor)
    dtheta = _signed_angle_gap(fh, fl, theta_c[0], theta_c[1])
    rn = np.sqrt(cand.astype(np.float64))
    ang = 2.0 * np.pi * dtheta
    dxr = rn * np.cos(ang) - rc
    dyr = rn * np.sin(ang)
    dist = np.hypot(dxr, dyr)
    shell = 1e-7
    # angle conversion (2^-53 turns) plus trig and product rounding, all O(rn)
    err = max(rn.max(), 64.0) * 2.0**-48
    inside = dist <= radius - shell
    boundary = np.abs(dist - radius) < shell
    if boundary.any():
        cx_iv, cy_iv = _position_iv(alpha, n_center, prec)
        extra, _, _ = _certify_members(
            alpha, cand[boundary], cx_iv, cy_iv, radius, prec
        )
        inside |= np.isin(cand, extra)
    kept = cand[inside]
    dx = dxr[inside] * ex - dyr[inside] * ey
    dy = dxr[inside] * ey + dyr[inside] * ex
    # the recentered center itself is exactly the origin
    at_center = kept == n_center
    dx[at_center] = 0.0
    dy[at_center] = 0.0
    return kept, np.column_stack([dx, dy]), np.full(len(kept), err)


def _iv_abs_square(v):
    """Interval of v^2; plain interval multiplication can dip below zero."""
    s = v * v
    lo, hi = mp.mpf(s.a), mp.mpf(s.b)
    zero = mp.mpf(0)
    return iv.mpf([max(lo, zero), max(hi, zero)])


def _certify_members(alpha: AngleSpec, candidates, cx_iv, cy_iv, radius: float, prec: int):
    """Interval re-check of candidates; returns kept indices and offsets."""
    old = iv.prec
    iv.prec = prec
    try:
        r_iv = iv.mpf(mp.mpf(radius))
        kept, xs, ys, errs = [], [], [], []
        for m in candidates.tolist():
            xi, yi = _position_iv(alpha, m, prec)
            dx = xi - cx_iv
            dy = yi - cy_iv
            dist = iv.sqrt(_iv_abs_square(dx) + _iv_abs_square(dy))
            if dist.a > r_iv.b:
                continue
            if not dist.b <= r_iv.a:
                raise PrecisionExhausted(
                    f"membership of n={m} undecidable at radius {radius}"
                )
            x = float(mp.mpf(dx.a) + mp.mpf(dx.b)) / 2
            y = float(mp.mpf(dy.a) + mp.mpf(dy.b)) / 2
            err = float(mp.mpf(dx.delta) + mp.mpf(dy.delta)) / 2 + (abs(x) + abs(y)) * 2.0**-52
            kept.append(m)
            xs.append(x)
            ys.append(y)
            errs.append(err)
        return (
            np.asarray(kept, dtype=np.int64),
            np.column_stack([xs, ys]) if kept else np.empty((0, 2)),
            np.asarray(errs),
        )
    finally:
        iv.prec = old


def indices_in_ball(alpha: AngleSpec, center, radius: float, *,
                    n_min: int = 1, max_candidates: int = 20_000_000) -> IndexWindow:
    """Exactly the indices n >= n_min with |x_n - center| <= radius."""
    if radius <= 0:
        raise InvalidSpec("radius must be positive")
    cx, cy = float(center[0]), float(center[1])
    rc = math.hypot(cx, cy)
    if cx == 0.0 and cy == 0.0:
        # |x_n| = sqrt(n) exactly, so membership is the integer test n <= r^2
        n_hi_exact = math.floor(Fraction(radius) ** 2)
        if n_hi_exact - n_min > max_candidates:
            raise WindowTooLarge(
                f"ball holds ~{n_hi_exact - n_min} indices (> {max_candidates})"
            )
        idx = np.arange(n_min, n_hi_exact + 1, dtype=np.int64)
        return IndexWindow(center=(0.0, 0.0), radius=radius, indices=idx, n_min=n_min)
    n_lo, n_hi = _annulus_bounds(rc, rc, radius, n_min)
    if n_hi - n_lo > max_candidates:
        raise WindowTooLarge(
            f"annulus holds ~{n_hi - n_lo} candidate indices (> {max_candidates})"
        )
    kernel = _AngleKernel(alpha)
    with mp.workprec(_ANCHOR_PREC):
        theta_c = _dd_split(mp.atan2(cy, cx) / (2 * mp.pi) % 1)
    cand = _filter_candidates(kernel, rc, theta_c, radius, n_lo, n_hi)
    prec = default_prec(max(n_hi, 1))
    old = iv.prec
    iv.prec = prec
    try:
        cx_iv, cy_iv = iv.mpf(cx), iv.mpf(cy)
    finally:
        iv.prec = old
    kept, _, _ = _certify_members(alpha, cand, cx_iv, cy_iv, radius, prec)
    return IndexWindow(center=(cx, cy), radius=radius, indices=kept, n_min=n_min)


def recentered_window(alpha: AngleSpec, n_center: int, radius: float, *,
                      n_min: int = 1, max_candidates: int = 20_000_000,
                      method: str = "interval"):
    """Complete window around x_{n_center}, recentered there.

    Returns (IndexWindow, offsets, per-point error bounds); offsets are
    x_m - x_{n_center} as float64 rows, certified to the returned bounds.
    ``method`` picks per-point interval certification ("interval") or the
    vectorized float path with an analytic bound ("fast", for dense windows).
    """
    if radius <= 0:
        raise InvalidSpec("radius must be positive")
    if n_center < n_min:
        raise InvalidSpec("center index below n_min")
    rc_sq = float(n_center)
    rc = math.sqrt(rc_sq)
    n_lo, n_hi = _annulus_bounds(rc, rc, radius + 1e-9, n_min)
    if n_hi - n_lo > max_candidates:
        raise WindowTooLarge(
            f"annulus holds ~{n_hi - n_lo} candidate indices (> {max_candidates})"
        )
    kernel = _AngleKernel(alpha)
    theta_c = kernel.theta_dd_at(n_center)
    cand = _filter_candidates(kernel, rc, theta_c, radius, n_lo, n_hi)
    prec = default_prec(n_hi)
    if method == "fast":
        kept, offsets, errs = _fast_offsets(kernel, alpha, cand, n_center, radius, prec)
    else:
        cx_iv, cy_iv = _position_iv(alpha, n_center, prec)
        kept, offsets, errs = _certify_members(alpha, cand, cx_iv, cy_iv, radius, prec)
    center = spiral_point(alpha, n_center, prec)
    win = IndexWindow(center=(center.x, center.y), radius=radius, indices=kept, n_min=n_min)
    return win, offsets, errs


def offset_between(alpha: AngleSpec, m: int, n: int, prec: int | None = None):
    """x_m - x_n as float64 with a certified error bound."""
    working = prec if prec is not None else default_prec(max(m, n))
    xm, ym = _position_iv(alpha, m, working)
    xn, yn = _position_iv(alpha, n, working)
    dx, dy = xm - xn, ym - yn
    x = float(mp.mpf(dx.a) + mp.mpf(dx.b)) / 2
    y = float(mp.mpf(dy.a) + mp.mpf(dy.b)) / 2
    err = float(mp.mpf(dx.delta) + mp.mpf(dy.delta)) / 2 + (abs(x) + abs(y)) * 2.0**-52
    return x, y, err


# ---------------------------------------------------------------------------
# nearest neighbours
# ---------------------------------------------------------------------------

def nearest_neighbor(alpha: AngleSpec, n: int, *, n_min: int = 1):
    """Brute-force nearest neighbour of x_n over the shrinking annulus.

    Returns (m, distance) minimizing |x_m - x_n| over m != n, m >= n_min;
    ties break toward smaller m.  The enumeration annulus is seeded by the
    distance to x_{n-q} for the largest convergent denominator q <= sqrt(n),
    which is an upper bound containing every possible competitor.
    """
    if n < max(2, n_min + 1):
        raise InvalidSpec("need an index with at least one smaller-index competitor")
    q = largest_denominator_at_most(alpha, max(1, math.isqrt(n))).q
    if n - q < n_min:
        q = 1
    p0 = spiral_point(alpha, n)
    p1 = spiral_point(alpha, n - q)
    r0 = math.hypot(p0.x - p1.x, p0.y - p1.y) * (1 + 1e-12) + 1e-9
    kernel = _AngleKernel(alpha)
    theta_c = kernel.theta_dd_at(n)
    rc = math.sqrt(float(n))
    n_lo, n_hi = _annulus_bounds(rc, rc, r0, n_min)
    m, d = _argmin_distance(kernel, alpha, n, rc, theta_c, n_lo, n_hi, r0)
    return m, d


def _argmin_distance(kernel, alpha, n, rc, theta_c, n_lo, n_hi, r0):
    chi, clo = theta_c
    ns = np.arange(n_lo, n_hi + 1, dtype=np.int64)
    k = ns - n_lo
    fh, fl = kernel.frac_array(n_lo, k)
    rn = np.sqrt(ns.astype(np.float64))
    dtheta = _signed_angle_gap(fh, fl, chi, clo)
    s = np.sin(np.pi * dtheta)
    d2 = (rn - rc) ** 2 + 4.0 * rn * rc * s * s
    d2[ns == n] = np.inf
    best = int(np.argmin(d2))
    best_d = math.sqrt(float(d2[best]))
    # competitors within float noise of the minimum; settle exactly
    near = ns[d2 <= (best_d + 2e-9) ** 2]
    if len(near) > 1:
        prec = default_prec(int(ns[-1]))
        x0, y0 = _position_iv(alpha, n, prec)
        old = iv.prec
        iv.prec = prec
        dists = []
        try:
            for m in near.tolist():
                xi, yi = _position_iv(alpha, m, prec)
                dx, dy = xi - x0, yi - y0
                dist = iv.sqrt(_iv_abs_square(dx) + _iv_abs_square(dy))
                dists.append((mp.mpf(dist.a), m))
        finally:
            iv.prec = old
        dists.sort(key=lambda t: (t[0], t[1]))
        return int(dists[0][1]), float(dists[0][0])
    return int(ns[best]), best_d
