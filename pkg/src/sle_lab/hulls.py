"""Geometric post-processing of sampled driving paths.

Swallowing times, hull extent on the real line, hull-boundary extraction via
the continuously-extended inverse map, and a box-counting dimension estimator
for the extracted polylines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .loewner import (
    Curve,
    DrivingPath,
    Geometry,
    chordal_real_step,
    inverse_map_many,
    strip_real_step,
    swallow_gap_threshold,
)
from .sde import SwallowReport

__all__ = [
    "HullExtent",
    "swallowing_time",
    "swallowing_times_batch",
    "hull_extent",
    "hull_boundary",
    "left_right_boundaries",
    "box_counting_points",
    "fit_box_counts",
    "box_counting_dimension",
    "crosscut_endpoints",
]

BISECTION_TOL = 1e-3
_BOUNDARY_INSET = 1e-4     # relative inset of the preimage interval (c, d)
_ENDPOINT_IM_TOL = 0.05    # |Im| below which a curve end counts as on R


@dataclass(frozen=True)
class HullExtent:
    """Real-line footprint [a, b] of the hull and its images (c, d) at time t."""

    a: float
    b: float
    c: float
    d: float
    t: float

    @property
    def degenerate(self) -> bool:
        return self.c == self.d


def _real_step(geometry: Geometry):
    return chordal_real_step if geometry is Geometry.CHORDAL else strip_real_step


def swallowing_times_batch(driving: DrivingPath, xs, k: int | None = None,
                           threshold: float | None = None):
    """First swallowing step for each real point in xs, within the first k steps.

    Returns (step_indices, terminal_gaps); index -1 means not swallowed.
    Points are advanced by the exact one-step flow; a sign change of the gap
    counts as swallowing as well.  `threshold` defaults to the standard
    detection level 2*sqrt(2*dt).
    """
    step = _real_step(driving.geometry)
    xis = driving.values
    dt = driving.dt
    if k is None:
        k = driving.n_steps
    thresh = swallow_gap_threshold(dt) if threshold is None else threshold
    gaps = np.asarray(xs, dtype=float) - xis[0]
    if np.any(gaps == 0.0):
        raise ValueError("tracked point coincides with the start point")
    when = np.full(gaps.shape, -1, dtype=int)
    alive = np.ones(gaps.shape, dtype=bool)
    for i in range(k):
        prev_sign = np.sign(gaps[alive])
        g = step(gaps[alive], dt) - (xis[i + 1] - xis[i])
        gaps[alive] = g
        newly = np.zeros_like(alive)
        newly[alive] = (np.abs(g) < thresh) | (np.sign(g) != prev_sign)
        when[newly] = i + 1
        alive &= ~newly
        if not alive.any():
            break
    return when, np.abs(gaps)


def swallowing_time(driving: DrivingPath, x: float) -> SwallowReport:
    """First grid time at which x enters the hull closure, if any."""
    when, gap = swallowing_times_batch(driving, [x])
    t = None if when[0] < 0 else when[0] * driving.dt
    return SwallowReport(point=float(x), time=t, terminal_gap=float(gap[0]))


def _swallowed_by(driving: DrivingPath, xs, k: int) -> np.ndarray:
    when, _ = swallowing_times_batch(driving, xs, k)
    return when >= 0


def _grid_bisect(driving: DrivingPath, k: int, lo: float, hi: float, want_swallowed_low: bool):
    """Locate the boundary of the swallowed set in (lo, hi) to BISECTION_TOL.

    `want_swallowed_low=True` means points near `lo` are swallowed (finding b);
    otherwise points near `hi` are swallowed (finding a).
    """
    for _ in range(3):
        if hi - lo <= BISECTION_TOL:
            break
        xs = np.linspace(lo, hi, 66)[1:-1]
        sw = _swallowed_by(driving, xs, k)
        if want_swallowed_low:
            idx = np.nonzero(~sw)[0]
            if idx.size == 0:
                lo = xs[-1]
                continue
            j = idx[0]
            lo, hi = (xs[j - 1], xs[j]) if j > 0 else (lo, xs[0])
        else:
            idx = np.nonzero(~sw)[0]
            if idx.size == 0:
                hi = xs[0]
                continue
            j = idx[-1]
            lo, hi = (xs[j], xs[j + 1]) if j < xs.size - 1 else (xs[-1], hi)
    return 0.5 * (lo + hi)


def _forward_real(driving: DrivingPath, x: float, k: int) -> float:
    step = _real_step(driving.geometry)
    xis = driving.values
    g = x - xis[0]
    for i in range(k):
        g = step(np.array([g]), driving.dt)[0] - (xis[i + 1] - xis[i])
    return g + xis[k]


def hull_extent(driving: DrivingPath, t: float) -> HullExtent:
    """Footprint [a, b] (by bisection on swallowing) and images (c, d).

    The swallowing detector has an intrinsic resolution of one gap threshold;
    a hull whose footprint stays below that scale (e.g. a bare slit) reports
    as degenerate.
    """
    k = driving.step_index(t)
    xi_t = driving.values[k]
    start = driving.values[0]
    # bracket: the hull lies within reach of the driving range
    lo = driving.values[: k + 1].min()
    hi = driving.values[: k + 1].max()
    pad = 2.0 * math.sqrt(max(t, driving.dt)) + 1.0
    right = hi + pad
    while _swallowed_by(driving, [right], k)[0]:
        right += pad
    left = lo - pad
    while _swallowed_by(driving, [left], k)[0]:
        left -= pad
    probe = max(BISECTION_TOL, 1.05 * swallow_gap_threshold(driving.dt))
    any_right = _swallowed_by(driving, [start + probe], k)[0]
    any_left = _swallowed_by(driving, [start - probe], k)[0]
    if not (any_right or any_left):
        return HullExtent(a=start, b=start, c=xi_t, d=xi_t, t=t)
    eps0 = BISECTION_TOL
    b = _grid_bisect(driving, k, start + eps0, right, want_swallowed_low=True) if any_right else start
    a = _grid_bisect(driving, k, left, start - eps0, want_swallowed_low=False) if any_left else start
    c = _forward_real(driving, a - BISECTION_TOL, k)
    d = _forward_real(driving, b + BISECTION_TOL, k)
    return HullExtent(a=a, b=b, c=c, d=d, t=t)


def hull_boundary(
    driving: DrivingPath, t: float, resolution: int, extent: HullExtent | None = None
) -> Curve:
    """The hull boundary f_t((c, d)) as a polyline of `resolution` points.

    Interior points are sampled uniformly in the preimage interval with a
    relative inset and a lift of i*sqrt(dt) for stability; the two end points
    are evaluated with a much smaller inset and no lift so that they land
    within O(sqrt(inset)) of a(t) and b(t).
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    if extent is None:
        extent = hull_extent(driving, t)
    if extent.degenerate:
        raise ValueError("degenerate hull has no boundary crosscut")
    c, d = extent.c, extent.d
    width = d - c
    delta = width * _BOUNDARY_INSET
    lift = 1j * math.sqrt(driving.dt)
    inner = np.linspace(c + delta, d - delta, resolution)[1:-1].astype(complex) + lift
    img = inverse_map_many(driving, inner, t)
    # feet: f extends continuously with f(c) = a, f(d) = b; the bisection
    # values are sharper than any near-foot map evaluation (the boundary
    # derivative at the feet can be arbitrarily large)
    feet_lo = complex(extent.a - BISECTION_TOL, 0.0)
    feet_hi = complex(extent.b + BISECTION_TOL, 0.0)
    return Curve(np.concatenate([[feet_lo], img, [feet_hi]]))


def left_right_boundaries(
    driving: DrivingPath, t: float, resolution: int, extent: HullExtent | None = None
) -> tuple[Curve, Curve]:
    """Boundary split at the image of the driving value.

    right = f_t on [xi(t), d), left = f_t on (c, xi(t)]; both share exactly
    the point f_t(xi(t)).
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    if extent is None:
        extent = hull_extent(driving, t)
    if extent.degenerate:
        raise ValueError("degenerate hull has no boundary crosscut")
    k = driving.step_index(t)
    xi_t = driving.values[k]
    c, d = extent.c, extent.d
    if not (c <= xi_t <= d):
        raise ValueError("driving value escaped (c, d); inconsistent extent")
    width = d - c
    delta = width * _BOUNDARY_INSET
    lift = 1j * math.sqrt(driving.dt)
    tip = complex(inverse_map_many(driving, np.array([xi_t + lift]), t)[0])
    left_pre = np.linspace(c + delta, xi_t, resolution)[1:-1].astype(complex) + lift
    right_pre = np.linspace(xi_t, d - delta, resolution)[1:-1].astype(complex) + lift
    left_img = inverse_map_many(driving, left_pre, t)
    right_img = inverse_map_many(driving, right_pre, t)
    left_foot = complex(extent.a - BISECTION_TOL, 0.0)
    right_foot = complex(extent.b + BISECTION_TOL, 0.0)
    left = Curve(np.concatenate([[left_foot], left_img, [tip]]))
    right = Curve(np.concatenate([[tip], right_img, [right_foot]]))
    return left, right


def box_counting_points(curve: Curve, n_scales: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """(log 1/s, log N(s)) at geometric scales from diameter/4 down to 4x the
    median segment length.

    The polyline is resampled at a quarter of the finest scale so segments
    cannot skip boxes, and top-edge samples are clamped into the last box
    row/column.
    """
    pts = curve.points
    if pts.size < 100:
        raise ValueError("curve too short for a dimension estimate (need >= 100 points)")
    if n_scales < 3:
        raise ValueError("need at least 3 scales")
    seg = np.abs(np.diff(pts))
    med = float(np.median(seg[seg > 0]))
    diam = float(max(np.ptp(pts.real), np.ptp(pts.imag)))
    s_max = diam / 4.0
    s_min = 4.0 * med
    if not s_min < s_max:
        raise ValueError("degenerate scale range; curve resolution too coarse")
    scales = np.exp(np.linspace(math.log(s_max), math.log(s_min), n_scales))
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.arange(0.0, arc[-1], scales[-1] / 4.0)
    xr = np.interp(targets, arc, pts.real)
    yr = np.interp(targets, arc, pts.imag)
    x0, y0 = xr.min(), yr.min()
    x_span, y_span = xr.max() - x0, yr.max() - y0
    log_n = np.empty(n_scales)
    for j, s in enumerate(scales):
        hi_x = max(int(math.ceil(x_span / s - 1e-12)) - 1, 0)
        hi_y = max(int(math.ceil(y_span / s - 1e-12)) - 1, 0)
        bx = np.minimum(np.floor((xr - x0) / s).astype(np.int64), hi_x)
        by = np.minimum(np.floor((yr - y0) / s).astype(np.int64), hi_y)
        log_n[j] = math.log(np.unique(bx + (by << 32)).size)
    return np.log(1.0 / scales), log_n


def fit_box_counts(log_inv_s: np.ndarray, log_n: np.ndarray) -> tuple[float, float]:
    """Least-squares slope and its standard error for box-count data."""
    design = np.vstack([log_inv_s, np.ones_like(log_inv_s)]).T
    coef, *_ = np.linalg.lstsq(design, log_n, rcond=None)
    resid = log_n - design @ coef
    denom = float(np.sum((log_inv_s - log_inv_s.mean()) ** 2))
    stderr = math.sqrt(float(resid @ resid) / (log_inv_s.size - 2) / denom)
    return float(coef[0]), stderr


def box_counting_dimension(curve: Curve, n_scales: int = 8) -> tuple[float, float]:
    """Box-counting slope of the polyline over geometric scales.

    Returns (slope, stderr-of-slope from the regression residuals).
    """
    xlog, log_n = box_counting_points(curve, n_scales)
    return fit_box_counts(xlog, log_n)


def crosscut_endpoints(curve: Curve) -> tuple[float, float]:
    """Real-line endpoints of a crosscut polyline, in curve orientation order."""
    pts = curve.points
    if pts.size < 2:
        raise ValueError("curve has no distinct endpoints")
    first, last = pts[0], pts[-1]
    if abs(first.imag) >= _ENDPOINT_IM_TOL or abs(last.imag) >= _ENDPOINT_IM_TOL:
        raise ValueError("curve endpoints do not reach the boundary line")
    return float(first.real), float(last.real)
