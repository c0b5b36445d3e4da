"""Deterministic Loewner machinery for the half-plane and the strip.

The flow is discretized on a uniform time grid with the driving function held
constant within each step.  Both geometries then admit closed-form elementary
maps per step, so the composed forward map is a true conformal map of the
slit domain and the only discretization error is the piecewise-constant
driving itself:

  half-plane:  phi_h(z) = xi + sqrt((z - xi)^2 + 4h)
  strip:       psi_h(z) = xi + 2 acosh(e^{h/2} cosh((z - xi)/2))

(The strip form follows from d/dt cosh((psi - xi)/2) = cosh((psi - xi)/2)/2
along d/dt psi = coth((psi - xi)/2).)  Inverse steps use the same formulas
with the opposite time sign, composed in reverse order.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Geometry",
    "DrivingPath",
    "TracePath",
    "Curve",
    "Swallowed",
    "swallow_gap_threshold",
    "elementary_slit_map",
    "chordal_forward_map",
    "chordal_inverse_map",
    "chordal_trace",
    "strip_forward_map",
    "strip_inverse_map",
    "strip_trace",
    "capacity",
]

# A point is treated as swallowed once its image sits within this multiple of
# sqrt(dt) of the driving value: one step's displacement scale, below which
# continued evolution is numerically meaningless.
_SWALLOW_GAP_FACTOR = 2.0 * math.sqrt(2.0)


class Geometry(enum.Enum):
    CHORDAL = "chordal"
    STRIP = "strip"


@dataclass(frozen=True)
class Swallowed:
    """Marker value: the queried point entered the hull at grid time `time`."""

    time: float


@dataclass(frozen=True)
class DrivingPath:
    """Driving function sampled on the uniform grid t_i = i*dt.

    `values[0]` is the start point of the process; `kappa` is carried as
    metadata only.
    """

    dt: float
    values: np.ndarray
    geometry: Geometry = Geometry.CHORDAL
    kappa: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("driving values must be a non-empty 1-d array")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not np.all(np.isfinite(vals)):
            raise ValueError("driving values must be finite")

    @property
    def n_steps(self) -> int:
        return self.values.size - 1

    @property
    def horizon(self) -> float:
        return self.n_steps * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.values.size)

    def step_index(self, t: float) -> int:
        """Map a grid time onto its index, rejecting off-grid times."""
        k = int(round(t / self.dt))
        if k < 0 or k > self.n_steps or abs(t - k * self.dt) > 1e-9 * max(self.dt, 1.0):
            raise ValueError(f"time {t} is not on the grid (dt={self.dt}, horizon={self.horizon})")
        return k

    def truncated(self, k: int) -> "DrivingPath":
        """First k steps as a new path."""
        if not 0 <= k <= self.n_steps:
            raise ValueError("truncation index out of range")
        return DrivingPath(self.dt, self.values[: k + 1].copy(), self.geometry, self.kappa)


@dataclass(frozen=True)
class TracePath:
    """Trace points gamma(t_i)/beta(t_i) on the grid."""

    times: np.ndarray
    points: np.ndarray
    geometry: Geometry

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        points = np.asarray(self.points, dtype=complex)
        if times.shape != points.shape:
            raise ValueError("times and points must have equal length")
        if points.size == 0:
            raise ValueError("empty trace")
        if abs(points[0].imag) > 1e-12:
            raise ValueError("trace must start on the boundary")
        if np.min(points.imag) < -1e-9:
            raise ValueError("trace left the upper half-plane")
        if self.geometry is Geometry.STRIP and np.max(points.imag) > np.pi + 1e-9:
            raise ValueError("strip trace left the strip")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "points", points)


@dataclass(frozen=True)
class Curve:
    """Open polyline (consecutive duplicates removed on construction)."""

    points: np.ndarray
    closed: bool = field(default=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex)
        if pts.size == 0:
            raise ValueError("empty curve")
        if pts.size > 1:
            keep = np.concatenate([[True], np.abs(np.diff(pts)) > 0])
            pts = pts[keep]
        object.__setattr__(self, "points", pts)


def swallow_gap_threshold(dt: float) -> float:
    return _SWALLOW_GAP_FACTOR * math.sqrt(dt)


# ---------------------------------------------------------------------------
# branch helpers
# ---------------------------------------------------------------------------

def _sqrt_uhp(u, side=None):
    """sqrt with image in the closed upper half-plane.

    Real-axis ties are broken by `side` (sign array: +1 approaches from the
    right of the driving value), defaulting to the right limit.
    """
    s = np.sqrt(np.asarray(u, dtype=complex))
    s = np.where(s.imag < 0.0, -s, s)
    tie = (s.imag == 0.0) & (s.real != 0.0)
    if np.any(tie):
        want = np.sign(side.real) if side is not None else 1.0
        flip = tie & (np.sign(s.real) != want)
        s = np.where(flip, -s, s)
    return s


def _acosh_halfstrip(v, side=None):
    """acosh with image in {0 <= Im <= pi/2}, both signs of Re allowed.

    numpy's principal branch lands in {Re >= 0}; conjugate-symmetric inputs
    are fixed up by negation (cosh(-u) = cosh(u)).  Ties on (1, inf) resolve
    to the right limit unless `side` says otherwise.
    """
    u = np.arccosh(np.asarray(v, dtype=complex))
    u = np.where(u.imag < 0.0, -u, u)
    tie = (u.imag == 0.0) & (u.real != 0.0)
    if np.any(tie):
        want = np.sign(side.real) if side is not None else 1.0
        flip = tie & (np.sign(u.real) != want)
        u = np.where(flip, -u, u)
    return u


# ---------------------------------------------------------------------------
# elementary maps
# ---------------------------------------------------------------------------

def _chordal_step(w, xi, dt):
    """Forward slit map for one step of size dt at driving value xi."""
    u = np.asarray(w, dtype=complex) - xi
    return xi + _sqrt_uhp(u * u + 4.0 * dt, side=u)


def _chordal_step_inv(w, xi, dt):
    u = np.asarray(w, dtype=complex) - xi
    return xi + _sqrt_uhp(u * u - 4.0 * dt, side=u)


def _strip_step(w, xi, dt):
    u = 0.5 * (np.asarray(w, dtype=complex) - xi)
    v = np.exp(0.5 * dt) * np.cosh(u)
    return xi + 2.0 * _acosh_halfstrip(v, side=u)


def _strip_step_inv(w, xi, dt):
    u = 0.5 * (np.asarray(w, dtype=complex) - xi)
    v = np.exp(-0.5 * dt) * np.cosh(u)
    return xi + 2.0 * _acosh_halfstrip(v, side=u)


# exact one-step updates for points pinned to a boundary line (kept real to
# preserve the line exactly):  R      : w' = coth2(w),  cosh invariant
#                              R + pi : X' = tanh2(X),  sinh invariant
_REAL_ASYMPTOTE = 60.0


def strip_real_step(g, dt):
    """One forward step of the gap g = x - xi for a point x on R, xi fixed."""
    g = np.asarray(g, dtype=float)
    out = np.empty_like(g)
    big = np.abs(g) > _REAL_ASYMPTOTE
    out[big] = g[big] + np.sign(g[big]) * dt
    sml = ~big
    out[sml] = np.sign(g[sml]) * 2.0 * np.arccosh(np.exp(0.5 * dt) * np.cosh(0.5 * g[sml]))
    return out


def strip_top_step(X, dt):
    """One forward step of X = Re psi(t, x + i*pi) - xi for fixed xi."""
    X = np.asarray(X, dtype=float)
    out = np.empty_like(X)
    big = np.abs(X) > _REAL_ASYMPTOTE
    out[big] = X[big] + np.sign(X[big]) * dt
    sml = ~big
    out[sml] = 2.0 * np.arcsinh(np.exp(0.5 * dt) * np.sinh(0.5 * X[sml]))
    return out


def strip_top_step_derivative(X, X_next, dt):
    """d X_next / d X for strip_top_step (used as a boundary-distance probe)."""
    return np.exp(0.5 * dt) * np.cosh(0.5 * X) / np.cosh(0.5 * X_next)


def chordal_real_step(g, dt):
    """One forward step of the gap g = x - xi for a real point, xi fixed."""
    g = np.asarray(g, dtype=float)
    return np.sign(g) * np.sqrt(g * g + 4.0 * dt)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def elementary_slit_map(xi0: float, delta_t: float, z: complex) -> complex:
    """Image of z under the slit map of duration delta_t driven at xi0.

    Raises ValueError if z lies strictly inside the removed slit segment
    {xi0 + iy : 0 <= y < 2 sqrt(delta_t)} (the tip has a unique image and is
    mapped normally).
    """
    if delta_t < 0:
        raise ValueError("delta_t must be nonnegative")
    z = complex(z)
    if z.imag < -1e-12:
        raise ValueError("z must lie in the closed upper half-plane")
    if delta_t == 0.0:
        return z
    tip = 2.0 * math.sqrt(delta_t)
    rel = abs(z.real - xi0)
    if rel <= 1e-12 * max(1.0, abs(xi0), tip) and z.imag < tip * (1.0 - 1e-12):
        raise ValueError("point lies on the removed slit (swallowed)")
    return complex(_chordal_step(z, xi0, delta_t))


def _validate(driving: DrivingPath, geometry: Geometry):
    if driving.geometry is not geometry:
        raise ValueError(f"driving path has geometry {driving.geometry}, expected {geometry}")


def _forward_many(driving: DrivingPath, z, k: int, step):
    """Composed forward map over steps [0, k), with swallowing masks."""
    xis = driving.values
    dt = driving.dt
    thresh = swallow_gap_threshold(dt)
    im_tol = math.sqrt(dt)
    w = np.atleast_1d(np.asarray(z, dtype=complex)).copy()
    alive = np.ones(w.shape, dtype=bool)
    when = np.full(w.shape, -1)
    for i in range(k):
        gap = np.abs(w - xis[i])
        hit = alive & (gap < thresh) & (w.imag < im_tol)
        when[hit] = i
        alive &= ~hit
        if alive.any():
            w[alive] = step(w[alive], xis[i], dt)
    return w, alive, when


def chordal_forward_map(driving: DrivingPath, z: complex, t: float):
    """phi(t, z), or Swallowed(t*) if z enters the hull before t."""
    _validate(driving, Geometry.CHORDAL)
    k = driving.step_index(t)
    w, alive, when = _forward_many(driving, z, k, _chordal_step)
    if not alive[0]:
        return Swallowed(when[0] * driving.dt)
    return complex(w[0])


def strip_forward_map(driving: DrivingPath, z: complex, t: float):
    """psi(t, z), or Swallowed(t*).  Points with Im z == pi stay on R_pi exactly."""
    _validate(driving, Geometry.STRIP)
    k = driving.step_index(t)
    z = complex(z)
    if z.imag == np.pi:
        X = np.array([z.real])
        for i in range(k):
            X = strip_top_step(X - driving.values[i], driving.dt) + driving.values[i]
        return complex(X[0], np.pi)
    w, alive, when = _forward_many(driving, z, k, _strip_step)
    if not alive[0]:
        return Swallowed(when[0] * driving.dt)
    return complex(w[0])


def _inverse_many(driving: DrivingPath, w, k: int, step_inv):
    xis = driving.values
    dt = driving.dt
    z = np.atleast_1d(np.asarray(w, dtype=complex)).copy()
    for i in range(k - 1, -1, -1):
        z = step_inv(z, xis[i], dt)
    return z


def chordal_inverse_map(driving: DrivingPath, w: complex, t: float) -> complex:
    """f_t(w) = phi(t,.)^{-1}(w), extended continuously to the boundary."""
    _validate(driving, Geometry.CHORDAL)
    k = driving.step_index(t)
    if np.imag(w) < -1e-12:
        raise ValueError("w must lie in the closed upper half-plane")
    return complex(_inverse_many(driving, w, k, _chordal_step_inv)[0])


def strip_inverse_map(driving: DrivingPath, w: complex, t: float) -> complex:
    _validate(driving, Geometry.STRIP)
    k = driving.step_index(t)
    w = complex(w)
    if w.imag == np.pi:
        X = np.array([w.real])
        for i in range(k - 1, -1, -1):
            X = strip_top_step(X - driving.values[i], -driving.dt) + driving.values[i]
        return complex(X[0], np.pi)
    return complex(_inverse_many(driving, w, k, _strip_step_inv)[0])


def inverse_map_many(driving: DrivingPath, w, t: float) -> np.ndarray:
    """Vectorized f_t over an array of points (geometry from the driving)."""
    k = driving.step_index(t)
    if driving.geometry is Geometry.CHORDAL:
        return _inverse_many(driving, w, k, _chordal_step_inv)
    return _inverse_many(driving, w, k, _strip_step_inv)


def _trace(driving: DrivingPath, eps: float, step_inv) -> np.ndarray:
    xis = driving.values
    n = driving.n_steps
    dt = driving.dt
    pts = np.empty(n + 1, dtype=complex)
    pts[0] = xis[0]
    if n:
        w = xis[1:].astype(complex) + 1j * eps
        for i in range(n - 1, -1, -1):
            w[i:] = step_inv(w[i:], xis[i], dt)
        pts[1:] = w
    pts.imag = np.maximum(pts.imag, 0.0)
    return pts


def chordal_trace(driving: DrivingPath, eps: float | None = None) -> TracePath:
    """gamma(t_i) ~ f_{t_i}(xi(t_i) + i*eps) for every grid time.

    eps defaults to sqrt(dt), the per-step slit-tip height.  Cost is O(n^2)
    elementary maps (no caching of partial compositions).
    """
    _validate(driving, Geometry.CHORDAL)
    if eps is None:
        eps = math.sqrt(driving.dt)
    if not eps > 0:
        raise ValueError("eps must be positive")
    pts = _trace(driving, eps, _chordal_step_inv)
    return TracePath(driving.times, pts, Geometry.CHORDAL)


def strip_trace(driving: DrivingPath, eps: float | None = None) -> TracePath:
    """beta(t_i) ~ f_{t_i}(xi(t_i) + i*eps) for every grid time."""
    _validate(driving, Geometry.STRIP)
    if eps is None:
        eps = math.sqrt(driving.dt)
    if not eps > 0:
        raise ValueError("eps must be positive")
    pts = _trace(driving, eps, _strip_step_inv)
    pts.imag = np.minimum(pts.imag, np.pi)
    return TracePath(driving.times, pts, Geometry.STRIP)


def trace(driving: DrivingPath, eps: float | None = None) -> TracePath:
    if driving.geometry is Geometry.CHORDAL:
        return chordal_trace(driving, eps)
    return strip_trace(driving, eps)


def capacity(driving: DrivingPath, t: float) -> float:
    """Half-plane capacity 2t (chordal) or strip capacity t."""
    driving.step_index(t)
    if driving.geometry is Geometry.CHORDAL:
        return 2.0 * t
    return float(t)
