"""Samplers for chordal and strip SLE(kappa;rho) driving functions.

The driving function follows Euler-Maruyama with Gaussian increments of
variance kappa*dt; force points are advanced by the exact one-step flow maps
(their trajectories are exactly the forward-map images of their seeds, which
is what the composed Loewner maps produce for the same grid).  Near a
collision the local step is halved recursively, and degenerate force points
start from a gap of 0.1*sqrt(dt) evolved by exact squared-Bessel substeps for
the first few steps, where the gap law is available in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .loewner import (
    DrivingPath,
    Geometry,
    chordal_real_step,
    strip_real_step,
    strip_top_step,
    swallow_gap_threshold,
)

__all__ = [
    "ForceSpec",
    "SleConfig",
    "ForcePointTrajectory",
    "SwallowReport",
    "detect_swallowing",
    "sample_driving",
    "sample_chordal_driving",
    "sample_strip_driving",
    "sample_rng",
]

MAX_DT = 1e-2  # coarser grids make the drift integration meaningless

_KINDS = ("real", "x+", "x-", "+inf", "-inf", "top")
_BESSEL_INIT_FACTOR = 0.1
_BESSEL_STEPS = 10
_HALVING_GAP_FACTOR = 10.0
_MIN_SUBSTEP_FRACTION = 1.0 / 64.0


@dataclass(frozen=True)
class ForceSpec:
    """One force point: its location kind, position (if any) and weight rho."""

    kind: str
    value: Optional[float]
    rho: float

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown force point kind {self.kind!r}")
        if self.kind in ("real", "top") and self.value is None:
            raise ValueError(f"{self.kind} force point needs a position")
        if self.kind in ("x+", "x-", "+inf", "-inf") and self.value is not None:
            raise ValueError(f"{self.kind} force point takes no position")

    @classmethod
    def at(cls, p: float, rho: float) -> "ForceSpec":
        return cls("real", float(p), float(rho))

    @classmethod
    def degenerate(cls, side: str, rho: float) -> "ForceSpec":
        if side not in ("+", "-"):
            raise ValueError("side must be '+' or '-'")
        return cls(f"x{side}", None, float(rho))

    @classmethod
    def at_infinity(cls, side: str, rho: float) -> "ForceSpec":
        if side not in ("+", "-"):
            raise ValueError("side must be '+' or '-'")
        return cls(f"{side}inf", None, float(rho))

    @classmethod
    def on_top(cls, x0: float, rho: float) -> "ForceSpec":
        return cls("top", float(x0), float(rho))

    @property
    def degenerate_sign(self) -> float:
        return {"x+": 1.0, "x-": -1.0}.get(self.kind, 0.0)


@dataclass(frozen=True)
class SleConfig:
    """Full specification of one SLE(kappa;rho) sampling run."""

    geometry: Geometry
    kappa: float
    start: float = 0.0
    force_points: tuple[ForceSpec, ...] = ()
    horizon: float = 1.0
    dt: float = 1e-3
    seed: int | tuple = 0

    def __post_init__(self):
        object.__setattr__(self, "force_points", tuple(self.force_points))
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        seen = set()
        n_plus = n_minus = 0
        for fp in self.force_points:
            if fp.kind == "real":
                if fp.value == self.start:
                    raise ValueError("real force point coincides with the start point")
                key = ("real", fp.value)
            elif fp.kind == "top":
                key = ("top", fp.value)
            else:
                key = (fp.kind,)
            if key in seen:
                raise ValueError(f"duplicate force point {key}")
            seen.add(key)
            if fp.kind in ("+inf", "-inf", "top") and self.geometry is not Geometry.STRIP:
                raise ValueError(f"{fp.kind} force points require strip geometry")
            if fp.kind == "x+":
                n_plus += 1
            if fp.kind == "x-":
                n_minus += 1
            if fp.kind in ("x+", "x-") and fp.rho < self.kappa / 2.0 - 2.0 - 1e-12:
                raise ValueError(
                    f"degenerate force point needs rho >= kappa/2 - 2 = {self.kappa / 2 - 2}"
                )
        if n_plus > 1 or n_minus > 1:
            raise ValueError("at most one degenerate force point per side")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))

    def rng(self) -> np.random.Generator:
        return sample_rng(self.seed)


def sample_rng(seed) -> np.random.Generator:
    """Generator for a (master_seed, sample_index) style seed."""
    return np.random.default_rng(np.random.SeedSequence(seed))


@dataclass(frozen=True)
class ForcePointTrajectory:
    """Force point trajectories on the sampled grid (real parts for R_pi points).

    `paths` has shape (n_force_points, n_times); +/-infinity points carry
    constant +/-inf rows.  `swallowed[k]` is the swallowing time or None.
    """

    paths: np.ndarray
    swallowed: tuple[Optional[float], ...]

    def gap_history(self, driving: DrivingPath, k: int) -> np.ndarray:
        return self.paths[k] - driving.values


@dataclass(frozen=True)
class SwallowReport:
    point: float
    time: Optional[float]
    terminal_gap: float


def detect_swallowing(gap: float, dt: float) -> bool:
    """True once the tracked gap falls below the one-step resolution scale."""
    if gap < 0:
        raise ValueError("gap must be nonnegative")
    return gap < swallow_gap_threshold(dt)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


class _State:
    """Mutable joint state (xi; p_1..p_N) during one sample."""

    def __init__(self, config: SleConfig):
        self.cfg = config
        self.kappa = config.kappa
        self.strip = config.geometry is Geometry.STRIP
        self.xi = config.start
        self.pos = np.empty(len(config.force_points))
        self.fixed_drift = 0.0
        root = math.sqrt(config.dt)
        for k, fp in enumerate(config.force_points):
            if fp.kind == "real":
                self.pos[k] = fp.value
            elif fp.kind == "top":
                self.pos[k] = fp.value
            elif fp.kind == "x+":
                self.pos[k] = config.start + _BESSEL_INIT_FACTOR * root
            elif fp.kind == "x-":
                self.pos[k] = config.start - _BESSEL_INIT_FACTOR * root
            else:
                self.pos[k] = math.inf if fp.kind == "+inf" else -math.inf
                # coth2(xi - (+/-inf)) = -/+1
                self.fixed_drift += (fp.rho / 2.0) * (-1.0 if fp.kind == "+inf" else 1.0)

    def drift(self) -> float:
        d = self.fixed_drift
        for k, fp in enumerate(self.cfg.force_points):
            if fp.kind in ("+inf", "-inf"):
                continue
            gap = self.xi - self.pos[k]
            if fp.kind == "top":
                d += (fp.rho / 2.0) * math.tanh(0.5 * gap)
            elif self.strip:
                d += (fp.rho / 2.0) * (1.0 / math.tanh(0.5 * gap))
            else:
                d += fp.rho / gap
        return d

    def line_mask(self) -> np.ndarray:
        """True for force points living on the driven boundary line."""
        return np.array(
            [fp.kind in ("real", "x+", "x-") for fp in self.cfg.force_points], dtype=bool
        )

    def advance(self, h: float, db: float):
        """One Euler step of size h: exact point flow, then the xi increment."""
        d = self.drift()
        for k, fp in enumerate(self.cfg.force_points):
            if fp.kind in ("+inf", "-inf"):
                continue
            gap = self.pos[k] - self.xi
            if fp.kind == "top":
                self.pos[k] = self.xi + strip_top_step(gap, h)
            elif self.strip:
                self.pos[k] = self.xi + strip_real_step(gap, h)
            else:
                self.pos[k] = self.xi + chordal_real_step(gap, h)
        self.xi += d * h + db

    def min_line_gap(self) -> float:
        mask = self.line_mask()
        if not mask.any():
            return math.inf
        return float(np.min(np.abs(self.pos[mask] - self.xi)))


def _advance_with_halving(state: _State, h: float, rng, depth_limit: float):
    """Recursively halve the step while any line gap is within 10*sqrt(dt).

    Near a collision the floor deepens past dt/64 until the substep noise is
    below a tenth of the smallest gap (otherwise Euler jumps across zero with
    O(1) probability no matter what the fixed floor is); the recursion stays
    shallow because the time spent at gap scale eps is itself O(eps^2).
    """
    gap = state.min_line_gap()
    far = gap >= _HALVING_GAP_FACTOR * math.sqrt(state.cfg.dt)
    noise_ok = state.kappa * h <= (0.1 * gap) ** 2
    hard_floor = state.cfg.dt * 2.0**-22
    if far or h <= hard_floor or (h <= depth_limit and noise_ok):
        state.advance(h, math.sqrt(state.kappa * h) * rng.standard_normal())
        return
    _advance_with_halving(state, h / 2.0, rng, depth_limit)
    _advance_with_halving(state, h / 2.0, rng, depth_limit)


def _bessel_gap_step(gap: float, rho: float, kappa: float, h: float, rng) -> float:
    """Exact one-step transition of the degenerate gap |p - xi|.

    gap/sqrt(kappa) is a Bessel process of dimension (2/kappa)(2+rho)+1; its
    square makes a squared-Bessel step, sampled through the noncentral
    chi-square transition.
    """
    dim = (2.0 / kappa) * (2.0 + rho) + 1.0
    z = gap * gap / kappa
    z = kappa * h * rng.noncentral_chisquare(dim, z / h)
    return math.sqrt(z)


def _sample(config: SleConfig) -> tuple[DrivingPath, ForcePointTrajectory]:
    if config.dt > MAX_DT:
        raise ValueError(f"dt={config.dt} rejected; the drift integration needs dt <= {MAX_DT}")
    rng = config.rng()
    n = config.n_steps
    dt = config.dt
    state = _State(config)
    thresh = swallow_gap_threshold(dt)
    fps = config.force_points
    n_fp = len(fps)

    xis = np.empty(n + 1)
    paths = np.empty((n_fp, n + 1))
    swallowed: list[Optional[float]] = [None] * n_fp
    xis[0] = state.xi
    if n_fp:
        paths[:, 0] = state.pos

    line = state.line_mask()
    degenerate = np.array([fp.kind in ("x+", "x-") for fp in fps], dtype=bool)
    # adjacency at t=0: nearest line point on each side of the start
    adjacent = np.zeros(n_fp, dtype=bool)
    if line.any():
        gaps0 = paths[:, 0] - config.start if n_fp else np.empty(0)
        for side in (1, -1):
            cand = [k for k in range(n_fp) if line[k] and side * gaps0[k] > 0]
            if cand:
                adjacent[min(cand, key=lambda k: abs(gaps0[k]))] = True

    deg_idx = -1
    if degenerate.sum() == 1 and config.geometry is Geometry.CHORDAL:
        deg_idx = int(np.nonzero(degenerate)[0][0])
    depth_limit = dt * _MIN_SUBSTEP_FRACTION
    near = _HALVING_GAP_FACTOR * math.sqrt(dt)

    stop_at = n
    for i in range(n):
        use_bessel = deg_idx >= 0 and (
            i < _BESSEL_STEPS or abs(state.pos[deg_idx] - state.xi) < near
        )
        if use_bessel:
            # exact Bessel substep for the gap (Euler overshoots across zero
            # during near-origin dips however finely it is halved), then
            # reconstruct xi; the other force points keep their exact point
            # flow against the current xi.
            fp = fps[deg_idx]
            sign = fp.degenerate_sign
            gap = abs(state.pos[deg_idx] - state.xi)
            new_gap = _bessel_gap_step(gap, fp.rho, config.kappa, dt, rng)
            incr = dt * (1.0 / gap + 1.0 / new_gap)  # trapezoid of dp = 2/gap dt
            for k in range(n_fp):
                if k == deg_idx or fps[k].kind in ("+inf", "-inf"):
                    continue
                g = state.pos[k] - state.xi
                state.pos[k] = state.xi + chordal_real_step(g, dt)
            state.pos[deg_idx] = state.pos[deg_idx] + sign * incr
            state.xi = state.pos[deg_idx] - sign * new_gap
        else:
            _advance_with_halving(state, dt, rng, depth_limit)
        xis[i + 1] = state.xi
        if n_fp:
            paths[:, i + 1] = state.pos
        # swallowing scan on boundary-line points (degenerate ones only cross)
        stop = False
        for k in range(n_fp):
            if swallowed[k] is not None or not line[k]:
                continue
            gap_prev = paths[k, i] - xis[i]
            gap_now = paths[k, i + 1] - xis[i + 1]
            crossed = gap_prev * gap_now < 0 or gap_now == 0.0
            small = abs(gap_now) < thresh and not degenerate[k]
            if crossed or small:
                swallowed[k] = (i + 1) * dt
                if adjacent[k]:
                    stop = True
        if stop:
            stop_at = i + 1
            break

    xis = xis[: stop_at + 1]
    paths = paths[:, : stop_at + 1]
    driving = DrivingPath(dt, xis, config.geometry, config.kappa)
    return driving, ForcePointTrajectory(paths, tuple(swallowed))


def sample_chordal_driving(config: SleConfig) -> tuple[DrivingPath, ForcePointTrajectory]:
    """Sample (xi, force point trajectories) for a chordal SLE(kappa;rho) run.

    Stops early at the first swallowing of a force point adjacent to the
    start (the maximal interval of the joint solution).
    """
    if config.geometry is not Geometry.CHORDAL:
        raise ValueError("config is not chordal")
    return _sample(config)


def sample_strip_driving(config: SleConfig) -> tuple[DrivingPath, ForcePointTrajectory]:
    """Strip analogue of sample_chordal_driving (coth2 drifts, R_pi and
    +/-infinity force points allowed)."""
    if config.geometry is not Geometry.STRIP:
        raise ValueError("config is not strip")
    return _sample(config)


def sample_driving(config: SleConfig) -> tuple[DrivingPath, ForcePointTrajectory]:
    if config.geometry is Geometry.CHORDAL:
        return sample_chordal_driving(config)
    return sample_strip_driving(config)
