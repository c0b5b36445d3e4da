"""Named Monte Carlo experiments.

Each experiment is deterministic given (seed, parameters): per-sample RNG
streams are derived from (seed, sample_index), so neither chunking nor the
thread count can change the result.  Reports normalize multi-part checks
into a single statistic with threshold 1.0 where needed; raw statistics are
kept in `extras`.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import boundary_flow as bflow
from .density import (
    DensitySpec,
    limit_scale_function,
    right_escape_probability,
    theoretical_endpoint_density,
)
from .hulls import (
    box_counting_points,
    crosscut_endpoints,
    fit_box_counts,
    hull_boundary,
    hull_extent,
    swallowing_times_batch,
)
from .loewner import (
    Curve,
    DrivingPath,
    Geometry,
    _chordal_step_inv,
    chordal_trace,
    strip_top_step,
    swallow_gap_threshold,
)
from .stats import (
    ExperimentReport,
    ks_statistic,
    ks_threshold_one_sample,
    ks_threshold_two_sample,
)

__all__ = [
    "density_experiment",
    "mixture_experiment",
    "duality_boundary_experiment",
    "limit_classification_experiment",
    "scaling_invariance_test",
    "dimension_experiment",
    "sample_rng",
]

ESCAPE_RE_THRESHOLD = 8.0
DEFAULT_CHUNK = 128


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Per-sample stream independent of execution order and thread count."""
    return np.random.default_rng(np.random.SeedSequence((seed, index)))


def _chunk_ranges(n: int, size: int):
    return [(lo, min(size, n - lo)) for lo in range(0, n, size)]


def _run_chunks(fn, chunks, threads: int):
    if threads <= 1 or len(chunks) <= 1:
        return [fn(*c) for c in chunks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda c: fn(*c), chunks))


# ---------------------------------------------------------------------------
# increment generators (vectorized across a chunk of samples)
# ---------------------------------------------------------------------------


def _two_inf_increments(kappa, sigma, dt, n, seed, lo, count, stream_offset=0):
    """d xi for strip SLE with force points only at +/-infinity."""
    root = math.sqrt(kappa * dt)
    rows = [root * sample_rng(seed, stream_offset + lo + k).standard_normal(n) for k in range(count)]
    return np.stack(rows) + sigma * dt


def _top_point_increments(kappa, sigma, rho_top, x0, dt, n, seed, lo, count,
                          stream_offset=0, draw_x0=None, anchors=()):
    """d xi for strip SLE with +/-infinity points plus one R_pi force point.

    x0 may be a scalar or per-sample array; alternatively draw_x0(rng) draws
    it from the per-sample stream (used by the mixture experiment so that the
    whole sample is a function of one stream).  `anchors` are passive real
    points whose swallowing is tracked as physical-reach evidence.
    Returns (dxi, x0_used, X_final, anchor_swallowed).
    """
    root = math.sqrt(kappa * dt)
    dxi = np.empty((count, n))
    zs = np.empty((count, n))
    x0_used = np.empty(count)
    for k in range(count):
        rng = sample_rng(seed, stream_offset + lo + k)
        x0_used[k] = draw_x0(rng) if draw_x0 is not None else np.broadcast_to(x0, (count,))[k]
        zs[k] = rng.standard_normal(n)
    X = x0_used.copy()
    anchors = np.asarray(anchors, dtype=float)
    gaps = np.tile(anchors, (count, 1))
    swallowed = np.zeros_like(gaps, dtype=bool)
    thresh = swallow_gap_threshold(dt)
    e_half = math.exp(0.5 * dt)
    for i in range(n):
        inc = root * zs[:, i] + (sigma + (rho_top / 2.0) * np.tanh(-0.5 * X)) * dt
        X = strip_top_step(X, dt) - inc
        dxi[:, i] = inc
        if anchors.size:
            live = ~swallowed
            g = gaps[live]
            g = np.sign(g) * 2.0 * np.arccosh(e_half * np.cosh(0.5 * g))
            g -= np.broadcast_to(inc[:, None], gaps.shape)[live]
            flipped = np.sign(g) != np.sign(gaps[live])
            gaps[live] = g
            newly = np.zeros_like(swallowed)
            newly[live] = (np.abs(g) < thresh) | flipped
            swallowed |= newly
    return dxi, x0_used, X, swallowed


def _chordal_tips(xis: np.ndarray, dt: float, eps: float) -> np.ndarray:
    """f_T(xi(T) + i*eps) per row of xis (shape (S, n+1)), T = n*dt."""
    n = xis.shape[1] - 1
    w = xis[:, n] + 1j * eps
    for i in range(n - 1, -1, -1):
        w = _chordal_step_inv(w, xis[:, i], dt)
    return w


# ---------------------------------------------------------------------------
# endpoint density
# ---------------------------------------------------------------------------


def density_experiment(
    kappa: float,
    rho_plus: float,
    rho_minus: float,
    n_samples: int,
    dt: float = 1e-3,
    horizon: float = 40.0,
    seed: int = 0,
    threads: int = 1,
    approach_tol: float = 0.02,
) -> ExperimentReport:
    """One-sample KS of the simulated top-boundary endpoint against the law.

    Samples strip SLE(kappa; rho+, rho-) from (0; +inf, -inf) and locates the
    point where the hull first closes on R_pi (approach proxy `approach_tol`,
    measured through the boundary-derivative probe).  Samples that never
    approach by the horizon are excluded and counted; more than 5% of them
    invalidates the run.
    """
    t0 = time.time()
    spec = DensitySpec(kappa, rho_plus, rho_minus)
    law = theoretical_endpoint_density(spec)
    n_steps = int(round(horizon / dt))
    half_width = float(max(bflow.COARSE_HALF_WIDTH, abs(law.quantile(1e-4)) + 8, abs(law.quantile(1 - 1e-4)) + 8))

    def work(lo, count):
        dxi = _two_inf_increments(kappa, spec.sigma, dt, n_steps, seed, lo, count)
        return bflow.locate_top_boundary_pinch(dxi, dt, approach_tol=approach_tol, half_width=half_width)

    reports = [r for chunk in _run_chunks(work, _chunk_ranges(n_samples, DEFAULT_CHUNK), threads) for r in chunk]
    hits = np.array([r.location for r in reports if r.pinched])
    times = np.array([r.detect_time for r in reports if r.pinched])
    n_fail = n_samples - hits.size
    fail_frac = n_fail / n_samples
    stat = ks_statistic(hits, law.cdf) if hits.size >= 30 else math.inf
    if fail_frac > 0.05:
        stat = math.inf
    thr = ks_threshold_one_sample(max(hits.size, 1))
    return ExperimentReport(
        name="density",
        parameters={
            "kappa": kappa,
            "rho_plus": rho_plus,
            "rho_minus": rho_minus,
            "n_samples": n_samples,
            "dt": dt,
            "horizon": horizon,
            "approach_tol": approach_tol,
        },
        statistic=float(stat),
        threshold=thr,
        n_samples=n_samples,
        passed=bool(stat < thr),
        seed=seed,
        runtime=time.time() - t0,
        extras={
            "n_used": int(hits.size),
            "n_failed_to_approach": int(n_fail),
            "failed_fraction": float(fail_frac),
            "endpoint_mean": float(hits.mean()) if hits.size else math.nan,
            "approach_time_median": float(np.median(times)) if times.size else math.nan,
            "endpoints": hits,
            "approach_times": times,
        },
    )


# ---------------------------------------------------------------------------
# mixture identity
# ---------------------------------------------------------------------------


def mixture_experiment(
    kappa: float,
    rho_plus: float,
    rho_minus: float,
    t0: float = 0.5,
    n_samples: int = 2000,
    dt: float = 1e-3,
    horizon: float = 40.0,
    seed: int = 0,
    threads: int = 1,
    endpoint_tol: float = 0.1,
) -> ExperimentReport:
    """Two-sample KS between xi(t0) under the direct law and under the mixture.

    Arm A: strip SLE(kappa; rho+, rho-) from (0; +inf, -inf).  Arm B: draw x
    from the endpoint density, then run strip SLE(kappa; -4, rho-+2, rho++2)
    from (0; x+i*pi, +inf, -inf).  Also checks the A-vs-A control and that
    arm-B traces approach R_pi within `endpoint_tol` of their conditioned
    endpoint for >= 90% of samples.
    """
    t_start = time.time()
    spec = DensitySpec(kappa, rho_plus, rho_minus)
    law = theoretical_endpoint_density(spec)
    k0 = int(round(t0 / dt))
    if k0 * dt > horizon:
        raise ValueError("t0 exceeds the horizon")
    n_steps = int(round(horizon / dt))
    half_width = float(
        max(bflow.COARSE_HALF_WIDTH, abs(law.quantile(1e-4)) + 8, abs(law.quantile(1 - 1e-4)) + 8)
    )

    def work_a(lo, count, offset):
        dxi = _two_inf_increments(kappa, spec.sigma, dt, k0, seed, lo, count, stream_offset=offset)
        return dxi.sum(axis=1)

    def work_b(lo, count):
        dxi, x0s, _, _ = _top_point_increments(
            kappa, -spec.sigma, -4.0, None, dt, n_steps, seed, lo, count,
            stream_offset=2 * n_samples, draw_x0=lambda rng: float(law.sample(rng, 1)[0]),
        )
        xi_t0 = dxi[:, :k0].sum(axis=1)
        reports = bflow.locate_top_boundary_pinch(dxi, dt, approach_tol=0.02, half_width=half_width)
        hit = np.array([abs(r.location - x0s[j]) <= endpoint_tol if r.pinched else False for j, r in enumerate(reports)])
        return xi_t0, hit

    chunks = _chunk_ranges(n_samples, DEFAULT_CHUNK)
    a_main = np.concatenate(_run_chunks(lambda lo, c: work_a(lo, c, 0), chunks, threads))
    a_ctrl = np.concatenate(_run_chunks(lambda lo, c: work_a(lo, c, n_samples), chunks, threads))
    b_parts = _run_chunks(work_b, chunks, threads)
    b_main = np.concatenate([p[0] for p in b_parts])
    b_hits = np.concatenate([p[1] for p in b_parts])

    thr = ks_threshold_two_sample(n_samples, n_samples)
    ks_main = ks_statistic(a_main, b_main)
    ks_ctrl = ks_statistic(a_main, a_ctrl)
    endpoint_frac = float(b_hits.mean())
    stat = max(ks_main / thr, ks_ctrl / thr, (1.0 - endpoint_frac) / 0.10)
    return ExperimentReport(
        name="mixture",
        parameters={
            "kappa": kappa,
            "rho_plus": rho_plus,
            "rho_minus": rho_minus,
            "t0": t0,
            "n_samples": n_samples,
            "dt": dt,
            "horizon": horizon,
            "endpoint_tol": endpoint_tol,
        },
        statistic=float(stat),
        threshold=1.0,
        n_samples=n_samples,
        passed=bool(stat < 1.0),
        seed=seed,
        runtime=time.time() - t_start,
        extras={
            "ks_direct_vs_mixture": ks_main,
            "ks_control": ks_ctrl,
            "ks_threshold": thr,
            "endpoint_within_tol_fraction": endpoint_frac,
            "direct_samples": a_main,
            "mixture_samples": b_main,
        },
    )


# ---------------------------------------------------------------------------
# duality of hull boundaries at swallowing times
# ---------------------------------------------------------------------------


@dataclass
class _DualitySample:
    t_swallow: float
    y: float
    z: float
    tip_re: float
    near_edge: float
    curve: Curve


def _pocket_near_edge(driving: DrivingPath, k: int, b_hat: float, x: float) -> float:
    """Lower edge of the footprint band swallowed in the final driving jump.

    At a swallowing time of x the last jump sweeps the whole pocket beyond x
    at once, so the bisection edge b overshoots; the pocket's near edge (the
    first point of the contiguous final-step band, scanned downward from b)
    recovers the crosscut end at x.
    """
    span = max(0.3 * abs(x), 4.0 * (b_hat - abs(x)), 0.1)
    lo = max(abs(x) * 0.3, b_hat - span)
    grid = np.linspace(lo, b_hat, 256) * math.copysign(1.0, x)
    when, _ = swallowing_times_batch(driving, grid, k)
    if x < 0:
        grid, when = grid[::-1], when[::-1]
    edge = b_hat
    for j in range(when.size - 1, -1, -1):
        if when[j] == k:
            edge = abs(grid[j])
        elif when[j] >= 0:
            break
    return math.copysign(edge, x)


def _standard_driving_until_swallow(kappa, x, dt, horizon, seed, lo, count):
    """Simulate standard chordal driving per sample until x is swallowed.

    Extends in stages so undecided samples do not pay for the full horizon
    up front.  Returns per-sample (xis array or None if not swallowed, step).
    """
    stages = [horizon / 8, horizon / 4, horizon / 2, horizon]
    root = math.sqrt(kappa * dt)
    out: list[tuple[np.ndarray | None, int]] = []
    thresh = swallow_gap_threshold(dt)
    for k in range(count):
        rng = sample_rng(seed, lo + k)
        xis = np.zeros(1)
        gap = float(x)
        hit_step = -1
        for stage in stages:
            target = int(round(stage / dt))
            incr = root * rng.standard_normal(target - (xis.size - 1))
            new = np.concatenate([xis, xis[-1] + np.cumsum(incr)])
            start = xis.size - 1
            for i in range(start, target):
                prev_sign = math.copysign(1.0, gap)
                gap = math.copysign(math.sqrt(gap * gap + 4.0 * dt), gap) - (new[i + 1] - new[i])
                if abs(gap) < thresh or math.copysign(1.0, gap) != prev_sign:
                    hit_step = i + 1
                    break
            xis = new
            if hit_step >= 0:
                break
        out.append((xis, hit_step))
    return out


def duality_boundary_experiment(
    kappa: float,
    x: float = 1.0,
    n_samples: int = 500,
    dt: float = 1e-4,
    horizon: float = 20.0,
    resolution: int = 128,
    seed: int = 0,
    threads: int = 1,
    magnitude_tol: float = 0.02,
    near_tol: float = 0.05,
) -> ExperimentReport:
    """Crosscut structure of the hull boundary at the swallowing time of x.

    For kappa in (4,8): the boundary of K(T_x) must run from a point y with
    sign(y) = sign(x), |y| > |x| (within `magnitude_tol`), to a point z with
    sign(z) = -sign(x); additionally the law of y is compared against the law
    of Re gamma(T_x).  For kappa >= 8 the near endpoint must lie within
    `near_tol` of x.  Statistic: violating fraction of decided samples,
    threshold 2%.
    """
    if kappa <= 4:
        raise ValueError("duality requires kappa > 4")
    if x == 0:
        raise ValueError("x must be nonzero")
    t_start = time.time()

    def work(lo, count):
        sims = _standard_driving_until_swallow(kappa, x, dt, horizon, seed, lo, count)
        res = []
        for xis, hit in sims:
            if hit < 0:
                res.append(None)
                continue
            driving = DrivingPath(dt, xis[: hit + 1], Geometry.CHORDAL, kappa)
            t_sw = hit * dt
            ext = hull_extent(driving, t_sw)
            if ext.degenerate:
                res.append(None)
                continue
            curve = hull_boundary(driving, t_sw, resolution, extent=ext)
            z_end, y_end = crosscut_endpoints(curve)
            if x < 0:
                y_end, z_end = z_end, y_end
            tip = _chordal_tips(xis[None, : hit + 1], dt, dt)[0]
            near = _pocket_near_edge(driving, hit, y_end, x) if kappa >= 8 else math.nan
            res.append(_DualitySample(t_sw, y_end, z_end, float(tip.real), near, curve))
        return res

    parts = _run_chunks(work, _chunk_ranges(n_samples, 64), threads)
    samples = [s for chunk in parts for s in chunk]
    decided = [s for s in samples if s is not None]
    n_undecided = sum(1 for s in samples if s is None)
    if not decided:
        raise RuntimeError("no sample swallowed x before the horizon")
    ys = np.array([s.y for s in decided])
    zs = np.array([s.z for s in decided])
    tips = np.array([s.tip_re for s in decided])
    sgn = math.copysign(1.0, x)
    if kappa < 8:
        bad = (np.sign(ys) != sgn) | (np.abs(ys) <= abs(x) - magnitude_tol) | (np.sign(zs) != -sgn)
        ks_y = ks_statistic(ys, tips) if ys.size >= 30 else math.nan
        ks_thr = ks_threshold_two_sample(ys.size, tips.size)
    else:
        # space-filling regime: the crosscut's near end is x itself,
        # estimated by the near edge of the final-jump pocket
        nears = np.array([s.near_edge for s in decided])
        bad = np.abs(nears - x) > near_tol
        ks_y = math.nan
        ks_thr = math.nan
    frac = float(bad.mean())
    stat = frac / 0.02
    if kappa < 8 and not math.isnan(ks_y):
        stat = max(stat, ks_y / ks_thr)
    return ExperimentReport(
        name="duality",
        parameters={
            "kappa": kappa,
            "x": x,
            "n_samples": n_samples,
            "dt": dt,
            "horizon": horizon,
            "resolution": resolution,
        },
        statistic=float(stat),
        threshold=1.0,
        n_samples=n_samples,
        passed=bool(stat < 1.0),
        seed=seed,
        runtime=time.time() - t_start,
        extras={
            "violating_fraction": frac,
            "n_decided": len(decided),
            "n_horizon_exceeded": n_undecided,
            "ks_y_vs_tip": ks_y,
            "ks_threshold": ks_thr,
            "y_endpoints": ys,
            "z_endpoints": zs,
            "tip_re": tips,
            "near_edges": np.array([s.near_edge for s in decided]),
            "swallow_times": np.array([s.t_swallow for s in decided]),
            "curves": [s.curve for s in decided],
        },
    )


# ---------------------------------------------------------------------------
# trace-limit classification for three-force-point strip processes
# ---------------------------------------------------------------------------

_CASE_INTERVALS = {1: "I1", 2: "I2", 3: "I3"}


def _rho_case(kappa: float, rho: float) -> int:
    if rho >= kappa / 2.0 - 2.0:
        return 1
    if rho > kappa / 2.0 - 4.0:
        return 2
    return 3


def limit_classification_experiment(
    kappa: float,
    rho_plus: float,
    rho_minus: float,
    p0_re: float = 0.0,
    horizon: float = 40.0,
    n_samples: int = 400,
    dt: float = 1e-3,
    seed: int = 0,
    threads: int = 1,
    hit_tol: float = 0.05,
    p0_tol: float = 0.1,
) -> ExperimentReport:
    """Terminal classification of strip SLE(kappa; rho+, rho-, rho0) traces
    started from (0; +inf, -inf, p0), rho0 = kappa - 6 - rho+ - rho-.

    Categories: converged_p0, hit_left, hit_right, escaped_minus,
    escaped_plus, undecided.  Escapes are read off the relative coordinate
    X0(T) = Re psi(T, p0) - xi(T) crossing +/-8 (X0 -> +inf corresponds to a
    left-side limit); convergence to p0 and R_pi hits are detected by the
    boundary-derivative probe.  At a finite horizon a far R_pi limit and an
    escape to the same side are indistinguishable (both leave |Re| > 8), so
    side-level categories carry the comparison in the two-sided cases.
    """
    rho0 = kappa - 6.0 - rho_plus - rho_minus
    case = (_rho_case(kappa, rho_plus), _rho_case(kappa, rho_minus))
    n_steps = int(round(horizon / dt))
    t_start = time.time()
    # distance probe level for "within hit_tol of R_pi", with a factor-2.5
    # margin for the conformal distortion of the slit calibration dist = 2/D
    effective_tol = hit_tol / 2.5

    def work(lo, count):
        dxi, _, X_final, _ = _top_point_increments(
            kappa, 0.5 * (rho_minus - rho_plus), rho0, p0_re, dt, n_steps, seed, lo, count
        )
        pinch = bflow.locate_top_boundary_pinch(dxi, dt, approach_tol=effective_tol)
        return X_final, pinch

    _, l1, l2 = limit_scale_function(kappa, rho_plus, rho_minus)
    parts = _run_chunks(work, _chunk_ranges(n_samples, DEFAULT_CHUNK), threads)
    cats = []
    locations = []
    for X_final, pinch in parts:
        for j in range(X_final.size):
            rep = pinch[j]
            if rep.pinched and abs(rep.location - p0_re) <= p0_tol:
                cats.append("converged_p0")
                locations.append(rep.location)
            elif rep.pinched and abs(X_final[j]) >= ESCAPE_RE_THRESHOLD:
                # glued to R_pi away from p0 with the relative coordinate
                # dragged into a pocket: the scale-function martingale started
                # from X0(T) resolves the eventual side (one-sided cases leave
                # their glue almost surely; two-sided ones stay committed)
                if math.isfinite(l2) and l1 == -math.inf:
                    cats.append("escaped_minus")
                elif math.isfinite(l1) and l2 == math.inf:
                    cats.append("escaped_plus")
                elif math.isfinite(l1) and math.isfinite(l2):
                    cats.append("escaped_minus" if X_final[j] >= 0 else "escaped_plus")
                else:
                    cats.append("undecided")
            elif rep.pinched:
                cats.append("hit_left" if rep.location < p0_re else "hit_right")
                locations.append(rep.location)
            elif X_final[j] >= ESCAPE_RE_THRESHOLD:
                cats.append("escaped_minus")
            elif X_final[j] <= -ESCAPE_RE_THRESHOLD:
                cats.append("escaped_plus")
            else:
                cats.append("undecided")
    counts = {c: cats.count(c) for c in
              ("converged_p0", "hit_left", "hit_right", "escaped_minus", "escaped_plus", "undecided")}
    n_dec = n_samples - counts["undecided"]
    freq = {c: counts[c] / max(n_dec, 1) for c in counts if c != "undecided"}
    undecided_frac = counts["undecided"] / n_samples

    allowed = {
        (1, 1): {"converged_p0"},
        (1, 2): {"hit_left", "escaped_minus"},
        (1, 3): {"escaped_minus"},
        (2, 1): {"hit_right", "escaped_plus"},
        (3, 1): {"escaped_plus"},
        (2, 2): {"hit_left", "hit_right", "escaped_minus", "escaped_plus"},
        (2, 3): {"escaped_minus", "hit_right", "escaped_plus"},
        (3, 2): {"hit_left", "escaped_minus", "escaped_plus"},
        (3, 3): {"escaped_minus", "escaped_plus"},
    }[case]
    budget = 0.10 if case == (1, 1) else 0.05
    out_of_case = 1.0 - sum(freq.get(c, 0.0) for c in allowed)
    checks = {"out_of_case": out_of_case / budget, "undecided": undecided_frac / 0.20}

    split_expected = math.nan
    split_measured = math.nan
    if case in ((2, 2), (2, 3), (3, 2), (3, 3)):
        split_expected = right_escape_probability(kappa, rho_plus, rho_minus, p0_re)
        n_right = counts["escaped_plus"] + counts["hit_right"]
        n_left = counts["escaped_minus"] + counts["hit_left"]
        n_sides = n_right + n_left
        if n_sides:
            split_measured = n_right / n_sides
            se = math.sqrt(max(split_expected * (1 - split_expected), 1e-12) / n_sides)
            checks["split"] = abs(split_measured - split_expected) / (3.0 * se)

    stat = max(checks.values())
    return ExperimentReport(
        name="limits",
        parameters={
            "kappa": kappa,
            "rho_plus": rho_plus,
            "rho_minus": rho_minus,
            "rho0": rho0,
            "p0_re": p0_re,
            "horizon": horizon,
            "n_samples": n_samples,
            "dt": dt,
        },
        statistic=float(stat),
        threshold=1.0,
        n_samples=n_samples,
        passed=bool(stat < 1.0),
        seed=seed,
        runtime=time.time() - t_start,
        extras={
            "case": f"({case[0]}{case[1]})",
            "counts": counts,
            "decided_frequencies": freq,
            "undecided_fraction": undecided_frac,
            "checks": checks,
            "right_side_expected": split_expected,
            "right_side_measured": split_measured,
            "hit_locations": np.array(locations),
        },
    )


# ---------------------------------------------------------------------------
# scaling invariance
# ---------------------------------------------------------------------------


def scaling_invariance_test(
    kappa: float,
    a: float = 2.0,
    t: float = 0.25,
    n_samples: int = 2000,
    dt: float = 1e-3,
    seed: int = 0,
    threads: int = 1,
) -> ExperimentReport:
    """Two-sample KS of a*gamma(t) against gamma(a^2 t) (Re and Im marginals).

    The second arm runs on the grid dt' = a^2 dt with tip offset scaled by a,
    so the two discretized processes are exactly equal in law and the test
    probes the engine's scaling equivariance.
    """
    if a <= 0:
        raise ValueError("a must be positive")
    t_start = time.time()
    n1 = int(round(t / dt))
    dt2 = a * a * dt
    root1 = math.sqrt(kappa * dt)
    root2 = math.sqrt(kappa * dt2)

    def work(lo, count):
        x1 = np.zeros((count, n1 + 1))
        x2 = np.zeros((count, n1 + 1))
        for k in range(count):
            rng = sample_rng(seed, lo + k)
            x1[k, 1:] = np.cumsum(root1 * rng.standard_normal(n1))
            rng = sample_rng(seed, n_samples + lo + k)
            x2[k, 1:] = np.cumsum(root2 * rng.standard_normal(n1))
        tips1 = _chordal_tips(x1, dt, math.sqrt(dt))
        tips2 = _chordal_tips(x2, dt2, math.sqrt(dt2))
        return tips1, tips2

    parts = _run_chunks(work, _chunk_ranges(n_samples, DEFAULT_CHUNK), threads)
    tips1 = np.concatenate([p[0] for p in parts]) * a
    tips2 = np.concatenate([p[1] for p in parts])
    ks_re = ks_statistic(tips1.real, tips2.real)
    ks_im = ks_statistic(tips1.imag, tips2.imag)
    thr = ks_threshold_two_sample(n_samples, n_samples)
    stat = max(ks_re, ks_im)
    return ExperimentReport(
        name="scaling",
        parameters={"kappa": kappa, "a": a, "t": t, "n_samples": n_samples, "dt": dt},
        statistic=float(stat),
        threshold=thr,
        n_samples=n_samples,
        passed=bool(stat < thr),
        seed=seed,
        runtime=time.time() - t_start,
        extras={"ks_re": ks_re, "ks_im": ks_im, "scaled_tips": tips1, "reference_tips": tips2},
    )


# ---------------------------------------------------------------------------
# fractal dimension
# ---------------------------------------------------------------------------


def dimension_experiment(
    kappa: float,
    target: str = "trace",
    n_samples: int = 20,
    dt: float = 1e-4,
    t: float = 1.0,
    x: float = 1.0,
    horizon: float = 20.0,
    resolution: int = 2048,
    n_scales: int = 8,
    seed: int = 0,
    threads: int = 1,
    tolerance: float = 0.15,
) -> ExperimentReport:
    """Box-counting dimension of traces or of hull boundaries at T_x.

    target="trace": standard chordal SLE(kappa) traces on [0, t]; expected
    dimension (1 + kappa/8) ^ 2-cap.  target="hull_boundary": boundaries of
    K(T_x) for kappa > 4; expected 1 + 2/kappa.  The per-sample slopes are
    pooled; the check is |pooled - expected| < tolerance.
    """
    if target not in ("trace", "hull_boundary"):
        raise ValueError("target must be 'trace' or 'hull_boundary'")
    t_start = time.time()
    expected = min(1.0 + kappa / 8.0, 2.0) if target == "trace" else 1.0 + 2.0 / kappa

    def work_trace(lo, count):
        out = []
        n = int(round(t / dt))
        root = math.sqrt(kappa * dt)
        for k in range(count):
            rng = sample_rng(seed, lo + k)
            xis = np.concatenate([[0.0], np.cumsum(root * rng.standard_normal(n))])
            tr = chordal_trace(DrivingPath(dt, xis, Geometry.CHORDAL, kappa))
            curve = Curve(tr.points)
            out.append((curve, *box_counting_points(curve, n_scales)))
        return out

    def work_boundary(lo, count):
        out = []
        sims = _standard_driving_until_swallow(kappa, x, dt, horizon, seed, lo, count)
        for xis, hit in sims:
            if hit < 0:
                continue
            driving = DrivingPath(dt, xis[: hit + 1], Geometry.CHORDAL, kappa)
            curve = hull_boundary(driving, hit * dt, resolution)
            out.append((curve, *box_counting_points(curve, n_scales)))
        return out

    work = work_trace if target == "trace" else work_boundary
    parts = _run_chunks(work, _chunk_ranges(n_samples, 8), threads)
    rows = [r for chunk in parts for r in chunk]
    if len(rows) < 2:
        raise RuntimeError("not enough usable samples for a dimension estimate")
    fits = [fit_box_counts(xl, yl) for _, xl, yl in rows]
    slopes = np.array([f[0] for f in fits])
    estimate = float(slopes.mean())
    stderr = float(slopes.std(ddof=1) / math.sqrt(slopes.size))
    stat = abs(estimate - expected)
    return ExperimentReport(
        name="dimension",
        parameters={
            "kappa": kappa,
            "target": target,
            "n_samples": n_samples,
            "dt": dt,
            "t": t,
            "x": x,
            "n_scales": n_scales,
        },
        statistic=float(stat),
        threshold=tolerance,
        n_samples=n_samples,
        passed=bool(stat < tolerance),
        seed=seed,
        runtime=time.time() - t_start,
        extras={
            "estimate": estimate,
            "stderr": stderr,
            "expected": expected,
            "per_sample_slopes": slopes,
            "n_used": int(slopes.size),
            "curves": [r[0] for r in rows],
            "fit_points": [(xl, yl) for _, xl, yl in rows],
        },
    )
