"""Figure rendering for sle-lab export files.

Inputs are the CSV/JSON files written by `sle-lab run` (columns
`sample,t,re,im` for traces and endpoint records, `sample,idx,re,im` for
curves and box-count fits; report JSON with the resolved config embedded).
Rendering is read-only: input files are never modified.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["PlotJob", "RenderInfo", "render", "endpoint_pdf", "KINDS"]

KINDS = ("trace", "hull", "density_overlay", "dimension_fit")


@dataclass(frozen=True)
class PlotJob:
    kind: str
    inputs: tuple[str, ...]
    output: str
    report: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown plot kind {self.kind!r}; valid: {', '.join(KINDS)}")
        if not self.inputs and self.kind != "density_overlay":
            raise ValueError("at least one input file is required")


@dataclass
class RenderInfo:
    """What was drawn, for checks and captions."""

    output: str
    n_samples: int = 0
    pdf_window_integral: float = math.nan
    fitted_slope: float = math.nan
    extras: dict = field(default_factory=dict)


def read_table(path: str | Path) -> dict[str, np.ndarray]:
    """Read an sle-lab CSV (or JSON twin): `#` comment lines are skipped."""
    path = Path(path)
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        cols = doc["columns"]
        rows = np.asarray(doc["rows"], dtype=float)
        return {c: rows[:, j] for j, c in enumerate(cols)}
    names: list[str] = []
    data: list[list[float]] = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#"):
                continue
            if not names:
                names = [c.strip() for c in row]
                continue
            data.append([float(v) for v in row])
    if not names or not data:
        raise ValueError(f"{path}: empty or malformed table")
    arr = np.asarray(data)
    if arr.shape[1] != len(names):
        raise ValueError(f"{path}: rows do not match the header width")
    return {c: arr[:, j] for j, c in enumerate(names)}


def load_report(path: str | Path) -> dict:
    doc = json.loads(Path(path).read_text())
    if "report" not in doc or "config" not in doc:
        raise ValueError(f"{path}: not an sle-lab report file")
    return doc


def endpoint_pdf(kappa: float, rho_plus: float, rho_minus: float):
    """Normalized endpoint density and its quantile window.

    Recomputed from the parameters alone:
    f(x) = exp(2 sigma x / kappa) cosh(x/2)^(-4/kappa) / Z,
    sigma = (rho- - rho+)/2.
    """
    sigma = 0.5 * (rho_minus - rho_plus)
    if abs(sigma) >= 1.0:
        raise ValueError("density not normalizable: |rho+ - rho-| >= 2")
    rate = (2.0 / kappa) * (1.0 - abs(sigma))
    half = max(30.0, 22.0 / rate)
    grid = np.linspace(-half, half, 200_001)

    def log_unnormalized(x):
        u = 0.5 * np.abs(x)
        return (2.0 * sigma / kappa) * x - (4.0 / kappa) * (u - math.log(2.0) + np.log1p(np.exp(-2.0 * u)))

    vals = np.exp(log_unnormalized(grid))
    z = np.trapezoid(vals, grid)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * np.diff(grid))]) / z

    def pdf(x):
        return np.exp(log_unnormalized(np.asarray(x, dtype=float))) / z

    lo = float(np.interp(1e-6, cdf, grid))
    hi = float(np.interp(1.0 - 1e-6, cdf, grid))
    return pdf, (lo, hi)


def _strip_decor(ax, config: dict | None):
    """Boundary lines and force-point markers for strip-geometry figures."""
    sle = (config or {}).get("sle") or {}
    if sle.get("geometry") != "strip":
        return
    ax.axhline(0.0, color="k", lw=0.8)
    ax.axhline(math.pi, color="k", lw=0.8)
    for fp in sle.get("force_points") or []:
        at = fp.get("at")
        if isinstance(at, dict) and "top" in at:
            ax.plot([float(at["top"])], [math.pi], "rv", ms=7)
        elif isinstance(at, (int, float)):
            ax.plot([float(at)], [0.0], "r^", ms=7)


def _render_polylines(job: PlotJob, key: str, title: str) -> RenderInfo:
    fig, ax = plt.subplots(figsize=(7, 5))
    config = load_report(job.report)["config"] if job.report else None
    n = 0
    for path in job.inputs:
        tab = read_table(path)
        ids = tab["sample"].astype(int)
        for s in np.unique(ids):
            sel = ids == s
            ax.plot(tab["re"][sel], tab["im"][sel], lw=0.7)
            n += 1
    _strip_decor(ax, config)
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title(title)
    fig.savefig(job.output, dpi=150)
    plt.close(fig)
    return RenderInfo(output=job.output, n_samples=n)


def _render_density_overlay(job: PlotJob) -> RenderInfo:
    if job.report is None:
        raise ValueError("density_overlay needs --report for (kappa, rho+, rho-)")
    doc = load_report(job.report)
    params = doc["report"]["parameters"]
    kappa = params["kappa"]
    pdf, window = endpoint_pdf(kappa, params["rho_plus"], params["rho_minus"])
    values = np.concatenate([read_table(p)["re"] for p in job.inputs])
    lo = min(window[0], float(values.min()) - 1.0)
    hi = max(window[1], float(values.max()) + 1.0)
    xs = np.linspace(lo, hi, 4001)
    ys = pdf(xs)
    integral = float(np.trapezoid(ys, xs))

    fig, ax = plt.subplots(figsize=(7, 5))
    ax.hist(values, bins=60, density=True, alpha=0.55, label=f"simulated (n={values.size})")
    ax.plot(xs, ys, "r-", lw=1.5, label="endpoint density")
    ax.set_xlabel("endpoint position on the top boundary")
    ax.set_ylabel("density")
    ax.set_title(f"kappa={kappa}: boundary endpoint law")
    ax.legend()
    fig.text(0.01, 0.01, f"pdf integral over plotted window: {integral:.6f}", fontsize=8)
    fig.savefig(job.output, dpi=150)
    plt.close(fig)
    return RenderInfo(output=job.output, n_samples=int(values.size), pdf_window_integral=integral)


def _fit_slope(x: np.ndarray, y: np.ndarray) -> float:
    design = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(coef[0])


def _render_dimension_fit(job: PlotJob) -> RenderInfo:
    fig, ax = plt.subplots(figsize=(7, 5))
    slopes = []
    for path in job.inputs:
        tab = read_table(path)
        ids = tab["sample"].astype(int)
        for s in np.unique(ids):
            sel = ids == s
            x, y = tab["re"][sel], tab["im"][sel]
            ax.plot(x, y, "o", ms=3, alpha=0.5)
            slopes.append(_fit_slope(x, y))
    mean_slope = float(np.mean(slopes))
    x_all = np.concatenate([read_table(p)["re"] for p in job.inputs])
    y_all = np.concatenate([read_table(p)["im"] for p in job.inputs])
    intercept = float(np.mean(y_all - mean_slope * x_all))
    span = np.array([x_all.min(), x_all.max()])
    ax.plot(span, mean_slope * span + intercept, "k--", lw=1.0,
            label=f"mean slope {mean_slope:.3f}")
    ax.legend()
    ax.set_xlabel("log 1/s")
    ax.set_ylabel("log N(s)")
    ax.set_title(f"box-counting fit: slope {mean_slope:.4f}")
    reported = math.nan
    if job.report:
        reported = load_report(job.report)["report"]["extras"].get("estimate", math.nan)
        fig.text(0.01, 0.01, f"reported estimate: {reported:.6f}", fontsize=8)
    fig.savefig(job.output, dpi=150)
    plt.close(fig)
    return RenderInfo(output=job.output, n_samples=len(slopes), fitted_slope=mean_slope,
                      extras={"reported_estimate": reported})


def render(job: PlotJob) -> RenderInfo:
    """Render the job to its output image and return what was drawn."""
    for path in job.inputs:
        if not Path(path).exists():
            raise FileNotFoundError(path)
    if job.kind == "trace":
        return _render_polylines(job, "t", "sampled traces")
    if job.kind == "hull":
        return _render_polylines(job, "idx", "hull boundary curves")
    if job.kind == "density_overlay":
        return _render_density_overlay(job)
    return _render_dimension_fit(job)
