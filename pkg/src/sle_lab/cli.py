"""Config-driven entry point.

    sle-lab run <config.yaml> [--seed N] [--threads K] [--out DIR]
    sle-lab describe <experiment>

Configs are YAML with a top-level `experiment`, a `params` block, and (for
`simulate`) an `sle` block.  Outputs: delimited data files (CSV, columns as
documented per kind) plus a versioned JSON report embedding the resolved
config and its hash.  Wall-clock timings go to a sidecar .log file so that
reruns with the same seed are byte-identical regardless of --threads.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import experiments as xp
from .density import DensitySpec
from .loewner import Geometry, trace
from .sde import ForceSpec, SleConfig, sample_driving
from .stats import _plain

__all__ = ["main", "run", "describe", "load_config", "RunConfig"]

SCHEMA_VERSION = 1
EXPERIMENTS = ("simulate", "density", "mixture", "duality", "limits", "scaling", "dimension")
_MAX_JSON_ARRAY = 64


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class RunConfig:
    """Validated run configuration (see `describe` for per-experiment params)."""

    def __init__(self, experiment: str, params: dict, sle: dict | None, seed: int,
                 output_dir: str, fmt: str, threads: int = 1):
        self.experiment = experiment
        self.params = params
        self.sle = sle
        self.seed = seed
        self.output_dir = Path(output_dir)
        self.format = fmt
        self.threads = threads

    def resolved(self) -> dict:
        out = {
            "experiment": self.experiment,
            "seed": self.seed,
            "output_dir": str(self.output_dir),
            "format": self.format,
            "params": _plain(self.params),
        }
        if self.sle is not None:
            out["sle"] = _plain(self.sle)
        return out


def _need(mapping: dict, key: str, path: str, kind=float, default=None):
    if key not in mapping:
        if default is not None:
            return default
        raise ConfigError(f"{path}.{key}", "required field missing")
    try:
        return kind(mapping[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}.{key}", f"expected {kind.__name__}: {exc}") from None


def parse_force_point(raw, path: str) -> ForceSpec:
    """Force point syntax: {at: 1.5, rho: 2}, {at: "+inf"}, {at: "0+"},
    {at: {top: 0.0}} for a point on the top boundary line."""
    if not isinstance(raw, dict) or "at" not in raw:
        raise ConfigError(path, "force point must be a mapping with an 'at' field")
    rho = _need(raw, "rho", path, float, default=0.0)
    at = raw["at"]
    if isinstance(at, dict):
        if set(at) != {"top"}:
            raise ConfigError(f"{path}.at", "mapping form must be {top: x0}")
        return ForceSpec.on_top(float(at["top"]), rho)
    if isinstance(at, str):
        token = at.strip()
        if token in ("+inf", "inf", "+oo"):
            return ForceSpec.at_infinity("+", rho)
        if token in ("-inf", "-oo"):
            return ForceSpec.at_infinity("-", rho)
        if token.endswith("+") or token.endswith("-"):
            return ForceSpec.degenerate(token[-1], rho)
        try:
            return ForceSpec.at(float(token), rho)
        except ValueError:
            raise ConfigError(f"{path}.at", f"unrecognized location {at!r}") from None
    return ForceSpec.at(float(at), rho)


def _parse_sle(raw: dict, path: str, seed) -> SleConfig:
    geom = _need(raw, "geometry", path, str, default="chordal").lower()
    if geom not in ("chordal", "strip"):
        raise ConfigError(f"{path}.geometry", "must be 'chordal' or 'strip'")
    fps = [parse_force_point(fp, f"{path}.force_points[{i}]")
           for i, fp in enumerate(raw.get("force_points") or [])]
    try:
        return SleConfig(
            geometry=Geometry.CHORDAL if geom == "chordal" else Geometry.STRIP,
            kappa=_need(raw, "kappa", path, float),
            start=_need(raw, "start", path, float, default=0.0),
            force_points=tuple(fps),
            horizon=_need(raw, "horizon", path, float, default=1.0),
            dt=_need(raw, "dt", path, float, default=1e-3),
            seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def _validate_params(experiment: str, params: dict):
    """Eager validation so bad configs fail before any sampling starts."""
    if experiment in ("density", "mixture"):
        try:
            DensitySpec(params["kappa"], params["rho_plus"], params["rho_minus"])
        except KeyError as exc:
            raise ConfigError(f"params.{exc.args[0]}", "required field missing") from None
        except ValueError as exc:
            raise ConfigError("params", str(exc)) from None
    if experiment == "duality":
        if params.get("kappa", 0) <= 4:
            raise ConfigError("params.kappa", "duality needs kappa > 4")
        if params.get("x", 1.0) == 0:
            raise ConfigError("params.x", "x must be nonzero")
    if experiment == "limits":
        if params.get("kappa", 0) <= 4:
            raise ConfigError("params.kappa", "limit classification needs kappa > 4")
        for key in ("rho_plus", "rho_minus"):
            if key not in params:
                raise ConfigError(f"params.{key}", "required field missing")
    if experiment == "scaling" and params.get("a", 1.0) <= 0:
        raise ConfigError("params.a", "scale factor must be positive")
    if experiment == "dimension":
        tgt = params.get("target", "trace")
        if tgt not in ("trace", "hull_boundary"):
            raise ConfigError("params.target", "must be 'trace' or 'hull_boundary'")


def load_config(path: str | Path, seed_override: int | None = None,
                out_override: str | None = None, threads: int = 1) -> RunConfig:
    with open(path) as fh:
        raw = yaml.safe_load(fh) or {}
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a mapping")
    experiment = _need(raw, "experiment", "<root>", str)
    if experiment not in EXPERIMENTS:
        raise ConfigError("experiment", f"unknown experiment {experiment!r}; valid: {', '.join(EXPERIMENTS)}")
    fmt = _need(raw, "format", "<root>", str, default="csv").lower()
    if fmt not in ("csv", "json"):
        raise ConfigError("format", "must be 'csv' or 'json'")
    if seed_override is not None:
        seed = int(seed_override)
    elif "seed" in raw:
        seed = int(raw["seed"])
    elif os.environ.get("SLE_LAB_SEED"):
        seed = int(os.environ["SLE_LAB_SEED"])
    else:
        seed = 0
    params = dict(raw.get("params") or {})
    _validate_params(experiment, params)
    sle = raw.get("sle")
    if experiment == "simulate":
        if sle is None:
            raise ConfigError("sle", "simulate requires an 'sle' block")
        _parse_sle(sle, "sle", seed)  # validate eagerly
    out_dir = out_override or raw.get("output_dir") or "."
    return RunConfig(experiment, params, sle, seed, out_dir, fmt, threads)


# ---------------------------------------------------------------------------
# output writers
# ---------------------------------------------------------------------------


def _fmt(v: float) -> str:
    return repr(float(v))


def _write_rows(path: Path, header: str, rows, config_hash: str, fmt: str, written: list):
    if fmt == "json":
        path = path.with_suffix(".json")
        cols = header.split(",")
        payload = {
            "schema": SCHEMA_VERSION,
            "config_sha256": config_hash,
            "columns": cols,
            "rows": [[r[0], *[float(v) for v in r[1:]]] for r in rows],
        }
        path.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")
    else:
        lines = [f"# config_sha256: {config_hash}", header]
        lines += [",".join([str(r[0]), *[_fmt(v) for v in r[1:]]]) for r in rows]
        path.write_text("\n".join(lines) + "\n")
    written.append(path)


def _json_safe_extras(extras: dict) -> dict:
    out = {}
    for key, val in extras.items():
        if isinstance(val, np.ndarray):
            if val.size <= _MAX_JSON_ARRAY:
                out[key] = _plain(val)
            else:
                out[key] = {"omitted_array_length": int(val.size)}
        elif isinstance(val, (list, tuple)) and val and not isinstance(val[0], (int, float, str, bool)):
            out[key] = {"omitted_items": len(val)}
        else:
            out[key] = _plain(val)
    return out


def _write_report(out_dir: Path, report, config: RunConfig, config_hash: str, written: list):
    body = report.to_dict(include_runtime=False)
    body["extras"] = _json_safe_extras(report.extras)
    doc = {
        "schema": SCHEMA_VERSION,
        "config_sha256": config_hash,
        "config": config.resolved(),
        "report": body,
    }
    path = out_dir / "report.json"
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    written.append(path)
    log = out_dir / "report.log"
    log.write_text(f"experiment={report.name} runtime_seconds={report.runtime:.3f}\n")


def _run_simulate(config: RunConfig, out_dir: Path, config_hash: str, written: list):
    from .stats import ExperimentReport

    sle_raw = dict(config.sle)
    n_samples = int(sle_raw.pop("n_samples", 1))
    rows = []
    swallowed = []
    for s in range(n_samples):
        cfg = _parse_sle(sle_raw, "sle", (config.seed, s))
        driving, traj = sample_driving(cfg)
        tr = trace(driving)
        rows += [(s, t, p.real, p.imag) for t, p in zip(tr.times, tr.points)]
        swallowed.append([None if sw is None else float(sw) for sw in traj.swallowed])
    _write_rows(out_dir / "traces.csv", "sample,t,re,im", rows, config_hash, config.format, written)
    report = ExperimentReport(
        name="simulate",
        parameters={"n_samples": n_samples, **{k: v for k, v in sle_raw.items() if k != "force_points"}},
        statistic=0.0,
        threshold=1.0,
        n_samples=n_samples,
        passed=True,
        seed=config.seed if isinstance(config.seed, int) else 0,
        extras={"swallowed_times": swallowed},
    )
    _write_report(out_dir, report, config, config_hash, written)
    return report


def run(config: RunConfig) -> int:
    """Execute the configured experiment; returns the process exit status."""
    out_dir = config.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    config_hash = hashlib.sha256(
        json.dumps(config.resolved(), sort_keys=True).encode()
    ).hexdigest()
    written: list[Path] = []
    try:
        if config.experiment == "simulate":
            report = _run_simulate(config, out_dir, config_hash, written)
            return 0 if report.passed else 1

        fn = {
            "density": xp.density_experiment,
            "mixture": xp.mixture_experiment,
            "duality": xp.duality_boundary_experiment,
            "limits": xp.limit_classification_experiment,
            "scaling": xp.scaling_invariance_test,
            "dimension": xp.dimension_experiment,
        }[config.experiment]
        report = fn(seed=config.seed, threads=config.threads, **config.params)

        if config.experiment == "density":
            ends = report.extras["endpoints"]
            taus = report.extras["approach_times"]
            rows = [(i, taus[i], ends[i], math.pi) for i in range(len(ends))]
            _write_rows(out_dir / "endpoints.csv", "sample,t,re,im", rows, config_hash, config.format, written)
        elif config.experiment == "mixture":
            t0 = report.parameters["t0"]
            for name in ("direct_samples", "mixture_samples"):
                vals = report.extras[name]
                rows = [(i, t0, v, 0.0) for i, v in enumerate(vals)]
                _write_rows(out_dir / f"{name}.csv", "sample,t,re,im", rows, config_hash, config.format, written)
        elif config.experiment == "duality":
            crows = []
            for s, curve in enumerate(report.extras["curves"]):
                crows += [(s, j, p.real, p.imag) for j, p in enumerate(curve.points)]
            _write_rows(out_dir / "curves.csv", "sample,idx,re,im", crows, config_hash, config.format, written)
        elif config.experiment == "scaling":
            for name in ("scaled_tips", "reference_tips"):
                vals = report.extras[name]
                rows = [(i, report.parameters["t"], v.real, v.imag) for i, v in enumerate(vals)]
                _write_rows(out_dir / f"{name}.csv", "sample,t,re,im", rows, config_hash, config.format, written)
        elif config.experiment == "dimension":
            rows = []
            for s, (xl, yl) in enumerate(report.extras["fit_points"]):
                rows += [(s, j, xl[j], yl[j]) for j in range(len(xl))]
            _write_rows(out_dir / "boxcounts.csv", "sample,idx,re,im", rows, config_hash, config.format, written)
            crows = []
            for s, curve in enumerate(report.extras["curves"]):
                crows += [(s, j, p.real, p.imag) for j, p in enumerate(curve.points)]
            _write_rows(out_dir / "curves.csv", "sample,idx,re,im", crows, config_hash, config.format, written)

        _write_report(out_dir, report, config, config_hash, written)
        return 0 if report.passed else 1
    except Exception:
        for path in written:
            try:
                path.unlink()
            except OSError:
                pass
        raise


_DESCRIPTIONS = {
    "simulate": """\
simulate: sample SLE(kappa;rho) driving paths and export their traces.
  sle block: geometry (chordal|strip), kappa, start, dt, horizon, n_samples,
  force_points: [{at: 1.5, rho: 2}, {at: "+inf", rho: 0}, {at: "0+", rho: 2},
  {at: {top: 0.0}, rho: -4}].
  Outputs traces.csv (sample,t,re,im).""",
    "density": """\
density: one-sample KS test of the top-boundary endpoint law.
  The trace of a strip SLE(kappa; rho+, rho-) process from (0; +inf, -inf)
  with rho+ + rho- = kappa - 6 and |rho+ - rho-| < 2 meets the line
  Im z = pi at a single point J + i*pi; J has density proportional to
  exp(2*sigma*x/kappa) * cosh(x/2)^(-4/kappa) with sigma = (rho- - rho+)/2.
  params: kappa, rho_plus, rho_minus, n_samples, dt (default 1e-3),
  horizon (default 40), approach_tol (default 0.02).
  Outputs endpoints.csv (sample,t,re,im) with the approach time and point.
  Pass: KS statistic < 1.63/sqrt(n); >5% non-approaching samples invalidate.""",
    "mixture": """\
mixture: the endpoint-conditioned decomposition of the driving law.
  The law of a strip SLE(kappa; rho+, rho-) driving function from
  (0; +inf, -inf) equals the mixture over x ~ endpoint density of strip
  SLE(kappa; -4, rho-+2, rho++2) from (0; x + i*pi, +inf, -inf).  Tested by a
  two-sample KS on xi(t0) plus an A-vs-A control, and by checking the
  conditioned arm approaches R_pi within 0.1 of its x for >= 90% of samples.
  params: kappa, rho_plus, rho_minus, t0, n_samples, dt, horizon.
  Pass: normalized statistic < 1 (all parts below their thresholds).""",
    "duality": """\
duality: crosscut structure of the hull boundary at a swallowing time.
  For kappa in (4,8), the boundary of K(T_x) in the upper half-plane is a
  crosscut joining y and z with sign(y) = sign(x), |y| > |x| and
  sign(z) = -sign(x); the law of y matches the law of gamma(T_x).  For
  kappa >= 8 the boundary is a crosscut with one end at x itself.
  params: kappa (>4), x, n_samples, dt (default 1e-4), horizon, resolution.
  Pass: violating fraction of decided samples < 2% (and the y-law KS for
  kappa < 8).  Samples whose T_x exceeds the horizon are excluded/counted.""",
    "limits": """\
limits: terminal classification of strip SLE(kappa; rho+, rho-, rho0) traces
  from (0; +inf, -inf, p0), rho0 = kappa - 6 - rho+ - rho-.  With
  I1 = [kappa/2-2, inf), I2 = (kappa/2-4, kappa/2-2), I3 = (-inf, kappa/2-4],
  the trace limit is p0 in case (11); a left/right R_pi point or -/+infinity
  per the case table otherwise, with the two-sided cases splitting according
  to the scale-function martingale h.  Escapes are read from the relative
  coordinate of p0 crossing +/-8; at a finite horizon a far R_pi limit is
  indistinguishable from an escape to the same side.
  params: kappa (>4), rho_plus, rho_minus, p0_re, horizon, n_samples, dt.
  Pass: normalized statistic < 1 (case coverage, undecided < 20%, and the
  predicted side split within 3 binomial standard errors).""",
    "scaling": """\
scaling: a * gamma(t) has the law of gamma(a^2 t) for standard chordal SLE.
  Two-sample KS on Re and Im marginals of independent samples of both sides;
  the second arm runs on the grid a^2*dt so the discretizations correspond
  exactly under scaling.
  params: kappa, a, t, n_samples, dt.
  Pass: both KS statistics below the alpha=0.01 two-sample threshold.""",
    "dimension": """\
dimension: box-counting dimension of traces or hull boundaries.
  target=trace: standard chordal SLE(kappa) traces, expected
  min(1 + kappa/8, 2).  target=hull_boundary: boundary of K(T_x) for
  kappa > 4, expected 1 + 2/kappa.
  params: kappa, target, n_samples, dt (default 1e-4), t, x, resolution,
  n_scales, tolerance (default 0.15).
  Outputs boxcounts.csv (sample,idx,re,im) = per-sample (log 1/s, log N)
  and curves.csv.  Pass: |pooled slope - expected| < tolerance.""",
}


def describe(experiment: str) -> str:
    if experiment not in _DESCRIPTIONS:
        raise ConfigError("experiment", f"unknown experiment {experiment!r}; valid: {', '.join(EXPERIMENTS)}")
    return _DESCRIPTIONS[experiment]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="sle-lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment from a YAML config")
    p_run.add_argument("config")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--threads", type=int, default=1)
    p_run.add_argument("--out", default=None)
    p_desc = sub.add_parser("describe", help="print an experiment's parameters and the claim it tests")
    p_desc.add_argument("experiment")
    args = parser.parse_args(argv)

    if args.command == "describe":
        try:
            print(describe(args.experiment))
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        return 0

    try:
        config = load_config(args.config, seed_override=args.seed,
                             out_override=args.out, threads=args.threads)
    except (ConfigError, OSError, yaml.YAMLError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        status = run(config)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"report written to {config.output_dir / 'report.json'}")
    return status


if __name__ == "__main__":
    sys.exit(main())
