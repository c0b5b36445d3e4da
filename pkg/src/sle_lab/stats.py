"""Shared statistical utilities: KS statistics and the experiment report record."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

__all__ = [
    "ks_statistic",
    "ks_threshold_one_sample",
    "ks_threshold_two_sample",
    "ExperimentReport",
]

_KS_COEFF = 1.63  # ~ alpha = 0.01
_MIN_SAMPLES = 30


def ks_statistic(samples_a, samples_b_or_cdf) -> float:
    """Kolmogorov-Smirnov statistic.

    Two-sample when the second argument is array-like, one-sample against a
    cdf callable otherwise.
    """
    a = np.sort(np.asarray(samples_a, dtype=float))
    if a.size == 0:
        raise ValueError("empty sample")
    if a.size < _MIN_SAMPLES:
        raise ValueError(f"need at least {_MIN_SAMPLES} samples per arm")
    if callable(samples_b_or_cdf):
        f = np.asarray(samples_b_or_cdf(a), dtype=float)
        n = a.size
        up = np.max(np.arange(1, n + 1) / n - f)
        down = np.max(f - np.arange(0, n) / n)
        return float(max(up, down))
    b = np.sort(np.asarray(samples_b_or_cdf, dtype=float))
    if b.size < _MIN_SAMPLES:
        raise ValueError(f"need at least {_MIN_SAMPLES} samples per arm")
    both = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, both, side="right") / a.size
    cdf_b = np.searchsorted(b, both, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def ks_threshold_one_sample(n: int) -> float:
    return _KS_COEFF / math.sqrt(n)


def ks_threshold_two_sample(n: int, m: int) -> float:
    return _KS_COEFF * math.sqrt((n + m) / (n * m))


@dataclass
class ExperimentReport:
    """Outcome of one named statistical experiment.

    `passed` is equivalent to statistic < threshold; `extras` carries
    experiment-specific counters and secondary statistics.
    """

    name: str
    parameters: Mapping
    statistic: float
    threshold: float
    n_samples: int
    passed: bool
    seed: int
    runtime: float = 0.0
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.passed != (self.statistic < self.threshold):
            raise ValueError("passed flag inconsistent with statistic < threshold")

    def to_dict(self, include_runtime: bool = False) -> dict:
        out = {
            "name": self.name,
            "parameters": dict(self.parameters),
            "statistic": self.statistic,
            "threshold": self.threshold,
            "n_samples": self.n_samples,
            "passed": bool(self.passed),
            "seed": self.seed,
            "extras": _plain(self.extras),
        }
        if include_runtime:
            out["runtime"] = self.runtime
        return out


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    return obj
