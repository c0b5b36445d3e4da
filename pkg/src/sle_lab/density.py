"""Closed-form boundary-endpoint laws and scale functions.

For a strip SLE(kappa; rho+, rho-) process from (0; +inf, -inf) with
rho+ + rho- = kappa - 6 and |rho+ - rho-| < 2, the trace meets the top
boundary line at a single point J + i*pi whose density is

    f(x) = (1/Z) exp(2*sigma*x/kappa) * cosh(x/2)^(-4/kappa),
    sigma = (rho- - rho+)/2,

normalizable exactly when |sigma| < 1.  The same family of integrals gives
the scale function h used to classify trace limits in the three-force-point
strip configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

__all__ = [
    "DensitySpec",
    "theoretical_endpoint_density",
    "EndpointLaw",
    "limit_scale_function",
    "right_escape_probability",
]

_TAIL_HALF_WIDTH = 30.0
_TABLE_NODES = 10_000


def _log_cosh_half(x):
    """log cosh(x/2), stable for large |x|."""
    u = 0.5 * np.abs(np.asarray(x, dtype=float))
    return u - math.log(2.0) + np.log1p(np.exp(-2.0 * u))


def _log_unnormalized(x, kappa: float, sigma: float):
    x = np.asarray(x, dtype=float)
    return (2.0 * sigma / kappa) * x - (4.0 / kappa) * _log_cosh_half(x)


@dataclass(frozen=True)
class DensitySpec:
    """Parameters of the endpoint law, with the normalizer computed on init."""

    kappa: float
    rho_plus: float
    rho_minus: float
    sigma: float = field(init=False)
    normalizer: float = field(init=False)

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if abs(self.rho_plus + self.rho_minus - (self.kappa - 6.0)) > 1e-9:
            raise ValueError("endpoint law requires rho+ + rho- = kappa - 6")
        sigma = 0.5 * (self.rho_minus - self.rho_plus)
        if abs(sigma) >= 1.0:
            raise ValueError("|rho+ - rho-| < 2 required; the law is not normalizable")
        object.__setattr__(self, "sigma", sigma)
        z, err = quad(
            lambda x: math.exp(float(_log_unnormalized(x, self.kappa, sigma))),
            -np.inf,
            np.inf,
            epsrel=1e-10,
            limit=200,
        )
        if not (np.isfinite(z) and z > 0):
            raise ValueError("normalizer did not converge")
        object.__setattr__(self, "normalizer", float(z))


class EndpointLaw:
    """Callable pdf with tabulated cdf and inverse-cdf sampling."""

    def __init__(self, spec: DensitySpec):
        self.spec = spec
        # tabulation window: fixed +/-30 covers tail mass < 1e-8 for |sigma| <= 0.9
        half = _TAIL_HALF_WIDTH
        rate = (2.0 / spec.kappa) * (1.0 - abs(spec.sigma))
        if rate * half < 18.0:
            half = 18.0 / rate
        self.grid = np.linspace(-half, half, _TABLE_NODES)
        p = self.pdf(self.grid)
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (p[1:] + p[:-1]) * np.diff(self.grid))])
        self._cdf_table = cdf / cdf[-1]

    def pdf(self, x):
        out = np.exp(_log_unnormalized(x, self.spec.kappa, self.spec.sigma))
        return out / self.spec.normalizer

    def __call__(self, x):
        return self.pdf(x)

    def cdf(self, x):
        return np.interp(x, self.grid, self._cdf_table)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        u = rng.random(n)
        return np.interp(u, self._cdf_table, self.grid)

    def quantile(self, q):
        return np.interp(q, self._cdf_table, self.grid)


def theoretical_endpoint_density(spec: DensitySpec) -> EndpointLaw:
    """Normalized endpoint pdf for the given (kappa, rho+, rho-)."""
    return EndpointLaw(spec)


def limit_scale_function(kappa: float, rho_plus: float, rho_minus: float):
    """h with h'(x) = exp(-(rho+ - rho-) x / kappa) cosh(x/2)^(-4C/kappa),
    C = kappa/2 - 2 - (rho+ + rho-)/2, normalized by h(0) = 0.

    h(X) of the relative top force-point coordinate is the local martingale
    that classifies the trace limit; returns (h, L1, L2) with L1 = h(-inf),
    L2 = h(+inf) (possibly infinite).
    """
    a = (rho_plus - rho_minus) / kappa
    c = (4.0 / kappa) * (kappa / 2.0 - 2.0 - 0.5 * (rho_plus + rho_minus))

    def h_prime(x: float) -> float:
        return math.exp(-a * x - c * float(_log_cosh_half(x)))

    def h(x: float) -> float:
        val, _ = quad(h_prime, 0.0, x, limit=200)
        return val

    # integrability at +inf: exponent rate a + c/2 > 0; at -inf: c/2 - a > 0
    l2 = quad(h_prime, 0.0, np.inf, limit=200)[0] if a + c / 2.0 > 0 else math.inf
    l1 = -quad(h_prime, -np.inf, 0.0, limit=200)[0] if c / 2.0 - a > 0 else -math.inf
    return h, l1, l2


def right_escape_probability(kappa: float, rho_plus: float, rho_minus: float, x0: float) -> float:
    """P(the trace ends on the right side: +infinity or R_pi right of p0).

    Valid in the two-sided cases where h maps R onto a finite interval
    (L1, L2): the martingale h(X) started from h(x0) exits at L1 with the
    right-side probability (X -> -inf corresponds to the right side).
    """
    h, l1, l2 = limit_scale_function(kappa, rho_plus, rho_minus)
    if not (math.isfinite(l1) and math.isfinite(l2)):
        raise ValueError("not a two-sided case; h does not map onto a finite interval")
    return (l2 - h(x0)) / (l2 - l1)
