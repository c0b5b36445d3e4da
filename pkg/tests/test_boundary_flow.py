"""Top-boundary flow: exact line kernels and pinch location."""

import math

import numpy as np
import pytest

from sle_lab import DrivingPath, Geometry
from sle_lab.boundary_flow import (
    cell_gap_threshold,
    evolve_top_point,
    locate_top_boundary_pinch,
)
from sle_lab.loewner import strip_forward_map, strip_trace


class TestTopLineKernel:
    def test_matches_strip_forward_map(self):
        # the X-flow is exactly Re psi(t, x + i pi) - xi(t)
        dt, n = 1e-3, 400
        rng = np.random.default_rng(21)
        xis = np.concatenate([[0.0], np.cumsum(math.sqrt(6 * dt) * rng.standard_normal(n))])
        d = DrivingPath(dt, xis, Geometry.STRIP, 6.0)
        for x0 in (-1.3, 0.4, 2.0):
            X = evolve_top_point(np.diff(xis)[None, :], dt, np.array([x0]))[0]
            ref = strip_forward_map(d, complex(x0, np.pi), n * dt)
            assert X + xis[-1] == pytest.approx(ref.real, abs=1e-9)

    def test_slit_gap_threshold_formula(self):
        # for the slit the X-gap across a cell with the tip eps below R_pi at
        # a node equals acosh(1 + (cosh(delta)-1)/sin^2(eps/2))
        g = cell_gap_threshold(0.25, 0.02)
        assert g == pytest.approx(math.acosh(1.0 + (math.cosh(0.25) - 1.0) / math.sin(0.01) ** 2))


class TestPinchLocation:
    def test_slit_pinches_at_origin_at_the_predicted_time(self):
        # zero driving: the hull is the vertical slit; it reaches eps below
        # R_pi at t = -2 ln sin(eps/2), and the derivative probe D = e^{t/2}
        # crosses 2/eps at the same time
        dt = 1e-3
        n = int(12.0 / dt)
        dxi = np.zeros((1, n))
        rep = locate_top_boundary_pinch(dxi, dt, approach_tol=0.02)[0]
        assert rep.pinched
        assert rep.location == pytest.approx(0.0, abs=0.02)
        t_eps = -2.0 * math.log(math.sin(0.01))
        assert rep.detect_time == pytest.approx(t_eps, abs=0.05)

    def test_no_pinch_reported_for_short_run(self):
        dt = 1e-3
        dxi = np.zeros((1, 1000))  # t=1: slit far from the top
        rep = locate_top_boundary_pinch(dxi, dt)[0]
        assert not rep.pinched

    @pytest.mark.slow
    def test_agrees_with_direct_trace(self):
        # flow-located endpoint vs the O(n^2) trace's closest approach
        kappa, dt = 6.0, 5e-3
        n = int(16.0 / dt)
        for seed in (1, 2, 5):
            rng = np.random.default_rng((400, seed))
            dxi = (math.sqrt(kappa * dt) * rng.standard_normal(n))[None, :]
            rep = locate_top_boundary_pinch(dxi, dt, approach_tol=0.05)[0]
            if not rep.pinched:
                continue
            stop = int(rep.stop_time / dt)
            xis = np.concatenate([[0.0], np.cumsum(dxi[0, : stop + 1])])
            d = DrivingPath(dt, xis, Geometry.STRIP, kappa)
            tr = strip_trace(d)
            j = int(np.argmax(tr.points.imag))
            assert tr.points[j].imag > np.pi - 0.4
            assert abs(tr.points[j].real - rep.location) < 0.2
