"""Rendering tests against schema-conformant fixtures (and, when the
sle-lab CLI is installed, one real end-to-end run)."""

import hashlib
import json
import math
import shutil
import subprocess

import numpy as np
import pytest

from sle_plots import PlotJob, endpoint_pdf, render
from sle_plots.render import read_table


def write_csv(path, header, rows):
    lines = ["# config_sha256: deadbeef", header]
    lines += [",".join(str(v) for v in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def write_report(path, name, params, extras=None, config=None):
    doc = {
        "schema": 1,
        "config_sha256": "deadbeef",
        "config": config or {"experiment": name, "seed": 0, "params": params},
        "report": {
            "name": name,
            "parameters": params,
            "statistic": 0.0,
            "threshold": 1.0,
            "n_samples": 1,
            "passed": True,
            "seed": 0,
            "extras": extras or {},
        },
    }
    path.write_text(json.dumps(doc))
    return str(path)


def file_hash(path):
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


class TestReadTable:
    def test_comments_and_header(self, tmp_path):
        p = write_csv(tmp_path / "t.csv", "sample,t,re,im", [(0, 0.0, 1.0, 2.0), (0, 0.1, 1.5, 2.5)])
        tab = read_table(p)
        assert list(tab) == ["sample", "t", "re", "im"]
        assert tab["re"].tolist() == [1.0, 1.5]

    def test_malformed_rejected(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("sample,t\n")
        with pytest.raises(ValueError):
            read_table(str(p))


class TestTraceFigure:
    def test_renders_nonzero_file(self, tmp_path):
        t = np.linspace(0, 1, 1001)
        rows = [(0, tv, math.sin(3 * tv), tv) for tv in t]
        src = write_csv(tmp_path / "traces.csv", "sample,t,re,im", rows)
        out = tmp_path / "traces.png"
        info = render(PlotJob("trace", (src,), str(out)))
        assert out.exists() and out.stat().st_size > 0
        assert info.n_samples == 1

    def test_inputs_not_modified(self, tmp_path):
        rows = [(0, i * 0.01, float(i), 0.5) for i in range(200)]
        src = write_csv(tmp_path / "traces.csv", "sample,t,re,im", rows)
        before = file_hash(src)
        render(PlotJob("trace", (src,), str(tmp_path / "o.png")))
        assert file_hash(src) == before

    def test_strip_decoration_uses_report_config(self, tmp_path):
        rows = [(0, i * 0.01, 0.1 * i, 1.0) for i in range(150)]
        src = write_csv(tmp_path / "traces.csv", "sample,t,re,im", rows)
        rep = write_report(
            tmp_path / "report.json", "simulate", {},
            config={"experiment": "simulate", "seed": 0,
                    "sle": {"geometry": "strip", "kappa": 6.0,
                            "force_points": [{"at": {"top": 0.5}, "rho": -4.0}, {"at": 1.0, "rho": 1.0}]}},
        )
        out = tmp_path / "strip.png"
        render(PlotJob("trace", (src,), str(out), report=rep))
        assert out.stat().st_size > 0


class TestDensityOverlay:
    def test_pdf_symmetric_and_normalized(self):
        pdf, window = endpoint_pdf(6.0, 0.0, 0.0)
        assert pdf(1.0) == pytest.approx(pdf(-1.0))
        xs = np.linspace(window[0], window[1], 200001)
        assert np.trapezoid(pdf(xs), xs) == pytest.approx(1.0, abs=1e-5)

    def test_window_integral_within_tolerance(self, tmp_path):
        rng = np.random.default_rng(0)
        samples = rng.standard_normal(500) * 3.0
        src = write_csv(tmp_path / "endpoints.csv", "sample,t,re,im",
                        [(i, 10.0, v, math.pi) for i, v in enumerate(samples)])
        rep = write_report(tmp_path / "report.json", "density",
                           {"kappa": 6.0, "rho_plus": 0.0, "rho_minus": 0.0})
        out = tmp_path / "density.png"
        info = render(PlotJob("density_overlay", (src,), str(out), report=rep))
        assert out.stat().st_size > 0
        assert abs(info.pdf_window_integral - 1.0) < 1e-4

    def test_report_required(self, tmp_path):
        src = write_csv(tmp_path / "e.csv", "sample,t,re,im", [(0, 1.0, 0.0, math.pi)])
        with pytest.raises(ValueError, match="report"):
            render(PlotJob("density_overlay", (src,), str(tmp_path / "x.png")))


class TestDimensionFit:
    def test_refit_matches_report(self, tmp_path):
        xs = np.linspace(1.0, 4.0, 8)
        rows = []
        slopes = (1.30, 1.40)
        for s, slope in enumerate(slopes):
            rows += [(s, j, x, slope * x + 0.3 * s) for j, x in enumerate(xs)]
        src = write_csv(tmp_path / "boxcounts.csv", "sample,idx,re,im", rows)
        rep = write_report(tmp_path / "report.json", "dimension",
                           {"kappa": 8.0 / 3.0, "target": "trace"},
                           extras={"estimate": float(np.mean(slopes))})
        out = tmp_path / "fit.png"
        info = render(PlotJob("dimension_fit", (src,), str(out), report=rep))
        assert out.stat().st_size > 0
        assert info.fitted_slope == pytest.approx(np.mean(slopes), abs=1e-6)
        assert info.fitted_slope == pytest.approx(info.extras["reported_estimate"], abs=1e-6)


@pytest.mark.skipif(shutil.which("sle-lab") is None, reason="sle-lab CLI not installed")
class TestEndToEnd:
    def test_density_run_overlay_and_integral(self, tmp_path):
        cfg = tmp_path / "density.yaml"
        out_dir = tmp_path / "run"
        cfg.write_text(
            "experiment: density\nseed: 7\noutput_dir: {}\n"
            "params: {{kappa: 6.0, rho_plus: 0.0, rho_minus: 0.0, n_samples: 60, "
            "dt: 2.0e-3, horizon: 40.0}}\n".format(out_dir)
        )
        proc = subprocess.run(["sle-lab", "run", str(cfg)], capture_output=True)
        assert proc.returncode in (0, 1)  # 1 = ran, statistical verdict failed
        out = tmp_path / "density.png"
        info = render(PlotJob(
            "density_overlay",
            (str(out_dir / "endpoints.csv"),),
            str(out),
            report=str(out_dir / "report.json"),
        ))
        assert out.stat().st_size > 0
        assert abs(info.pdf_window_integral - 1.0) < 1e-4
