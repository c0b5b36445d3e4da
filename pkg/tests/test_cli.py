"""CLI: config parsing, outputs, determinism."""

import json
import os

import pytest
import yaml

from sle_lab.cli import ConfigError, describe, load_config, main, parse_force_point


def write_config(tmp_path, doc, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc))
    return str(path)


SIM_DOC = {
    "experiment": "simulate",
    "seed": 3,
    "sle": {"geometry": "chordal", "kappa": 2.0, "dt": 1e-3, "horizon": 1.0, "n_samples": 1},
}


class TestConfigParsing:
    def test_force_point_syntax(self):
        assert parse_force_point({"at": 1.5, "rho": 2.0}, "p").kind == "real"
        assert parse_force_point({"at": "+inf"}, "p").kind == "+inf"
        assert parse_force_point({"at": "0+", "rho": 2.0}, "p").kind == "x+"
        assert parse_force_point({"at": {"top": 0.0}, "rho": -4.0}, "p").kind == "top"
        with pytest.raises(ConfigError):
            parse_force_point({"rho": 1.0}, "p")
        with pytest.raises(ConfigError):
            parse_force_point({"at": "wat"}, "p")

    def test_density_hypothesis_checked_at_parse_time(self, tmp_path):
        doc = {
            "experiment": "density",
            "params": {"kappa": 6.0, "rho_plus": 1.5, "rho_minus": -1.5, "n_samples": 10},
        }
        with pytest.raises(ConfigError, match="rho"):
            load_config(write_config(tmp_path, doc))

    def test_unknown_experiment(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown experiment"):
            load_config(write_config(tmp_path, {"experiment": "frobnicate"}))

    def test_env_seed_fallback(self, tmp_path, monkeypatch):
        doc = dict(SIM_DOC)
        doc.pop("seed")
        monkeypatch.setenv("SLE_LAB_SEED", "77")
        cfg = load_config(write_config(tmp_path, doc))
        assert cfg.seed == 77

    def test_seed_override_wins(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SLE_LAB_SEED", "77")
        cfg = load_config(write_config(tmp_path, SIM_DOC), seed_override=5)
        assert cfg.seed == 5


class TestDescribe:
    def test_density_mentions_the_law(self):
        text = describe("density")
        assert "cosh(x/2)^(-4/kappa)" in text
        assert "KS" in text

    def test_duality_mentions_the_claims(self):
        text = describe("duality")
        assert "sign(z) = -sign(x)" in text
        assert "kappa >= 8" in text

    def test_unknown_name_lists_valid(self):
        with pytest.raises(ConfigError, match="valid:"):
            describe("wat")


@pytest.mark.slow
class TestRun:
    def test_simulate_row_count(self, tmp_path):
        out = tmp_path / "out"
        doc = dict(SIM_DOC, output_dir=str(out))
        assert main(["run", write_config(tmp_path, doc)]) == 0
        lines = (out / "traces.csv").read_text().splitlines()
        assert lines[0].startswith("# config_sha256:")
        assert lines[1] == "sample,t,re,im"
        assert len(lines) == 2 + 1001
        report = json.loads((out / "report.json").read_text())
        assert report["schema"] == 1
        assert report["config_sha256"] == lines[0].split()[-1]
        assert "runtime" not in report["report"]

    def test_invalid_config_exit_code(self, tmp_path, capsys):
        doc = {
            "experiment": "density",
            "params": {"kappa": 6.0, "rho_plus": 1.5, "rho_minus": -1.5, "n_samples": 10},
        }
        assert main(["run", write_config(tmp_path, doc)]) == 2
        assert "rho" in capsys.readouterr().err

    def test_density_run_outputs(self, tmp_path):
        doc = {
            "experiment": "density",
            "seed": 4,
            "output_dir": str(tmp_path / "outd"),
            "params": {"kappa": 6.0, "rho_plus": 0.0, "rho_minus": 0.0,
                       "n_samples": 40, "dt": 2e-3, "horizon": 30.0},
        }
        status = main(["run", write_config(tmp_path, doc)])
        report = json.loads((tmp_path / "outd" / "report.json").read_text())
        body = report["report"]
        assert body["name"] == "density"
        assert {"statistic", "threshold", "passed", "n_samples", "seed"} <= set(body)
        assert status == (0 if body["passed"] else 1)
        rows = (tmp_path / "outd" / "endpoints.csv").read_text().splitlines()
        assert rows[1] == "sample,t,re,im"

    def test_byte_identical_reports_across_threads(self, tmp_path):
        doc = {
            "experiment": "scaling",
            "seed": 11,
            "output_dir": str(tmp_path / "out"),
            "params": {"kappa": 2.0, "a": 2.0, "t": 0.1, "n_samples": 200, "dt": 1e-3},
        }
        cfg = write_config(tmp_path, doc)
        outs = []
        for threads in (1, 3):
            main(["run", cfg, "--threads", str(threads)])
            outs.append({
                p.name: p.read_bytes()
                for p in sorted((tmp_path / "out").iterdir())
                if p.suffix != ".log"
            })
        assert outs[0] == outs[1]

    def test_json_format(self, tmp_path):
        doc = dict(SIM_DOC, output_dir=str(tmp_path / "oj"), format="json")
        main(["run", write_config(tmp_path, doc)])
        data = json.loads((tmp_path / "oj" / "traces.json").read_text())
        assert data["columns"] == ["sample", "t", "re", "im"]
        assert len(data["rows"]) == 1001
