import json
from pathlib import Path

import numpy as np
import pytest

from slipstokes.errors import InvalidArgument
from slipstokes.experiments import (KINDS, ExperimentConfig, fit_rate,
                                    parse_config, run_experiment,
                                    write_report)


class TestFitRate:
    def test_exact_power_law(self):
        h = np.array([1.0, 0.5, 0.25, 0.125, 0.0625])
        fit = fit_rate(h, 3.0 * h ** 2)
        assert fit["slope"] == pytest.approx(2.0, abs=1e-12)
        assert fit["intercept"] == pytest.approx(np.log(3.0), abs=1e-12)
        assert fit["residual_rms"] < 1e-13

    def test_drop_rule_excludes_preasymptotic(self):
        h = np.array([1.0, 0.5, 0.25, 0.125, 0.0625])
        y = h ** 2
        y[0] = 50.0   # wildly off the asymptote
        fit = fit_rate(h, y)
        assert fit["points_used"] == 4
        assert fit["slope"] == pytest.approx(2.0, abs=1e-12)

    def test_fallback_keeps_last_three(self):
        h = np.array([1.0, 0.5, 0.25])
        y = np.array([1.0, 0.9, 0.85])   # nothing clears the drop factor
        fit = fit_rate(h, y)
        assert fit["points_used"] == 3

    def test_rejects_short_or_nonpositive(self):
        with pytest.raises(InvalidArgument):
            fit_rate([1.0, 0.5], [1.0, 0.25])
        with pytest.raises(InvalidArgument):
            fit_rate([1.0, 0.5, 0.25], [1.0, 0.0, 0.25])


class TestConfigs:
    def test_kind_validation(self):
        with pytest.raises(InvalidArgument, match="kind"):
            ExperimentConfig(kind="frobnicate").validate()
        for kind in KINDS:
            ExperimentConfig(kind=kind).validate()

    def test_level_validation(self):
        with pytest.raises(InvalidArgument):
            ExperimentConfig(kind="mms", levels=(8, 8, 16)).validate()
        with pytest.raises(InvalidArgument):
            ExperimentConfig(kind="mms", levels=(16, 8)).validate()
        with pytest.raises(InvalidArgument):
            ExperimentConfig(kind="mms", levels=()).validate()

    def test_negative_friction_rejected(self):
        with pytest.raises(InvalidArgument):
            ExperimentConfig(kind="mms", alpha=-1.0).validate()

    def test_parse_config_round_trip(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text("""
[domain]
kind = disk
levels = 1,2,3
radius = 2.0

[data]
selector = mms
amplitude = 0.25

[alpha]
value = 4.0
schedule = 0.25,0.0625

[solver]
seed = 7
threads = 2
max_iterations = 30
damping = 0.5

[output]
dir = out
""")
        cfg, outdir = parse_config(str(path), kind="mms")
        assert cfg.domain == "disk"
        assert cfg.levels == (1, 2, 3)
        assert cfg.radius == 2.0
        assert cfg.data == "mms"
        assert cfg.amplitude == 0.25
        assert cfg.alpha == 4.0
        assert cfg.alpha_schedule == (0.25, 0.0625)
        assert cfg.seed == 7
        assert cfg.threads == 2
        assert cfg.picard.max_iterations == 30
        assert cfg.picard.damping == 0.5
        assert outdir == "out"

    def test_parse_config_rejects_unknowns(self, tmp_path):
        bad_section = tmp_path / "a.ini"
        bad_section.write_text("[grid]\nkind = square\n")
        with pytest.raises(InvalidArgument, match="section"):
            parse_config(str(bad_section))
        bad_key = tmp_path / "b.ini"
        bad_key.write_text("[domain]\nshape = square\n")
        with pytest.raises(InvalidArgument, match="key"):
            parse_config(str(bad_key))
        bad_value = tmp_path / "c.ini"
        bad_value.write_text("[domain]\nlevels = two,four\n")
        with pytest.raises(InvalidArgument, match="bad value"):
            parse_config(str(bad_value))

    def test_parse_config_missing_file(self):
        with pytest.raises(InvalidArgument, match="not found"):
            parse_config("/nonexistent/run.ini")


class TestReports:
    def run_small_mms(self, threads=1):
        cfg = ExperimentConfig(kind="mms", levels=(4, 8, 16), threads=threads)
        return run_experiment(cfg)

    def test_mms_report_contents(self):
        report = self.run_small_mms()
        assert report.kind == "mms"
        assert "level" in report.columns
        assert len(report.rows) == 3
        assert 1.7 < report.fits["velocity_h1"]["slope"] < 2.3
        assert report.config_echo["levels"] == [4, 8, 16]
        assert "numpy" in report.environment

    def test_csv_bytes_deterministic(self):
        a = self.run_small_mms().to_csv()
        b = self.run_small_mms().to_csv()
        assert a == b
        assert a.endswith("\n")

    def test_threads_do_not_change_bytes(self):
        a = self.run_small_mms(threads=1).to_csv()
        b = self.run_small_mms(threads=2).to_csv()
        assert a == b

    def test_write_report_files(self, tmp_path):
        report = self.run_small_mms()
        csv_path, json_path = write_report(report, str(tmp_path / "out"))
        assert Path(csv_path).read_text(encoding="ascii") == report.to_csv()
        manifest = json.loads(Path(json_path).read_text(encoding="ascii"))
        assert manifest["kind"] == "mms"
        assert manifest["config"]["levels"] == [4, 8, 16]
        assert "fits" in manifest and "wall_times_s" in manifest

    def test_compat_disk_flags_exact_zero(self):
        cfg = ExperimentConfig(kind="compat_disk", domain="disk",
                               levels=(1, 2, 3))
        report = run_experiment(cfg)
        circ = [row[report.columns.index("boundary_circulation")]
                for row in report.rows]
        assert report.fits["machine_zero"] == (max(circ) <= 1e-13)

    def test_uniform_bound_ratio(self):
        cfg = ExperimentConfig(kind="uniform_bound", levels=(8,))
        report = run_experiment(cfg)
        assert report.fits["uniformity"]["max_over_min"] < 10.0
