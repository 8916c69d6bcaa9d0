import json
import subprocess
import sys

import numpy as np
import pytest

from pphm.activity import kmeans, load_distribution, window_features
from pphm.cli import main
from pphm.io import group_series, read_accel_csv, read_biomarker_samples, read_factor_csv
from pphm.predictor import fit_linear, rank_predictors
from pphm.recovery import fit_recovery, recovery_time


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def files(tmp_path, capsys):
    def make(name, *argv):
        path = tmp_path / name
        code, _, _ = run(capsys, "simulate", *argv, "--out", path)
        assert code == 0
        return path
    return make


def only_series(path):
    (s,) = group_series(read_biomarker_samples(path)).values()
    return s


class TestSimulate:
    ARGS = ("recovery", "--a", 60, "--d", 180, "--theta", 0.05, "--n", 120, "--sigma", 2,
            "--seed", 7)

    def test_row_count_and_summary(self, tmp_path, capsys):
        path = tmp_path / "r.csv"
        code, out, _ = run(capsys, "simulate", *self.ARGS, "--out", path)
        assert code == 0
        assert len(path.read_text().splitlines()) == 121
        assert json.loads(out) == {"kind": "recovery", "n": 120, "seed": 7, "rows": 120,
                                   "path": str(path)}

    def test_byte_identical(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(capsys, "simulate", *self.ARGS, "--out", a)
        run(capsys, "simulate", *self.ARGS, "--out", b)
        assert a.read_bytes() == b.read_bytes()

    def test_stdout_when_no_out(self, capsys):
        code, out, err = run(capsys, "simulate", *self.ARGS)
        assert code == 0 and out.startswith("subject_id,channel,t,value,unit")
        assert json.loads(err)["rows"] == 120

    def test_bad_theta(self, tmp_path, capsys):
        code, _, err = run(capsys, "simulate", "recovery", "--a", 60, "--d", 180,
                           "--theta", -1, "--out", tmp_path / "x.csv")
        assert code == 2 and "--theta" in err

    def test_unparseable_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "recovery", "--a", "sixty", "--d", "180", "--theta", "0.1"])
        assert exc.value.code == 2

    @pytest.mark.parametrize("argv", [
        ("drift", "--start", 100, "--slope", 0.5, "--format", "ndjson"),
        ("panel", "--coef", "2,0,-1.5", "--n", 20),
        ("accel", "--profile", "leg_l:0.5:1", "--profile", "head:0:1", "--n", 50),
    ])
    def test_other_kinds(self, tmp_path, capsys, argv):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run(capsys, "simulate", *argv, "--out", a)[0] == 0
        assert run(capsys, "simulate", *argv, "--out", b)[0] == 0
        assert a.read_bytes() == b.read_bytes()

    def test_panel_too_small(self, capsys):
        code, _, err = run(capsys, "simulate", "panel", "--coef", "1,2,3", "--n", 3)
        assert code == 2 and "--n:" in err


class TestFitRecovery:
    def test_noiseless(self, files, capsys):
        path = files("r.csv", "recovery", "--a", 60, "--d", 180, "--theta", 0.05, "--n", 61,
                     "--dt", 5)
        code, out, _ = run(capsys, "fit-recovery", path)
        rep = json.loads(out)
        assert code == 0
        assert rep["theta"] == pytest.approx(0.05, rel=1e-6)
        assert set(rep) >= {"a", "d", "theta", "hrrt", "rss", "converged"}

    def test_constant_exit_3(self, tmp_path, capsys):
        path = tmp_path / "c.csv"
        path.write_text("subject_id,channel,t,value,unit\n"
                        + "".join(f"S1,heart_rate,{i},70,bpm\n" for i in range(20)))
        code, _, err = run(capsys, "fit-recovery", path)
        assert code == 3 and "elevation" in err

    def test_bit_equal_to_library(self, files, capsys, tmp_path):
        path = files("r.csv", "recovery", "--a", 60, "--d", 180, "--theta", 0.05, "--n", 120,
                     "--sigma", 2, "--seed", 7)
        code, out, _ = run(capsys, "fit-recovery", path, "--hrrt-fraction", 0.1,
                           "--out", tmp_path / "figs")
        rep = json.loads(out)
        lib = fit_recovery(only_series(path))
        assert rep["rss"] == lib.rss
        assert (rep["a"], rep["d"], rep["theta"]) == (lib.model.a, lib.model.d, lib.model.theta)
        assert rep["hrrt"] == recovery_time(lib.model, 0.1)
        assert (tmp_path / "figs" / "recovery_S1_heart_rate.png").stat().st_size > 0
        assert (tmp_path / "figs" / "recovery_S1_heart_rate.csv").exists()

    def test_stdin_ndjson(self, files, capsys, monkeypatch):
        path = files("r.ndjson", "recovery", "--a", 60, "--d", 150, "--theta", 0.1, "--n", 40,
                     "--format", "ndjson")
        import io
        monkeypatch.setattr("sys.stdin", io.StringIO(path.read_text()))
        code, out, _ = run(capsys, "fit-recovery", "-", "--format", "ndjson")
        assert code == 0 and json.loads(out)["theta"] == pytest.approx(0.1, rel=1e-6)

    def test_parse_error_exit_2(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("subject_id,channel,t,value,unit\nS1,hr,0,abc,bpm\n")
        assert run(capsys, "fit-recovery", path)[0] == 2
        assert run(capsys, "fit-recovery", tmp_path / "missing.csv")[0] == 2

    def test_bad_flag_value(self, files, capsys):
        path = files("r.csv", "recovery", "--a", 60, "--d", 150, "--theta", 0.1)
        assert run(capsys, "fit-recovery", path, "--hrrt-fraction", 2)[0] == 2

    def test_too_few_points_exit_3(self, tmp_path, capsys):
        path = tmp_path / "few.csv"
        path.write_text("subject_id,channel,t,value,unit\nS,hr,0,150,bpm\nS,hr,1,120,bpm\n")
        assert run(capsys, "fit-recovery", path)[0] == 3


class TestMonitor:
    def test_drift_crossing(self, files, capsys, tmp_path):
        path = files("d.csv", "drift", "--start", 100, "--slope", 0.5, "--n", 61)
        code, out, err = run(capsys, "monitor", path, "--band", "glucose:upper_normal=150",
                             "--window", 60, "--horizon", 100, "--out", tmp_path / "m")
        assert code == 0
        alerts = [json.loads(line) for line in out.splitlines()]
        assert len(alerts) == 1
        assert alerts[0]["kind"] == "PredictedCrossing"
        assert abs(alerts[0]["t_predicted"] - 100) < 1e-6
        summary = json.loads((tmp_path / "m" / "summary.json").read_text())
        assert summary["series"][0]["zone"] == "Normal"
        assert summary["series"][0]["trend_slope"] == pytest.approx(0.5)
        assert (tmp_path / "m" / "monitor_S1_glucose.png").exists()

    def test_flat_normal_no_alerts(self, files, capsys):
        path = files("f.csv", "drift", "--start", 120, "--slope", 0, "--n", 30)
        code, out, err = run(capsys, "monitor", path, "--band",
                             "glucose:lower_normal=75,upper_normal=200")
        assert code == 0 and out == ""
        assert json.loads(err)["alerts"] == 0

    def test_glucose_risk(self, tmp_path, capsys):
        path = tmp_path / "g.csv"
        path.write_text("subject_id,channel,t,value,unit\n"
                        "S1,glucose,0,120,mg/dL\nS1,glucose,60,130,mg/dL\nS1,glucose,120,260,mg/dL\n")
        cfg = tmp_path / "run.ini"
        cfg.write_text("[band glucose]\nlower_normal = 75\nupper_normal = 200\nupper_risk = 250\n")
        code, out, _ = run(capsys, "--config", cfg, "monitor", path, "--horizon", 1,
                           "--summary", tmp_path / "s.json")
        kinds = [json.loads(line)["kind"] for line in out.splitlines()]
        assert code == 0 and kinds == ["EnteredRisk"]
        assert json.loads((tmp_path / "s.json").read_text())["series"][0]["zone"] == "Risk"

    def test_alerts_equal_library_replay(self, files, capsys):
        from pphm.monitor import AlertTracker, ThresholdBand
        path = files("n.csv", "drift", "--start", 150, "--slope", 0.9, "--sigma", 4, "--n", 120,
                     "--seed", 3)
        band = ThresholdBand("glucose", lower_normal=75, upper_normal=200, upper_risk=250)
        code, out, _ = run(capsys, "monitor", path, "--band",
                           "glucose:lower_normal=75,upper_normal=200,upper_risk=250",
                           "--window", 30, "--horizon", 60)
        series = only_series(path)
        tracker = AlertTracker()
        expected = [a.to_dict() for i in range(1, len(series) + 1)
                    for a in tracker.step(series.head(i), band, 30, 60)]
        assert [json.loads(line) for line in out.splitlines()] == expected
        assert expected

    def test_missing_band(self, files, capsys):
        path = files("d.csv", "drift", "--start", 100, "--slope", 0.5)
        code, _, err = run(capsys, "monitor", path)
        assert code == 2 and "glucose" in err

    def test_bad_band_flag(self, files, capsys):
        path = files("d.csv", "drift", "--start", 100, "--slope", 0.5)
        assert run(capsys, "monitor", path, "--band", "glucose:upper_normal=abc")[0] == 2
        assert run(capsys, "monitor", path, "--band", "glucose:upper_normal=1",
                   "--window", -3)[0] == 2


class TestPredictors:
    def test_exact_planted(self, files, capsys):
        path = files("p.csv", "panel", "--coef", "2,0,-1.5,0,0,0", "--n", 50)
        code, out, _ = run(capsys, "predictors", path)
        rep = json.loads(out)
        assert code == 0
        assert np.max(np.abs(np.array(rep["coefficients_standardized"])
                             - [2, 0, -1.5, 0, 0, 0])) < 1e-9
        assert [p["factor"] for p in rep["predictors"]] == ["f1", "f3"]

    def test_bit_equal_to_library(self, files, capsys, tmp_path):
        path = files("p.csv", "panel", "--coef", "2,0,-1.5,0,0,0", "--n", 200, "--sigma", 0.5,
                     "--seed", 4)
        code, out, _ = run(capsys, "predictors", path, "--correlate", "--min-abs", 0.05,
                           "--out", tmp_path / "o")
        rep = json.loads(out)
        lib = fit_linear(read_factor_csv(path, "L"))
        assert rep["coefficients_standardized"] == lib.coefficients_standardized.tolist()
        assert rep["intercept"] == lib.intercept and rep["r_squared"] == lib.r_squared
        assert [[p["factor"], p["coefficient"]] for p in rep["predictors"]] == \
            [list(x) for x in rank_predictors(lib, 0.05)]
        assert rep["correlation"]["names"][-1] == "target"
        assert {"a": "f1", "b": "target"} in [{k: s[k] for k in ("a", "b")}
                                              for s in rep["correlation"]["significant"]]
        for name in ("coefficients.csv", "coefficients.png", "correlation.csv", "correlation.png"):
            assert (tmp_path / "o" / name).exists()

    def test_interactions(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(40, 2))
        path = tmp_path / "i.csv"
        path.write_text("a,b,L\n" + "".join(f"{u!r},{v!r},{u * v!r}\n" for u, v in x.tolist()))
        code, out, _ = run(capsys, "predictors", path, "--interactions")
        rep = json.loads(out)
        assert code == 0 and rep["ranking"][0] == "a*b"

    def test_errors(self, tmp_path, capsys):
        p = tmp_path / "bad.csv"
        p.write_text("a,b,L\n1,2,3\n")
        assert run(capsys, "predictors", p)[0] == 2
        p.write_text("a,b,L\n" + "".join(f"{i},{2 * i},{i % 3}\n" for i in range(10)))
        code, _, err = run(capsys, "predictors", p)
        assert code == 2 and "rank" in err
        assert run(capsys, "predictors", p, "--target", "nope")[0] == 2


class TestActivity:
    def test_bit_equal_to_library(self, files, capsys, tmp_path):
        path = files("a.csv", "accel", "--profile", "leg_l:0.8:1.5:0.05",
                     "--profile", "arm_l:0.3:1:0.05", "--profile", "head:0:1", "--seed", 2)
        code, out, _ = run(capsys, "activity", path, "--window", 2, "--k", 2, "--seed", 4,
                           "--out", tmp_path / "o")
        rep = json.loads(out)
        feats = window_features(read_accel_csv(path), 2.0)
        assert code == 0
        assert [[d["body_location"], d["load_score"]] for d in rep["load_ranking"]] == \
            [list(x) for x in load_distribution(feats)]
        km = kmeans([f.vector() for f in feats], 2, 4)
        assert rep["clusters"]["within_ss"] == km.within_ss
        assert rep["clusters"]["centroids"] == km.centroids.tolist()
        assert rep["load_ranking"][0]["body_location"] == "leg_l"
        lines = (tmp_path / "o" / "clusters.csv").read_text().splitlines()
        assert len(lines) == len(feats) + 1
        for name in ("features.csv", "load.png", "clusters.png"):
            assert (tmp_path / "o" / name).exists()

    def test_rest_only(self, files, capsys):
        path = files("a.csv", "accel", "--profile", "head:0:1", "--profile", "trunk:0:1")
        code, out, _ = run(capsys, "activity", path)
        rep = json.loads(out)
        assert code == 0
        assert [d["body_location"] for d in rep["load_ranking"]] == ["head", "trunk"]

    def test_errors(self, tmp_path, capsys):
        p = tmp_path / "bad.csv"
        p.write_text("subject_id,sensor_id,t,ax,ay,az\n")
        assert run(capsys, "activity", p)[0] == 2
        p.write_text("subject_id,sensor_id,body_location,t,ax,ay,az\n"
                     "S,x,arm,1,0,0,1\nS,x,arm,0,0,0,1\n")
        assert run(capsys, "activity", p)[0] == 2
        p.write_text("subject_id,sensor_id,body_location,t,ax,ay,az\n"
                     "S,x,arm,0,0,0,1\nS,x,arm,1,0,0,1\nS,x,arm,2,0,0,1\n")
        assert run(capsys, "activity", p, "--window", 5, "--k", 2)[0] == 2


def test_module_entry_point(tmp_path):
    out = tmp_path / "x.csv"
    proc = subprocess.run([sys.executable, "-m", "pphm", "simulate", "drift", "--start", "1",
                           "--slope", "0", "--n", "5", "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["rows"] == 5
