import hashlib
import json

import pytest

from firewatch.cli import main
from firewatch.simulate import load_scenario
from firewatch.vision import detect_night_fire, read_frames


def sha256(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


TRAIN_CONFIG = {
    "trainer": {"episodes": 8, "steps_per_episode": 10, "batch_size": 16, "seed": 3},
    "env": {"node_count": 3, "steps_per_episode": 10},
}


class TestTrain:
    def test_reproducible_checkpoint(self, tmp_path, capsys):
        cfg = tmp_path / "train.json"
        cfg.write_text(json.dumps(TRAIN_CONFIG))
        hashes = []
        for name in ("a", "b"):
            out = tmp_path / f"{name}.json"
            assert main(["train", "--config", str(cfg), "--out", str(out)]) == 0
            hashes.append(sha256(out))
        assert hashes[0] == hashes[1]
        assert "moving average" in capsys.readouterr().out

    def test_zero_episodes_metrics_header_only(self, tmp_path):
        cfg = tmp_path / "train.json"
        cfg.write_text(json.dumps(TRAIN_CONFIG))
        metrics = tmp_path / "metrics.csv"
        code = main(["train", "--config", str(cfg), "--out", str(tmp_path / "n.json"),
                     "--metrics", str(metrics), "--episodes", "0"])
        assert code == 0
        assert metrics.read_text().strip() == "episode,reward,moving_avg,mean_loss"

    def test_missing_config_exits_2(self, tmp_path, capsys):
        code = main(["train", "--config", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path / "n.json")])
        assert code == 2
        assert "not found" in capsys.readouterr().err

    def test_bad_config_exits_2(self, tmp_path):
        cfg = tmp_path / "train.json"
        cfg.write_text(json.dumps({"trainer": {"alpha": -1}}))
        assert main(["train", "--config", str(cfg), "--out", str(tmp_path / "n.json")]) == 2


@pytest.fixture(scope="module")
def mini_scenario(tmp_path_factory):
    path = tmp_path_factory.mktemp("scen") / "wheelbarrow.json"
    assert main(["gen-scenario", "--kind", "wheelbarrow", "--trials", "1",
                 "--out", str(path)]) == 0
    return path


class TestRun:
    def test_summary_mirrors_field_test_layout(self, mini_scenario, tmp_path, capsys):
        trace = tmp_path / "trace.jsonl"
        summary = tmp_path / "summary"
        code = main(["run", "--scenario", str(mini_scenario), "--trace", str(trace),
                     "--summary", str(summary)])
        assert code == 0
        out = capsys.readouterr().out
        assert "3 alert(s)" in out
        csv_lines = (tmp_path / "summary.csv").read_text().splitlines()
        assert csv_lines[0] == "node,t_1,mean_s"
        means = {line.split(",")[0]: float(line.split(",")[-1]) for line in csv_lines[1:]}
        assert means == {"A": 118.0, "B": 122.4, "C": 129.8}

    def test_simulated_runs_are_identical(self, mini_scenario, tmp_path):
        hashes = []
        for name in ("t1", "t2"):
            trace = tmp_path / f"{name}.jsonl"
            assert main(["run", "--scenario", str(mini_scenario), "--simulated",
                         "--trace", str(trace)]) == 0
            hashes.append(sha256(trace))
        assert hashes[0] == hashes[1]

    def test_unknown_flag_exits_2(self, mini_scenario):
        with pytest.raises(SystemExit) as exc:
            main(["run", "--scenario", str(mini_scenario), "--warp-speed"])
        assert exc.value.code == 2

    def test_scenario_parse_error_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{\n  broken\n}")
        assert main(["run", "--scenario", str(bad), "--trace",
                     str(tmp_path / "t.jsonl")]) == 2
        assert "line 2" in capsys.readouterr().err


class TestReplay:
    def test_valid_trace_breakdown(self, mini_scenario, tmp_path, capsys):
        trace = tmp_path / "trace.jsonl"
        main(["run", "--scenario", str(mini_scenario), "--trace", str(trace)])
        capsys.readouterr()
        assert main(["replay", "--trace", str(trace)]) == 0
        out = capsys.readouterr().out
        assert "alert-1" in out and "total_s" in out

    def test_empty_trace_ok(self, tmp_path, capsys):
        trace = tmp_path / "empty.jsonl"
        trace.write_text("")
        assert main(["replay", "--trace", str(trace)]) == 0
        assert "no alerts" in capsys.readouterr().out

    def test_corrupt_line_reported(self, tmp_path, capsys):
        trace = tmp_path / "corrupt.jsonl"
        trace.write_text('{"t": 0, "event": "decision"}\n{oops\n')
        assert main(["replay", "--trace", str(trace)]) == 1
        assert "line 2" in capsys.readouterr().err

    def test_shuffled_lines_reported(self, mini_scenario, tmp_path, capsys):
        trace = tmp_path / "trace.jsonl"
        main(["run", "--scenario", str(mini_scenario), "--trace", str(trace)])
        lines = trace.read_text().splitlines()
        lines[0], lines[-1] = lines[-1], lines[0]
        shuffled = tmp_path / "shuffled.jsonl"
        shuffled.write_text("\n".join(lines))
        capsys.readouterr()
        assert main(["replay", "--trace", str(shuffled)]) == 1
        assert "backwards" in capsys.readouterr().err


class TestGenVideo:
    def test_flicker_spec_is_detected(self, tmp_path):
        spec = tmp_path / "spec.json"
        spec.write_text(json.dumps({
            "width": 160, "height": 120, "frames": 16, "background": 8,
            "blobs": [{"cx": 80, "cy": 60, "radius": 20, "mode": "flicker",
                       "level_lo": 120, "level_hi": 255, "color": [1.0, 0.7, 0.3]}],
        }))
        out = tmp_path / "clip.frames"
        assert main(["gen-video", "--spec", str(spec), "--out", str(out)]) == 0
        assert detect_night_fire(read_frames(out)).fire

    def test_static_spec_is_rejected(self, tmp_path):
        spec = tmp_path / "spec.json"
        spec.write_text(json.dumps({
            "width": 160, "height": 120, "frames": 16, "background": 8,
            "blobs": [{"cx": 80, "cy": 60, "radius": 20, "mode": "static",
                       "level_hi": 255, "color": [1.0, 0.7, 0.3]}],
        }))
        out = tmp_path / "clip.frames"
        assert main(["gen-video", "--spec", str(spec), "--out", str(out)]) == 0
        assert not detect_night_fire(read_frames(out)).fire

    def test_zero_frames_empty_output(self, tmp_path):
        spec = tmp_path / "spec.json"
        spec.write_text(json.dumps({"width": 10, "height": 10, "frames": 0}))
        out = tmp_path / "empty.frames"
        assert main(["gen-video", "--spec", str(spec), "--out", str(out)]) == 0
        assert read_frames(out) == []


class TestServe:
    def test_simulated_run_publishes_records(self, mini_scenario, tmp_path):
        store_path = tmp_path / "records.jsonl"
        code = main(["run", "--scenario", str(mini_scenario), "--serve",
                     "--port", "0", "--store", str(store_path),
                     "--trace", str(tmp_path / "t.jsonl")])
        assert code == 0
        kinds = [json.loads(line)["kind"]
                 for line in store_path.read_text().splitlines()]
        assert kinds.count("alert") == 3
        assert "telemetry" in kinds and "trace" in kinds

    def test_live_control_event_steers_camera(self, tmp_path):
        # A short wall-clock run: the operator drops a fire near node B via
        # the control endpoint; the camera must turn to B's azimuth and an
        # alert must land in the store within the run.
        import threading
        import time

        import requests

        from firewatch.scenarios import WHEELBARROW_AZIMUTHS

        scenario = {
            "scenario_version": 1, "seed": 5, "duration_ms": 9_000,
            "nodes": [{"id": i, "label": lbl, "azimuth_deg": az, "distance_m": 3.0}
                      for i, (lbl, az) in enumerate(WHEELBARROW_AZIMUTHS.items())],
            "environment": {"sampling_period_ms": 250},
            "channel": {"latency_min_ms": 10, "latency_max_ms": 10},
            "events": [],
        }
        policy = {
            "decision_period_ms": 1000, "verification_trigger_signal": 0.3,
            "verification_ms": 500, "agent_decision_ms": 50,
            "rotation_speed_deg_per_s": 360.0, "alert_cooldown_ms": 60_000,
            "home_azimuth_deg": 0.0,
        }
        scenario_path = tmp_path / "live.json"
        scenario_path.write_text(json.dumps(scenario))
        policy_path = tmp_path / "policy.json"
        policy_path.write_text(json.dumps(policy))
        store_path = tmp_path / "records.jsonl"

        argv = ["run", "--scenario", str(scenario_path), "--policy", str(policy_path),
                "--live", "--serve", "--port", "18791", "--store", str(store_path),
                "--trace", str(tmp_path / "t.jsonl")]
        codes = []
        runner = threading.Thread(target=lambda: codes.append(main(argv)), daemon=True)
        runner.start()
        base = "http://127.0.0.1:18791"
        deadline = time.monotonic() + 5
        while time.monotonic() < deadline:
            try:
                requests.get(f"{base}/nodes", timeout=1)
                break
            except requests.RequestException:
                time.sleep(0.1)
        resp = requests.post(f"{base}/control/event", json={
            "event": "place_fire", "fire_id": "ui-1",
            "azimuth_deg": WHEELBARROW_AZIMUTHS["B"], "distance_m": 3.0,
            "intensity": 1.0})
        assert resp.status_code == 202
        runner.join(timeout=30)
        assert codes == [0]

        records = [json.loads(line) for line in store_path.read_text().splitlines()]
        orients = [r["body"] for r in records
                   if r["kind"] == "trace" and r["body"]["event"] == "orient"]
        assert any(o["to_deg"] == WHEELBARROW_AZIMUTHS["B"] for o in orients)
        alerts = [r["body"] for r in records if r["kind"] == "alert"]
        assert [a["node"] for a in alerts] == [1]


def test_gen_scenario_round_trips(tmp_path):
    out = tmp_path / "s.json"
    assert main(["gen-scenario", "--trials", "2", "--out", str(out)]) == 0
    script = load_scenario(out)
    assert len(script.placements) == 3
    assert len([e for e in script.events if e.kind == "place_fire"]) == 6
