import json

import numpy as np
import pytest

from eat_hrl.harness import (
    analyze_interruptions,
    config_from_dict,
    derive_seeds,
    desk_profile,
    load_config,
    run_training,
    write_histogram_csv,
)
from eat_hrl.harness.cli import main as cli_main
from eat_hrl.harness.seeds import STREAM_LABELS


def tiny_config(algorithm="EAT(geom)", steps=1500, seed=5):
    cfg = desk_profile("NoisyDrawbridge", algorithm, master_seed=seed, total_env_steps=steps)
    cfg.eval_interval = max(1, steps // 2)
    cfg.eval_episodes = 2
    cfg.low.learning_start = 200
    cfg.high.learning_start = 200
    cfg.low.batch_size = 32
    cfg.high.batch_size = 32
    return cfg


class TestSeeds:
    def test_same_inputs_same_output(self):
        assert derive_seeds(123, "environment") == derive_seeds(123, "environment")

    def test_fixed_labels_collision_free(self):
        outs = {derive_seeds(42, label) for label in STREAM_LABELS}
        assert len(outs) == len(STREAM_LABELS)

    def test_different_masters_differ(self):
        assert derive_seeds(1, "environment") != derive_seeds(2, "environment")

    def test_equidistribution_of_high_bits(self):
        n = 1_000_000
        vals = np.fromiter(
            (derive_seeds(i, "environment") >> 63 for i in range(n)), dtype=np.int64, count=n
        )
        mean = vals.mean()
        assert abs(mean - 0.5) < 0.005
        top_byte = np.fromiter(
            (derive_seeds(i, "environment") >> 56 for i in range(100_000)), dtype=np.int64, count=100_000
        )
        assert abs(top_byte.mean() - 127.5) < 1.0
        assert abs(top_byte.std() - 255 / np.sqrt(12)) < 1.5


class TestConfig:
    def test_round_trip(self, tmp_path):
        cfg = tiny_config()
        path = tmp_path / "cfg.json"
        path.write_text(cfg.to_json())
        back = load_config(path)
        assert back.to_dict() == cfg.to_dict()

    def test_unknown_top_key_rejected(self):
        d = tiny_config().to_dict()
        d["typo_key"] = 1
        with pytest.raises(ValueError, match="typo_key"):
            config_from_dict(d)

    def test_unknown_sac_key_rejected(self):
        d = tiny_config().to_dict()
        d["low"]["momentum"] = 0.9
        with pytest.raises(ValueError, match="momentum"):
            config_from_dict(d)

    def test_geom_rejects_beta(self):
        d = tiny_config("EAT(geom)").to_dict()
        d["strategy"]["beta"] = 0.99
        with pytest.raises(ValueError, match="beta"):
            config_from_dict(d)

    def test_hits_rejects_strategy_params(self):
        d = tiny_config("HiTS").to_dict()
        d["strategy"] = {"alpha": 0.5}
        with pytest.raises(ValueError):
            config_from_dict(d)

    def test_eat_requires_alpha(self):
        d = tiny_config("EAT(Q)").to_dict()
        d["strategy"] = {}
        with pytest.raises(ValueError, match="alpha"):
            config_from_dict(d)

    def test_missing_key_rejected(self):
        d = tiny_config().to_dict()
        del d["environment"]
        with pytest.raises(ValueError, match="environment"):
            config_from_dict(d)

    def test_hits_requires_per_decision_discounting(self):
        d = tiny_config("HiTS").to_dict()
        d["strategy"] = {}
        d["high"]["time_discounting"] = True
        with pytest.raises(ValueError, match="per-decision"):
            config_from_dict(d)


class TestRunTraining:
    def test_zero_steps_yield_empty_valid_outputs(self, tmp_path):
        cfg = tiny_config(steps=0)
        cfg.total_env_steps = 0
        metrics = run_training(cfg, out_dir=tmp_path)
        assert metrics.rows == []
        assert (tmp_path / "metrics.jsonl").read_text() == ""
        assert (tmp_path / "config.json").exists()
        assert (tmp_path / "low.ckpt").exists() and (tmp_path / "high.ckpt").exists()

    def test_metrics_monotone_and_bounded(self, tmp_path):
        cfg = tiny_config(steps=2000)
        metrics = run_training(cfg, out_dir=tmp_path)
        steps = [row["env_step"] for row in metrics.rows]
        assert steps == sorted(set(steps))
        assert all(0.0 <= row["success_rate"] <= 1.0 for row in metrics.rows)
        assert all(row["interruptions"] >= 0 for row in metrics.rows)

    def test_same_seed_byte_identical_outputs(self, tmp_path):
        cfg = tiny_config(steps=1200, seed=9)
        run_training(cfg, out_dir=tmp_path / "a")
        run_training(cfg, out_dir=tmp_path / "b")
        for name in ("metrics.jsonl", "trace.jsonl", "low.ckpt", "high.ckpt"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name

    def test_different_seed_changes_run(self, tmp_path):
        a = run_training(tiny_config(steps=1200, seed=1), out_dir=tmp_path / "a")
        b = run_training(tiny_config(steps=1200, seed=2), out_dir=tmp_path / "b")
        assert (tmp_path / "a" / "trace.jsonl").read_bytes() != (tmp_path / "b" / "trace.jsonl").read_bytes()


class TestAnalysis:
    def write_trace(self, path, rows):
        with open(path, "w") as fh:
            for row in rows:
                fh.write(json.dumps(row) + "\n")

    def test_worked_delays(self, tmp_path):
        path = tmp_path / "t.jsonl"
        self.write_trace(
            path,
            [
                {"episode": 0, "time": 400, "type": "event", "kind": "BridgeOpeningStarted"},
                {"episode": 0, "time": 460, "type": "interruption", "level": 2, "strategy": "q", "gap": 1.0},
                {"episode": 0, "time": 470, "type": "interruption", "level": 2, "strategy": "q", "gap": 1.0},
            ],
        )
        result = analyze_interruptions([path], window=200)
        assert sorted(r.delay for r in result.records) == [60, 70]
        assert result.orphan_interruptions == 0

    def test_empty_histogram_without_interruptions(self, tmp_path):
        path = tmp_path / "t.jsonl"
        self.write_trace(path, [{"episode": 0, "time": 400, "type": "event", "kind": "BridgeOpeningStarted"}])
        result = analyze_interruptions([path], window=100)
        assert result.histogram == {}
        assert result.records == []

    def test_orphan_interruptions_counted_separately(self, tmp_path):
        path = tmp_path / "t.jsonl"
        self.write_trace(
            path,
            [{"episode": 0, "time": 30, "type": "interruption", "level": 2, "strategy": "geom", "gap": 0.5}],
        )
        result = analyze_interruptions([path], window=100)
        assert result.orphan_interruptions == 1
        assert result.records == []

    def test_passable_event_is_not_a_pairing_anchor(self, tmp_path):
        path = tmp_path / "t.jsonl"
        self.write_trace(
            path,
            [
                {"episode": 0, "time": 400, "type": "event", "kind": "BridgeOpeningStarted"},
                {"episode": 0, "time": 463, "type": "event", "kind": "BridgePassable"},
                {"episode": 0, "time": 470, "type": "interruption", "level": 2, "strategy": "q", "gap": 1.0},
            ],
        )
        result = analyze_interruptions([path], window=200)
        assert [r.delay for r in result.records] == [70]

    def test_malformed_line_reports_line_number(self, tmp_path):
        path = tmp_path / "t.jsonl"
        path.write_text('{"episode": 0, "time": 1, "type": "event", "kind": "PlatformFrozen"}\nnot json\n')
        with pytest.raises(ValueError, match=":2:"):
            analyze_interruptions([path], window=10)

    def test_window_truncates_histogram_not_records(self, tmp_path):
        path = tmp_path / "t.jsonl"
        self.write_trace(
            path,
            [
                {"episode": 0, "time": 100, "type": "event", "kind": "PlatformFrozen"},
                {"episode": 0, "time": 130, "type": "interruption", "level": 2, "strategy": "q", "gap": 1.0},
                {"episode": 0, "time": 350, "type": "interruption", "level": 2, "strategy": "q", "gap": 1.0},
            ],
        )
        result = analyze_interruptions([path], window=50)
        assert dict(result.histogram) == {30: 1}
        assert result.overflow == 1
        assert len(result.records) == 2

    def test_csv_output(self, tmp_path):
        path = tmp_path / "t.jsonl"
        self.write_trace(
            path,
            [
                {"episode": 3, "time": 10, "type": "event", "kind": "PlatformFrozen"},
                {"episode": 3, "time": 15, "type": "interruption", "level": 2, "strategy": "q", "gap": 1.0},
                {"episode": 3, "time": 15, "type": "interruption", "level": 2, "strategy": "q", "gap": 1.0},
            ],
        )
        result = analyze_interruptions([path], window=20)
        out = tmp_path / "hist.csv"
        write_histogram_csv(result, out)
        assert out.read_text() == "delay,count\n5,2\n"


class TestCli:
    def test_train_evaluate_analyze_pipeline(self, tmp_path, capsys):
        cfg = tiny_config(steps=800)
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(cfg.to_json())
        out_dir = tmp_path / "run"

        assert cli_main(["train", "--config", str(cfg_path), "--seed", "3", "--out", str(out_dir)]) == 0
        assert (out_dir / "metrics.jsonl").exists()
        saved = load_config(out_dir / "config.json")
        assert saved.master_seed == 3

        trace_path = tmp_path / "eval_trace.jsonl"
        assert cli_main(
            ["evaluate", "--checkpoint", str(out_dir), "--episodes", "2", "--traces", str(trace_path)]
        ) == 0
        eval_out = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert 0.0 <= eval_out["success_rate"] <= 1.0
        assert trace_path.exists()

        hist_path = tmp_path / "hist.csv"
        assert cli_main(
            [
                "analyze-interruptions",
                "--traces",
                str(tmp_path / "*trace.jsonl"),
                "--window",
                "200",
                "--out",
                str(hist_path),
            ]
        ) == 0
        assert hist_path.read_text().startswith("delay,count")

    def test_analyze_missing_traces_fails(self, tmp_path, capsys):
        code = cli_main(
            ["analyze-interruptions", "--traces", str(tmp_path / "nope*.jsonl"), "--window", "10",
             "--out", str(tmp_path / "h.csv")]
        )
        assert code == 1
