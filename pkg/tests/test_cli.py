"""Tests for the command-line interface and its exit codes."""
import numpy as np
import pytest

from src.cli import EXIT_IO, EXIT_OK, EXIT_USAGE, run
from src.fac.snapshot import load_snapshot
from src.mot_io.embeddings import write_embeddings
from src.mot_io.mot_files import parse_gt
from src.motion.geometry import BBox
from src.mot_io.mot_files import write_detections
from src.synth.generator import generate, write_sequence
from src.synth.scenario import OcclusionWindow, make_scenario_config


@pytest.fixture
def scenario_dir(tmp_path):
    cfg = make_scenario_config(
        seed=2, n_targets=3, n_frames=40, d_reid=16,
        occlusions=[OcclusionWindow(target=1, start=15, end=20)],
    )
    return write_sequence(generate(cfg), tmp_path / "scenario")


def _track_args(scenario_dir, *extra):
    return ["track", "--dets", str(scenario_dir / "det.txt"), "--embs", str(scenario_dir / "emb.bin"),
            "--d-et", "64", *extra]


class TestTrackCommand:
    """Tests for `track`."""

    def test_writes_results(self, scenario_dir, tmp_path):
        """Test a run on a synthetic scenario writes positive-id rows."""
        out = tmp_path / "res.txt"
        assert run(_track_args(scenario_dir, "--out", str(out))) == EXIT_OK
        rows = parse_gt(out)
        assert rows
        assert all(r.id > 0 for r in rows)

    def test_deterministic(self, scenario_dir, tmp_path):
        """Test two runs on identical inputs give byte-identical result files."""
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        assert run(_track_args(scenario_dir, "--out", str(a))) == EXIT_OK
        assert run(_track_args(scenario_dir, "--out", str(b))) == EXIT_OK
        assert a.read_bytes() == b.read_bytes()

    def test_prints_metrics_with_gt(self, scenario_dir, tmp_path, capsys):
        """Test that --gt adds the metrics block."""
        code = run(_track_args(scenario_dir, "--out", str(tmp_path / "r.txt"), "--gt", str(scenario_dir / "gt.txt")))
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "mota = " in out
        assert "idf1 = " in out
        assert any(line.startswith("results ") for line in out.splitlines())

    def test_results_to_stdout(self, scenario_dir, capsys):
        """Test that results go to stdout without --out."""
        assert run(_track_args(scenario_dir, "--no-fac", "--interpolate")) == EXIT_OK
        assert capsys.readouterr().out.startswith("1,")

    def test_checkpoint(self, scenario_dir, tmp_path):
        """Test that --checkpoint writes a loadable learner snapshot."""
        path = tmp_path / "fac.bin"
        assert run(_track_args(scenario_dir, "--out", str(tmp_path / "r.txt"), "--checkpoint", str(path))) == EXIT_OK
        state = load_snapshot(path)
        assert state.d_et == 64
        assert state.d_t >= 3

    def test_count_mismatch(self, tmp_path, capsys):
        """Test that mismatched detections and embeddings exit 2 naming the frame."""
        write_detections(tmp_path / "det.txt", {1: [BBox(0, 0, 10, 10)], 2: [BBox(0, 0, 10, 10), BBox(50, 0, 10, 10)]})
        write_embeddings(tmp_path / "emb.bin", {1: np.ones((1, 4)), 2: np.ones((1, 4))}, 4)
        code = run(["track", "--dets", str(tmp_path / "det.txt"), "--embs", str(tmp_path / "emb.bin")])
        assert code == EXIT_IO
        assert "frame 2" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        """Test that an unreadable input exits 2."""
        code = run(["track", "--dets", str(tmp_path / "nope.txt"), "--embs", str(tmp_path / "nope.bin")])
        assert code == EXIT_IO

    def test_config_file(self, scenario_dir, tmp_path):
        """Test that a config file is accepted and flags override it."""
        cfg = tmp_path / "tracker.cfg"
        cfg.write_text("d_et = 16\ntau_aff = 0.25\n")
        args = ["track", "--dets", str(scenario_dir / "det.txt"), "--embs", str(scenario_dir / "emb.bin"),
                "--config", str(cfg), "--d-et", "32", "--checkpoint", str(tmp_path / "fac.bin"),
                "--out", str(tmp_path / "r.txt")]
        assert run(args) == EXIT_OK
        assert load_snapshot(tmp_path / "fac.bin").d_et == 32

    def test_unknown_config_key(self, scenario_dir, tmp_path):
        """Test that a bad config file exits 2."""
        cfg = tmp_path / "tracker.cfg"
        cfg.write_text("colour = red\n")
        assert run(_track_args(scenario_dir, "--config", str(cfg))) == EXIT_IO

    def test_out_of_range_flag(self, scenario_dir):
        """Test that an invalid threshold is a usage error."""
        assert run(_track_args(scenario_dir, "--tau-aff", "2")) == EXIT_USAGE


class TestUsage:
    """Tests for argument handling."""

    def test_unknown_flag(self):
        """Test that unknown flags exit 1."""
        with pytest.raises(SystemExit) as exc:
            run(["eval", "--results", "a", "--gt", "b", "--colour", "red"])
        assert exc.value.code == EXIT_USAGE

    def test_missing_required_flag(self):
        """Test that required flags are enforced."""
        with pytest.raises(SystemExit) as exc:
            run(["track", "--dets", "det.txt"])
        assert exc.value.code == EXIT_USAGE

    def test_no_command(self):
        """Test that a subcommand is required."""
        with pytest.raises(SystemExit) as exc:
            run([])
        assert exc.value.code == EXIT_USAGE


class TestOtherCommands:
    """Tests for eval, synth and selftest."""

    def test_eval(self, scenario_dir, capsys):
        """Test scoring ground truth against itself."""
        gt = str(scenario_dir / "gt.txt")
        assert run(["eval", "--results", gt, "--gt", gt]) == EXIT_OK
        out = capsys.readouterr().out
        assert "mota = 1.0000" in out
        assert "idsw = 0" in out
        table = [line.split() for line in out.splitlines() if line.startswith(("name", "results"))]
        assert table[0][:4] == ["name", "idf1", "mota", "idsw"]
        assert table[1][:4] == ["results", "1.0000", "1.0000", "0"]

    def test_synth_from_config(self, scenario_dir, tmp_path):
        """Test regenerating a scenario from its own scenario.json."""
        out = tmp_path / "again"
        assert run(["synth", "--config", str(scenario_dir / "scenario.json"), "--out-dir", str(out)]) == EXIT_OK
        for name in ("det.txt", "emb.bin", "gt.txt"):
            assert (out / name).read_bytes() == (scenario_dir / name).read_bytes()

    def test_synth_needs_one_source(self, tmp_path):
        """Test that --suite-seed and --config are mutually exclusive."""
        with pytest.raises(SystemExit) as exc:
            run(["synth", "--suite-seed", "1", "--config", "s.json", "--out-dir", str(tmp_path)])
        assert exc.value.code == EXIT_USAGE

    def test_selftest(self, capsys):
        """Test that a correct build passes the oracle check."""
        assert run(["selftest"]) == EXIT_OK
        out = capsys.readouterr().out
        error = float(out.split("oracle_max_relative_error = ")[1].split()[0])
        assert error <= 1e-8
