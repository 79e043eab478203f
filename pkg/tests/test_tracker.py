"""Tests for tracker configuration, track bookkeeping and the per-frame loop."""
import numpy as np
import pytest

from src.association.cascade import STAGE_AFFINITY, AssociationResult, Match
from src.errors import InvalidArgumentError, NumericalFailureError, ParseError
from src.fac.et_layer import transform
from src.fac.learner import predict_affinity
from src.motion.geometry import BBox
from src.tracker.fact_tracker import FactTracker, build_labels
from src.tracker.frame_input import FrameInput
from src.tracker.track import Track, TrackStatus, ema_feature
from src.tracker.tracker_config import (
    TrackerConfig,
    dump_tracker_config,
    load_tracker_config,
    make_tracker_config,
    parse_config_text,
)

BOX = BBox(100, 100, 20, 40, 0.9)
EMB = np.array([0.6, 0.8, 0.0, 0.0])


def _frame(frame: int, boxes=(), embs=None) -> FrameInput:
    if embs is None:
        embs = np.zeros((0, 4))
    return FrameInput(frame, tuple(boxes), np.asarray(embs, dtype=np.float64))


def _still_target(n_frames: int, gaps=()) -> list:
    """One stationary target with a constant embedding, absent during ``gaps``."""
    return [
        _frame(f) if f in gaps else _frame(f, [BOX], [EMB])
        for f in range(1, n_frames + 1)
    ]


def _self_affinity(tracker: FactTracker) -> float:
    return float(predict_affinity(tracker.state, tracker.layer, EMB.reshape(1, -1))[0, 0])


def _transformed_norm(tracker: FactTracker) -> float:
    return float(np.sum(transform(tracker.layer, EMB.reshape(1, -1)) ** 2))


class TestTrackerConfig:
    """Tests for the config model and its file format."""

    def test_defaults(self):
        """Test the documented defaults."""
        cfg = TrackerConfig()
        assert cfg.gamma == 1.0
        assert cfg.tau_aff == 0.3
        assert cfg.n_init == 3
        assert cfg.memory_length is None
        assert cfg.use_fac is True

    def test_out_of_range(self):
        """Test that bounds violations become InvalidArgumentError."""
        with pytest.raises(InvalidArgumentError):
            make_tracker_config(tau_aff=1.5)
        with pytest.raises(InvalidArgumentError):
            make_tracker_config(gamma=0)

    def test_unknown_field(self):
        """Test that unknown fields are rejected."""
        with pytest.raises(InvalidArgumentError):
            make_tracker_config(tau_unknown=0.1)

    def test_parse_text(self):
        """Test comments, blank lines and whitespace."""
        values = parse_config_text("# thresholds\n\ntau_aff = 0.25  # tighter\nd_et=512\n")
        assert values == {"tau_aff": "0.25", "d_et": "512"}

    def test_unknown_key_names_line(self):
        """Test that an unknown key reports its line number."""
        with pytest.raises(ParseError) as exc:
            parse_config_text("gamma = 1\nfoo = 2\n", source="tracker.cfg")
        assert exc.value.line == 2
        assert "tracker.cfg:2" in str(exc.value)

    def test_malformed_line(self):
        """Test that a line without '=' is rejected."""
        with pytest.raises(ParseError):
            parse_config_text("gamma 1\n")

    def test_duplicate_key(self):
        """Test that a key may appear only once."""
        with pytest.raises(ParseError):
            parse_config_text("gamma = 1\ngamma = 2\n")

    def test_load_with_overrides(self, tmp_path):
        """Test that overrides win over the file and None overrides are ignored."""
        path = tmp_path / "tracker.cfg"
        path.write_text("tau_aff = 0.2\nd_et = 64\nmemory_length = all\n")
        cfg = load_tracker_config(path, {"d_et": 128, "gamma": None, "use_fac": False})
        assert cfg.tau_aff == 0.2
        assert cfg.d_et == 128
        assert cfg.gamma == 1.0
        assert cfg.use_fac is False
        assert cfg.memory_length is None

    def test_dump_round_trip(self, tmp_path):
        """Test that a dumped config loads back to the same values."""
        cfg = make_tracker_config(d_et=64, memory_length=10, use_cmc=False)
        path = tmp_path / "tracker.cfg"
        path.write_text(dump_tracker_config(cfg))
        assert load_tracker_config(path) == cfg


class TestTrack:
    """Tests for track state and appearance updates."""

    def _track(self, feature) -> Track:
        return Track.spawn(1, BOX, np.asarray(feature, dtype=np.float64), frame=1)

    def test_ema_alpha_one_keeps_feature(self):
        """Test that alpha = 1 ignores the new embedding."""
        np.testing.assert_allclose(ema_feature(self._track([1.0, 0.0]), np.array([0.0, 1.0]), 1.0), [1.0, 0.0])

    def test_ema_alpha_zero_replaces_feature(self):
        """Test that alpha = 0 takes the normalized new embedding."""
        np.testing.assert_allclose(ema_feature(self._track([1.0, 0.0]), np.array([0.0, 3.0]), 0.0), [0.0, 1.0])

    def test_ema_midpoint(self):
        """Test the normalized midpoint of two orthogonal directions."""
        out = ema_feature(self._track([1.0, 0.0]), np.array([0.0, 1.0]), 0.5)
        np.testing.assert_allclose(out, [1 / np.sqrt(2), 1 / np.sqrt(2)])

    def test_spawn_assigns_column(self):
        """Test that a track's FCN column is its id minus one."""
        track = Track.spawn(4, BOX, EMB, frame=3)
        assert track.fcn_column == 3
        assert track.status is TrackStatus.TENTATIVE

    def test_illegal_transition(self):
        """Test that an active track cannot be removed without being lost first."""
        track = Track.spawn(1, BOX, EMB, frame=1, status=TrackStatus.ACTIVE)
        with pytest.raises(InvalidArgumentError):
            track.transition(TrackStatus.REMOVED)
        track.transition(TrackStatus.LOST)
        track.transition(TrackStatus.REMOVED)
        assert track.is_removed


class TestBuildLabels:
    """Tests for per-frame training labels."""

    tracks = [Track.spawn(i, BOX, EMB, frame=1) for i in (1, 2, 3)]

    def _result(self, matches, spawned):
        return AssociationResult(
            matches=tuple(Match(d, t, STAGE_AFFINITY, 0.1) for d, t in matches),
            unmatched_dets=(),
            unmatched_tracks=(),
            spawned=tuple(spawned),
        )

    def test_pure_matches(self):
        """Test two detections matched to columns 0 and 1."""
        labels = build_labels(self._result([(0, 0), (1, 1)], []), self.tracks, 2)
        np.testing.assert_array_equal(labels.entries, np.eye(2))
        assert labels.new_cols == 0

    def test_pure_spawn(self):
        """Test one detection opening the fourth column."""
        labels = build_labels(self._result([], [0]), self.tracks, 3)
        np.testing.assert_array_equal(labels.entries, [[0, 0, 0, 1]])
        assert labels.new_cols == 1

    def test_mixed_drops_discarded_detection(self):
        """Test match, discard and spawn in one frame."""
        labels = build_labels(self._result([(0, 2)], [2]), self.tracks, 3)
        np.testing.assert_array_equal(labels.entries, [[0, 0, 1, 0], [0, 0, 0, 1]])
        assert labels.det_indices == (0, 2)
        assert labels.new_cols == 1

    def test_rejects_double_match(self):
        """Test that one track cannot train on two detections."""
        with pytest.raises(InvalidArgumentError):
            build_labels(self._result([(0, 1), (1, 1)], []), self.tracks, 3)


class TestFactTracker:
    """End-to-end tests of the per-frame loop."""

    cfg = make_tracker_config(d_et=256, max_lost_frames=60)

    def test_first_frame_creates_tracks(self):
        """Test that every first-frame detection starts an active track with its own column."""
        tracker = FactTracker(make_tracker_config(d_et=32))
        out = tracker.step(_frame(1, [BOX, BBox(400, 100, 20, 40, 0.3)], [EMB, [0.0, 0.0, 1.0, 0.0]]))
        assert [o.track_id for o in out] == [1, 2]
        assert tracker.state.d_t == 2
        assert all(t.status is TrackStatus.ACTIVE for t in tracker.tracks)

    def test_no_frames(self):
        """Test that finalize on a fresh tracker is empty."""
        assert FactTracker(self.cfg).finalize() == []

    def test_single_track_rows(self):
        """Test one row per frame with a single id."""
        tracker = FactTracker(make_tracker_config(d_et=32))
        for frame in _still_target(5):
            tracker.step(frame)
        rows = tracker.finalize()
        assert [r.frame for r in rows] == [1, 2, 3, 4, 5]
        assert {r.track_id for r in rows} == {1}

    def test_stationary_target_affinity_rises(self):
        """Test a single id throughout and self-affinity n s / (gamma + n s)."""
        tracker = FactTracker(self.cfg)
        for n, frame in enumerate(_still_target(10), start=1):
            out = tracker.step(frame)
            assert [o.track_id for o in out] == [1]
            s = _transformed_norm(tracker)
            assert _self_affinity(tracker) == pytest.approx(n * s / (1.0 + n * s), abs=1e-10)

    def test_short_occlusion(self):
        """Test that a target missing for 3 frames keeps its id through stage 1."""
        tracker = FactTracker(self.cfg)
        for frame in _still_target(14, gaps={9, 10, 11}):
            tracker.step(frame)
        rows = tracker.finalize()
        assert {r.track_id for r in rows} == {1}
        assert [r.frame for r in rows] == [1, 2, 3, 4, 5, 6, 7, 8, 12, 13, 14]
        reappearance = [r for r in tracker.affinity_log if r.frame == 12]
        assert reappearance[0].associated

    def test_long_occlusion_recovers_by_affinity(self):
        """Test re-association after a 40-frame dropout with a distance below tau_aff."""
        tracker = FactTracker(self.cfg)
        gaps = set(range(11, 51))
        for frame in _still_target(60, gaps=gaps):
            tracker.step(frame)
        assert len(tracker.tracks) == 1
        record = next(r for r in tracker.affinity_log if r.frame == 51)
        assert record.track_id == 1
        assert record.associated
        assert record.distance < self.cfg.tau_aff
        associated, unassociated = tracker.distance_distribution()
        assert len(associated) > 0 and len(unassociated) == 0

    def test_track_removed_after_max_lost(self):
        """Test that a target gone longer than max_lost_frames comes back under a new id."""
        tracker = FactTracker(make_tracker_config(d_et=32, max_lost_frames=5))
        for frame in _still_target(20, gaps=set(range(6, 14))):
            tracker.step(frame)
        assert tracker.tracks[0].is_removed
        assert {r.track_id for r in tracker.finalize() if r.frame >= 14} == {2}

    def test_tentative_track_confirmation(self):
        """Test that a later track is hidden until its second consecutive hit."""
        tracker = FactTracker(make_tracker_config(d_et=32))
        other = BBox(600, 300, 20, 40, 0.9)
        other_emb = [0.0, 0.0, 1.0, 0.0]
        tracker.step(_frame(1, [BOX], [EMB]))
        out = tracker.step(_frame(2, [BOX, other], [EMB, other_emb]))
        assert [o.track_id for o in out] == [1]
        assert tracker.tracks[1].status is TrackStatus.TENTATIVE
        out = tracker.step(_frame(3, [BOX, other], [EMB, other_emb]))
        assert [o.track_id for o in out] == [1, 2]

    def test_tentative_track_removed_on_miss(self):
        """Test that an unconfirmed track dies on its first miss."""
        tracker = FactTracker(make_tracker_config(d_et=32))
        tracker.step(_frame(1, [BOX], [EMB]))
        tracker.step(_frame(2, [BOX, BBox(600, 300, 20, 40, 0.9)], [EMB, [0.0, 0.0, 1.0, 0.0]]))
        tracker.step(_frame(3, [BOX], [EMB]))
        assert tracker.tracks[1].is_removed

    def test_low_confidence_detections_ignored(self):
        """Test that boxes under min_box_confidence are dropped before association."""
        tracker = FactTracker(make_tracker_config(d_et=32, min_box_confidence=0.5))
        out = tracker.step(_frame(1, [BBox(0, 0, 10, 10, 0.2)], [EMB]))
        assert out == []
        assert tracker.tracks == []

    def test_memory_window(self):
        """Test that a window of L frames trains like L frames of data."""
        tracker = FactTracker(make_tracker_config(d_et=64, memory_length=3))
        for frame in _still_target(8):
            tracker.step(frame)
        s = _transformed_norm(tracker)
        assert _self_affinity(tracker) == pytest.approx(3 * s / (1.0 + 3 * s), abs=1e-8)

    def test_baseline_has_no_learner(self):
        """Test that the no-FAC switch never builds the ET layer."""
        tracker = FactTracker(make_tracker_config(use_fac=False))
        for frame in _still_target(5):
            tracker.step(frame)
        assert tracker.layer is None
        assert tracker.state.d_t == 0
        assert {r.track_id for r in tracker.finalize()} == {1}

    def test_frames_must_increase(self):
        """Test that replaying a frame is rejected."""
        tracker = FactTracker(make_tracker_config(d_et=32))
        tracker.step(_frame(3, [BOX], [EMB]))
        with pytest.raises(InvalidArgumentError):
            tracker.step(_frame(3, [BOX], [EMB]))

    def test_zero_embedding_rejected(self):
        """Test that an embedding without direction is an input error."""
        tracker = FactTracker(make_tracker_config(d_et=32))
        with pytest.raises(InvalidArgumentError):
            tracker.step(_frame(1, [BOX], [[0.0, 0.0, 0.0, 0.0]]))

    def test_deterministic(self):
        """Test that two runs over the same input agree exactly."""
        runs = []
        for _ in range(2):
            tracker = FactTracker(make_tracker_config(d_et=32))
            for frame in _still_target(12, gaps={5, 6}):
                tracker.step(frame)
            runs.append(tracker.finalize())
        assert runs[0] == runs[1]


class TestErrors:
    """Tests for frame tagging of numerical failures."""

    def test_with_frame(self):
        """Test that a frame number is added once."""
        err = NumericalFailureError("singular").with_frame(7)
        assert err.frame == 7
        assert "frame 7" in str(err)
        assert err.with_frame(9) is err
