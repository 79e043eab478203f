"""Tests for MOT text files, the embedding sidecar, camera motion and interpolation."""
import struct

import numpy as np
import pytest

from src.errors import (
    EmbeddingCountMismatchError,
    EmbeddingFormatError,
    EmbeddingMagicError,
    InvalidArgumentError,
    ParseError,
    TruncatedEmbeddingError,
)
from src.mot_io.cmc import parse_cmc_text
from src.mot_io.embeddings import dump_embeddings, parse_embeddings, read_embeddings, write_embeddings
from src.mot_io.interpolation import interpolate
from src.mot_io.mot_files import (
    MotRow,
    format_results,
    parse_detections,
    parse_detections_text,
    parse_gt,
    parse_gt_text,
    write_results,
)
from src.motion.geometry import BBox


class TestDetections:
    """Tests for detection file parsing."""

    def test_single_row(self):
        """Test field mapping of a full 10-field row."""
        frames = parse_detections_text("1,-1,10,20,30,40,0.9,-1,-1,-1\n")
        assert list(frames) == [1]
        assert frames[1] == [BBox(10, 20, 30, 40, 0.9)]

    def test_empty_file(self, tmp_path):
        """Test that an empty file has no frames."""
        path = tmp_path / "det.txt"
        path.write_text("")
        assert len(parse_detections(path)) == 0

    def test_short_row_names_line(self):
        """Test that a 6-field row is rejected with its line number."""
        with pytest.raises(ParseError) as exc:
            parse_detections_text("1,-1,10,20,30,40\n", source="det.txt")
        assert exc.value.line == 1

    def test_non_numeric(self):
        """Test that garbage fields are parse errors."""
        with pytest.raises(ParseError):
            parse_detections_text("1,-1,a,20,30,40,0.9\n")

    def test_degenerate_box(self):
        """Test that a zero-size box is a parse error on its own line."""
        with pytest.raises(ParseError) as exc:
            parse_detections_text("1,-1,10,20,30,40,0.9\n2,-1,10,20,0,40,0.9\n", source="det.txt")
        assert exc.value.line == 2
        assert exc.value.path == "det.txt"

    def test_groups_frames_in_order(self):
        """Test grouping rows by ascending frame, file order within a frame."""
        frames = parse_detections_text("2,-1,0,0,5,5,1\n1,-1,1,1,5,5,1\n2,-1,9,9,5,5,1\n")
        assert list(frames) == [1, 2]
        assert [b.left for b in frames[2]] == [0, 9]


class TestResults:
    """Tests for result and ground-truth files."""

    def test_one_line_per_row(self):
        """Test one track in one frame gives one line with its id."""
        text = format_results([MotRow(1, 7, 10, 20, 30, 40, 0.9)])
        assert text == "1,7,10,20,30,40,0.9,-1,-1,-1\n"

    def test_round_trip(self, tmp_path):
        """Test that written rows parse back to the same set."""
        rows = [MotRow(2, 1, 1.5, 2.25, 30, 40, 0.75), MotRow(1, 2, 0.1, 0.2, 10.3, 20.7, 1.0)]
        path = tmp_path / "res.txt"
        write_results(path, rows)
        assert set(parse_gt(path)) == set(rows)

    def test_sorted_output(self):
        """Test rows are ordered by (frame, id)."""
        text = format_results([MotRow(2, 1, 0, 0, 1, 1), MotRow(1, 3, 0, 0, 1, 1), MotRow(1, 2, 0, 0, 1, 1)])
        assert [line.split(",")[:2] for line in text.splitlines()] == [["1", "2"], ["1", "3"], ["2", "1"]]

    def test_rejects_non_positive_ids(self, tmp_path):
        """Test that invalid ids are rejected before the file is written."""
        path = tmp_path / "res.txt"
        with pytest.raises(InvalidArgumentError):
            write_results(path, [MotRow(1, 0, 0, 0, 1, 1)])
        assert not path.exists()

    def test_gt_requires_positive_ids(self):
        """Test that ground truth cannot carry detection ids."""
        with pytest.raises(ParseError):
            parse_gt_text("1,-1,0,0,1,1,1\n")


class TestEmbeddings:
    """Tests for the binary embedding sidecar."""

    def test_round_trip(self, tmp_path):
        """Test that float32 values survive a write and read bit for bit."""
        rng = np.random.default_rng(9)
        frames = {1: rng.standard_normal((3, 8)).astype(np.float32), 4: rng.standard_normal((1, 8)).astype(np.float32)}
        path = tmp_path / "emb.bin"
        write_embeddings(path, frames, 8)
        loaded = read_embeddings(path, {1: 3, 4: 1})
        for frame, emb in frames.items():
            np.testing.assert_array_equal(loaded[frame], emb)

    def test_no_records(self):
        """Test that an empty sidecar is valid when no detections are expected."""
        assert parse_embeddings(dump_embeddings({}, 8), expected_counts={}) == {}

    def test_count_mismatch_names_frame(self):
        """Test that a count mismatch reports the frame."""
        data = dump_embeddings({3: np.ones((2, 4))}, 4)
        with pytest.raises(EmbeddingCountMismatchError) as exc:
            parse_embeddings(data, expected_counts={3: 3})
        assert exc.value.frame == 3
        assert "frame 3" in str(exc.value)

    def test_missing_frame(self):
        """Test that a frame with detections but no embeddings is a mismatch."""
        data = dump_embeddings({1: np.ones((1, 4))}, 4)
        with pytest.raises(EmbeddingCountMismatchError) as exc:
            parse_embeddings(data, expected_counts={1: 1, 2: 1})
        assert exc.value.frame == 2

    def test_bad_magic(self):
        """Test that a foreign header is rejected."""
        data = b"NOTEMBED" + dump_embeddings({1: np.ones((1, 4))}, 4)[8:]
        with pytest.raises(EmbeddingMagicError):
            parse_embeddings(data)

    def test_truncated(self):
        """Test that a short payload is rejected."""
        data = dump_embeddings({1: np.ones((2, 4))}, 4)
        with pytest.raises(TruncatedEmbeddingError):
            parse_embeddings(data[:-4])

    def test_trailing_bytes(self):
        """Test that extra bytes after the records are rejected."""
        with pytest.raises(EmbeddingFormatError):
            parse_embeddings(dump_embeddings({1: np.ones((1, 4))}, 4) + b"\x00")

    def test_unsorted_records(self):
        """Test that records must be sorted by (frame, det_index)."""
        header = struct.pack("<8sIIQ", b"FACTEMB1", 1, 1, 2)
        records = struct.pack("<IIf", 2, 0, 1.0) + struct.pack("<IIf", 1, 0, 1.0)
        with pytest.raises(EmbeddingFormatError):
            parse_embeddings(header + records)

    def test_mismatch_is_a_parse_error(self):
        """Test that sidecar errors share the parse-error family."""
        assert issubclass(EmbeddingCountMismatchError, ParseError)


class TestCameraMotionFile:
    """Tests for per-frame affine transforms."""

    def test_parse(self):
        """Test reading transforms keyed by frame."""
        transforms = parse_cmc_text("1 1 0 3 0 1 -2\n2 1 0 0 0 1 0\n")
        np.testing.assert_array_equal(transforms[1].translation, [3, -2])
        assert sorted(transforms) == [1, 2]

    def test_wrong_arity(self):
        """Test that lines need exactly seven fields."""
        with pytest.raises(ParseError):
            parse_cmc_text("1 1 0 3 0 1\n")

    def test_frames_must_ascend(self):
        """Test that frames are strictly increasing."""
        with pytest.raises(ParseError):
            parse_cmc_text("2 1 0 0 0 1 0\n1 1 0 0 0 1 0\n")

    def test_singular(self):
        """Test that a non-invertible transform is a parse error."""
        with pytest.raises(ParseError):
            parse_cmc_text("1 0 0 0 0 0 0\n")


class TestInterpolation:
    """Tests for gap filling."""

    def test_midpoint(self):
        """Test a one-frame gap is filled at the midpoint with the smaller confidence."""
        rows = [MotRow(1, 1, 0, 0, 10, 10, 0.9), MotRow(3, 1, 10, 0, 10, 10, 0.7)]
        out = interpolate(rows)
        assert [r.frame for r in out] == [1, 2, 3]
        assert out[1].left == 5
        assert out[1].conf == 0.7

    def test_gap_too_long(self):
        """Test that gaps above max_gap are untouched."""
        rows = [MotRow(1, 1, 0, 0, 10, 10), MotRow(23, 1, 10, 0, 10, 10)]
        assert interpolate(rows, max_gap=20) == rows

    def test_contiguous(self):
        """Test that a track without gaps is unchanged."""
        rows = [MotRow(f, 1, f, 0, 10, 10) for f in range(1, 6)]
        assert interpolate(rows) == rows

    def test_tracks_are_independent(self):
        """Test that gaps are filled per id."""
        rows = [MotRow(1, 1, 0, 0, 10, 10), MotRow(1, 2, 50, 0, 10, 10), MotRow(3, 1, 2, 0, 10, 10)]
        out = interpolate(rows)
        assert [(r.frame, r.id) for r in out] == [(1, 1), (1, 2), (2, 1), (3, 1)]

    def test_idempotent(self):
        """Test that filling an already filled sequence changes nothing."""
        rows = [
            MotRow(1, 1, 0, 0, 10, 10, 0.9), MotRow(4, 1, 9, 3, 12, 10, 0.8), MotRow(5, 1, 11, 3, 12, 10),
            MotRow(2, 2, 50, 0, 10, 20), MotRow(7, 2, 60, 5, 10, 20, 0.6), MotRow(40, 2, 90, 5, 10, 20),
        ]
        once = interpolate(rows, max_gap=10)
        assert len(once) == len(rows) + 2 + 4
        assert interpolate(once, max_gap=10) == once
