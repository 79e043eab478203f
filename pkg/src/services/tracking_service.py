"""Service that runs the tracker over a whole sequence."""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Mapping, Optional, Union

import numpy as np

from src.evaluation.metrics import MetricsReport, clear_metrics
from src.fac.snapshot import save_snapshot
from src.mot_io.cmc import read_cmc
from src.mot_io.embeddings import read_embeddings
from src.mot_io.interpolation import interpolate
from src.mot_io.mot_files import MotRow, parse_detections, parse_gt, write_results
from src.motion.geometry import AffineTransform
from src.tracker.fact_tracker import FactTracker
from src.tracker.frame_input import FrameInput
from src.tracker.tracker_config import TrackerConfig

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass
class TrackingRun:
    """Outcome of one sequence: result rows, optional metrics and the finished tracker."""
    rows: List[MotRow]
    tracker: FactTracker = field(repr=False)
    metrics: Optional[MetricsReport] = None


def load_frames(dets_path: PathLike, embs_path: PathLike) -> List[FrameInput]:
    """
    Pair a detection file with its embedding sidecar.

    Returns every frame from 1 to the last detected frame; frames without
    detections are included with no rows so that lost-track bookkeeping
    still advances through them.

    Raises:
        ParseError: If either file is malformed
        EmbeddingCountMismatchError: If a frame's embedding count differs from its detections
    """
    detections = parse_detections(dets_path)
    counts = {frame: len(boxes) for frame, boxes in detections.items()}
    embeddings = read_embeddings(embs_path, expected_counts=counts)
    last = max(detections, default=0)
    if last == 0:
        logger.warning(f"No detections in {dets_path}")
    frames = []
    for frame in range(1, last + 1):
        emb = embeddings.get(frame)
        if emb is None:
            emb = np.zeros((0, 0))
        frames.append(FrameInput(frame, tuple(detections.get(frame, ())), emb))
    return frames


class TrackingService:
    """Runs one tracker instance per sequence and handles the files around it."""

    def __init__(self, cfg: TrackerConfig):
        self.cfg = cfg

    def run(
        self,
        frames: Iterable[FrameInput],
        cmc: Optional[Mapping[int, AffineTransform]] = None,
        gt: Optional[List[MotRow]] = None,
        interpolate_gaps: bool = False,
    ) -> TrackingRun:
        """
        Track a sequence held in memory.

        Args:
            frames: Frames in strictly increasing order
            cmc: Per-frame camera motion; frames not listed get no compensation
            gt: Ground truth; when given the run is scored
            interpolate_gaps: Fill short gaps inside each track before scoring

        Raises:
            InvalidArgumentError: On malformed or out-of-order frames
            NumericalFailureError: If the learner fails, tagged with the frame
        """
        tracker = FactTracker(self.cfg)
        n_frames = 0
        for frame in frames:
            tracker.step(frame, (cmc or {}).get(frame.frame))
            n_frames += 1
        rows = [MotRow.from_box(out.frame, out.track_id, out.box) for out in tracker.finalize()]
        if interpolate_gaps:
            rows = interpolate(rows)
        logger.info(f"Tracked {n_frames} frames: {len(tracker.tracks)} tracks, {len(rows)} result rows")

        metrics = clear_metrics(rows, gt) if gt is not None else None
        return TrackingRun(rows=rows, tracker=tracker, metrics=metrics)

    def track_files(
        self,
        dets_path: PathLike,
        embs_path: PathLike,
        out_path: Optional[PathLike] = None,
        cmc_path: Optional[PathLike] = None,
        gt_path: Optional[PathLike] = None,
        interpolate_gaps: bool = False,
        checkpoint_path: Optional[PathLike] = None,
    ) -> TrackingRun:
        """
        Track a sequence stored on disk and write the requested outputs.

        Raises:
            OSError: If a file cannot be read or written
            ParseError: If an input file is malformed
            NumericalFailureError: If the learner fails
        """
        logger.info(f"Tracking {dets_path} with embeddings {embs_path}")
        frames = load_frames(dets_path, embs_path)
        cmc = read_cmc(cmc_path) if cmc_path is not None else None
        gt = parse_gt(gt_path) if gt_path is not None else None

        result = self.run(frames, cmc=cmc, gt=gt, interpolate_gaps=interpolate_gaps)
        if out_path is not None:
            write_results(out_path, result.rows)
        if checkpoint_path is not None:
            save_snapshot(result.tracker.state, checkpoint_path)
        return result
