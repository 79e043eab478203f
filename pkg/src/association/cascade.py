"""Two-stage association: FAC affinity first, then cosine and IoU instant association."""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.association.matching import cosine_distance, solve_assignment
from src.errors import InvalidArgumentError
from src.fac.labels import LabelMatrix
from src.motion.geometry import iou_matrix
from src.motion.kalman_filter import gate
from src.tracker.frame_input import FrameInput
from src.tracker.track import Track
from src.tracker.tracker_config import TrackerConfig

logger = logging.getLogger(__name__)

STAGE_AFFINITY = "affinity"
STAGE_COSINE = "cosine"
STAGE_IOU = "iou"


@dataclass(frozen=True)
class Match:
    det: int
    track: int
    stage: str
    distance: float


@dataclass(frozen=True)
class AssociationResult:
    """
    Outcome of one frame's association.

    Indices refer to the frame's detections and to the track list handed to
    ``cascade``. ``spawned`` lists the unmatched detections that start new
    tracks, in spawn order. ``labels`` is filled in by the tracker.
    """
    matches: Tuple[Match, ...]
    unmatched_dets: Tuple[int, ...]
    unmatched_tracks: Tuple[int, ...]
    spawned: Tuple[int, ...]
    labels: Optional[LabelMatrix] = None

    def track_for(self, det: int) -> Optional[int]:
        for m in self.matches:
            if m.det == det:
                return m.track
        return None


def _round(cost: np.ndarray, threshold: float, dets: List[int], tracks: List[int], stage: str):
    """Run one assignment round on a sub-problem and map indices back."""
    outcome = solve_assignment(cost, threshold)
    matches = [Match(dets[r], tracks[c], stage, float(cost[r, c])) for r, c in outcome.matches]
    left_dets = [dets[r] for r in outcome.unmatched_dets]
    left_tracks = [tracks[c] for c in outcome.unmatched_tracks]
    return matches, left_dets, left_tracks


def gated_cosine_cost(frame: FrameInput, tracks: Sequence[Track], dets: List[int],
                      track_idx: List[int], gate_threshold: float) -> np.ndarray:
    """Cosine distance between detections and track features, forced to 1.0 outside the motion gate."""
    cost = cosine_distance(frame.embeddings[dets], np.array([tracks[t].feature for t in track_idx]))
    boxes = [frame.boxes[d] for d in dets]
    for col, t in enumerate(track_idx):
        cost[~gate(tracks[t].kf, boxes, gate_threshold), col] = 1.0
    return cost


def cascade(
    frame: FrameInput,
    tracks: Sequence[Track],
    eligible: Sequence[int],
    affinity_d: np.ndarray,
    cfg: TrackerConfig,
    spawn_all: bool = False,
) -> AssociationResult:
    """
    Associate one frame's detections with the candidate tracks.

    Stage 1 matches on the (already gated) affinity distance against the
    FAC-eligible tracks. Stage 2 takes every detection and track left over,
    first on gated cosine distance, then on IoU distance. Unmatched
    detections with confidence >= tau_new (all of them when ``spawn_all``)
    become new tracks.

    Args:
        frame: Detections with L2-normalized embeddings
        tracks: Candidate (non-removed) tracks, already predicted to this frame
        eligible: Indices into ``tracks`` for the columns of ``affinity_d``
        affinity_d: N x len(eligible) affinity distances
        cfg: Thresholds and switches

    Raises:
        InvalidArgumentError: If the affinity matrix does not match the detections and eligible tracks
    """
    n = len(frame)
    eligible = list(eligible)
    affinity_d = np.asarray(affinity_d, dtype=np.float64)
    if affinity_d.size == 0 and n * len(eligible) == 0:
        affinity_d = affinity_d.reshape(n, len(eligible))
    if affinity_d.shape != (n, len(eligible)):
        raise InvalidArgumentError(
            f"affinity distances have shape {affinity_d.shape}, expected {(n, len(eligible))}"
        )
    if len(set(eligible)) != len(eligible) or any(not 0 <= t < len(tracks) for t in eligible):
        raise InvalidArgumentError(f"eligible track indices {eligible} invalid for {len(tracks)} tracks")

    matches: List[Match] = []
    dets = list(range(n))
    if eligible and n:
        stage1, dets, _ = _round(affinity_d, cfg.tau_aff, list(range(n)), eligible, STAGE_AFFINITY)
        matches.extend(stage1)
    matched_tracks = {m.track for m in matches}
    remaining = [t for t in range(len(tracks)) if t not in matched_tracks]

    if cfg.use_cosine and dets and remaining:
        cost = gated_cosine_cost(frame, tracks, dets, remaining, cfg.gate_threshold)
        stage2, dets, remaining = _round(cost, cfg.tau_cos, dets, remaining, STAGE_COSINE)
        matches.extend(stage2)

    if dets and remaining:
        overlap = iou_matrix([frame.boxes[d] for d in dets], [tracks[t].box for t in remaining])
        stage3, dets, remaining = _round(1.0 - overlap, cfg.tau_iou, dets, remaining, STAGE_IOU)
        matches.extend(stage3)

    spawned = tuple(d for d in dets if spawn_all or frame.boxes[d].confidence >= cfg.tau_new)
    logger.debug(
        f"frame {frame.frame}: {len(matches)} matches "
        f"({sum(m.stage == STAGE_AFFINITY for m in matches)} by affinity), "
        f"{len(spawned)} spawned, {len(dets) - len(spawned)} discarded"
    )
    return AssociationResult(
        matches=tuple(sorted(matches, key=lambda m: m.det)),
        unmatched_dets=tuple(sorted(dets)),
        unmatched_tracks=tuple(sorted(remaining)),
        spawned=spawned,
    )
