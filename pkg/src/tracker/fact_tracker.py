"""Per-frame tracking loop: predict, estimate affinity, associate, update tracks, learn."""
import logging
from collections import deque
from typing import Deque, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from src.association.cascade import STAGE_AFFINITY, AssociationResult, cascade
from src.association.matching import affinity_submatrix, to_distance
from src.errors import InvalidArgumentError, NumericalFailureError
from src.fac.et_layer import EtLayer, make_et_layer, transform
from src.fac.labels import LabelMatrix
from src.fac.learner import FacState, continual_update, forget, init_fac, predict_affinity
from src.motion.geometry import AffineTransform, BBox
from src.motion.kalman_filter import apply_cmc, gate, kf_predict, kf_update
from src.tracker.frame_input import FrameInput
from src.tracker.track import Track, TrackStatus, ema_feature
from src.tracker.tracker_config import TrackerConfig

logger = logging.getLogger(__name__)


class TrackOutput(NamedTuple):
    frame: int
    track_id: int
    box: BBox


class AffinityRecord(NamedTuple):
    """Stage-1 distance between a detection and an eligible track."""
    frame: int
    track_id: int
    distance: float
    associated: bool


def build_labels(assoc: AssociationResult, tracks: Sequence[Track], n_columns: int) -> LabelMatrix:
    """
    One-hot training labels for a frame.

    Every matched detection trains its track's column; every spawning
    detection gets a fresh column after the ``n_columns`` existing ones, in
    spawn order. Detections that neither matched nor spawned are left out.

    Raises:
        InvalidArgumentError: If a track is matched twice or its column is out of range
    """
    columns = {}
    seen_tracks = set()
    for m in assoc.matches:
        if m.track in seen_tracks:
            raise InvalidArgumentError(f"track index {m.track} matched to more than one detection")
        seen_tracks.add(m.track)
        col = tracks[m.track].fcn_column
        if not 0 <= col < n_columns:
            raise InvalidArgumentError(f"track column {col} outside [0, {n_columns})")
        columns[m.det] = col
    for offset, det in enumerate(assoc.spawned):
        if det in columns:
            raise InvalidArgumentError(f"detection {det} both matched and spawned")
        columns[det] = n_columns + offset
    rows = sorted(columns)
    return LabelMatrix.from_columns([columns[d] for d in rows], n_columns, det_indices=rows)


def _normalize_rows(embeddings: np.ndarray, frame: int) -> np.ndarray:
    if embeddings.shape[0] == 0:
        return embeddings
    norms = np.linalg.norm(embeddings, axis=1, keepdims=True)
    if np.any(norms == 0) or not np.all(np.isfinite(norms)):
        raise InvalidArgumentError(f"frame {frame}: zero or non-finite embedding")
    return embeddings / norms


class FactTracker:
    """
    Online tracker for one video sequence.

    Frames must be stepped in strictly increasing order. The FAC learner
    gains one column per track ever created; removed tracks keep their
    columns but are no longer queried.
    """

    def __init__(self, cfg: TrackerConfig):
        self.cfg = cfg
        self.tracks: List[Track] = []
        self.state: FacState = init_fac(cfg.gamma, cfg.d_et)
        self.layer: Optional[EtLayer] = None
        self.affinity_log: List[AffinityRecord] = []
        self._rows: List[TrackOutput] = []
        self._last_frame: Optional[int] = None
        self._window: Deque[Tuple[np.ndarray, LabelMatrix]] = deque()

    def step(self, frame_input: FrameInput, cmc: Optional[AffineTransform] = None) -> List[TrackOutput]:
        """
        Process one frame and return the boxes of tracks that are active in it.

        Raises:
            InvalidArgumentError: On an out-of-order frame or malformed input
            NumericalFailureError: Tagged with the frame number
        """
        if self._last_frame is not None and frame_input.frame <= self._last_frame:
            raise InvalidArgumentError(
                f"frame {frame_input.frame} presented after frame {self._last_frame}"
            )
        try:
            outputs = self._step(frame_input, cmc)
        except NumericalFailureError as e:
            raise e.with_frame(frame_input.frame) from e
        self._last_frame = frame_input.frame
        self._rows.extend(outputs)
        return outputs

    def finalize(self) -> List[TrackOutput]:
        """Every emitted row, sorted by (frame, track id)."""
        return sorted(self._rows, key=lambda row: (row.frame, row.track_id))

    def active_tracks(self) -> List[Track]:
        return [t for t in self.tracks if t.status is TrackStatus.ACTIVE]

    def distance_distribution(self) -> Tuple[np.ndarray, np.ndarray]:
        """Stage-1 distances split into (associated pairs, unassociated pairs)."""
        associated = np.array([r.distance for r in self.affinity_log if r.associated])
        unassociated = np.array([r.distance for r in self.affinity_log if not r.associated])
        return associated, unassociated

    def _step(self, frame_input: FrameInput, cmc: Optional[AffineTransform]) -> List[TrackOutput]:
        cfg = self.cfg
        frame_no = frame_input.frame
        keep = [i for i, b in enumerate(frame_input.boxes) if b.confidence >= cfg.min_box_confidence]
        frame = frame_input.select(keep)
        frame = FrameInput(frame.frame, frame.boxes, _normalize_rows(frame.embeddings, frame_no))
        if len(frame) and self.layer is None and cfg.use_fac:
            self.layer = make_et_layer(cfg.seed, frame.embeddings.shape[1], cfg.d_et)

        pool = [t for t in self.tracks if not t.is_removed]
        for t in pool:
            t.kf = kf_predict(t.kf)
            if cmc is not None and cfg.use_cmc:
                t.kf = apply_cmc(t.kf, cmc)

        eligible, affinity_d = self._affinity(frame, pool)
        spawn_all = not self.tracks
        assoc = cascade(frame, pool, eligible, affinity_d, cfg, spawn_all=spawn_all)
        self._log_affinity(frame_no, pool, eligible, affinity_d, assoc)

        n_columns = len(self.tracks)
        labels = build_labels(assoc, pool, n_columns)
        self._update_tracks(frame, pool, assoc, spawn_all)
        if cfg.use_fac and labels.n_rows:
            self._learn(frame, labels, frame_no)

        return [
            TrackOutput(frame_no, t.id, t.box)
            for t in self.tracks
            if t.status is TrackStatus.ACTIVE and t.last_seen == frame_no
        ]

    def _affinity(self, frame: FrameInput, pool: List[Track]):
        """Eligible track indices and their gated affinity-distance matrix."""
        cfg = self.cfg
        eligible = []
        if cfg.use_fac and self.layer is not None:
            eligible = [i for i, t in enumerate(pool) if t.fac_frames >= cfg.n_init]
        if not eligible or not len(frame):
            return eligible, np.zeros((len(frame), len(eligible)))

        o = predict_affinity(self.state, self.layer, frame.embeddings)
        distance = to_distance(affinity_submatrix(o, [pool[i].fcn_column for i in eligible]))
        for col, i in enumerate(eligible):
            distance[~gate(pool[i].kf, frame.boxes, cfg.gate_threshold), col] = 1.0
        return eligible, distance

    def _log_affinity(self, frame_no, pool, eligible, affinity_d, assoc: AssociationResult) -> None:
        if not eligible or affinity_d.size == 0:
            return
        matched = {(m.det, m.track) for m in assoc.matches}
        for det in range(affinity_d.shape[0]):
            for col, i in enumerate(eligible):
                self.affinity_log.append(
                    AffinityRecord(frame_no, pool[i].id, float(affinity_d[det, col]), (det, i) in matched)
                )
        for m in assoc.matches:
            if m.stage == STAGE_AFFINITY:
                logger.debug(f"frame {frame_no}: track {pool[m.track].id} matched by affinity at {m.distance:.3f}")

    def _update_tracks(self, frame: FrameInput, pool: List[Track], assoc: AssociationResult,
                       spawn_all: bool) -> None:
        cfg = self.cfg
        frame_no = frame.frame
        for m in assoc.matches:
            track = pool[m.track]
            box = frame.boxes[m.det]
            track.kf = kf_update(track.kf, box)
            track.feature = ema_feature(track, frame.embeddings[m.det], cfg.ema_alpha)
            track.hits = track.hits + 1 if track.last_seen == frame_no - 1 else 1
            track.last_seen = frame_no
            track.confidence = box.confidence
            if track.status is TrackStatus.LOST:
                track.transition(TrackStatus.ACTIVE)
            elif track.status is TrackStatus.TENTATIVE and track.hits >= cfg.confirm_hits:
                track.transition(TrackStatus.ACTIVE)

        for idx in assoc.unmatched_tracks:
            track = pool[idx]
            track.hits = 0
            if track.status is TrackStatus.TENTATIVE:
                track.transition(TrackStatus.REMOVED)
                continue
            if track.status is TrackStatus.ACTIVE:
                track.transition(TrackStatus.LOST)
            if frame_no - track.last_seen > cfg.max_lost_frames:
                track.transition(TrackStatus.REMOVED)
                logger.debug(f"frame {frame_no}: track {track.id} removed after {cfg.max_lost_frames} lost frames")

        status = TrackStatus.ACTIVE if spawn_all else TrackStatus.TENTATIVE
        for det in assoc.spawned:
            track_id = len(self.tracks) + 1
            self.tracks.append(
                Track.spawn(track_id, frame.boxes[det], frame.embeddings[det], frame_no, status=status)
            )

    def _learn(self, frame: FrameInput, labels: LabelMatrix, frame_no: int) -> None:
        """Train the FAC learner on this frame's labelled detections."""
        x_et = transform(self.layer, frame.embeddings[list(labels.det_indices)])
        self.state = continual_update(self.state, x_et, labels, frame=frame_no)
        for row in range(labels.n_rows):
            col = int(np.argmax(labels.entries[row]))
            self.tracks[col].fac_frames += 1

        if self.cfg.memory_length is None:
            return
        self._window.append((x_et, labels))
        while len(self._window) > self.cfg.memory_length:
            old_x, old_labels = self._window.popleft()
            self.state = forget(self.state, old_x, old_labels.padded(self.state.d_t), frame=frame_no)
