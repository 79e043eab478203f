"""Track record and its appearance/lifecycle bookkeeping."""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from src.errors import InvalidArgumentError
from src.motion.geometry import BBox
from src.motion.kalman_filter import KalmanState, kf_init


class TrackStatus(str, Enum):
    TENTATIVE = "tentative"
    ACTIVE = "active"
    LOST = "lost"
    REMOVED = "removed"


_ALLOWED = {
    TrackStatus.TENTATIVE: {TrackStatus.ACTIVE, TrackStatus.REMOVED},
    TrackStatus.ACTIVE: {TrackStatus.LOST},
    TrackStatus.LOST: {TrackStatus.ACTIVE, TrackStatus.REMOVED},
    TrackStatus.REMOVED: set(),
}


def normalize(vector: np.ndarray) -> np.ndarray:
    """L2-normalize a vector; zero vectors are rejected."""
    v = np.asarray(vector, dtype=np.float64)
    norm = np.linalg.norm(v)
    if not norm > 0 or not np.isfinite(norm):
        raise InvalidArgumentError("cannot normalize a zero or non-finite embedding")
    return v / norm


@dataclass(eq=False)
class Track:
    """
    One identity. ``fcn_column`` is its column in the FCN weight matrix and
    never changes; ``feature`` is the unit-norm EMA appearance.
    """
    id: int
    kf: KalmanState
    feature: np.ndarray
    fcn_column: int
    start_frame: int
    last_seen: int
    status: TrackStatus = TrackStatus.TENTATIVE
    fac_frames: int = 0
    hits: int = 1
    confidence: float = 1.0

    @classmethod
    def spawn(cls, track_id: int, box: BBox, embedding: np.ndarray, frame: int,
              status: TrackStatus = TrackStatus.TENTATIVE) -> "Track":
        return cls(
            id=track_id,
            kf=kf_init(box),
            feature=normalize(embedding),
            fcn_column=track_id - 1,
            start_frame=frame,
            last_seen=frame,
            status=status,
            confidence=box.confidence,
        )

    @property
    def box(self) -> BBox:
        """Current Kalman estimate as a box."""
        return self.kf.to_bbox(self.confidence)

    @property
    def is_removed(self) -> bool:
        return self.status is TrackStatus.REMOVED

    def transition(self, status: TrackStatus) -> None:
        if status is self.status:
            return
        if status not in _ALLOWED[self.status]:
            raise InvalidArgumentError(
                f"track {self.id}: illegal transition {self.status.value} -> {status.value}"
            )
        self.status = status


def ema_feature(track: Track, emb: np.ndarray, alpha: float) -> np.ndarray:
    """normalize(alpha * feature + (1 - alpha) * normalize(emb)); the track is not modified."""
    smoothed = alpha * track.feature + (1.0 - alpha) * normalize(emb)
    return normalize(smoothed)
