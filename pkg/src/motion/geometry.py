"""Box geometry: MOT-convention boxes, IoU, and affine camera transforms."""
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from src.errors import InvalidArgumentError


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in MOT convention (top-left corner, size) with a detection confidence."""
    left: float
    top: float
    width: float
    height: float
    confidence: float = 1.0

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise InvalidArgumentError(f"box size must be positive, got {self.width}x{self.height}")

    @property
    def center(self) -> np.ndarray:
        return np.array([self.left + self.width / 2.0, self.top + self.height / 2.0])

    def to_xywh(self) -> np.ndarray:
        """Center-size measurement vector (cx, cy, w, h)."""
        cx, cy = self.center
        return np.array([cx, cy, self.width, self.height], dtype=np.float64)

    def to_tlwh(self) -> np.ndarray:
        return np.array([self.left, self.top, self.width, self.height], dtype=np.float64)

    @classmethod
    def from_xywh(cls, xywh: Sequence[float], confidence: float = 1.0) -> "BBox":
        cx, cy, w, h = (float(v) for v in xywh)
        return cls(cx - w / 2.0, cy - h / 2.0, w, h, confidence)


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes, in [0, 1]."""
    iw = min(a.left + a.width, b.left + b.width) - max(a.left, b.left)
    ih = min(a.top + a.height, b.top + b.height) - max(a.top, b.top)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.width * a.height + b.width * b.height - inter)


def iou_matrix(boxes_a: Sequence[BBox], boxes_b: Sequence[BBox]) -> np.ndarray:
    """Pairwise IoU, rows from ``boxes_a`` and columns from ``boxes_b``."""
    if len(boxes_a) == 0 or len(boxes_b) == 0:
        return np.zeros((len(boxes_a), len(boxes_b)))
    a = np.array([bx.to_tlwh() for bx in boxes_a])
    b = np.array([bx.to_tlwh() for bx in boxes_b])
    a_tl, a_br = a[:, None, :2], a[:, None, :2] + a[:, None, 2:]
    b_tl, b_br = b[None, :, :2], b[None, :, :2] + b[None, :, 2:]
    wh = np.maximum(0.0, np.minimum(a_br, b_br) - np.maximum(a_tl, b_tl))
    inter = wh[..., 0] * wh[..., 1]
    union = a[:, None, 2] * a[:, None, 3] + b[None, :, 2] * b[None, :, 3] - inter
    return inter / union


@dataclass(frozen=True, eq=False)
class AffineTransform:
    """2x3 map from previous-frame to current-frame pixel coordinates."""
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64)
        if m.shape != (2, 3):
            raise InvalidArgumentError(f"affine transform must be 2x3, got {m.shape}")
        if abs(np.linalg.det(m[:, :2])) <= 1e-9:
            raise InvalidArgumentError("affine transform linear part is not invertible")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def linear(self) -> np.ndarray:
        return self.matrix[:, :2]

    @property
    def translation(self) -> np.ndarray:
        return self.matrix[:, 2]

    @classmethod
    def identity(cls) -> "AffineTransform":
        return cls(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]))
