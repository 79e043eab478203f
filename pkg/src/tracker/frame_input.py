from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from src.errors import InvalidArgumentError
from src.motion.geometry import BBox


@dataclass(frozen=True, eq=False)
class FrameInput:
    """Detections of one frame paired row-for-row with their ReID embeddings."""
    frame: int
    boxes: Tuple[BBox, ...]
    embeddings: np.ndarray = field(repr=False)

    def __post_init__(self):
        boxes = tuple(self.boxes)
        emb = np.asarray(self.embeddings, dtype=np.float64)
        if emb.ndim == 1 and emb.size == 0:
            emb = emb.reshape(0, 0)
        if emb.ndim != 2 or emb.shape[0] != len(boxes):
            raise InvalidArgumentError(
                f"frame {self.frame}: {len(boxes)} boxes but embeddings of shape {emb.shape}"
            )
        object.__setattr__(self, "boxes", boxes)
        object.__setattr__(self, "embeddings", emb)

    def __len__(self) -> int:
        return len(self.boxes)

    def select(self, indices: Sequence[int]) -> "FrameInput":
        """Keep only the given detection rows (in the given order)."""
        idx = list(indices)
        emb = self.embeddings[idx] if idx else self.embeddings[:0]
        return FrameInput(self.frame, tuple(self.boxes[i] for i in idx), emb)
