"""One-hot label blocks used to train the FCN layer."""
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from src.errors import InvalidArgumentError


@dataclass(frozen=True, eq=False)
class LabelMatrix:
    """
    Stacked one-hot labels for one frame.

    ``entries`` has one row per training detection and ``old_cols + new_cols``
    columns; the first ``old_cols`` columns refer to tracks that existed
    before the frame, the rest to tracks spawned in it (in spawn order).
    ``det_indices`` optionally records which detection each row came from.
    """
    entries: np.ndarray
    old_cols: int
    det_indices: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        y = np.asarray(self.entries, dtype=np.float64)
        if y.ndim != 2:
            raise InvalidArgumentError("label entries must be a 2-D matrix")
        if self.old_cols < 0 or self.old_cols > y.shape[1]:
            raise InvalidArgumentError(
                f"old_cols={self.old_cols} outside [0, {y.shape[1]}]"
            )
        if not np.all((y == 0.0) | (y == 1.0)):
            raise InvalidArgumentError("label entries must be 0 or 1")
        if np.any(y.sum(axis=1) > 1):
            raise InvalidArgumentError("a detection may train at most one track")
        new_block = y[:, self.old_cols:]
        if new_block.shape[1] and not np.all(new_block.sum(axis=0) == 1):
            raise InvalidArgumentError("each new track column needs exactly one detection")
        if self.det_indices and len(self.det_indices) != y.shape[0]:
            raise InvalidArgumentError("det_indices must match the number of label rows")
        y.setflags(write=False)
        object.__setattr__(self, "entries", y)

    @property
    def n_rows(self) -> int:
        return self.entries.shape[0]

    @property
    def new_cols(self) -> int:
        return self.entries.shape[1] - self.old_cols

    @property
    def y_old(self) -> np.ndarray:
        return self.entries[:, :self.old_cols]

    @property
    def y_new(self) -> np.ndarray:
        return self.entries[:, self.old_cols:]

    @classmethod
    def from_columns(
        cls,
        columns: Sequence[int],
        old_cols: int,
        det_indices: Sequence[int] = (),
    ) -> "LabelMatrix":
        """
        Build labels from the target column of each row.

        Columns ``>= old_cols`` must be consecutive new columns starting at
        ``old_cols``.
        """
        columns = list(columns)
        spawned = [c for c in columns if c >= old_cols]
        new_cols = len(spawned)
        if sorted(spawned) != list(range(old_cols, old_cols + new_cols)):
            raise InvalidArgumentError(
                f"new columns {spawned} are not the consecutive block starting at {old_cols}"
            )
        y = np.zeros((len(columns), old_cols + new_cols))
        for row, col in enumerate(columns):
            if col < 0:
                raise InvalidArgumentError(f"negative label column {col}")
            y[row, col] = 1.0
        return cls(entries=y, old_cols=old_cols, det_indices=tuple(det_indices))

    def padded(self, total_cols: int) -> np.ndarray:
        """Labels widened with zero columns to ``total_cols``."""
        if total_cols < self.entries.shape[1]:
            raise InvalidArgumentError(
                f"cannot pad {self.entries.shape[1]} label columns down to {total_cols}"
            )
        out = np.zeros((self.n_rows, total_cols))
        out[:, :self.entries.shape[1]] = self.entries
        return out
