"""Embedding transformation (ET) layer: a fixed random projection followed by ReLU."""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.errors import InvalidArgumentError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EtLayer:
    """Random projection from ReID space (d_reid) into the transformed space (d_et).

    The weight matrix is fully determined by (seed, d_reid, d_et) and is
    read-only after construction.
    """
    seed: int
    d_reid: int
    d_et: int
    w_et: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.w_et.shape != (self.d_reid, self.d_et):
            raise InvalidArgumentError(
                f"w_et has shape {self.w_et.shape}, expected ({self.d_reid}, {self.d_et})"
            )
        self.w_et.setflags(write=False)

    @classmethod
    def from_matrix(cls, w_et: np.ndarray, seed: Optional[int] = 0) -> "EtLayer":
        """Wrap an explicit weight matrix (used to inject known weights)."""
        w = np.array(w_et, dtype=np.float64)
        if w.ndim != 2:
            raise InvalidArgumentError("w_et must be a 2-D matrix")
        return cls(seed=seed, d_reid=w.shape[0], d_et=w.shape[1], w_et=w)


def make_et_layer(seed: int, d_reid: int, d_et: int) -> EtLayer:
    """
    Build the ET layer from a seeded generator.

    Entries are i.i.d. standard normal scaled by 1/sqrt(d_reid), which keeps
    the projected norm of a unit input at one in expectation.

    Raises:
        InvalidArgumentError: If either dimension is below 1 or the seed is negative
    """
    if d_reid < 1 or d_et < 1:
        raise InvalidArgumentError(f"ET layer dimensions must be >= 1, got d_reid={d_reid}, d_et={d_et}")
    if seed < 0:
        raise InvalidArgumentError(f"seed must be unsigned, got {seed}")
    rng = np.random.default_rng(seed)
    w = rng.standard_normal((d_reid, d_et)) / np.sqrt(d_reid)
    logger.debug(f"Built ET layer seed={seed} ({d_reid} -> {d_et})")
    return EtLayer(seed=seed, d_reid=d_reid, d_et=d_et, w_et=w)


def transform(layer: EtLayer, x_reid: np.ndarray) -> np.ndarray:
    """
    Map ReID embeddings through the ET layer: max(0, x_reid @ w_et).

    Rows are expected to be L2-normalized by the caller.

    Raises:
        InvalidArgumentError: If the column count differs from layer.d_reid
    """
    x = np.asarray(x_reid, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    if x.ndim != 2 or x.shape[1] != layer.d_reid:
        raise InvalidArgumentError(
            f"embeddings have shape {x.shape}, expected (N, {layer.d_reid})"
        )
    return np.maximum(x @ layer.w_et, 0.0)
