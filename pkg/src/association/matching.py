"""Cost matrices and thresholded Hungarian assignment."""
import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from src.errors import InvalidArgumentError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AssignmentOutcome:
    """Matches as (row, column) pairs plus the rows and columns left over."""
    matches: Tuple[Tuple[int, int], ...] = ()
    unmatched_dets: Tuple[int, ...] = ()
    unmatched_tracks: Tuple[int, ...] = ()

    def matched_cost(self, cost: np.ndarray) -> float:
        return float(sum(cost[r, c] for r, c in self.matches))


def affinity_submatrix(o: np.ndarray, active: Sequence[int]) -> np.ndarray:
    """
    Gather the columns of the FAC output that belong to the given tracks, in order.

    Raises:
        InvalidArgumentError: On out-of-range or repeated column indices
    """
    o = np.asarray(o, dtype=np.float64)
    if o.ndim != 2:
        raise InvalidArgumentError("affinity output must be a 2-D matrix")
    active = [int(c) for c in active]
    if len(set(active)) != len(active):
        raise InvalidArgumentError(f"active track columns are not distinct: {active}")
    for c in active:
        if not 0 <= c < o.shape[1]:
            raise InvalidArgumentError(f"track column {c} outside [0, {o.shape[1]})")
    if not active:
        return np.zeros((o.shape[0], 0))
    return o[:, active]


def to_distance(a: np.ndarray) -> np.ndarray:
    """Affinity to distance: clamp(1 - a, 0, 1)."""
    return np.clip(1.0 - np.asarray(a, dtype=np.float64), 0.0, 1.0)


def cosine_distance(dets: np.ndarray, tracks: np.ndarray) -> np.ndarray:
    """
    Pairwise clamp(1 - cosine similarity, 0, 1).

    Raises:
        InvalidArgumentError: If any row has zero norm or the widths differ
    """
    a = np.asarray(dets, dtype=np.float64)
    b = np.asarray(tracks, dtype=np.float64)
    if len(a) == 0 or len(b) == 0:
        return np.zeros((len(a), len(b)))
    if a.shape[1] != b.shape[1]:
        raise InvalidArgumentError(f"embedding widths differ: {a.shape[1]} vs {b.shape[1]}")
    na = np.linalg.norm(a, axis=1, keepdims=True)
    nb = np.linalg.norm(b, axis=1, keepdims=True)
    if np.any(na == 0) or np.any(nb == 0):
        raise InvalidArgumentError("cosine distance of a zero-norm embedding")
    return np.clip(1.0 - (a / na) @ (b / nb).T, 0.0, 1.0)


def solve_assignment(cost: np.ndarray, threshold: float) -> AssignmentOutcome:
    """
    Minimum-cost matching with pairs above ``threshold`` forbidden.

    Forbidden pairs receive a penalty larger than any feasible total, so the
    solver first maximizes the number of feasible pairs and then minimizes
    their cost; any forbidden pair it still returns is dissolved.
    """
    cost = np.asarray(cost, dtype=np.float64)
    n_rows, n_cols = cost.shape if cost.ndim == 2 else (0, 0)
    if n_rows == 0 or n_cols == 0:
        return AssignmentOutcome(
            unmatched_dets=tuple(range(n_rows)),
            unmatched_tracks=tuple(range(n_cols)),
        )

    forbidden = cost > threshold
    work = cost.copy()
    if forbidden.any():
        feasible = cost[~forbidden]
        span = float(np.abs(feasible).max()) if feasible.size else 0.0
        work[forbidden] = (span + 1.0) * (min(n_rows, n_cols) + 1)
    rows, cols = linear_sum_assignment(work)

    matches: List[Tuple[int, int]] = []
    for r, c in zip(rows, cols):
        if not forbidden[r, c]:
            matches.append((int(r), int(c)))
    matched_rows = {r for r, _ in matches}
    matched_cols = {c for _, c in matches}
    return AssignmentOutcome(
        matches=tuple(matches),
        unmatched_dets=tuple(r for r in range(n_rows) if r not in matched_rows),
        unmatched_tracks=tuple(c for c in range(n_cols) if c not in matched_cols),
    )
