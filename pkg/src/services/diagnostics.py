"""Numerical self-test and update-cost benchmark for the FAC learner."""
import logging
import time
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
from scipy import stats

from src.errors import InvalidArgumentError
from src.fac.labels import LabelMatrix
from src.fac.learner import FacState, base_learn, continual_update, init_fac

logger = logging.getLogger(__name__)

ORACLE_TOLERANCE = 1e-8
WOODBURY_TOLERANCE = 1e-7
MIN_R_SQUARED = 0.95
F_TEST_ALPHA = 0.05


@dataclass
class SelftestReport:
    max_oracle_error: float
    max_woodbury_error: float
    elapsed: float
    histories: int

    @property
    def passed(self) -> bool:
        return self.max_oracle_error <= ORACLE_TOLERANCE and self.max_woodbury_error <= WOODBURY_TOLERANCE


def random_history(
    rng: np.random.Generator,
    n_frames: int,
    d_et: int,
    max_dets: int = 10,
    max_tracks: int = 20,
) -> List[Tuple[np.ndarray, LabelMatrix]]:
    """
    A random training history shaped like a tracker's: each frame has up to
    ``max_dets`` rows, some opening new track columns until ``max_tracks``
    exist, the rest labelled with distinct existing columns or left unlabelled.
    """
    history = []
    cols = 0
    for _ in range(n_frames):
        n = int(rng.integers(1, max_dets + 1))
        room = min(n, max_tracks - cols)
        n_new = int(rng.integers(1 if cols == 0 else 0, room + 1))
        n_old = min(n - n_new, cols)
        old = list(rng.choice(cols, size=n_old, replace=False)) if n_old else []
        columns = [int(c) for c in old] + list(range(cols, cols + n_new))
        entries = np.zeros((n, cols + n_new))
        for row, col in zip(rng.permutation(n), columns):
            entries[row, col] = 1.0
        x = np.maximum(rng.standard_normal((n, d_et)), 0.0)
        history.append((x, LabelMatrix(entries, old_cols=cols)))
        cols += n_new
    return history


def _relative_error(a: np.ndarray, b: np.ndarray) -> float:
    scale = np.linalg.norm(b)
    return float(np.linalg.norm(a - b) / scale) if scale else float(np.linalg.norm(a))


def selftest(
    seed: int = 0,
    histories: int = 5,
    n_frames: int = 50,
    d_et: int = 64,
    gamma: float = 1.0,
) -> SelftestReport:
    """
    Compare the recursive learner against the batch solution after every frame.

    Two errors are tracked: the relative Frobenius error of the weights
    against ``base_learn`` on the same prefix, and the largest entry of
    r (gamma I + sum X^T X) - I.
    """
    rng = np.random.default_rng(seed)
    oracle_error = woodbury_error = 0.0
    start = time.perf_counter()
    for _ in range(histories):
        history = random_history(rng, n_frames, d_et)
        state = init_fac(gamma, d_et)
        gram = gamma * np.eye(d_et)
        for k, (x, labels) in enumerate(history, start=1):
            state = continual_update(state, x, labels, frame=k)
            gram += x.T @ x
            oracle = base_learn(gamma, history[:k])
            oracle_error = max(oracle_error, _relative_error(state.w_fcn, oracle.w_fcn))
            woodbury_error = max(woodbury_error, float(np.max(np.abs(state.r @ gram - np.eye(d_et)))))
    elapsed = time.perf_counter() - start
    report = SelftestReport(oracle_error, woodbury_error, elapsed, histories)
    logger.info(
        f"Selftest: oracle error {oracle_error:.3e}, Woodbury error {woodbury_error:.3e} in {elapsed:.2f}s"
    )
    return report


@dataclass
class BenchReport:
    track_counts: List[int]
    seconds: List[float]
    intercept: float
    slope: float
    r_squared: float
    f_statistic: float
    p_value: float
    points: List[Tuple[int, float]] = field(init=False)

    def __post_init__(self):
        self.points = list(zip(self.track_counts, self.seconds))

    @property
    def passed(self) -> bool:
        """Linear fit explains the timings and a quadratic term adds nothing significant."""
        return self.r_squared >= MIN_R_SQUARED and self.p_value >= F_TEST_ALPHA


def _learner_with_tracks(rng: np.random.Generator, d_t: int, d_et: int, gamma: float) -> FacState:
    state = init_fac(gamma, d_et)
    return FacState(
        gamma=state.gamma,
        d_et=d_et,
        w_fcn=rng.standard_normal((d_et, d_t)),
        r=state.r,
    )


def time_update(state: FacState, x: np.ndarray, labels: LabelMatrix, repeats: int) -> float:
    """Best-of-``repeats`` wall time of one continual_update."""
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        continual_update(state, x, labels)
        best = min(best, time.perf_counter() - start)
    return float(best)


def fit_scaling(track_counts: Sequence[int], seconds: Sequence[float]) -> Tuple[float, float, float, float, float]:
    """
    Fit t = a + b d_T and test whether adding a quadratic term helps.

    Returns:
        (intercept, slope, r_squared, f_statistic, p_value) where the F-test
        compares the linear and quadratic least-squares fits
    """
    d = np.asarray(track_counts, dtype=np.float64)
    t = np.asarray(seconds, dtype=np.float64)
    line = stats.linregress(d, t)
    rss_linear = float(np.sum((t - (line.intercept + line.slope * d)) ** 2))
    rss_quadratic = float(np.sum((t - np.polyval(np.polyfit(d, t, 2), d)) ** 2))
    dof = len(d) - 3
    if dof < 1 or rss_quadratic <= 0:
        return float(line.intercept), float(line.slope), float(line.rvalue ** 2), 0.0, 1.0
    f_stat = max(0.0, (rss_linear - rss_quadratic) / (rss_quadratic / dof))
    p_value = float(stats.f.sf(f_stat, 1, dof))
    return float(line.intercept), float(line.slope), float(line.rvalue ** 2), f_stat, p_value


def bench(
    tracks_max: int = 1000,
    step: int = 50,
    d_et: int = 256,
    n_dets: int = 10,
    repeats: int = 5,
    seed: int = 0,
    gamma: float = 1.0,
) -> BenchReport:
    """Time one learner update for d_T = step, 2 step, ..., tracks_max stored tracks."""
    rng = np.random.default_rng(seed)
    counts = list(range(step, tracks_max + 1, step))
    if len(counts) < 3:
        raise InvalidArgumentError(f"need at least 3 track counts, got {len(counts)} (tracks_max={tracks_max}, step={step})")
    seconds = []
    for d_t in counts:
        state = _learner_with_tracks(rng, d_t, d_et, gamma)
        x = np.maximum(rng.standard_normal((n_dets, d_et)), 0.0)
        columns = rng.choice(d_t, size=min(n_dets, d_t), replace=False)
        labels = LabelMatrix.from_columns([int(c) for c in columns], old_cols=d_t)
        seconds.append(time_update(state, x[:len(columns)], labels, repeats))
        logger.debug(f"d_T={d_t}: {seconds[-1] * 1e3:.3f} ms")

    intercept, slope, r_squared, f_stat, p_value = fit_scaling(counts, seconds)
    report = BenchReport(counts, seconds, intercept, slope, r_squared, f_stat, p_value)
    logger.info(f"Bench: slope {slope:.3e} s/track, R^2 {r_squared:.4f}, quadratic p={p_value:.3f}")
    return report
