"""The fixed 20-scenario evaluation suite."""
from typing import List, Tuple

import numpy as np

from src.synth.scenario import OcclusionWindow, ScenarioConfig, Turn

SUITE_SIZE = 20
TARGET_COUNTS = (5, 10, 20)
FRAME_COUNTS = (200, 500)
DROPOUT_LENGTHS = (5, 15, 40)
CONTAMINATION_MIXES = (0.3, 0.6)

_DRIFT_RATE = 0.001
_CONTAMINATION_LENGTH = (10, 30)
_FIRST_TURN = (25, 45)
_TURN_TO_DROPOUT = (40, 80)
# frames left after a dropout so the reappearance is scored
_TAIL = 25


def _episode(
    rng: np.random.Generator, target: int, n_frames: int, dropout: int
) -> Tuple[OcclusionWindow, List[Turn]]:
    """
    One occlusion episode: the target turns in plain view, and later turns
    again as it disappears, so it comes back elsewhere showing the side it
    was first seen with.
    """
    first = int(rng.integers(*_FIRST_TURN))
    latest = n_frames - dropout - _TAIL
    start = min(first + int(rng.integers(*_TURN_TO_DROPOUT)), latest)
    window = OcclusionWindow(target=target, start=start, end=start + dropout)
    return window, [Turn(target=target, frame=first), Turn(target=target, frame=start)]


def _events(
    rng: np.random.Generator, n_targets: int, n_frames: int, dropout: int
) -> Tuple[List[OcclusionWindow], List[Turn]]:
    windows: List[OcclusionWindow] = []
    turns: List[Turn] = []
    order = [int(t) + 1 for t in rng.permutation(n_targets)]
    n_dropped = max(1, n_targets // 3)
    for target in order[:n_dropped]:
        window, target_turns = _episode(rng, target, n_frames, dropout)
        windows.append(window)
        turns += target_turns

    n_contaminated = max(1, n_targets // 4)
    for target in order[n_dropped:n_dropped + n_contaminated]:
        length = int(rng.integers(*_CONTAMINATION_LENGTH))
        start = int(rng.integers(2, n_frames - length - 1))
        windows.append(OcclusionWindow(target=target, start=start, end=start + length, mode="contaminate"))
    return windows, turns


def scenario_suite(master_seed: int) -> List[ScenarioConfig]:
    """
    Twenty deterministic scenarios spanning every target count, sequence length,
    dropout length and contamination mix of the grid.

    Each scenario gets its own seed drawn from ``master_seed``. A third of the
    targets go through an occlusion episode and a quarter of the others get a
    contamination window. The longest dropouts are paired with the smaller
    target counts.
    """
    rng = np.random.default_rng(master_seed)
    suite = []
    for i in range(SUITE_SIZE):
        k = (i // 2) % len(DROPOUT_LENGTHS)
        n_targets = TARGET_COUNTS[(len(TARGET_COUNTS) - 1 - k + i % 2) % len(TARGET_COUNTS)]
        n_frames = FRAME_COUNTS[(i // 6) % len(FRAME_COUNTS)]
        dropout = DROPOUT_LENGTHS[k]
        mix = CONTAMINATION_MIXES[i % len(CONTAMINATION_MIXES)]
        seed = int(rng.integers(0, 2**31 - 1))
        windows, turns = _events(rng, n_targets, n_frames, dropout)
        suite.append(ScenarioConfig(
            seed=seed,
            n_targets=n_targets,
            n_frames=n_frames,
            drift_rate=_DRIFT_RATE,
            occlusions=windows,
            contamination_mix=mix,
            turns=turns,
        ))
    return suite
