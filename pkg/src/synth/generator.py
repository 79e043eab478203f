"""Seeded generator of detections, embeddings and ground truth."""
import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

from src.errors import InvalidArgumentError
from src.mot_io.embeddings import write_embeddings
from src.mot_io.mot_files import MotRow, write_detections, write_results
from src.motion.geometry import BBox
from src.synth.scenario import ScenarioConfig
from src.tracker.frame_input import FrameInput

logger = logging.getLogger(__name__)

DETECTIONS_FILE = "det.txt"
EMBEDDINGS_FILE = "emb.bin"
GT_FILE = "gt.txt"
SCENARIO_FILE = "scenario.json"

_MAX_CENTROID_ATTEMPTS = 10000


@dataclass
class SyntheticSequence:
    config: ScenarioConfig
    detections: "OrderedDict[int, List[BBox]]"
    embeddings: Dict[int, np.ndarray] = field(repr=False)
    gt: List[MotRow] = field(repr=False)

    def frames(self) -> Iterator[FrameInput]:
        """Every frame 1..n_frames, including frames without detections."""
        for frame in range(1, self.config.n_frames + 1):
            yield FrameInput(frame, tuple(self.detections[frame]), self.embeddings[frame])


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def sample_centroids(
    rng: np.random.Generator,
    n: int,
    d: int,
    min_angle_deg: float,
    existing: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Unit vectors with pairwise angle at least ``min_angle_deg`` (rejection sampling).

    When ``existing`` is given, the new vectors also keep that distance from
    its rows, which are not part of the result.
    """
    max_cos = np.cos(np.radians(min_angle_deg))
    taken: List[np.ndarray] = [] if existing is None else list(existing)
    accepted: List[np.ndarray] = []
    for _ in range(_MAX_CENTROID_ATTEMPTS):
        if len(accepted) == n:
            break
        c = _unit(rng.standard_normal(d))
        if all(float(c @ other) <= max_cos for other in taken):
            accepted.append(c)
            taken.append(c)
    if len(accepted) < n:
        raise InvalidArgumentError(
            f"could not place {n} identity centroids {min_angle_deg} degrees apart in {d} dimensions"
        )
    return np.array(accepted)


def _reflect(pos: float, vel: float, lo: float, hi: float):
    if pos < lo:
        return 2 * lo - pos, -vel
    if pos > hi:
        return 2 * hi - pos, -vel
    return pos, vel


def _tangents(rng: np.random.Generator, centroids: np.ndarray) -> np.ndarray:
    """Random unit directions orthogonal to each centroid, the great circles they drift along."""
    t = rng.standard_normal(centroids.shape)
    t -= np.sum(t * centroids, axis=1, keepdims=True) * centroids
    return t / np.linalg.norm(t, axis=1, keepdims=True)


def _sides(cfg: ScenarioConfig, centroids: np.ndarray, tangents: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Appearance centroids per side, shape (sides, n, d), with their drift directions.

    Scenarios with turns give every target a second side, drawn from a
    separate stream so that turn-free scenarios keep their random sequence.
    """
    if not cfg.turns:
        return centroids[None], tangents[None]
    side_rng = np.random.default_rng([cfg.seed, 1])
    backs = sample_centroids(side_rng, cfg.n_targets, cfg.d_reid, cfg.min_centroid_angle, existing=centroids)
    return np.stack([centroids, backs]), np.stack([tangents, _tangents(side_rng, backs)])


def generate(cfg: ScenarioConfig) -> SyntheticSequence:
    """
    Simulate one sequence.

    Targets move linearly and bounce off the arena walls. Each detection's
    embedding is the centroid of the side the target currently shows plus
    Gaussian noise, normalized; the centroids rotate slowly along great
    circles at ``drift_rate`` radians per frame. A turn reverses a target's
    heading and flips the side it shows. Dropout windows remove a target's
    detections (ground truth stays); contaminate windows mix the embedding
    toward the nearest other identity's front centroid. All random draws
    happen every frame regardless of occlusion, so windows never shift the
    random stream.
    """
    rng = np.random.default_rng(cfg.seed)
    n, d = cfg.n_targets, cfg.d_reid
    arena_w, arena_h = cfg.arena

    centroids = sample_centroids(rng, n, d, cfg.min_centroid_angle)
    views, view_tangents = _sides(cfg, centroids, _tangents(rng, centroids))
    side = np.zeros(n, dtype=np.int64)
    turns_at: Dict[int, List[int]] = {}
    for turn in cfg.turns:
        turns_at.setdefault(turn.frame, []).append(turn.target - 1)

    widths = rng.uniform(*cfg.box_width_range, size=n)
    heights = widths * cfg.aspect
    cx = rng.uniform(widths / 2, arena_w - widths / 2)
    cy = rng.uniform(heights / 2, arena_h - heights / 2)
    speed = rng.uniform(*cfg.velocity_range, size=n)
    heading = rng.uniform(0.0, 2 * np.pi, size=n)
    vx, vy = speed * np.cos(heading), speed * np.sin(heading)

    detections: "OrderedDict[int, List[BBox]]" = OrderedDict()
    embeddings: Dict[int, np.ndarray] = {}
    gt: List[MotRow] = []
    cos_t, sin_t = np.cos(cfg.drift_rate), np.sin(cfg.drift_rate)

    for frame in range(1, cfg.n_frames + 1):
        for i in turns_at.get(frame, ()):
            vx[i], vy[i] = -vx[i], -vy[i]
            side[i] = 1 - side[i]
        noise = rng.normal(0.0, cfg.embedding_std, size=(n, d))
        box_noise = rng.normal(0.0, cfg.box_noise, size=(n, 4))
        confidence = rng.uniform(*cfg.confidence_range, size=n)
        order = rng.permutation(n)

        boxes: List[BBox] = []
        rows: List[np.ndarray] = []
        for i in order:
            target = int(i) + 1
            left, top = cx[i] - widths[i] / 2, cy[i] - heights[i] / 2
            gt.append(MotRow(frame, target, left, top, widths[i], heights[i], 1.0))
            if any(w.mode == "dropout" and w.covers(target, frame) for w in cfg.occlusions):
                continue
            emb = _unit(views[side[i], i] + noise[i])
            if n > 1 and any(w.mode == "contaminate" and w.covers(target, frame) for w in cfg.occlusions):
                fronts = views[0]
                similarity = fronts @ fronts[i]
                similarity[i] = -np.inf
                other = fronts[int(np.argmax(similarity))]
                emb = _unit((1.0 - cfg.contamination_mix) * emb + cfg.contamination_mix * other)
            boxes.append(BBox(
                left + box_noise[i, 0],
                top + box_noise[i, 1],
                max(1.0, widths[i] + box_noise[i, 2]),
                max(1.0, heights[i] + box_noise[i, 3]),
                float(confidence[i]),
            ))
            rows.append(emb)
        detections[frame] = boxes
        embeddings[frame] = np.array(rows) if rows else np.zeros((0, d))

        for i in range(n):
            cx[i], vx[i] = _reflect(cx[i] + vx[i], vx[i], widths[i] / 2, arena_w - widths[i] / 2)
            cy[i], vy[i] = _reflect(cy[i] + vy[i], vy[i], heights[i] / 2, arena_h - heights[i] / 2)
        if cfg.drift_rate:
            views, view_tangents = (
                views * cos_t + view_tangents * sin_t,
                view_tangents * cos_t - views * sin_t,
            )

    gt.sort(key=lambda r: (r.frame, r.id))
    logger.debug(f"Generated scenario seed={cfg.seed}: {n} targets, {cfg.n_frames} frames")
    return SyntheticSequence(config=cfg, detections=detections, embeddings=embeddings, gt=gt)


def write_sequence(seq: SyntheticSequence, out_dir: Union[str, Path]) -> Path:
    """Write det.txt, emb.bin, gt.txt and scenario.json into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_detections(out / DETECTIONS_FILE, seq.detections)
    write_embeddings(out / EMBEDDINGS_FILE, seq.embeddings, seq.config.d_reid)
    write_results(out / GT_FILE, seq.gt)
    (out / SCENARIO_FILE).write_text(seq.config.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info(f"Wrote scenario seed={seq.config.seed} to {out}")
    return out
