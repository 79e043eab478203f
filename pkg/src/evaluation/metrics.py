"""CLEAR MOT metrics (MOTA, FP, FN, IDSW) and identity F1.

HOTA and its sub-metrics are intentionally not computed.
"""
import logging
from collections import defaultdict
from typing import Dict, List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy.optimize import linear_sum_assignment

from src.mot_io.mot_files import MotRow

logger = logging.getLogger(__name__)


class MetricsReport(BaseModel):
    """Tracking accuracy summary for one sequence (or an aggregate)."""
    mota: float = Field(le=1.0)
    idf1: float = Field(ge=0.0, le=1.0)
    idp: float = Field(0.0, ge=0.0, le=1.0)
    idr: float = Field(0.0, ge=0.0, le=1.0)
    recall: float = Field(0.0, ge=0.0, le=1.0)
    precision: float = Field(0.0, ge=0.0, le=1.0)
    fp: int = Field(ge=0)
    fn: int = Field(ge=0)
    idsw: int = Field(ge=0)
    matches: int = Field(0, ge=0)
    gt_count: int = Field(ge=0)


def _by_frame(rows: Sequence[MotRow]) -> Dict[int, Tuple[np.ndarray, np.ndarray]]:
    """frame -> (ids, tlwh boxes)."""
    grouped: Dict[int, List[MotRow]] = defaultdict(list)
    for row in rows:
        grouped[row.frame].append(row)
    return {
        frame: (
            np.array([r.id for r in frame_rows], dtype=np.int64),
            np.array([[r.left, r.top, r.width, r.height] for r in frame_rows], dtype=np.float64),
        )
        for frame, frame_rows in grouped.items()
    }


def _iou_tlwh(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if len(a) == 0 or len(b) == 0:
        return np.zeros((len(a), len(b)))
    a_tl, a_br = a[:, None, :2], a[:, None, :2] + a[:, None, 2:]
    b_tl, b_br = b[None, :, :2], b[None, :, :2] + b[None, :, 2:]
    wh = np.maximum(0.0, np.minimum(a_br, b_br) - np.maximum(a_tl, b_tl))
    inter = wh[..., 0] * wh[..., 1]
    union = a[:, None, 2] * a[:, None, 3] + b[None, :, 2] * b[None, :, 3] - inter
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(union > 0, inter / union, 0.0)
    return out


def _clear_counts(results: Sequence[MotRow], gt: Sequence[MotRow], iou_thresh: float):
    """Per-frame CLEAR matching. Returns (tp, fp, fn, idsw, gt_count)."""
    gt_frames = _by_frame(gt)
    hyp_frames = _by_frame(results)
    empty = (np.zeros(0, dtype=np.int64), np.zeros((0, 4)))

    tp = fp = fn = idsw = 0
    previous: Dict[int, int] = {}    # gt id -> hyp id matched in the previous frame
    last_match: Dict[int, int] = {}  # gt id -> hyp id of its most recent match
    for frame in sorted(set(gt_frames) | set(hyp_frames)):
        g_ids, g_boxes = gt_frames.get(frame, empty)
        h_ids, h_boxes = hyp_frames.get(frame, empty)
        overlap = _iou_tlwh(g_boxes, h_boxes)
        valid = overlap >= iou_thresh

        pairs: List[Tuple[int, int]] = []
        g_free = set(range(len(g_ids)))
        h_free = set(range(len(h_ids)))
        # keep last frame's correspondences while they still overlap enough
        h_index = {int(h): j for j, h in enumerate(h_ids)}
        for i, g in enumerate(g_ids):
            j = h_index.get(previous.get(int(g), -1))
            if j is not None and j in h_free and valid[i, j]:
                pairs.append((i, j))
                g_free.discard(i)
                h_free.discard(j)

        gi, hj = sorted(g_free), sorted(h_free)
        if gi and hj:
            sub_valid = valid[np.ix_(gi, hj)]
            cost = np.where(sub_valid, 1.0 - overlap[np.ix_(gi, hj)], 1e6)
            rows, cols = linear_sum_assignment(cost)
            for r, c in zip(rows, cols):
                if sub_valid[r, c]:
                    pairs.append((gi[r], hj[c]))

        current: Dict[int, int] = {}
        for i, j in pairs:
            g, h = int(g_ids[i]), int(h_ids[j])
            if g in last_match and last_match[g] != h:
                idsw += 1
            last_match[g] = h
            current[g] = h
        previous = current
        tp += len(pairs)
        fp += len(h_ids) - len(pairs)
        fn += len(g_ids) - len(pairs)
    return tp, fp, fn, idsw, len(gt)


def _identity_counts(results: Sequence[MotRow], gt: Sequence[MotRow], iou_thresh: float):
    """Global identity matching. Returns (idtp, gt_count, hyp_count)."""
    if not gt or not results:
        return 0, len(gt), len(results)
    gt_frames = _by_frame(gt)
    hyp_frames = _by_frame(results)
    g_list = sorted({r.id for r in gt})
    h_list = sorted({r.id for r in results})
    g_pos = {g: i for i, g in enumerate(g_list)}
    h_pos = {h: j for j, h in enumerate(h_list)}

    overlap_frames = np.zeros((len(g_list), len(h_list)))
    for frame, (g_ids, g_boxes) in gt_frames.items():
        if frame not in hyp_frames:
            continue
        h_ids, h_boxes = hyp_frames[frame]
        hits = _iou_tlwh(g_boxes, h_boxes) >= iou_thresh
        for i, j in zip(*np.nonzero(hits)):
            overlap_frames[g_pos[int(g_ids[i])], h_pos[int(h_ids[j])]] += 1

    rows, cols = linear_sum_assignment(-overlap_frames)
    idtp = int(overlap_frames[rows, cols].sum())
    return idtp, len(gt), len(results)


def idf1(results: Sequence[MotRow], gt: Sequence[MotRow], iou_thresh: float = 0.5) -> float:
    """IDF1 = 2 IDTP / (2 IDTP + IDFP + IDFN) under the best one-to-one id mapping."""
    idtp, n_gt, n_hyp = _identity_counts(results, gt, iou_thresh)
    if n_gt + n_hyp == 0:
        return 0.0
    return 2.0 * idtp / (n_gt + n_hyp)


def clear_metrics(results: Sequence[MotRow], gt: Sequence[MotRow], iou_thresh: float = 0.5) -> MetricsReport:
    """
    Compute MOTA, FP, FN and IDSW (plus IDF1 and its precision/recall).

    MOTA = 1 - (FP + FN + IDSW) / max(gt_count, 1).
    """
    tp, fp, fn, idsw, gt_count = _clear_counts(results, gt, iou_thresh)
    idtp, n_gt, n_hyp = _identity_counts(results, gt, iou_thresh)
    report = MetricsReport(
        mota=1.0 - (fp + fn + idsw) / max(gt_count, 1),
        idf1=2.0 * idtp / (n_gt + n_hyp) if n_gt + n_hyp else 0.0,
        idp=idtp / n_hyp if n_hyp else 0.0,
        idr=idtp / n_gt if n_gt else 0.0,
        recall=tp / gt_count if gt_count else 0.0,
        precision=tp / (tp + fp) if tp + fp else 0.0,
        fp=fp,
        fn=fn,
        idsw=idsw,
        matches=tp,
        gt_count=gt_count,
    )
    logger.info(f"MOTA={report.mota:.4f} IDF1={report.idf1:.4f} IDSW={report.idsw} FP={fp} FN={fn}")
    return report


def aggregate_reports(reports: Sequence[MetricsReport]) -> MetricsReport:
    """
    Combine per-sequence reports into one suite-level report.

    Counts are summed and MOTA, recall and precision are recomputed from the
    sums; IDF1, IDP and IDR are averaged over sequences.
    """
    if not reports:
        return MetricsReport(mota=0.0, idf1=0.0, fp=0, fn=0, idsw=0, gt_count=0)
    fp = sum(r.fp for r in reports)
    fn = sum(r.fn for r in reports)
    idsw = sum(r.idsw for r in reports)
    tp = sum(r.matches for r in reports)
    gt_count = sum(r.gt_count for r in reports)
    return MetricsReport(
        mota=1.0 - (fp + fn + idsw) / max(gt_count, 1),
        idf1=float(np.mean([r.idf1 for r in reports])),
        idp=float(np.mean([r.idp for r in reports])),
        idr=float(np.mean([r.idr for r in reports])),
        recall=tp / gt_count if gt_count else 0.0,
        precision=tp / (tp + fp) if tp + fp else 0.0,
        fp=fp,
        fn=fn,
        idsw=idsw,
        matches=tp,
        gt_count=gt_count,
    )
