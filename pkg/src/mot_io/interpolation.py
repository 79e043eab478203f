"""Linear interpolation of short gaps inside each track."""
from collections import defaultdict
from typing import Dict, List, Sequence

from src.config import FACT_INTERPOLATION_MAX_GAP
from src.mot_io.mot_files import MotRow


def interpolate(rows: Sequence[MotRow], max_gap: int = FACT_INTERPOLATION_MAX_GAP) -> List[MotRow]:
    """
    Fill missing frames of each id when the gap is at most ``max_gap`` frames.

    Box coordinates are interpolated linearly between the two endpoints; the
    confidence of a filled row is the smaller endpoint confidence. Output is
    sorted by (frame, id).
    """
    by_id: Dict[int, List[MotRow]] = defaultdict(list)
    for row in rows:
        by_id[row.id].append(row)

    out: List[MotRow] = list(rows)
    for track_rows in by_id.values():
        track_rows.sort(key=lambda r: r.frame)
        for a, b in zip(track_rows, track_rows[1:]):
            gap = b.frame - a.frame - 1
            if not 1 <= gap <= max_gap:
                continue
            conf = min(a.conf, b.conf)
            for step in range(1, gap + 1):
                t = step / (gap + 1)
                out.append(MotRow(
                    frame=a.frame + step,
                    id=a.id,
                    left=a.left + t * (b.left - a.left),
                    top=a.top + t * (b.top - a.top),
                    width=a.width + t * (b.width - a.width),
                    height=a.height + t * (b.height - a.height),
                    conf=conf,
                ))
    return sorted(out, key=lambda r: (r.frame, r.id))
