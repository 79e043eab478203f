"""MOTChallenge-style text files: detections, ground truth and tracking results.

Rows are ``frame,id,left,top,width,height,conf,x,y,z``. Detection files use
id -1; ground truth and results use positive ids.
"""
import logging
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Union

import numpy as np

from src.errors import InvalidArgumentError, ParseError
from src.motion.geometry import BBox

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
MIN_FIELDS = 7
MAX_FIELDS = 10


@dataclass(frozen=True, order=True)
class MotRow:
    frame: int
    id: int
    left: float
    top: float
    width: float
    height: float
    conf: float = 1.0
    x: float = -1.0
    y: float = -1.0
    z: float = -1.0

    @property
    def box(self) -> BBox:
        return BBox(self.left, self.top, self.width, self.height, self.conf)

    @classmethod
    def from_box(cls, frame: int, track_id: int, box: BBox) -> "MotRow":
        return cls(frame, track_id, box.left, box.top, box.width, box.height, box.confidence)


def format_number(value: float) -> str:
    """Shortest decimal text that parses back to the same float."""
    if float(value).is_integer():
        return str(int(value))
    return np.format_float_positional(float(value), unique=True, trim="-")


def format_row(row: MotRow) -> str:
    fields = [str(row.frame), str(row.id)]
    fields += [format_number(v) for v in (row.left, row.top, row.width, row.height, row.conf, row.x, row.y, row.z)]
    return ",".join(fields)


def parse_rows(text: str, source: str = "<text>") -> List[MotRow]:
    """
    Parse comma-separated MOT rows, keeping file order.

    Raises:
        ParseError: On rows with fewer than 7 or more than 10 fields, bad numbers,
            frame < 1 or a box without positive size
    """
    rows = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        if not MIN_FIELDS <= len(fields) <= MAX_FIELDS:
            raise ParseError(
                f"expected {MIN_FIELDS}-{MAX_FIELDS} comma-separated fields, got {len(fields)}",
                path=source, line=line_no,
            )
        try:
            frame = int(float(fields[0]))
            track_id = int(float(fields[1]))
            values = [float(f) for f in fields[2:]]
        except ValueError as e:
            raise ParseError(f"non-numeric field: {e}", path=source, line=line_no) from e
        if frame < 1:
            raise ParseError(f"frame must be >= 1, got {frame}", path=source, line=line_no)
        if not (values[2] > 0 and values[3] > 0):
            raise ParseError(f"box size must be positive, got {fields[4]}x{fields[5]}", path=source, line=line_no)
        values += [-1.0] * (MAX_FIELDS - 2 - len(values))
        rows.append(MotRow(frame, track_id, *values))
    return rows


def group_by_frame(rows: Iterable[MotRow]) -> "OrderedDict[int, List[BBox]]":
    """Group detection rows by frame (ascending), preserving file order within a frame."""
    frames: Dict[int, List[BBox]] = {}
    for row in rows:
        frames.setdefault(row.frame, []).append(row.box)
    return OrderedDict(sorted(frames.items()))


def parse_detections_text(text: str, source: str = "<text>") -> "OrderedDict[int, List[BBox]]":
    return group_by_frame(parse_rows(text, source))


def parse_detections(path: PathLike) -> "OrderedDict[int, List[BBox]]":
    """Read a detection file into per-frame box lists."""
    frames = parse_detections_text(Path(path).read_text(encoding="utf-8"), source=str(path))
    logger.info(f"Loaded {sum(len(b) for b in frames.values())} detections over {len(frames)} frames from {path}")
    return frames


def _positive_ids(rows: List[MotRow], source: str) -> List[MotRow]:
    for row in rows:
        if row.id <= 0:
            raise ParseError(f"frame {row.frame}: track id must be positive, got {row.id}", path=source)
    return rows


def parse_gt_text(text: str, source: str = "<text>") -> List[MotRow]:
    return _positive_ids(parse_rows(text, source), source)


def parse_gt(path: PathLike) -> List[MotRow]:
    """Read ground-truth (or result) rows; every id must be positive."""
    rows = parse_gt_text(Path(path).read_text(encoding="utf-8"), source=str(path))
    logger.info(f"Loaded {len(rows)} labelled rows from {path}")
    return rows


def format_results(rows: Sequence[MotRow]) -> str:
    """
    Render result rows sorted by (frame, id).

    Raises:
        InvalidArgumentError: If any id is not positive
    """
    for row in rows:
        if row.id <= 0:
            raise InvalidArgumentError(f"frame {row.frame}: result id must be positive, got {row.id}")
    ordered = sorted(rows, key=lambda r: (r.frame, r.id))
    return "".join(format_row(r) + "\n" for r in ordered)


def write_results(path: PathLike, rows: Sequence[MotRow]) -> None:
    """Write result rows; validation happens before the file is touched."""
    text = format_results(rows)
    Path(path).write_text(text, encoding="utf-8")
    logger.info(f"Wrote {len(rows)} result rows to {path}")


def write_detections(path: PathLike, frames: Dict[int, Sequence[BBox]]) -> None:
    """Write per-frame boxes as a detection file (id -1)."""
    lines = []
    for frame in sorted(frames):
        for box in frames[frame]:
            lines.append(format_row(MotRow.from_box(frame, -1, box)))
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
