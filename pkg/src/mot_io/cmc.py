"""Precomputed camera-motion files: ``frame a11 a12 a13 a21 a22 a23`` per line."""
import logging
from pathlib import Path
from typing import Dict, Union

import numpy as np

from src.errors import InvalidArgumentError, ParseError
from src.motion.geometry import AffineTransform

logger = logging.getLogger(__name__)


def parse_cmc_text(text: str, source: str = "<text>") -> Dict[int, AffineTransform]:
    """
    Parse per-frame affine transforms. Frames must be strictly ascending;
    frames not listed are treated as identity by the caller.

    Raises:
        ParseError: On malformed lines, non-ascending frames or singular transforms
    """
    transforms: Dict[int, AffineTransform] = {}
    last = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        fields = raw.split()
        if not fields:
            continue
        if len(fields) != 7:
            raise ParseError(f"expected 7 whitespace-separated fields, got {len(fields)}", path=source, line=line_no)
        try:
            frame = int(fields[0])
            values = np.array([float(v) for v in fields[1:]]).reshape(2, 3)
        except ValueError as e:
            raise ParseError(f"non-numeric field: {e}", path=source, line=line_no) from e
        if last is not None and frame <= last:
            raise ParseError(f"frame {frame} after frame {last}", path=source, line=line_no)
        try:
            transforms[frame] = AffineTransform(values)
        except InvalidArgumentError as e:
            raise ParseError(str(e), path=source, line=line_no) from e
        last = frame
    return transforms


def read_cmc(path: Union[str, Path]) -> Dict[int, AffineTransform]:
    transforms = parse_cmc_text(Path(path).read_text(encoding="utf-8"), source=str(path))
    logger.info(f"Loaded {len(transforms)} camera-motion transforms from {path}")
    return transforms
