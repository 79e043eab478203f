"""Little-endian binary checkpoints of the FAC learner.

Layout: magic b"FACW", version u32, gamma f64, d_et u32, d_T u32, then the
row-major f64 payloads of w_fcn (d_et x d_T) and r (d_et x d_et).
"""
import logging
import struct
from pathlib import Path
from typing import Union

import numpy as np

from src.errors import InvalidArgumentError, ParseError
from src.fac.learner import FacState

logger = logging.getLogger(__name__)

MAGIC = b"FACW"
VERSION = 1
_HEADER = struct.Struct("<4sIdII")


def dump_snapshot(state: FacState) -> bytes:
    """Serialize a learner state. The frame counter is not part of the format."""
    header = _HEADER.pack(MAGIC, VERSION, state.gamma, state.d_et, state.d_t)
    w = np.ascontiguousarray(state.w_fcn, dtype="<f8")
    r = np.ascontiguousarray(state.r, dtype="<f8")
    return header + w.tobytes() + r.tobytes()


def parse_snapshot(data: bytes, source: str = "<bytes>") -> FacState:
    """
    Restore a learner state written by dump_snapshot.

    Raises:
        ParseError: On bad magic, unknown version or a truncated payload
    """
    if len(data) < _HEADER.size:
        raise ParseError("snapshot header truncated", path=source)
    magic, version, gamma, d_et, d_t = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ParseError(f"bad snapshot magic {magic!r}", path=source)
    if version != VERSION:
        raise ParseError(f"unsupported snapshot version {version}", path=source)
    expected = _HEADER.size + 8 * (d_et * d_t + d_et * d_et)
    if len(data) != expected:
        raise ParseError(f"snapshot has {len(data)} bytes, expected {expected}", path=source)
    payload = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    w = payload[: d_et * d_t].reshape(d_et, d_t).astype(np.float64)
    r = payload[d_et * d_t:].reshape(d_et, d_et).astype(np.float64)
    if not gamma > 0:
        raise ParseError(f"snapshot gamma must be > 0, got {gamma}", path=source)
    return FacState(gamma=gamma, d_et=d_et, w_fcn=w, r=r, frame_counter=0)


def save_snapshot(state: FacState, path: Union[str, Path]) -> None:
    """Write a learner checkpoint to ``path``."""
    if state.d_et < 1:
        raise InvalidArgumentError("cannot snapshot an empty learner")
    Path(path).write_bytes(dump_snapshot(state))
    logger.info(f"Saved FAC snapshot ({state.d_et} x {state.d_t}) to {path}")


def load_snapshot(path: Union[str, Path]) -> FacState:
    """Read a learner checkpoint from ``path``."""
    return parse_snapshot(Path(path).read_bytes(), source=str(path))
