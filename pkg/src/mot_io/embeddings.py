"""Binary embedding sidecar.

Header: magic b"FACTEMB1", version u32 (=1), d_reid u32, record count u64.
Records: frame u32, det_index u32, then d_reid float32, all little-endian and
sorted by (frame, det_index) with det_index dense per frame.
"""
import logging
import struct
from pathlib import Path
from typing import Dict, Mapping, Optional, Union

import numpy as np

from src.errors import (
    EmbeddingCountMismatchError,
    EmbeddingFormatError,
    EmbeddingMagicError,
    InvalidArgumentError,
    TruncatedEmbeddingError,
)

logger = logging.getLogger(__name__)

MAGIC = b"FACTEMB1"
VERSION = 1
_HEADER = struct.Struct("<8sIIQ")


def _record_dtype(d_reid: int) -> np.dtype:
    return np.dtype([("frame", "<u4"), ("det_index", "<u4"), ("embedding", "<f4", (d_reid,))])


def dump_embeddings(frames: Mapping[int, np.ndarray], d_reid: int) -> bytes:
    """Serialize per-frame N x d_reid matrices."""
    if d_reid < 1:
        raise InvalidArgumentError(f"d_reid must be >= 1, got {d_reid}")
    dtype = _record_dtype(d_reid)
    chunks = []
    for frame in sorted(frames):
        emb = np.asarray(frames[frame])
        if emb.size == 0:
            continue
        if emb.ndim != 2 or emb.shape[1] != d_reid:
            raise InvalidArgumentError(f"frame {frame}: embeddings of shape {emb.shape}, expected (N, {d_reid})")
        block = np.zeros(emb.shape[0], dtype=dtype)
        block["frame"] = frame
        block["det_index"] = np.arange(emb.shape[0])
        block["embedding"] = emb.astype("<f4")
        chunks.append(block)
    records = np.concatenate(chunks) if chunks else np.zeros(0, dtype=dtype)
    return _HEADER.pack(MAGIC, VERSION, d_reid, len(records)) + records.tobytes()


def parse_embeddings(
    data: bytes,
    expected_counts: Optional[Mapping[int, int]] = None,
    source: str = "<bytes>",
) -> Dict[int, np.ndarray]:
    """
    Decode a sidecar into per-frame float32 matrices.

    Args:
        data: Raw file contents
        expected_counts: Detections per frame; when given, every frame listed
            must have exactly that many records and no other frame may have any

    Raises:
        EmbeddingMagicError: Wrong magic or version
        TruncatedEmbeddingError: Payload shorter than the header declares
        EmbeddingCountMismatchError: Per-frame count differs from expected_counts
        EmbeddingFormatError: Unsorted records, sparse det indices or trailing bytes
    """
    if len(data) < _HEADER.size:
        raise TruncatedEmbeddingError("header truncated", path=source)
    magic, version, d_reid, count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise EmbeddingMagicError(f"bad magic {magic!r}", path=source)
    if version != VERSION:
        raise EmbeddingMagicError(f"unsupported version {version}", path=source)
    if d_reid < 1:
        raise EmbeddingFormatError(f"d_reid must be >= 1, got {d_reid}", path=source)
    dtype = _record_dtype(d_reid)
    payload = len(data) - _HEADER.size
    if payload < count * dtype.itemsize:
        raise TruncatedEmbeddingError(
            f"header declares {count} records but only {payload // dtype.itemsize} are present",
            path=source,
        )
    if payload > count * dtype.itemsize:
        raise EmbeddingFormatError(f"{payload - count * dtype.itemsize} trailing bytes", path=source)
    records = np.frombuffer(data, dtype=dtype, count=count, offset=_HEADER.size)

    frames: Dict[int, np.ndarray] = {}
    if count:
        keys = records["frame"].astype(np.int64) * (1 << 32) + records["det_index"]
        if np.any(np.diff(keys) <= 0):
            raise EmbeddingFormatError("records are not sorted by (frame, det_index)", path=source)
        boundaries = np.flatnonzero(np.diff(records["frame"])) + 1
        for block in np.split(records, boundaries):
            frame = int(block["frame"][0])
            if not np.array_equal(block["det_index"], np.arange(len(block))):
                raise EmbeddingFormatError(f"frame {frame}: det_index values are not 0..n-1", path=source)
            frames[frame] = np.array(block["embedding"], dtype=np.float32)

    if expected_counts is not None:
        for frame in sorted(set(expected_counts) | set(frames)):
            have = len(frames.get(frame, ()))
            want = expected_counts.get(frame, 0)
            if have != want:
                raise EmbeddingCountMismatchError(
                    f"{have} embeddings for {want} detections", frame=frame, path=source
                )
        for frame in expected_counts:
            frames.setdefault(frame, np.zeros((0, d_reid), dtype=np.float32))
    return frames


def read_embeddings(path: Union[str, Path], expected_counts: Optional[Mapping[int, int]] = None) -> Dict[int, np.ndarray]:
    """Read a sidecar file; see parse_embeddings."""
    frames = parse_embeddings(Path(path).read_bytes(), expected_counts, source=str(path))
    logger.info(f"Loaded embeddings for {len(frames)} frames from {path}")
    return frames


def write_embeddings(path: Union[str, Path], frames: Mapping[int, np.ndarray], d_reid: int) -> None:
    Path(path).write_bytes(dump_embeddings(frames, d_reid))
