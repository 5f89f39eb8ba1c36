"""Writer for the ECX binary container consumed by the analysis toolkit.

Format (little-endian): magic "ECX1", version u16=1, flags u16=0,
L u32, D u32, V u32, N u64; then V vocab entries (u16 length + UTF-8
bytes, word_id = entry index); then N records of (word_id u32,
sentence_id u32, position u32, L*D f32 layer-major).
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"ECX1"
VERSION = 1

_HEADER = struct.Struct("<4sHHIIIQ")
_REC_HEAD = struct.Struct("<III")


class EcxWriteError(ValueError):
    pass


def write_ecx(
    path: str | Path,
    num_layers: int,
    dim: int,
    vocab: list[str],
    records: list[tuple[int, int, int, np.ndarray]],
) -> None:
    """Records are (word_id, sentence_id, position, (L, D) float32 array)."""
    chunks = [_HEADER.pack(MAGIC, VERSION, 0, num_layers, dim, len(vocab), len(records))]
    for word in vocab:
        enc = word.encode("utf-8")
        if len(enc) > 0xFFFF:
            raise EcxWriteError(f"vocab entry too long: {len(enc)} bytes")
        chunks.append(struct.pack("<H", len(enc)))
        chunks.append(enc)
    for word_id, sentence_id, position, vectors in records:
        if vectors.shape != (num_layers, dim):
            raise EcxWriteError(
                f"record shape {vectors.shape}, expected ({num_layers}, {dim})"
            )
        if not np.all(np.isfinite(vectors)):
            raise EcxWriteError("non-finite values in record payload")
        chunks.append(_REC_HEAD.pack(word_id, sentence_id, position))
        chunks.append(np.ascontiguousarray(vectors, dtype="<f4").tobytes())
    Path(path).write_bytes(b"".join(chunks))
