"""ECX: a little-endian binary container for per-occurrence, per-layer vectors.

Layout (all integers little-endian):

    magic   4 bytes  ASCII "ECX1"
    version u16      = 1
    flags   u16      = 0
    L       u32      layer count (layer 0 = embedding layer)
    D       u32      hidden size
    V       u32      vocab size
    N       u64      record count
    vocab   V x (u16 length, UTF-8 bytes); word_id = entry index
    records N x (word_id u32, sentence_id u32, position u32,
                 payload L*D f32, layer-major)

Reads validate everything up front; a malformed file is always an error,
never a best-effort dataset.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    DataError,
    PayloadError,
    TruncatedFileError,
    UnsupportedVersionError,
)

MAGIC = b"ECX1"
VERSION = 1

_HEADER = struct.Struct("<4sHHIIIQ")
_REC_HEAD = struct.Struct("<III")


@dataclass
class EmbeddingRecord:
    word_id: int
    sentence_id: int
    position: int
    vectors: np.ndarray  # (L, D) float32

    @property
    def key(self) -> tuple[int, int]:
        return (self.sentence_id, self.position)


@dataclass
class EmbeddingDataset:
    num_layers: int
    dim: int
    vocab: list[str]  # word_id -> surface form
    records: list[EmbeddingRecord] = field(default_factory=list)

    def validate(self) -> None:
        if self.num_layers < 1 or self.dim < 1:
            raise DataError("L and D must be >= 1")
        seen: set[tuple[int, int]] = set()
        for i, rec in enumerate(self.records):
            if rec.vectors.shape != (self.num_layers, self.dim):
                raise DataError(
                    f"record {i}: payload shape {rec.vectors.shape} != "
                    f"({self.num_layers}, {self.dim})"
                )
            if not np.all(np.isfinite(rec.vectors)):
                raise PayloadError(f"record {i}: non-finite values in payload")
            if not 0 <= rec.word_id < len(self.vocab):
                raise DataError(f"record {i}: word_id {rec.word_id} not in vocab")
            if rec.key in seen:
                raise DataError(f"record {i}: duplicate occurrence key {rec.key}")
            seen.add(rec.key)


@dataclass
class LayerSlice:
    layer_index: int
    points: np.ndarray  # (N, D) float32
    keys: list[tuple[int, int]]  # row -> (sentence_id, position)
    word_ids: list[int]  # row -> word_id


def write_dataset(ds: EmbeddingDataset, path: str | Path) -> None:
    """Serialize to ECX. Invariants are checked before any byte is written."""
    ds.validate()
    chunks = [
        _HEADER.pack(MAGIC, VERSION, 0, ds.num_layers, ds.dim, len(ds.vocab), len(ds.records))
    ]
    for word in ds.vocab:
        enc = word.encode("utf-8")
        if len(enc) > 0xFFFF:
            raise DataError(f"vocab entry too long ({len(enc)} bytes)")
        chunks.append(struct.pack("<H", len(enc)))
        chunks.append(enc)
    for rec in ds.records:
        chunks.append(_REC_HEAD.pack(rec.word_id, rec.sentence_id, rec.position))
        chunks.append(np.ascontiguousarray(rec.vectors, dtype="<f4").tobytes())
    Path(path).write_bytes(b"".join(chunks))


def read_dataset(path: str | Path) -> EmbeddingDataset:
    """Parse and fully validate an ECX file."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise TruncatedFileError(
            f"{path}: header needs {_HEADER.size} bytes, file has {len(data)}"
        )
    magic, version, _flags, L, D, V, N = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise BadMagicError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise UnsupportedVersionError(f"{path}: unsupported version {version}")
    if L < 1 or D < 1:
        raise DataError(f"{path}: invalid header (L={L}, D={D})")

    off = _HEADER.size
    vocab: list[str] = []
    for i in range(V):
        if off + 2 > len(data):
            raise TruncatedFileError(f"{path}: truncated in vocab entry {i}")
        (wlen,) = struct.unpack_from("<H", data, off)
        off += 2
        if off + wlen > len(data):
            raise TruncatedFileError(f"{path}: truncated in vocab entry {i}")
        try:
            vocab.append(data[off : off + wlen].decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise DataError(f"{path}: vocab entry {i} is not valid UTF-8") from exc
        off += wlen

    payload_bytes = L * D * 4
    rec_bytes = _REC_HEAD.size + payload_bytes
    expected = off + N * rec_bytes
    if len(data) != expected:
        raise TruncatedFileError(
            f"{path}: record section expects {expected} bytes total, file has {len(data)}"
        )

    ds = EmbeddingDataset(num_layers=L, dim=D, vocab=vocab)
    for i in range(N):
        wid, sid, pos = _REC_HEAD.unpack_from(data, off)
        off += _REC_HEAD.size
        vec = np.frombuffer(data, dtype="<f4", count=L * D, offset=off).reshape(L, D)
        off += payload_bytes
        ds.records.append(EmbeddingRecord(wid, sid, pos, vec))
    ds.validate()
    return ds


def slice_layer(ds: EmbeddingDataset, layer: int) -> LayerSlice:
    """Copy one layer's vectors into a contiguous (N, D) matrix, record order."""
    if not 0 <= layer < ds.num_layers:
        raise DataError(f"layer {layer} out of range [0, {ds.num_layers})")
    n = len(ds.records)
    points = np.empty((n, ds.dim), dtype=np.float32)
    keys = []
    word_ids = []
    for i, rec in enumerate(ds.records):
        points[i] = rec.vectors[layer]
        keys.append(rec.key)
        word_ids.append(rec.word_id)
    return LayerSlice(layer_index=layer, points=points, keys=keys, word_ids=word_ids)
