"""Bit-exact interchange format for per-lemma occurrence embeddings.

One .semb file holds one lemma's n x d float32 matrix plus the sentence ids
each row belongs to. Layout, all little-endian, no padding:

    magic "SEMB" | u16 version=1 | u32 n | u32 d |
    u16 len + utf-8 model_id | u16 len + utf-8 lemma |
    n * (u16 len + utf-8 sentence id) |
    n*d float32 row-major
"""

from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import SentenceRecord
from .errors import DataError, ValidationError

MAGIC = b"SEMB"
VERSION = 1


@dataclass
class EmbeddingMatrix:
    lemma: str
    model_id: str
    ids: list[str]
    data: np.ndarray  # (n, d) float32

    def validate(self) -> None:
        if self.data.ndim != 2:
            raise ValidationError(f"embedding data must be 2-D, got shape {self.data.shape}")
        n, d = self.data.shape
        if n != len(self.ids):
            raise ValidationError(f"{len(self.ids)} ids but {n} matrix rows")
        if len(set(self.ids)) != len(self.ids):
            raise ValidationError("duplicate sentence ids in embedding matrix")
        if d < 1:
            raise ValidationError("embedding dimension must be >= 1")
        if self.data.dtype != np.float32:
            raise ValidationError(f"embedding dtype must be float32, got {self.data.dtype}")
        bad = ~np.isfinite(self.data)
        if bad.any():
            row, col = np.argwhere(bad)[0]
            raise ValidationError(f"non-finite value at row {row} (id {self.ids[row]!r}), column {col}")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ValidationError(f"string too long for format ({len(raw)} bytes)")
    return struct.pack("<H", len(raw)) + raw


def write_embeddings(m: EmbeddingMatrix, path: str | Path) -> None:
    """Write atomically: serialize to a temp file in the same directory, then rename."""
    m.validate()
    path = Path(path)
    payload = bytearray()
    payload += MAGIC
    payload += struct.pack("<HII", VERSION, m.n, m.d)
    payload += _pack_str(m.model_id)
    payload += _pack_str(m.lemma)
    for sid in m.ids:
        payload += _pack_str(sid)
    matrix = np.ascontiguousarray(m.data, dtype="<f4")
    payload += matrix.tobytes()

    fd, tmp_name = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".semb.tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


class _Reader:
    def __init__(self, buf: bytes, name: str):
        self.buf = buf
        self.pos = 0
        self.name = name

    def take(self, k: int, what: str) -> bytes:
        if self.pos + k > len(self.buf):
            raise DataError(
                f"{self.name}: truncated while reading {what}: "
                f"expected {self.pos + k} bytes, file has {len(self.buf)}"
            )
        out = self.buf[self.pos : self.pos + k]
        self.pos += k
        return out

    def u16(self, what: str) -> int:
        return struct.unpack("<H", self.take(2, what))[0]

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]

    def string(self, what: str) -> str:
        k = self.u16(f"{what} length")
        raw = self.take(k, what)
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DataError(f"{self.name}: {what} is not valid UTF-8: {exc}") from exc


def read_embeddings(path: str | Path) -> EmbeddingMatrix:
    path = Path(path)
    if not path.exists():
        raise DataError(f"embedding file not found: {path}")
    r = _Reader(path.read_bytes(), str(path))

    magic = r.take(4, "magic")
    if magic != MAGIC:
        raise DataError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    version = r.u16("version")
    if version != VERSION:
        raise DataError(f"{path}: unsupported version {version}, expected {VERSION}")
    n = r.u32("row count")
    d = r.u32("column count")
    model_id = r.string("model id")
    lemma = r.string("lemma")
    ids = [r.string(f"id {i}") for i in range(n)]

    matrix_bytes = n * d * 4
    raw = r.take(matrix_bytes, f"matrix payload ({n}x{d})")
    if r.pos != len(r.buf):
        raise DataError(f"{path}: {len(r.buf) - r.pos} trailing bytes after matrix payload")
    data = np.frombuffer(raw, dtype="<f4").reshape(n, d).copy()

    bad = ~np.isfinite(data)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise DataError(f"{path}: non-finite value at row {row}, column {col}")

    m = EmbeddingMatrix(lemma=lemma, model_id=model_id, ids=ids, data=data)
    m.validate()
    return m


def validate_alignment(m: EmbeddingMatrix, records: list[SentenceRecord]) -> None:
    """Check that the matrix rows and the sentence records describe the same set."""
    matrix_ids = set(m.ids)
    record_ids = {rec.id for rec in records}
    problems = []
    missing = sorted(record_ids - matrix_ids)
    extra = sorted(matrix_ids - record_ids)
    if missing:
        problems.append(f"ids missing from matrix: {missing}")
    if extra:
        problems.append(f"ids in matrix but not in records: {extra}")
    mismatched = sorted(rec.id for rec in records if rec.lemma != m.lemma)
    if mismatched:
        problems.append(f"lemma mismatch (matrix lemma {m.lemma!r}) for records: {mismatched}")
    if problems:
        raise ValidationError("; ".join(problems))
