"""Embedding set files.

Text format::

    id,condition,view,dim
    001,nm-01,090,4,0.1,0.2,0.3,0.4

Binary format (little endian): ``b"GEMB"``, u32 dim, then records of three
u16-length-prefixed UTF-8 strings (id, condition, view) followed by ``dim``
float64 values, until end of file.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import DimMismatch
from .metrics import EmbeddingRecord

TEXT_HEADER = ["id", "condition", "view", "dim"]
MAGIC = b"GEMB"


def write_text(records: Iterable[EmbeddingRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TEXT_HEADER)
        for r in records:
            w.writerow([r.identity, r.condition, r.view, r.vector.size, *map(repr, r.vector.tolist())])


def read_text(path: str | Path) -> list[EmbeddingRecord]:
    records = []
    dim = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != TEXT_HEADER:
            raise ValueError(f"{path}: expected header {','.join(TEXT_HEADER)}, got {header}")
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            ident, cond, view, d, *values = row
            d = int(d)
            if len(values) != d:
                raise DimMismatch(f"{path}:{lineno}: declared dim {d} but found {len(values)} values")
            if dim is None:
                dim = d
            elif d != dim:
                raise DimMismatch(f"{path}:{lineno}: dim {d} differs from {dim}")
            records.append(EmbeddingRecord(ident, cond, view, np.array(values, dtype=np.float64)))
    return records


def _pack_str(s: str) -> bytes:
    b = s.encode("utf-8")
    return struct.pack("<H", len(b)) + b


def write_binary(records: Iterable[EmbeddingRecord], path: str | Path) -> None:
    records = list(records)
    dims = {r.vector.size for r in records}
    if len(dims) > 1:
        raise DimMismatch(f"mixed dimensions {sorted(dims)}")
    dim = dims.pop() if dims else 0
    with open(path, "wb") as fh:
        fh.write(MAGIC + struct.pack("<I", dim))
        for r in records:
            fh.write(_pack_str(r.identity) + _pack_str(r.condition) + _pack_str(r.view))
            fh.write(r.vector.astype("<f8").tobytes())


def read_binary(path: str | Path) -> list[EmbeddingRecord]:
    buf = Path(path).read_bytes()
    if buf[:4] != MAGIC:
        raise ValueError(f"{path}: not a binary embedding file")
    (dim,) = struct.unpack_from("<I", buf, 4)
    pos, records = 8, []

    def take_str():
        nonlocal pos
        (n,) = struct.unpack_from("<H", buf, pos)
        s = buf[pos + 2 : pos + 2 + n].decode("utf-8")
        pos += 2 + n
        return s

    while pos < len(buf):
        ident, cond, view = take_str(), take_str(), take_str()
        end = pos + 8 * dim
        if end > len(buf):
            raise ValueError(f"{path}: truncated record at byte {pos}")
        records.append(EmbeddingRecord(ident, cond, view, np.frombuffer(buf[pos:end], dtype="<f8").copy()))
        pos = end
    return records


def read_embeddings(path: str | Path) -> list[EmbeddingRecord]:
    with open(path, "rb") as fh:
        head = fh.read(4)
    return read_binary(path) if head == MAGIC else read_text(path)
