"""Binary float-matrix archives with a text index.

Record layout (little endian)::

    <utt_id> ' ' '\\0' 'B' 'FM ' 0x04 <int32 rows> 0x04 <int32 cols> <rows*cols float32>

Index lines are ``utt_id data_path:offset`` with the offset of the ``\\0``.
"""
from __future__ import annotations

import os
import struct
from typing import Iterable, Iterator

import numpy as np

_MAGIC = b"\x00BFM "
_HEADER = struct.Struct("<bibi")
_HEADER_LEN = len(_MAGIC) + _HEADER.size


class ArchiveError(ValueError):
    pass


class CorruptHeader(ArchiveError):
    pass


class TruncatedMatrix(ArchiveError):
    pass


class DanglingIndexEntry(ArchiveError):
    pass


def _encode(matrix: np.ndarray) -> bytes:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("matrix has NaN or Inf values")
    rows, cols = matrix.shape
    body = np.ascontiguousarray(matrix, dtype="<f4").tobytes()
    return _MAGIC + _HEADER.pack(4, rows, 4, cols) + body


def _check_utt_id(utt_id: str) -> None:
    if not utt_id or any(c.isspace() for c in utt_id):
        raise ValueError(f"utterance id {utt_id!r} must be non-empty without whitespace")


class ArchiveWriter:
    """Appends records to one data file and its index; offsets follow write order."""

    def __init__(self, data_path, index_path, append: bool = False):
        self.data_path = str(data_path)
        self.index_path = str(index_path)
        mode = "ab" if append else "wb"
        self._data = open(self.data_path, mode)
        self._index = open(self.index_path, mode[0], encoding="utf-8", newline="\n")

    def write(self, utt_id: str, matrix: np.ndarray) -> int:
        _check_utt_id(utt_id)
        record = _encode(matrix)
        self._data.write(utt_id.encode("utf-8") + b" ")
        offset = self._data.tell()
        self._data.write(record)
        self._index.write(f"{utt_id} {self.data_path}:{offset}\n")
        return offset

    def close(self) -> None:
        self._data.close()
        self._index.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_archive(records: Iterable[tuple[str, np.ndarray]], data_path, index_path) -> list[int]:
    with ArchiveWriter(data_path, index_path) as writer:
        return [writer.write(utt_id, m) for utt_id, m in records]


def read_matrix_from(f, where: str = "") -> np.ndarray:
    head = f.read(_HEADER_LEN)
    if len(head) < _HEADER_LEN:
        if head and not _MAGIC.startswith(head[:len(_MAGIC)]):
            raise CorruptHeader(f"bad record header {where}")
        raise TruncatedMatrix(f"record header cut short {where}")
    if head[:len(_MAGIC)] != _MAGIC:
        raise CorruptHeader(f"bad record header {where}: {head[:len(_MAGIC)]!r}")
    size1, rows, size2, cols = _HEADER.unpack(head[len(_MAGIC):])
    if size1 != 4 or size2 != 4 or rows < 0 or cols < 0:
        raise CorruptHeader(f"bad matrix dimensions {where}")
    nbytes = 4 * rows * cols
    body = f.read(nbytes)
    if len(body) != nbytes:
        raise TruncatedMatrix(f"expected {nbytes} bytes of data {where}, got {len(body)}")
    return np.frombuffer(body, dtype="<f4").reshape(rows, cols).astype(np.float32)


def split_ref(ref: str) -> tuple[str, int]:
    path, sep, offset = ref.rpartition(":")
    if not sep or not offset.isdigit():
        raise ArchiveError(f"bad feature reference {ref!r}")
    return path, int(offset)


def read_matrix(path, offset: int) -> np.ndarray:
    where = f"at {path}:{offset}"
    try:
        size = os.path.getsize(path)
    except OSError:
        raise DanglingIndexEntry(f"missing archive {path}") from None
    if offset < 0 or offset >= size:
        raise DanglingIndexEntry(f"offset {offset} outside {path} ({size} bytes)")
    with open(path, "rb") as f:
        f.seek(offset)
        return read_matrix_from(f, where)


def read_ref(ref: str) -> np.ndarray:
    return read_matrix(*split_ref(ref))


def read_index(index_path) -> list[tuple[str, str]]:
    """(utt_id, 'path:offset') pairs in file order."""
    entries = []
    with open(index_path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(" ", 1)
            if len(parts) != 2:
                raise ArchiveError(f"{index_path}:{lineno}: malformed index line {line!r}")
            entries.append((parts[0], parts[1]))
    return entries


def read_archive(index_path) -> Iterator[tuple[str, np.ndarray]]:
    for utt_id, ref in read_index(index_path):
        yield utt_id, read_ref(ref)

