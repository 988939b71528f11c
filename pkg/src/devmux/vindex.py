"""Exact top-k cosine retrieval over stored embedding vectors.

Records are kept as float32 (the on-disk width), so a save/load round trip
is bit-identical. Similarities are computed in double precision and ties
break by ascending record id. The file layout is one JSON header line
followed by, per record, a JSON metadata line and the raw little-endian
float32 vector bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

FORMAT_VERSION = 1
DEFAULT_DIM = 768


class IndexFileError(Exception):
    """Base class for persistence failures."""


class IndexVersionError(IndexFileError):
    pass


class IndexTruncatedError(IndexFileError):
    pass


class IndexHashMismatchError(IndexFileError):
    pass


class IndexCorruptError(IndexFileError):
    pass


@dataclass(frozen=True)
class RecordMetadata:
    path: str
    span: str = ""
    source_kind: str = "file"


@dataclass(frozen=True)
class Hit:
    id: str
    similarity: float
    metadata: RecordMetadata


@dataclass(frozen=True)
class QueryResult:
    hits: tuple[Hit, ...]

    def ids(self) -> list[str]:
        return [h.id for h in self.hits]


class VectorIndex:
    """In-memory store of (id, vector, metadata) with exhaustive search."""

    def __init__(self, band_config_hash: str, dim: int = DEFAULT_DIM):
        self.band_config_hash = band_config_hash
        self.dim = dim
        self._ids: list[str] = []
        self._id_set: set[str] = set()
        self._vectors: list[np.ndarray] = []
        self._metadata: list[RecordMetadata] = []

    def __len__(self) -> int:
        return len(self._ids)

    def ids(self) -> tuple[str, ...]:
        return tuple(self._ids)

    def vector(self, record_id: str) -> np.ndarray:
        return self._vectors[self._ids.index(record_id)]

    def insert(self, record_id: str, vector: np.ndarray, metadata: RecordMetadata) -> None:
        """Store one record. Vectors are quantized to float32, the stored
        width. Duplicate ids and dimension mismatches are rejected."""
        if record_id in self._id_set:
            raise ValueError(f"duplicate record id {record_id!r}")
        vector = np.asarray(vector)
        if vector.shape != (self.dim,):
            raise ValueError(f"vector must have shape ({self.dim},), got {vector.shape}")
        self._ids.append(record_id)
        self._id_set.add(record_id)
        self._vectors.append(np.ascontiguousarray(vector, dtype="<f4"))
        self._metadata.append(metadata)

    def search(self, query: np.ndarray, k: int) -> QueryResult:
        """Exact top-k by cosine over all records; ties by ascending id."""
        if k < 0:
            raise ValueError("k must be >= 0")
        query = np.asarray(query, dtype=np.float64)
        if query.shape != (self.dim,):
            raise ValueError(f"query must have shape ({self.dim},), got {query.shape}")
        if k == 0 or not self._ids:
            return QueryResult(())
        matrix = np.stack(self._vectors).astype(np.float64)
        norms = np.linalg.norm(matrix, axis=1)
        qnorm = np.linalg.norm(query)
        sims = np.zeros(len(self._ids))
        if qnorm > 0.0:
            nonzero = norms > 0.0
            sims[nonzero] = (matrix[nonzero] @ query) / (norms[nonzero] * qnorm)
        order = sorted(range(len(self._ids)), key=lambda i: (-sims[i], self._ids[i]))
        hits = tuple(
            Hit(self._ids[i], float(sims[i]), self._metadata[i]) for i in order[:k]
        )
        return QueryResult(hits)

    def save(self, path) -> None:
        header = {
            "format_version": FORMAT_VERSION,
            "dim": self.dim,
            "count": len(self._ids),
            "band_config_hash": self.band_config_hash,
        }
        with open(path, "wb") as fh:
            fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
            for record_id, vector, meta in zip(self._ids, self._vectors, self._metadata):
                record = {
                    "band_config_hash": self.band_config_hash,
                    "id": record_id,
                    "path": meta.path,
                    "source_kind": meta.source_kind,
                    "span": meta.span,
                }
                fh.write(json.dumps(record, sort_keys=True).encode("utf-8") + b"\n")
                fh.write(vector.tobytes())

    @classmethod
    def load(cls, path) -> "VectorIndex":
        """Read an index file; a failure raises before any partial index
        escapes. Version, truncation, hash, and decode problems surface as
        distinct error kinds."""
        with open(path, "rb") as fh:
            header_line = fh.readline()
            if not header_line:
                raise IndexTruncatedError("empty index file")
            try:
                header = json.loads(header_line)
            except (json.JSONDecodeError, UnicodeDecodeError) as err:
                raise IndexCorruptError(f"unreadable header: {err}") from None
            if not isinstance(header, dict) or "format_version" not in header:
                raise IndexCorruptError("header is missing format_version")
            if header["format_version"] != FORMAT_VERSION:
                raise IndexVersionError(
                    f"format version {header['format_version']} unsupported (expected {FORMAT_VERSION})"
                )
            try:
                dim = int(header["dim"])
                count = int(header["count"])
                band_hash = str(header["band_config_hash"])
            except (KeyError, TypeError, ValueError) as err:
                raise IndexCorruptError(f"malformed header: {err}") from None

            index = cls(band_config_hash=band_hash, dim=dim)
            record_bytes = dim * 4
            for i in range(count):
                meta_line = fh.readline()
                if not meta_line:
                    raise IndexTruncatedError(f"record {i}: missing metadata line")
                try:
                    record = json.loads(meta_line)
                except (json.JSONDecodeError, UnicodeDecodeError) as err:
                    raise IndexCorruptError(f"record {i}: unreadable metadata: {err}") from None
                if record.get("band_config_hash") != band_hash:
                    raise IndexHashMismatchError(
                        f"record {i}: band config hash does not match file header"
                    )
                blob = fh.read(record_bytes)
                if len(blob) != record_bytes:
                    raise IndexTruncatedError(f"record {i}: vector data cut short")
                vector = np.frombuffer(blob, dtype="<f4").copy()
                try:
                    index.insert(
                        str(record["id"]),
                        vector,
                        RecordMetadata(
                            path=str(record.get("path", "")),
                            span=str(record.get("span", "")),
                            source_kind=str(record.get("source_kind", "file")),
                        ),
                    )
                except (KeyError, ValueError) as err:
                    raise IndexCorruptError(f"record {i}: {err}") from None
            if fh.read(1):
                raise IndexCorruptError("trailing bytes after final record")
        return index
