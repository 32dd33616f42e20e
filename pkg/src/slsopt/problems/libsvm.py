"""Reader and writer for the sparse ``label idx:val ...`` text format.

Indices are 1-based in the file and strictly increasing within a line; they
are stored 0-based. ``#`` starts a comment. Labels are mapped to +1/-1.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from scipy import sparse


class LibsvmParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass
class LibsvmData:
    labels: np.ndarray
    rows: list[dict[int, float]]
    n_features: int

    def __len__(self):
        return len(self.rows)

    def to_dense(self, n_features: int | None = None) -> np.ndarray:
        X = np.zeros((len(self.rows), n_features or self.n_features))
        for i, row in enumerate(self.rows):
            for j, v in row.items():
                X[i, j] = v
        return X

    def to_csr(self, n_features: int | None = None) -> sparse.csr_matrix:
        indptr = [0]
        indices: list[int] = []
        data: list[float] = []
        for row in self.rows:
            indices.extend(row.keys())
            data.extend(row.values())
            indptr.append(len(indices))
        shape = (len(self.rows), n_features or self.n_features)
        return sparse.csr_matrix((data, indices, indptr), shape=shape)


def _map_labels(raw: list[float], lines: list[int]) -> np.ndarray:
    distinct = sorted(set(raw))
    if len(distinct) > 2:
        raise LibsvmParseError(lines[0], f"expected binary labels, found {len(distinct)} distinct values")
    if len(distinct) == 2:
        lo = distinct[0]
        return np.array([-1.0 if v == lo else 1.0 for v in raw])
    return np.array([1.0 if v > 0 else -1.0 for v in raw])


def parse_libsvm(stream) -> LibsvmData:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    raw_labels: list[float] = []
    label_lines: list[int] = []
    rows: list[dict[int, float]] = []
    max_index = 0
    for lineno, line in enumerate(stream, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            label = float(tokens[0])
        except ValueError:
            raise LibsvmParseError(lineno, f"malformed label {tokens[0]!r}") from None
        row: dict[int, float] = {}
        last = 0
        for tok in tokens[1:]:
            idx_str, sep, val_str = tok.partition(":")
            if not sep:
                raise LibsvmParseError(lineno, f"malformed token {tok!r}")
            try:
                idx = int(idx_str)
                val = float(val_str)
            except ValueError:
                raise LibsvmParseError(lineno, f"malformed token {tok!r}") from None
            if idx < 1:
                raise LibsvmParseError(lineno, f"feature index must be >= 1, got {idx}")
            if idx == last:
                raise LibsvmParseError(lineno, f"duplicate feature index {idx}")
            if idx < last:
                raise LibsvmParseError(lineno, f"feature indices must increase ({idx} after {last})")
            row[idx - 1] = val
            last = idx
        max_index = max(max_index, last)
        raw_labels.append(label)
        label_lines.append(lineno)
        rows.append(row)
    labels = _map_labels(raw_labels, label_lines) if rows else np.zeros(0)
    return LibsvmData(labels, rows, max_index)


def read_libsvm(path) -> LibsvmData:
    with open(path, encoding="utf-8") as fh:
        return parse_libsvm(fh)


def format_libsvm(data: LibsvmData) -> str:
    out = []
    for label, row in zip(data.labels, data.rows):
        parts = ["+1" if label > 0 else "-1"]
        parts.extend(f"{j + 1}:{float(row[j])!r}" for j in sorted(row))
        out.append(" ".join(parts))
    return "\n".join(out) + ("\n" if out else "")


def write_libsvm(data: LibsvmData, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_libsvm(data))
