"""Reading string collections and writing them column-transposed.

Column ``j`` holds, for every string ``q`` in input order, the code of the
symbol ``j+1`` places from the right of ``w_q$``: column 0 is the last real
symbol, column ``len(w_q)`` is the end-marker and anything further left is
the pad code.  Iteration ``j`` of the builder reads column ``j`` once, front
to back.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .alphabet import (DEFAULT_ENDMARKER, ENDMARKER_CODE, PAD_CODE, Alphabet, CollectionMeta,
                       build_alphabet)
from .errors import EmptyCollection, EmptyInput, MalformedRecord, OutOfRange
from .segstore import IOStats, SeqReader, SeqWriter

FORMATS = ("lines", "fasta", "fastq")
TRANSPOSE_BUDGET = 1 << 24


def detect_format(path: str | os.PathLike) -> str:
    with open(path, "rb") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith(b">"):
                return "fasta"
            if line.startswith(b"@"):
                return "fastq"
            return "lines"
    return "lines"


def _lines(path) -> Iterator[tuple[int, bytes]]:
    with open(path, "rb") as f:
        for lineno, line in enumerate(f, start=1):
            yield lineno, line.rstrip(b"\r\n")


def iter_lines(path) -> Iterator[bytes]:
    pending_blank = None
    for lineno, line in _lines(path):
        if not line:
            pending_blank = lineno
            continue
        if pending_blank is not None:
            raise MalformedRecord(f"line {pending_blank}: blank line inside collection")
        yield line


def iter_fasta(path) -> Iterator[bytes]:
    header_line = None
    parts: list[bytes] = []
    for lineno, line in _lines(path):
        line = line.strip()
        if not line:
            continue
        if line.startswith(b">"):
            if header_line is not None:
                if not parts:
                    raise MalformedRecord(f"line {header_line}: FASTA record without sequence")
                yield b"".join(parts)
            header_line, parts = lineno, []
        else:
            if header_line is None:
                raise MalformedRecord(f"line {lineno}: sequence data before first FASTA header")
            parts.append(line)
    if header_line is not None:
        if not parts:
            raise MalformedRecord(f"line {header_line}: FASTA record without sequence")
        yield b"".join(parts)


def iter_fastq(path) -> Iterator[bytes]:
    quartet: list[bytes] = []
    start = 1
    for lineno, line in _lines(path):
        if not quartet and not line.strip():
            continue
        if not quartet:
            start = lineno
        quartet.append(line)
        if len(quartet) == 4:
            head, seq, plus, qual = quartet
            if not head.startswith(b"@") or not plus.startswith(b"+"):
                raise MalformedRecord(f"line {start}: not a FASTQ record")
            if len(qual) != len(seq):
                raise MalformedRecord(f"line {start}: quality length differs from sequence length")
            yield seq
            quartet = []
    if quartet:
        raise MalformedRecord(f"line {start}: truncated FASTQ record ({len(quartet)} of 4 lines)")


_READERS = {"lines": iter_lines, "fasta": iter_fasta, "fastq": iter_fastq}


class ParsedCollection:
    """Re-iterable view of the strings in an input file."""

    def __init__(self, path: str | os.PathLike, fmt: str = "auto"):
        self.path = Path(path)
        if fmt == "auto":
            fmt = detect_format(self.path)
        if fmt not in _READERS:
            raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS} or 'auto'")
        self.format = fmt

    def __iter__(self) -> Iterator[bytes]:
        for i, s in enumerate(_READERS[self.format](self.path)):
            if not s:
                raise MalformedRecord(f"record {i}: empty string")
            yield s


def scan_collection(strings: Iterable[bytes], endmarker: int = DEFAULT_ENDMARKER,
                    alphabet: Alphabet | None = None) -> tuple[Alphabet, CollectionMeta]:
    """First pass: lengths and (unless supplied) the alphabet."""
    lengths = []

    def tee():
        for i, s in enumerate(strings):
            if not s:
                raise MalformedRecord(f"record {i}: empty string")
            lengths.append(len(s) + 1)
            yield s

    if alphabet is None:
        try:
            alphabet = build_alphabet(tee(), endmarker)
        except EmptyInput:
            raise EmptyCollection("collection has no strings") from None
    else:
        for s in tee():
            alphabet.encode_bytes(s)
    if not lengths:
        raise EmptyCollection("collection has no strings")
    return alphabet, CollectionMeta(np.asarray(lengths, dtype=np.int64))


def parse_collection(path: str | os.PathLike, fmt: str = "auto", endmarker: int = DEFAULT_ENDMARKER):
    """Return ``(strings, meta, alphabet)``; ``strings`` may be iterated again."""
    coll = ParsedCollection(path, fmt)
    alphabet, meta = scan_collection(coll, endmarker)
    return coll, meta, alphabet


@dataclass
class TransposedInput:
    """The ``K`` column files ``col.<j>`` of ``m`` one-byte cells each."""

    root: Path
    m: int
    K: int
    active_counts: np.ndarray
    stats: IOStats = field(default_factory=IOStats)

    def path(self, j: int) -> Path:
        return self.root / f"col.{j}"

    def read_column(self, j: int) -> np.ndarray:
        if not 0 <= j < self.K:
            raise OutOfRange(f"column {j} outside 0..{self.K - 1}")
        with SeqReader(self.path(j), np.uint8, self.stats, kind="col") as r:
            return r.read_exact(self.m)

    def remove(self) -> None:
        for j in range(self.K):
            try:
                self.path(j).unlink()
            except FileNotFoundError:
                pass

    def file_bytes(self) -> int:
        return sum(self.path(j).stat().st_size for j in range(self.K) if self.path(j).exists())


def transpose(strings: Iterable[bytes], meta: CollectionMeta, alphabet: Alphabet,
              root: str | os.PathLike, stats: IOStats | None = None,
              budget: int = TRANSPOSE_BUDGET) -> TransposedInput:
    """Write the ``K`` column files.

    Strings are buffered in batches of at most ``budget`` cells as a padded
    ``batch x K`` matrix; each batch is appended to every column file, so
    each file is written strictly front to back.
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    stats = stats if stats is not None else IOStats()
    m, K = meta.m, meta.K
    batch_rows = max(1, budget // K)
    for j in range(K):
        open(root / f"col.{j}", "wb").close()

    def flush(rows: list[bytes]):
        mat = np.full((len(rows), K), PAD_CODE, dtype=np.uint8)
        for r, codes in enumerate(rows):
            n = len(codes)
            mat[r, :n] = np.frombuffer(codes, dtype=np.uint8)[::-1]
            mat[r, n] = ENDMARKER_CODE
        for j in range(K):
            with SeqWriter(root / f"col.{j}", np.uint8, stats, working=False, append=True) as w:
                w.write(mat[:, j])

    rows: list[bytes] = []
    seen = 0
    for i, s in enumerate(strings):
        if i >= m or len(s) + 1 != meta.lengths[i]:
            raise MalformedRecord(f"record {i}: input changed between passes")
        rows.append(alphabet.encode_bytes(s))
        seen += 1
        if len(rows) == batch_rows:
            flush(rows)
            rows = []
    if rows:
        flush(rows)
    if seen != m:
        raise MalformedRecord(f"expected {m} records, read {seen}")
    # strings with length > j are still active at column j
    active = np.cumsum(np.bincount(meta.lengths, minlength=K + 1)[::-1])[::-1][1:K + 1]
    return TransposedInput(root, m, K, active, stats)
