"""On-disk segment families and the instrumented sequential IO layer.

Generation ``j`` keeps, for every first symbol ``h``, a symbol file
``B.<j%2>.<h>`` (one code per cell), an LCP file ``L.<j%2>.<h>`` and
optionally a suffix-array file ``G.<j%2>.<h>``.  Files are only ever appended
to or read front to back; :class:`IOStats` records every access so audits can
prove it.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import MissingGeneration, OutOfRange

SYMBOL_DTYPE = np.dtype(np.uint8)
DEFAULT_CHUNK = 1 << 18


@dataclass
class IOStats:
    bytes_read: int = 0
    bytes_written: int = 0
    read_calls: int = 0
    write_calls: int = 0
    streams_opened: int = 0
    backward_seeks: int = 0
    working_bytes: int = 0
    peak_working_bytes: int = 0
    per_kind_read: dict = field(default_factory=dict)

    def _grow(self, n: int) -> None:
        self.working_bytes += n
        if self.working_bytes > self.peak_working_bytes:
            self.peak_working_bytes = self.working_bytes

    def release(self, n: int) -> None:
        self.working_bytes -= n


class SeqReader:
    """Front-to-back reader of fixed-width cells.

    Every read checks the OS file offset against the end of the previous read;
    a smaller offset is counted as a backward seek.
    """

    def __init__(self, path: str | os.PathLike, dtype, stats: IOStats | None = None, kind: str = "?"):
        self.path = os.fspath(path)
        self.dtype = np.dtype(dtype)
        self.stats = stats if stats is not None else IOStats()
        self.kind = kind
        self._f = open(self.path, "rb")
        self._expected = 0
        self.stats.streams_opened += 1

    def read(self, n: int) -> np.ndarray:
        if n <= 0:
            return np.empty(0, dtype=self.dtype)
        pos = self._f.tell()
        if pos < self._expected:
            self.stats.backward_seeks += 1
        raw = self._f.read(n * self.dtype.itemsize)
        self._expected = pos + len(raw)
        st = self.stats
        st.bytes_read += len(raw)
        st.read_calls += 1
        st.per_kind_read[self.kind] = st.per_kind_read.get(self.kind, 0) + len(raw)
        return np.frombuffer(raw, dtype=self.dtype)

    def read_exact(self, n: int) -> np.ndarray:
        out = self.read(n)
        if len(out) != n:
            raise OSError(f"{self.path}: wanted {n} cells, file ended after {len(out)}")
        return out

    def chunks(self, chunk: int = DEFAULT_CHUNK):
        while True:
            block = self.read(chunk)
            if not len(block):
                return
            yield block

    def close(self) -> None:
        self._f.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class SeqWriter:
    """Append-only writer; bytes written count toward the working-disk meter
    when ``working`` is set."""

    def __init__(self, path: str | os.PathLike, dtype, stats: IOStats | None = None,
                 working: bool = True, append: bool = False):
        self.path = os.fspath(path)
        self.dtype = np.dtype(dtype)
        self.stats = stats if stats is not None else IOStats()
        self.working = working
        self._f = open(self.path, "ab" if append else "wb")
        self._expected = self._f.tell()
        self.cells = 0
        self.stats.streams_opened += 1

    def write(self, arr) -> None:
        arr = np.asarray(arr, dtype=self.dtype)
        if not arr.size:
            return
        if self._f.tell() < self._expected:
            self.stats.backward_seeks += 1
        data = arr.tobytes()
        self._f.write(data)
        self._expected += len(data)
        self.cells += arr.size
        self.stats.bytes_written += len(data)
        self.stats.write_calls += 1
        if self.working:
            self.stats._grow(len(data))

    def close(self) -> None:
        self._f.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def remove_file(path: str | os.PathLike, stats: IOStats | None, working: bool = True) -> None:
    try:
        size = os.path.getsize(path)
        os.unlink(path)
    except FileNotFoundError:
        return
    if stats is not None and working:
        stats.release(size)


class SegmentSet:
    """One generation of segments ``h = 0..sigma``.

    ``lengths[h]`` is the cell count of segment ``h`` and ``occ[h, x]`` the
    number of code ``x`` cells in ``B(h)``; both are filled by the writer as
    cells are appended, never by rescanning.  Empty segments have no files.
    """

    KINDS = ("B", "L", "G")

    def __init__(self, root: Path, generation: int, sigma: int, lcp_dtype=None, gsa_dtype=None,
                 stats: IOStats | None = None):
        self.root = Path(root)
        self._root_str = str(self.root)
        self.generation = generation
        self.sigma = sigma
        self.lcp_dtype = None if lcp_dtype is None else np.dtype(lcp_dtype)
        self.gsa_dtype = None if gsa_dtype is None else np.dtype(gsa_dtype)
        self.stats = stats if stats is not None else IOStats()
        self.lengths = np.zeros(sigma + 1, dtype=np.int64)
        self.occ = np.zeros((sigma + 1, sigma + 1), dtype=np.int64)
        self.deleted = False

    @property
    def with_lcp(self) -> bool:
        return self.lcp_dtype is not None

    @property
    def with_gsa(self) -> bool:
        return self.gsa_dtype is not None

    @property
    def total(self) -> int:
        return int(self.lengths.sum())

    def path(self, kind: str, h: int) -> str:
        return os.path.join(self._root_str, f"{kind}.{self.generation % 2}.{h}")

    def dtype(self, kind: str) -> np.dtype:
        return {"B": SYMBOL_DTYPE, "L": self.lcp_dtype, "G": self.gsa_dtype}[kind]

    def kinds(self) -> tuple[str, ...]:
        return ("B",) + (("L",) if self.with_lcp else ()) + (("G",) if self.with_gsa else ())

    def reader(self, kind: str, h: int) -> SeqReader | None:
        """Reader on segment ``h``; None when the segment is empty."""
        if self.deleted:
            raise MissingGeneration(f"generation {self.generation} has been deleted")
        if self.lengths[h] == 0:
            return None
        p = self.path(kind, h)
        try:
            return SeqReader(p, self.dtype(kind), self.stats, kind=kind)
        except FileNotFoundError:
            raise MissingGeneration(f"{p} missing for generation {self.generation}") from None

    def writer(self, kind: str, h: int) -> SeqWriter:
        return SeqWriter(self.path(kind, h), self.dtype(kind), self.stats)

    def read_segment(self, kind: str, h: int) -> np.ndarray:
        r = self.reader(kind, h)
        if r is None:
            return np.empty(0, dtype=self.dtype(kind))
        with r:
            return r.read_exact(int(self.lengths[h])).copy()

    def cumulative_occ(self, h: int, x: int) -> int:
        """Occurrences of ``x`` in ``B(0) .. B(h-1)``."""
        return int(self.occ[:h, x].sum())

    def cumulative_table(self) -> np.ndarray:
        """``table[h, x]`` = occurrences of ``x`` in segments below ``h``."""
        out = np.zeros_like(self.occ)
        np.cumsum(self.occ[:-1], axis=0, out=out[1:])
        return out

    def delete(self) -> None:
        for h in np.flatnonzero(self.lengths).tolist():
            for kind in self.kinds():
                remove_file(self.path(kind, h), self.stats)
        self.deleted = True

    def file_bytes(self) -> int:
        total = 0
        for kind in self.KINDS:
            for h in range(self.sigma + 1):
                p = self.path(kind, h)
                if os.path.exists(p):
                    total += os.path.getsize(p)
        return total


class SegmentStore:
    """Owns the two alternating generations inside ``root``."""

    def __init__(self, root: Path, sigma: int, lcp_dtype=None, gsa_dtype=None, stats: IOStats | None = None):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.sigma = sigma
        self.lcp_dtype = lcp_dtype
        self.gsa_dtype = gsa_dtype
        self.stats = stats if stats is not None else IOStats()
        self.current = self._new(-1)
        # stale files of both parities left by an interrupted run
        for g in (0, 1):
            stale = self._new(g)
            for kind in SegmentSet.KINDS:
                for h in range(sigma + 1):
                    remove_file(stale.path(kind, h), None)

    def _new(self, generation: int) -> SegmentSet:
        return SegmentSet(self.root, generation, self.sigma, self.lcp_dtype, self.gsa_dtype, self.stats)

    def open_generation(self, j: int) -> tuple[SegmentSet, SegmentSet]:
        """Return (readable generation ``j``, fresh generation ``j+1``)."""
        if self.current.generation != j:
            raise MissingGeneration(f"generation {j} is not current (have {self.current.generation})")
        return self.current, self._new(j + 1)

    def commit(self, nxt: SegmentSet) -> None:
        old = self.current
        self.current = nxt
        if old.generation >= 0:
            old.delete()


def rank(x: int, r: int, reader: SeqReader | np.ndarray, length: int | None = None,
         chunk: int = DEFAULT_CHUNK) -> int:
    """Occurrences of ``x`` among the first ``r`` cells (1-based prefix)."""
    if isinstance(reader, np.ndarray):
        length = len(reader) if length is None else length
        if not 1 <= r <= length:
            raise OutOfRange(f"rank position {r} outside 1..{length}")
        return int(np.count_nonzero(reader[:r] == x))
    if length is not None and not 1 <= r <= length:
        raise OutOfRange(f"rank position {r} outside 1..{length}")
    if r < 1:
        raise OutOfRange(f"rank position {r} < 1")
    count = 0
    left = r
    while left:
        block = reader.read(min(chunk, left))
        if not len(block):
            raise OutOfRange(f"rank position {r} beyond end of segment")
        count += int(np.count_nonzero(block == x))
        left -= len(block)
    return count


def self_ranks(reader: SeqReader, positions: np.ndarray, sigma: int, chunk: int = DEFAULT_CHUNK):
    """For sorted 1-based ``positions``, return the symbol ``x`` found at each
    position and ``rank(x, pos)`` within the segment, in one forward scan that
    stops at the last requested position."""
    k = len(positions)
    syms = np.empty(k, dtype=np.uint8)
    ranks = np.empty(k, dtype=np.int64)
    if not k:
        return syms, ranks
    carry = np.zeros(256, dtype=np.int64)
    offset = 0
    done = 0
    last = int(positions[-1])
    while done < k:
        block = reader.read(min(chunk, last - offset))
        if not len(block):
            raise OutOfRange(f"position {int(positions[done])} beyond end of segment")
        hi = done + int(np.searchsorted(positions[done:], offset + len(block), side="right"))
        local = positions[done:hi].astype(np.int64) - 1 - offset
        counts = np.bincount(block, minlength=256)
        if hi > done:
            order = np.argsort(block, kind="stable")
            starts = np.zeros(256, dtype=np.int64)
            np.cumsum(counts[:-1], out=starts[1:])
            within = np.empty(len(block), dtype=np.int64)
            within[order] = np.arange(len(block)) - starts[block[order]]
            s = block[local]
            syms[done:hi] = s
            ranks[done:hi] = carry[s] + within[local] + 1
        carry += counts
        offset += len(block)
        done = hi
    return syms, ranks
