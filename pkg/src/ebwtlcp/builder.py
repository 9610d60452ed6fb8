"""End-to-end construction: transpose, iterate, write outputs."""
from __future__ import annotations

import json
import os
import shutil
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .alphabet import Alphabet, CollectionMeta, uint_dtype, width_for
from .bcr import TrackerArrays, compute_positions, init_iteration_zero, sort_trackers
from .errors import MissingMetadata
from .extlcp import IntervalTrackers, merge_generation
from .gsa import gsa_dtype, gsa_entries, gsa_widths
from .ingest import ParsedCollection, TransposedInput, parse_collection, scan_collection, transpose
from .segstore import DEFAULT_CHUNK, IOStats, SegmentSet, SegmentStore, SeqWriter, remove_file

FORMAT_VERSION = 1


@dataclass
class BuildOptions:
    with_lcp: bool = True
    with_gsa: bool = False
    lcp_width: int | None = None
    engine: str = "auto"
    window: int = DEFAULT_CHUNK
    keep_tmp: bool = False


@dataclass
class MemoryMeter:
    """Peak bytes held by the per-string arrays (trackers, next LCP values,
    the current column, the length table, the sort permutation) plus the
    per-symbol interval trackers and occurrence table."""

    peak: int = 0
    peak_parts: dict = field(default_factory=dict)
    peak_iteration: int = -1

    def observe(self, j: int, **parts: int) -> None:
        total = sum(parts.values())
        if total > self.peak:
            self.peak = total
            self.peak_parts = dict(parts)
            self.peak_iteration = j


@dataclass
class IterationTrace:
    """State after iteration ``j``: the sorted trackers used for the inserts
    (their ``C``/``S`` are the values written at this iteration), the values
    computed for iteration ``j+1``, and read access to generation ``j``.

    Segment files only live until the next iteration, so read them inside
    the hook (or keep :meth:`snapshot`)."""

    j: int
    trackers: TrackerArrays
    c_next: np.ndarray | None
    s_next: np.ndarray | None
    generation: SegmentSet
    alphabet: Alphabet

    def symbols(self, h: int) -> str:
        codes = self.generation.read_segment("B", h)
        return self.alphabet.decode_bytes(codes.tobytes()).decode("latin-1")

    def lcp(self, h: int) -> list[int]:
        return self.generation.read_segment("L", h).tolist()

    def gsa(self, h: int) -> list[tuple[int, int]]:
        g = self.generation.read_segment("G", h)
        return list(zip(g["start"].tolist(), g["sid"].tolist()))

    def snapshot(self) -> dict:
        h_range = range(self.generation.sigma + 1)
        snap = {
            "j": self.j,
            "U": self.decoded_U(),
            "P": self.trackers.P.tolist(),
            "Q": self.trackers.Q.tolist(),
            "N": self.trackers.Nid.tolist(),
            "C": self.trackers.C.tolist(),
            "S": self.trackers.S.tolist(),
            "C_next": None if self.c_next is None else self.c_next.tolist(),
            "S_next": None if self.s_next is None else self.s_next.tolist(),
            "B": [self.symbols(h) for h in h_range],
        }
        snap["L"] = [self.lcp(h) for h in h_range] if self.generation.with_lcp else None
        snap["G"] = [self.gsa(h) for h in h_range] if self.generation.with_gsa else None
        return snap

    def decoded_U(self) -> str:
        return self.alphabet.decode_bytes(self.trackers.U.tobytes()).decode("latin-1")


@dataclass
class Outputs:
    meta: dict
    ebwt: bytes
    lcp: np.ndarray | None
    gsa: np.ndarray | None


@dataclass
class BuildResult:
    prefix: Path
    meta: dict
    stats: IOStats
    memory: MemoryMeter
    elapsed: float
    column_bytes: int

    def paths(self) -> dict[str, Path]:
        return output_paths(self.prefix)

    def output_bytes(self) -> int:
        return sum(p.stat().st_size for k, p in self.paths().items() if k != "meta" and p.exists())

    def load(self) -> Outputs:
        return load_outputs(self.prefix)


def output_paths(prefix: str | os.PathLike) -> dict[str, Path]:
    prefix = str(prefix)
    return {k: Path(prefix + ext) for k, ext in
            (("ebwt", ".ebwt"), ("lcp", ".lcp"), ("gsa", ".gsa"), ("meta", ".meta.json"))}


def merge_scratch_per_insert(trackers: TrackerArrays) -> int:
    """Bytes per insert of the arrays built while merging one segment:
    shifted positions, position differences, override positions (position
    width), LCP values and override values (LCP width), two boolean masks."""
    return 3 * trackers.P.itemsize + 2 * trackers.C.itemsize + 2


def lcp_width_for(K: int, override: int | None = None) -> int:
    need = width_for(max(K - 1, 0), (1, 2, 4))
    if override is None:
        return need
    if override not in (1, 2, 4, 8):
        raise ValueError("LCP width must be 1, 2, 4 or 8")
    if override < need:
        raise ValueError(f"LCP width {override} cannot hold values up to {K - 1}")
    return override


class Builder:
    def __init__(self, strings: Iterable[bytes], meta: CollectionMeta, alphabet: Alphabet,
                 tmp_dir: str | os.PathLike, options: BuildOptions | None = None,
                 stats: IOStats | None = None,
                 trace: Callable[[IterationTrace], None] | None = None):
        self.strings = strings
        self.meta = meta
        self.alphabet = alphabet
        self.tmp_dir = Path(tmp_dir)
        self.options = options or BuildOptions()
        self.stats = stats if stats is not None else IOStats()
        self.trace = trace
        self.memory = MemoryMeter()
        self.lcp_width = lcp_width_for(meta.K, self.options.lcp_width)
        self.lcp_dtype = uint_dtype(self.lcp_width) if self.options.with_lcp else None
        self.gsa_widths = gsa_widths(meta.K, meta.m) if self.options.with_gsa else None
        self.gsa_dtype = gsa_dtype(*self.gsa_widths) if self.options.with_gsa else None
        self.columns: TransposedInput | None = None

    def _lengths_table(self):
        if not self.options.with_gsa:
            return None
        return self.meta.lengths.astype(uint_dtype(width_for(self.meta.K, (4, 8))))

    def run(self) -> SegmentSet:
        opts = self.options
        sigma = self.alphabet.sigma
        self.tmp_dir.mkdir(parents=True, exist_ok=True)
        self.columns = cols = transpose(self.strings, self.meta, self.alphabet, self.tmp_dir, self.stats)
        store = SegmentStore(self.tmp_dir, sigma, self.lcp_dtype, self.gsa_dtype, self.stats)
        lengths = self._lengths_table()
        lcp_dt = self.lcp_dtype or np.uint8
        # interval trackers plus occurrence tables of both generations and
        # the cumulative table built from them
        fixed = IntervalTrackers(sigma).nbytes + 3 * 8 * (sigma + 1) ** 2
        lengths_bytes = 0 if lengths is None else lengths.nbytes

        trackers = None
        c_next = s_next = None
        for j in range(self.meta.K):
            column = cols.read_column(j)
            if j == 0:
                trackers = init_iteration_zero(column, self.meta.N, lcp_dt)
            else:
                n_prev, before = len(trackers), trackers.nbytes
                trackers.C, trackers.S = c_next, s_next
                if not opts.with_lcp:
                    trackers.C = trackers.S = np.zeros(n_prev, dtype=np.uint8)
                trackers = compute_positions(trackers, store.current, column, opts.window)
                n = len(trackers)
                # keep mask, int64 positions, per-segment symbols and ranks
                self.memory.observe(j, trackers_prev=before,
                                    trackers=trackers.nbytes if n != n_prev else 0,
                                    column=column.nbytes, scratch=n_prev + 8 * n + 9 * n,
                                    lengths=lengths_bytes, fixed=fixed)
                trackers = sort_trackers(trackers)
                # int64 permutation plus one permuted array at a time
                self.memory.observe(j, trackers=trackers.nbytes, column=column.nbytes,
                                    scratch=16 * n, lengths=lengths_bytes, fixed=fixed)
            del column
            gvals = gsa_entries(trackers.Nid, lengths, j, self.gsa_dtype) if opts.with_gsa else None
            old, new = store.open_generation(j - 1)
            c_next, s_next = merge_generation(trackers, old, new, gvals, opts.engine, opts.window)
            kmax = int(np.bincount(trackers.Q, minlength=1).max()) if len(trackers) else 0
            self.memory.observe(j, trackers=trackers.nbytes,
                                next_lcp=0 if c_next is None else c_next.nbytes + s_next.nbytes,
                                gsa_entries=0 if gvals is None else gvals.nbytes,
                                scratch=merge_scratch_per_insert(trackers) * kmax,
                                lengths=lengths_bytes, fixed=fixed)
            store.commit(new)
            if self.trace is not None:
                self.trace(IterationTrace(j, trackers.copy(),
                                          None if c_next is None else c_next.copy(),
                                          None if s_next is None else s_next.copy(),
                                          store.current, self.alphabet))
        return store.current

    def write_outputs(self, final: SegmentSet, prefix: str | os.PathLike, input_path=None,
                      input_format=None) -> dict:
        """Concatenate the final segments into the output files; each segment
        file is removed as soon as it has been copied."""
        paths = output_paths(prefix)
        Path(paths["ebwt"]).parent.mkdir(parents=True, exist_ok=True)
        chunk = self.options.window
        targets = {"B": paths["ebwt"], "L": paths["lcp"], "G": paths["gsa"]}
        for p in paths.values():
            if p.exists():
                p.unlink()
        for kind in final.kinds():
            with SeqWriter(targets[kind], final.dtype(kind), self.stats) as w:
                for h in range(final.sigma + 1):
                    r = final.reader(kind, h)
                    if r is None:
                        continue
                    with r:
                        for block in r.chunks(chunk):
                            if kind == "B":
                                block = np.frombuffer(self.alphabet.decode_bytes(block.tobytes()),
                                                      dtype=np.uint8)
                            w.write(block)
                    remove_file(final.path(kind, h), self.stats)
        final.deleted = True
        meta = {
            "format_version": FORMAT_VERSION,
            "m": self.meta.m,
            "N": self.meta.N,
            "K": self.meta.K,
            "sigma": self.alphabet.sigma,
            "alphabet": list(self.alphabet.symbols),
            "endmarker": self.alphabet.endmarker,
            "with_lcp": self.options.with_lcp,
            "lcp_width": self.lcp_width if self.options.with_lcp else None,
            "with_gsa": self.options.with_gsa,
            "gsa_start_width": self.gsa_widths[0] if self.gsa_widths else None,
            "gsa_id_width": self.gsa_widths[1] if self.gsa_widths else None,
            "input": None if input_path is None else str(input_path),
            "input_format": input_format,
        }
        with open(paths["meta"], "w", encoding="utf-8") as f:
            json.dump(meta, f, indent=2, sort_keys=True)
            f.write("\n")
        return meta

    def cleanup(self) -> None:
        if self.columns is not None and not self.options.keep_tmp:
            self.columns.remove()


def _tmp_root(tmp_dir) -> Path:
    if tmp_dir is None:
        tmp_dir = os.environ.get("EBWTLCP_TMPDIR")
    base = Path(tmp_dir) if tmp_dir is not None else Path(tempfile.gettempdir())
    base.mkdir(parents=True, exist_ok=True)
    return Path(tempfile.mkdtemp(prefix="ebwtlcp-", dir=base))


def _run(strings, meta, alphabet, prefix, tmp_dir, options, stats, trace, input_path, input_format):
    t0 = time.perf_counter()
    work = _tmp_root(tmp_dir)
    builder = Builder(strings, meta, alphabet, work, options, stats, trace)
    try:
        final = builder.run()
        col_bytes = builder.columns.file_bytes()
        out_meta = builder.write_outputs(final, prefix, input_path, input_format)
    finally:
        builder.cleanup()
        if not builder.options.keep_tmp:
            shutil.rmtree(work, ignore_errors=True)
    return BuildResult(Path(prefix), out_meta, builder.stats, builder.memory,
                       time.perf_counter() - t0, col_bytes)


def build_file(input_path: str | os.PathLike, prefix: str | os.PathLike, fmt: str = "auto",
               tmp_dir=None, options: BuildOptions | None = None, stats: IOStats | None = None,
               trace=None) -> BuildResult:
    coll, meta, alphabet = parse_collection(input_path, fmt)
    return _run(coll, meta, alphabet, prefix, tmp_dir, options, stats, trace,
                Path(input_path).resolve(), coll.format)


def build_strings(strings: Iterable[bytes | str], prefix: str | os.PathLike, tmp_dir=None,
                  options: BuildOptions | None = None, stats: IOStats | None = None,
                  trace=None, alphabet: Alphabet | None = None) -> BuildResult:
    """Build from an in-memory collection (handy for tests and notebooks)."""
    data = [s.encode("latin-1") if isinstance(s, str) else bytes(s) for s in strings]
    alphabet, meta = scan_collection(data, alphabet=alphabet)
    return _run(data, meta, alphabet, prefix, tmp_dir, options, stats, trace, None, None)


def load_meta(prefix: str | os.PathLike) -> dict:
    p = output_paths(prefix)["meta"]
    if not p.exists():
        raise MissingMetadata(f"{p} not found")
    with open(p, encoding="utf-8") as f:
        meta = json.load(f)
    if meta.get("format_version") != FORMAT_VERSION:
        raise MissingMetadata(f"{p}: unsupported format_version {meta.get('format_version')}")
    return meta


def load_outputs(prefix: str | os.PathLike) -> Outputs:
    meta = load_meta(prefix)
    paths = output_paths(prefix)
    ebwt = paths["ebwt"].read_bytes()
    lcp = None
    if meta["with_lcp"]:
        lcp = np.fromfile(paths["lcp"], dtype=uint_dtype(meta["lcp_width"]))
    gsa = None
    if meta["with_gsa"]:
        gsa = np.fromfile(paths["gsa"], dtype=gsa_dtype(meta["gsa_start_width"], meta["gsa_id_width"]))
    return Outputs(meta, ebwt, lcp, gsa)
