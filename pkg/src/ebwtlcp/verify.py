"""Checks on finished outputs: inversion, oracle comparison, invariants and
instrumented builds."""
from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .builder import BuildOptions, BuildResult, build_file, build_strings, load_outputs
from .errors import MalformedEbwt, OracleCapExceeded
from .ingest import ParsedCollection
from .oracle import DEFAULT_CAP, naive_all
from .segstore import IOStats

MEMORY_CONSTANT_LIMIT = 64
DISK_RATIO_LIMIT = 2.0
DISK_SLACK = 0.10


def lf_map(codes: np.ndarray, endmarker: int) -> np.ndarray:
    """``lf[i]`` = rank of the suffix that cell ``i`` precedes when extended
    by ``codes[i]``.  End-marker cells sort below every letter and keep their
    left-to-right order."""
    key = codes.astype(np.int16)
    key[codes == endmarker] = -1
    order = np.argsort(key, kind="stable")
    lf = np.empty(len(codes), dtype=np.int64)
    lf[order] = np.arange(len(codes), dtype=np.int64)
    return lf


def invert_ebwt(ebwt: bytes | np.ndarray, m: int, endmarker: int = ord("$"),
                with_owners: bool = False):
    """Rebuild the ``m`` strings, in input order, from their EBWT.

    Row ``q < m`` is the lone end-marker suffix of string ``q`` (equal
    suffixes are ordered by string index), so walking LF backwards from row
    ``q`` spells string ``q`` from right to left until an end-marker cell is
    met.  All ``m`` walks advance together.  With ``with_owners`` the string
    owning each end-marker cell, in EBWT order, is returned too.
    """
    codes = np.frombuffer(bytes(ebwt), dtype=np.uint8) if not isinstance(ebwt, np.ndarray) else ebwt
    n = len(codes)
    markers = np.flatnonzero(codes == endmarker)
    if len(markers) != m:
        raise MalformedEbwt(f"found {len(markers)} end-markers, expected {m}")
    if m == 0:
        return ([], []) if with_owners else []
    lf = lf_map(codes, endmarker)
    visited = np.zeros(n, dtype=bool)
    cur = np.arange(m, dtype=np.int64)
    ids = np.arange(m, dtype=np.int64)
    steps_ids, steps_syms = [], []
    owner_at = np.full(n, -1, dtype=np.int64)
    lengths = np.zeros(m, dtype=np.int64)
    total = 0
    while len(cur):
        if np.any(visited[cur]):
            raise MalformedEbwt("LF walk revisited a row")
        visited[cur] = True
        total += len(cur)
        if total > n:
            raise MalformedEbwt("LF walk longer than the EBWT")
        sym = codes[cur]
        done = sym == endmarker
        owner_at[cur[done]] = ids[done]
        live = ~done
        cur, ids, sym = cur[live], ids[live], sym[live]
        steps_ids.append(ids)
        steps_syms.append(sym)
        lengths[ids] += 1
        cur = lf[cur]
    if total != n:
        raise MalformedEbwt(f"walks covered {total} of {n} cells")
    offsets = np.concatenate(([0], np.cumsum(lengths)))
    flat = np.empty(int(offsets[-1]), dtype=np.uint8)
    written = np.zeros(m, dtype=np.int64)
    for sid, sym in zip(steps_ids, steps_syms):
        # step k fills string positions from the right
        flat[offsets[sid + 1] - 1 - written[sid]] = sym
        written[sid] += 1
    strings = [flat[offsets[i]:offsets[i + 1]].tobytes() for i in range(m)]
    if with_owners:
        return strings, owner_at[markers].tolist()
    return strings


@dataclass
class AuditReport:
    checks: list = field(default_factory=list)
    counters: dict = field(default_factory=dict)

    def add(self, name: str, passed: bool, detail: str = "") -> bool:
        self.checks.append((name, bool(passed), detail))
        return bool(passed)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def failures(self) -> list[str]:
        return [name for name, ok, _ in self.checks if not ok]

    def to_table(self) -> str:
        width = max([len(n) for n, _, _ in self.checks] + [len(k) for k in self.counters] + [5])
        lines = [f"{'check':<{width}}  result  detail"]
        for name, ok, detail in self.checks:
            lines.append(f"{name:<{width}}  {'PASS' if ok else 'FAIL':<6}  {detail}")
        if self.counters:
            lines.append("")
            lines.append(f"{'counter':<{width}}  value")
            for k, v in self.counters.items():
                lines.append(f"{k:<{width}}  {v}")
        lines.append("")
        lines.append("overall: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)

    def to_keyvalue(self) -> str:
        lines = [f"check.{name}={'pass' if ok else 'fail'}" for name, ok, _ in self.checks]
        lines += [f"{k}={v}" for k, v in self.counters.items()]
        lines.append(f"overall={'pass' if self.passed else 'fail'}")
        return "\n".join(lines) + "\n"

    def write_keyvalue(self, path: str | os.PathLike) -> None:
        Path(path).write_text(self.to_keyvalue(), encoding="utf-8")


def _first_mismatch(a, b) -> int | None:
    a, b = np.asarray(a), np.asarray(b)
    n = min(len(a), len(b))
    diff = np.flatnonzero(a[:n] != b[:n])
    if len(diff):
        return int(diff[0])
    return None if len(a) == len(b) else n


def verify_outputs(prefix: str | os.PathLike, strings: Sequence[bytes] | None = None,
                   oracle_cap: int = DEFAULT_CAP, report: AuditReport | None = None) -> AuditReport:
    """Check the files written under ``prefix``.

    ``strings`` is the original collection; when omitted, the input recorded
    in the metadata is re-read if it still exists, otherwise the collection
    recovered by inversion stands in for it.
    """
    report = report if report is not None else AuditReport()
    out = load_outputs(prefix)
    meta = out.meta
    m, N, K = meta["m"], meta["N"], meta["K"]
    em = meta["endmarker"]
    if strings is None and meta.get("input") and Path(meta["input"]).exists():
        strings = list(ParsedCollection(meta["input"], meta.get("input_format") or "auto"))
    if strings is not None:
        strings = [bytes(s) for s in strings]

    sizes_ok = len(out.ebwt) == N
    if out.lcp is not None:
        sizes_ok &= len(out.lcp) == N
    if out.gsa is not None:
        sizes_ok &= len(out.gsa) == N
    report.add("meta_sizes", sizes_ok, f"m={m} N={N} K={K}")
    if not sizes_ok:
        return report

    try:
        recovered, owners = invert_ebwt(out.ebwt, m, em, with_owners=True)
        inv_ok = True
    except MalformedEbwt as exc:
        recovered, owners, inv_ok = None, None, False
        report.add("round_trip", False, str(exc))
    if inv_ok:
        if strings is not None:
            same = recovered == strings
            bad = next((i for i, (a, b) in enumerate(zip(recovered, strings)) if a != b), None)
            report.add("round_trip", same and len(recovered) == len(strings),
                       "" if same else f"first differing string {bad}")
        else:
            report.add("round_trip", sum(len(s) + 1 for s in recovered) == N, "lengths consistent")
    reference = strings if strings is not None else recovered

    if reference is not None:
        want = Counter()
        for s in reference:
            want.update(s)
        want[em] += len(reference)
        report.add("multiset", Counter(out.ebwt) == want)

    if out.lcp is not None:
        lcp = out.lcp.astype(np.int64)
        ok = bool(np.all(lcp[:m] == 0)) and bool(np.all(lcp < K))
        report.add("lcp_bounds", ok, "first m cells zero, all below K")

    if out.gsa is not None and reference is not None:
        starts = out.gsa["start"].astype(np.int64)
        sids = out.gsa["sid"].astype(np.int64)
        lens = np.array([len(s) + 1 for s in reference], dtype=np.int64)
        ok = bool(np.all(sids < len(reference))) and bool(np.all(starts >= 1))
        ok = ok and bool(np.all(starts <= lens[np.minimum(sids, len(lens) - 1)]))
        if ok:
            key = np.unique(sids * (int(lens.max()) + 1) + starts)
            ok = len(key) == N
        report.add("gsa_permutation", ok)
        if ok:
            flat = np.frombuffer(b"".join(s + bytes([em]) for s in reference), dtype=np.uint8)
            offs = np.concatenate(([0], np.cumsum(lens)))[sids]
            prev = np.where(starts > 1, offs + starts - 2, offs + lens[sids] - 1)
            report.add("gsa_matches_ebwt", bool(np.array_equal(flat[prev], np.frombuffer(out.ebwt, np.uint8))))
        if owners is not None:
            marker_rows = np.flatnonzero(np.frombuffer(out.ebwt, np.uint8) == em)
            report.add("marker_owners", sids[marker_rows].tolist() == owners)

    if reference is not None and N <= oracle_cap:
        try:
            ebwt_o, lcp_o, gsa_o = naive_all(reference, em, oracle_cap)
        except OracleCapExceeded:
            ebwt_o = None
        if ebwt_o is not None:
            idx = _first_mismatch(np.frombuffer(out.ebwt, np.uint8), np.frombuffer(ebwt_o, np.uint8))
            report.add("oracle_ebwt", idx is None, "" if idx is None else f"first mismatch at {idx}")
            if out.lcp is not None:
                idx = _first_mismatch(out.lcp.astype(np.int64), lcp_o)
                report.add("oracle_lcp", idx is None, "" if idx is None else f"first mismatch at {idx}")
            if out.gsa is not None:
                pairs = np.array([(t, i) for i, t in gsa_o], dtype=np.int64).reshape(-1, 2)
                got = np.stack([out.gsa["start"].astype(np.int64), out.gsa["sid"].astype(np.int64)], axis=1)
                rows = np.flatnonzero(np.any(got != pairs, axis=1)) if got.shape == pairs.shape else [0]
                idx = int(rows[0]) if len(rows) else None
                report.add("oracle_gsa", idx is None, "" if idx is None else f"first mismatch at {idx}")
    else:
        report.counters["oracle"] = "skipped"
    return report


def audit_build(source, prefix: str | os.PathLike, options: BuildOptions | None = None,
                fmt: str = "auto", tmp_dir=None, oracle_cap: int = DEFAULT_CAP,
                check_outputs: bool = True) -> tuple[AuditReport, BuildResult]:
    """Build ``source`` (a path or a list of strings) under instrumentation
    and check sequentiality, memory and disk budgets and the outputs."""
    stats = IOStats()
    if isinstance(source, (str, os.PathLike)):
        result = build_file(source, prefix, fmt, tmp_dir, options, stats)
        strings = None
    else:
        strings = [s.encode("latin-1") if isinstance(s, str) else bytes(s) for s in source]
        result = build_strings(strings, prefix, tmp_dir, options, stats)
    report = AuditReport()
    m = result.meta["m"]
    out_bytes = result.output_bytes()
    fixed = result.memory.peak_parts.get("fixed", 0)
    # the per-symbol tables are bounded by sigma, not m; c covers the rest
    c = (result.memory.peak - fixed) / m
    disk_limit = DISK_RATIO_LIMIT * (1 + DISK_SLACK) * out_bytes
    report.counters.update({
        "m": m, "N": result.meta["N"], "K": result.meta["K"],
        "bytes_read": stats.bytes_read,
        "bytes_written": stats.bytes_written,
        "streams_opened": stats.streams_opened,
        "backward_seeks": stats.backward_seeks,
        "peak_tracker_bytes": result.memory.peak,
        "peak_symbol_table_bytes": fixed,
        "memory_constant_c": round(c, 3),
        "memory_constant_c_total": round(result.memory.peak / m, 3),
        "peak_working_bytes": stats.peak_working_bytes,
        "output_bytes": out_bytes,
        "disk_ratio": round(stats.peak_working_bytes / max(out_bytes, 1), 4),
        "elapsed_s": round(result.elapsed, 3),
    })
    report.add("sequential_io", stats.backward_seeks == 0, f"{stats.backward_seeks} backward seeks")
    report.add("memory_budget", c <= MEMORY_CONSTANT_LIMIT, f"c={c:.2f} per string (limit {MEMORY_CONSTANT_LIMIT}) + {fixed} B symbol tables")
    report.add("disk_budget", stats.peak_working_bytes <= disk_limit,
               f"peak {stats.peak_working_bytes} vs output {out_bytes}")
    if check_outputs:
        verify_outputs(prefix, strings, oracle_cap, report)
    return report, result
