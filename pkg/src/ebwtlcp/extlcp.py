"""Phase 2 of every iteration: splice new cells into the segments and compute
the LCP values the next iteration will need.

For a cell at position ``r`` of ``B_j(z)`` holding symbol ``x``, let ``d1``
(``d2``) be the previous (next) position of ``x`` in the same segment.  The
suffix that ``x`` extends to the left will, one iteration later, have LCP
``1 + min L_j(z)(d1, r]`` with its predecessor and ``1 + min L_j(z)(r, d2]``
with its successor, or 1 when ``d1`` (``d2``) does not exist.  Those minima
are collected in a single forward pass with one running minimum per symbol,
so neither ``d1`` nor ``d2`` is ever located explicitly.
"""
from __future__ import annotations

import os
from typing import Callable

import numpy as np

from .alphabet import ENDMARKER_CODE
from .bcr import TrackerArrays
from .errors import MissingGeneration, TrackerSegmentOverrun
from .segstore import DEFAULT_CHUNK, SegmentSet

INF = np.iinfo(np.int64).max
CELL_THRESHOLD = 256
ENGINES = ("auto", "block", "cell")


class IntervalTrackers:
    """Running minima over the open current (LCI) and successive (LSI)
    intervals of one segment, one slot per symbol code ``1..sigma``.

    Each emitted cell is processed in a fixed order: its LCP value is folded
    into every open minimum, then the intervals of its own symbol are closed
    and reopened.  The "+1" is applied when an interval closes.
    """

    def __init__(self, sigma: int):
        self.sigma = sigma
        n = sigma + 1
        self.lci_open = [False] * n
        self.min_lci = [INF] * n
        self.lsi_open = [False] * n
        self.min_lsi = [INF] * n
        self.lsi_seq = [-1] * n
        self._lci_live: set[int] = set()
        self._lsi_live: set[int] = set()

    @property
    def nbytes(self) -> int:
        # two flags, two minima and one tracker index per symbol
        return (self.sigma + 1) * (1 + 8 + 1 + 8 + 8)

    def reset(self) -> None:
        self.__init__(self.sigma)

    def update_lci(self, x: int, lcp: int, c_next=None, p: int = -1) -> None:
        """Fold ``lcp`` into the open LCI minima; if the cell is the insert
        of tracker ``p``, close the LCI of ``x`` into ``c_next[p]``; then
        restart the LCI of ``x`` at this cell."""
        mins = self.min_lci
        for a in self._lci_live:
            if lcp < mins[a]:
                mins[a] = lcp
        if x == ENDMARKER_CODE:
            return
        if p >= 0:
            c_next[p] = mins[x] + 1 if self.lci_open[x] else 1
        self.lci_open[x] = True
        mins[x] = INF
        self._lci_live.add(x)

    def update_lsi(self, x: int, lcp: int, s_next) -> None:
        mins = self.min_lsi
        for a in self._lsi_live:
            if lcp < mins[a]:
                mins[a] = lcp
        if x == ENDMARKER_CODE:
            return
        if self.lsi_open[x]:
            s_next[self.lsi_seq[x]] = mins[x] + 1
            self.lsi_open[x] = False
            mins[x] = INF
            self.lsi_seq[x] = -1
            self._lsi_live.discard(x)

    def insert_new_symbol(self, x: int, p: int, lcp: int, c_next, s_next) -> None:
        """Interval bookkeeping for the new cell of tracker ``p``: it closes
        the LCI of ``x`` (giving ``c_next[p]``), closes any LSI of ``x`` opened
        by an earlier insert, and opens a fresh LSI owned by ``p``."""
        self.update_lci(x, lcp, c_next, p)
        self.update_lsi(x, lcp, s_next)
        if x == ENDMARKER_CODE:
            return
        self.lsi_open[x] = True
        self.min_lsi[x] = INF
        self.lsi_seq[x] = p
        self._lsi_live.add(x)

    def copy_cell(self, x: int, lcp: int, s_next) -> None:
        self.update_lci(x, lcp)
        self.update_lsi(x, lcp, s_next)

    def flush_open_lsi(self, s_next) -> None:
        """End of segment: a symbol with an open LSI never reappeared, so the
        successor of that insert shares exactly one symbol with it."""
        for x in self._lsi_live:
            s_next[self.lsi_seq[x]] = 1
        self.reset()

    def sweep_block(self, syms: np.ndarray, lcps: np.ndarray, ins_idx: np.ndarray, c_next, s_next) -> None:
        """Vectorised equivalent of calling ``copy_cell``/``insert_new_symbol``
        on every cell of a window, in order.

        ``ins_idx[k]`` is the tracker index of the insert at cell ``k`` or -1.
        Per symbol, the ranges between consecutive occurrences partition the
        window, so their minima come from one ``minimum.reduceat``.
        """
        n = len(syms)
        if not n:
            return
        lc = lcps.astype(np.int64, copy=False)
        counts = np.bincount(syms, minlength=self.sigma + 1)
        order = np.argsort(syms, kind="stable")
        offs = np.zeros(len(counts) + 1, dtype=np.int64)
        np.cumsum(counts, out=offs[1:])
        wmin = int(lc.min())
        present = np.flatnonzero(counts[1:]) + 1
        for x in present.tolist():
            occ = order[offs[x]:offs[x + 1]]
            k = len(occ)
            starts = np.empty(k + 1, dtype=np.int64)
            starts[0] = 0
            starts[1:] = occ + 1
            has_tail = starts[-1] < n
            if not has_tail:
                starts = starts[:-1]
            mins = np.minimum.reduceat(lc, starts)
            close = mins[:k]
            first = int(close[0])
            if self.lci_open[x] and self.min_lci[x] < first:
                close[0] = self.min_lci[x]
            idx = ins_idx[occ]
            ins = idx >= 0
            if ins.any():
                cv = close + 1
                if not self.lci_open[x]:
                    cv[0] = 1
                c_next[idx[ins]] = cv[ins]
            prev = np.empty(k, dtype=np.int64)
            prev[1:] = idx[:-1]
            prev[0] = self.lsi_seq[x] if self.lsi_open[x] else -1
            sel = prev >= 0
            if sel.any():
                s_next[prev[sel]] = close[sel] + 1
            tail = int(mins[k]) if has_tail else INF
            last = int(idx[-1])
            self.lci_open[x] = True
            self.min_lci[x] = tail
            self._lci_live.add(x)
            if last >= 0:
                self.lsi_open[x] = True
                self.min_lsi[x] = tail
                self.lsi_seq[x] = last
                self._lsi_live.add(x)
            else:
                self.lsi_open[x] = False
                self.min_lsi[x] = INF
                self.lsi_seq[x] = -1
                self._lsi_live.discard(x)
        seen = set(present.tolist())
        for a in self._lci_live - seen:
            if wmin < self.min_lci[a]:
                self.min_lci[a] = wmin
        for a in self._lsi_live - seen:
            if wmin < self.min_lsi[a]:
                self.min_lsi[a] = wmin


def _copy_segment(old: SegmentSet, new: SegmentSet, h: int, chunk: int) -> None:
    """A segment without inserts is identical in the next generation, so its
    files are handed over by renaming instead of being rewritten."""
    if old.lengths[h] == 0:
        return
    if old.deleted:
        raise MissingGeneration(f"generation {old.generation} has been deleted")
    for kind in new.kinds():
        os.replace(old.path(kind, h), new.path(kind, h))
    new.lengths[h] = old.lengths[h]
    new.occ[h] = old.occ[h]


class _SegmentSplice:
    """Streams for one segment: old readers, new writers, buffered output."""

    def __init__(self, old: SegmentSet, new: SegmentSet, z: int):
        self.z = z
        self.kinds = new.kinds()
        self.readers = {k: old.reader(k, z) for k in self.kinds}
        self.writers = {k: new.writer(k, z) for k in self.kinds}

    def read(self, kind: str, n: int, dtype) -> np.ndarray:
        r = self.readers[kind]
        if r is None:
            if n:
                raise TrackerSegmentOverrun(f"segment {self.z}: inserts leave {n} cells for an empty segment")
            return np.empty(0, dtype=dtype)
        out = r.read(n)
        if len(out) != n:
            raise TrackerSegmentOverrun(f"segment {self.z}: old segment ended early")
        return out

    def close(self) -> None:
        for r in self.readers.values():
            if r is not None:
                r.close()
        for w in self.writers.values():
            w.close()


def _splice(mask: np.ndarray, new_vals, old_vals, dtype) -> np.ndarray:
    out = np.empty(len(mask), dtype=dtype)
    out[mask] = new_vals
    out[~mask] = old_vals
    return out


def merge_segment(z: int, ins: TrackerArrays, base: int, old: SegmentSet, new: SegmentSet,
                  gsa_vals: np.ndarray | None, c_next, s_next, trackers: IntervalTrackers | None,
                  engine: str = "auto", window: int = DEFAULT_CHUNK) -> None:
    """Build ``B_j(z)`` (and ``L_j(z)``, ``G_j(z)``) from generation ``j-1``
    plus the sorted inserts ``ins`` whose global tracker indices start at
    ``base``."""
    k = len(ins)
    old_len = int(old.lengths[z])
    new_len = old_len + k
    P = ins.P
    if P[0] < 1 or P[-1] > new_len or (k > 1 and np.any(P[1:] <= P[:-1])):
        raise TrackerSegmentOverrun(
            f"segment {z}: insert positions must be distinct and within 1..{new_len}")
    # scratch stays in the tracker dtypes: it is sized by the insert count
    pos0 = P - P.dtype.type(1)
    with_lcp = new.with_lcp
    if with_lcp:
        lvals = ins.C.astype(new.lcp_dtype)
        if P[0] == 1:
            lvals[0] = 0
        # the cell after each insert, unless that cell is itself an insert
        ov = P < new_len
        ov[:-1] &= (P[1:] - P[:-1]) != 1
        ov_pos = P[ov]
        ov_val = ins.S[ov]
        del ov
    use_cell = engine == "cell" or (engine == "auto" and new_len <= CELL_THRESHOLD)
    io = _SegmentSplice(old, new, z)
    try:
        if use_cell and with_lcp:
            _merge_cells(io, ins, base, pos0, lvals, ov_pos, ov_val, new_len, old, new, gsa_vals,
                         c_next, s_next, trackers, window)
        else:
            _merge_blocks(io, ins, base, pos0, lvals if with_lcp else None,
                          ov_pos if with_lcp else None, ov_val if with_lcp else None,
                          new_len, old, new, gsa_vals, c_next, s_next, trackers, window)
    finally:
        io.close()
    new.lengths[z] = new_len
    if trackers is not None:
        trackers.flush_open_lsi(s_next)


def _merge_blocks(io, ins, base, pos0, lvals, ov_pos, ov_val, new_len, old, new, gsa_vals,
                  c_next, s_next, trackers, window) -> None:
    z = io.z
    sigma = new.sigma
    ldt, gdt = new.lcp_dtype, new.gsa_dtype
    a = ii = oi = 0
    while a < new_len:
        b = min(a + window, new_len)
        ie = ii + int(np.searchsorted(pos0[ii:], b, side="left"))
        local = pos0[ii:ie] - a
        n_old = (b - a) - (ie - ii)
        mask = np.zeros(b - a, dtype=bool)
        mask[local] = True
        bw = _splice(mask, ins.U[ii:ie], io.read("B", n_old, np.uint8), np.uint8)
        io.writers["B"].write(bw)
        new.occ[z] += np.bincount(bw, minlength=sigma + 1)[:sigma + 1]
        if lvals is not None:
            lw = _splice(mask, lvals[ii:ie], io.read("L", n_old, ldt), ldt)
            oe = oi + int(np.searchsorted(ov_pos[oi:], b, side="left"))
            if oe > oi:
                lw[ov_pos[oi:oe] - a] = ov_val[oi:oe]
                oi = oe
            io.writers["L"].write(lw)
            ins_idx = np.full(b - a, -1, dtype=np.int64)
            ins_idx[local] = np.arange(base + ii, base + ie)
            trackers.sweep_block(bw, lw, ins_idx, c_next, s_next)
        if gdt is not None:
            gw = _splice(mask, gsa_vals[ii:ie], io.read("G", n_old, gdt), gdt)
            io.writers["G"].write(gw)
        a, ii = b, ie


def _merge_cells(io, ins, base, pos0, lvals, ov_pos, ov_val, new_len, old, new, gsa_vals,
                 c_next, s_next, trackers, window) -> None:
    """Cell-at-a-time merge mirroring the textbook sweep."""
    z = io.z
    ldt, gdt = new.lcp_dtype, new.gsa_dtype
    with_gsa = gdt is not None
    n_old = new_len - len(pos0)
    old_b = io.read("B", n_old, np.uint8).tolist()
    old_l = io.read("L", n_old, ldt).tolist()
    old_g = io.read("G", n_old, gdt) if with_gsa else None
    out_b: list[int] = []
    out_l: list[int] = []
    out_g: list = []
    src = 0
    k = len(pos0)
    U = ins.U.tolist()
    P = (pos0 + 1).tolist()
    S = ins.S.tolist()
    L = lvals.tolist()
    s = 1

    def copy_old(lcp=None):
        nonlocal src, s
        x = old_b[src]
        v = old_l[src] if lcp is None else lcp
        out_b.append(x)
        out_l.append(v)
        if with_gsa:
            out_g.append(old_g[src])
        trackers.copy_cell(x, v, s_next)
        src += 1
        s += 1

    for p in range(k):
        while s < P[p]:
            copy_old()
        x = U[p]
        out_b.append(x)
        out_l.append(L[p])
        if with_gsa:
            out_g.append(gsa_vals[p])
        trackers.insert_new_symbol(x, base + p, L[p], c_next, s_next)
        s += 1
        if s <= new_len and (p + 1 == k or P[p + 1] != s):
            copy_old(int(S[p]))
    while s <= new_len:
        copy_old()
    bw = np.asarray(out_b, dtype=np.uint8)
    io.writers["B"].write(bw)
    new.occ[z] += np.bincount(bw, minlength=new.sigma + 1)[:new.sigma + 1]
    io.writers["L"].write(np.asarray(out_l, dtype=ldt))
    if with_gsa:
        io.writers["G"].write(np.array(out_g, dtype=gdt))


def merge_generation(trackers: TrackerArrays, old: SegmentSet, new: SegmentSet,
                     gsa_vals: np.ndarray | None = None, engine: str = "auto",
                     window: int = DEFAULT_CHUNK,
                     on_segment: Callable[[int], None] | None = None):
    """Write generation ``j`` from generation ``j-1`` and the sorted trackers.

    Segments are processed in ascending order; a segment without inserts is
    copied verbatim.  Returns ``(C_next, S_next)`` indexed like ``trackers``
    (both None when LCP output is disabled).
    """
    if engine not in ENGINES:
        raise ValueError(f"engine must be one of {ENGINES}")
    t = len(trackers)
    c_next = s_next = None
    it = None
    if new.with_lcp:
        c_next = np.zeros(t, dtype=new.lcp_dtype)
        s_next = np.zeros(t, dtype=new.lcp_dtype)
        it = IntervalTrackers(new.sigma)
    bounds = np.searchsorted(trackers.Q, np.arange(new.sigma + 2))
    if bounds[-1] != t:
        raise TrackerSegmentOverrun("tracker segment index beyond alphabet")
    for z in range(new.sigma + 1):
        lo, hi = int(bounds[z]), int(bounds[z + 1])
        if lo == hi:
            _copy_segment(old, new, z, window)
        else:
            merge_segment(z, trackers.take(slice(lo, hi)), lo, old, new,
                          None if gsa_vals is None else gsa_vals[lo:hi],
                          c_next, s_next, it, engine, window)
        if on_segment is not None:
            on_segment(z)
    return c_next, s_next
