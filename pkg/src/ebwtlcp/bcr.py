"""Phase 1 of every iteration: where does each active string's next symbol go?

The trackers hold one entry per active string.  At iteration ``j`` the entry
for string ``i`` says that the symbol preceding its ``j``-suffix is inserted
at 1-based position ``P`` of segment ``Q``; ``U`` is that symbol, ``Nid`` is
``i``, and ``C``/``S`` are the LCP values to write at ``P`` and ``P+1``.
"""
from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .alphabet import ENDMARKER_CODE, PAD_CODE, width_for, uint_dtype
from .errors import InconsistentTracker
from .segstore import DEFAULT_CHUNK, SegmentSet, self_ranks


@dataclass
class TrackerArrays:
    U: np.ndarray
    Nid: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    C: np.ndarray
    S: np.ndarray

    def __len__(self) -> int:
        return len(self.U)

    def take(self, index: np.ndarray) -> "TrackerArrays":
        return TrackerArrays(*(getattr(self, f.name)[index] for f in fields(self)))

    @property
    def nbytes(self) -> int:
        return sum(getattr(self, f.name).nbytes for f in fields(self))

    def copy(self) -> "TrackerArrays":
        return TrackerArrays(*(getattr(self, f.name).copy() for f in fields(self)))


def index_dtype(limit: int) -> np.dtype:
    """Unsigned dtype of 4 or 8 bytes able to hold ``limit``."""
    return uint_dtype(width_for(limit, (4, 8)))


def init_iteration_zero(column0: np.ndarray, N: int, lcp_dtype=np.uint8) -> TrackerArrays:
    """Trackers for iteration 0: the last symbol of every string goes to
    segment 0 in input order, since the implicit end-markers sort by index."""
    column0 = np.asarray(column0, dtype=np.uint8)
    m = len(column0)
    if np.any(column0 == PAD_CODE) or np.any(column0 == ENDMARKER_CODE):
        raise InconsistentTracker("column 0 must hold one real symbol per string")
    return TrackerArrays(
        U=column0.copy(),
        Nid=np.arange(m, dtype=index_dtype(max(m - 1, 0))),
        P=np.arange(1, m + 1, dtype=index_dtype(N)),
        Q=np.zeros(m, dtype=np.uint8),
        C=np.zeros(m, dtype=lcp_dtype),
        S=np.zeros(m, dtype=lcp_dtype),
    )


def compute_positions(trackers: TrackerArrays, prev: SegmentSet, column: np.ndarray,
                      chunk: int = DEFAULT_CHUNK) -> TrackerArrays:
    """LF-mapping step from iteration ``j-1`` to ``j``.

    ``trackers`` must be the sorted trackers of iteration ``j-1`` with their
    ``C``/``S`` replaced by the values computed for iteration ``j``.  Strings
    whose last insert was the end-marker are finished and dropped (a stable
    compaction).  For the rest, the symbol ``c`` inserted at ``(v, s)`` is
    looked up in ``B_{j-1}(v)``, and its new position in segment ``c`` is the
    number of ``c`` in segments below ``v`` plus ``rank(c, s)`` inside ``v``.
    """
    keep = trackers.U != ENDMARKER_CODE
    # all-active trackers are updated in place
    t = trackers.take(np.flatnonzero(keep)) if not keep.all() else trackers
    active = int(np.count_nonzero(column != PAD_CODE))
    if active != len(t):
        raise InconsistentTracker(f"{len(t)} active trackers but the column has {active} symbols")
    if not len(t):
        return t
    cum = prev.cumulative_table()
    newP = np.empty(len(t), dtype=np.int64)
    bounds = np.searchsorted(t.Q, np.arange(prev.sigma + 2))
    for v in range(prev.sigma + 1):
        lo, hi = int(bounds[v]), int(bounds[v + 1])
        if lo == hi:
            continue
        pos = t.P[lo:hi]
        if pos[-1] > prev.lengths[v] or pos[0] < 1:
            raise InconsistentTracker(f"position {int(pos[-1])} beyond segment {v} of length {int(prev.lengths[v])}")
        reader = prev.reader("B", v)
        with reader:
            syms, ranks = self_ranks(reader, pos, prev.sigma, chunk)
        if not np.array_equal(syms, t.U[lo:hi]):
            bad = lo + int(np.flatnonzero(syms != t.U[lo:hi])[0])
            raise InconsistentTracker(
                f"tracker {bad}: segment {v} holds code {int(syms[bad - lo])} at {int(t.P[bad])}, "
                f"expected {int(t.U[bad])}")
        newP[lo:hi] = cum[v, syms] + ranks
    if newP.max() > np.iinfo(t.P.dtype).max:
        raise InconsistentTracker("position overflow")
    t.Q = t.U.copy()
    t.P = newP.astype(t.P.dtype)
    u = column[t.Nid]
    if np.any(u == PAD_CODE):
        bad = int(t.Nid[np.flatnonzero(u == PAD_CODE)[0]])
        raise InconsistentTracker(f"string {bad} is active but its column cell is a pad")
    t.U = u
    return t


def sort_trackers(trackers: TrackerArrays) -> TrackerArrays:
    """Permute all six arrays jointly so that ``(Q, P)`` ascends.

    Works in place one array at a time, so at most one extra array is alive
    next to the permutation."""
    if len(trackers) < 2:
        return trackers
    order = np.lexsort((trackers.P, trackers.Q))
    for f in fields(trackers):
        setattr(trackers, f.name, getattr(trackers, f.name)[order])
    return trackers


def sort_permutation_bytes(n: int) -> int:
    # np.lexsort materialises an int64 permutation
    return 8 * n
