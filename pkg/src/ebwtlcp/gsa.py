"""Generalized suffix array entries carried alongside the segments.

An entry is ``(start, string_id)`` with a 1-based start inside ``w_i$``.  The
entry inserted for string ``i`` at iteration ``j`` describes its ``j``-suffix,
which starts at ``len(w_i$) - j``.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .alphabet import uint_dtype, width_for


class GsaEntry(NamedTuple):
    start: int
    string_id: int


def gsa_widths(K: int, m: int) -> tuple[int, int]:
    return width_for(K), width_for(max(m - 1, 0))


def gsa_dtype(start_width: int, id_width: int) -> np.dtype:
    return np.dtype([("start", uint_dtype(start_width)), ("sid", uint_dtype(id_width))])


def gsa_entries(nid: np.ndarray, lengths: np.ndarray, j: int, dtype: np.dtype) -> np.ndarray:
    """Entries for the ``j``-suffixes of strings ``nid`` (tracker order)."""
    out = np.empty(len(nid), dtype=dtype)
    out["start"] = lengths[nid] - j
    out["sid"] = nid
    return out


def to_pairs(records: np.ndarray) -> list[GsaEntry]:
    return [GsaEntry(int(s), int(i)) for s, i in zip(records["start"], records["sid"])]


def read_gsa(path, start_width: int, id_width: int) -> np.ndarray:
    return np.fromfile(path, dtype=gsa_dtype(start_width, id_width))
