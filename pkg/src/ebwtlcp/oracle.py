"""Reference answers computed by explicit suffix sorting.

Quadratic in the worst case and only meant for small collections.  Symbols
are compared by code, so the end-marker (code 0) is below every letter and
two end-markers compare by string index.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import OracleCapExceeded, OutOfRange

DEFAULT_CAP = 100_000


def _check_cap(strings: Sequence[bytes], cap: int) -> None:
    n = sum(len(s) + 1 for s in strings)
    if n > cap:
        raise OracleCapExceeded(f"collection has {n} symbols, oracle limit is {cap}")


def naive_gsa(strings: Sequence[bytes], cap: int = DEFAULT_CAP) -> list[tuple[int, int]]:
    """Sorted ``(string_id, start)`` pairs, ``start`` 1-based in ``w_i$``.

    Sorting on the suffix without its end-marker and then on the string id is
    the same as treating each ``$`` as a symbol smaller than all letters with
    ties broken by index: a proper prefix sorts first, and equal suffixes fall
    back to the id.
    """
    _check_cap(strings, cap)
    keys = [(s[k:], i, k) for i, s in enumerate(strings) for k in range(len(s) + 1)]
    keys.sort(key=lambda t: (t[0], t[1]))
    return [(i, k + 1) for _, i, k in keys]


def naive_ebwt(strings: Sequence[bytes], endmarker: int = ord("$"), cap: int = DEFAULT_CAP) -> bytes:
    return bytes(strings[i][t - 2] if t > 1 else endmarker for i, t in naive_gsa(strings, cap))


def _common_prefix(a: bytes, b: bytes) -> int:
    n = min(len(a), len(b))
    k = 0
    while k < n and a[k] == b[k]:
        k += 1
    return k


def naive_lcp(strings: Sequence[bytes], cap: int = DEFAULT_CAP) -> list[int]:
    """LCP of adjacent sorted suffixes; end-markers never match."""
    gsa = naive_gsa(strings, cap)
    out = [0] * len(gsa)
    for r in range(1, len(gsa)):
        (i, t), (i2, t2) = gsa[r - 1], gsa[r]
        out[r] = _common_prefix(strings[i][t - 1:], strings[i2][t2 - 1:])
    return out


def naive_all(strings: Sequence[bytes], endmarker: int = ord("$"), cap: int = DEFAULT_CAP):
    """``(ebwt, lcp, gsa)`` from a single sort."""
    gsa = naive_gsa(strings, cap)
    ebwt = bytes(strings[i][t - 2] if t > 1 else endmarker for i, t in gsa)
    lcp = [0] * len(gsa)
    for r in range(1, len(gsa)):
        (i, t), (i2, t2) = gsa[r - 1], gsa[r]
        lcp[r] = _common_prefix(strings[i][t - 1:], strings[i2][t2 - 1:])
    return ebwt, lcp, gsa


def naive_rmq_lcp(r: int, s: int, lcp) -> int:
    """Longest common prefix of the suffixes ranked ``r < s`` (0-based)."""
    n = len(lcp)
    if not 0 <= r < s < n:
        raise OutOfRange(f"need 0 <= r < s < {n}, got r={r}, s={s}")
    return int(np.min(np.asarray(lcp[r + 1:s + 1])))
