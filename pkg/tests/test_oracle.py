import random

import pytest
from hypothesis import given, strategies as st

from ebwtlcp.errors import OracleCapExceeded, OutOfRange
from ebwtlcp.oracle import naive_all, naive_ebwt, naive_gsa, naive_lcp, naive_rmq_lcp

from conftest import DNA_PAIR, FOUR_WORDS, collections


def test_single_string():
    assert naive_gsa([b"a"]) == [(0, 2), (0, 1)]
    assert naive_lcp([b"a"]) == [0, 0]
    assert naive_ebwt([b"a"]) == b"a$"


def test_four_word_collection():
    g = naive_gsa(FOUR_WORDS)
    assert len(g) == 18
    assert g[:4] == [(0, 5), (1, 5), (2, 4), (3, 4)]
    e = naive_ebwt(FOUR_WORDS)
    assert e == b"cbaacbb$bacca$ab$$"
    owners = [i for i, t in g if t == 1]
    assert owners == [0, 2, 3, 1]


def test_dna_pair_suffix_order():
    # full-length order of the 13 longest suffixes shown for segment C
    g = naive_gsa(DNA_PAIR)
    sufs = [DNA_PAIR[i][t - 1:] for i, t in g]
    c_block = [s for s in sufs if s.startswith(b"C")]
    assert c_block == [b"C", b"C", b"CAAC", b"CACTGTACCAAC", b"CAGAAAGCTC", b"CCAAC", b"CTC",
                       b"CTGTACCAAC"]


def test_cap():
    with pytest.raises(OracleCapExceeded):
        naive_gsa([b"a" * 100], cap=50)


def test_rmq_examples():
    lcp = naive_lcp([b"aaa"])
    # suffixes $, a$, aa$, aaa$
    assert lcp == [0, 0, 1, 2]
    assert naive_rmq_lcp(2, 3, lcp) == lcp[3]
    assert naive_rmq_lcp(1, 3, lcp) == 1
    for bad in [(2, 2), (-1, 2), (1, 4)]:
        with pytest.raises(OutOfRange):
            naive_rmq_lcp(*bad, lcp)


def direct_lcp(a, b):
    n = 0
    while n < min(len(a), len(b)) and a[n] == b[n]:
        n += 1
    return n


@given(collections(max_m=5, max_len=10, alphabet=b"AB"), st.randoms(use_true_random=False))
def test_rmq_equals_pairwise_lcp(strings, rnd):
    g = naive_gsa(strings)
    lcp = naive_lcp(strings)
    if len(g) < 2:
        return
    for _ in range(10):
        r, s = sorted(rnd.sample(range(len(g)), 2))
        (i, t), (i2, t2) = g[r], g[s]
        assert naive_rmq_lcp(r, s, lcp) == direct_lcp(strings[i][t - 1:], strings[i2][t2 - 1:])


@given(collections(max_m=6, max_len=10, alphabet=b"ACG"))
def test_oracle_properties(strings):
    e, lcp, g = naive_all(strings)
    assert e == naive_ebwt(strings) and lcp == naive_lcp(strings) and g == naive_gsa(strings)
    assert sorted(e) == sorted(b"".join(strings) + b"$" * len(strings))
    assert lcp[:len(strings)] == [0] * len(strings)
    for q in range(1, len(g)):
        (i, t), (i2, t2) = g[q - 1], g[q]
        assert lcp[q] <= min(len(strings[i]) - t + 1, len(strings[i2]) - t2 + 1)
