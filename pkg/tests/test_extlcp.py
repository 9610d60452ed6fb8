import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from ebwtlcp.bcr import TrackerArrays
from ebwtlcp.errors import TrackerSegmentOverrun
from ebwtlcp.extlcp import IntervalTrackers, merge_generation
from ebwtlcp.oracle import naive_all
from ebwtlcp.segstore import SegmentSet

from conftest import DNA_PAIR, collections


def sweep_cells(cells, sigma):
    """Per-cell reference for one segment: ``cells`` = [(sym, lcp, tracker or -1)]."""
    k = sum(1 for *_, p in cells if p >= 0)
    c_next, s_next = np.zeros(k, np.int64), np.zeros(k, np.int64)
    it = IntervalTrackers(sigma)
    for x, v, p in cells:
        if p >= 0:
            it.insert_new_symbol(x, p, v, c_next, s_next)
        else:
            it.copy_cell(x, v, s_next)
    it.flush_open_lsi(s_next)
    return c_next.tolist(), s_next.tolist()


def test_intervals_on_a_small_segment():
    # cells: A(new,p0) C A(new,p1) A C
    cells = [(1, 0, 0), (2, 3, -1), (1, 2, 1), (1, 4, -1), (2, 1, -1)]
    c_next, s_next = sweep_cells(cells, 2)
    # p0: no earlier A -> 1; its LSI runs to the next A at cell 3: min(3,2)+1
    # p1: LCI (cell 1, cell 3] -> min(3,2)+1; LSI (cell 3, cell 4] -> 4+1
    assert c_next == [1, 3]
    assert s_next == [3, 5]


def test_open_lsi_at_segment_end_gets_one():
    c_next, s_next = sweep_cells([(2, 0, -1), (1, 5, 0), (2, 2, -1)], 2)
    assert c_next == [1] and s_next == [1]


def test_endmarker_never_opens_intervals():
    c_next, s_next = sweep_cells([(0, 0, 0), (0, 4, 1), (1, 2, -1)], 1)
    assert c_next == [0, 0] and s_next == [0, 0]


@settings(max_examples=200)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 9), st.booleans()), min_size=1, max_size=40),
       st.integers(1, 7))
def test_block_sweep_equals_cell_sweep(raw, window):
    cells, p = [], 0
    for x, v, is_ins in raw:
        cells.append((x, v, p if is_ins else -1))
        p += is_ins
    want = sweep_cells(cells, 3)
    k = p
    c_next, s_next = np.zeros(k, np.int64), np.zeros(k, np.int64)
    it = IntervalTrackers(3)
    syms = np.array([c[0] for c in cells], np.uint8)
    lcps = np.array([c[1] for c in cells], np.int64)
    idx = np.array([c[2] for c in cells], np.int64)
    for a in range(0, len(cells), window):
        it.sweep_block(syms[a:a + window], lcps[a:a + window], idx[a:a + window], c_next, s_next)
    it.flush_open_lsi(s_next)
    assert (c_next.tolist(), s_next.tolist()) == want


def test_state_after_iteration_13(trace_states):
    s = trace_states(DNA_PAIR)[13]
    assert s["B"][0] == "CC" and s["L"][0] == [0, 0]
    assert s["B"][1] == "GCGAATATCCA"
    assert s["L"][1] == [0, 2, 3, 2, 1, 2, 3, 2, 2, 1, 2]
    assert s["L"][1][5] == 2 and s["L"][1][6] == 3
    # segment 2 gets no insert at iteration 13, so it is carried over unchanged
    assert s["B"][2] == "ATCAAAGA"
    assert s["L"][2] == [0, 1, 1, 2, 2, 1, 1, 2]
    assert s["B"][3] == "A$AT" and s["L"][3] == [0, 3, 1, 1]
    assert s["B"][4] == "GCC" and s["L"][4] == [0, 1, 1]


def test_state_after_iteration_12(trace_states):
    s = trace_states(DNA_PAIR)[12]
    assert s["B"][1] == "GCGAAATCCA"
    assert s["L"][1] == [0, 2, 3, 2, 1, 2, 2, 2, 1, 2]
    assert s["B"][2] == "ATCAAAGA"
    assert s["L"][2] == [0, 1, 1, 2, 2, 1, 1, 2]
    # values for iteration 13 computed while writing iteration 12
    assert s["C_next"] == [3, 2] and s["S_next"] == [1, 3]


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(collections(max_m=10, max_len=14, alphabet=b"ACG"), st.integers(1, 6))
def test_engines_agree_with_oracle(build, strings, window):
    ebwt, lcp, gsa = naive_all(strings)
    outs = [build(strings, engine=e, window=window, with_gsa=True) for e in ("cell", "block", "auto")]
    for o in outs:
        assert o.ebwt == ebwt
        assert o.lcp.tolist() == lcp
        assert list(zip(o.gsa["sid"].tolist(), o.gsa["start"].tolist())) == gsa


def test_without_lcp(build):
    o = build([b"abac", b"cbab"], with_lcp=False)
    assert o.lcp is None
    assert o.ebwt == naive_all([b"abac", b"cbab"])[0]


def _segment(tmp_path, cells):
    old = SegmentSet(tmp_path, 0, 1, np.uint8)
    for kind in ("B", "L"):
        with old.writer(kind, 1) as w:
            w.write(np.asarray(cells, np.uint8) if kind == "B" else np.zeros(len(cells), np.uint8))
    old.lengths[1] = len(cells)
    return old


@pytest.mark.parametrize("positions", [[4], [0], [2, 2]])
def test_bad_insert_positions(tmp_path, positions):
    old = _segment(tmp_path, [1, 1])
    new = SegmentSet(tmp_path, 1, 1, np.uint8)
    k = len(positions)
    t = TrackerArrays(U=np.ones(k, np.uint8), Nid=np.arange(k, dtype=np.uint32),
                      P=np.array(positions, np.int64).astype(np.uint32), Q=np.ones(k, np.uint8),
                      C=np.zeros(k, np.uint8), S=np.zeros(k, np.uint8))
    with pytest.raises(TrackerSegmentOverrun):
        merge_generation(t, old, new)


def test_unknown_engine(tmp_path):
    old = _segment(tmp_path, [1])
    new = SegmentSet(tmp_path, 1, 1, np.uint8)
    t = TrackerArrays(*(np.zeros(0, np.uint8) for _ in range(6)))
    with pytest.raises(ValueError):
        merge_generation(t, old, new, engine="fast")
