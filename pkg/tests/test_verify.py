import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings

from ebwtlcp import BuildOptions, build_strings
from ebwtlcp.errors import EmptyCollection, MalformedEbwt
from ebwtlcp.oracle import naive_all
from ebwtlcp.verify import AuditReport, audit_build, invert_ebwt, verify_outputs

from conftest import FOUR_WORDS, collections


def test_invert_examples():
    assert invert_ebwt(b"a$", 1) == [b"a"]
    strings, owners = invert_ebwt(b"cbaacbb$bacca$ab$$", 4, with_owners=True)
    assert strings == FOUR_WORDS
    assert owners == [0, 2, 3, 1]


def test_invert_rejects_bad_input():
    with pytest.raises(MalformedEbwt):
        invert_ebwt(b"cbaacbb$bacca$ab$$", 3)
    with pytest.raises(MalformedEbwt):
        invert_ebwt(b"ab", 1)
    # the walk from row 0 loops through "a" and "b" without reaching a marker
    with pytest.raises(MalformedEbwt):
        invert_ebwt(b"$ba", 1)


@settings(max_examples=60, deadline=None)
@given(collections(max_m=8, max_len=12, alphabet=b"ACGT"))
def test_invert_oracle_ebwt(strings):
    e = naive_all(strings)[0]
    got, owners = invert_ebwt(e, len(strings), with_owners=True)
    assert got == strings
    # each walk takes exactly |w| steps, so lengths are preserved
    assert [len(s) for s in got] == [len(s) for s in strings]
    assert sorted(owners) == list(range(len(strings)))


def test_verify_clean_build(tmp_path):
    build_strings(FOUR_WORDS, tmp_path / "x", tmp_dir=tmp_path, options=BuildOptions(with_gsa=True))
    report = verify_outputs(tmp_path / "x", FOUR_WORDS)
    assert report.passed, report.to_table()
    names = {n for n, _, _ in report.checks}
    assert {"round_trip", "multiset", "oracle_ebwt", "oracle_lcp", "oracle_gsa", "marker_owners"} <= names


def test_verify_detects_tampered_lcp(tmp_path):
    build_strings(FOUR_WORDS, tmp_path / "x", tmp_dir=tmp_path)
    raw = bytearray((tmp_path / "x.lcp").read_bytes())
    raw[10] ^= 1
    (tmp_path / "x.lcp").write_bytes(bytes(raw))
    report = verify_outputs(tmp_path / "x")
    assert not report.passed
    assert dict((n, d) for n, _, d in report.checks)["oracle_lcp"] == "first mismatch at 10"


def test_verify_without_input_uses_inversion(tmp_path):
    build_strings([b"ACGT", b"AC"], tmp_path / "x", tmp_dir=tmp_path)
    assert verify_outputs(tmp_path / "x").passed


def test_audit_equal_strings(tmp_path):
    strings = [b"aaaa"] * 50
    report, result = audit_build(strings, tmp_path / "x", BuildOptions(with_gsa=True), tmp_dir=tmp_path)
    assert report.passed, report.to_table()
    lcp = result.load().lcp.tolist()
    assert lcp == naive_all(strings)[1]
    # identical strings share at most their full content, never the marker
    assert max(lcp) == 4
    assert report.counters["backward_seeks"] == 0


def test_audit_empty_collection(tmp_path):
    with pytest.raises(EmptyCollection):
        audit_build([], tmp_path / "x", tmp_dir=tmp_path)


def test_report_formats(tmp_path):
    r = AuditReport()
    r.add("a", True, "fine")
    r.add("b", False)
    r.counters["n"] = 3
    assert not r.passed and r.failures() == ["b"]
    assert "FAIL" in r.to_table()
    r.write_keyvalue(tmp_path / "r.txt")
    assert (tmp_path / "r.txt").read_text().splitlines() == ["check.a=pass", "check.b=fail", "n=3",
                                                             "overall=fail"]
