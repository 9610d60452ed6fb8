import json

import pytest

from ebwtlcp.cli import main

from conftest import DNA_PAIR, FOUR_WORDS


@pytest.fixture
def words_file(tmp_path):
    p = tmp_path / "s3.txt"
    p.write_bytes(b"\n".join(FOUR_WORDS) + b"\n")
    return p


def run(*args):
    return main([str(a) for a in args])


def test_build_writes_outputs(tmp_path, words_file, capsys):
    prefix = tmp_path / "out" / "s3"
    assert run("build", "--input", words_file, "--output-prefix", prefix, "--tmp-dir", tmp_path / "t") == 0
    assert (tmp_path / "out" / "s3.ebwt").read_bytes() == b"cbaacbb$bacca$ab$$"
    meta = json.loads((tmp_path / "out" / "s3.meta.json").read_text())
    assert (meta["m"], meta["N"], meta["K"], meta["sigma"]) == (4, 18, 5, 3)
    assert meta["lcp_width"] == 1 and meta["format_version"] == 1
    assert not (tmp_path / "out" / "s3.gsa").exists()
    # scratch space is cleaned up
    assert list((tmp_path / "t").iterdir()) == []


def test_build_with_gsa_single_string(tmp_path):
    p = tmp_path / "a.txt"
    p.write_text("a\n")
    assert run("build", "--input", p, "--output-prefix", tmp_path / "a", "--with-gsa") == 0
    assert (tmp_path / "a.gsa").read_bytes() == bytes([2, 0, 1, 0])


def test_build_then_verify(tmp_path, words_file, capsys):
    prefix = tmp_path / "s3"
    run("build", "--input", words_file, "--output-prefix", prefix, "--with-gsa")
    assert run("verify", "--output-prefix", prefix, "--report", tmp_path / "r.txt") == 0
    assert "overall: PASS" in capsys.readouterr().out
    assert "overall=pass" in (tmp_path / "r.txt").read_text()


def test_build_with_verify_flag(tmp_path, words_file, capsys):
    assert run("build", "--input", words_file, "--output-prefix", tmp_path / "s3", "--verify") == 0
    out = capsys.readouterr().out
    assert "sequential_io" in out and "oracle_lcp" in out


def test_verify_rebuild(tmp_path, words_file, capsys):
    assert run("verify", "--output-prefix", tmp_path / "s3", "--input", words_file, "--rebuild") == 0
    assert run("verify", "--output-prefix", tmp_path / "s3", "--rebuild") == 2


def test_tampered_lcp_fails(tmp_path, words_file, capsys):
    prefix = tmp_path / "s3"
    run("build", "--input", words_file, "--output-prefix", prefix)
    raw = bytearray((tmp_path / "s3.lcp").read_bytes())
    raw[7] ^= 4
    (tmp_path / "s3.lcp").write_bytes(bytes(raw))
    assert run("verify", "--output-prefix", prefix) == 1
    assert "first mismatch at 7" in capsys.readouterr().out


def test_missing_meta(tmp_path, capsys):
    assert run("verify", "--output-prefix", tmp_path / "nothing") == 1
    assert "MissingMetadata" in capsys.readouterr().err


def test_inspect(tmp_path, words_file, capsys):
    prefix = tmp_path / "s3"
    run("build", "--input", words_file, "--output-prefix", prefix, "--with-gsa")
    capsys.readouterr()
    assert run("inspect", "--output-prefix", prefix, "--range", "1..4") == 0
    rows = capsys.readouterr().out.strip().splitlines()
    assert rows[0].split("\t") == ["row", "ebwt", "lcp", "gsa"]
    assert [r.split("\t")[2] for r in rows[1:]] == ["0"] * 4
    assert run("inspect", "--output-prefix", prefix, "--range", "5..99") == 1
    assert "OutOfRange" in capsys.readouterr().err


def test_inspect_suffixes_without_gsa(tmp_path, capsys):
    p = tmp_path / "dna.fa"
    p.write_bytes(b">w0\n" + DNA_PAIR[0] + b"\n>w1\n" + DNA_PAIR[1] + b"\n")
    run("build", "--input", p, "--output-prefix", tmp_path / "d")
    capsys.readouterr()
    assert run("inspect", "--output-prefix", tmp_path / "d", "--suffixes") == 0
    rows = [r.split("\t") for r in capsys.readouterr().out.strip().splitlines()[1:]]
    assert len(rows) == 31
    assert rows[2][3] == "AAAGCTC$" and rows[2][2] == "0"
    assert [r[3] for r in rows] == sorted((r[3] for r in rows), key=lambda s: s.replace("$", "\0"))


def test_lcp_width_override(tmp_path, words_file):
    assert run("build", "--input", words_file, "--output-prefix", tmp_path / "w", "--lcp-width", "4") == 0
    assert len((tmp_path / "w.lcp").read_bytes()) == 72


def test_no_lcp(tmp_path, words_file):
    assert run("build", "--input", words_file, "--output-prefix", tmp_path / "n", "--no-lcp") == 0
    assert not (tmp_path / "n.lcp").exists()


def test_env_tmpdir(tmp_path, words_file, monkeypatch):
    scratch = tmp_path / "scratch"
    monkeypatch.setenv("EBWTLCP_TMPDIR", str(scratch))
    assert run("build", "--input", words_file, "--output-prefix", tmp_path / "e") == 0
    assert scratch.is_dir()


def test_bad_input_exits_nonzero(tmp_path, capsys):
    p = tmp_path / "bad.txt"
    p.write_text("ab$c\n")
    assert run("build", "--input", p, "--output-prefix", tmp_path / "b") == 1
    assert "EndMarkerCollision" in capsys.readouterr().err


def test_deterministic_output(tmp_path, words_file):
    for name in ("a", "b"):
        run("build", "--input", words_file, "--output-prefix", tmp_path / name, "--with-gsa")
    for ext in (".ebwt", ".lcp", ".gsa", ".meta.json"):
        assert (tmp_path / ("a" + ext)).read_bytes() == (tmp_path / ("b" + ext)).read_bytes()
