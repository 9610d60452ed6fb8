import random

import pytest
from hypothesis import strategies as st

from ebwtlcp import BuildOptions, build_strings

FOUR_WORDS = [b"abac", b"cbab", b"bca", b"cba"]
DNA_PAIR = [b"AATACACTGTACCAAC", b"GAACAGAAAGCTC"]


def collections(max_m=8, max_len=12, alphabet=b"ACGT"):
    word = st.binary(min_size=1, max_size=max_len).map(
        lambda b: bytes(alphabet[x % len(alphabet)] for x in b))
    return st.lists(word, min_size=1, max_size=max_m)


def random_collection(rng: random.Random, sigma: int, max_m=64, max_len=32):
    letters = b"ACGTNBDEFHIJKLMOPQRS"[:sigma] if sigma > 1 else b"a"
    m = rng.randint(1, max_m)
    return [bytes(rng.choice(letters) for _ in range(rng.randint(1, max_len))) for _ in range(m)]


@pytest.fixture
def build(tmp_path):
    """Build a list of strings and return the loaded outputs."""
    counter = iter(range(10**6))

    def _build(strings, **opts):
        prefix = tmp_path / f"out{next(counter)}"
        trace = opts.pop("trace", None)
        result = build_strings(strings, prefix, tmp_dir=tmp_path / "tmp",
                               options=BuildOptions(**opts), trace=trace)
        return result.load()

    return _build


@pytest.fixture
def trace_states(tmp_path):
    def _run(strings, **opts):
        states = {}
        build_strings(strings, tmp_path / "traced", tmp_dir=tmp_path / "tmp",
                      options=BuildOptions(**opts),
                      trace=lambda t: states.__setitem__(t.j, t.snapshot()))
        return states

    return _run


def partial_oracle(strings, j):
    """Sorted suffixes with at most ``j`` symbols before the end-marker,
    as ``(ebwt, lcp, gsa)`` of the generation reached after iteration ``j``."""
    keys = [(s[k:], i, k) for i, s in enumerate(strings) for k in range(len(s) + 1)
            if len(s) - k <= j]
    keys.sort(key=lambda t: (t[0], t[1]))
    ebwt = "".join(chr(strings[i][k - 1]) if k else "$" for _, i, k in keys)
    lcp = [0] * len(keys)
    for r in range(1, len(keys)):
        a, b = keys[r - 1][0], keys[r][0]
        n = 0
        while n < min(len(a), len(b)) and a[n] == b[n]:
            n += 1
        lcp[r] = n
    gsa = [(k + 1, i) for _, i, k in keys]
    return ebwt, lcp, gsa


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion."""

    def _report(number, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
