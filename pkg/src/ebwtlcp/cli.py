"""Command-line front end: ``build``, ``verify`` and ``inspect``."""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .builder import BuildOptions, build_file, load_outputs
from .errors import EbwtLcpError, OutOfRange
from .oracle import DEFAULT_CAP
from .verify import audit_build, invert_ebwt, verify_outputs


def _add_build_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="collection file")
    p.add_argument("--format", default="auto", choices=("auto", "lines", "fasta", "fastq"))
    p.add_argument("--output-prefix", required=True)
    p.add_argument("--tmp-dir", default=None,
                   help="scratch directory (default: $EBWTLCP_TMPDIR, then the system temp dir)")
    p.add_argument("--with-gsa", action="store_true", help="also write <prefix>.gsa")
    p.add_argument("--no-lcp", action="store_true", help="skip the LCP array")
    p.add_argument("--lcp-width", type=int, choices=(1, 2, 4, 8), default=None)
    p.add_argument("--verify", action="store_true", help="check the outputs after building")
    p.add_argument("--oracle-cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--report", default=None, help="write the audit as key=value lines here")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ebwtlcp", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    _add_build_args(sub.add_parser("build", help="build EBWT/LCP/GSA files"))

    v = sub.add_parser("verify", help="check existing outputs, or build and audit an input")
    v.add_argument("--output-prefix", required=True)
    v.add_argument("--input", default=None,
                   help="original collection; with --rebuild it is built first under instrumentation")
    v.add_argument("--format", default="auto", choices=("auto", "lines", "fasta", "fastq"))
    v.add_argument("--rebuild", action="store_true")
    v.add_argument("--with-gsa", action="store_true")
    v.add_argument("--tmp-dir", default=None)
    v.add_argument("--oracle-cap", type=int, default=DEFAULT_CAP)
    v.add_argument("--report", default=None)

    i = sub.add_parser("inspect", help="print rows of finished outputs")
    i.add_argument("--output-prefix", required=True)
    i.add_argument("--range", default=None, metavar="FROM..TO",
                   help="1-based inclusive row range (default: all)")
    i.add_argument("--suffixes", action="store_true", help="also print each row's suffix")
    return ap


def _options(args) -> BuildOptions:
    return BuildOptions(with_lcp=not getattr(args, "no_lcp", False), with_gsa=args.with_gsa,
                        lcp_width=getattr(args, "lcp_width", None))


def cmd_build(args) -> int:
    if args.verify:
        report, result = audit_build(args.input, args.output_prefix, _options(args), args.format,
                                     args.tmp_dir, args.oracle_cap)
        print(report.to_table())
        if args.report:
            report.write_keyvalue(args.report)
        return 0 if report.passed else 1
    result = build_file(args.input, args.output_prefix, args.format, args.tmp_dir, _options(args))
    meta = result.meta
    print(f"built {args.output_prefix}: m={meta['m']} N={meta['N']} K={meta['K']} "
          f"sigma={meta['sigma']} in {result.elapsed:.2f}s")
    return 0


def cmd_verify(args) -> int:
    if args.rebuild:
        if not args.input:
            print("error: --rebuild needs --input", file=sys.stderr)
            return 2
        report, _ = audit_build(args.input, args.output_prefix,
                                BuildOptions(with_gsa=args.with_gsa), args.format, args.tmp_dir,
                                args.oracle_cap)
    else:
        strings = None
        if args.input:
            from .ingest import ParsedCollection
            strings = list(ParsedCollection(args.input, args.format))
        report = verify_outputs(args.output_prefix, strings, args.oracle_cap)
    print(report.to_table())
    if args.report:
        report.write_keyvalue(args.report)
    return 0 if report.passed else 1


def parse_range(text: str | None, n: int) -> tuple[int, int]:
    """``"a..b"`` (1-based, inclusive) to a 0-based half-open range."""
    if text is None:
        return 0, n
    try:
        lo_s, hi_s = text.split("..")
        lo, hi = int(lo_s), int(hi_s)
    except ValueError:
        raise OutOfRange(f"bad range {text!r}; expected FROM..TO") from None
    if not 1 <= lo <= hi <= n:
        raise OutOfRange(f"range {lo}..{hi} outside 1..{n}")
    return lo - 1, hi


def cmd_inspect(args) -> int:
    out = load_outputs(args.output_prefix)
    meta = out.meta
    lo, hi = parse_range(args.range, meta["N"])
    em = meta["endmarker"]
    strings = None
    if args.suffixes:
        strings = invert_ebwt(out.ebwt, meta["m"], em)
        if out.gsa is None:
            from .oracle import naive_gsa
            order = naive_gsa(strings, max(meta["N"], DEFAULT_CAP))
        else:
            order = [(int(i), int(t)) for t, i in zip(out.gsa["start"], out.gsa["sid"])]
    header = ["row", "ebwt"] + (["lcp"] if out.lcp is not None else []) \
        + (["gsa"] if out.gsa is not None else []) + (["suffix"] if strings is not None else [])
    print("\t".join(header))
    for r in range(lo, hi):
        row = [str(r + 1), chr(out.ebwt[r])]
        if out.lcp is not None:
            row.append(str(int(out.lcp[r])))
        if out.gsa is not None:
            row.append(f"({int(out.gsa['start'][r])},{int(out.gsa['sid'][r])})")
        if strings is not None:
            i, t = order[r]
            row.append((strings[i][t - 1:] + bytes([em])).decode("latin-1"))
        print("\t".join(row))
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handler = {"build": cmd_build, "verify": cmd_verify, "inspect": cmd_inspect}[args.command]
    try:
        return handler(args)
    except (EbwtLcpError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
