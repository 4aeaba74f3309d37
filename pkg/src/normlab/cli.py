"""``normlab`` command line: digits | analyze | verify | report.

Exit status: 0 on success, 1 on I/O failure (missing input, unwritable
output), 2 on usage errors and, for ``verify``, 1 when any claim fails.
Set ``NORMLAB_CACHE_DIR`` to reuse generated digit files between runs.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .analytics import (
    SCHEMA_VERSION,
    block_histogram,
    linear_checkpoints,
    log2_checkpoints,
    normality_deviation,
    ns_ratio_series,
    popcount_series,
    series_from_counts,
)
from .digits import (
    AlternatingSource,
    BitBuffer,
    ChampernowneSource,
    ConstantOnesSource,
    CopelandErdosSource,
    DigitSource,
    NbitsFormatError,
    RationalSource,
    SqrtSource,
    read_bits,
    write_bits,
    write_sidecar,
)
from .harness import CLAIMS, verify_claim

SERIES_KEYS = ("ones", "angle", "norm", "balance", "ns")


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# argument plumbing


def _add_source_args(p: argparse.ArgumentParser, allow_input: bool) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--sqrt", type=int, metavar="M", help="digits of sqrt(M)")
    g.add_argument("--rational", metavar="P/Q", help="digits of P/Q")
    g.add_argument("--champernowne2", action="store_true")
    g.add_argument("--copeland-erdos2", action="store_true")
    g.add_argument("--ones", action="store_true", help="constant 1 stream")
    g.add_argument("--alternating", action="store_true", help="1,0,1,0,...")
    if allow_input:
        g.add_argument("--in", dest="input", metavar="PATH", help=".nbits input file")


def _source_from_args(args) -> DigitSource | None:
    if getattr(args, "input", None):
        return None
    if args.sqrt is not None:
        return SqrtSource(args.sqrt)
    if args.rational is not None:
        try:
            p, q = (int(t) for t in args.rational.split("/"))
        except ValueError:
            raise UsageError(f"--rational expects P/Q, got {args.rational!r}") from None
        return RationalSource(p, q)
    if args.champernowne2:
        return ChampernowneSource()
    if args.copeland_erdos2:
        return CopelandErdosSource()
    if args.ones:
        return ConstantOnesSource()
    return AlternatingSource()


def _cache_path(source: DigitSource) -> Path | None:
    root = os.environ.get("NORMLAB_CACHE_DIR")
    if not root:
        return None
    tag = "-".join(f"{k}{v}" for k, v in sorted(source.params.items()))
    return Path(root) / f"{source.kind}{'-' + tag if tag else ''}.nbits"


def _generate(source: DigitSource, n: int) -> BitBuffer:
    cached = _cache_path(source)
    if cached is not None and cached.exists():
        buf = read_bits(cached)
        if len(buf) >= n:
            return BitBuffer.from_bits(buf.bits()[:n])
    buf = BitBuffer.from_bits(source.read(n))
    if cached is not None:
        cached.parent.mkdir(parents=True, exist_ok=True)
        write_bits(buf, cached)
        write_sidecar(cached, source)
    return buf


def _load_input(args) -> tuple[BitBuffer, dict]:
    source = _source_from_args(args)
    if source is None:
        path = Path(args.input)
        buf = read_bits(path)  # OSError -> exit 1
        meta = {"kind": "file", "parameters": {"path": path.name}}
        sidecar = Path(str(path) + ".json")
        if sidecar.exists():
            info = json.loads(sidecar.read_text())
            meta["generated_from"] = {"kind": info.get("kind"),
                                      "parameters": info.get("parameters")}
        if args.bits is not None:
            if args.bits > len(buf):
                raise UsageError(f"--bits {args.bits} exceeds file length {len(buf)}")
            buf = BitBuffer.from_bits(buf.bits()[: args.bits])
        return buf, meta
    if args.bits is None:
        raise UsageError("--bits is required with a generated source")
    return _generate(source, args.bits), source.describe()


def _parse_int_range(text: str, name: str) -> list[int]:
    """``"1..8"``, ``"2"`` or ``"1,3,5"``."""
    try:
        if ".." in text:
            a, b = text.split("..")
            return list(range(int(a), int(b) + 1))
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"cannot parse {name} {text!r}") from None


def _checkpoints(spec: str, limit: int) -> list[int]:
    if spec == "log2":
        return log2_checkpoints(limit)
    if spec.startswith("linear:"):
        try:
            count = int(spec.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad checkpoint preset {spec!r}") from None
        return linear_checkpoints(limit, count)
    pts = _parse_int_range(spec, "checkpoints")
    if any(p < 1 or p > limit for p in pts) or any(b <= a for a, b in zip(pts, pts[1:])):
        raise UsageError("checkpoints must be strictly increasing within the input length")
    return pts


def _block_ks(spec: str | None, limit: int) -> list[int]:
    if not spec:
        return []
    ks = _parse_int_range(spec, "block lengths")
    for k in ks:
        if not 1 <= k <= 24:
            raise UsageError(f"block length {k} outside [1, 24]")
        if k > limit:
            raise UsageError(f"block length {k} exceeds input length {limit}")
    return ks


# --------------------------------------------------------------------------
# emission


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _to_json(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _to_csv(series: list, histograms: list, deviations: list, extra_rows=()) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["record", "name", "key", "value"])
    for s in series:
        for n, v in s.checkpoints:
            w.writerow(["series", s.statistic, n, repr(v)])
        for row in s.extra.get("proportion_predicted", []):
            w.writerow(["series", "ns_ratio_proportion_predicted", row["n"], repr(row["value"])])
    for h in histograms:
        for k, mode, pattern, count in h.csv_rows():
            w.writerow(["histogram", f"k{k}/{mode}", pattern, count])
    for d in deviations:
        name = f"k{d['k']}/{d['mode']}"
        w.writerow(["deviation", name, "max_abs_dev", repr(d["max_abs_dev"])])
        w.writerow(["deviation", name, "chi_square", repr(d["chi_square"])])
    for row in extra_rows:
        w.writerow(row)
    return buf.getvalue()


def _ns_source(buf: BitBuffer, meta: dict, ns_range: list[int]):
    """A sqrt source matching ``buf`` when the input is known to be sqrt(m).

    Lets the proportion series use the exact real instead of the truncated
    representative. Falls back to ``buf`` if the digits disagree.
    """
    origin = meta.get("generated_from", meta)
    if origin.get("kind") != "sqrt":
        return buf
    try:
        src = SqrtSource(int(origin["parameters"]["m"]))
    except (KeyError, TypeError, ValueError):
        return buf
    top = max(ns_range)
    if not (src.prefix(top) == buf.bits()[:top]).all():
        return buf
    return src


def _series_for(buf: BitBuffer, meta: dict, keys: list[str], checkpoints: list[int],
                ns_range: list[int]) -> list:
    out = []
    popcount_keys = [k for k in keys if k != "ns"]
    if popcount_keys:
        counts = popcount_series(buf, checkpoints)
        derived = series_from_counts(counts, meta)
        out.extend(derived[k] for k in popcount_keys)
    if "ns" in keys:
        ns = ns_ratio_series(_ns_source(buf, meta, ns_range), ns_range)
        ns.source = meta
        out.append(ns)
    return out


# --------------------------------------------------------------------------
# subcommands


def cmd_digits(args) -> int:
    source = _source_from_args(args)
    if args.bits < 1:
        raise UsageError("--bits must be at least 1")
    start = time.perf_counter()
    buf = _generate(source, args.bits)
    elapsed = time.perf_counter() - start
    if args.out:
        write_bits(buf, args.out)
        write_sidecar(args.out, source)
        print(f"wrote {len(buf)} digits to {args.out}")
    else:
        print(buf.to_string())
    rate = len(buf) / elapsed if elapsed > 0 else float("inf")
    print(f"{len(buf)} digits in {elapsed:.3f} s ({rate:,.0f} digits/s)", file=sys.stderr)
    return 0


def cmd_analyze(args) -> int:
    buf, meta = _load_input(args)
    n = len(buf)
    if n < 1:
        raise UsageError("input holds no digits")
    keys = [k.strip() for k in args.series.split(",") if k.strip()] if args.series else []
    unknown = set(keys) - set(SERIES_KEYS)
    if unknown:
        raise UsageError(f"unknown series {sorted(unknown)}; choose from {SERIES_KEYS}")
    ks = _block_ks(args.blocks, n)
    if not keys and not ks:
        raise UsageError("nothing to do: pass --series and/or --blocks")
    checkpoints = _checkpoints(args.checkpoints, n)
    ns_range = [m for m in _parse_int_range(args.ns_range, "ns range") if 1 <= m <= n]

    series = _series_for(buf, meta, keys, checkpoints, ns_range)
    hists = [block_histogram(buf, k, args.mode, threads=args.threads) for k in ks]
    devs = [{"k": h.k, "mode": h.mode, **normality_deviation(h)} for h in hists]

    if args.format == "csv":
        text = _to_csv(series, hists, devs)
    else:
        doc = {
            "schema": SCHEMA_VERSION,
            "source": meta,
            "length": n,
            "series": [s.to_dict() for s in series],
            "histograms": [{**h.to_dict(), "deviation": d} for h, d in zip(hists, devs)],
        }
        text = _to_json(doc)
    _emit(text, args.out)
    return 0


def cmd_verify(args) -> int:
    claims = list(CLAIMS) if args.all else args.claim
    if not claims:
        raise UsageError("pass --all or at least one --claim")
    results = [verify_claim(c, args.nmax, args.trials, args.seed) for c in claims]
    width = max(len(c) for c in claims)
    print(f"{'claim':<{width}}  {'result':<6}  {'instances':>9}  mode")
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.claim:<{width}}  {status:<6}  {r.instances:>9}  {r.mode}")
        for f in r.failures[:5]:
            print(f"    counterexample: {f}")
    if args.json:
        doc = {"schema": SCHEMA_VERSION, "results": [r.to_dict() for r in results]}
        _emit(_to_json(doc), args.json)
    return 0 if all(r.passed for r in results) else 1


def cmd_report(args) -> int:
    buf, meta = _load_input(args)
    n = len(buf)
    checkpoints = _checkpoints(args.checkpoints, n)
    ns_range = [m for m in _parse_int_range(args.ns_range, "ns range") if 1 <= m <= n]
    if not ns_range:
        raise UsageError("ns range has no lengths within the input")
    series = _series_for(buf, meta, list(SERIES_KEYS), checkpoints, ns_range)
    ks = _block_ks(f"1..{min(args.kmax, n)}", n)
    hists = [block_histogram(buf, k, args.mode, threads=args.threads) for k in ks]
    devs = [{"k": h.k, "mode": h.mode, **normality_deviation(h)} for h in hists]

    ns = series[-1]
    ns_summary = {
        "last_n": ns.checkpoints[-1][0],
        "exact_value": ns.checkpoints[-1][1],
        "proportion_predicted": ns.extra["proportion_predicted"][-1]["value"],
        "claimed_limit": 1.0,
        "successive_difference": (
            abs(ns.checkpoints[-1][1] - ns.checkpoints[-2][1]) if len(ns.checkpoints) > 1 else None
        ),
    }
    if args.format == "csv":
        extra = [["ns_summary", "ns_ratio", k, repr(v)] for k, v in ns_summary.items()
                 if v is not None]
        text = _to_csv(series, [], devs, extra)
    else:
        doc = {
            "schema": SCHEMA_VERSION,
            "source": meta,
            "length": n,
            "series": [s.to_dict() for s in series],
            "ns_summary": ns_summary,
            "block_deviations": devs,
        }
        text = _to_json(doc)
    _emit(text, args.out)
    return 0


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="normlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"normlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("digits", help="generate binary digits")
    _add_source_args(p, allow_input=False)
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--out", help="write an .nbits file plus .json sidecar")
    p.set_defaults(func=cmd_digits)

    for name, func, help_ in (("analyze", cmd_analyze, "series and block statistics"),
                              ("report", cmd_report, "full study bundle")):
        p = sub.add_parser(name, help=help_)
        _add_source_args(p, allow_input=True)
        p.add_argument("--bits", type=int, help="digits to use (required for generated sources)")
        p.add_argument("--checkpoints", default="log2",
                       help="log2 | linear:M | explicit list such as 10,100,1000")
        p.add_argument("--ns-range", default="8..256", help="prefix lengths for the ns ratio")
        p.add_argument("--mode", choices=("overlapping", "disjoint"), default="overlapping")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out")
        if name == "analyze":
            p.add_argument("--series", help=f"comma list from {','.join(SERIES_KEYS)}")
            p.add_argument("--blocks", help="block lengths, e.g. 1..8 or 2")
        else:
            p.add_argument("--kmax", type=int, default=12)
        p.set_defaults(func=func)

    p = sub.add_parser("verify", help="check identities at finite n")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--all", action="store_true")
    g.add_argument("--claim", action="append", choices=sorted(CLAIMS))
    p.add_argument("--nmax", type=int, default=12)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", metavar="PATH", help="also write results as JSON")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except NbitsFormatError as exc:
        print(f"normlab: error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError) as exc:
        print(f"normlab: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"normlab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
