"""Command-line tool: build filters from TSV corpora, query them, measure
false-positive rates and run the desk-scale benchmark suite.

All subcommands are deterministic for a fixed --seed (wall-clock timings
aside) and print machine-readable JSON on stdout.  Exit codes: 0 success,
2 argument/input errors, 3 build or filter-file failures.
"""

from __future__ import annotations

import argparse
import json
import math
import random
import sys
import time
from dataclasses import asdict, dataclass, field as dc_field

from . import codec
from .bucketed_filter import BucketParams, BucketedFilter, build_bucketed
from .errors import BuildError, FilterError, FormatError, InputError
from .graph_filter import GraphFilter, GraphParams, build as build_graph
from .hashing import derive_seed
from .keys import as_bytes
from .sparse_filter import SparseParams, build_verified

MAX_GRAPH_N = 10 ** 6
MAX_SPARSE_N = 10 ** 4


def synthetic_corpus(n: int, k: int, seed: int) -> list[tuple[bytes, int]]:
    """Deterministic stand-in corpus: keys key_0..key_{n-1}, uniform values."""
    rng = random.Random(seed)
    limit = 1 << k
    return [(b"key_%d" % i, rng.randrange(limit)) for i in range(n)]


def measure_fp_rate(filt, samples: int, seed: int,
                    exclude: set[bytes] | frozenset[bytes] = frozenset()) -> dict:
    """Query ``samples`` random non-member keys; report the hit rate with its
    binomial sigma.  Candidates colliding with ``exclude`` are rejected and
    redrawn so the rate is strictly the non-member rate."""
    if samples < 1:
        raise InputError(f"samples must be >= 1, got {samples}")
    rng = random.Random(seed)
    hits = 0
    for _ in range(samples):
        while True:
            key = b"fp_%016x" % rng.getrandbits(64)
            if key not in exclude:
                break
        if filt.query(key) is not None:
            hits += 1
    rate = hits / samples
    sigma = math.sqrt(rate * (1.0 - rate) / samples)
    return {"samples": samples, "hits": hits, "rate": rate, "sigma": sigma}


@dataclass
class BenchReport:
    """One benchmark row: build cost, space and measured error for one size."""

    scheme: str
    n: int
    parameters: dict
    build_wall_time: float
    graph_or_hash_retries: float | None
    blocks_used: float | None
    rebuilds: float | None
    serialized_bits: int
    bits_per_key: float | None
    measured_fp_rate: dict

    def to_dict(self) -> dict:
        d = asdict(self)
        fp = d["measured_fp_rate"]
        if fp:
            lo = fp["rate"] - 3 * fp["sigma"]
            hi = fp["rate"] + 3 * fp["sigma"]
            fp["interval_3sigma"] = [max(lo, 0.0), min(hi, 1.0)]
        return d


def _build_for_bench(scheme: str, corpus, args, seed: int):
    if scheme == "graph":
        params = GraphParams(m=args.m, k=args.k, c=args.c)
        filt = build_graph(corpus, params, seed)
        return filt, {"retries": filt.attempts, "blocks": None, "rebuilds": None}
    if scheme == "sparse":
        params = SparseParams(k=args.k, s=args.s, eps=args.eps, m_bits=args.mbits)
        filt = build_verified(corpus, params, seed)
        return filt, {"retries": None, "blocks": filt.r, "rebuilds": filt.rebuilds}
    params = BucketParams(inner=SparseParams(k=args.k, s=args.s, eps=args.eps,
                                             m_bits=args.mbits),
                          c_bucket=args.cbucket, delta=args.delta)
    filt = build_bucketed(corpus, params, seed)
    blocks = max(sub.r for sub in filt.filters)
    rebuilds = sum(sub.rebuilds for sub in filt.filters) / filt.b
    return filt, {"retries": filt.bucket_attempt + 1, "blocks": blocks,
                  "rebuilds": rebuilds}


def _bench_parameters(scheme: str, args, filt) -> dict:
    if scheme == "graph":
        return {"c": str(args.c), "m": args.m, "k": args.k}
    params = {"p": filt.field.p, "q": filt.field.q, "k": args.k, "s": args.s,
              "eps": str(args.eps)}
    if scheme == "bucketed":
        params["buckets"] = filt.b
    return params


def run_bench(scheme: str, sizes: list[int], trials: int, seed: int, args,
              fp_samples: int = 10 ** 5) -> list[BenchReport]:
    """Benchmark one scheme across sizes; per size, one discarded warm-up
    build then ``trials`` timed builds with derived seeds."""
    reports = []
    for size in sizes:
        corpus = synthetic_corpus(size, args.k, derive_seed(seed, size))
        stored = {kb for kb, _ in corpus}
        _build_for_bench(scheme, corpus, args, derive_seed(seed, size, 0))  # warm-up
        times, retries, blocks, rebuilds = [], [], [], []
        filt = None
        for t in range(trials):
            t0 = time.perf_counter()
            filt, stats = _build_for_bench(scheme, corpus, args,
                                           derive_seed(seed, size, t + 1))
            times.append(time.perf_counter() - t0)
            for acc, key in ((retries, "retries"), (blocks, "blocks"),
                             (rebuilds, "rebuilds")):
                if stats[key] is not None:
                    acc.append(stats[key])
        bits = len(codec.encode(filt)) * 8
        fp = measure_fp_rate(filt, fp_samples, derive_seed(seed, size, 999),
                             exclude=stored)
        mean = lambda xs: sum(xs) / len(xs) if xs else None
        reports.append(BenchReport(
            scheme=scheme, n=size,
            parameters=_bench_parameters(scheme, args, filt),
            build_wall_time=mean(times),
            graph_or_hash_retries=mean(retries),
            blocks_used=mean(blocks),
            rebuilds=mean(rebuilds),
            serialized_bits=bits,
            bits_per_key=bits / size if size else None,
            measured_fp_rate=fp))
    return reports


def _add_common_build_flags(sp):
    sp.add_argument("--k", type=int, required=True, help="value bit-width")
    sp.add_argument("--c", default="2.5", help="graph vertex expansion (> 2)")
    sp.add_argument("--m", type=int, default=None,
                    help="graph ring modulus (default 2^(k+8))")
    sp.add_argument("--s", type=int, default=2, help="sparse row weight (>= 2)")
    sp.add_argument("--eps", default="0.05", help="sparse table slack (> 0)")
    sp.add_argument("--mbits", type=int, default=31, help="sparse field bits")
    sp.add_argument("--cbucket", default="4", help="bucket count scale (> 1)")
    sp.add_argument("--delta", default="5", help="bucket size slack (> 2e-1)")
    sp.add_argument("--seed", type=int, default=0, help="master seed")


def _cmd_build(args) -> int:
    with open(args.input, "r", encoding="utf-8") as fh:
        pairs = codec.read_pairs_tsv(fh, args.k)
    if args.m is None:
        args.m = 1 << (args.k + 8)
    if args.scheme == "graph":
        params = GraphParams(m=args.m, k=args.k, c=args.c)
        filt = build_graph(pairs, params, args.seed)
        summary = {"scheme": "graph", "n": filt.n, "table_len": filt.table_len,
                   "m": args.m, "k": args.k, "retries": filt.attempts,
                   "blocks": None, "rebuilds": None}
    elif args.scheme == "sparse":
        params = SparseParams(k=args.k, s=args.s, eps=args.eps, m_bits=args.mbits)
        filt = build_verified(pairs, params, args.seed)
        summary = {"scheme": "sparse", "n": filt.n, "q": filt.field.q,
                   "p": filt.field.p, "k": args.k, "s": args.s,
                   "retries": None, "blocks": filt.r, "rebuilds": filt.rebuilds}
    else:
        params = BucketParams(inner=SparseParams(k=args.k, s=args.s, eps=args.eps,
                                                 m_bits=args.mbits),
                              c_bucket=args.cbucket, delta=args.delta)
        filt = build_bucketed(pairs, params, args.seed)
        summary = {"scheme": "bucketed", "n": filt.n, "buckets": filt.b,
                   "q": filt.field.q, "p": filt.field.p, "k": args.k,
                   "s": args.s, "retries": filt.bucket_attempt + 1,
                   "blocks": max(sub.r for sub in filt.filters),
                   "rebuilds": sum(sub.rebuilds for sub in filt.filters)}
    image = codec.encode(filt)
    with open(args.out, "wb") as fh:
        fh.write(image)
    summary["serialized_bits"] = len(image) * 8
    summary["payload_bits"] = codec.payload_bits(filt)
    summary["out"] = args.out
    print(json.dumps(summary))
    return 0


def _load_filter(path: str):
    try:
        with open(path, "rb") as fh:
            return codec.decode(fh.read())
    except (OSError, FormatError) as exc:
        raise BuildError(f"cannot load filter {path}: {exc}") from exc


def _cmd_query(args) -> int:
    filt = _load_filter(args.filter)
    for line in sys.stdin:
        key = line.rstrip("\n")
        value = filt.query(key)
        print("BOT" if value is None else value)
    return 0


def _cmd_fprate(args) -> int:
    filt = _load_filter(args.filter)
    exclude = frozenset()
    if args.input:
        with open(args.input, "r", encoding="utf-8") as fh:
            exclude = frozenset(kb for kb, _ in codec.read_pairs_tsv(fh, 63))
    print(json.dumps(measure_fp_rate(filt, args.samples, args.seed, exclude)))
    return 0


def _cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s]
    if not sizes or args.trials < 1:
        raise InputError("need at least one size and one trial")
    cap = MAX_GRAPH_N if args.scheme != "sparse" else MAX_SPARSE_N
    over = [s for s in sizes if s > cap]
    if over:
        raise InputError(f"sizes {over} exceed the {args.scheme} budget of {cap}")
    if args.m is None:
        args.m = 1 << (args.k + 8)
    reports = run_bench(args.scheme, sizes, args.trials, args.seed, args,
                        fp_samples=args.fp_samples)
    print(json.dumps([r.to_dict() for r in reports]))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bloomier",
        description="Build and query Bloomier filters (static key -> value "
                    "maps with one-sided error).")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("build", help="build a filter from a TSV corpus")
    sp.add_argument("--scheme", choices=["graph", "sparse", "bucketed"],
                    required=True)
    sp.add_argument("--input", required=True, help="key<TAB>value corpus")
    sp.add_argument("--out", required=True, help="output filter file")
    _add_common_build_flags(sp)
    sp.set_defaults(func=_cmd_build)

    sp = sub.add_parser("query", help="query keys read from stdin")
    sp.add_argument("--filter", required=True, help="filter file")
    sp.set_defaults(func=_cmd_query)

    sp = sub.add_parser("fprate", help="measure the false-positive rate")
    sp.add_argument("--filter", required=True, help="filter file")
    sp.add_argument("--samples", type=int, default=10 ** 5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--input", default=None,
                    help="corpus for exact non-member rejection (optional; "
                         "without it random 64-bit-tagged keys are used)")
    sp.set_defaults(func=_cmd_fprate)

    sp = sub.add_parser("bench", help="benchmark builds across sizes")
    sp.add_argument("--scheme", choices=["graph", "sparse", "bucketed"],
                    required=True)
    sp.add_argument("--sizes", required=True, help="comma-separated key counts")
    sp.add_argument("--trials", type=int, default=5)
    sp.add_argument("--fp-samples", dest="fp_samples", type=int, default=10 ** 5)
    _add_common_build_flags(sp)
    sp.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    try:
        return args.func(args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (BuildError, FilterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())
