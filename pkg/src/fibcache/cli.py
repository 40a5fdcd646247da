"""Command-line driver.

Subcommands:

* ``run``       replay a trace (or generate one on the fly) through the
                engine; writes miss_ratios.csv / occupancy.csv plus the
                rendered figures to --out and a summary to stdout
* ``gen-trace`` write a deterministic skewed trace for a route table
* ``validate``  replay while checking every packet against the linear-scan
                reference and all structural invariants

Exit codes: 0 success, 1 input error, 2 invariant or reference violation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .driver import replay, validate
from .engine import Engine, InvariantViolation, PipelineConfig, SequenceGap
from .report import render_all
from .trie import FibTrie, UnknownRoute
from . import traceio

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VIOLATION = 2


def _add_engine_flags(parser: argparse.ArgumentParser) -> None:
    defaults = PipelineConfig()
    parser.add_argument("--tcam", type=int, default=defaults.tcam_capacity, help="TCAM capacity (entries)")
    parser.add_argument("--sram", type=int, default=defaults.sram_capacity, help="SRAM capacity (entries)")
    parser.add_argument("--victims", type=int, default=defaults.victim_set_size, help="victim set size")
    parser.add_argument("--theta", type=int, default=defaults.promotion_margin, help="promotion margin over the lightest TCAM counter")
    parser.add_argument("--epoch", type=int, default=defaults.aging_epoch, help="counter aging epoch (packets)")
    parser.add_argument("--window", type=int, default=defaults.stats_window, help="stats window (packets)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fibcache", description="Tiered FIB cache simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="replay traffic and write reports")
    run.add_argument("--rib", required=True, help="route table file")
    run.add_argument("--trace", help="destinations file (one dotted quad per line)")
    run.add_argument("--updates", help="route update sidecar file")
    run.add_argument("--zipf-s", type=float, default=None, help="generate a Zipf trace with this skew instead of --trace")
    run.add_argument("--packets", type=int, default=None, help="packet count for the generated trace")
    run.add_argument("--seed", type=int, default=0, help="seed for all generated randomness")
    run.add_argument("--out", default="out", help="directory for CSVs and figures")
    run.add_argument("--check-invariants", action="store_true", help="verify engine invariants while replaying")
    _add_engine_flags(run)

    gen = sub.add_parser("gen-trace", help="write a deterministic skewed trace")
    gen.add_argument("--rib", required=True)
    gen.add_argument("--zipf-s", type=float, default=1.0)
    gen.add_argument("--packets", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output trace file")

    val = sub.add_parser("validate", help="replay against the linear-scan reference")
    val.add_argument("--rib", required=True)
    val.add_argument("--trace", required=True)
    val.add_argument("--updates")
    val.add_argument("--seed", type=int, default=0)
    _add_engine_flags(val)
    return parser


def _load_rib(path: str):
    return traceio.load_rib(path)


def _config(args: argparse.Namespace) -> PipelineConfig:
    return PipelineConfig(
        tcam_capacity=args.tcam,
        sram_capacity=args.sram,
        victim_set_size=args.victims,
        promotion_margin=args.theta,
        aging_epoch=args.epoch,
        stats_window=args.window,
    )


def cmd_run(args: argparse.Namespace) -> int:
    if (args.trace is None) == (args.zipf_s is None):
        print("run: exactly one of --trace or --zipf-s/--packets is required", file=sys.stderr)
        return EXIT_INPUT
    if args.zipf_s is not None and args.packets is None:
        print("run: --zipf-s needs --packets", file=sys.stderr)
        return EXIT_INPUT
    rib = _load_rib(args.rib)
    engine = Engine(FibTrie.build(rib), _config(args), check_invariants=args.check_invariants)
    updates = traceio.load_updates(args.updates) if args.updates else None
    if args.trace is not None:
        packets = traceio.load_trace(args.trace)
    else:
        spec = traceio.ZipfSpec(n_packets=args.packets, s=args.zipf_s, seed=args.seed)
        packets = traceio.packets_from_addresses(traceio.generate_zipf(rib, spec))
    result = replay(engine, packets, updates=updates)
    if result.violations:
        print(f"invariant violation: {result.violations[0]}", file=sys.stderr)
        return EXIT_VIOLATION
    out_dir = Path(args.out)
    engine.sink.write_csv(out_dir)
    render_all(engine.sink, out_dir)
    summary = engine.sink.summary()
    print(f"packets processed     {summary['total_packets']}")
    print(f"dropped               {result.dropped}")
    print(f"tcam miss ratio       {summary['overall_tcam_miss_ratio']:.6f}")
    print(f"sram miss ratio       {summary['overall_sram_miss_ratio']:.6f}")
    occ = summary["final_occupancies"]
    print(f"final occupancy       tcam {occ['tcam']} / {args.tcam}, sram {occ['sram']} / {args.sram}")
    print(f"reports written to    {out_dir}")
    return EXIT_OK


def cmd_gen_trace(args: argparse.Namespace) -> int:
    rib = _load_rib(args.rib)
    spec = traceio.ZipfSpec(n_packets=args.packets, s=args.zipf_s, seed=args.seed)
    dsts = traceio.generate_zipf(rib, spec)
    traceio.dump_trace(dsts, args.out)
    print(f"wrote {len(dsts)} packets to {args.out}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    rib = _load_rib(args.rib)
    engine = Engine(FibTrie.build(rib), _config(args), check_invariants=True)
    updates = traceio.load_updates(args.updates) if args.updates else None
    dsts = np.array([pkt.dst for pkt in traceio.load_trace(args.trace)], dtype=np.uint64)
    result = validate(engine, dsts, updates=updates)
    if result.violations:
        print(f"validation failed: {result.violations[0]}", file=sys.stderr)
        return EXIT_VIOLATION
    print(f"validated {result.packets} packets, 0 violations")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"run": cmd_run, "gen-trace": cmd_gen_trace, "validate": cmd_validate}
    try:
        return handlers[args.command](args)
    except (OSError, ValueError) as exc:
        print(f"fibcache: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InvariantViolation, SequenceGap) as exc:
        print(f"fibcache: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except UnknownRoute as exc:
        print(f"fibcache: withdraw of unknown route {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
