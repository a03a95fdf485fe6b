"""Command-line entry point: ``cocolearn {run,sweep,cover,check-bounds}``."""

from __future__ import annotations

import argparse
import sys

from . import reporting
from .exceptions import CocoError
from .geometry import build_cover, parse_set
from .harness import run, sweep


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _report(checks, out):
    for c in checks:
        verdict = "PASS" if c.passed else "FAIL"
        print(f"{verdict} {c.name}: {c.lhs:.6g} <= {c.rhs:.6g}", file=out)
    return 0 if all(c.passed for c in checks) else 1


def cmd_run(args):
    config = reporting.load_config(args.config)
    if args.output:
        config = config.replace(output=args.output)
    record = run(config)
    paths = reporting.emit(record)
    print(f"regret={record.regret:.6g} ccv={record.ccv:.6g} comparator={record.comparator}")
    for kind, path in sorted(paths.items()):
        print(f"wrote {kind}: {path}")
    return _report(record.checks, sys.stdout)


def cmd_sweep(args):
    config = reporting.load_config(args.config)
    rows, summary = sweep(config, _floats(args.betas), _ints(args.seeds) if args.seeds else None)
    paths = reporting.emit_sweep(rows, summary, args.output or (f"{config.output}_sweep" if config.output else "sweep"))
    for s in summary:
        print(f"beta={s['beta']:g} regret={s['regret']:.6g} ccv={s['ccv']:.6g} (n={s['n_seeds']})")
    for kind, path in sorted(paths.items()):
        print(f"wrote {kind}: {path}")
    failed = [r for r in rows if not r.passed]
    for r in failed:
        print(f"FAIL beta={r.beta:g} seed={r.seed}: bound checks failed")
    return 1 if failed else 0


def cmd_cover(args):
    cover = build_cover(parse_set(args.set), args.delta, args.max_centers)
    text = reporting.cover_csv(cover)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
        print(f"wrote {len(cover)} centers to {args.output}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_check(args):
    return _report(reporting.check_record(args.record), sys.stdout)


def build_parser():
    parser = argparse.ArgumentParser(prog="cocolearn", description="Online learning with adversarial constraints.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute one configured run and write its artifacts")
    p.add_argument("--config", required=True)
    p.add_argument("--output", help="output path stem (overrides the config)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a beta sweep and write a summary table")
    p.add_argument("--config", required=True)
    p.add_argument("--betas", required=True, help="comma-separated, e.g. 0.6,0.7,0.8,0.9")
    p.add_argument("--seeds", help="comma-separated seeds (default: the config seed)")
    p.add_argument("--output", help="output path stem")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("cover", help="print a delta-cover as CSV")
    p.add_argument("--set", required=True, help="box:lo,..:hi,.. | ball:c,..:r | simplex:n")
    p.add_argument("--delta", required=True, type=float)
    p.add_argument("--max-centers", type=int, default=10**7)
    p.add_argument("--output")
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("check-bounds", help="re-verify the bound checks of a summary JSON")
    p.add_argument("--record", required=True)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CocoError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
