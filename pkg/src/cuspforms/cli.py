"""Command line entry point: ``cuspforms`` / ``python3 -m cuspforms``.

Exit status is 0 when every requested check passes, 1 when a check fails
and 2 for an invalid configuration.
"""

from __future__ import annotations

import argparse
import json
import sys

from .group import MODELS
from .pipeline import CHECKS, FORMATS, PipelineConfig, emit_report, run_pipeline


def _poly(s: str) -> list[int]:
    try:
        return [int(x) for x in s.replace(" ", "").split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers c0,c1,..., got {s!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cuspforms",
        description="Build a cusp form from an elliptic bump and verify it on the Lie algebra and the group.",
    )
    ap.add_argument("--config", metavar="PATH", help="JSON file with pipeline settings; flags override it")
    ap.add_argument("--p", type=int, help="prime (default 3)")
    ap.add_argument("--n", type=int, help="matrix size (default 2)")
    ap.add_argument("--model", choices=MODELS, help="group chart (default exp)")
    ap.add_argument("--poly", type=_poly, metavar="C0,C1,...",
                    help="torus polynomial coefficients, low degree first; the leading 1 may be omitted")
    ap.add_argument("--depth", type=int, help="bump depth c (default 1)")
    ap.add_argument("--window-pad", type=int, dest="window_pad", help="extend the bump window below 0")
    ap.add_argument("--val-lambda", type=int, dest="val_lambda", help="valuation of the scaling (default: threshold)")
    ap.add_argument("--precision", type=int, help="working p-adic precision W")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--check", choices=CHECKS)
    ap.add_argument("--report", choices=FORMATS)
    ap.add_argument("--outside-samples", type=int, dest="outside_samples")
    ap.add_argument("--conjugations", type=int)
    ap.add_argument("--bch-samples", type=int, dest="bch_samples")
    ap.add_argument("--timings", action="store_true", default=None, help="record per-stage wall time")
    ap.add_argument("--dump-functions", metavar="PATH", dest="dump_functions",
                    help="write phi, phi_hat, phi_lambda and the group function as JSON")
    ap.add_argument("--output", "-o", metavar="PATH", help="write the report here instead of stdout")
    return ap


def config_from_args(args: argparse.Namespace) -> PipelineConfig:
    base = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
    cfg = PipelineConfig.from_json(base)
    for name in ("p", "n", "model", "poly", "depth", "window_pad", "val_lambda", "precision", "seed",
                 "check", "report", "outside_samples", "conjugations", "bch_samples", "timings"):
        v = getattr(args, name)
        if v is not None:
            setattr(cfg, name, v)
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        cfg.validate()
    except (OSError, ValueError, TypeError) as exc:
        print(f"cuspforms: invalid configuration: {exc}", file=sys.stderr)
        return 2
    report = run_pipeline(cfg, keep_functions=bool(args.dump_functions))
    if args.dump_functions:
        with open(args.dump_functions, "w") as fh:
            json.dump(report.functions, fh, sort_keys=True, indent=2)
            fh.write("\n")
        report.functions = None
    out = emit_report(report, cfg.report)
    if args.output:
        with open(args.output, "wb") as fh:
            fh.write(out)
    else:
        sys.stdout.buffer.write(out)
        sys.stdout.flush()
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
