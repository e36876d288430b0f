"""Command-line entry point.

Exit codes: 0 on full success, 2 when some samples were skipped after
failures.  Set ATTNSEG_LOG=DEBUG|INFO|WARNING|ERROR for verbosity.
"""

import argparse
import logging
import os
import sys

from attnseg.pipeline import PipelineConfig, run_pipeline


def build_parser() -> argparse.ArgumentParser:
    d = PipelineConfig()
    p = argparse.ArgumentParser(
        prog="attnseg",
        description="Segment noun phrases from serialized attention tensors and evaluate Average Recall.",
    )
    p.add_argument("--manifest", required=True, help="sample manifest JSON, or a batch index with a 'samples' list")
    p.add_argument("--out", required=True, help="output directory for masks, report, and config echo")
    p.add_argument("--beta", type=float, default=d.beta, help="anchor threshold (default %(default)s)")
    p.add_argument("--alpha", type=float, default=d.alpha, help="binarization threshold (default %(default)s)")
    p.add_argument("--tau", type=float, default=d.tau, help="candidate match threshold (default %(default)s)")
    p.add_argument("--epsilon", type=float, default=d.epsilon, help="match-score smoothing (default %(default)s)")
    p.add_argument("--no-smr", action="store_true", help="disable candidate-mask refinement")
    p.add_argument("--no-lsp", action="store_true", help="cross-attention-only baseline (skip self-attention enhancement)")
    p.add_argument("--aggregator", choices=("subject_focused", "average", "multiplication"), default=d.aggregator)
    p.add_argument("--fusion-stage", choices=("cross", "enhanced"), default=d.fusion_stage)
    p.add_argument("--workers", type=int, default=d.workers)
    p.add_argument("--overlays", action="store_true", help="also render overlay images")
    p.add_argument("--grid-step", type=float, default=d.grid_step, help="IoU threshold grid step (default %(default)s)")
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("ATTNSEG_LOG", "WARNING").upper())
    args = build_parser().parse_args(argv)
    config = PipelineConfig(
        beta=args.beta,
        alpha=args.alpha,
        tau=args.tau,
        epsilon=args.epsilon,
        smr_enabled=not args.no_smr,
        lsp_enabled=not args.no_lsp,
        aggregator=args.aggregator,
        fusion_stage=args.fusion_stage,
        workers=args.workers,
        grid_step=args.grid_step,
    )
    report, failures = run_pipeline(args.manifest, config, args.out, overlays=args.overlays)
    if report is not None:
        print(report.to_table())
    if failures:
        print(f"{len(failures)} sample(s) skipped after errors; see failures.json", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
