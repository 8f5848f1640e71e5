"""Command-line entry points: train, evaluate, analyze-interruptions."""

from __future__ import annotations

import argparse
import glob
import json
import sys
from dataclasses import replace
from pathlib import Path

from .analysis import analyze_interruptions, write_histogram_csv
from .config import load_config
from .runner import rollout_episodes, run_training


def _cmd_train(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, master_seed=int(args.seed))
    metrics = run_training(cfg, out_dir=args.out)
    print(json.dumps({"rows": len(metrics.rows), "final_success_rate": metrics.final_success_rate()}))
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    ckpt = Path(args.checkpoint)
    cfg = load_config(ckpt / "config.json")
    rate = rollout_episodes(cfg, ckpt, episodes=args.episodes, trace_path=args.traces)
    print(json.dumps({"episodes": args.episodes, "success_rate": rate}))
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    paths = sorted(glob.glob(args.traces))
    if not paths:
        print(f"no trace files match {args.traces!r}", file=sys.stderr)
        return 1
    result = analyze_interruptions(paths, window=args.window)
    write_histogram_csv(result, args.out)
    print(
        json.dumps(
            {
                "paired_interruptions": len(result.records),
                "orphan_interruptions": result.orphan_interruptions,
                "beyond_window": result.overflow,
                "fraction_within_100": result.fraction_within(100),
            }
        )
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eat-hrl", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run one training configuration")
    p_train.add_argument("--config", required=True, help="path to a JSON experiment config")
    p_train.add_argument("--seed", type=int, default=None, help="override the config's master seed")
    p_train.add_argument("--out", required=True, help="output directory for metrics/traces/checkpoints")
    p_train.set_defaults(func=_cmd_train)

    p_eval = sub.add_parser("evaluate", help="evaluate a saved checkpoint")
    p_eval.add_argument("--checkpoint", required=True, help="training output directory")
    p_eval.add_argument("--episodes", type=int, required=True)
    p_eval.add_argument("--traces", default=None, help="optional path for evaluation trace output")
    p_eval.set_defaults(func=_cmd_evaluate)

    p_an = sub.add_parser("analyze-interruptions", help="histogram interruption delays from traces")
    p_an.add_argument("--traces", required=True, help="glob over trace JSONL files")
    p_an.add_argument("--window", type=int, required=True, help="histogram truncation in steps")
    p_an.add_argument("--out", required=True, help="output CSV path")
    p_an.set_defaults(func=_cmd_analyze)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
