"""Command-line entry point for the experiment harness."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .experiment import ALL_METHODS, ExperimentConfig, run_experiment
from .model import ModelConfig
from .synth import SCENE_KINDS, SceneSpec
from .trainer import TrainConfig


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="beamgat",
        description="Reconstruct dropped LiDAR beams and benchmark methods.",
    )
    p.add_argument("--input", help="directory of KITTI velodyne .bin frames")
    p.add_argument("--synthetic", choices=SCENE_KINDS, default=None,
                   help="synthetic scene kind (default when no --input: sinusoid)")
    p.add_argument("--k", default="10", help="comma-separated neighbor counts")
    p.add_argument("--methods", default=",".join(ALL_METHODS),
                   help=f"comma-separated subset of {','.join(ALL_METHODS)}")
    p.add_argument("--frames", type=int, default=1, help="frame limit")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="runs", help="output directory")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--sample-target", type=int, default=50000)
    p.add_argument("--dropout-nth", type=int, default=4)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-timing", action="store_true",
                   help="zero the time columns for byte-stable CSVs")
    p.add_argument("--config", help="JSON config file; flags override its entries")
    return p


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    base: dict = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
    synthetic = args.synthetic or base.get("synthetic")
    if args.input is None and synthetic is None:
        synthetic = "sinusoid"
    cfg = ExperimentConfig(
        input_dir=args.input or base.get("input"),
        synthetic=synthetic,
        frame_limit=args.frames if args.frames != 1 else base.get("frames", 1),
        sample_target=args.sample_target,
        dropout_nth=args.dropout_nth,
        k_list=tuple(int(v) for v in args.k.split(",")),
        methods=tuple(args.methods.split(",")),
        model=ModelConfig(**base.get("model", {})),
        train=dataclasses.replace(TrainConfig(**base.get("train", {})),
                                  epochs=args.epochs, seed=args.seed),
        scene=SceneSpec(**base.get("scene", {})),
        seed=args.seed,
        out_dir=args.out,
        workers=args.workers,
        timing=not args.no_timing,
    )
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        reports = run_experiment(cfg)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {len(reports)} report rows to {cfg.out_dir}/reports.csv")
    return 0


if __name__ == "__main__":
    sys.exit(main())
