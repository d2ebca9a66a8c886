"""Command-line entry point for the experiment pipeline.

Each subcommand runs one pipeline stage against the output directory;
`run` chains them all. Stages read their predecessors' files, so the
pipeline can be resumed or partially rerun. Exit code is 0 on success and
1 on failure, with the failing stage named on stderr.
"""

from __future__ import annotations

import argparse
import sys

from . import pipeline
from .config import ConfigError, ExperimentConfig, load_config

_STAGE_FUNCTIONS = {
    "scene-gen": pipeline.stage_scene_gen,
    "survey": pipeline.stage_survey,
    "complete": pipeline.stage_complete,
    "recommend": pipeline.stage_recommend,
    "evaluate": pipeline.stage_evaluate,
    "plot": pipeline.stage_plot,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beamrec",
        description="position-aided mmWave beam recommendation experiments",
    )
    parser.add_argument("--config", metavar="PATH",
                        help="experiment config file (defaults: full scale)")
    parser.add_argument("--seed", type=int, metavar="N",
                        help="override the scene and survey seeds")
    parser.add_argument("--out", metavar="DIR",
                        help="output directory (overrides [run] out_dir)")
    parser.add_argument("--workers", type=int, metavar="N",
                        help="worker threads for slice completion")
    parser.add_argument("--plot", action="store_true",
                        help="also render figures (run subcommand only)")
    parser.add_argument("command",
                        choices=list(_STAGE_FUNCTIONS) + ["run"],
                        help="pipeline stage to execute")
    return parser


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if args.workers is not None:
        from dataclasses import replace
        cfg = replace(cfg, workers=args.workers)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args)
    except (ConfigError, OSError) as exc:
        print(f"beamrec: config error: {exc}", file=sys.stderr)
        return 2
    out_dir = args.out if args.out is not None else cfg.out_dir

    try:
        if args.command == "run":
            written = pipeline.run(cfg, out_dir, plot=args.plot)
        else:
            written = _STAGE_FUNCTIONS[args.command](cfg, out_dir)
    except pipeline.StageError as exc:
        print(f"beamrec: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"beamrec: stage {args.command!r} failed: {exc}",
              file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
