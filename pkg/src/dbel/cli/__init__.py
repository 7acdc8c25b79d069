"""Command-line entry point: ``dbel <command> [--config FILE]``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from dbel.cli.config import RunConfig, build_config, load_config
from dbel.cli.dataset import DatasetIndex, Record, ingest_dataset, split_dataset, split_sizes
from dbel.cli.persist import load_model, save_model
from dbel.errors import ConfigError, DataError, DbelError, FormatError, LoadError, NumericError

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_DATA, EXIT_DIVERGENCE = 0, 1, 2, 3, 4

__all__ = [
    "DatasetIndex", "Record", "RunConfig", "build_config", "ingest_dataset", "load_config",
    "load_model", "main", "save_model", "split_dataset", "split_sizes",
]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", type=Path, help="key = value run configuration file")
    common.add_argument("--work-dir", type=Path, help="override the configured work_dir")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    parser = argparse.ArgumentParser(prog="dbel", description="Wavelet-enhanced malaria cell screening pipeline.")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    p = sub.add_parser("enhance", parents=[common], help="DWT-enhance a class-folder dataset")
    p.add_argument("input", nargs="?", type=Path, help="raw dataset root (default: data_dir)")
    p.add_argument("output", nargs="?", type=Path, help="output root (default: enhanced_dir)")
    sub.add_parser("train", parents=[common], help="split the enhanced set and train the network")
    sub.add_parser("features", parents=[common], help="write penultimate features per split as CSV")
    sub.add_parser("train-ensemble", parents=[common], help="fit SVM, MLP and AdaBoost on train features")
    for name, text in (("evaluate", "metrics JSON plus ROC / PR CSV"), ("pca", "top-3 PCA projection CSV")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--split", choices=("train", "val", "test"), default="test")
    p = sub.add_parser("predict", parents=[common], help="label images; CSV on standard output")
    p.add_argument("paths", nargs="+", type=Path, help="image files or directories")
    p.add_argument("--enhanced", action="store_true", help="inputs are already enhanced")
    return parser


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else build_config({}, Path.cwd())
    if args.work_dir is not None:
        cfg = replace(cfg, work_dir=args.work_dir)
    return cfg


def run(args) -> int:
    from dbel.cli import commands

    cfg = _config(args)
    if args.command == "enhance":
        return commands.cmd_enhance(cfg, args.input, args.output)
    if args.command == "train":
        return commands.cmd_train(cfg)
    if args.command == "features":
        return commands.cmd_features(cfg)
    if args.command == "train-ensemble":
        return commands.cmd_train_ensemble(cfg)
    if args.command == "evaluate":
        return commands.cmd_evaluate(cfg, args.split)
    if args.command == "pca":
        return commands.cmd_pca(cfg, args.split)
    if args.command == "predict":
        return commands.cmd_predict(cfg, args.paths, args.enhanced)
    raise ConfigError(f"unknown command {args.command!r}")


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_USAGE
    if isinstance(exc, NumericError):
        return EXIT_DIVERGENCE
    if isinstance(exc, (DataError, FormatError, LoadError, OSError)):
        return EXIT_DATA
    return EXIT_ERROR


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return run(args)
    except (DbelError, OSError) as exc:
        print(f"dbel: error: {exc}", file=sys.stderr)
        return exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
