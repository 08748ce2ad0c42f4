"""Entry point of the ``parsac`` command."""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Sequence

from parallel_consensus import __version__
from parallel_consensus.cli.commands import COMMANDS
from parallel_consensus.config import Config
from parallel_consensus.constants import ALL_TASKS
from parallel_consensus.exceptions import ConsensusError

logger = logging.getLogger(__name__)


def _float_list(value: str) -> list[float]:
    try:
        return [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated numbers, got {value!r}"
        ) from None


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI configuration file")
    common.add_argument("--task", choices=list(ALL_TASKS))
    common.add_argument("--seed", type=int)
    common.add_argument(
        "--threads", type=int, help="worker threads (env PARSAC_THREADS)"
    )
    common.add_argument("--provider", help="uniform, oracle or neural")
    common.add_argument("--weights", help="network weights file")
    common.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    return common


def build_parser() -> argparse.ArgumentParser:
    """The argument parser with one subcommand per entry of ``COMMANDS``."""
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="parsac",
        description="Parallel multi-model robust fitting.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser(
        "generate", parents=[common], help="write synthetic scenes"
    )
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument("--count", type=int, help="number of scenes")
    gen.add_argument("--noise", type=float, help="noise sigma in pixels")
    gen.add_argument("--outlier-rate", type=float)
    gen.add_argument(
        "--manhattan", action="store_const", const=True, default=None
    )
    gen.add_argument("--compress", action="store_true", help="gzip scenes")

    fit = sub.add_parser("fit", parents=[common], help="fit scenes")
    fit.add_argument("scenes", help="manifest, directory or scene file")
    fit.add_argument("--out", required=True, help="results file")
    fit.add_argument(
        "--no-timing",
        action="store_true",
        help="omit timings so equal runs give equal files",
    )

    train = sub.add_parser(
        "train", parents=[common], help="train the weight network"
    )
    train.add_argument("train", help="training scene set")
    train.add_argument("--val", help="validation scene set")
    train.add_argument("--out", required=True, help="checkpoint directory")
    train.add_argument("--epochs", type=int)

    ev = sub.add_parser("eval", parents=[common], help="evaluate results")
    ev.add_argument("results", help="results file")
    ev.add_argument("--scenes", help="re-score against these scenes")
    ev.add_argument(
        "--metrics",
        type=lambda v: [m.strip() for m in v.split(",") if m.strip()],
        help="metrics to require, e.g. me,se",
    )
    ev.add_argument("--cutoffs", type=_float_list, help="AUC cutoffs")
    ev.add_argument(
        "--out", help="report file; recall curves go next to it as CSV"
    )

    grad = sub.add_parser(
        "gradcheck", parents=[common], help="finite-difference checks"
    )
    grad.add_argument("--out", help="report file")

    bench = sub.add_parser(
        "bench", parents=[common], help="time thread counts"
    )
    bench.add_argument("scenes", help="manifest, directory or scene file")
    bench.add_argument("--threads-list", default="1,2,4,8")
    bench.add_argument("--out", help="report file")

    sweep = sub.add_parser(
        "sweep", parents=[common], help="noise and outlier sweep"
    )
    sweep.add_argument("--sigmas", type=_float_list, default=[])
    sweep.add_argument("--rates", type=_float_list, default=[])
    sweep.add_argument(
        "--seeds", type=int, default=10, help="scenes per setting"
    )
    sweep.add_argument("--out", required=True, help="CSV file")
    return parser


def load_config(args: argparse.Namespace) -> Config:
    """The configuration file (or the environment alone) overridden by the
    command-line flags."""
    config = (
        Config.from_file(args.config) if args.config else Config.from_env()
    )
    return config.override(
        task=args.task,
        seed=args.seed,
        threads=args.threads,
        provider=args.provider,
        weights=args.weights,
        scene_count=getattr(args, "count", None),
        noise=getattr(args, "noise", None),
        outlier_rate=getattr(args, "outlier_rate", None),
        manhattan=getattr(args, "manhattan", None),
    )


def main(argv: Sequence[str] | None = None) -> int:
    """Runs one subcommand.

    Returns:
        int: 0 on success, 1 when a gradient check fails, 2 on a usage,
            configuration or data error.
    """
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
        config.configure_logging(args.log_level)
        return COMMANDS[args.command](config, args)
    except (ConsensusError, OSError) as e:
        logger.debug("Command %s failed.", args.command, exc_info=True)
        print(f"parsac {args.command}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
