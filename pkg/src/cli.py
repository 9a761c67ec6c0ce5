"""CLI interface: train, attack, sweep, spectrum.

Usage:
    python src/cli.py train --config config/desk.json --mode adversarial
    python src/cli.py sweep --config config/desk.json --checkpoint CKPT --kind merge
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from rich.table import Table

from src.engine.errors import ConfigError, FreqlensError
from src.main import CommandResult, cmd_attack, cmd_spectrum, cmd_sweep, cmd_train
from src.utils.config import load_run_config
from src.utils.logger import console, get_logger

logger = get_logger()

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="freqlens", description="Frequency-domain adversarial example lab")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, required=True, help="JSON run document")
    common.add_argument("--seed", type=int, help="override the master seed")
    common.add_argument("--threads", type=int, help="worker threads (fallback: FREQLENS_THREADS)")
    common.add_argument("--out", type=Path, help="override output_dir")
    common.add_argument("--subset", type=int, help="evaluation subset size")

    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", parents=[common], help="train a model and write its checkpoint")
    p_train.add_argument("--mode", choices=["standard", "adversarial"], help="training mode")

    p_attack = sub.add_parser("attack", parents=[common], help="generate adversarial sets")
    p_attack.add_argument("--checkpoint", type=Path, required=True)

    p_sweep = sub.add_parser("sweep", parents=[common], help="bandwidth or frequency-swap sweeps")
    p_sweep.add_argument("--checkpoint", type=Path, required=True)
    p_sweep.add_argument("--kind", choices=["filter", "merge"], default="filter")

    p_spectrum = sub.add_parser("spectrum", parents=[common], help="log-amplitude spectrum difference maps")
    p_spectrum.add_argument("--std", type=Path, required=True, help="standard-model checkpoint")
    p_spectrum.add_argument("--adv", type=Path, help="adversarially trained checkpoint (optional)")
    return parser


def print_result(result: CommandResult) -> None:
    table = Table(title=f"freqlens {result.command}")
    table.add_column("metric")
    table.add_column("value", justify="right")
    for key, value in result.summary.items():
        table.add_row(key, f"{value:.4f}" if isinstance(value, float) else str(value))
    console.print(table)
    for path in result.outputs:
        console.print(str(path))


def run(args: argparse.Namespace) -> CommandResult:
    overrides = {"seed": args.seed, "threads": args.threads, "output_dir": args.out, "subset": args.subset}
    cfg = load_run_config(args.config, overrides)

    if args.command == "train":
        return cmd_train(cfg, mode=args.mode)
    if args.command == "attack":
        return cmd_attack(cfg, args.checkpoint)
    if args.command == "sweep":
        return cmd_sweep(cfg, args.checkpoint, kind=args.kind)
    return cmd_spectrum(cfg, args.std, args.adv)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = run(args)
    except ConfigError as e:
        logger.error(str(e))
        return EXIT_CONFIG
    except (FreqlensError, OSError, ValueError) as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_RUNTIME
    print_result(result)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
