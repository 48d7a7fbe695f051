"""Main module."""
import argparse
import logging
import sys
from pathlib import Path

from controller import EXIT_USAGE
from initer import Initer, RunConfig
from outer_resources.report_files import ReportLayout
from utils.exceptions import DistillFuseError

logger = logging.getLogger(__name__)

DEFAULT_CATEGORIES = "low_light,noise"
DEFAULT_BENCH_RUNS = 10


def build_parser() -> argparse.ArgumentParser:
    """Argument surface of every command."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="INI config file (default: built-in defaults)")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override a config key; repeatable, last wins (default: none)")
    common.add_argument("--seed", type=int, default=None, help="overrides training.seed (default: from config)")

    parser = argparse.ArgumentParser(
        prog="distill-fuse", description="Text-prior distillation for infrared and visible image fusion",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def add_command(name: str, help_text: str) -> argparse.ArgumentParser:
        """Subcommand sharing the common flags."""
        return commands.add_parser(name, parents=[common], help=help_text,
                                   formatter_class=argparse.ArgumentDefaultsHelpFormatter)

    make_synth = add_command("make-synth", "write a degraded dataset with clean guidance")
    make_synth.add_argument("--out", required=True, help="dataset directory to create")
    make_synth.add_argument("--src", default=None, help="dataset with clean pairs to degrade")
    make_synth.add_argument("--procedural", type=int, default=0, help="number of procedural scenes when no --src")
    make_synth.add_argument("--categories", default=DEFAULT_CATEGORIES, help="comma-separated degradations")
    make_synth.add_argument("--size", type=int, default=128, help="procedural scene side in pixels")
    make_synth.add_argument("--force", action="store_true", help="replace an existing output directory")

    for name, help_text in (("train-teacher", "stage one: train the text-guided teacher"),
                            ("distill", "stage two: distill the text-free student")):
        command = add_command(name, help_text)
        command.add_argument("--data", required=True, help="training dataset directory")
        command.add_argument("--out", required=True, help="run directory for checkpoints and logs")
        command.add_argument("--resume", default=None, help="checkpoint of this stage to continue from")
        if name == "distill":
            command.add_argument("--teacher", default=None, help="teacher checkpoint")

    fuse = add_command("fuse", "fuse one visible/infrared pair")
    fuse.add_argument("--ckpt", required=True, help="teacher or student checkpoint")
    fuse.add_argument("--vis", required=True, help="visible image file")
    fuse.add_argument("--ir", required=True, help="infrared image file")
    fuse.add_argument("--category", default=None, help="degradation category (teacher only)")
    fuse.add_argument("--out", required=True, help="fused PNG to write")
    fuse.add_argument("--force", action="store_true", help="overwrite an existing output file")

    evaluate = add_command("eval", "fuse a dataset and report fusion metrics")
    evaluate.add_argument("--data", "--dir", dest="data", required=True, help="evaluation dataset directory")
    evaluate.add_argument("--ckpt", default=None, help="checkpoint to evaluate")
    evaluate.add_argument("--out", "--report", dest="out", required=True, help="report directory")
    evaluate.add_argument("--layout", choices=[str(layout) for layout in ReportLayout], default=str(ReportLayout.IVF),
                          help="Markdown column layout")
    evaluate.add_argument("--oracle-copy-vis", action="store_true", help="use the visible image as the fused one")

    bench = add_command("bench", "compare teacher and student inference time and size")
    bench.add_argument("--teacher-ckpt", required=True, help="teacher checkpoint")
    bench.add_argument("--student-ckpt", required=True, help="student checkpoint")
    bench.add_argument("--n", type=int, default=DEFAULT_BENCH_RUNS, help="timed runs per network after one warm-up")
    bench.add_argument("--data", default=None, help="dataset to time on (default: one procedural scene)")
    bench.add_argument("--out", default=None, help="directory for bench.md")
    return parser


def main(argv: list[str] | None = None) -> int:
    """Parse arguments, init components and run the command."""
    args = build_parser().parse_args(argv)
    run_config = RunConfig(
        command=args.command, config_path=args.config, overrides=args.set,
        out=Path(args.out) if getattr(args, "out", None) else None, seed=args.seed,
    )
    try:
        with Initer(run_config) as controller:
            return controller.run(args)
    except DistillFuseError as e:
        logging.basicConfig()
        logger.error(f"Invalid configuration: {repr(e)}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
