"""Controller module."""
import argparse
import logging
import shutil
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Callable

from datasets.dataset_scanner import load_sample, open_dataset
from datasets.synthetic_generator import make_synthetic, procedural_pairs, source_pairs
from entities.checkpoint import Checkpoint, Stage
from entities.image import Image
from entities.metric_report import MetricReport
from entities.sample_pair import CLEAN_CATEGORY, Split
from entities.train_config import TrainConfig
from metrics.fusion_metrics import evaluate_pair
from network.fusion_network import count_params
from outer_resources.checkpoint_files import load_checkpoint
from outer_resources.embedding_files import save_embeddings
from outer_resources.image_files import save_image
from outer_resources.report_files import (
    ReportLayout,
    TimingRow,
    render_metrics_markdown,
    render_timing_markdown,
    write_metrics_csv,
)
from text_priors.embedding_providers import stub_encode
from text_priors.text_prior import TextPrior
from trainers.abstract_stage_trainer import AbstractStageTrainer
from trainers.distillation_trainer import distill_student
from trainers.fusion_runner import FusionRunner
from trainers.teacher_trainer import train_teacher
from utils.exceptions import DistillFuseError, NumericalFailure, UsageError
from utils.timing import measure_ms, summarize_ms

if TYPE_CHECKING:
    from initer import Initer

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

EMBEDDINGS_FILE_NAME = "embeddings.tsv"
METRICS_CSV_FILE_NAME = "metrics.csv"
METRICS_MARKDOWN_FILE_NAME = "metrics.md"
BENCH_FILE_NAME = "bench.md"
BENCH_SCENE_SIZE = 128


class Controller:
    """Run CLI commands over the initialized components."""

    @dataclass
    class Context:
        """context."""

        text_prior: TextPrior

    def __init__(self, config: "Initer.Config", context: Context) -> None:
        """init."""
        self.config = config
        self.context = context
        self._commands: dict[str, Callable[[argparse.Namespace], None]] = {
            "make-synth": self.cmd_make_synth,
            "train-teacher": self.cmd_train_teacher,
            "distill": self.cmd_distill,
            "fuse": self.cmd_fuse,
            "eval": self.cmd_eval,
            "bench": self.cmd_bench,
        }
        logger.info(f"{type(self).__name__} inited")

    def run(self, args: argparse.Namespace) -> int:
        """Execute a command and map its failure to an exit code."""
        try:
            self._commands[args.command](args)
        except NumericalFailure as e:
            logger.error(f"{args.command} aborted: {repr(e)}")
            return EXIT_NUMERICAL
        except DistillFuseError as e:
            logger.error(f"{args.command} failed: {repr(e)}")
            return EXIT_USAGE
        return EXIT_OK

    def _prepare_out_dir(self, out: Path, force: bool) -> Path:
        """Create the output directory, refusing to reuse a nonempty one without force."""
        if out.exists() and any(out.iterdir()) and not force:
            raise UsageError(f"{out} already exists and is not empty; pass --force to overwrite")
        if out.exists() and force:
            shutil.rmtree(out)
        out.mkdir(parents=True, exist_ok=True)
        return out

    def _train_config(self, stage: Stage) -> TrainConfig:
        """Assemble the stage's training config."""
        return TrainConfig(
            stage=stage,
            net=self.config.teacher if stage is Stage.TEACHER else self.config.student,
            optimizer=self.config.optimizer,
            training=self.config.training,
            loss_weights=self.config.loss_weights,
        )

    def _stage_context(self, out: Path) -> AbstractStageTrainer.Context:
        """Trainer context writing under ``out``."""
        return AbstractStageTrainer.Context(text_prior=self.context.text_prior, run_dir=out)

    def cmd_make_synth(self, args: argparse.Namespace) -> None:
        """Write a degraded dataset with clean guidance and its manifest."""
        categories = [category.strip() for category in args.categories.split(",") if category.strip()]
        if args.src is None and not args.procedural:
            raise UsageError("make-synth needs --src DIR or --procedural N")
        out = self._prepare_out_dir(Path(args.out), args.force)
        seed = self.config.training.seed
        clean_pairs = source_pairs(args.src) if args.src else procedural_pairs(args.procedural, seed, args.size)
        manifest = make_synthetic(clean_pairs, out, categories, seed, self.config.degradation)
        text_dim = self.config.teacher.text_dim
        save_embeddings(out / EMBEDDINGS_FILE_NAME, [
            stub_encode(category, text_dim) for category in sorted({*categories, CLEAN_CATEGORY})
        ])
        print(f"{len(manifest)} records written to {out}")

    def cmd_train_teacher(self, args: argparse.Namespace) -> None:
        """Stage one."""
        manifest = open_dataset(args.data)
        resume_from = load_checkpoint(args.resume) if args.resume else None
        checkpoint = train_teacher(self._train_config(Stage.TEACHER), manifest, self._stage_context(Path(args.out)),
                                   resume_from)
        print(f"Teacher trained to step {checkpoint.step}; checkpoint in {args.out}")

    def cmd_distill(self, args: argparse.Namespace) -> None:
        """Stage two."""
        if not args.teacher:
            raise UsageError("distill needs --teacher CKPT")
        teacher = load_checkpoint(args.teacher)
        manifest = open_dataset(args.data)
        resume_from = load_checkpoint(args.resume) if args.resume else None
        checkpoint = distill_student(self._train_config(Stage.DISTILL), teacher, manifest,
                                     self._stage_context(Path(args.out)), resume_from)
        print(f"Student distilled to step {checkpoint.step}; checkpoint in {args.out}")

    def _runner(self, name: str, checkpoint: Checkpoint) -> FusionRunner:
        """Inference runner sharing the configured text prior."""
        return FusionRunner(name, checkpoint, FusionRunner.Context(text_prior=self.context.text_prior))

    def cmd_fuse(self, args: argparse.Namespace) -> None:
        """Fuse one pair into a PNG and print per-stage timings."""
        out = Path(args.out)
        if out.exists() and not args.force:
            raise UsageError(f"{out} exists; pass --force to overwrite")
        checkpoint = load_checkpoint(args.ckpt)
        if checkpoint.net_config.with_text and not args.category:
            raise UsageError("A teacher checkpoint needs --category")
        runner = self._runner(str(checkpoint.stage), checkpoint)
        timings: dict[str, float] = {}
        with measure_ms(timings, "load"):
            vis, ir = runner.load_pair(args.vis, args.ir)
        with measure_ms(timings, "forward"):
            fused = runner.fuse(vis, ir, args.category)
        with measure_ms(timings, "save"):
            save_image(out, fused)
        print("| Load | Forward | Save | Total |")
        print("|---|---|---|---|")
        print(f"| {timings['load']:.2f} | {timings['forward']:.2f} | {timings['save']:.2f} | "
              f"{sum(timings.values()):.2f} |")

    def cmd_eval(self, args: argparse.Namespace) -> None:
        """Fuse every pair of a dataset and write per-image CSV and mean Markdown reports."""
        manifest = open_dataset(args.data, Split.TEST)
        runner = None
        if not args.oracle_copy_vis:
            if not args.ckpt:
                raise UsageError("eval needs --ckpt unless --oracle-copy-vis is given")
            checkpoint = load_checkpoint(args.ckpt)
            runner = self._runner(str(checkpoint.stage), checkpoint)

        id_to_report: dict[str, MetricReport] = {}
        for record in manifest.records:
            sample = load_sample(record)
            fused = sample.vis if runner is None else runner.fuse(sample.vis, sample.ir, record.category)
            id_to_report[record.id] = evaluate_pair(sample.vis, sample.ir, fused)

        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_metrics_csv(out / METRICS_CSV_FILE_NAME, id_to_report)
        name = "copy-vis" if runner is None else runner.name
        table = render_metrics_markdown({name: MetricReport.mean_of(list(id_to_report.values()))},
                                        ReportLayout(args.layout))
        (out / METRICS_MARKDOWN_FILE_NAME).write_text(table, encoding="utf-8")
        print(table, end="")

    def _bench_inputs(self, data: str | None) -> list[tuple[str, str, str]] | list[tuple[Image, Image, str]]:
        """Benchmark inputs: a dataset's file pairs, or one in-memory procedural scene."""
        if data:
            return [
                (record.vis_path, record.ir_path, record.category)
                for record in open_dataset(data, Split.TEST).records
            ]
        pair = procedural_pairs(1, self.config.training.seed, BENCH_SCENE_SIZE)[0]
        return [(pair.vis, pair.ir, CLEAN_CATEGORY)]

    def cmd_bench(self, args: argparse.Namespace) -> None:
        """Time warm forward passes of teacher and student and compare their sizes."""
        if args.n < 1:
            raise UsageError(f"--n must be at least 1, got {args.n}")
        inputs = self._bench_inputs(args.data)
        rows = []
        name_to_params = {}
        for name, path in (("teacher", args.teacher_ckpt), ("student", args.student_ckpt)):
            checkpoint = load_checkpoint(path)
            runner = self._runner(name, checkpoint)
            for run in range(args.n + 1):
                vis, ir, category = inputs[run % len(inputs)]
                if args.data:
                    vis, ir = runner.load_pair(vis, ir)
                runner.fuse(vis, ir, category, record=run > 0)
            fusion_mean, fusion_median = summarize_ms(runner.timings.fusion)
            load_mean = summarize_ms(runner.timings.data_load[1:])[0]
            text_mean = summarize_ms(runner.timings.text)[0] if runner.uses_text else None
            rows.append(TimingRow(name, load_mean, text_mean, fusion_mean, fusion_median))
            name_to_params[name] = count_params(checkpoint.net_config)

        teacher_params, student_params = name_to_params["teacher"], name_to_params["student"]
        report = "\n".join([
            render_timing_markdown(rows),
            f"Parameters: teacher {teacher_params}, student {student_params}, "
            f"ratio {student_params / teacher_params:.4f}",
            f"Fusion time ratio student/teacher: {rows[1].fusion_ms / rows[0].fusion_ms:.4f}",
        ]) + "\n"
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            (out / BENCH_FILE_NAME).write_text(report, encoding="utf-8")
        print(report, end="")
