import json
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path
from unittest import TestCase

import numpy as np
import torch

sys.path.insert(0, os.path.abspath(os.path.join(__file__, "..", "..", "source")))

from datasets.patch_sampler import draw_batch
from datasets.synthetic_generator import make_synthetic, procedural_pairs
from entities.checkpoint import Stage
from entities.image import Image
from entities.loss_weights import LossWeights
from entities.text_embedding import TextEmbedding
from entities.train_config import OptimizerConfig, TrainConfig, TrainingConfig
from network.net_config import NetConfig
from outer_resources.checkpoint_files import load_checkpoint
from outer_resources.embedding_files import save_embeddings
from text_priors.embedding_providers import PRECOMPUTED_SIGNATURE_PREFIX, STUB_SIGNATURE, stub_encode
from text_priors.text_prior import TextPrior
from trainers.abstract_stage_trainer import NAN_DUMP_FILE_NAME, TRAINING_LOG_FILE_NAME, AbstractStageTrainer
from trainers.distillation_trainer import DistillationTrainer, distill_student
from trainers.fusion_runner import TEXT_PRIOR_METADATA_KEY, FusionRunner, fuse_image, network_from_checkpoint
from trainers.teacher_trainer import TeacherTrainer, train_teacher
from utils.exceptions import CheckpointFormatError, ConfigError, NumericalFailure, TextPriorError

LAYOUT = dict(depths=(1, 1, 1, 1), heads=(1, 1, 1, 1), window=2, text_dim=8)
TEACHER_NET = NetConfig(base_channels=4, with_text=True, **LAYOUT)
STUDENT_NET = NetConfig(base_channels=2, with_text=False, **LAYOUT)
TRAINING = TrainingConfig(steps=2, batch_size=2, patch_size=16, seed=1, checkpoint_interval=1, log_interval=1,
                          progress_bar=False)


class TrainerTestCase(TestCase):
    def setUp(self) -> None:
        self.directory = tempfile.TemporaryDirectory()
        self.root = Path(self.directory.name)
        self.manifest = make_synthetic(procedural_pairs(2, seed=0, size=16), self.root / "data",
                                       ["low_light", "noise"], seed=0)
        self.text_prior = TextPrior(TextPrior.Config(), text_dim=8)

    def tearDown(self) -> None:
        self.directory.cleanup()

    def context(self, name: str) -> AbstractStageTrainer.Context:
        return AbstractStageTrainer.Context(text_prior=self.text_prior, run_dir=self.root / name)

    def teacher_config(self, **training) -> TrainConfig:
        return TrainConfig(stage=Stage.TEACHER, net=TEACHER_NET, optimizer=OptimizerConfig(lr=1e-3),
                           training=replace(TRAINING, **training))

    def student_config(self, alpha: tuple[float, ...] = (1.0, 1.0, 1.0), **training) -> TrainConfig:
        return TrainConfig(stage=Stage.DISTILL, net=STUDENT_NET, optimizer=OptimizerConfig(lr=1e-3),
                           training=replace(TRAINING, **training), loss_weights=LossWeights(alpha=alpha))

    def train_teacher(self, name: str = "teacher", seed: int = 0, **training):
        torch.manual_seed(seed)
        return train_teacher(self.teacher_config(**training), self.manifest, self.context(name))


class TestTrainConfig(TestCase):
    def test_stage_network_consistency(self) -> None:
        with self.subTest("teacher needs text"):
            with self.assertRaises(ConfigError):
                TrainConfig(stage=Stage.TEACHER, net=STUDENT_NET)

        with self.subTest("student must be text free"):
            with self.assertRaises(ConfigError):
                TrainConfig(stage=Stage.DISTILL, net=TEACHER_NET)

        with self.subTest("invalid optimizer"):
            with self.assertRaises(ConfigError):
                OptimizerConfig(lr=0.0)


class TestTeacherTrainer(TrainerTestCase):
    def test_zero_steps_keeps_initial_weights(self) -> None:
        torch.manual_seed(0)
        trainer = TeacherTrainer(self.teacher_config(steps=0), self.context("zero"))
        initial = {name: tensor.clone() for name, tensor in trainer.network.state_dict().items()}
        checkpoint = trainer.train(self.manifest)

        self.assertEqual(checkpoint.step, 0)
        for name, tensor in initial.items():
            self.assertTrue(np.array_equal(checkpoint.tensors[name], tensor.numpy()), name)

    def test_training_run(self) -> None:
        checkpoint = self.train_teacher()
        run_dir = self.root / "teacher"

        with self.subTest("checkpoints"):
            self.assertEqual(checkpoint.step, 2)
            self.assertTrue((run_dir / "teacher_step000001.ckpt").is_file())
            self.assertEqual(load_checkpoint(run_dir / "teacher.ckpt").step, 2)

        with self.subTest("training log"):
            lines = (run_dir / TRAINING_LOG_FILE_NAME).read_text(encoding="utf-8").splitlines()
            self.assertEqual(lines[0], "step,stage,l_int,l_ssim,l_grad,l_color,l_feat,l_res,total,lr")
            self.assertEqual(len(lines), 3)
            self.assertTrue(lines[1].startswith("1,teacher,"))

        with self.subTest("deterministic"):
            again = self.train_teacher("teacher_again")
            for name, tensor in checkpoint.network_tensors().items():
                self.assertTrue(np.array_equal(again.tensors[name], tensor), name)

        with self.subTest("weights moved"):
            torch.manual_seed(0)
            initial = TeacherTrainer(self.teacher_config(), self.context("initial")).network.state_dict()
            self.assertFalse(np.array_equal(checkpoint.tensors["output.weight"], initial["output.weight"].numpy()))

    def test_resume_matches_uninterrupted_run(self) -> None:
        straight = self.train_teacher("straight")
        interrupted = load_checkpoint(self.root / "straight" / "teacher_step000001.ckpt")

        torch.manual_seed(123)
        trainer = TeacherTrainer(self.teacher_config(), self.context("resumed"))
        trainer.resume(interrupted)
        self.assertEqual(trainer.start_step, 1)
        resumed = trainer.train(self.manifest)

        for name, tensor in straight.network_tensors().items():
            self.assertTrue(np.allclose(resumed.tensors[name], tensor, atol=1e-6), name)

    def test_resume_rejects_other_stage_or_layout(self) -> None:
        teacher = self.train_teacher(steps=1)

        with self.subTest("other stage"):
            trainer = DistillationTrainer(self.student_config(steps=1), self.context("distill"), teacher)
            with self.assertRaises(CheckpointFormatError):
                trainer.resume(teacher)

        with self.subTest("other layout"):
            wider = TrainConfig(stage=Stage.TEACHER, net=replace(TEACHER_NET, base_channels=8), training=TRAINING)
            with self.assertRaises(CheckpointFormatError):
                TeacherTrainer(wider, self.context("wider")).resume(teacher)

    def test_non_finite_loss(self) -> None:
        trainer = TeacherTrainer(self.teacher_config(), self.context("nan"))
        parameter = trainer.network.output.bias
        trainer.compute_loss = lambda batch: (parameter.sum() * float("nan"), {"l_int": float("nan")})

        with self.assertRaises(NumericalFailure):
            trainer.train(self.manifest)
        dump = json.loads((self.root / "nan" / NAN_DUMP_FILE_NAME).read_text(encoding="utf-8"))
        self.assertEqual(dump["step"], 0)
        self.assertEqual(len(dump["ids"]), 2)


class TestDistillationTrainer(TrainerTestCase):
    def setUp(self) -> None:
        super().setUp()
        self.teacher = self.train_teacher(steps=1)

    def test_distillation_run(self) -> None:
        torch.manual_seed(0)
        checkpoint = distill_student(self.student_config(), self.teacher, self.manifest, self.context("student"))

        with self.subTest("student checkpoint"):
            self.assertIs(checkpoint.stage, Stage.DISTILL)
            self.assertEqual(checkpoint.net_config, STUDENT_NET)
            self.assertEqual(checkpoint.metadata["teacher_net_config"], TEACHER_NET.as_dict())
            self.assertTrue(any(name.startswith("projector.") for name in checkpoint.tensors))

        with self.subTest("student runs without text"):
            network = network_from_checkpoint(checkpoint)
            self.assertIsNone(network.modulations)

        with self.subTest("log carries distillation terms"):
            row = (self.root / "student" / TRAINING_LOG_FILE_NAME).read_text(encoding="utf-8").splitlines()[1]
            self.assertTrue(all(cell != "" for cell in row.split(",")))

    def test_teacher_stays_frozen(self) -> None:
        trainer = DistillationTrainer(self.student_config(), self.context("frozen"), self.teacher)
        before = {name: tensor.clone() for name, tensor in trainer.teacher.state_dict().items()}
        trainer.train(self.manifest)

        self.assertFalse(any(parameter.requires_grad for parameter in trainer.teacher.parameters()))
        for name, tensor in trainer.teacher.state_dict().items():
            self.assertTrue(torch.equal(before[name], tensor), name)

    def test_alpha_selects_gradient_paths(self) -> None:
        pairs = DistillationTrainer(self.student_config(), self.context("pairs"), self.teacher).load_pairs(
            self.manifest)
        batch = draw_batch(pairs, 2, 16, 0, 0)

        with self.subTest("output term only"):
            trainer = DistillationTrainer(self.student_config(alpha=(0.0, 0.0, 1.0)), self.context("res"),
                                          self.teacher)
            total, components = trainer.compute_loss(batch)
            total.backward()
            self.assertAlmostEqual(float(total), components["l_res"], places=5)
            for parameter in trainer.projector.parameters():
                self.assertTrue(parameter.grad is None or not parameter.grad.any())

        with self.subTest("feature term only"):
            trainer = DistillationTrainer(self.student_config(alpha=(0.0, 1.0, 0.0)), self.context("feat"),
                                          self.teacher)
            total, components = trainer.compute_loss(batch)
            total.backward()
            self.assertAlmostEqual(float(total), components["l_feat"], places=5)
            self.assertTrue(trainer.network.output.weight.grad is None or not trainer.network.output.weight.grad.any())
            self.assertTrue(any(parameter.grad is not None and parameter.grad.any()
                                for parameter in trainer.projector.parameters()))

    def test_rejects_student_checkpoint_as_teacher(self) -> None:
        student = distill_student(self.student_config(steps=0), self.teacher, self.manifest, self.context("s0"))
        with self.assertRaises(ConfigError):
            DistillationTrainer(self.student_config(), self.context("bad"), student)


class TestFusionRunner(TrainerTestCase):
    def test_fuse_image(self) -> None:
        teacher = self.train_teacher(steps=0)
        network = network_from_checkpoint(teacher)
        rng = np.random.default_rng(0)
        vis = Image.from_array(rng.uniform(size=(100, 132, 3)).astype(np.float32))
        ir = Image.from_array(rng.uniform(size=(100, 132)).astype(np.float32))

        with self.subTest("odd size keeps its shape"):
            fused = fuse_image(network, vis, ir, "low_light", self.text_prior)
            self.assertEqual(fused.shape, (100, 132))
            self.assertGreaterEqual(float(fused.data.min()), 0.0)
            self.assertLessEqual(float(fused.data.max()), 1.0)

        with self.subTest("category required"):
            with self.assertRaises(ConfigError):
                fuse_image(network, vis, ir)

        with self.subTest("timed runner"):
            runner = FusionRunner("teacher", teacher, FusionRunner.Context(self.text_prior))
            record = self.manifest.records[0]
            loaded_vis, loaded_ir = runner.load_pair(record.vis_path, record.ir_path)
            runner.fuse(loaded_vis, loaded_ir, "noise")
            runner.fuse(loaded_vis, loaded_ir, "noise", record=False)
            self.assertEqual((len(runner.timings.data_load), len(runner.timings.text), len(runner.timings.fusion)),
                             (1, 1, 1))
            with self.assertRaises(ConfigError):
                runner.fuse(loaded_vis, loaded_ir)

    def test_text_prior_must_match(self) -> None:
        teacher = self.train_teacher(steps=0)
        embedding_file = self.root / "embeddings.tsv"
        save_embeddings(embedding_file, [
            TextEmbedding(vector=stub_encode(f"other {category}", 8).vector, category=category)
            for category in ("clean", "low_light", "noise")
        ])
        other_prior = TextPrior(TextPrior.Config(embedding_file=str(embedding_file)), text_dim=8)

        with self.subTest("teacher records its provider"):
            self.assertEqual(teacher.metadata[TEXT_PRIOR_METADATA_KEY], STUB_SIGNATURE)
            saved = load_checkpoint(self.root / "teacher" / "teacher.ckpt")
            self.assertEqual(saved.metadata[TEXT_PRIOR_METADATA_KEY], STUB_SIGNATURE)

        with self.subTest("precomputed signature follows the file"):
            self.assertTrue(other_prior.signature.startswith(PRECOMPUTED_SIGNATURE_PREFIX))
            reloaded = TextPrior(TextPrior.Config(embedding_file=str(embedding_file)), text_dim=8)
            self.assertEqual(reloaded.signature, other_prior.signature)

        with self.subTest("runner refuses other embeddings"):
            with self.assertRaises(TextPriorError):
                FusionRunner("teacher", teacher, FusionRunner.Context(other_prior))

        with self.subTest("distillation refuses other embeddings"):
            context = AbstractStageTrainer.Context(text_prior=other_prior, run_dir=self.root / "other")
            with self.assertRaises(TextPriorError):
                DistillationTrainer(self.student_config(), context, teacher)

        with self.subTest("unrecorded provider only warns"):
            unrecorded = replace(teacher, metadata={})
            with self.assertLogs("trainers.fusion_runner", level="WARNING"):
                runner = FusionRunner("teacher", unrecorded, FusionRunner.Context(other_prior))
            self.assertTrue(runner.uses_text)

        with self.subTest("text-free student ignores the provider"):
            student = distill_student(self.student_config(steps=0), teacher, self.manifest, self.context("s0"))
            self.assertNotIn(TEXT_PRIOR_METADATA_KEY, student.metadata)
            self.assertFalse(FusionRunner("student", student, FusionRunner.Context(other_prior)).uses_text)
