import os
import sys
import tempfile
from pathlib import Path
from unittest import TestCase

sys.path.insert(0, os.path.abspath(os.path.join(__file__, "..", "..", "source")))

from initer import Initer, RunConfig
from network.net_config import FusionMode, NetConfig
from utils.config_parsing import list_config_keys, load_config, merge_overrides, parse_override
from utils.exceptions import ConfigError


class TestConfigParsing(TestCase):
    def test_merge_overrides(self) -> None:
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "config.ini"
            path.write_text("[training]\nsteps = 10\n[optimizer]\nlr = 0.001\n", encoding="utf-8")

            with self.subTest("every section present, logging level filled in"):
                parser = merge_overrides(Initer.Config)
                self.assertEqual(parser.sections(), [
                    "logging", "teacher_net", "student_net", "optimizer", "training", "loss_weights",
                    "text_prior", "degradation",
                ])
                self.assertEqual(parser.get("logging", "level"), "INFO")

            with self.subTest("overrides win, last one counts"):
                parser = merge_overrides(Initer.Config, path, ["training.steps=20", "training.steps=30"])
                self.assertEqual(parser.get("training", "steps"), "30")
                self.assertEqual(parser.get("optimizer", "lr"), "0.001")

            with self.subTest("explicit logging level kept"):
                parser = merge_overrides(Initer.Config, overrides=["logging.level=DEBUG"])
                self.assertEqual(parser.get("logging", "level"), "DEBUG")

            with self.subTest("unknown key names the valid keys"):
                with self.assertRaises(ConfigError) as context:
                    merge_overrides(Initer.Config, path, ["training.speed=3"])
                self.assertIn("training.speed", str(context.exception))
                for key in list_config_keys(Initer.Config):
                    self.assertIn(key, str(context.exception))

            with self.subTest("unknown section"):
                with self.assertRaises(ConfigError):
                    merge_overrides(Initer.Config, overrides=["scheduler.warmup=3"])

            with self.subTest("malformed override"):
                with self.assertRaises(ConfigError):
                    parse_override("rate=3")

            with self.subTest("missing file"):
                with self.assertRaises(ConfigError):
                    merge_overrides(Initer.Config, Path(directory) / "absent.ini")

            with self.subTest("malformed file"):
                path.write_text("steps = 1\n", encoding="utf-8")
                with self.assertRaises(ConfigError):
                    merge_overrides(Initer.Config, path)

    def test_project_config(self) -> None:
        with self.subTest("defaults"):
            config = load_config(Initer.Config)
            self.assertEqual(config.teacher, NetConfig.teacher())
            self.assertEqual(config.student, NetConfig.student())
            self.assertEqual(config.logging.level, "INFO")

        with self.subTest("network sections"):
            config = load_config(Initer.Config, overrides=["student_net.depths=1,1,1,1", "teacher_net.window=4"])
            self.assertEqual(config.teacher, NetConfig.teacher(window=4))
            self.assertEqual(config.student, NetConfig.student(depths=(1, 1, 1, 1)))
            self.assertIs(type(config.teacher), NetConfig)

        with self.subTest("fusion mode"):
            config = load_config(Initer.Config, overrides=["student_net.fusion_mode=multiscale"])
            self.assertIs(config.student.fusion_mode, FusionMode.MULTISCALE)

        with self.subTest("invalid network layout"):
            with self.assertRaises(ConfigError):
                load_config(Initer.Config, overrides=["student_net.heads=1,2"])

        with self.subTest("seed flag applied last"):
            run_config = RunConfig(command="train-teacher", overrides=["training.seed=1"], seed=5)
            config = load_config(Initer.Config, overrides=run_config.effective_overrides)
            self.assertEqual(config.training.seed, 5)

        with self.subTest("loss weights"):
            config = load_config(Initer.Config, overrides=["loss_weights.alpha=1,0,1"])
            self.assertEqual(config.loss_weights.alpha, (1.0, 0.0, 1.0))

        with self.subTest("bad value"):
            with self.assertRaises(ConfigError):
                load_config(Initer.Config, overrides=["optimizer.lr=fast"])
