import io
import os
import sys
import tempfile
from contextlib import redirect_stdout
from pathlib import Path
from unittest import TestCase
from unittest.mock import MagicMock

sys.path.insert(0, os.path.abspath(os.path.join(__file__, "..", "..", "source")))

from controller import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, Controller
from main import build_parser, main
from utils.exceptions import DatasetError, NumericalFailure, UsageError

TINY_OVERRIDES = [
    "teacher_net.base_channels=4", "teacher_net.depths=1,1,1,1", "teacher_net.heads=1,1,1,1",
    "teacher_net.window=2", "teacher_net.text_dim=8",
    "student_net.base_channels=2", "student_net.depths=1,1,1,1", "student_net.heads=1,1,1,1",
    "student_net.window=2", "student_net.text_dim=8",
    "training.steps=1", "training.batch_size=1", "training.patch_size=16", "training.progress_bar=false",
    "logging.level=WARNING",
]


def run(*argv: str) -> tuple[int, str]:
    arguments = list(argv)
    for override in TINY_OVERRIDES:
        arguments += ["--set", override]
    output = io.StringIO()
    with redirect_stdout(output):
        code = main(arguments)
    return code, output.getvalue()


class TestController(TestCase):
    def setUp(self) -> None:
        self.controller = Controller(config=MagicMock(), context=MagicMock())

    def test_exit_codes(self) -> None:
        args = build_parser().parse_args(["fuse", "--ckpt", "a", "--vis", "b", "--ir", "c", "--out", "d"])

        with self.subTest("success"):
            self.controller._commands["fuse"] = MagicMock(return_value=None)
            self.assertEqual(self.controller.run(args), EXIT_OK)
            self.controller._commands["fuse"].assert_called_once_with(args)

        with self.subTest("numerical failure"):
            self.controller._commands["fuse"] = MagicMock(side_effect=NumericalFailure("nan"))
            self.assertEqual(self.controller.run(args), EXIT_NUMERICAL)

        with self.subTest("usage and data errors"):
            for error in (UsageError("usage"), DatasetError("data")):
                self.controller._commands["fuse"] = MagicMock(side_effect=error)
                self.assertEqual(self.controller.run(args), EXIT_USAGE)

    def test_prepare_out_dir(self) -> None:
        with tempfile.TemporaryDirectory() as directory:
            out = Path(directory) / "out"

            with self.subTest("fresh"):
                self.assertTrue(self.controller._prepare_out_dir(out, force=False).is_dir())

            with self.subTest("empty directory is reused"):
                self.controller._prepare_out_dir(out, force=False)

            with self.subTest("nonempty without force"):
                (out / "file").write_text("x", encoding="utf-8")
                with self.assertRaises(UsageError):
                    self.controller._prepare_out_dir(out, force=False)

            with self.subTest("force clears"):
                self.controller._prepare_out_dir(out, force=True)
                self.assertEqual(list(out.iterdir()), [])


class TestCommandLine(TestCase):
    def test_pipeline(self) -> None:
        with tempfile.TemporaryDirectory() as directory:
            root = Path(directory)
            data = root / "data"
            teacher_ckpt = root / "teacher" / "teacher.ckpt"
            student_ckpt = root / "student" / "distill.ckpt"

            with self.subTest("make-synth"):
                code, output = run("make-synth", "--out", str(data), "--procedural", "2", "--size", "48")
                self.assertEqual(code, EXIT_OK)
                self.assertIn("4 records", output)
                self.assertTrue((data / "manifest.jsonl").is_file())
                self.assertTrue((data / "embeddings.tsv").is_file())

            with self.subTest("make-synth refuses a nonempty directory"):
                code, _ = run("make-synth", "--out", str(data), "--procedural", "2", "--size", "48")
                self.assertEqual(code, EXIT_USAGE)

            with self.subTest("make-synth needs a source"):
                code, _ = run("make-synth", "--out", str(root / "nothing"))
                self.assertEqual(code, EXIT_USAGE)

            with self.subTest("train-teacher"):
                code, _ = run("train-teacher", "--data", str(data), "--out", str(teacher_ckpt.parent))
                self.assertEqual(code, EXIT_OK)
                self.assertTrue(teacher_ckpt.is_file())

            with self.subTest("distill needs a teacher"):
                code, _ = run("distill", "--data", str(data), "--out", str(student_ckpt.parent))
                self.assertEqual(code, EXIT_USAGE)

            with self.subTest("distill"):
                code, _ = run("distill", "--data", str(data), "--out", str(student_ckpt.parent),
                              "--teacher", str(teacher_ckpt))
                self.assertEqual(code, EXIT_OK)
                self.assertTrue(student_ckpt.is_file())

            vis = next((data / "vis").iterdir())
            ir = data / "ir" / vis.name
            fused = root / "fused.png"

            with self.subTest("fuse with a teacher needs a category"):
                code, _ = run("fuse", "--ckpt", str(teacher_ckpt), "--vis", str(vis), "--ir", str(ir),
                              "--out", str(fused))
                self.assertEqual(code, EXIT_USAGE)

            with self.subTest("fuse"):
                code, output = run("fuse", "--ckpt", str(student_ckpt), "--vis", str(vis), "--ir", str(ir),
                                   "--out", str(fused))
                self.assertEqual(code, EXIT_OK)
                self.assertTrue(fused.is_file())
                self.assertIn("| Load | Forward | Save | Total |", output)

            with self.subTest("fuse refuses to overwrite"):
                code, _ = run("fuse", "--ckpt", str(student_ckpt), "--vis", str(vis), "--ir", str(ir),
                              "--out", str(fused), "--category", "noise")
                self.assertEqual(code, EXIT_USAGE)

            with self.subTest("eval of the visible copy"):
                report = root / "oracle"
                code, output = run("eval", "--data", str(data), "--out", str(report), "--oracle-copy-vis")
                self.assertEqual(code, EXIT_OK)
                rows = (report / "metrics.csv").read_bytes().split(b"\r\n")
                self.assertTrue(rows[0].startswith(b"id,en,mi,sf,vif,qabf,ssim_sum"))
                self.assertTrue(rows[-2].startswith(b"mean,"))
                self.assertIn("copy-vis", output)

            with self.subTest("eval of the student"):
                report = root / "student_report"
                code, _ = run("eval", "--data", str(data), "--ckpt", str(student_ckpt), "--out", str(report),
                              "--layout", "medical")
                self.assertEqual(code, EXIT_OK)
                self.assertIn("| Method | SSIM | VIF | Q^AB/F | MI | EN |",
                              (report / "metrics.md").read_text(encoding="utf-8"))

            with self.subTest("eval needs a checkpoint"):
                code, _ = run("eval", "--data", str(data), "--out", str(root / "none"))
                self.assertEqual(code, EXIT_USAGE)

            with self.subTest("bench"):
                code, output = run("bench", "--teacher-ckpt", str(teacher_ckpt), "--student-ckpt", str(student_ckpt),
                                   "--n", "1", "--data", str(data), "--out", str(root / "bench"))
                self.assertEqual(code, EXIT_OK)
                self.assertIn("Parameters: teacher", output)
                self.assertTrue((root / "bench" / "bench.md").is_file())

            with self.subTest("bench needs runs"):
                code, _ = run("bench", "--teacher-ckpt", str(teacher_ckpt), "--student-ckpt", str(student_ckpt),
                              "--n", "0")
                self.assertEqual(code, EXIT_USAGE)

    def test_invalid_configuration(self) -> None:
        with self.subTest("unknown key"):
            self.assertEqual(main(["make-synth", "--out", "unused", "--set", "training.speed=3"]), EXIT_USAGE)

        with self.subTest("invalid value"):
            self.assertEqual(main(["make-synth", "--out", "unused", "--set", "training.steps=many"]), EXIT_USAGE)
