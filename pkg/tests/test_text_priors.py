import os
import sys
import tempfile
from pathlib import Path
from unittest import TestCase

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(__file__, "..", "..", "source")))

from entities.loss_weights import LossWeights, WeightFactors, WeightTable
from outer_resources.embedding_files import load_embeddings, save_embeddings
from outer_resources.weight_table_files import load_weight_table
from text_priors.embedding_providers import PrecomputedEmbeddingProvider, StubEmbeddingProvider, stub_encode
from text_priors.text_prior import TextPrior
from text_priors.weight_resolver import DEFAULT_WEIGHT_TABLE, resolve_weights
from utils.exceptions import TextPriorError


class TestStubEncode(TestCase):
    def test_stub_encode(self) -> None:
        with self.subTest("deterministic"):
            self.assertTrue(np.array_equal(stub_encode("low_light").vector, stub_encode("low_light").vector))

        with self.subTest("unit norm"):
            self.assertAlmostEqual(float(np.linalg.norm(stub_encode("noise").vector)), 1.0, places=6)

        with self.subTest("categories are far apart"):
            cosine = float(np.dot(stub_encode("low_light").vector, stub_encode("noise").vector))
            self.assertLess(cosine, 0.5)

        with self.subTest("dimension"):
            self.assertEqual(stub_encode("blur", 16).text_dim, 16)

        with self.subTest("empty category"):
            with self.assertRaises(TextPriorError):
                stub_encode("")

    def test_providers(self) -> None:
        with self.subTest("stub provider caches"):
            provider = StubEmbeddingProvider(8)
            self.assertIs(provider.embed("noise"), provider.embed("noise"))

        with self.subTest("precomputed provider"):
            provider = PrecomputedEmbeddingProvider({"noise": stub_encode("noise", 8)}, 8)
            self.assertEqual(provider.embed("noise").category, "noise")
            with self.assertRaises(TextPriorError):
                provider.embed("blur")

        with self.subTest("precomputed dimension check"):
            with self.assertRaises(TextPriorError):
                PrecomputedEmbeddingProvider({"noise": stub_encode("noise", 8)}, 16)


class TestEmbeddingFiles(TestCase):
    def test_embedding_files(self) -> None:
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "embeddings.tsv"

            with self.subTest("roundtrip is bit exact"):
                embeddings = [stub_encode("low_light"), stub_encode("noise")]
                save_embeddings(path, embeddings)
                loaded = load_embeddings(path, 512)
                self.assertEqual(sorted(loaded), ["low_light", "noise"])
                for embedding in embeddings:
                    self.assertTrue(np.array_equal(loaded[embedding.category].vector, embedding.vector))

            with self.subTest("comments and blank lines"):
                path.write_text("# header\n\nclean\t1.0,0.0\n", encoding="utf-8")
                self.assertEqual(list(load_embeddings(path, 2)), ["clean"])

            with self.subTest("dimension mismatch"):
                save_embeddings(path, [stub_encode("noise", 256)])
                with self.assertRaises(TextPriorError):
                    load_embeddings(path, 512)

            with self.subTest("malformed"):
                path.write_text("clean 1.0,0.0\n", encoding="utf-8")
                with self.assertRaises(TextPriorError):
                    load_embeddings(path, 2)
                path.write_text("clean\t1.0,zero\n", encoding="utf-8")
                with self.assertRaises(TextPriorError):
                    load_embeddings(path, 2)

            with self.subTest("duplicate category"):
                path.write_text("clean\t1.0,0.0\nclean\t0.0,1.0\n", encoding="utf-8")
                with self.assertRaises(TextPriorError):
                    load_embeddings(path, 2)

            with self.subTest("missing file"):
                with self.assertRaises(TextPriorError):
                    load_embeddings(Path(directory) / "absent.tsv")


class TestWeightResolution(TestCase):
    def test_resolve_weights(self) -> None:
        base = LossWeights()

        with self.subTest("clean keeps base"):
            self.assertEqual(resolve_weights("clean", base), base)

        with self.subTest("unknown category keeps base"):
            custom = LossWeights(delta_ir=0.7)
            self.assertEqual(resolve_weights("fog", custom), custom)

        with self.subTest("factors multiply lambdas"):
            table = WeightTable({"low_light": WeightFactors(f_int=2.0)})
            resolved = resolve_weights("low_light", base, table)
            self.assertEqual(resolved.lambda_int, 48.0)
            self.assertEqual((resolved.lambda_ssim, resolved.lambda_grad, resolved.lambda_color), (40.0, 48.0, 12.0))

        with self.subTest("noise trusts infrared less"):
            self.assertEqual(resolve_weights("noise", base).delta_ir, 0.5)

        with self.subTest("identity factors are idempotent"):
            once = resolve_weights("blur", base)
            self.assertEqual(resolve_weights("blur", once), once)

        with self.subTest("default table covers every category"):
            self.assertEqual(sorted(DEFAULT_WEIGHT_TABLE.category_to_factors),
                             ["blur", "clean", "low_contrast", "low_light", "noise"])

    def test_weight_table_file(self) -> None:
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "weights.tsv"

            with self.subTest("valid"):
                path.write_text("# category\tf_int\tf_ssim\tf_grad\tf_color\tdelta_ir\n"
                                "low_light\t2\t1\t1\t1\t1\n", encoding="utf-8")
                table = load_weight_table(path)
                self.assertEqual(table.factors_for("low_light").f_int, 2.0)
                self.assertEqual(table.factors_for("other"), WeightFactors())

            with self.subTest("wrong column count"):
                path.write_text("low_light\t2\t1\n", encoding="utf-8")
                with self.assertRaises(TextPriorError):
                    load_weight_table(path)

            with self.subTest("nonpositive factor"):
                path.write_text("low_light\t0\t1\t1\t1\t1\n", encoding="utf-8")
                with self.assertRaises(TextPriorError):
                    load_weight_table(path)


class TestTextPrior(TestCase):
    def test_text_prior(self) -> None:
        with self.subTest("stub by default"):
            prior = TextPrior(TextPrior.Config(), text_dim=8)
            batch = prior.embed_batch(["noise", "low_light", "noise"])
            self.assertEqual(tuple(batch.shape), (3, 8))
            self.assertTrue(np.array_equal(batch[0].numpy(), batch[2].numpy()))
            self.assertEqual(prior.weights_for("noise", LossWeights()).delta_ir, 0.5)

        with self.subTest("files"):
            with tempfile.TemporaryDirectory() as directory:
                embedding_file = Path(directory) / "embeddings.tsv"
                weight_file = Path(directory) / "weights.tsv"
                save_embeddings(embedding_file, [stub_encode("fog", 4)])
                weight_file.write_text("fog\t1\t3\t1\t1\t0.25\n", encoding="utf-8")
                prior = TextPrior(TextPrior.Config(str(embedding_file), str(weight_file)), text_dim=4)
                self.assertEqual(prior.embed("fog").category, "fog")
                weights = prior.weights_for("fog", LossWeights())
                self.assertEqual((weights.lambda_ssim, weights.delta_ir), (120.0, 0.25))
                with self.assertRaises(TextPriorError):
                    prior.embed("noise")
