import os
import sys
from unittest import TestCase

import numpy as np
import torch

sys.path.insert(0, os.path.abspath(os.path.join(__file__, "..", "..", "source")))

from entities.image import ChannelLayout, Image
from imaging.color import chroma, luma, rgb_to_ycbcr, ycbcr_to_rgb
from imaging.filters import reflect_pad, sobel, ssim
from imaging.histogram import histogram256, quantize
from utils.exceptions import InvalidChannelError, ShapeMismatchError


class TestImage(TestCase):
    def test_layouts(self) -> None:
        with self.subTest("from gray array"):
            image = Image.from_array(np.zeros((4, 5)))
            self.assertIs(image.channels, ChannelLayout.GRAY1)
            self.assertEqual(image.shape, (4, 5))

        with self.subTest("tensor roundtrip"):
            data = np.random.default_rng(0).uniform(size=(3, 4, 3))
            image = Image.from_array(data)
            self.assertTrue(np.array_equal(Image.from_tensor(image.to_tensor(torch.float64)).data, data))

        with self.subTest("two channels rejected"):
            with self.assertRaises(InvalidChannelError):
                Image.from_array(np.zeros((2, 2, 2)))

        with self.subTest("non finite rejected"):
            with self.assertRaises(ValueError):
                Image.from_array(np.full((2, 2), np.nan))


class TestColor(TestCase):
    def test_ycbcr(self) -> None:
        rgb = torch.rand(2, 3, 5, 6, dtype=torch.float64, generator=torch.Generator().manual_seed(1))

        with self.subTest("roundtrip"):
            self.assertTrue(torch.allclose(ycbcr_to_rgb(rgb_to_ycbcr(rgb)), rgb, atol=1e-9))

        with self.subTest("gray has neutral chroma"):
            gray = torch.full((3, 2, 2), 0.4, dtype=torch.float64)
            self.assertTrue(torch.allclose(chroma(gray), torch.full((2, 2, 2), 0.5, dtype=torch.float64)))

        with self.subTest("white luma"):
            self.assertAlmostEqual(float(luma(torch.ones(3, 1, 1, dtype=torch.float64))), 1.0, places=9)

        with self.subTest("single channel passes through luma"):
            ir = torch.rand(1, 1, 3, 3)
            self.assertIs(luma(ir), ir)

        with self.subTest("wrong channel count"):
            with self.assertRaises(InvalidChannelError):
                rgb_to_ycbcr(torch.zeros(2, 4, 4))
            with self.assertRaises(InvalidChannelError):
                luma(torch.zeros(2, 4, 4))


class TestFilters(TestCase):
    def test_reflect_pad(self) -> None:
        row = torch.arange(3, dtype=torch.float64).view(1, 1, 1, 3).expand(1, 1, 2, 3)

        with self.subTest("small pad"):
            padded = reflect_pad(row, 0, 0, 1, 1)
            self.assertEqual(padded[0, 0, 0].tolist(), [1.0, 0.0, 1.0, 2.0, 1.0])

        with self.subTest("pad larger than frame"):
            padded = reflect_pad(row, 0, 0, 0, 5)
            self.assertEqual(padded[0, 0, 0].tolist(), [0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0])

        with self.subTest("single pixel frame"):
            padded = reflect_pad(torch.ones(1, 1, 1, 1), 2, 2, 2, 2)
            self.assertEqual(tuple(padded.shape), (1, 1, 5, 5))

    def test_sobel(self) -> None:
        ramp = torch.arange(6, dtype=torch.float64).view(1, 1, 1, 6).expand(1, 1, 6, 6)
        gradients = sobel(ramp)

        with self.subTest("interior horizontal response"):
            self.assertTrue(torch.allclose(gradients.gx[..., 1:-1], torch.full((1, 1, 6, 4), 8.0, dtype=torch.float64)))

        with self.subTest("no vertical response"):
            self.assertTrue(torch.equal(gradients.gy, torch.zeros_like(gradients.gy)))

        with self.subTest("diagonal ramp strength"):
            steps = torch.arange(6, dtype=torch.float64)
            diagonal = (steps[:, None] + steps).view(1, 1, 6, 6)
            strength = sobel(diagonal).magnitude()[..., 1:-1, 1:-1]
            self.assertTrue(torch.allclose(strength, torch.full_like(strength, 8.0 * 2 ** 0.5)))

        with self.subTest("multi channel rejected"):
            with self.assertRaises(InvalidChannelError):
                sobel(torch.zeros(1, 3, 4, 4))

    def test_ssim(self) -> None:
        generator = torch.Generator().manual_seed(2)
        a = torch.rand(1, 1, 16, 16, dtype=torch.float64, generator=generator)
        b = torch.rand(1, 1, 16, 16, dtype=torch.float64, generator=generator)

        with self.subTest("identical"):
            self.assertAlmostEqual(float(ssim(a, a)), 1.0, places=12)

        with self.subTest("different below one"):
            self.assertLess(float(ssim(a, b)), 0.5)

        with self.subTest("symmetric"):
            self.assertAlmostEqual(float(ssim(a, b)), float(ssim(b, a)), places=12)

        with self.subTest("per sample reduction"):
            batch = torch.cat([a, b])
            values = ssim(batch, torch.cat([a, a]), reduction="none")
            self.assertEqual(tuple(values.shape), (2,))
            self.assertAlmostEqual(float(values[0]), 1.0, places=12)

        with self.subTest("shape mismatch"):
            with self.assertRaises(ShapeMismatchError):
                ssim(a, a[..., :8])

        with self.subTest("gradient matches finite differences"):
            fused = a[..., :8, :8].clone().requires_grad_(True)
            reference = b[..., :8, :8]
            self.assertTrue(torch.autograd.gradcheck(lambda x: ssim(x, reference), (fused,), eps=1e-6, atol=1e-5))


class TestHistogram(TestCase):
    def test_histogram(self) -> None:
        with self.subTest("bin edges"):
            self.assertEqual(quantize(np.array([0.0, 1 / 256, 0.999, 1.0])).tolist(), [0, 1, 255, 255])

        with self.subTest("uniform image fills every bin once"):
            values = (np.arange(256) + 0.5) / 256
            counts = histogram256(Image.from_array(values.reshape(16, 16)))
            self.assertTrue(np.array_equal(counts, np.ones(256, dtype=np.int64)))
