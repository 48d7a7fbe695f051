"""Fusion metrics module.

Every metric works on the BT.601 luma of its inputs. Aggregation over the two sources is fixed here so tables are
reproducible: MI is summed, VIF is averaged, SSIM is summed.
"""
import logging
import math

import numpy as np
import torch
from scipy.signal import convolve2d

from entities.image import Image
from entities.metric_report import MetricReport
from imaging.color import luma
from imaging.filters import sobel, ssim
from imaging.histogram import HISTOGRAM_BINS, histogram256, quantize
from utils.exceptions import MetricError, ShapeMismatchError

logger = logging.getLogger(__name__)

VIF_SCALES = 4
VIF_NOISE_VARIANCE = 2.0
VIF_EPS = 1e-10

QABF_GAMMA_G = 0.9994
QABF_KAPPA_G = -15.0
QABF_SIGMA_G = 0.5
QABF_GAMMA_A = 0.9879
QABF_KAPPA_A = -22.0
QABF_SIGMA_A = 0.8


def _luma_tensor(image: Image) -> torch.Tensor:
    """Float64 1×1×H×W luma tensor."""
    return luma(image.to_tensor(torch.float64))


def _luma_array(image: Image) -> np.ndarray:
    """Float64 H×W luma array."""
    return _luma_tensor(image)[0, 0].numpy()


def _check_same_shape(*images: Image) -> None:
    """Raise ShapeMismatchError unless all images share H×W."""
    shapes = {image.shape for image in images}
    if len(shapes) != 1:
        raise ShapeMismatchError(f"Metric inputs differ in size: {sorted(shapes)}")


def _shannon_entropy(counts: np.ndarray) -> float:
    """Entropy in bits of a count array; empty cells contribute 0."""
    probabilities = counts[counts > 0].astype(np.float64) / counts.sum()
    return float(-np.sum(probabilities * np.log2(probabilities)))


def entropy(image: Image) -> float:
    """Shannon entropy of the 256-bin luma histogram, in bits."""
    return _shannon_entropy(histogram256(_luma_array(image)))


def mutual_information(fused: Image, source: Image) -> float:
    """Mutual information H(f) + H(s) - H(f, s) from the joint 256×256 luma histogram."""
    _check_same_shape(fused, source)
    fused_bins = quantize(_luma_array(fused)).ravel()
    source_bins = quantize(_luma_array(source)).ravel()
    joint = np.bincount(fused_bins * HISTOGRAM_BINS + source_bins, minlength=HISTOGRAM_BINS ** 2)
    fused_counts = np.bincount(fused_bins, minlength=HISTOGRAM_BINS)
    source_counts = np.bincount(source_bins, minlength=HISTOGRAM_BINS)
    return _shannon_entropy(fused_counts) + _shannon_entropy(source_counts) - _shannon_entropy(joint)


def spatial_frequency(image: Image) -> float:
    """sqrt(RF² + CF²) with RF, CF the RMS of horizontal and vertical first differences."""
    values = _luma_array(image)
    row_differences = np.diff(values, axis=1)
    column_differences = np.diff(values, axis=0)
    row_frequency_sq = float(np.mean(row_differences ** 2)) if row_differences.size else 0.0
    column_frequency_sq = float(np.mean(column_differences ** 2)) if column_differences.size else 0.0
    return math.sqrt(row_frequency_sq + column_frequency_sq)


def _vif_window(scale: int) -> np.ndarray:
    """Gaussian window of the given pyramid scale (1-based), MATLAB fspecial style."""
    size = 2 ** (VIF_SCALES - scale + 1) + 1
    sigma = size / 5.0
    radius = (size - 1) / 2.0
    y, x = np.ogrid[-radius:radius + 1, -radius:radius + 1]
    window = np.exp(-(x * x + y * y) / (2.0 * sigma * sigma))
    window[window < np.finfo(window.dtype).eps * window.max()] = 0
    return window / window.sum()


def _vif_single(reference: np.ndarray, distorted: np.ndarray) -> float:
    """Pixel-domain multi-scale VIF of ``distorted`` against ``reference`` (both on the 0..255 range)."""
    numerator = 0.0
    denominator = 0.0
    for scale in range(1, VIF_SCALES + 1):
        window = _vif_window(scale)
        if scale > 1:
            reference = convolve2d(reference, window, mode="valid")[::2, ::2]
            distorted = convolve2d(distorted, window, mode="valid")[::2, ::2]
        if min(reference.shape) < window.shape[0]:
            raise MetricError(f"Image too small for VIF scale {scale}: {reference.shape} < window {window.shape}")

        mu_reference = convolve2d(reference, window, mode="valid")
        mu_distorted = convolve2d(distorted, window, mode="valid")
        sigma_reference_sq = convolve2d(reference * reference, window, mode="valid") - mu_reference ** 2
        sigma_distorted_sq = convolve2d(distorted * distorted, window, mode="valid") - mu_distorted ** 2
        sigma_cross = convolve2d(reference * distorted, window, mode="valid") - mu_reference * mu_distorted

        sigma_reference_sq = np.maximum(sigma_reference_sq, 0.0)
        sigma_distorted_sq = np.maximum(sigma_distorted_sq, 0.0)

        gain = sigma_cross / (sigma_reference_sq + VIF_EPS)
        noise_sq = sigma_distorted_sq - gain * sigma_cross

        flat_reference = sigma_reference_sq < VIF_EPS
        gain[flat_reference] = 0
        noise_sq[flat_reference] = sigma_distorted_sq[flat_reference]
        sigma_reference_sq[flat_reference] = 0

        flat_distorted = sigma_distorted_sq < VIF_EPS
        gain[flat_distorted] = 0
        noise_sq[flat_distorted] = 0

        negative_gain = gain < 0
        noise_sq[negative_gain] = sigma_distorted_sq[negative_gain]
        gain[negative_gain] = 0
        noise_sq = np.maximum(noise_sq, VIF_EPS)

        numerator += float(np.sum(np.log10(1 + gain ** 2 * sigma_reference_sq / (noise_sq + VIF_NOISE_VARIANCE))))
        denominator += float(np.sum(np.log10(1 + sigma_reference_sq / VIF_NOISE_VARIANCE)))

    if denominator == 0.0:
        return 0.0
    return numerator / denominator


def vif(fused: Image, vis: Image, ir: Image) -> float:
    """Mean over both sources of the multi-scale pixel-domain VIF, fused being the distorted signal."""
    _check_same_shape(fused, vis, ir)
    fused_values = _luma_array(fused) * 255.0
    per_source = [_vif_single(_luma_array(source) * 255.0, fused_values) for source in (vis, ir)]
    return float(np.mean(per_source))


def _strength_and_orientation(image: Image) -> tuple[np.ndarray, np.ndarray]:
    """Sobel gradient strength and orientation (π/2 where the horizontal response vanishes)."""
    gradients = sobel(_luma_tensor(image))
    gx = gradients.gx[0, 0].numpy()
    gy = gradients.gy[0, 0].numpy()
    strength = gradients.magnitude()[0, 0].numpy()
    orientation = np.full_like(gx, math.pi / 2)
    nonzero = gx != 0
    orientation[nonzero] = np.arctan(gy[nonzero] / gx[nonzero])
    return strength, orientation


def _edge_preservation(
        source_strength: np.ndarray,
        source_orientation: np.ndarray,
        fused_strength: np.ndarray,
        fused_orientation: np.ndarray,
) -> np.ndarray:
    """Per-pixel edge preservation Q^{XF} of one source."""
    larger = np.maximum(source_strength, fused_strength)
    smaller = np.minimum(source_strength, fused_strength)
    strength_ratio = np.ones_like(larger)
    np.divide(smaller, larger, out=strength_ratio, where=larger > 0)
    orientation_agreement = 1 - np.abs(source_orientation - fused_orientation) / (math.pi / 2)

    strength_term = QABF_GAMMA_G / (1 + np.exp(QABF_KAPPA_G * (strength_ratio - QABF_SIGMA_G)))
    orientation_term = QABF_GAMMA_A / (1 + np.exp(QABF_KAPPA_A * (orientation_agreement - QABF_SIGMA_A)))
    preservation = strength_term * orientation_term
    preservation[fused_strength == 0] = 0.0
    return preservation


def qabf(vis: Image, ir: Image, fused: Image) -> float:
    """Gradient-based fusion quality Q^{AB/F}, weighted by source edge strengths."""
    _check_same_shape(vis, ir, fused)
    vis_strength, vis_orientation = _strength_and_orientation(vis)
    ir_strength, ir_orientation = _strength_and_orientation(ir)
    fused_strength, fused_orientation = _strength_and_orientation(fused)

    vis_preservation = _edge_preservation(vis_strength, vis_orientation, fused_strength, fused_orientation)
    ir_preservation = _edge_preservation(ir_strength, ir_orientation, fused_strength, fused_orientation)

    total_weight = float(np.sum(vis_strength + ir_strength))
    if total_weight == 0.0:
        return 0.0
    weighted = float(np.sum(vis_preservation * vis_strength + ir_preservation * ir_strength))
    return weighted / total_weight


def ssim_sum(vis: Image, ir: Image, fused: Image) -> float:
    """SSIM(fused, vis) + SSIM(fused, ir) on luma."""
    _check_same_shape(vis, ir, fused)
    fused_luma = _luma_tensor(fused)
    return float(ssim(fused_luma, _luma_tensor(vis)) + ssim(fused_luma, _luma_tensor(ir)))


def evaluate_pair(vis: Image, ir: Image, fused: Image) -> MetricReport:
    """Compute the full metric report of one fused triple."""
    _check_same_shape(vis, ir, fused)
    report = MetricReport(
        en=entropy(fused),
        mi=mutual_information(fused, vis) + mutual_information(fused, ir),
        sf=spatial_frequency(fused),
        vif=vif(fused, vis, ir),
        qabf=qabf(vis, ir, fused),
        ssim_sum=ssim_sum(vis, ir, fused),
    )
    logger.debug(f"Evaluated triple {vis.shape}: {report}")
    return report
