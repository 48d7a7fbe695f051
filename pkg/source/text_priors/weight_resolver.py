"""Text-conditioned loss weight resolution.

The default table is a placeholder policy: identity lambda factors everywhere and a halved infrared SSIM weight
for noisy inputs. Real per-category factors can be supplied through a weight table file.
"""
from dataclasses import replace

from entities.loss_weights import LossWeights, WeightFactors, WeightTable
from entities.sample_pair import CLEAN_CATEGORY

DEGRADATION_CATEGORIES = ("low_light", "low_contrast", "noise", "blur")

DEFAULT_WEIGHT_TABLE = WeightTable(category_to_factors={
    CLEAN_CATEGORY: WeightFactors(),
    "low_light": WeightFactors(),
    "low_contrast": WeightFactors(),
    "noise": WeightFactors(delta_ir=0.5),
    "blur": WeightFactors(),
})


def resolve_weights(category: str, base: LossWeights, table: WeightTable = DEFAULT_WEIGHT_TABLE) -> LossWeights:
    """Scale the base lambdas by the category's factors and take its delta_ir; unknown categories keep base."""
    if category not in table.category_to_factors:
        return base
    factors = table.factors_for(category)
    return replace(
        base,
        lambda_int=base.lambda_int * factors.f_int,
        lambda_ssim=base.lambda_ssim * factors.f_ssim,
        lambda_grad=base.lambda_grad * factors.f_grad,
        lambda_color=base.lambda_color * factors.f_color,
        delta_ir=factors.delta_ir,
    )
