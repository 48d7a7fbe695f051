"""LossWeights module."""
import math
from dataclasses import dataclass, fields

from utils.exceptions import ConfigError


@dataclass(frozen=True)
class LossWeights:
    """All loss coefficients: four fusion terms, the infrared SSIM weight and distillation alphas."""

    lambda_int: float = 24.0
    lambda_ssim: float = 40.0
    lambda_grad: float = 48.0
    lambda_color: float = 12.0
    delta_ir: float = 1.0
    alpha: tuple[float, ...] = (1.0, 1.0, 1.0)

    def __post_init__(self) -> None:
        """Validate coefficients."""
        if len(self.alpha) != 3:
            raise ConfigError(f"alpha needs three values (base, feat, res), got {self.alpha}")
        for field in fields(self):
            values = getattr(self, field.name)
            for value in values if isinstance(values, tuple) else (values,):
                if not math.isfinite(value) or value < 0:
                    raise ConfigError(f"Loss weight {field.name} must be finite and nonnegative, got {value}")


@dataclass(frozen=True)
class WeightFactors:
    """Multiplicative lambda factors and the infrared SSIM weight for one category."""

    f_int: float = 1.0
    f_ssim: float = 1.0
    f_grad: float = 1.0
    f_color: float = 1.0
    delta_ir: float = 1.0

    def __post_init__(self) -> None:
        """Validate factors."""
        for field in fields(self):
            value = getattr(self, field.name)
            if not math.isfinite(value) or value <= 0:
                raise ConfigError(f"Weight factor {field.name} must be positive, got {value}")


IDENTITY_FACTORS = WeightFactors()


@dataclass(frozen=True)
class WeightTable:
    """Category to factors map; unknown categories use identity factors."""

    category_to_factors: dict[str, WeightFactors]

    def factors_for(self, category: str) -> WeightFactors:
        """Get factors of a category."""
        return self.category_to_factors.get(category, IDENTITY_FACTORS)
