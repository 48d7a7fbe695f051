"""MetricReport module."""
from dataclasses import asdict, dataclass

METRIC_NAMES = ("en", "mi", "sf", "vif", "qabf", "ssim_sum")


@dataclass(frozen=True)
class MetricReport:
    """Fusion quality of one (vis, ir, fused) triple."""

    en: float
    mi: float
    sf: float
    vif: float
    qabf: float
    ssim_sum: float

    def as_dict(self) -> dict[str, float]:
        """Metric name to value."""
        return asdict(self)

    @classmethod
    def mean_of(cls, reports: list["MetricReport"]) -> "MetricReport":
        """Average several reports field by field."""
        count = len(reports)
        return cls(**{name: sum(getattr(report, name) for report in reports) / count for name in METRIC_NAMES})
