"""Report files: metric CSV and Markdown tables, timing tables and the training log."""
import csv
import io
import logging
from dataclasses import dataclass
from enum import StrEnum, unique
from pathlib import Path

from entities.metric_report import METRIC_NAMES, MetricReport

logger = logging.getLogger(__name__)

METRIC_TITLES = {"en": "EN", "mi": "MI", "sf": "SF", "vif": "VIF", "qabf": "Q^AB/F", "ssim_sum": "SSIM"}
TRAINING_LOG_COLUMNS = ("step", "stage", "l_int", "l_ssim", "l_grad", "l_color", "l_feat", "l_res", "total", "lr")
MEAN_ROW_ID = "mean"


@unique
class ReportLayout(StrEnum):
    """Column order of the Markdown metric table."""

    IVF = "ivf"
    MEDICAL = "medical"

    @property
    def columns(self) -> tuple[str, ...]:
        """Metric names in table order."""
        if self is ReportLayout.MEDICAL:
            return "ssim_sum", "vif", "qabf", "mi", "en"
        return METRIC_NAMES


def _format(value: float) -> str:
    """Fixed six-decimal rendering."""
    return f"{value:.6f}"


def write_metrics_csv(path: str | Path, id_to_report: dict[str, MetricReport]) -> None:
    """Per-image metrics plus a trailing mean row, RFC 4180 quoting and CRLF line ends."""
    buffer = io.StringIO(newline="")
    writer = csv.writer(buffer)
    writer.writerow(("id",) + METRIC_NAMES)
    for sample_id, report in id_to_report.items():
        writer.writerow([sample_id] + [_format(getattr(report, name)) for name in METRIC_NAMES])
    mean = MetricReport.mean_of(list(id_to_report.values()))
    writer.writerow([MEAN_ROW_ID] + [_format(getattr(mean, name)) for name in METRIC_NAMES])
    Path(path).write_bytes(buffer.getvalue().encode("utf-8"))


def render_metrics_markdown(name_to_report: dict[str, MetricReport], layout: ReportLayout = ReportLayout.IVF) -> str:
    """Markdown table with one row per network."""
    titles = [METRIC_TITLES[column] for column in layout.columns]
    lines = [
        "| Method | " + " | ".join(titles) + " |",
        "|---|" + "---|" * len(titles),
    ]
    for name, report in name_to_report.items():
        lines.append(f"| {name} | " + " | ".join(f"{getattr(report, column):.3f}" for column in layout.columns) + " |")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class TimingRow:
    """Mean per-component milliseconds of one network; ``text_ms`` is None for text-free networks."""

    name: str
    data_load_ms: float
    text_ms: float | None
    fusion_ms: float
    fusion_median_ms: float

    @property
    def total_ms(self) -> float:
        """Sum of the components."""
        return self.data_load_ms + (self.text_ms or 0.0) + self.fusion_ms


def render_timing_markdown(rows: list[TimingRow]) -> str:
    """Per-component inference time table in milliseconds."""
    lines = [
        "| Method | Data Load | Text | Fusion | Fusion p50 | Total |",
        "|---|---|---|---|---|---|",
    ]
    for row in rows:
        text = "-" if row.text_ms is None else f"{row.text_ms:.2f}"
        lines.append(f"| {row.name} | {row.data_load_ms:.2f} | {text} | {row.fusion_ms:.2f} | "
                     f"{row.fusion_median_ms:.2f} | {row.total_ms:.2f} |")
    return "\n".join(lines) + "\n"


class TrainingLog:
    """Append-only CSV of per-step loss components."""

    def __init__(self, path: str | Path, append: bool = False) -> None:
        """init."""
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if not append or not self.path.exists():
            self._write_rows([TRAINING_LOG_COLUMNS], mode="w")
        logger.info(f"{type(self).__name__} inited at {self.path}")

    def _write_rows(self, rows: list, mode: str) -> None:
        """Write rows with CRLF line ends."""
        with open(self.path, mode, encoding="utf-8", newline="") as file:
            csv.writer(file).writerows(rows)

    def append(self, step: int, stage: str, components: dict[str, float], lr: float) -> None:
        """Add one row; absent components are left empty."""
        row = [step, stage]
        for column in TRAINING_LOG_COLUMNS[2:-1]:
            row.append(f"{components[column]:.8g}" if column in components else "")
        row.append(f"{lr:.8g}")
        self._write_rows([row], mode="a")
