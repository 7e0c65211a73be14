"""Поиск порога по N, начиная с которого отклонение D превышает 2 epsilon."""

import logging
from dataclasses import dataclass, field
from typing import Any

from pukauth.commands.formatter import OutputFormatter
from pukauth.commands.sweep import SweepSpec, compute_sweep_rows

logger = logging.getLogger(__name__)

LOWER_BOUND_LABEL = "low"
THRESHOLD_COLUMNS = ["mu_p", "mu_r", "quantity", "two_epsilon", "n_first", "value", "n_last"]


@dataclass(frozen=True)
class Crossing:
    """
    Пересечение порога на сетке.

    Attributes:
        n_first: Наименьшее N сетки со значением > 2 epsilon
        value: Значение в n_first
        n_last: Наибольшее N сетки со значением > 2 epsilon
    """

    n_first: int
    value: float
    n_last: int


@dataclass(frozen=True)
class ThresholdReport:
    """Пороги по всем атакам (и нижней границе) для одного семейства (mu_P, mu_R)."""

    mu_probe: float
    mu_response: float
    two_epsilon: float
    crossings: dict[str, Crossing | None] = field(default_factory=dict)

    def rows(self) -> list[dict[str, Any]]:
        """Строки вывода; отсутствие пересечения дает n_first = none."""
        rows = []
        for quantity, crossing in self.crossings.items():
            rows.append(
                {
                    "mu_p": self.mu_probe,
                    "mu_r": self.mu_response,
                    "quantity": quantity,
                    "two_epsilon": self.two_epsilon,
                    "n_first": None if crossing is None else crossing.n_first,
                    "value": None if crossing is None else crossing.value,
                    "n_last": None if crossing is None else crossing.n_last,
                }
            )
        return rows


def find_crossing(
    n_values: list[int], values: list[float], two_epsilon: float
) -> Crossing | None:
    """Первое и последнее N, где значение строго больше two_epsilon."""
    above = [(n, v) for n, v in zip(n_values, values, strict=True) if v > two_epsilon]
    if not above:
        return None
    return Crossing(n_first=above[0][0], value=above[0][1], n_last=above[-1][0])


def cmd_threshold(spec: SweepSpec, two_epsilon: float) -> list[ThresholdReport]:
    """
    Команда threshold: пороги D > 2 epsilon для каждого семейства спецификации.

    Args:
        spec: Спецификация перебора
        two_epsilon: Порог 2 epsilon (>= 0)

    Returns:
        List[ThresholdReport]: По одному отчету на семейство (mu_P, mu_R)
    """
    if not two_epsilon >= 0:
        raise ValueError(f"❌ two_epsilon должен быть >= 0, получено {two_epsilon}")

    rows = compute_sweep_rows(spec)
    reports = []
    for mu_p, mu_r in spec.families:
        family = [r for r in rows if r["mu_p"] == float(mu_p) and r["mu_r"] == float(mu_r)]
        n_values = [r["n"] for r in family]
        crossings: dict[str, Crossing | None] = {}
        for kind in spec.attacks:
            values = [r[f"d_{kind.short}"] for r in family]
            crossings[kind.short] = find_crossing(n_values, values, two_epsilon)
        if spec.include_lower_bound:
            values = [r["d_low"] for r in family]
            crossings[LOWER_BOUND_LABEL] = find_crossing(n_values, values, two_epsilon)

        report = ThresholdReport(
            mu_probe=float(mu_p),
            mu_response=float(mu_r),
            two_epsilon=two_epsilon,
            crossings=crossings,
        )
        for quantity, crossing in crossings.items():
            if crossing is None:
                logger.info(f"⚠️ mu_P={mu_p}, mu_R={mu_r}: {quantity} не превышает 2eps")
            else:
                logger.info(
                    f"📊 mu_P={mu_p}, mu_R={mu_r}: {quantity} > 2eps при N >= {crossing.n_first}"
                )
        reports.append(report)
    return reports


def write_threshold_reports(
    spec: SweepSpec, reports: list[ThresholdReport], two_epsilon: float
) -> str:
    formatter = OutputFormatter("threshold", spec.parameters() | {"two_epsilon": two_epsilon})
    rows = [row for report in reports for row in report.rows()]
    return formatter.write(THRESHOLD_COLUMNS, rows, spec.output_format, spec.output_path)
