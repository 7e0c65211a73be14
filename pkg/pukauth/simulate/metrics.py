"""Метрики серии сессий верификации."""

import logging
from typing import Any

from pukauth.simulate.session import SessionResult

logger = logging.getLogger(__name__)

NO_ATTACK_LABEL = "none"


class SimulationMetrics:
    """Класс для накопления итогов сессий по меткам атак."""

    def __init__(self):
        """Инициализация метрик."""
        # Структура: {label: {"sessions": 0, "accepted": 0, "p_in_sum": 0.0,
        #                     "p_in_min": None, "p_in_max": None}}
        self._metrics: dict[str, dict[str, Any]] = {}

    @staticmethod
    def _empty() -> dict[str, Any]:
        return {
            "sessions": 0,
            "accepted": 0,
            "p_in_sum": 0.0,
            "p_in_min": None,
            "p_in_max": None,
        }

    def update(self, label: str, result: SessionResult):
        """
        Учет одной сессии.

        Args:
            label: Метка атаки (или "none")
            result: Итог сессии
        """
        metrics = self._metrics.setdefault(label, self._empty())
        p_in = result.p_in_empirical

        metrics["sessions"] += 1
        metrics["accepted"] += int(result.accepted)
        metrics["p_in_sum"] += p_in
        if metrics["p_in_min"] is None or p_in < metrics["p_in_min"]:
            metrics["p_in_min"] = p_in
        if metrics["p_in_max"] is None or p_in > metrics["p_in_max"]:
            metrics["p_in_max"] = p_in

    def summary(self, label: str) -> dict[str, Any]:
        """
        Сводка по метке: число сессий, доля принятых, среднее и разброс p_in.

        Returns:
            Dict: Сводка (для неизвестной метки все нули)
        """
        metrics = self._metrics.get(label, self._empty())
        sessions = metrics["sessions"]
        return {
            "sessions": sessions,
            "accept_rate": metrics["accepted"] / sessions if sessions else 0.0,
            "mean_p_in": metrics["p_in_sum"] / sessions if sessions else 0.0,
            "min_p_in": metrics["p_in_min"],
            "max_p_in": metrics["p_in_max"],
        }

    def log_metrics(self, label: str | None = None):
        """
        Логирование метрик.

        Args:
            label: Метка атаки (опционально, если None - логирует все метки)
        """
        labels = [label] if label else sorted(self._metrics)
        if not labels or (label and label not in self._metrics):
            logger.info("📊 Метрики сессий: нет данных")
            return

        for name in labels:
            s = self.summary(name)
            logger.info(
                f"📊 {name}: сессий={s['sessions']}, принято={s['accept_rate']:.1%}, "
                f"p_in среднее={s['mean_p_in']:.6f} "
                f"[{s['min_p_in']:.6f}, {s['max_p_in']:.6f}]"
            )
