"""Замер длительности этапов команд."""

import logging
import time

logger = logging.getLogger(__name__)


class StageTimer:
    """
    Контекстный таймер этапов длительной команды.

    Example:
        with StageTimer("sweep (600 точек)") as timer:
            rows = evaluate_grid()
            timer.checkpoint("grid evaluation")

    При выходе из блока в лог пишется общее время (INFO) и разбивка
    по этапам (DEBUG). Исключение внутри блока помечается в логе и
    пробрасывается дальше.
    """

    def __init__(self, operation_name: str):
        self.operation_name = operation_name
        self.stages: list[tuple[str, float]] = []
        self.total_duration = 0.0
        self._started = 0.0
        self._last = 0.0

    def __enter__(self) -> "StageTimer":
        self._started = self._last = time.perf_counter()
        self.stages = []
        logger.debug(f"🚀 {self.operation_name}")
        return self

    def __exit__(self, exc_type, exc, tb) -> bool:
        self.total_duration = time.perf_counter() - self._started
        if exc_type is not None:
            logger.warning(
                f"⚠️ {self.operation_name}: прервано через {self.total_duration:.3f}s"
            )
            return False
        logger.info(f"⏱️  {self.operation_name}: {self.total_duration:.3f}s")
        for name, duration in self.stages:
            logger.debug(f"  {name:.<40} {duration:>6.3f}s ({self._share(duration):>5.1f}%)")
        return False

    def checkpoint(self, stage_name: str) -> float:
        """Закрыть этап, начатый предыдущей контрольной точкой. Возвращает его длительность."""
        now = time.perf_counter()
        duration = now - self._last
        self.stages.append((stage_name, duration))
        self._last = now
        return duration

    def _share(self, duration: float) -> float:
        return duration / self.total_duration * 100 if self.total_duration > 0 else 0.0
