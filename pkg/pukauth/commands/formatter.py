"""Форматирование табличного вывода команд в CSV и JSON."""

import csv
import io
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any

from pukauth import __version__

logger = logging.getLogger(__name__)

NONE_SENTINEL = "none"


def format_value(value: Any) -> str:
    """
    Значение ячейки CSV.

    Вещественные числа печатаются с 17 значащими цифрами, None - как "none".
    """
    if value is None:
        return NONE_SENTINEL
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.17g}"
    return str(value)


class OutputFormatter:
    """Класс для вывода строк результатов с заголовком метаданных."""

    def __init__(self, command: str, parameters: dict[str, Any], seed: int | None = None):
        """
        Инициализация форматтера.

        Args:
            command: Имя подкоманды
            parameters: Полный набор параметров запуска
            seed: Зерно (если команда случайная)
        """
        self.command = command
        self.parameters = parameters
        self.seed = seed

    def metadata(self) -> dict[str, Any]:
        return {
            "tool": "pukauth",
            "version": __version__,
            "command": self.command,
            "parameters": self.parameters,
            "seed": self.seed,
        }

    def render_csv(self, columns: list[str], rows: list[dict[str, Any]]) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row.get(column)) for column in columns])
        return buffer.getvalue()

    def render_json(self, columns: list[str], rows: list[dict[str, Any]]) -> str:
        payload = {
            "metadata": self.metadata(),
            "rows": [{column: row.get(column) for column in columns} for row in rows],
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def render(self, columns: list[str], rows: list[dict[str, Any]], fmt: str) -> str:
        """
        Args:
            columns: Порядок колонок
            rows: Строки результатов
            fmt: csv или json
        """
        if fmt == "csv":
            return self.render_csv(columns, rows)
        if fmt == "json":
            return self.render_json(columns, rows)
        raise ValueError(f"❌ Неизвестный формат вывода: {fmt!r}")

    def write(
        self,
        columns: list[str],
        rows: list[dict[str, Any]],
        fmt: str,
        path: str | None = None,
    ) -> str:
        """Запись результата в файл или в stdout. Возвращает записанный текст."""
        text = self.render(columns, rows, fmt)
        if path is None:
            sys.stdout.write(text)
        else:
            out = Path(path)
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(text, encoding="utf-8")
            logger.info(f"✅ {self.command}: {len(rows)} строк записано в {out}")
        return text
