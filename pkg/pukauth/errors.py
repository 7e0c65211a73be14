"""Исключения пакета."""


class NumericalBreakdownError(RuntimeError):
    """Численный расчет вышел за допустимые пределы точности."""


class ConvergenceError(RuntimeError):
    """Квадратура или поиск корня не сошлись."""


class InvariantViolationError(ValueError):
    """Нарушен инвариант доменного типа."""

    def __init__(self, invariant: str, message: str):
        """
        Args:
            invariant: Короткое имя нарушенного инварианта
            message: Описание нарушения
        """
        self.invariant = invariant
        super().__init__(f"❌ [{invariant}] {message}")


class CRPFormatError(InvariantViolationError):
    """Файл таблицы CRP поврежден или не проходит проверку."""

    def __init__(self, invariant: str, message: str, line: int | None = None):
        self.line = line
        where = f" (строка {line})" if line is not None else ""
        super().__init__(invariant, f"{message}{where}")


class ProtocolOrderError(RuntimeError):
    """Сообщение протокола пришло не в том порядке."""


class EmptySessionError(ValueError):
    """Сессия без запросов (M = 0)."""
