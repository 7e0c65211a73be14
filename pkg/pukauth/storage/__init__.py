"""Серверная база данных таблиц CRP."""

from typing import Any

from pukauth.model import CRPTable, ResponsePhaseMap

from .base import CRPDatabaseBase
from .crp_tables import CRPTablesRepository


class CRPStore(CRPDatabaseBase):
    """Класс-фасад для работы с базой данных CRP."""

    def __init__(self, db_path: str):
        """
        Инициализация подключения к базе данных и репозиториев.

        Args:
            db_path: Путь к файлу базы данных
        """
        super().__init__(db_path)
        self.tables_repo: CRPTablesRepository = CRPTablesRepository(self.db_path)

    def enroll(self, table: CRPTable, chi: ResponsePhaseMap) -> None:
        """См. документацию `CRPTablesRepository.save_table`."""
        self.tables_repo.save_table(table, chi)

    def load(self, table_id: str) -> tuple[CRPTable, ResponsePhaseMap]:
        """См. документацию `CRPTablesRepository.load_table`."""
        return self.tables_repo.load_table(table_id)

    def list_tables(self) -> list[dict[str, Any]]:
        """См. документацию `CRPTablesRepository.list_tables`."""
        return self.tables_repo.list_tables()

    def delete(self, table_id: str) -> bool:
        """См. документацию `CRPTablesRepository.delete_table`."""
        return self.tables_repo.delete_table(table_id)


__all__ = ["CRPStore"]
