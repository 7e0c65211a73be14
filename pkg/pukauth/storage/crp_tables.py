"""Репозиторий таблиц CRP."""

import logging
import sqlite3
from typing import Any

from pukauth.model import (
    CRPRow,
    CRPTable,
    PhaseProvenance,
    ResponsePhaseMap,
    check_phase_consistency,
)

logger = logging.getLogger(__name__)


class CRPTablesRepository:
    """Класс для хранения и загрузки таблиц CRP."""

    def __init__(self, db_path: str):
        """
        Инициализация репозитория.

        Args:
            db_path: Путь к файлу базы данных
        """
        self.db_path = db_path

    def save_table(self, table: CRPTable, chi: ResponsePhaseMap) -> None:
        """
        Сохранение таблицы (существующая с тем же table_id заменяется).

        Args:
            table: Таблица CRP
            chi: Карта фаз, из которой построена таблица

        Raises:
            InvariantViolationError: Таблица не построена из chi
        """
        table.validate()
        check_phase_consistency(table, chi)

        seed = None if chi.seed is None else str(chi.seed)
        with sqlite3.connect(self.db_path) as conn:
            cursor = conn.cursor()
            cursor.execute("DELETE FROM crp_rows WHERE table_id = ?", (table.table_id,))
            cursor.execute(
                """
                INSERT OR REPLACE INTO crp_tables
                    (table_id, n_states, mu_response, provenance, seed)
                VALUES (?, ?, ?, ?, ?)
            """,
                (
                    table.table_id,
                    table.n_states,
                    table.mu_response,
                    chi.provenance.value,
                    seed,
                ),
            )
            cursor.executemany(
                """
                INSERT INTO crp_rows (table_id, k, mask_id, mean_x, mean_y, chi)
                VALUES (?, ?, ?, ?, ?, ?)
            """,
                [
                    (table.table_id, row.k, row.mask_id, row.mean_x, row.mean_y, phase)
                    for row, phase in zip(table.rows, chi.phases, strict=True)
                ],
            )
            conn.commit()
            logger.info(f"✅ Таблица {table.table_id} (N={table.n_states}) сохранена")

    def load_table(self, table_id: str) -> tuple[CRPTable, ResponsePhaseMap]:
        """
        Загрузка таблицы по идентификатору.

        Raises:
            KeyError: Таблица не найдена
            InvariantViolationError: Средние строк не соответствуют столбцу chi
        """
        with sqlite3.connect(self.db_path) as conn:
            cursor = conn.cursor()
            cursor.execute(
                """
                SELECT n_states, mu_response, provenance, seed
                FROM crp_tables
                WHERE table_id = ?
            """,
                (table_id,),
            )
            header = cursor.fetchone()
            if header is None:
                raise KeyError(table_id)

            cursor.execute(
                """
                SELECT k, mask_id, mean_x, mean_y, chi
                FROM crp_rows
                WHERE table_id = ?
                ORDER BY k
            """,
                (table_id,),
            )
            records = cursor.fetchall()

        n_states, mu_response, provenance, seed = header
        table = CRPTable(
            table_id=table_id,
            n_states=int(n_states),
            mu_response=float(mu_response),
            rows=tuple(
                CRPRow(k=int(k), mask_id=mask_id, mean_x=float(x), mean_y=float(y))
                for k, mask_id, x, y, _ in records
            ),
        )
        chi = ResponsePhaseMap(
            phases=tuple(float(record[4]) for record in records),
            provenance=PhaseProvenance(provenance),
            seed=None if seed is None else int(seed),
        )
        check_phase_consistency(table, chi)
        return table, chi

    def list_tables(self) -> list[dict[str, Any]]:
        """
        Заголовки всех таблиц, упорядоченные по table_id.

        Returns:
            List[Dict]: table_id, n_states, mu_response, provenance, seed
        """
        with sqlite3.connect(self.db_path) as conn:
            cursor = conn.cursor()
            cursor.execute(
                """
                SELECT table_id, n_states, mu_response, provenance, seed
                FROM crp_tables
                ORDER BY table_id
            """
            )
            return [
                {
                    "table_id": table_id,
                    "n_states": n_states,
                    "mu_response": mu_response,
                    "provenance": provenance,
                    "seed": None if seed is None else int(seed),
                }
                for table_id, n_states, mu_response, provenance, seed in cursor.fetchall()
            ]

    def delete_table(self, table_id: str) -> bool:
        """
        Удаление таблицы.

        Returns:
            bool: True, если таблица существовала
        """
        with sqlite3.connect(self.db_path) as conn:
            cursor = conn.cursor()
            cursor.execute("DELETE FROM crp_rows WHERE table_id = ?", (table_id,))
            cursor.execute("DELETE FROM crp_tables WHERE table_id = ?", (table_id,))
            deleted = cursor.rowcount > 0
            conn.commit()
        if deleted:
            logger.info(f"🗑️ Таблица {table_id} удалена")
        return deleted
