"""Базовый класс для работы с базой данных CRP на SQLite."""

import logging
import sqlite3
from pathlib import Path

logger = logging.getLogger(__name__)


class CRPDatabaseBase:
    """Базовый класс для работы с SQLite базой данных сервера."""

    def __init__(self, db_path: str):
        """
        Инициализация подключения к базе данных.

        Args:
            db_path: Путь к файлу базы данных
        """
        self.db_path = db_path
        self._ensure_db_directory()
        self._init_database()

    def _ensure_db_directory(self):
        """Создание директории для базы данных, если она не существует."""
        db_dir = Path(self.db_path).parent
        db_dir.mkdir(parents=True, exist_ok=True)

    def _init_database(self):
        """Инициализация структуры базы данных."""
        with sqlite3.connect(self.db_path) as conn:
            cursor = conn.cursor()

            # Заголовки таблиц CRP
            cursor.execute(
                """
                CREATE TABLE IF NOT EXISTS crp_tables (
                    table_id TEXT PRIMARY KEY,
                    n_states INTEGER NOT NULL,
                    mu_response REAL NOT NULL,
                    provenance TEXT NOT NULL,
                    seed TEXT,
                    created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
                )
            """
            )

            # Строки таблиц: средние квадратур и фаза отклика
            cursor.execute(
                """
                CREATE TABLE IF NOT EXISTS crp_rows (
                    table_id TEXT NOT NULL,
                    k INTEGER NOT NULL,
                    mask_id TEXT NOT NULL,
                    mean_x REAL NOT NULL,
                    mean_y REAL NOT NULL,
                    chi REAL NOT NULL,
                    PRIMARY KEY (table_id, k),
                    FOREIGN KEY (table_id) REFERENCES crp_tables(table_id)
                        ON DELETE CASCADE
                )
            """
            )

            cursor.execute(
                """
                CREATE INDEX IF NOT EXISTS idx_crp_rows_mask_id
                ON crp_rows(mask_id)
            """
            )

            conn.commit()
            logger.debug(f"База данных CRP инициализирована: {self.db_path}")
