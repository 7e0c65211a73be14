"""Команда table: генерация, проверка и регистрация таблиц CRP."""

import logging
from pathlib import Path
from typing import Any

from pukauth.model import (
    ProtocolParams,
    ResponsePhaseMap,
    build_crp_table,
    read_crp_table,
    write_crp_table,
)
from pukauth.storage import CRPStore

logger = logging.getLogger(__name__)

TABLE_ACTIONS = ("generate", "inspect", "enroll", "list", "show", "remove")


def _header(table, chi) -> dict[str, Any]:
    return {
        "table_id": table.table_id,
        "n_states": table.n_states,
        "mu_response": table.mu_response,
        "provenance": chi.provenance.value,
        "seed": chi.seed,
    }


def table_generate(
    params: ProtocolParams, chi: ResponsePhaseMap, table_id: str, path: str
) -> dict[str, Any]:
    """Построение таблицы CRP и запись ее в файл."""
    table = build_crp_table(params, chi, table_id)
    write_crp_table(table, chi, path)
    return _header(table, chi) | {"path": str(path)}


def table_inspect(path: str) -> dict[str, Any]:
    """
    Проверка файла таблицы.

    Raises:
        CRPFormatError: Файл не проходит проверку (в сообщении имя инварианта)
    """
    table, chi = read_crp_table(path)
    logger.info(f"✅ Таблица {table.table_id}: все инварианты выполнены")
    return _header(table, chi) | {"rows": len(table.rows), "valid": True}


def table_enroll(path: str, database_path: str) -> dict[str, Any]:
    """Проверка файла и регистрация таблицы в базе сервера."""
    table, chi = read_crp_table(path)
    CRPStore(database_path).enroll(table, chi)
    return _header(table, chi) | {"database": database_path}


def table_list(database_path: str) -> list[dict[str, Any]]:
    if not Path(database_path).exists():
        logger.warning(f"⚠️ База данных {database_path} не найдена")
        return []
    return CRPStore(database_path).list_tables()


def _existing_store(database_path: str) -> CRPStore:
    if not Path(database_path).exists():
        raise FileNotFoundError(database_path)
    return CRPStore(database_path)


def table_show(table_id: str, database_path: str) -> list[dict[str, Any]]:
    """
    Строки зарегистрированной таблицы после проверки согласованности с chi.

    Raises:
        FileNotFoundError: Нет базы данных
        KeyError: Таблица не зарегистрирована
        InvariantViolationError: Средние не соответствуют сохраненным фазам
    """
    table, chi = _existing_store(database_path).load(table_id)
    logger.info(f"✅ Таблица {table_id} из базы согласована со своей картой фаз")
    return [
        {
            "k": row.k,
            "mask_id": row.mask_id,
            "mean_x": row.mean_x,
            "mean_y": row.mean_y,
            "chi": phase,
        }
        for row, phase in zip(table.rows, chi.phases, strict=True)
    ]


def table_remove(table_id: str, database_path: str) -> dict[str, Any]:
    """Снятие таблицы с регистрации."""
    removed = _existing_store(database_path).delete(table_id)
    if not removed:
        logger.warning(f"⚠️ Таблица {table_id} не была зарегистрирована")
    return {"table_id": table_id, "removed": removed}


def cmd_table(action: str, args: dict[str, Any]) -> list[dict[str, Any]]:
    """
    Диспетчер действий с таблицами.

    Args:
        action: generate, inspect, enroll, list, show или remove
        args: Аргументы действия

    Returns:
        List[Dict]: Строки отчета
    """
    if action == "generate":
        return [table_generate(args["params"], args["chi"], args["table_id"], args["path"])]
    if action == "inspect":
        return [table_inspect(args["path"])]
    if action == "enroll":
        return [table_enroll(args["path"], args["database_path"])]
    if action == "list":
        return table_list(args["database_path"])
    if action == "show":
        return table_show(args["table_id"], args["database_path"])
    if action == "remove":
        return [table_remove(args["table_id"], args["database_path"])]
    raise ValueError(f"❌ Неизвестное действие: {action!r}, допустимы {TABLE_ACTIONS}")
