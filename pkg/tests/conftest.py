import logging
import sys
from pathlib import Path
from typing import TYPE_CHECKING

import pytest

if TYPE_CHECKING:
    from pukauth.model import ProtocolParams
    from pukauth.storage import CRPStore

# Добавляем корень проекта в sys.path, чтобы импортировать пакет pukauth
ROOT_DIR = Path(__file__).resolve().parents[1]
if str(ROOT_DIR) not in sys.path:
    sys.path.insert(0, str(ROOT_DIR))


@pytest.fixture
def db_path(tmp_path) -> str:
    """Путь к временной SQLite-базе для тестов."""
    return str(tmp_path / "crp.db")


@pytest.fixture
def store(db_path: str) -> "CRPStore":
    """Инициализация экземпляра CRPStore с временной БД."""
    from pukauth.storage import CRPStore

    return CRPStore(db_path)


@pytest.fixture
def focal_params() -> "ProtocolParams":
    """Рабочая точка mu_P = 600, mu_R = 30 при N = 16."""
    from pukauth.model import ProtocolParams

    return ProtocolParams(n_states=16, mu_probe=600.0, mu_response=30.0)


@pytest.fixture
def restore_logging():
    """main() перенастраивает корневой логгер; возвращаем обработчики pytest."""
    root = logging.getLogger()
    handlers = list(root.handlers)
    level = root.level
    yield
    for handler in root.handlers:
        if handler not in handlers:
            handler.close()
    root.handlers = handlers
    root.setLevel(level)


@pytest.fixture
def clean_env(monkeypatch: pytest.MonkeyPatch) -> pytest.MonkeyPatch:
    """Окружение без переопределений PUKAUTH_* и LOG_*."""
    for name in ("PUKAUTH_SEED", "PUKAUTH_WORKERS", "PUKAUTH_DB_PATH", "LOG_PATH", "LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    return monkeypatch
