"""Конфигурация анализа."""

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from pukauth.attacks import AttackKind
from pukauth.constants import (
    DEFAULT_DATABASE_PATH,
    DEFAULT_DELTA_OVER_SIGMA,
    DEFAULT_EPSILON,
    DEFAULT_ETA,
    DEFAULT_LOSS_RATIO,
    DEFAULT_MU_PROBE,
    DEFAULT_N_GRID,
    DEFAULT_N_QUERIES,
    DEFAULT_SEED,
    DH_TOLERANCE_DEFAULT,
)
from pukauth.simulate.session import AdversaryMode

OUTPUT_FORMATS = ("csv", "json")


@dataclass
class ProtocolSection:
    """Параметры протокола без N."""

    eta: float = DEFAULT_ETA
    delta_over_sigma: float = DEFAULT_DELTA_OVER_SIGMA
    epsilon: float = DEFAULT_EPSILON
    mu_probe: float = DEFAULT_MU_PROBE
    mu_response: float | None = None
    loss_ratio: float | None = DEFAULT_LOSS_RATIO
    n_queries: int = DEFAULT_N_QUERIES


@dataclass
class SimulationSection:
    """Конфигурация моделирования сессий."""

    seed: int = DEFAULT_SEED
    adversary_mode: AdversaryMode = AdversaryMode.CONFUSION_SAMPLING
    repetitions: int = 1


@dataclass
class SweepSection:
    """Конфигурация перебора по N."""

    n_grid: str = DEFAULT_N_GRID
    attacks: list[AttackKind] = field(default_factory=lambda: list(AttackKind))
    include_lower_bound: bool = True
    workers: int = 1
    dh_tolerance: float = DH_TOLERANCE_DEFAULT


@dataclass
class StorageSection:
    """Конфигурация базы данных CRP."""

    database_path: str = DEFAULT_DATABASE_PATH


@dataclass
class OutputSection:
    """Конфигурация вывода."""

    format: str = "csv"
    path: str | None = None


@dataclass
class AnalysisConfig:
    """Общая конфигурация анализа."""

    protocol: ProtocolSection = field(default_factory=ProtocolSection)
    simulation: SimulationSection = field(default_factory=SimulationSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    storage: StorageSection = field(default_factory=StorageSection)
    output: OutputSection = field(default_factory=OutputSection)


def _n_grid_from_yaml(value: Any) -> str:
    if isinstance(value, list):
        return ",".join(str(int(n)) for n in value)
    return str(value)


def _parse_attacks(values: list[str]) -> list[AttackKind]:
    try:
        return [AttackKind.from_label(v) for v in values]
    except ValueError as e:
        raise ValueError(f"❌ Неизвестная атака в sweep.attacks: {e}") from None


def _parse_mode(value: str) -> AdversaryMode:
    try:
        return AdversaryMode(value)
    except ValueError:
        raise ValueError(f"❌ Неизвестный adversary_mode: {value!r}") from None


def load_config(config_path: str | None = None) -> AnalysisConfig:
    """
    Загрузка конфигурации из YAML файла с поддержкой переменных окружения.

    Args:
        config_path: Путь к конфигурационному файлу (None - только значения по умолчанию)

    Returns:
        AnalysisConfig: Объект конфигурации
    """
    config_data: dict[str, Any] = {}
    if config_path is not None:
        config_file = Path(config_path)
        if not config_file.exists():
            raise FileNotFoundError(f"Конфигурационный файл не найден: {config_path}")
        with open(config_file, encoding="utf-8") as f:
            config_data = yaml.safe_load(f) or {}

    protocol_data = config_data.get("protocol") or {}
    simulation_data = config_data.get("simulation") or {}
    sweep_data = config_data.get("sweep") or {}
    storage_data = config_data.get("storage") or {}
    output_data = config_data.get("output") or {}

    has_mu_response = protocol_data.get("mu_response") is not None
    has_loss_ratio = protocol_data.get("loss_ratio") is not None
    if has_mu_response and has_loss_ratio:
        raise ValueError("❌ Укажите либо protocol.mu_response, либо protocol.loss_ratio")

    protocol = ProtocolSection(
        eta=float(protocol_data.get("eta", DEFAULT_ETA)),
        delta_over_sigma=float(
            protocol_data.get("delta_over_sigma", DEFAULT_DELTA_OVER_SIGMA)
        ),
        epsilon=float(protocol_data.get("epsilon", DEFAULT_EPSILON)),
        mu_probe=float(protocol_data.get("mu_probe", DEFAULT_MU_PROBE)),
        mu_response=float(protocol_data["mu_response"]) if has_mu_response else None,
        loss_ratio=(
            None
            if has_mu_response
            else float(protocol_data.get("loss_ratio", DEFAULT_LOSS_RATIO))
        ),
        n_queries=int(protocol_data.get("n_queries", DEFAULT_N_QUERIES)),
    )

    # Поддержка переменных окружения
    seed = os.getenv("PUKAUTH_SEED") or simulation_data.get("seed", DEFAULT_SEED)
    workers = os.getenv("PUKAUTH_WORKERS") or sweep_data.get("workers", 1)
    database_path = os.getenv("PUKAUTH_DB_PATH") or storage_data.get(
        "database_path", DEFAULT_DATABASE_PATH
    )

    simulation = SimulationSection(
        seed=int(seed),
        adversary_mode=_parse_mode(
            simulation_data.get("adversary_mode", AdversaryMode.CONFUSION_SAMPLING.value)
        ),
        repetitions=int(simulation_data.get("repetitions", 1)),
    )

    attacks = sweep_data.get("attacks")
    sweep = SweepSection(
        n_grid=_n_grid_from_yaml(sweep_data.get("n_grid", DEFAULT_N_GRID)),
        attacks=list(AttackKind) if attacks is None else _parse_attacks(attacks),
        include_lower_bound=bool(sweep_data.get("include_lower_bound", True)),
        workers=int(workers),
        dh_tolerance=float(sweep_data.get("dh_tolerance", DH_TOLERANCE_DEFAULT)),
    )

    storage = StorageSection(database_path=str(database_path))
    output = OutputSection(
        format=str(output_data.get("format", "csv")),
        path=output_data.get("path"),
    )

    config = AnalysisConfig(
        protocol=protocol,
        simulation=simulation,
        sweep=sweep,
        storage=storage,
        output=output,
    )
    validate_config(config)
    return config


def validate_config(config: AnalysisConfig) -> None:
    """
    Проверка значений конфигурации.

    Raises:
        ValueError: Значение вне допустимого диапазона
    """
    protocol = config.protocol

    if not 0.0 < protocol.eta <= 1.0:
        raise ValueError("❌ eta должен быть в (0, 1]")
    if protocol.delta_over_sigma <= 0:
        raise ValueError("❌ delta_over_sigma должен быть > 0")
    if protocol.epsilon <= 0:
        raise ValueError("❌ epsilon должен быть > 0")
    if protocol.mu_probe < 0:
        raise ValueError("❌ mu_probe должен быть >= 0")
    if (protocol.mu_response is None) == (protocol.loss_ratio is None):
        raise ValueError("❌ Укажите либо mu_response, либо loss_ratio")
    if protocol.loss_ratio is not None and not 0.0 <= protocol.loss_ratio <= 1.0:
        raise ValueError("❌ loss_ratio должен быть в [0, 1]")
    if protocol.mu_response is not None and not 0.0 <= protocol.mu_response <= protocol.mu_probe:
        raise ValueError("❌ mu_response должен быть в [0, mu_probe]")
    if protocol.n_queries < 1:
        raise ValueError("❌ n_queries должен быть >= 1")

    if config.simulation.repetitions < 1:
        raise ValueError("❌ repetitions должен быть >= 1")
    if not 0 <= config.simulation.seed < 2**64:
        raise ValueError("❌ seed должен быть 64-битным беззнаковым целым")

    if config.sweep.workers < 1:
        raise ValueError("❌ workers должен быть >= 1")
    if config.sweep.dh_tolerance <= 0:
        raise ValueError("❌ dh_tolerance должен быть > 0")

    if config.output.format not in OUTPUT_FORMATS:
        raise ValueError(f"❌ Неизвестный формат вывода: {config.output.format!r}")
