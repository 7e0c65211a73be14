"""Команда simulate: серия сессий и сравнение с аналитическим P_in."""

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

from pukauth.simulate.actors import run_actor_harness
from pukauth.simulate.messages import TranscriptSink
from pukauth.simulate.metrics import NO_ATTACK_LABEL, SimulationMetrics
from pukauth.simulate.session import (
    SessionConfig,
    SessionResult,
    run_sessions,
    session_confusion,
    session_seed,
)
from pukauth.timing import StageTimer
from pukauth.verifier import p_in_attacked, p_in_honest

logger = logging.getLogger(__name__)

SIMULATION_COLUMNS = [
    "attack",
    "adversary_mode",
    "n",
    "mu_p",
    "mu_r",
    "queries",
    "repetitions",
    "accept_rate",
    "mean_p_in",
    "min_p_in",
    "max_p_in",
    "analytic_p_in",
    "analytic_deviation",
]


@dataclass(frozen=True)
class SimulationSummary:
    """Сводка серии сессий."""

    attack: str
    adversary_mode: str
    n: int
    mu_p: float
    mu_r: float
    queries: int
    repetitions: int
    accept_rate: float
    mean_p_in: float
    min_p_in: float
    max_p_in: float
    analytic_p_in: float
    analytic_deviation: float

    def row(self) -> dict[str, Any]:
        return {column: getattr(self, column) for column in SIMULATION_COLUMNS}


def analytic_p_in(config: SessionConfig) -> float:
    """Ожидаемая доля попаданий в бин для конфигурации сессии."""
    confusion = session_confusion(config)
    if confusion is None:
        return p_in_honest(config.params)
    return p_in_attacked(confusion, config.params, config.chi).p_in_attacked


def _run_with_transcripts(
    config: SessionConfig, repetitions: int, out_dir: Path
) -> list[SessionResult]:
    """Сессии через обмен сообщениями, по файлу транскрипта на сессию."""
    if repetitions < 1:
        raise ValueError(f"❌ repetitions должен быть >= 1, получено {repetitions}")
    out_dir.mkdir(parents=True, exist_ok=True)
    results = []
    for i in range(repetitions):
        session = replace(config, seed=session_seed(config.seed, i))
        path = out_dir / f"session_{i:04d}.jsonl"
        with open(path, "w", encoding="utf-8") as stream:
            results.append(run_actor_harness(session, TranscriptSink(stream)))
    logger.info(f"✅ Транскрипты {repetitions} сессий записаны в {out_dir}")
    return results


def cmd_simulate(
    config: SessionConfig,
    repetitions: int,
    workers: int = 1,
    transcript_dir: str | None = None,
) -> SimulationSummary:
    """
    Серия сессий с зернами, производными от config.seed.

    Args:
        config: Конфигурация сессии (seed - главное зерно серии)
        repetitions: Число сессий
        workers: Число процессов
        transcript_dir: Каталог для транскриптов (через обмен сообщениями)

    Returns:
        SimulationSummary: Доля принятых, среднее p_in и аналитическое P_in
    """
    label = NO_ATTACK_LABEL if config.attack is None else config.attack.short
    with StageTimer(f"simulate {label} x{repetitions}") as timer:
        if transcript_dir is None:
            results = run_sessions(config, repetitions, workers)
        else:
            results = _run_with_transcripts(config, repetitions, Path(transcript_dir))
        timer.checkpoint("sessions")

        metrics = SimulationMetrics()
        for result in results:
            metrics.update(label, result)
        metrics.log_metrics(label)

        expected = analytic_p_in(config)
        timer.checkpoint("analytic P_in")

    summary = metrics.summary(label)
    params = config.params
    return SimulationSummary(
        attack=label,
        adversary_mode=config.adversary_mode.value,
        n=params.n_states,
        mu_p=params.mu_probe,
        mu_r=params.mu_response,
        queries=params.n_queries,
        repetitions=repetitions,
        accept_rate=summary["accept_rate"],
        mean_p_in=summary["mean_p_in"],
        min_p_in=summary["min_p_in"],
        max_p_in=summary["max_p_in"],
        analytic_p_in=expected,
        analytic_deviation=p_in_honest(params) - expected,
    )
