"""
Сессии верификации методом Монте-Карло.

Порядок генерации случайных чисел фиксирован: сессия использует один
поток Philox из SeedSequence(seed), и каждый запрос по очереди берет из
него k_j, theta_j, две величины противника и шум исхода. Нормальные
величины получаются из равномерных через обратную функцию распределения.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy import special

from pukauth.attacks import AttackKind, ConfusionMatrix, confusion_for
from pukauth.constants import MIN_CONFUSION_SAMPLES, SAMPLING_CHUNK, TWO_PI
from pukauth.errors import EmptySessionError, InvariantViolationError
from pukauth.model import ProtocolParams, QuadratureAngle, ResponsePhaseMap, quadrature_means
from pukauth.verifier import accept

logger = logging.getLogger(__name__)

SEED_LIMIT = 2**64


class AdversaryMode(Enum):
    """Способ, которым противник выбирает k_tilde."""

    CONFUSION_SAMPLING = "confusion-sampling"
    PHYSICAL_DH = "physical-dh"


@dataclass(frozen=True)
class SessionConfig:
    """
    Конфигурация одной сессии.

    Attributes:
        params: Параметры протокола
        chi: Карта фаз откликов
        attack: Тип атаки или None
        adversary_mode: confusion-sampling или physical-dh (только для DH)
        seed: 64-битное зерно сессии
        confusion: Явная матрица ошибок вместо аналитической
        table_id: Идентификатор таблицы CRP в пакете вызовов
    """

    params: ProtocolParams
    chi: ResponsePhaseMap
    attack: AttackKind | None = None
    adversary_mode: AdversaryMode = AdversaryMode.CONFUSION_SAMPLING
    seed: int = 0
    confusion: ConfusionMatrix | None = None
    table_id: str = "session"

    def __post_init__(self):
        if self.chi.n_states != self.params.n_states:
            raise InvariantViolationError(
                "phase-count",
                f"карта фаз длины {self.chi.n_states} при N={self.params.n_states}",
            )
        if not 0 <= self.seed < SEED_LIMIT:
            raise ValueError(f"❌ seed должен быть 64-битным беззнаковым: {self.seed}")
        if (
            self.adversary_mode is AdversaryMode.PHYSICAL_DH
            and self.attack is not AttackKind.DUAL_HOMODYNE
        ):
            raise InvariantViolationError(
                "adversary-mode", "режим physical-dh допустим только для атаки DH"
            )
        if self.confusion is not None:
            if self.attack is None:
                raise ValueError("❌ Матрица ошибок задана без атаки")
            if self.confusion.n_states != self.params.n_states:
                raise InvariantViolationError(
                    "confusion-size", "размер матрицы ошибок не совпадает с N"
                )


class QueryRecord(NamedTuple):
    """Журнал одного запроса."""

    k: int
    k_tilde: int | None
    theta: QuadratureAngle
    outcome: float
    in_bin: bool


@dataclass(frozen=True)
class SessionResult:
    """
    Итог сессии.

    Attributes:
        queries: Число запросов M
        hits: Число исходов внутри бина
        p_in_empirical: hits / M
        accepted: Решение верификатора
        per_query_log: Журнал запросов, если он запрашивался
    """

    queries: int
    hits: int
    p_in_empirical: float
    accepted: bool
    per_query_log: tuple[QueryRecord, ...] | None = None


# Равномерные величины одного запроса: k, theta, две величины противника, шум исхода
QUERY_DRAWS = 5
_UNIFORM_FLOOR = np.finfo(float).tiny


class QueryDraws(NamedTuple):
    """
    Случайные величины всех M запросов сессии.

    Attributes:
        ks: Вызовы k_j
        thetas: Индексы квадратур (0 = X, 1 = Y)
        adversary: Равномерные величины противника формы (M, 2)
        noise: Стандартные нормальные величины шума исхода
    """

    ks: np.ndarray
    thetas: np.ndarray
    adversary: np.ndarray
    noise: np.ndarray


def session_stream(seed: int) -> np.random.Generator:
    """Единственный поток Philox сессии."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def session_seed(master: int, index: int) -> int:
    """Зерно сессии index, производное от главного зерна."""
    sequence = np.random.SeedSequence(master, spawn_key=(index,))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def standard_normals(uniforms: np.ndarray) -> np.ndarray:
    """Обратная функция нормального распределения от равномерных величин из [0, 1)."""
    return special.ndtri(np.clip(uniforms, _UNIFORM_FLOOR, None))


def draw_queries(rng: np.random.Generator, params: ProtocolParams) -> QueryDraws:
    """
    Случайные величины запросов в фиксированном порядке.

    Запрос j расходует ровно QUERY_DRAWS равномерных величин подряд:
    k_j, theta_j, две величины противника, шум исхода. Величины противника
    расходуются и без атаки, поэтому честная и атакованная сессии с одним
    зерном имеют одинаковые k_j, theta_j и шум.
    """
    n = params.n_states
    uniforms = rng.random((params.n_queries, QUERY_DRAWS))
    ks = np.minimum((uniforms[:, 0] * n).astype(np.int64), n - 1)
    thetas = (uniforms[:, 1] >= 0.5).astype(np.int64)
    return QueryDraws(
        ks=ks,
        thetas=thetas,
        adversary=uniforms[:, 2:4],
        noise=standard_normals(uniforms[:, 4]),
    )


def sample_from_rows(
    confusion: ConfusionMatrix, ks: np.ndarray, uniforms: np.ndarray
) -> np.ndarray:
    """Выбор k_tilde из строк k матрицы ошибок по равномерным величинам."""
    cdf = np.cumsum(confusion.entries, axis=1)
    guesses = np.empty(len(ks), dtype=np.int64)
    for k in np.unique(ks):
        mask = ks == k
        guesses[mask] = np.searchsorted(cdf[k], uniforms[mask], side="right")
    return np.minimum(guesses, confusion.n_states - 1)


def dh_sectors(ks: np.ndarray, params: ProtocolParams, normals: np.ndarray) -> np.ndarray:
    """
    Сектора фазовой плоскости для результатов двойного гомодинного измерения.

    Args:
        ks: Истинные вызовы
        params: Параметры (используются N и mu_P)
        normals: Стандартные нормальные величины формы (len(ks), 2)
    """
    n = params.n_states
    amplitude = np.sqrt(2.0 * params.mu_probe)
    phases = TWO_PI * np.asarray(ks) / n
    x = amplitude * np.cos(phases) + normals[:, 0]
    y = amplitude * np.sin(phases) + normals[:, 1]
    sectors = np.rint(n * np.arctan2(y, x) / TWO_PI).astype(np.int64)
    return np.mod(sectors, n)


def sample_dh_guess(k: int, params: ProtocolParams, rng: np.random.Generator) -> int:
    """Догадка противника при двойном гомодинном измерении пробного состояния k."""
    if not 0 <= k < params.n_states:
        raise IndexError(f"❌ k={k} вне диапазона 0..{params.n_states - 1}")
    normals = standard_normals(rng.random((1, 2)))
    return int(dh_sectors(np.array([k]), params, normals)[0])


@lru_cache(maxsize=64)
def _analytic_confusion(kind: AttackKind, params: ProtocolParams) -> ConfusionMatrix:
    return confusion_for(kind, params)


def session_confusion(config: SessionConfig) -> ConfusionMatrix | None:
    """Матрица ошибок, из которой противник выбирает k_tilde."""
    if config.attack is None:
        return None
    if config.confusion is not None:
        return config.confusion
    return _analytic_confusion(config.attack, config.params)


def adversary_guesses(
    config: SessionConfig,
    ks: np.ndarray,
    uniforms: np.ndarray,
    confusion: ConfusionMatrix | None,
) -> np.ndarray:
    """
    Догадки противника по его равномерным величинам формы (len(ks), 2).

    В режиме physical-dh обе величины превращаются в нормальный шум
    измерения, при выборке из матрицы ошибок используется первая.
    """
    if config.adversary_mode is AdversaryMode.PHYSICAL_DH:
        return dh_sectors(ks, config.params, standard_normals(uniforms))
    return sample_from_rows(confusion, ks, uniforms[:, 0])


def run_session(config: SessionConfig, record_queries: bool = False) -> SessionResult:
    """
    Сессия из M запросов, полностью определяемая зерном.

    Args:
        config: Конфигурация сессии
        record_queries: Сохранить журнал каждого запроса

    Raises:
        EmptySessionError: M = 0
    """
    params = config.params
    n_queries = params.n_queries
    if n_queries == 0:
        raise EmptySessionError("❌ Сессия без запросов: p_in не определена")

    draws = draw_queries(session_stream(config.seed), params)
    ks, thetas = draws.ks, draws.thetas

    guesses = ks
    if config.attack is not None:
        guesses = adversary_guesses(config, ks, draws.adversary, session_confusion(config))

    means = quadrature_means(params, config.chi)
    outcomes = means[thetas, guesses] + params.sigma * draws.noise
    in_bin = np.abs(outcomes - means[thetas, ks]) <= params.delta / 2.0

    hits = int(np.count_nonzero(in_bin))
    p_in = hits / n_queries
    log = None
    if record_queries:
        log = tuple(
            QueryRecord(
                k=int(ks[j]),
                k_tilde=None if config.attack is None else int(guesses[j]),
                theta=QuadratureAngle(int(thetas[j])),
                outcome=float(outcomes[j]),
                in_bin=bool(in_bin[j]),
            )
            for j in range(n_queries)
        )
    return SessionResult(
        queries=n_queries,
        hits=hits,
        p_in_empirical=p_in,
        accepted=accept(p_in, params),
        per_query_log=log,
    )


def run_sessions(
    config: SessionConfig, repetitions: int, workers: int = 1
) -> list[SessionResult]:
    """
    Серия независимых сессий с зернами session_seed(config.seed, i).

    Порядок результатов совпадает с номерами сессий.
    """
    if repetitions < 1:
        raise ValueError(f"❌ repetitions должен быть >= 1, получено {repetitions}")
    if workers < 1:
        raise ValueError(f"❌ workers должен быть >= 1, получено {workers}")

    configs = [
        replace(config, seed=session_seed(config.seed, i)) for i in range(repetitions)
    ]
    if workers == 1 or repetitions == 1:
        return [run_session(c) for c in configs]

    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(run_session, configs))


def estimate_confusion(
    kind: AttackKind, params: ProtocolParams, samples: int, seed: int
) -> ConfusionMatrix:
    """
    Эмпирическая матрица ошибок по samples выборкам на строку.

    Для DH выборки физические (сектора двумерной нормальной величины),
    для UD и SR выборки берутся из аналитических строк.

    Raises:
        ValueError: samples < 1e4
    """
    if samples < MIN_CONFUSION_SAMPLES:
        raise ValueError(
            f"❌ samples должен быть >= {MIN_CONFUSION_SAMPLES}, получено {samples}"
        )
    rng = session_stream(seed)
    n = params.n_states
    analytic = None if kind is AttackKind.DUAL_HOMODYNE else confusion_for(kind, params)
    counts = np.zeros((n, n), dtype=np.int64)

    for k in range(n):
        remaining = samples
        while remaining > 0:
            chunk = min(remaining, SAMPLING_CHUNK)
            ks = np.full(chunk, k)
            if analytic is None:
                guesses = dh_sectors(ks, params, rng.standard_normal((chunk, 2)))
            else:
                guesses = sample_from_rows(analytic, ks, rng.random(chunk))
            counts[k] += np.bincount(guesses, minlength=n)
            remaining -= chunk

    logger.debug(f"📊 Эмпирическая матрица {kind.value}: N={n}, {samples} выборок")
    return ConfusionMatrix(n_states=n, entries=counts / samples)
