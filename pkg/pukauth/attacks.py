"""
Модели атак перехвата с переотправкой.

Каждая атака сводится к матрице ошибок P(k_tilde|k): противник измеряет
пробное состояние, угадывает вызов k_tilde и отправляет верификатору
состояние со статистикой отклика R_k_tilde.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy import linalg, stats
from scipy.special import gammaln

from pukauth.constants import (
    DH_TOLERANCE_DEFAULT,
    FOCK_SUPPORT_RELATIVE,
    FOCK_TAIL_LIMIT,
    POVM_COMPLETENESS_TOLERANCE,
    ROW_SUM_TOLERANCE,
    TWO_PI,
)
from pukauth.errors import InvariantViolationError, NumericalBreakdownError
from pukauth.mathcore import erfc, gram_spectrum, integrate
from pukauth.model import ProtocolParams, ResponsePhaseMap
from pukauth.verifier import BinStatistics, p_in_attacked

logger = logging.getLogger(__name__)


class AttackKind(Enum):
    """Тип атаки."""

    DUAL_HOMODYNE = "dual-homodyne"
    UNAMBIGUOUS = "unambiguous-discrimination"
    SQUARE_ROOT = "square-root-measurement"

    @property
    def short(self) -> str:
        """Короткая метка для колонок вывода."""
        return _SHORT_LABELS[self]

    @classmethod
    def from_label(cls, label: str) -> "AttackKind":
        """Разбор полного или короткого названия (dh, ud, sr)."""
        normalized = label.strip().lower()
        for kind in cls:
            if normalized in (kind.value, kind.short):
                return kind
        raise ValueError(f"❌ Неизвестная атака: {label!r}")


_SHORT_LABELS = {
    AttackKind.DUAL_HOMODYNE: "dh",
    AttackKind.UNAMBIGUOUS: "ud",
    AttackKind.SQUARE_ROOT: "sr",
}


def _circulant_indices(n_states: int) -> np.ndarray:
    k = np.arange(n_states)
    return (k[None, :] - k[:, None]) % n_states


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """
    Матрица ошибок entries[k, k_tilde] = P(k_tilde|k).

    Attributes:
        n_states: Размер N
        entries: Массив N x N
        circulant: True, если элементы зависят только от (k_tilde - k) mod N
    """

    n_states: int
    entries: np.ndarray
    circulant: bool = False

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        if entries.shape != (self.n_states, self.n_states):
            raise InvariantViolationError(
                "confusion-size",
                f"форма {entries.shape} при N={self.n_states}",
            )

    @classmethod
    def from_row(cls, row) -> "ConfusionMatrix":
        """Циркулянтная матрица по нулевой строке P(n), n = k_tilde - k."""
        row = np.clip(np.asarray(row, dtype=float), 0.0, 1.0)
        n = row.shape[0]
        return cls(n_states=n, entries=row[_circulant_indices(n)], circulant=True)

    @classmethod
    def identity(cls, n_states: int) -> "ConfusionMatrix":
        row = np.zeros(n_states)
        row[0] = 1.0
        return cls.from_row(row)

    @classmethod
    def uniform(cls, n_states: int) -> "ConfusionMatrix":
        return cls.from_row(np.full(n_states, 1.0 / n_states))

    @property
    def row(self) -> np.ndarray:
        return self.entries[0]

    def error_probability(self) -> float:
        """P_err = 1 - (1/N) sum_k P(k|k)."""
        return max(0.0, 1.0 - math.fsum(np.diag(self.entries)) / self.n_states)

    def validate(self) -> None:
        """
        Проверка стохастичности и циркулянтности.

        Raises:
            InvariantViolationError: Нарушен один из инвариантов
        """
        entries = self.entries
        if not np.all(np.isfinite(entries)) or entries.min() < 0 or entries.max() > 1:
            raise InvariantViolationError("entry-range", "элементы вне [0, 1]")
        row_sums = entries.sum(axis=1)
        worst = float(np.abs(row_sums - 1.0).max())
        if worst > ROW_SUM_TOLERANCE:
            raise InvariantViolationError(
                "row-stochastic", f"сумма строки отличается от 1 на {worst:.3e}"
            )
        if self.circulant and not np.array_equal(
            entries, entries[0][_circulant_indices(self.n_states)]
        ):
            raise InvariantViolationError("circulant", "матрица не циркулянтна")


def _dh_density(gamma: float, mu: float) -> float:
    """
    Плотность угла gamma результата двойного гомодинного измерения (без 1/2pi).

    Радиальный интеграл взят аналитически, экспонента записана в
    устойчивой форме exp(-mu sin^2 gamma).
    """
    a = math.sqrt(2.0 * mu) * math.cos(gamma)
    sin_gamma = math.sin(gamma)
    return math.exp(-mu) + math.sqrt(math.pi / 2.0) * a * math.exp(
        -mu * sin_gamma * sin_gamma
    ) * erfc(-a / math.sqrt(2.0))


@lru_cache(maxsize=512)
def _dh_row(n_states: int, mu: float, tol: float) -> tuple[float, ...]:
    half_width = math.pi / n_states
    row = [0.0] * n_states
    # P(n) = P(N - n), интегрируются только сектора 0..N/2
    for n in range(n_states // 2 + 1):
        center = TWO_PI * n / n_states
        row[n] = integrate(
            lambda gamma: _dh_density(gamma, mu),
            center - half_width,
            center + half_width,
            tol * TWO_PI,
        ) / TWO_PI
    for n in range(n_states // 2 + 1, n_states):
        row[n] = row[n_states - n]
    return tuple(row)


def dh_confusion(
    params: ProtocolParams, tol: float = DH_TOLERANCE_DEFAULT
) -> ConfusionMatrix:
    """
    Матрица ошибок атаки двойным гомодинным детектированием.

    Противник измеряет обе квадратуры с единичной дисперсией и выбирает
    сектор фазовой плоскости шириной 2pi/N, в который попал результат.

    Args:
        params: Параметры протокола (используются N и mu_P)
        tol: Абсолютная точность вероятности каждого сектора

    Raises:
        ConvergenceError: Квадратура не сошлась
    """
    row = _dh_row(params.n_states, float(params.mu_probe), float(tol))
    return ConfusionMatrix.from_row(row)


def dh_error(params: ProtocolParams, tol: float = DH_TOLERANCE_DEFAULT) -> float:
    return dh_confusion(params, tol).error_probability()


def dh_error_two_states(params: ProtocolParams) -> float:
    """
    P_err атаки DH при N = 2 в замкнутой форме.

    Сектор 0 есть полуплоскость x > 0, x ~ N(sqrt(2 mu_P), 1).
    """
    if params.n_states != 2:
        raise ValueError("❌ Замкнутая форма справедлива только для N = 2")
    return float(stats.norm.sf(math.sqrt(2.0 * params.mu_probe)))


def ud_inconclusive(params: ProtocolParams) -> float:
    """Минимальная вероятность неопределенного исхода P_inc = 1 - min_r g_r."""
    spectrum = gram_spectrum(params.n_states, params.mu_probe)
    return min(1.0, max(0.0, 1.0 - spectrum.minimum))


def ud_confusion(params: ProtocolParams) -> ConfusionMatrix:
    """
    Матрица ошибок атаки однозначным различением.

    При неопределенном исходе противник выбирает отклик равновероятно.
    """
    p_inc = ud_inconclusive(params)
    n = params.n_states
    row = np.full(n, p_inc / n)
    row[0] = 1.0 - p_inc + p_inc / n
    return ConfusionMatrix.from_row(row)


def ud_error(params: ProtocolParams) -> float:
    return ud_inconclusive(params) * (params.n_states - 1) / params.n_states


def sr_confusion(params: ProtocolParams) -> ConfusionMatrix:
    """
    Матрица ошибок измерения квадратного корня для симметричного набора.

    P(n) = |(1/N) sum_r e^{i 2pi r n/N} sqrt(g_r)|^2.
    """
    spectrum = gram_spectrum(params.n_states, params.mu_probe)
    amplitudes = np.fft.ifft(np.sqrt(spectrum.eigenvalues))
    return ConfusionMatrix.from_row(np.abs(amplitudes) ** 2)


def sr_error(params: ProtocolParams) -> float:
    return sr_confusion(params).error_probability()


def coherent_states(params: ProtocolParams, n_max: int) -> np.ndarray:
    """
    Коэффициенты |alpha_k> в базисе Фока 0..n_max.

    Returns:
        Массив формы (N, n_max + 1)

    Raises:
        NumericalBreakdownError: Отброшенный хвост распределения Пуассона >= 1e-12
    """
    if n_max < 1:
        raise ValueError(f"❌ n_max должен быть >= 1, получено {n_max}")
    mu = params.mu_probe
    tail = float(stats.poisson.sf(n_max, mu)) if mu > 0 else 0.0
    if tail >= FOCK_TAIL_LIMIT:
        raise NumericalBreakdownError(
            f"❌ Усечение n_max={n_max} недостаточно для mu={mu}: хвост {tail:.3e}"
        )

    n = np.arange(n_max + 1)
    if mu > 0:
        magnitudes = np.exp(-mu / 2.0 + n * 0.5 * math.log(mu) - 0.5 * gammaln(n + 1))
    else:
        magnitudes = (n == 0).astype(float)
    phases = TWO_PI * np.arange(params.n_states) / params.n_states
    return magnitudes[None, :] * np.exp(1j * np.outer(phases, n))


def square_root_povm(params: ProtocolParams, n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Измерение квадратного корня Pi_k = (1/N) rho^{-1/2} rho_k rho^{-1/2} в базисе Фока.

    Обратный корень берется на носителе rho (собственные значения выше
    1e-12 от максимума).

    Returns:
        (состояния формы (N, D), элементы POVM формы (N, D, D))

    Raises:
        NumericalBreakdownError: Нарушена полнота POVM на носителе
    """
    states = coherent_states(params, n_max)
    n = params.n_states
    rho = states.T @ states.conj() / n
    eigenvalues, vectors = linalg.eigh(rho)
    support = eigenvalues > FOCK_SUPPORT_RELATIVE * eigenvalues.max()
    basis = vectors[:, support]
    inv_sqrt = (basis / np.sqrt(eigenvalues[support])) @ basis.conj().T

    measurement = (inv_sqrt @ states.T).T / math.sqrt(n)
    povm = measurement[:, :, None] * measurement.conj()[:, None, :]

    projector = basis @ basis.conj().T
    completeness = float(np.abs(povm.sum(axis=0) - projector).max())
    if completeness > POVM_COMPLETENESS_TOLERANCE:
        raise NumericalBreakdownError(
            f"❌ Полнота POVM нарушена на {completeness:.3e} "
            f"(N={n}, mu={params.mu_probe}, n_max={n_max})"
        )
    return states, povm


def sr_confusion_fock(params: ProtocolParams, n_max: int) -> ConfusionMatrix:
    """P(k_tilde|k) = Tr(rho_k Pi_k_tilde) через явное усечение пространства Фока."""
    states, povm = square_root_povm(params, n_max)
    entries = np.einsum("ka,jab,kb->kj", states.conj(), povm, states).real
    return ConfusionMatrix(n_states=params.n_states, entries=np.clip(entries, 0.0, 1.0))


def confusion_for(
    kind: AttackKind, params: ProtocolParams, tol: float = DH_TOLERANCE_DEFAULT
) -> ConfusionMatrix:
    """Матрица ошибок для заданного типа атаки."""
    if kind is AttackKind.DUAL_HOMODYNE:
        return dh_confusion(params, tol)
    if kind is AttackKind.UNAMBIGUOUS:
        return ud_confusion(params)
    if kind is AttackKind.SQUARE_ROOT:
        return sr_confusion(params)
    raise ValueError(f"❌ Неизвестная атака: {kind}")


def attack_deviation(
    kind: AttackKind,
    params: ProtocolParams,
    chi: ResponsePhaseMap,
    tol: float = DH_TOLERANCE_DEFAULT,
) -> BinStatistics:
    """Статистика бина под атакой kind: P_in, D, P_err и P(in|error)."""
    return p_in_attacked(confusion_for(kind, params, tol), params, chi)
