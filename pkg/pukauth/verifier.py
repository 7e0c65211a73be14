"""
Вероятности попадания в бин и решение верификатора.

Верификатор принимает ключ, если доля исходов внутри бина шириной Delta
вокруг ожидаемого среднего отличается от P_in^(0) меньше чем на epsilon.
"""

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from pukauth.errors import InvariantViolationError
from pukauth.mathcore import erf
from pukauth.model import (
    ProtocolParams,
    QuadratureAngle,
    ResponsePhaseMap,
    quadrature_mean,
    quadrature_means,
)

if TYPE_CHECKING:
    from pukauth.attacks import ConfusionMatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BinStatistics:
    """
    Статистика бина под атакой.

    Attributes:
        p_in_honest: P_in^(0), вероятность попадания без атаки
        p_in_attacked: P_in, вероятность попадания под атакой
        deviation: D = P_in^(0) - P_in
        p_err: Вероятность ошибки противника
        p_in_given_error: Вероятность попадания при ошибочной догадке
    """

    p_in_honest: float
    p_in_attacked: float
    deviation: float
    p_err: float
    p_in_given_error: float


def p_in_honest(params: ProtocolParams) -> float:
    """P_in^(0) = erf(Delta_bar / (2 sqrt 2)), не зависит от k и theta."""
    return erf(params.delta_over_sigma / (2.0 * math.sqrt(2.0)))


def _p_in_for_shift(shift, params: ProtocolParams):
    """Масса нормального распределения N(shift, sigma^2) на [-Delta/2, Delta/2]."""
    scale = 2.0 * math.sqrt(2.0) * params.sigma
    upper = erf((2.0 * shift + params.delta) / scale)
    lower = erf((2.0 * shift - params.delta) / scale)
    return 0.5 * (upper - lower)


def p_in_given(
    k: int,
    k_tilde: int,
    theta: QuadratureAngle,
    params: ProtocolParams,
    chi: ResponsePhaseMap,
) -> float:
    """
    Вероятность попадания в бин вызова k, если противник выдал отклик k_tilde.

    Raises:
        IndexError: k или k_tilde вне Z_N
    """
    shift = quadrature_mean(k, theta, params, chi) - quadrature_mean(
        k_tilde, theta, params, chi
    )
    return float(_p_in_for_shift(shift, params))


def p_in_pair_matrix(params: ProtocolParams, chi: ResponsePhaseMap) -> np.ndarray:
    """
    Матрица P(in|k, k_tilde), усредненная по двум квадратурам с весом 1/2.

    Диагональ равна P_in^(0).
    """
    means = quadrature_means(params, chi)
    shifts = means[:, :, None] - means[:, None, :]
    per_theta = _p_in_for_shift(shifts, params)
    matrix = 0.5 * (per_theta[0] + per_theta[1])
    np.fill_diagonal(matrix, p_in_honest(params))
    return matrix


def p_in_attacked(
    confusion: "ConfusionMatrix", params: ProtocolParams, chi: ResponsePhaseMap
) -> BinStatistics:
    """
    Средняя вероятность попадания в бин под атакой с матрицей ошибок confusion.

    Args:
        confusion: Матрица P(k_tilde|k) размера N x N
        params: Параметры протокола
        chi: Карта фаз откликов

    Returns:
        BinStatistics: P_in^(0), P_in, D, P_err и P(in|error)

    Raises:
        InvariantViolationError: Матрица не стохастическая или не того размера
    """
    if confusion.n_states != params.n_states:
        raise InvariantViolationError(
            "confusion-size",
            f"матрица {confusion.n_states}x{confusion.n_states} при N={params.n_states}",
        )
    confusion.validate()

    n = params.n_states
    entries = confusion.entries
    pairs = p_in_pair_matrix(params, chi)
    off_diagonal = ~np.eye(n, dtype=bool)

    honest = p_in_honest(params)
    p_err = max(0.0, 1.0 - math.fsum(np.diag(entries)) / n)
    joint = math.fsum((entries * pairs)[off_diagonal]) / n

    attacked = (1.0 - p_err) * honest + joint
    given_error = joint / p_err if p_err > 0 else honest

    stats = BinStatistics(
        p_in_honest=honest,
        p_in_attacked=attacked,
        deviation=honest - attacked,
        p_err=p_err,
        p_in_given_error=given_error,
    )
    logger.debug(
        f"📊 N={n}: P_err={stats.p_err:.6g}, P_in={stats.p_in_attacked:.10g}, "
        f"D={stats.deviation:.6g}"
    )
    return stats


def accept(p_in_empirical: float, params: ProtocolParams) -> bool:
    """Ключ принимается, если |p_in - P_in^(0)| < epsilon."""
    if not 0.0 <= p_in_empirical <= 1.0:
        raise ValueError(f"❌ p_in должен быть в [0, 1], получено {p_in_empirical}")
    return abs(p_in_empirical - p_in_honest(params)) < params.epsilon
