"""
Нижняя граница D_low, не зависящая от измерения противника.

Информация Холево ограничивает сверху взаимную информацию противника,
неравенство Фано переводит ее в нижнюю границу вероятности ошибки:
P_err^(low) есть наименьшее p с h2(p) + p log2(N-1) >= log2 N - chi.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from pukauth.constants import BISECT_TOLERANCE
from pukauth.mathcore import binary_entropy, bisect, gram_spectrum
from pukauth.model import ProtocolParams, ResponsePhaseMap
from pukauth.verifier import p_in_honest, p_in_pair_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LowerBoundReport:
    """
    Отчет по нижней границе.

    Attributes:
        holevo_chi: Информация Холево в битах
        p_err_low: Нижняя граница вероятности ошибки противника
        p_max_in_error: max P(in|k, k_tilde) по парам k_tilde != k
        p_in_honest: P_in^(0)
        d_low: max(0, d_low_raw)
        d_low_raw: p_err_low (P_in^(0) - p_max_in_error) без обрезки
    """

    holevo_chi: float
    p_err_low: float
    p_max_in_error: float
    p_in_honest: float
    d_low: float
    d_low_raw: float


def holevo_chi(params: ProtocolParams) -> float:
    """Энтропия фон Неймана усредненного состояния: -sum (g_r/N) log2 (g_r/N)."""
    spectrum = gram_spectrum(params.n_states, params.mu_probe)
    chi = float(np.sum(special.entr(spectrum.normalized)) / math.log(2.0))
    return min(max(chi, 0.0), math.log2(params.n_states))


def fano_error_bound(holevo_bits: float, n_states: int) -> float:
    """
    Наименьшая вероятность ошибки, совместимая с неравенством Фано.

    Args:
        holevo_bits: Доступная противнику информация в битах
        n_states: Число гипотез N

    Returns:
        p в [0, (N-1)/N]
    """
    if n_states < 2:
        raise ValueError(f"❌ n_states должен быть >= 2, получено {n_states}")
    deficit = math.log2(n_states) - holevo_bits
    if deficit <= 0:
        return 0.0

    extra = math.log2(n_states - 1)

    def gap(p: float) -> float:
        return binary_entropy(p) + p * extra - deficit

    upper = (n_states - 1) / n_states
    if gap(upper) <= 0:
        return upper
    return bisect(gap, 0.0, upper, BISECT_TOLERANCE)


def perr_lower(params: ProtocolParams) -> float:
    return fano_error_bound(holevo_chi(params), params.n_states)


def p_max_in_error(params: ProtocolParams, chi_map: ResponsePhaseMap) -> float:
    """Максимум усредненной по theta P(in|k, k_tilde) по всем парам k_tilde != k."""
    pairs = p_in_pair_matrix(params, chi_map)
    off_diagonal = ~np.eye(params.n_states, dtype=bool)
    return float(pairs[off_diagonal].max())


def d_low(params: ProtocolParams, chi_map: ResponsePhaseMap) -> LowerBoundReport:
    """Сборка отчета D_low = P_err^(low) [P_in^(0) - P_max(in|error)]."""
    chi_bits = holevo_chi(params)
    p_err_low = fano_error_bound(chi_bits, params.n_states)
    p_max = p_max_in_error(params, chi_map)
    honest = p_in_honest(params)
    raw = p_err_low * (honest - p_max)

    logger.debug(
        f"📊 N={params.n_states}: chi={chi_bits:.6g}, P_err_low={p_err_low:.6g}, "
        f"D_low={raw:.6g}"
    )
    return LowerBoundReport(
        holevo_chi=chi_bits,
        p_err_low=p_err_low,
        p_max_in_error=p_max,
        p_in_honest=honest,
        d_low=max(0.0, raw),
        d_low_raw=raw,
    )
