"""
Численное ядро: функция ошибок, квадратуры, поиск корня и спектр матрицы Грама.

Спектр симметричного набора когерентных состояний вычисляется через ДПФ
перекрытий, так как матрица Грама циркулянтна.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy import integrate as sp_integrate
from scipy import optimize, special

from pukauth.constants import (
    BISECT_MAX_ITERATIONS,
    GRAM_CLIP_RELATIVE,
    GRAM_IMAG_RELATIVE,
    GRAM_TRACE_RELATIVE,
    QUAD_RELATIVE_TOLERANCE,
    QUAD_SUBDIVISIONS,
    TWO_PI,
)
from pukauth.errors import ConvergenceError, NumericalBreakdownError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GramSpectrum:
    """
    Собственные значения g_r матрицы Грама симметричного набора из N состояний.

    Attributes:
        n_states: Число состояний N
        mu: Среднее число фотонов в пробном состоянии
        eigenvalues: Массив из N неотрицательных значений, сумма равна N
    """

    n_states: int
    mu: float
    eigenvalues: np.ndarray

    @property
    def normalized(self) -> np.ndarray:
        """Спектр усредненного состояния rho (след равен единице)."""
        return self.eigenvalues / self.n_states

    @property
    def minimum(self) -> float:
        return float(self.eigenvalues.min())


def erf(x):
    """
    Функция ошибок.

    Принимает число или массив numpy.
    """
    result = special.erf(x)
    return float(result) if np.ndim(result) == 0 else result


def erfc(x):
    """Дополнительная функция ошибок 1 - erf(x) без потери точности в хвосте."""
    result = special.erfc(x)
    return float(result) if np.ndim(result) == 0 else result


def gram_spectrum(n_states: int, mu: float) -> GramSpectrum:
    """
    Спектр матрицы Грама G_jk = exp(mu (e^{i 2pi (k-j)/N} - 1)).

    Args:
        n_states: Число состояний N >= 2
        mu: Среднее число фотонов (>= 0)

    Returns:
        GramSpectrum: N собственных значений

    Raises:
        ValueError: Некорректные аргументы
        NumericalBreakdownError: Отрицательное значение или мнимый остаток сверх допуска
    """
    if n_states < 2:
        raise ValueError(f"❌ n_states должен быть >= 2, получено {n_states}")
    if not math.isfinite(mu) or mu < 0:
        raise ValueError(f"❌ mu должен быть конечным и >= 0, получено {mu}")

    phases = TWO_PI * np.arange(n_states) / n_states
    # Показатель mu (cos - 1) <= 0, экспонента берется последней
    overlaps = np.exp(mu * (np.cos(phases) - 1.0) + 1j * mu * np.sin(phases))
    spectrum = np.fft.fft(overlaps)

    scale = float(np.abs(spectrum).max())
    imag_residue = float(np.abs(spectrum.imag).max())
    if imag_residue > GRAM_IMAG_RELATIVE * scale:
        raise NumericalBreakdownError(
            f"❌ Мнимая часть спектра {imag_residue:.3e} превышает допуск "
            f"(N={n_states}, mu={mu})"
        )

    values = spectrum.real.copy()
    threshold = GRAM_CLIP_RELATIVE * float(values.max())
    if float(values.min()) < -threshold:
        raise NumericalBreakdownError(
            f"❌ Отрицательное собственное значение {values.min():.3e} "
            f"(N={n_states}, mu={mu})"
        )
    values[np.abs(values) < threshold] = 0.0

    trace = math.fsum(values)
    if abs(trace - n_states) > GRAM_TRACE_RELATIVE * n_states:
        raise NumericalBreakdownError(
            f"❌ След спектра {trace!r} отличается от N={n_states}"
        )

    values.setflags(write=False)
    logger.debug(f"📊 Спектр Грама N={n_states}, mu={mu}: min={values.min():.3e}")
    return GramSpectrum(n_states=n_states, mu=float(mu), eigenvalues=values)


def integrate(f: Callable[[float], float], a: float, b: float, tol: float) -> float:
    """
    Адаптивная квадратура на [a, b] с абсолютной точностью tol.

    Raises:
        ValueError: a >= b или tol <= 0
        ConvergenceError: Квадратура не достигла требуемой точности
    """
    if not a < b:
        raise ValueError(f"❌ Требуется a < b, получено [{a}, {b}]")
    if tol <= 0:
        raise ValueError(f"❌ tol должен быть > 0, получено {tol}")

    result = sp_integrate.quad(
        f,
        a,
        b,
        epsabs=tol,
        epsrel=QUAD_RELATIVE_TOLERANCE,
        limit=QUAD_SUBDIVISIONS,
        full_output=1,
    )
    value, abserr = float(result[0]), float(result[1])
    # quad добавляет сообщение только при ier > 0
    if len(result) > 3:
        raise ConvergenceError(f"❌ Квадратура на [{a}, {b}] не сошлась: {result[3]}")
    if abserr > max(tol, QUAD_RELATIVE_TOLERANCE * abs(value)):
        raise ConvergenceError(
            f"❌ Оценка ошибки {abserr:.3e} превышает допуск {tol:.3e} на [{a}, {b}]"
        )
    return value


def bisect(g: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """
    Корень монотонной функции на отрезке [lo, hi].

    Raises:
        ValueError: g(lo) и g(hi) одного знака
        ConvergenceError: Бисекция не сошлась
    """
    g_lo = g(lo)
    g_hi = g(hi)
    if g_lo == 0:
        return lo
    if g_hi == 0:
        return hi
    if (g_lo > 0) == (g_hi > 0):
        raise ValueError(
            f"❌ Корень не локализован: g({lo})={g_lo:.3e}, g({hi})={g_hi:.3e}"
        )

    try:
        return float(optimize.bisect(g, lo, hi, xtol=tol, maxiter=BISECT_MAX_ITERATIONS))
    except RuntimeError as e:
        raise ConvergenceError(f"❌ Бисекция не сошлась на [{lo}, {hi}]: {e}") from e


def binary_entropy(p: float) -> float:
    """Двоичная энтропия h2(p) в битах, 0 log 0 = 0."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"❌ p должен быть в [0, 1], получено {p}")
    return float((special.entr(p) + special.entr(1.0 - p)) / math.log(2.0))
