"""Константы проекта."""

import math

TWO_PI = 2.0 * math.pi

# Спектр матрицы Грама
GRAM_CLIP_RELATIVE = 1e-12  # Собственные значения меньше этой доли максимума обнуляются
GRAM_IMAG_RELATIVE = 1e-9  # Допустимая мнимая часть относительно max|g|
GRAM_TRACE_RELATIVE = 1e-9  # Допустимое отклонение следа от N

# Квадратуры и поиск корней
QUAD_RELATIVE_TOLERANCE = 1e-12  # Относительная точность scipy.integrate.quad
QUAD_SUBDIVISIONS = 200  # Максимум разбиений интервала
DH_TOLERANCE_DEFAULT = 1e-10  # Абсолютная точность интеграла по сектору
BISECT_TOLERANCE = 1e-12  # Точность бисекции для границы Фано
BISECT_MAX_ITERATIONS = 200

# Стохастичность и инварианты
ROW_SUM_TOLERANCE = 1e-9  # Допуск суммы строки матрицы ошибок
CRP_RADIUS_TOLERANCE = 1e-9  # Допуск |<X>|^2 + |<Y>|^2 = 2 mu_R

# Измерение квадратного корня в базисе Фока
FOCK_TAIL_LIMIT = 1e-12  # Максимальный отброшенный хвост распределения Пуассона
FOCK_SUPPORT_RELATIVE = 1e-12  # Порог носителя rho относительно max собственного значения
POVM_COMPLETENESS_TOLERANCE = 1e-8

# Моделирование сессий
MIN_CONFUSION_SAMPLES = 10_000  # Минимум выборок для эмпирической матрицы ошибок
SAMPLING_CHUNK = 1_000_000  # Размер блока при генерации выборок
MASK_ID_LENGTH = 16  # Длина идентификатора маски (hex-символы SHA-256)

# Значения по умолчанию (фокусная конфигурация)
DEFAULT_ETA = 0.5  # Эффективность детектирования, худший случай для защиты
DEFAULT_DELTA_OVER_SIGMA = 2.0  # Ширина бина в единицах sigma
DEFAULT_EPSILON = 7.5e-4  # 2 eps = 1.5e-3
DEFAULT_MU_PROBE = 600.0
DEFAULT_LOSS_RATIO = 0.05  # mu_R / mu_P
DEFAULT_N_QUERIES = 100_000
DEFAULT_SEED = 20190101
DEFAULT_N_GRID = "2:300"
DEFAULT_DATABASE_PATH = "data/crp.db"
