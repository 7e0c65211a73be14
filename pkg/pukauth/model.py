"""
Модель протокола: параметры, фазы откликов, средние квадратур и таблицы CRP.

Таблица CRP хранится на сервере и сопоставляет каждому вызову k пару
ожидаемых средних (<X>_k, <Y>_k). Здесь же находится текстовый формат
таблицы для обмена между сервером и внешними инструментами.
"""

import hashlib
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from pukauth.constants import CRP_RADIUS_TOLERANCE, MASK_ID_LENGTH, TWO_PI
from pukauth.errors import CRPFormatError, InvariantViolationError

logger = logging.getLogger(__name__)

CRP_HEADER_PREFIX = "#crp"


class QuadratureAngle(Enum):
    """Угол измеряемой квадратуры: X (theta = 0) или Y (theta = pi/2)."""

    X = 0
    Y = 1

    @property
    def theta(self) -> float:
        return 0.0 if self is QuadratureAngle.X else math.pi / 2

    @property
    def label(self) -> str:
        return self.name

    @classmethod
    def from_label(cls, label: str) -> "QuadratureAngle":
        try:
            return cls[label]
        except KeyError:
            raise ValueError(f"❌ Неизвестная квадратура: {label!r}") from None


@dataclass(frozen=True)
class ProtocolParams:
    """
    Параметры протокола аутентификации.

    Attributes:
        n_states: Число пробных состояний N (>= 2)
        mu_probe: Среднее число фотонов пробного состояния mu_P
        mu_response: Среднее число фотонов отклика на детекторе mu_R (<= mu_P)
        eta: Эффективность детектирования в (0, 1]
        delta_over_sigma: Ширина бина в единицах sigma
        epsilon: Параметр безопасности
        n_queries: Число запросов M в одной сессии
    """

    n_states: int
    mu_probe: float
    mu_response: float
    eta: float = 0.5
    delta_over_sigma: float = 2.0
    epsilon: float = 7.5e-4
    n_queries: int = 100_000

    def __post_init__(self):
        if self.n_states < 2:
            raise InvariantViolationError(
                "n-states", f"n_states должен быть >= 2, получено {self.n_states}"
            )
        if not math.isfinite(self.mu_probe) or self.mu_probe < 0:
            raise InvariantViolationError(
                "mu-probe", f"mu_probe должен быть >= 0, получено {self.mu_probe}"
            )
        if not math.isfinite(self.mu_response) or self.mu_response < 0:
            raise InvariantViolationError(
                "mu-response",
                f"mu_response должен быть >= 0, получено {self.mu_response}",
            )
        if self.mu_response > self.mu_probe:
            raise InvariantViolationError(
                "losses-attenuate",
                f"mu_response={self.mu_response} больше mu_probe={self.mu_probe}",
            )
        if not 0.0 < self.eta <= 1.0:
            raise InvariantViolationError(
                "eta", f"eta должен быть в (0, 1], получено {self.eta}"
            )
        if not self.delta_over_sigma > 0:
            raise InvariantViolationError(
                "delta", f"delta_over_sigma должен быть > 0, получено {self.delta_over_sigma}"
            )
        if not self.epsilon > 0:
            raise InvariantViolationError(
                "epsilon", f"epsilon должен быть > 0, получено {self.epsilon}"
            )
        # M = 0 допустимо как значение; сессия с ним отклоняется при запуске
        if self.n_queries < 0:
            raise InvariantViolationError(
                "n-queries", f"n_queries должен быть >= 0, получено {self.n_queries}"
            )

    @property
    def sigma(self) -> float:
        """Стандартное отклонение гомодинного измерения 1/sqrt(2 eta)."""
        return 1.0 / math.sqrt(2.0 * self.eta)

    @property
    def delta(self) -> float:
        """Ширина бина Delta в единицах квадратуры."""
        return self.delta_over_sigma * self.sigma


class PhaseProvenance(Enum):
    """Происхождение карты фаз откликов."""

    SYMMETRIC_DEFAULT = "symmetric-default"
    SEEDED_RANDOM = "seeded-random"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class ResponsePhaseMap:
    """
    Фазы откликов chi_k, k = 0..N-1.

    По умолчанию chi_k = 2 pi k / N: набор откликов повторяет симметрию
    набора пробных состояний.
    """

    phases: tuple[float, ...]
    provenance: PhaseProvenance = PhaseProvenance.EXPLICIT
    seed: int | None = None

    def __post_init__(self):
        if len(self.phases) < 2:
            raise InvariantViolationError(
                "phase-count", f"нужно не меньше двух фаз, получено {len(self.phases)}"
            )
        for k, phase in enumerate(self.phases):
            if not 0.0 <= phase < TWO_PI:
                raise InvariantViolationError(
                    "phase-range", f"chi_{k}={phase!r} вне [0, 2pi)"
                )
        if (self.provenance is PhaseProvenance.SEEDED_RANDOM) != (self.seed is not None):
            raise InvariantViolationError(
                "phase-seed", "seed задается только для seeded-random"
            )

    @classmethod
    def symmetric(cls, n_states: int) -> "ResponsePhaseMap":
        phases = tuple(TWO_PI * k / n_states for k in range(n_states))
        return cls(phases=phases, provenance=PhaseProvenance.SYMMETRIC_DEFAULT)

    @classmethod
    def seeded_random(cls, n_states: int, seed: int) -> "ResponsePhaseMap":
        rng = np.random.Generator(np.random.Philox(seed))
        phases = tuple(float(p) % TWO_PI for p in rng.uniform(0.0, TWO_PI, n_states))
        return cls(phases=phases, provenance=PhaseProvenance.SEEDED_RANDOM, seed=seed)

    @classmethod
    def explicit(cls, phases) -> "ResponsePhaseMap":
        return cls(phases=tuple(_wrap_phase(float(p)) for p in phases))

    @classmethod
    def build(
        cls, provenance: PhaseProvenance, n_states: int, seed: int | None = None
    ) -> "ResponsePhaseMap":
        """Карта фаз по названию происхождения (для конфигурации и CLI)."""
        if provenance is PhaseProvenance.SYMMETRIC_DEFAULT:
            return cls.symmetric(n_states)
        if provenance is PhaseProvenance.SEEDED_RANDOM:
            if seed is None:
                raise ValueError("❌ Для seeded-random нужен seed")
            return cls.seeded_random(n_states, seed)
        raise ValueError("❌ Явная карта фаз строится через ResponsePhaseMap.explicit")

    @property
    def n_states(self) -> int:
        return len(self.phases)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.phases, dtype=float)

    def rotated(self, offset: float) -> "ResponsePhaseMap":
        """Глобальный поворот всех фаз на offset."""
        return ResponsePhaseMap.explicit(p + offset for p in self.phases)


def _wrap_phase(phase: float) -> float:
    wrapped = phase % TWO_PI
    return 0.0 if wrapped >= TWO_PI else wrapped


def _check_phase_map(params: ProtocolParams, chi: ResponsePhaseMap) -> None:
    if chi.n_states != params.n_states:
        raise InvariantViolationError(
            "phase-count",
            f"карта фаз содержит {chi.n_states} значений, ожидалось {params.n_states}",
        )


def quadrature_mean(
    k: int, theta: QuadratureAngle, params: ProtocolParams, chi: ResponsePhaseMap
) -> float:
    """Среднее квадратуры отклика sqrt(2 mu_R) cos(chi_k - theta)."""
    _check_phase_map(params, chi)
    if not 0 <= k < params.n_states:
        raise IndexError(f"❌ k={k} вне диапазона 0..{params.n_states - 1}")
    return math.sqrt(2.0 * params.mu_response) * math.cos(chi.phases[k] - theta.theta)


def quadrature_means(params: ProtocolParams, chi: ResponsePhaseMap) -> np.ndarray:
    """
    Все средние квадратур сразу.

    Returns:
        Массив формы (2, N): строка 0 для X, строка 1 для Y
    """
    _check_phase_map(params, chi)
    phases = chi.as_array()
    thetas = np.array([angle.theta for angle in QuadratureAngle])
    return np.sqrt(2.0 * params.mu_response) * np.cos(phases[None, :] - thetas[:, None])


@dataclass(frozen=True)
class CRPRow:
    """Строка таблицы CRP: вызов k, маска и ожидаемые средние квадратур."""

    k: int
    mask_id: str
    mean_x: float
    mean_y: float


@dataclass(frozen=True)
class CRPTable:
    """Таблица пар вызов-отклик, хранимая сервером."""

    table_id: str
    n_states: int
    mu_response: float
    rows: tuple[CRPRow, ...] = field(default_factory=tuple)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """
        Проверка инвариантов таблицы.

        Raises:
            InvariantViolationError: Неверное число строк, ключи или радиус
        """
        if len(self.rows) != self.n_states:
            raise InvariantViolationError(
                "row-count", f"{len(self.rows)} строк при N={self.n_states}"
            )
        keys = [row.k for row in self.rows]
        if keys != list(range(self.n_states)):
            raise InvariantViolationError(
                "row-keys", f"ключи должны идти 0..{self.n_states - 1}"
            )
        expected = 2.0 * self.mu_response
        tolerance = CRP_RADIUS_TOLERANCE * max(1.0, expected)
        for row in self.rows:
            radius = row.mean_x**2 + row.mean_y**2
            if abs(radius - expected) > tolerance:
                raise InvariantViolationError(
                    "radius",
                    f"строка k={row.k}: <X>^2+<Y>^2={radius!r}, ожидалось {expected!r}",
                )

    def means(self) -> np.ndarray:
        """Средние в форме (2, N), как у quadrature_means."""
        return np.array(
            [[row.mean_x for row in self.rows], [row.mean_y for row in self.rows]]
        )


def mask_id_for(table_id: str, k: int) -> str:
    """Непрозрачный детерминированный идентификатор маски для вызова k."""
    digest = hashlib.sha256(f"{table_id}:{k}".encode()).hexdigest()
    return digest[:MASK_ID_LENGTH]


def build_crp_table(
    params: ProtocolParams, chi: ResponsePhaseMap, table_id: str
) -> CRPTable:
    """
    Построение таблицы CRP из параметров и карты фаз.

    Args:
        params: Параметры протокола
        chi: Карта фаз откликов длины N
        table_id: Идентификатор таблицы

    Returns:
        CRPTable: N строк с <X>_k и <Y>_k
    """
    if not table_id:
        raise ValueError("❌ table_id не может быть пустым")
    means = quadrature_means(params, chi)
    rows = tuple(
        CRPRow(
            k=k,
            mask_id=mask_id_for(table_id, k),
            mean_x=float(means[0, k]),
            mean_y=float(means[1, k]),
        )
        for k in range(params.n_states)
    )
    logger.debug(f"✅ Таблица CRP {table_id}: N={params.n_states}")
    return CRPTable(
        table_id=table_id,
        n_states=params.n_states,
        mu_response=params.mu_response,
        rows=rows,
    )


def write_crp_table(table: CRPTable, chi: ResponsePhaseMap, path: str | Path) -> None:
    """Запись таблицы CRP в текстовый файл (средние с 17 значащими цифрами)."""
    if chi.n_states != table.n_states:
        raise InvariantViolationError("phase-count", "карта фаз не совпадает с таблицей")
    if " " in table.table_id or "=" in table.table_id:
        raise ValueError(f"❌ table_id не должен содержать пробелы и '=': {table.table_id!r}")

    seed = "none" if chi.seed is None else str(chi.seed)
    lines = [
        f"{CRP_HEADER_PREFIX} table_id={table.table_id} n_states={table.n_states} "
        f"mu_response={table.mu_response!r} provenance={chi.provenance.value} "
        f"seed={seed}",
        "k,mask_id,mean_x,mean_y",
    ]
    lines.extend(
        f"{row.k},{row.mask_id},{row.mean_x:.17g},{row.mean_y:.17g}"
        for row in table.rows
    )

    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info(f"✅ Таблица CRP {table.table_id} записана в {out}")


def _parse_header(line: str) -> dict[str, str]:
    if not line.startswith(CRP_HEADER_PREFIX + " "):
        raise CRPFormatError("header", "нет заголовка #crp", line=1)
    fields: dict[str, str] = {}
    for token in line[len(CRP_HEADER_PREFIX) :].split():
        key, sep, value = token.partition("=")
        if not sep:
            raise CRPFormatError("header", f"поле без значения: {token!r}", line=1)
        fields[key] = value
    missing = {"table_id", "n_states", "mu_response", "provenance", "seed"} - fields.keys()
    if missing:
        raise CRPFormatError("header", f"нет полей {sorted(missing)}", line=1)
    return fields


def read_crp_table(path: str | Path) -> tuple[CRPTable, ResponsePhaseMap]:
    """
    Чтение и проверка файла таблицы CRP.

    Returns:
        Таблица и восстановленная карта фаз

    Raises:
        CRPFormatError: Файл поврежден; сообщение называет нарушенный инвариант
    """
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise CRPFormatError("header", "пустой файл")
    header = _parse_header(lines[0])

    try:
        n_states = int(header["n_states"])
        mu_response = float(header["mu_response"])
        provenance = PhaseProvenance(header["provenance"])
        seed = None if header["seed"] == "none" else int(header["seed"])
    except ValueError as e:
        raise CRPFormatError("header", f"некорректное значение: {e}", line=1) from None

    rows: list[CRPRow] = []
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.startswith("k,"):
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise CRPFormatError("row-format", f"ожидалось 4 поля: {line!r}", line=number)
        try:
            k = int(parts[0])
            row = CRPRow(k=k, mask_id=parts[1], mean_x=float(parts[2]), mean_y=float(parts[3]))
        except ValueError as e:
            raise CRPFormatError("row-format", str(e), line=number) from None
        if row.mask_id != mask_id_for(header["table_id"], k):
            raise CRPFormatError("mask-id", f"маска строки k={k} не совпадает", line=number)
        rows.append(row)

    try:
        table = CRPTable(
            table_id=header["table_id"],
            n_states=n_states,
            mu_response=mu_response,
            rows=tuple(rows),
        )
    except InvariantViolationError as e:
        raise CRPFormatError(e.invariant, str(e)) from None

    chi = _phase_map_for(table, provenance, seed)
    return table, chi


def _phase_map_for(
    table: CRPTable, provenance: PhaseProvenance, seed: int | None
) -> ResponsePhaseMap:
    if provenance is PhaseProvenance.EXPLICIT:
        if table.mu_response <= 0:
            raise CRPFormatError(
                "phase-recovery", "явную карту фаз нельзя восстановить при mu_response=0"
            )
        return ResponsePhaseMap.explicit(
            math.atan2(row.mean_y, row.mean_x) for row in table.rows
        )

    try:
        chi = ResponsePhaseMap.build(provenance, table.n_states, seed)
    except (ValueError, InvariantViolationError) as e:
        raise CRPFormatError("provenance", str(e)) from None

    try:
        check_phase_consistency(table, chi)
    except InvariantViolationError as e:
        raise CRPFormatError(e.invariant, str(e)) from None
    return chi


def check_phase_consistency(table: CRPTable, chi: ResponsePhaseMap) -> None:
    """
    Проверка, что средние таблицы получены из карты фаз chi.

    Raises:
        InvariantViolationError: Длина карты или одна из строк не совпадает
    """
    if chi.n_states != table.n_states:
        raise InvariantViolationError(
            "phase-count",
            f"карта фаз содержит {chi.n_states} значений, ожидалось {table.n_states}",
        )
    params = ProtocolParams(
        n_states=table.n_states,
        mu_probe=table.mu_response,
        mu_response=table.mu_response,
    )
    deviation = np.abs(table.means() - quadrature_means(params, chi)).max(axis=0)
    tolerance = CRP_RADIUS_TOLERANCE * max(1.0, math.sqrt(2.0 * table.mu_response))
    bad = np.flatnonzero(deviation > tolerance)
    if bad.size:
        raise InvariantViolationError(
            "phase-consistency",
            f"строка k={int(bad[0])} не соответствует карте {chi.provenance.value}",
        )
