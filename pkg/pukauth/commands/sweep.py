"""Перебор по сетке N: вероятности ошибок, отклонения D и нижняя граница."""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any

from pukauth.attacks import AttackKind, confusion_for
from pukauth.bounds import d_low
from pukauth.commands.formatter import OutputFormatter
from pukauth.constants import DH_TOLERANCE_DEFAULT
from pukauth.model import PhaseProvenance, ProtocolParams, ResponsePhaseMap
from pukauth.timing import StageTimer
from pukauth.verifier import p_in_attacked, p_in_honest

logger = logging.getLogger(__name__)

BASE_COLUMNS = ["n", "mu_p", "mu_r", "p_in_honest"]
BOUND_COLUMNS = ["holevo_chi", "p_err_low", "p_max_in_error", "d_low", "d_low_raw"]


def parse_n_grid(text: str) -> tuple[int, ...]:
    """
    Разбор сетки N.

    Форматы: "a:b" (включительно), "a:b:step" и список "2,4,8".

    Raises:
        ValueError: Сетка пуста, не возрастает строго или содержит N < 2
    """
    text = text.strip()
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError(f"ожидалось a:b или a:b:step, получено {text!r}")
            start, stop = parts[0], parts[1]
            step = parts[2] if len(parts) == 3 else 1
            if step < 1:
                raise ValueError(f"шаг должен быть >= 1, получено {step}")
            values = tuple(range(start, stop + 1, step))
        else:
            values = tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError as e:
        raise ValueError(f"❌ Некорректная сетка N: {e}") from None
    validate_n_grid(values)
    return values


def validate_n_grid(values: tuple[int, ...]) -> None:
    if not values:
        raise ValueError("❌ Сетка N пуста")
    if values[0] < 2:
        raise ValueError(f"❌ Все N должны быть >= 2, получено {values[0]}")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError("❌ Сетка N должна строго возрастать")


def build_families(
    mu_probes: list[float],
    mu_responses: list[float] | None = None,
    loss_ratios: list[float] | None = None,
) -> tuple[tuple[float, float], ...]:
    """
    Семейства (mu_P, mu_R): фиксированное отношение или набор mu_R при каждом mu_P.

    Raises:
        ValueError: Заданы оба способа или mu_R > mu_P
    """
    if (mu_responses is None) == (loss_ratios is None):
        raise ValueError("❌ Укажите либо mu_R, либо loss_ratio")
    families = []
    for mu_p in mu_probes:
        if mu_responses is not None:
            families.extend((mu_p, mu_r) for mu_r in mu_responses)
        else:
            families.extend((mu_p, ratio * mu_p) for ratio in loss_ratios)
    for mu_p, mu_r in families:
        if not 0.0 <= mu_r <= mu_p:
            raise ValueError(f"❌ Требуется 0 <= mu_R <= mu_P, получено mu_P={mu_p}, mu_R={mu_r}")
    return tuple(families)


@dataclass(frozen=True)
class SweepSpec:
    """
    Описание перебора.

    Attributes:
        n_values: Строго возрастающая сетка N
        families: Пары (mu_P, mu_R)
        attacks: Атаки для расчета
        include_lower_bound: Добавить колонки нижней границы
        output_format: csv или json
        output_path: Файл вывода (None - stdout)
    """

    n_values: tuple[int, ...]
    families: tuple[tuple[float, float], ...]
    attacks: tuple[AttackKind, ...] = tuple(AttackKind)
    include_lower_bound: bool = True
    eta: float = 0.5
    delta_over_sigma: float = 2.0
    epsilon: float = 7.5e-4
    n_queries: int = 100_000
    phase_provenance: PhaseProvenance = PhaseProvenance.SYMMETRIC_DEFAULT
    phase_seed: int | None = None
    dh_tolerance: float = DH_TOLERANCE_DEFAULT
    workers: int = 1
    output_format: str = "csv"
    output_path: str | None = None

    def __post_init__(self):
        validate_n_grid(self.n_values)
        if not self.families:
            raise ValueError("❌ Не задано ни одного семейства (mu_P, mu_R)")
        if self.workers < 1:
            raise ValueError("❌ workers должен быть >= 1")

    def params_for(self, n: int, mu_p: float, mu_r: float) -> ProtocolParams:
        return ProtocolParams(
            n_states=n,
            mu_probe=mu_p,
            mu_response=mu_r,
            eta=self.eta,
            delta_over_sigma=self.delta_over_sigma,
            epsilon=self.epsilon,
            n_queries=self.n_queries,
        )

    def phase_map_for(self, n: int) -> ResponsePhaseMap:
        return ResponsePhaseMap.build(self.phase_provenance, n, self.phase_seed)

    def columns(self) -> list[str]:
        columns = list(BASE_COLUMNS)
        for kind in self.attacks:
            columns += [f"p_err_{kind.short}", f"d_{kind.short}", f"p_in_err_{kind.short}"]
        if self.include_lower_bound:
            columns += BOUND_COLUMNS
        return columns

    def parameters(self) -> dict[str, Any]:
        """Параметры для заголовка JSON."""
        return {
            "n_values": list(self.n_values),
            "families": [list(f) for f in self.families],
            "attacks": [kind.value for kind in self.attacks],
            "include_lower_bound": self.include_lower_bound,
            "eta": self.eta,
            "delta_over_sigma": self.delta_over_sigma,
            "epsilon": self.epsilon,
            "phase_provenance": self.phase_provenance.value,
            "phase_seed": self.phase_seed,
            "dh_tolerance": self.dh_tolerance,
        }


def evaluate_point(spec: SweepSpec, n: int, mu_p: float, mu_r: float) -> dict[str, Any]:
    """
    Одна строка перебора для (N, mu_P, mu_R).

    Returns:
        Dict: Значения колонок spec.columns()
    """
    params = spec.params_for(n, mu_p, mu_r)
    chi = spec.phase_map_for(n)
    row: dict[str, Any] = {
        "n": n,
        "mu_p": float(mu_p),
        "mu_r": float(mu_r),
        "p_in_honest": p_in_honest(params),
    }
    for kind in spec.attacks:
        stats = p_in_attacked(confusion_for(kind, params, spec.dh_tolerance), params, chi)
        row[f"p_err_{kind.short}"] = stats.p_err
        row[f"d_{kind.short}"] = stats.deviation
        row[f"p_in_err_{kind.short}"] = stats.p_in_given_error
    if spec.include_lower_bound:
        report = d_low(params, chi)
        row.update({column: getattr(report, column) for column in BOUND_COLUMNS})
    logger.debug(f"📊 Точка N={n}, mu_P={mu_p}, mu_R={mu_r} рассчитана")
    return row


def _evaluate(args: tuple[SweepSpec, int, float, float]) -> dict[str, Any]:
    return evaluate_point(*args)


def compute_sweep_rows(spec: SweepSpec) -> list[dict[str, Any]]:
    """Все строки перебора в порядке (семейство, N) независимо от числа процессов."""
    tasks = [
        (spec, n, mu_p, mu_r) for mu_p, mu_r in spec.families for n in spec.n_values
    ]
    with StageTimer(f"sweep ({len(tasks)} точек)") as timer:
        if spec.workers == 1 or len(tasks) == 1:
            rows = [_evaluate(task) for task in tasks]
        else:
            with ProcessPoolExecutor(max_workers=spec.workers) as executor:
                rows = list(executor.map(_evaluate, tasks))
        timer.checkpoint("grid evaluation")
    return rows


def cmd_sweep(spec: SweepSpec) -> list[dict[str, Any]]:
    """
    Команда sweep: строки по сетке с выводом в CSV или JSON.

    Returns:
        List[Dict]: Рассчитанные строки
    """
    rows = compute_sweep_rows(spec)
    formatter = OutputFormatter("sweep", spec.parameters())
    formatter.write(spec.columns(), rows, spec.output_format, spec.output_path)
    logger.info(f"✅ sweep: {len(rows)} строк")
    return rows

