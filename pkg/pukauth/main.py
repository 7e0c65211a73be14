"""Главный модуль - точка входа командной строки."""

import argparse
import logging
import os
import sys
from pathlib import Path

from dotenv import load_dotenv

from pukauth import __version__
from pukauth.attacks import AttackKind
from pukauth.commands.formatter import OutputFormatter
from pukauth.commands.simulate import SIMULATION_COLUMNS, cmd_simulate
from pukauth.commands.sweep import SweepSpec, build_families, cmd_sweep, parse_n_grid
from pukauth.commands.table import cmd_table
from pukauth.commands.threshold import cmd_threshold, write_threshold_reports
from pukauth.config import OUTPUT_FORMATS, AnalysisConfig, load_config
from pukauth.model import PhaseProvenance, ProtocolParams, ResponsePhaseMap
from pukauth.simulate.session import AdversaryMode, SessionConfig

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def setup_logging(verbose: bool = False) -> None:
    """
    Настройка логирования: stderr и, если задан LOG_PATH, файл.

    stdout остается за табличным выводом.
    """
    level_name = "DEBUG" if verbose else os.getenv("LOG_LEVEL", "INFO").upper()
    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stderr)]

    log_path = os.getenv("LOG_PATH")
    if log_path:
        Path(log_path).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_path, encoding="utf-8"))

    logging.basicConfig(
        format=LOG_FORMAT,
        level=getattr(logging, level_name, logging.INFO),
        handlers=handlers,
        force=True,
    )


def _add_protocol_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("параметры протокола")
    group.add_argument("--mu-p", type=float, nargs="+", help="mu_P (можно несколько)")
    response = group.add_mutually_exclusive_group()
    response.add_argument("--mu-r", type=float, nargs="+", help="mu_R (можно несколько)")
    response.add_argument(
        "--loss-ratio", type=float, nargs="+", help="mu_R / mu_P (можно несколько)"
    )
    group.add_argument("--eta", type=float, help="эффективность детектирования")
    group.add_argument("--delta-sigma", type=float, help="ширина бина Delta / sigma")
    group.add_argument("--epsilon", type=float, help="параметр безопасности epsilon")
    group.add_argument("--queries", type=int, help="число запросов M")
    group.add_argument(
        "--phases",
        choices=[PhaseProvenance.SYMMETRIC_DEFAULT.value, PhaseProvenance.SEEDED_RANDOM.value],
        default=PhaseProvenance.SYMMETRIC_DEFAULT.value,
        help="модель фаз откликов",
    )
    group.add_argument("--phase-seed", type=int, help="зерно для seeded-random")


def _add_output_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=OUTPUT_FORMATS, help="формат вывода")
    parser.add_argument("--out", help="файл вывода (по умолчанию stdout)")


def _add_grid_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n-grid", help='сетка N: "2:300", "2:300:2" или "2,4,8"')
    parser.add_argument(
        "--attacks",
        nargs="*",
        help="атаки (dh, ud, sr); без значений - только нижняя граница",
    )
    parser.add_argument(
        "--no-lower-bound", action="store_true", help="не считать нижнюю границу"
    )
    parser.add_argument("--workers", type=int, help="число процессов")
    parser.add_argument("--dh-tol", type=float, help="точность квадратуры DH")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pukauth",
        description="Анализ стойкости аутентификации PUK к атакам перехвата",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="путь к config.yml")
    parser.add_argument("-v", "--verbose", action="store_true", help="DEBUG-логирование")
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="перебор по N")
    _add_protocol_args(sweep)
    _add_grid_args(sweep)
    _add_output_args(sweep)

    threshold = sub.add_parser("threshold", help="порог N для D > 2 epsilon")
    _add_protocol_args(threshold)
    _add_grid_args(threshold)
    _add_output_args(threshold)
    threshold.add_argument("--two-epsilon", type=float, help="порог (по умолчанию 2 epsilon)")

    simulate = sub.add_parser("simulate", help="моделирование сессий")
    _add_protocol_args(simulate)
    _add_output_args(simulate)
    simulate.add_argument("--n", type=int, required=True, help="число состояний N")
    simulate.add_argument("--attack", default="none", help="dh, ud, sr или none")
    simulate.add_argument(
        "--adversary-mode", choices=[m.value for m in AdversaryMode], help="режим противника"
    )
    simulate.add_argument("--seed", type=int, help="главное зерно")
    simulate.add_argument("--repetitions", type=int, help="число сессий")
    simulate.add_argument("--workers", type=int, help="число процессов")
    simulate.add_argument("--transcripts", help="каталог для транскриптов")

    table = sub.add_parser("table", help="таблицы CRP")
    actions = table.add_subparsers(dest="action", required=True)
    generate = actions.add_parser("generate", help="создать файл таблицы")
    _add_protocol_args(generate)
    generate.add_argument("--n", type=int, required=True, help="число состояний N")
    generate.add_argument("--table-id", required=True, help="идентификатор таблицы")
    generate.add_argument("--out", required=True, help="файл таблицы")
    inspect = actions.add_parser("inspect", help="проверить файл таблицы")
    inspect.add_argument("path")
    enroll = actions.add_parser("enroll", help="зарегистрировать таблицу в базе сервера")
    enroll.add_argument("path")
    enroll.add_argument("--db", help="путь к базе данных")
    listing = actions.add_parser("list", help="таблицы в базе сервера")
    listing.add_argument("--db", help="путь к базе данных")
    show = actions.add_parser("show", help="строки зарегистрированной таблицы")
    show.add_argument("table_id")
    show.add_argument("--db", help="путь к базе данных")
    remove = actions.add_parser("remove", help="снять таблицу с регистрации")
    remove.add_argument("table_id")
    remove.add_argument("--db", help="путь к базе данных")
    return parser


def _pick(cli_value, config_value):
    """Флаг командной строки важнее конфигурации."""
    return config_value if cli_value is None else cli_value


def _families(args: argparse.Namespace, config: AnalysisConfig) -> tuple[tuple[float, float], ...]:
    protocol = config.protocol
    mu_probes = args.mu_p or [protocol.mu_probe]
    if args.mu_r:
        return build_families(mu_probes, mu_responses=args.mu_r)
    if args.loss_ratio:
        return build_families(mu_probes, loss_ratios=args.loss_ratio)
    if protocol.mu_response is not None:
        return build_families(mu_probes, mu_responses=[protocol.mu_response])
    return build_families(mu_probes, loss_ratios=[protocol.loss_ratio])


def _single_family(args: argparse.Namespace, config: AnalysisConfig) -> tuple[float, float]:
    families = _families(args, config)
    if len(families) != 1:
        raise ValueError("❌ Для этой команды нужно ровно одно значение mu_P и mu_R")
    return families[0]


def _params(args: argparse.Namespace, config: AnalysisConfig, n: int) -> ProtocolParams:
    mu_p, mu_r = _single_family(args, config)
    protocol = config.protocol
    return ProtocolParams(
        n_states=n,
        mu_probe=mu_p,
        mu_response=mu_r,
        eta=_pick(args.eta, protocol.eta),
        delta_over_sigma=_pick(args.delta_sigma, protocol.delta_over_sigma),
        epsilon=_pick(args.epsilon, protocol.epsilon),
        n_queries=_pick(args.queries, protocol.n_queries),
    )


def _phase_map(args: argparse.Namespace, n: int) -> ResponsePhaseMap:
    return ResponsePhaseMap.build(PhaseProvenance(args.phases), n, args.phase_seed)


def _sweep_spec(args: argparse.Namespace, config: AnalysisConfig) -> SweepSpec:
    protocol = config.protocol
    sweep = config.sweep
    attacks = (
        tuple(sweep.attacks)
        if args.attacks is None
        else tuple(AttackKind.from_label(a) for a in args.attacks)
    )
    return SweepSpec(
        n_values=parse_n_grid(_pick(args.n_grid, sweep.n_grid)),
        families=_families(args, config),
        attacks=attacks,
        include_lower_bound=sweep.include_lower_bound and not args.no_lower_bound,
        eta=_pick(args.eta, protocol.eta),
        delta_over_sigma=_pick(args.delta_sigma, protocol.delta_over_sigma),
        epsilon=_pick(args.epsilon, protocol.epsilon),
        n_queries=_pick(args.queries, protocol.n_queries),
        phase_provenance=PhaseProvenance(args.phases),
        phase_seed=args.phase_seed,
        dh_tolerance=_pick(args.dh_tol, sweep.dh_tolerance),
        workers=_pick(args.workers, sweep.workers),
        output_format=_pick(args.format, config.output.format),
        output_path=_pick(args.out, config.output.path),
    )


def run_sweep(args: argparse.Namespace, config: AnalysisConfig) -> None:
    cmd_sweep(_sweep_spec(args, config))


def run_threshold(args: argparse.Namespace, config: AnalysisConfig) -> None:
    spec = _sweep_spec(args, config)
    two_epsilon = _pick(args.two_epsilon, 2.0 * spec.epsilon)
    reports = cmd_threshold(spec, two_epsilon)
    write_threshold_reports(spec, reports, two_epsilon)


def run_simulate(args: argparse.Namespace, config: AnalysisConfig) -> None:
    params = _params(args, config, args.n)
    attack = None if args.attack == "none" else AttackKind.from_label(args.attack)
    mode = (
        AdversaryMode(args.adversary_mode)
        if args.adversary_mode
        else config.simulation.adversary_mode
    )
    seed = _pick(args.seed, config.simulation.seed)
    session = SessionConfig(
        params=params,
        chi=_phase_map(args, args.n),
        attack=attack,
        adversary_mode=mode if attack is not None else AdversaryMode.CONFUSION_SAMPLING,
        seed=seed,
    )
    repetitions = _pick(args.repetitions, config.simulation.repetitions)
    summary = cmd_simulate(
        session,
        repetitions,
        workers=_pick(args.workers, config.sweep.workers),
        transcript_dir=args.transcripts,
    )

    formatter = OutputFormatter(
        "simulate",
        {
            "n": args.n,
            "mu_p": params.mu_probe,
            "mu_r": params.mu_response,
            "eta": params.eta,
            "delta_over_sigma": params.delta_over_sigma,
            "epsilon": params.epsilon,
            "queries": params.n_queries,
            "attack": summary.attack,
            "adversary_mode": summary.adversary_mode,
            "repetitions": repetitions,
        },
        seed=seed,
    )
    formatter.write(
        SIMULATION_COLUMNS,
        [summary.row()],
        _pick(args.format, config.output.format),
        _pick(args.out, config.output.path),
    )


def run_table(args: argparse.Namespace, config: AnalysisConfig) -> None:
    database_path = getattr(args, "db", None) or config.storage.database_path
    if args.action == "generate":
        rows = cmd_table(
            "generate",
            {
                "params": _params(args, config, args.n),
                "chi": _phase_map(args, args.n),
                "table_id": args.table_id,
                "path": args.out,
            },
        )
    else:
        rows = cmd_table(
            args.action,
            {
                "path": getattr(args, "path", None),
                "table_id": getattr(args, "table_id", None),
                "database_path": database_path,
            },
        )

    columns = list(rows[0].keys()) if rows else ["table_id"]
    OutputFormatter(f"table {args.action}", {}).write(columns, rows, "csv")


COMMANDS = {
    "sweep": run_sweep,
    "threshold": run_threshold,
    "simulate": run_simulate,
    "table": run_table,
}


def main(argv: list[str] | None = None) -> int:
    """
    Главная функция.

    Returns:
        int: Код выхода (0 - успех, 1 - ошибка)
    """
    # Загрузка переменных окружения
    load_dotenv()

    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)

    try:
        config = load_config(args.config)
        COMMANDS[args.command](args, config)
    except FileNotFoundError as e:
        logger.error(f"❌ Файл не найден: {e}")
        return 1
    except KeyError as e:
        logger.error(f"❌ Не найдено: {e}")
        return 1
    except (ValueError, RuntimeError) as e:
        message = str(e)
        logger.error(message if message.startswith("❌") else f"❌ {message}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
