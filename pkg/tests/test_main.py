import csv
import io
import json
from pathlib import Path

import pytest

from pukauth.commands.sweep import BASE_COLUMNS, BOUND_COLUMNS
from pukauth.main import build_parser, main

pytestmark = pytest.mark.usefixtures("restore_logging")


def read_csv(path: Path) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(path.read_text(encoding="utf-8"))))


def test_parser_requires_command() -> None:
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_sweep_to_file(tmp_path: Path, clean_env: pytest.MonkeyPatch) -> None:
    """sweep с явной сеткой пишет CSV и завершается с кодом 0."""
    out = tmp_path / "sweep.csv"
    code = main(
        [
            "sweep",
            "--mu-p", "20",
            "--mu-r", "1",
            "--n-grid", "2,4",
            "--attacks", "ud", "sr",
            "--out", str(out),
        ]
    )
    assert code == 0
    rows = read_csv(out)
    assert [row["n"] for row in rows] == ["2", "4"]
    assert "d_ud" in rows[0] and "d_sr" in rows[0] and "d_dh" not in rows[0]


def test_sweep_lower_bound_only(tmp_path: Path, clean_env: pytest.MonkeyPatch) -> None:
    """--attacks без значений оставляет только нижнюю границу."""
    out = tmp_path / "low.csv"
    code = main(
        ["sweep", "--mu-p", "20", "--loss-ratio", "0.05", "--n-grid", "2:4", "--attacks",
         "--out", str(out)]
    )
    assert code == 0
    rows = read_csv(out)
    assert list(rows[0]) == BASE_COLUMNS + BOUND_COLUMNS
    assert float(rows[0]["mu_r"]) == 1.0


def test_sweep_rejects_invalid_grid(tmp_path: Path, clean_env: pytest.MonkeyPatch) -> None:
    out = tmp_path / "bad.csv"
    code = main(["sweep", "--mu-p", "20", "--mu-r", "1", "--n-grid", "4,2", "--out", str(out)])
    assert code == 1
    assert not out.exists()


def test_sweep_uses_config_file(tmp_path: Path, clean_env: pytest.MonkeyPatch) -> None:
    """Значения из config.yml используются, если флаги не заданы."""
    out = tmp_path / "from_config.json"
    config_file = tmp_path / "config.yml"
    config_file.write_text(
        f"""
protocol:
  mu_probe: 20
  mu_response: 1
sweep:
  n_grid: [2, 3]
  attacks: [sr]
  include_lower_bound: false
output:
  format: json
  path: "{out.as_posix()}"
""",
        encoding="utf-8",
    )
    assert main(["--config", str(config_file), "sweep"]) == 0

    payload = json.loads(out.read_text(encoding="utf-8"))
    assert payload["metadata"]["parameters"]["families"] == [[20.0, 1.0]]
    assert [row["n"] for row in payload["rows"]] == [2, 3]


def test_threshold_json(tmp_path: Path, clean_env: pytest.MonkeyPatch) -> None:
    out = tmp_path / "threshold.json"
    code = main(
        [
            "threshold",
            "--mu-p", "4",
            "--mu-r", "1",
            "--n-grid", "2,4",
            "--two-epsilon", "0",
            "--format", "json",
            "--out", str(out),
        ]
    )
    assert code == 0
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert payload["metadata"]["parameters"]["two_epsilon"] == 0.0
    assert {row["quantity"] for row in payload["rows"]} == {"dh", "ud", "sr", "low"}
    assert all(row["n_first"] == 2 for row in payload["rows"])


def test_simulate_reproducible(tmp_path: Path, clean_env: pytest.MonkeyPatch) -> None:
    """Два запуска с одним зерном дают одинаковый вывод."""
    outputs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        code = main(
            [
                "simulate",
                "--n", "4",
                "--mu-p", "4",
                "--mu-r", "1",
                "--queries", "500",
                "--attack", "sr",
                "--seed", "5",
                "--repetitions", "2",
                "--out", str(out),
            ]
        )
        assert code == 0
        outputs.append(out.read_text(encoding="utf-8"))
    assert outputs[0] == outputs[1]
    (row,) = read_csv(tmp_path / "a.csv")
    assert row["attack"] == "sr"
    assert row["repetitions"] == "2"


def test_simulate_rejects_physical_mode_without_dh(clean_env: pytest.MonkeyPatch) -> None:
    code = main(
        ["simulate", "--n", "4", "--mu-p", "4", "--mu-r", "1", "--attack", "sr",
         "--adversary-mode", "physical-dh"]
    )
    assert code == 1


def test_table_generate_inspect_enroll(
    tmp_path: Path, clean_env: pytest.MonkeyPatch, capsys: pytest.CaptureFixture
) -> None:
    """Полный цикл таблицы CRP через командную строку."""
    table = tmp_path / "key.crp"
    db = tmp_path / "crp.db"
    assert main(
        ["table", "generate", "--n", "4", "--mu-p", "600", "--mu-r", "30",
         "--table-id", "key-1", "--out", str(table)]
    ) == 0
    assert main(["table", "inspect", str(table)]) == 0
    assert main(["table", "enroll", str(table), "--db", str(db)]) == 0
    capsys.readouterr()

    assert main(["table", "list", "--db", str(db)]) == 0
    listing = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [row["table_id"] for row in listing] == ["key-1"]

    assert main(["table", "show", "key-1", "--db", str(db)]) == 0
    shown = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [int(row["k"]) for row in shown] == [0, 1, 2, 3]

    assert main(["table", "remove", "key-1", "--db", str(db)]) == 0
    capsys.readouterr()
    assert main(["table", "show", "key-1", "--db", str(db)]) == 1


def test_table_inspect_tampered(tmp_path: Path, clean_env: pytest.MonkeyPatch) -> None:
    """Поврежденный файл дает код 1."""
    table = tmp_path / "key.crp"
    assert main(
        ["table", "generate", "--n", "4", "--mu-p", "600", "--mu-r", "30",
         "--table-id", "key-1", "--out", str(table)]
    ) == 0
    lines = table.read_text(encoding="utf-8").splitlines()
    table.write_text("\n".join(lines[:-1]) + "\n", encoding="utf-8")

    assert main(["table", "inspect", str(table)]) == 1


def test_missing_config_file(tmp_path: Path, clean_env: pytest.MonkeyPatch) -> None:
    assert main(["--config", str(tmp_path / "missing.yml"), "table", "list"]) == 1


def test_log_path_env(tmp_path: Path, clean_env: pytest.MonkeyPatch) -> None:
    """LOG_PATH дублирует лог в файл."""
    log_file = tmp_path / "logs" / "pukauth.log"
    clean_env.setenv("LOG_PATH", str(log_file))
    assert main(["table", "list", "--db", str(tmp_path / "missing.db")]) == 0
    assert "не найдена" in log_file.read_text(encoding="utf-8")
