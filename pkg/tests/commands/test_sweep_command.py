import csv
import io
import json
import math

import pytest

from pukauth.attacks import AttackKind
from pukauth.commands.sweep import (
    BASE_COLUMNS,
    BOUND_COLUMNS,
    SweepSpec,
    build_families,
    cmd_sweep,
    compute_sweep_rows,
    evaluate_point,
    parse_n_grid,
)
from pukauth.model import PhaseProvenance


@pytest.mark.parametrize(
    ("text", "expected"),
    [
        ("2:6", (2, 3, 4, 5, 6)),
        ("2:10:4", (2, 6, 10)),
        (" 2,4,8 ", (2, 4, 8)),
        ("16", (16,)),
        ("2:2", (2,)),
    ],
)
def test_parse_n_grid(text: str, expected: tuple[int, ...]) -> None:
    """Диапазоны включают правую границу."""
    assert parse_n_grid(text) == expected


@pytest.mark.parametrize("text", ["", "1:5", "5:2", "2:8:0", "2,2,4", "8,4", "a:b", "2:4:1:1"])
def test_parse_n_grid_rejects_invalid(text: str) -> None:
    """Пустая, не возрастающая или с N < 2 сетка отклоняется."""
    with pytest.raises(ValueError):
        parse_n_grid(text)


def test_build_families() -> None:
    """Фиксированное отношение и явные mu_R."""
    assert build_families([100.0, 600.0], loss_ratios=[0.05]) == ((100.0, 5.0), (600.0, 30.0))
    assert build_families([600.0], mu_responses=[1.0, 30.0]) == ((600.0, 1.0), (600.0, 30.0))


@pytest.mark.parametrize(
    "kwargs",
    [
        {},
        {"mu_responses": [1.0], "loss_ratios": [0.1]},
        {"mu_responses": [700.0]},
        {"loss_ratios": [1.5]},
    ],
)
def test_build_families_rejects_invalid(kwargs: dict) -> None:
    with pytest.raises(ValueError):
        build_families([600.0], **kwargs)


def test_sweep_spec_validation() -> None:
    """Сетка, семейства и число процессов проверяются при создании."""
    with pytest.raises(ValueError):
        SweepSpec(n_values=(4, 2), families=((600.0, 30.0),))
    with pytest.raises(ValueError):
        SweepSpec(n_values=(2, 4), families=())
    with pytest.raises(ValueError):
        SweepSpec(n_values=(2, 4), families=((600.0, 30.0),), workers=0)


def test_two_state_unambiguous_row() -> None:
    """N = 2: P_err атаки UD равна e^{-2 mu_P} / 2."""
    spec = SweepSpec(n_values=(2,), families=((1.0, 0.5),), attacks=(AttackKind.UNAMBIGUOUS,))
    row = evaluate_point(spec, 2, 1.0, 0.5)
    assert row["p_err_ud"] == pytest.approx(0.5 * math.exp(-2.0), rel=1e-9)
    assert row["d_ud"] >= 0.0
    assert row["p_in_err_ud"] < row["p_in_honest"]


def test_columns_without_attacks() -> None:
    """Без атак остаются только базовые колонки и нижняя граница."""
    spec = SweepSpec(n_values=(2, 4), families=((20.0, 1.0),), attacks=())
    assert spec.columns() == BASE_COLUMNS + BOUND_COLUMNS

    rows = compute_sweep_rows(spec)
    assert [row["n"] for row in rows] == [2, 4]
    assert set(rows[0]) == set(BASE_COLUMNS + BOUND_COLUMNS)


def test_columns_without_lower_bound() -> None:
    spec = SweepSpec(
        n_values=(2,),
        families=((20.0, 1.0),),
        attacks=(AttackKind.DUAL_HOMODYNE,),
        include_lower_bound=False,
    )
    assert spec.columns() == BASE_COLUMNS + ["p_err_dh", "d_dh", "p_in_err_dh"]


def test_rows_follow_family_then_n_order() -> None:
    """Строки идут по семействам, внутри семейства по N."""
    spec = SweepSpec(
        n_values=(2, 4, 8),
        families=((20.0, 1.0), (100.0, 5.0)),
        attacks=(AttackKind.SQUARE_ROOT,),
    )
    rows = compute_sweep_rows(spec)
    assert [(row["mu_p"], row["n"]) for row in rows] == [
        (20.0, 2), (20.0, 4), (20.0, 8), (100.0, 2), (100.0, 4), (100.0, 8),
    ]


def test_attacks_never_beat_lower_bound() -> None:
    """Для каждой атаки D >= D_low."""
    spec = SweepSpec(n_values=(2, 4, 8, 16, 32), families=((20.0, 1.0),))
    for row in compute_sweep_rows(spec):
        for kind in AttackKind:
            assert row[f"d_{kind.short}"] >= row["d_low"] - 1e-10


def test_workers_do_not_change_rows() -> None:
    """Результат не зависит от числа процессов."""
    base = {
        "n_values": (2, 3, 5, 8),
        "families": ((20.0, 1.0), (600.0, 30.0)),
        "attacks": (AttackKind.UNAMBIGUOUS, AttackKind.SQUARE_ROOT),
    }
    assert compute_sweep_rows(SweepSpec(**base)) == compute_sweep_rows(
        SweepSpec(**base, workers=2)
    )


def test_seeded_phases_are_reproducible() -> None:
    base = {
        "n_values": (4, 6),
        "families": ((20.0, 1.0),),
        "attacks": (AttackKind.SQUARE_ROOT,),
        "phase_provenance": PhaseProvenance.SEEDED_RANDOM,
        "phase_seed": 5,
    }
    assert compute_sweep_rows(SweepSpec(**base)) == compute_sweep_rows(SweepSpec(**base))


def test_cmd_sweep_csv_output(tmp_path, capsys: pytest.CaptureFixture) -> None:
    """CSV в файл: заголовок колонок и 17 значащих цифр."""
    out = tmp_path / "sweep.csv"
    spec = SweepSpec(
        n_values=(2, 4),
        families=((20.0, 1.0),),
        attacks=(AttackKind.UNAMBIGUOUS,),
        output_path=str(out),
    )
    rows = cmd_sweep(spec)

    text = out.read_text(encoding="utf-8")
    assert capsys.readouterr().out == ""
    parsed = list(csv.DictReader(io.StringIO(text)))
    assert list(parsed[0]) == spec.columns()
    assert [int(r["n"]) for r in parsed] == [2, 4]
    for written, computed in zip(parsed, rows, strict=True):
        assert float(written["p_in_honest"]) == computed["p_in_honest"]
        assert float(written["d_low"]) == computed["d_low"]

    cmd_sweep(spec)
    assert out.read_text(encoding="utf-8") == text


def test_cmd_sweep_json_to_stdout(capsys: pytest.CaptureFixture) -> None:
    """JSON: метаданные запуска и строки."""
    spec = SweepSpec(
        n_values=(2,),
        families=((20.0, 1.0),),
        attacks=(AttackKind.SQUARE_ROOT,),
        include_lower_bound=False,
        output_format="json",
    )
    rows = cmd_sweep(spec)

    payload = json.loads(capsys.readouterr().out)
    assert payload["metadata"]["command"] == "sweep"
    assert payload["metadata"]["parameters"]["attacks"] == ["square-root-measurement"]
    assert payload["metadata"]["parameters"]["n_values"] == [2]
    assert payload["rows"] == rows
