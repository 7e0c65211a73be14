import csv
import io

import pytest

from pukauth.attacks import AttackKind
from pukauth.commands.sweep import SweepSpec, compute_sweep_rows
from pukauth.commands.threshold import (
    LOWER_BOUND_LABEL,
    THRESHOLD_COLUMNS,
    Crossing,
    cmd_threshold,
    find_crossing,
    write_threshold_reports,
)


def test_find_crossing() -> None:
    """Первое и последнее N со значением строго выше порога."""
    crossing = find_crossing([2, 4, 8, 16], [0.001, 0.002, 0.0015, 0.003], 0.0015)
    assert crossing == Crossing(n_first=4, value=0.002, n_last=16)


def test_find_crossing_none() -> None:
    """Значение, равное порогу, порог не превышает."""
    assert find_crossing([2, 4], [0.0015, 0.001], 0.0015) is None
    assert find_crossing([], [], 0.0) is None


def test_find_crossing_length_mismatch() -> None:
    with pytest.raises(ValueError):
        find_crossing([2, 4], [0.1], 0.0)


def test_threshold_rejects_negative_threshold() -> None:
    spec = SweepSpec(n_values=(2,), families=((4.0, 1.0),))
    with pytest.raises(ValueError):
        cmd_threshold(spec, -1e-3)


def test_zero_threshold_crosses_at_first_point() -> None:
    """При 2eps = 0 любое ненулевое D дает пересечение на первом N."""
    spec = SweepSpec(n_values=(2, 4, 8), families=((4.0, 1.0),))
    (report,) = cmd_threshold(spec, 0.0)
    assert set(report.crossings) == {"dh", "ud", "sr", LOWER_BOUND_LABEL}
    for crossing in report.crossings.values():
        assert crossing is not None
        assert crossing.n_first == 2


def test_unreachable_threshold() -> None:
    """D не превышает 1, поэтому порог 1 не пересекается."""
    spec = SweepSpec(n_values=(2, 4, 8), families=((4.0, 1.0),))
    (report,) = cmd_threshold(spec, 1.0)
    assert all(crossing is None for crossing in report.crossings.values())
    assert all(row["n_first"] is None for row in report.rows())


def test_crossings_agree_with_sweep_rows() -> None:
    """Пороги совпадают с рядом D из перебора; атаки пересекают не позже границы."""
    spec = SweepSpec(n_values=(2, 4, 8, 16, 32), families=((20.0, 1.0),))
    two_epsilon = 1.5e-3
    (report,) = cmd_threshold(spec, two_epsilon)
    rows = compute_sweep_rows(spec)

    dh = report.crossings["dh"]
    assert dh is not None
    expected = [row["n"] for row in rows if row["d_dh"] > two_epsilon]
    assert (dh.n_first, dh.n_last) == (expected[0], expected[-1])

    low = report.crossings[LOWER_BOUND_LABEL]
    if low is not None:
        for kind in AttackKind:
            crossing = report.crossings[kind.short]
            assert crossing is not None
            assert crossing.n_first <= low.n_first
            assert crossing.n_last >= low.n_last


def test_one_report_per_family() -> None:
    spec = SweepSpec(
        n_values=(2, 4),
        families=((20.0, 1.0), (100.0, 5.0)),
        attacks=(AttackKind.SQUARE_ROOT,),
        include_lower_bound=False,
    )
    reports = cmd_threshold(spec, 1.5e-3)
    assert [(r.mu_probe, r.mu_response) for r in reports] == [(20.0, 1.0), (100.0, 5.0)]
    assert all(set(r.crossings) == {"sr"} for r in reports)


def test_write_threshold_reports(tmp_path) -> None:
    out = tmp_path / "threshold.csv"
    spec = SweepSpec(
        n_values=(2, 4),
        families=((4.0, 1.0),),
        attacks=(AttackKind.UNAMBIGUOUS,),
        output_path=str(out),
    )
    reports = cmd_threshold(spec, 1.0)
    write_threshold_reports(spec, reports, 1.0)

    parsed = list(csv.DictReader(io.StringIO(out.read_text(encoding="utf-8"))))
    assert list(parsed[0]) == THRESHOLD_COLUMNS
    assert [r["quantity"] for r in parsed] == ["ud", LOWER_BOUND_LABEL]
    assert all(r["n_first"] == "none" for r in parsed)
