import logging

import pytest

from pukauth.timing import StageTimer


def test_stage_timer_stages() -> None:
    """Этапы записываются в порядке контрольных точек."""
    with StageTimer("sweep") as timer:
        timer.checkpoint("spectra")
        timer.checkpoint("confusion matrices")

    assert [name for name, _ in timer.stages] == ["spectra", "confusion matrices"]
    assert timer.total_duration >= sum(duration for _, duration in timer.stages)
    assert all(duration >= 0.0 for _, duration in timer.stages)


def test_stage_timer_reraises(caplog: pytest.LogCaptureFixture) -> None:
    """Исключение внутри блока не подавляется и отмечается в логе."""
    with caplog.at_level(logging.WARNING, logger="pukauth.timing"):
        with pytest.raises(ZeroDivisionError):
            with StageTimer("threshold"):
                1 / 0
    assert "прервано" in caplog.text
