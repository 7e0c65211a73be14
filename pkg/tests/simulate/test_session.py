import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import stats

from pukauth.attacks import AttackKind, ConfusionMatrix, confusion_for, dh_confusion
from pukauth.errors import EmptySessionError, InvariantViolationError
from pukauth.model import ProtocolParams, ResponsePhaseMap
from pukauth.simulate.session import (
    AdversaryMode,
    SessionConfig,
    dh_sectors,
    estimate_confusion,
    run_session,
    run_sessions,
    sample_dh_guess,
    session_seed,
)
from pukauth.verifier import p_in_attacked, p_in_honest


def make_config(
    n_states: int = 16,
    mu_probe: float = 4.0,
    mu_response: float = 2.0,
    n_queries: int = 100_000,
    **kwargs,
) -> SessionConfig:
    params = ProtocolParams(
        n_states=n_states,
        mu_probe=mu_probe,
        mu_response=mu_response,
        n_queries=n_queries,
        epsilon=kwargs.pop("epsilon", 7.5e-4),
    )
    return SessionConfig(params=params, chi=ResponsePhaseMap.symmetric(n_states), **kwargs)


def binomial_sigma(p: float, n: int) -> float:
    return math.sqrt(p * (1.0 - p) / n)


def test_session_is_reproducible() -> None:
    """Одно зерно - один результат."""
    config = make_config(n_queries=5_000, attack=AttackKind.SQUARE_ROOT, seed=42)
    first = run_session(config, record_queries=True)
    second = run_session(config, record_queries=True)
    assert first == second
    assert first.hits <= first.queries
    assert len(first.per_query_log) == 5_000


def test_different_seeds_give_different_sessions() -> None:
    """Разные зерна дают разные выборки."""
    config = make_config(n_queries=5_000)
    first = run_session(replace(config, seed=1), record_queries=True)
    second = run_session(replace(config, seed=2), record_queries=True)
    assert first.per_query_log != second.per_query_log


def test_session_without_queries_is_rejected() -> None:
    """M = 0: p_in не определена."""
    with pytest.raises(EmptySessionError):
        run_session(make_config(n_queries=0))


def test_session_config_validation() -> None:
    """physical-dh только для DH, матрица ошибок только с атакой."""
    with pytest.raises(InvariantViolationError):
        make_config(attack=AttackKind.UNAMBIGUOUS, adversary_mode=AdversaryMode.PHYSICAL_DH)
    with pytest.raises(ValueError):
        make_config(confusion=ConfusionMatrix.identity(16))
    with pytest.raises(InvariantViolationError):
        make_config(attack=AttackKind.UNAMBIGUOUS, confusion=ConfusionMatrix.identity(4))
    with pytest.raises(ValueError):
        make_config(seed=-1)


def test_query_log_is_consistent() -> None:
    """Журнал запросов согласован с итогом сессии."""
    config = make_config(n_states=8, n_queries=2_000, attack=AttackKind.DUAL_HOMODYNE, seed=3)
    result = run_session(config, record_queries=True)
    log = result.per_query_log
    assert sum(record.in_bin for record in log) == result.hits
    assert all(0 <= record.k < 8 and 0 <= record.k_tilde < 8 for record in log)
    assert result.p_in_empirical == result.hits / result.queries


def test_honest_session_concentrates_at_p_in_honest() -> None:
    """Без атаки доля попаданий в пределах 4 sigma от P_in^(0)."""
    config = make_config(n_queries=1_000_000, seed=7)
    result = run_session(config)
    expected = p_in_honest(config.params)
    assert abs(result.p_in_empirical - expected) < 4 * binomial_sigma(expected, 1_000_000)


def test_injected_uniform_guess_reduces_p_in() -> None:
    """Равновероятная догадка при N = 2 и ярком отклике: P_in = 3/4 P_in^(0)."""
    config = make_config(
        n_states=2,
        mu_probe=50.0,
        mu_response=50.0,
        n_queries=200_000,
        attack=AttackKind.UNAMBIGUOUS,
        confusion=ConfusionMatrix.uniform(2),
        seed=11,
    )
    result = run_session(config)
    expected = 0.75 * p_in_honest(config.params)
    assert abs(result.p_in_empirical - expected) < 4 * binomial_sigma(expected, 200_000)
    assert result.accepted is False


@pytest.mark.parametrize(
    "attack, mode",
    [
        (AttackKind.DUAL_HOMODYNE, AdversaryMode.CONFUSION_SAMPLING),
        (AttackKind.DUAL_HOMODYNE, AdversaryMode.PHYSICAL_DH),
        (AttackKind.UNAMBIGUOUS, AdversaryMode.CONFUSION_SAMPLING),
        (AttackKind.SQUARE_ROOT, AdversaryMode.CONFUSION_SAMPLING),
    ],
)
def test_monte_carlo_matches_analytic_p_in(attack: AttackKind, mode: AdversaryMode) -> None:
    """Не менее 95% сессий в пределах 4 sigma от аналитического P_in."""
    config = make_config(attack=attack, adversary_mode=mode, seed=2024)
    matrix = confusion_for(attack, config.params)
    analytic = p_in_attacked(matrix, config.params, config.chi).p_in_attacked
    sigma = binomial_sigma(analytic, config.params.n_queries)

    results = run_sessions(config, repetitions=100)
    within = sum(abs(r.p_in_empirical - analytic) < 4 * sigma for r in results)
    assert within >= 95


def test_honest_key_is_accepted_when_epsilon_covers_noise() -> None:
    """При epsilon = 5.4 sigma выборки честный ключ принимается во всех сессиях."""
    config = make_config(n_queries=10_000, epsilon=0.025, seed=99)
    results = run_sessions(config, repetitions=1_000)
    assert sum(r.accepted for r in results) == 1_000


def test_run_sessions_is_independent_of_worker_count() -> None:
    """Результаты серии не зависят от числа процессов."""
    config = make_config(n_states=8, n_queries=1_000, attack=AttackKind.SQUARE_ROOT, seed=5)
    assert run_sessions(config, 3, workers=1) == run_sessions(config, 3, workers=2)


def test_run_sessions_rejects_bad_arguments() -> None:
    """repetitions и workers должны быть >= 1."""
    config = make_config(n_queries=10)
    with pytest.raises(ValueError):
        run_sessions(config, 0)
    with pytest.raises(ValueError):
        run_sessions(config, 1, workers=0)


def test_session_seeds_are_stable_and_distinct() -> None:
    """Зерна сессий детерминированы и различны."""
    seeds = [session_seed(2019, i) for i in range(100)]
    assert seeds == [session_seed(2019, i) for i in range(100)]
    assert len(set(seeds)) == 100
    assert all(0 <= s < 2**64 for s in seeds)


def test_bright_dh_guess_is_always_right() -> None:
    """При mu_P = 1e6 двойное гомодинное измерение не ошибается."""
    params = ProtocolParams(n_states=8, mu_probe=1e6, mu_response=1.0)
    rng = np.random.default_rng(0)
    for k in range(8):
        assert all(sample_dh_guess(k, params, rng) == k for _ in range(200))


def test_vacuum_dh_guess_is_uniform() -> None:
    """При mu_P = 0 сектора равновероятны (критерий хи-квадрат)."""
    params = ProtocolParams(n_states=8, mu_probe=0.0, mu_response=0.0)
    rng = np.random.default_rng(1)
    sectors = dh_sectors(np.zeros(100_000, dtype=int), params, rng.standard_normal((100_000, 2)))
    counts = np.bincount(sectors, minlength=8)
    assert stats.chisquare(counts).pvalue > 1e-4


def test_sample_dh_guess_rejects_bad_challenge() -> None:
    """k вне Z_N отклоняется."""
    params = ProtocolParams(n_states=4, mu_probe=1.0, mu_response=1.0)
    with pytest.raises(IndexError):
        sample_dh_guess(4, params, np.random.default_rng(0))


@pytest.mark.slow
def test_estimated_dh_confusion_matches_quadrature() -> None:
    """Эмпирическая матрица DH по 1e7 выборкам совпадает с аналитической в пределах 4 sigma."""
    params = ProtocolParams(n_states=8, mu_probe=4.0, mu_response=1.0)
    samples = 10_000_000
    empirical = estimate_confusion(AttackKind.DUAL_HOMODYNE, params, samples, seed=17)
    analytic = dh_confusion(params).entries

    np.testing.assert_allclose(empirical.entries.sum(axis=1), 1.0, atol=1e-12)
    sigma = np.sqrt(analytic * (1.0 - analytic) / samples)
    assert np.all(np.abs(empirical.entries - analytic) <= 4 * sigma + 1.0 / samples)


def test_estimated_ud_confusion_for_vacuum_is_uniform() -> None:
    """UD при mu_P = 0: все элементы близки к 1/N."""
    params = ProtocolParams(n_states=4, mu_probe=0.0, mu_response=0.0)
    samples = 100_000
    empirical = estimate_confusion(AttackKind.UNAMBIGUOUS, params, samples, seed=3)
    sigma = binomial_sigma(0.25, samples)
    assert np.all(np.abs(empirical.entries - 0.25) <= 5 * sigma)


def test_estimate_confusion_requires_enough_samples() -> None:
    """Меньше 1e4 выборок на строку отклоняется."""
    params = ProtocolParams(n_states=4, mu_probe=1.0, mu_response=1.0)
    with pytest.raises(ValueError):
        estimate_confusion(AttackKind.SQUARE_ROOT, params, 9_999, seed=0)
