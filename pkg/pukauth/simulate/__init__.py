"""Моделирование сессий верификации."""

from pukauth.simulate.actors import run_actor_harness, run_actor_harness_async
from pukauth.simulate.messages import (
    ChallengeBatch,
    ProtocolMessage,
    QuadratureOutcome,
    TranscriptSink,
    Verdict,
    read_transcript,
)
from pukauth.simulate.metrics import SimulationMetrics
from pukauth.simulate.session import (
    AdversaryMode,
    SessionConfig,
    SessionResult,
    estimate_confusion,
    run_session,
    run_sessions,
    sample_dh_guess,
    session_seed,
)

__all__ = [
    "AdversaryMode",
    "ChallengeBatch",
    "ProtocolMessage",
    "QuadratureOutcome",
    "SessionConfig",
    "SessionResult",
    "SimulationMetrics",
    "TranscriptSink",
    "Verdict",
    "estimate_confusion",
    "read_transcript",
    "run_actor_harness",
    "run_actor_harness_async",
    "run_sessions",
    "run_session",
    "sample_dh_guess",
    "session_seed",
]
