"""
Сессия как обмен сообщениями между сервером, верификатором, ключом и противником.

Каждый участник работает в своей корутине и читает свою очередь.
При атаке противник стоит в канале между верификатором и ключом:
он перехватывает пробное состояние, угадывает k_tilde и отправляет
ключу заново приготовленное состояние k_tilde. Все взаимодействия
причинно упорядочены и выполняются в одном цикле событий без таймеров,
поэтому порядок доставки детерминирован. Случайные величины те же, что
и в run_session, так что при одном зерне результат совпадает с ним бит в бит.
"""

import asyncio
import logging

import numpy as np

from pukauth.errors import EmptySessionError, ProtocolOrderError
from pukauth.model import CRPTable, QuadratureAngle, build_crp_table, quadrature_means
from pukauth.simulate.messages import (
    ChallengeBatch,
    ProbeState,
    QuadratureOutcome,
    ResponseField,
    TranscriptSink,
    Verdict,
)
from pukauth.simulate.session import (
    QueryDraws,
    QueryRecord,
    SessionConfig,
    SessionResult,
    adversary_guesses,
    draw_queries,
    session_confusion,
    session_stream,
)
from pukauth.verifier import accept

logger = logging.getLogger(__name__)


class Server:
    """Сервер: хранит таблицу CRP, выдает вызовы и выносит вердикт."""

    def __init__(
        self,
        config: SessionConfig,
        table: CRPTable,
        draws: QueryDraws,
        sink: TranscriptSink,
    ):
        self.config = config
        self.table = table
        self.draws = draws
        self.sink = sink
        self.inbox: asyncio.Queue = asyncio.Queue()
        self.batch: ChallengeBatch | None = None
        self.hits = 0
        self.log: list[QueryRecord] = []

    def issue_batch(self) -> ChallengeBatch:
        self.batch = ChallengeBatch(
            table_id=self.table.table_id,
            challenges=tuple(
                (int(k), QuadratureAngle(int(t)))
                for k, t in zip(self.draws.ks, self.draws.thetas, strict=True)
            ),
        )
        self.sink.record(self.batch)
        return self.batch

    async def run(self, verifier_inbox: asyncio.Queue) -> Verdict:
        await verifier_inbox.put(self.issue_batch())
        params = self.config.params
        means = self.table.means()
        half_width = params.delta / 2.0

        for expected_j, (k, theta) in enumerate(self.batch.challenges):
            message = await self.inbox.get()
            if not isinstance(message, QuadratureOutcome) or message.j != expected_j:
                raise ProtocolOrderError(
                    f"❌ Сервер ожидал исход запроса {expected_j}, получено {message!r}"
                )
            self.sink.record(message)
            in_bin = abs(message.value - float(means[theta.value, k])) <= half_width
            self.hits += int(in_bin)
            self.log.append(QueryRecord(k, None, theta, message.value, in_bin))

        verdict = Verdict(accepted=accept(self.hits / params.n_queries, params))
        self.sink.record(verdict)
        await verifier_inbox.put(verdict)
        return verdict


class Verifier:
    """Верификатор: направляет пробные состояния в канал и измеряет отклики."""

    def __init__(self, config: SessionConfig, noise: np.ndarray):
        self.config = config
        self.noise = noise
        self.inbox: asyncio.Queue = asyncio.Queue()
        self.verdict: Verdict | None = None

    async def run(self, server_inbox: asyncio.Queue, channel: asyncio.Queue) -> None:
        batch = await self.inbox.get()
        if not isinstance(batch, ChallengeBatch):
            raise ProtocolOrderError(f"❌ Верификатор ожидал пакет вызовов, получено {batch!r}")

        sigma = self.config.params.sigma
        for j, (k, theta) in enumerate(batch.challenges):
            await channel.put(ProbeState(j=j, k=k))
            field = await self.inbox.get()
            if not isinstance(field, ResponseField) or field.j != j:
                raise ProtocolOrderError(
                    f"❌ Верификатор ожидал отклик на запрос {j}, получено {field!r}"
                )
            value = field.mean(theta) + sigma * float(self.noise[j])
            await server_inbox.put(QuadratureOutcome(j=j, value=value))

        verdict = await self.inbox.get()
        if not isinstance(verdict, Verdict):
            raise ProtocolOrderError(f"❌ Верификатор ожидал вердикт, получено {verdict!r}")
        self.verdict = verdict


class PhysicalKey:
    """Ключ: отвечает на любое пришедшее состояние k полем со средними R_k."""

    def __init__(self, means: np.ndarray):
        self.means = means
        self.inbox: asyncio.Queue = asyncio.Queue()
        self.received: list[int] = []

    async def run(self, verifier_inbox: asyncio.Queue, n_queries: int) -> None:
        for _ in range(n_queries):
            state = await self.inbox.get()
            if not isinstance(state, ProbeState):
                raise ProtocolOrderError(f"❌ Ключ ожидал пробное состояние, получено {state!r}")
            self.received.append(state.k)
            await verifier_inbox.put(
                ResponseField(
                    j=state.j,
                    mean_x=float(self.means[0, state.k]),
                    mean_y=float(self.means[1, state.k]),
                )
            )


class Adversary:
    """
    Противник в канале между верификатором и ключом.

    Измеряет перехваченное состояние, угадывает k_tilde и пересылает
    ключу состояние k_tilde. Отклик ключа идет верификатору напрямую.
    """

    def __init__(self, config: SessionConfig, uniforms: np.ndarray):
        self.config = config
        self.confusion = session_confusion(config)
        self.uniforms = uniforms
        self.inbox: asyncio.Queue = asyncio.Queue()
        self.guesses: list[int] = []

    def guess(self, state: ProbeState) -> int:
        uniforms = self.uniforms[state.j : state.j + 1]
        guess = adversary_guesses(self.config, np.array([state.k]), uniforms, self.confusion)
        return int(guess[0])

    async def run(self, key_inbox: asyncio.Queue, n_queries: int) -> None:
        for expected_j in range(n_queries):
            state = await self.inbox.get()
            if not isinstance(state, ProbeState) or state.j != expected_j:
                raise ProtocolOrderError(
                    f"❌ Противник ожидал состояние запроса {expected_j}, получено {state!r}"
                )
            k_tilde = self.guess(state)
            self.guesses.append(k_tilde)
            await key_inbox.put(ProbeState(j=state.j, k=k_tilde))


async def run_actor_harness_async(
    config: SessionConfig, sink: TranscriptSink | None = None
) -> SessionResult:
    """
    Сессия в виде взаимодействующих участников.

    Без атаки работают сервер, верификатор и ключ; при атаке к ним
    добавляется противник в канале.

    Args:
        config: Конфигурация сессии
        sink: Приемник транскрипта (по умолчанию только в памяти)

    Raises:
        EmptySessionError: M = 0
        ProtocolOrderError: Сообщение пришло не по порядку
    """
    params = config.params
    if params.n_queries == 0:
        raise EmptySessionError("❌ Сессия без запросов: p_in не определена")

    sink = sink if sink is not None else TranscriptSink()
    draws = draw_queries(session_stream(config.seed), params)
    table = build_crp_table(params, config.chi, config.table_id)

    server = Server(config, table, draws, sink)
    verifier = Verifier(config, draws.noise)
    key = PhysicalKey(quadrature_means(params, config.chi))
    participants = [
        server.run(verifier.inbox),
        key.run(verifier.inbox, params.n_queries),
    ]
    adversary = None
    if config.attack is None:
        channel = key.inbox
    else:
        adversary = Adversary(config, draws.adversary)
        channel = adversary.inbox
        participants.append(adversary.run(key.inbox, params.n_queries))
    participants.append(verifier.run(server.inbox, channel))

    await asyncio.gather(*participants)

    log = server.log
    if adversary is not None:
        log = [record._replace(k_tilde=g) for record, g in zip(log, adversary.guesses, strict=True)]

    logger.debug(
        f"✅ Сессия {config.table_id}: {server.hits}/{params.n_queries}, "
        f"принято={verifier.verdict.accepted}"
    )
    return SessionResult(
        queries=params.n_queries,
        hits=server.hits,
        p_in_empirical=server.hits / params.n_queries,
        accepted=verifier.verdict.accepted,
        per_query_log=tuple(log),
    )


def run_actor_harness(
    config: SessionConfig, sink: TranscriptSink | None = None
) -> SessionResult:
    """Синхронная обертка над run_actor_harness_async."""
    return asyncio.run(run_actor_harness_async(config, sink))
