"""
Сообщения протокола и запись транскрипта.

Транскрипт содержит только классические сообщения между сервером и
верификатором: пакет вызовов, исходы измерений и вердикт. Каждое
сообщение записывается одной JSON-строкой с отсортированными ключами.
"""

import json
from dataclasses import dataclass
from typing import Any, TextIO

from pukauth.model import QuadratureAngle


@dataclass(frozen=True)
class ChallengeBatch:
    """Пакет из M вызовов (k_j, theta_j), выбранных сервером."""

    table_id: str
    challenges: tuple[tuple[int, QuadratureAngle], ...]

    def to_record(self) -> dict[str, Any]:
        return {
            "type": "challenge_batch",
            "table_id": self.table_id,
            "challenges": [[k, theta.label] for k, theta in self.challenges],
        }


@dataclass(frozen=True)
class QuadratureOutcome:
    """Результат гомодинного измерения для запроса j."""

    j: int
    value: float

    def to_record(self) -> dict[str, Any]:
        return {"type": "quadrature_outcome", "j": self.j, "value": self.value}


@dataclass(frozen=True)
class Verdict:
    """Решение сервера о принятии ключа."""

    accepted: bool

    def to_record(self) -> dict[str, Any]:
        return {"type": "verdict", "accepted": self.accepted}


ProtocolMessage = ChallengeBatch | QuadratureOutcome | Verdict


# Сообщения оптического канала (в транскрипт не попадают)
@dataclass(frozen=True)
class ProbeState:
    """Пробное состояние для вызова k запроса j."""

    j: int
    k: int


@dataclass(frozen=True)
class ResponseField:
    """Поле отклика со средними квадратур (<X>, <Y>)."""

    j: int
    mean_x: float
    mean_y: float

    def mean(self, theta: QuadratureAngle) -> float:
        return self.mean_x if theta is QuadratureAngle.X else self.mean_y


def message_from_record(record: dict[str, Any]) -> ProtocolMessage:
    """Восстановление сообщения из записи транскрипта."""
    kind = record.get("type")
    if kind == "challenge_batch":
        return ChallengeBatch(
            table_id=record["table_id"],
            challenges=tuple(
                (int(k), QuadratureAngle.from_label(label))
                for k, label in record["challenges"]
            ),
        )
    if kind == "quadrature_outcome":
        return QuadratureOutcome(j=int(record["j"]), value=float(record["value"]))
    if kind == "verdict":
        return Verdict(accepted=bool(record["accepted"]))
    raise ValueError(f"❌ Неизвестный тип сообщения: {kind!r}")


class TranscriptSink:
    """
    Приемник транскрипта.

    Хранит сообщения в памяти и, если задан поток, пишет их построчно.
    """

    def __init__(self, stream: TextIO | None = None):
        self.stream = stream
        self.messages: list[ProtocolMessage] = []

    def record(self, message: ProtocolMessage) -> None:
        self.messages.append(message)
        if self.stream is not None:
            self.stream.write(json.dumps(message.to_record(), sort_keys=True) + "\n")

    def __len__(self) -> int:
        return len(self.messages)


def read_transcript(stream: TextIO) -> list[ProtocolMessage]:
    """Чтение транскрипта, записанного TranscriptSink."""
    return [message_from_record(json.loads(line)) for line in stream if line.strip()]
