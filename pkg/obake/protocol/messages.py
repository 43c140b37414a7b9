# obake/protocol/messages.py

"""
The five protocol messages exchanged between user token and sensing system.

Messages are structural values. Length rules that depend on ProtocolParams
(nonce length, challenge length, verifier count) are enforced by the state
machines, so a decoded message may still be rejected by its receiver.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple, Union

from ..errors import ParameterError
from .kdf import Tag, Verifier
from .params import MAX_SESSION_ID_LEN, FeatureVector


class MessageType(Enum):
    SETUP = 0x01
    TEMPLATE_RESPONSE = 0x02
    QUERY = 0x03
    MATCH_ANNOUNCE = 0x04
    OUTCOME = 0x05


class OutcomeKind(Enum):
    KEY_ESTABLISHED = 0x00
    ABORT = 0x01


class AbortReason(Enum):
    TAG_MISMATCH = 0x01
    ROUND_LIMIT = 0x02
    PROTOCOL_VIOLATION = 0x03


@dataclass(frozen=True)
class SessionId:
    """Session identifier q: 1 to 255 octets."""
    value: bytes

    def __post_init__(self):
        if not 1 <= len(self.value) <= MAX_SESSION_ID_LEN:
            raise ParameterError(f"session id must be 1-{MAX_SESSION_ID_LEN} bytes, got {len(self.value)}")

    def __bytes__(self) -> bytes:
        return self.value


@dataclass(frozen=True)
class Setup:
    session_id: bytes
    global_nonce: bytes

    message_type = MessageType.SETUP


@dataclass(frozen=True)
class TemplateResponse:
    blinded_template: FeatureVector

    message_type = MessageType.TEMPLATE_RESPONSE


@dataclass(frozen=True)
class Query:
    round: int
    challenge: bytes
    verifiers: Tuple[Verifier, ...]

    message_type = MessageType.QUERY


@dataclass(frozen=True)
class MatchAnnounce:
    round: int
    index: int
    tag: Tag

    message_type = MessageType.MATCH_ANNOUNCE


@dataclass(frozen=True)
class Outcome:
    kind: OutcomeKind
    reason: Optional[AbortReason] = None

    message_type = MessageType.OUTCOME

    def __post_init__(self):
        if (self.kind is OutcomeKind.ABORT) != (self.reason is not None):
            raise ParameterError("an abort reason is present exactly when the outcome is Abort")

    @classmethod
    def established(cls) -> "Outcome":
        return cls(OutcomeKind.KEY_ESTABLISHED)

    @classmethod
    def abort(cls, reason: AbortReason) -> "Outcome":
        return cls(OutcomeKind.ABORT, reason)

    @property
    def is_success(self) -> bool:
        return self.kind is OutcomeKind.KEY_ESTABLISHED


Message = Union[Setup, TemplateResponse, Query, MatchAnnounce, Outcome]
