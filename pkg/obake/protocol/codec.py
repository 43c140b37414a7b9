# obake/protocol/codec.py

"""
Binary framing of the protocol messages.

Frame layout: one msg_type octet, then the message fields in declaration
order. Byte strings are [u16 length | bytes], integers are u16, feature
vectors are dim components of k/8 bytes each (no inline length; dim and k
come from ProtocolParams), verifier lists are [u16 count | verifiers], and
an Outcome is [kind octet | reason octet if Abort]. All integers are
big-endian and a frame never exceeds 65535 bytes.
"""

import struct
from typing import List

from ..errors import DecodeError, EncodingError
from .kdf import Tag, Verifier
from .messages import (
    AbortReason,
    MatchAnnounce,
    Message,
    MessageType,
    Outcome,
    OutcomeKind,
    Query,
    Setup,
    TemplateResponse,
)
from .params import MAX_FRAME_LEN, MAX_U16, FeatureVector, ProtocolParams

_U16 = struct.Struct(">H")


class _Writer:
    def __init__(self, message_type: MessageType):
        self.parts: List[bytes] = [bytes([message_type.value])]

    def u8(self, value: int) -> None:
        self.parts.append(bytes([value]))

    def u16(self, value: int, what: str) -> None:
        if not 0 <= value <= MAX_U16:
            raise EncodingError(f"{what}={value} does not fit in u16")
        self.parts.append(_U16.pack(value))

    def byte_string(self, value: bytes, what: str) -> None:
        self.u16(len(value), f"length of {what}")
        self.parts.append(bytes(value))

    def vector(self, vector: FeatureVector, params: ProtocolParams) -> None:
        if vector.dim != params.dim or vector.component_bits != params.component_bits:
            raise EncodingError(
                f"vector of dim {vector.dim}, k={vector.component_bits} does not match params "
                f"dim {params.dim}, k={params.component_bits}"
            )
        width = params.component_bytes
        self.parts.append(b"".join(c.to_bytes(width, "big") for c in vector.components))

    def finish(self) -> bytes:
        frame = b"".join(self.parts)
        if len(frame) > MAX_FRAME_LEN:
            raise EncodingError(f"frame of {len(frame)} bytes exceeds the {MAX_FRAME_LEN}-byte limit")
        return frame


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, n: int, what: str) -> bytes:
        if self.offset + n > len(self.data):
            raise DecodeError(
                f"truncated {what}: need {n} bytes, {len(self.data) - self.offset} left", self.offset
            )
        chunk = self.data[self.offset:self.offset + n]
        self.offset += n
        return chunk

    def u8(self, what: str) -> int:
        return self.take(1, what)[0]

    def u16(self, what: str) -> int:
        return _U16.unpack(self.take(2, what))[0]

    def byte_string(self, what: str) -> bytes:
        length = self.u16(f"length of {what}")
        return self.take(length, what)

    def vector(self, params: ProtocolParams) -> FeatureVector:
        width = params.component_bytes
        raw = self.take(params.dim * width, "feature vector")
        components = tuple(
            int.from_bytes(raw[i * width:(i + 1) * width], "big") for i in range(params.dim)
        )
        return FeatureVector(components, params.component_bits)

    def finish(self) -> None:
        if self.offset != len(self.data):
            raise DecodeError(f"{len(self.data) - self.offset} trailing bytes", self.offset)


def encode(msg: Message, params: ProtocolParams) -> bytes:
    """Serialize a message; deterministic for equal messages."""
    if isinstance(msg, Setup):
        w = _Writer(MessageType.SETUP)
        w.byte_string(msg.session_id, "session id")
        w.byte_string(msg.global_nonce, "global nonce")
    elif isinstance(msg, TemplateResponse):
        w = _Writer(MessageType.TEMPLATE_RESPONSE)
        w.vector(msg.blinded_template, params)
    elif isinstance(msg, Query):
        w = _Writer(MessageType.QUERY)
        w.u16(msg.round, "round")
        w.byte_string(msg.challenge, "challenge")
        w.u16(len(msg.verifiers), "verifier count")
        for verifier in msg.verifiers:
            if len(verifier.value) != params.verifier_len:
                raise EncodingError(
                    f"verifier of {len(verifier.value)} bytes, params fix {params.verifier_len}"
                )
            w.parts.append(verifier.value)
    elif isinstance(msg, MatchAnnounce):
        w = _Writer(MessageType.MATCH_ANNOUNCE)
        w.u16(msg.round, "round")
        w.u16(msg.index, "index")
        w.byte_string(bytes(msg.tag), "tag")
    elif isinstance(msg, Outcome):
        w = _Writer(MessageType.OUTCOME)
        w.u8(msg.kind.value)
        if msg.reason is not None:
            w.u8(msg.reason.value)
    else:
        raise EncodingError(f"not a protocol message: {type(msg).__name__}")
    return w.finish()


def decode(data: bytes, params: ProtocolParams) -> Message:
    """
    Parse one frame. Total on arbitrary input: anything that is not exactly
    one well-formed frame raises DecodeError naming the offset.
    """
    if len(data) == 0:
        raise DecodeError("empty frame", 0)
    if len(data) > MAX_FRAME_LEN:
        raise DecodeError(f"frame of {len(data)} bytes exceeds the {MAX_FRAME_LEN}-byte limit", MAX_FRAME_LEN)

    r = _Reader(bytes(data))
    type_octet = r.u8("message type")
    try:
        message_type = MessageType(type_octet)
    except ValueError:
        raise DecodeError(f"unknown message type 0x{type_octet:02x}", 0) from None

    if message_type is MessageType.SETUP:
        session_id = r.byte_string("session id")
        global_nonce = r.byte_string("global nonce")
        msg: Message = Setup(session_id=session_id, global_nonce=global_nonce)
    elif message_type is MessageType.TEMPLATE_RESPONSE:
        msg = TemplateResponse(r.vector(params))
    elif message_type is MessageType.QUERY:
        round_no = r.u16("round")
        challenge = r.byte_string("challenge")
        count = r.u16("verifier count")
        verifiers = tuple(
            Verifier(r.take(params.verifier_len, f"verifier {i}")) for i in range(count)
        )
        msg = Query(round=round_no, challenge=challenge, verifiers=verifiers)
    elif message_type is MessageType.MATCH_ANNOUNCE:
        round_no = r.u16("round")
        index = r.u16("index")
        msg = MatchAnnounce(round=round_no, index=index, tag=Tag(r.byte_string("tag")))
    else:
        kind_offset = r.offset
        try:
            kind = OutcomeKind(r.u8("outcome kind"))
        except ValueError:
            raise DecodeError("unknown outcome kind", kind_offset) from None
        reason = None
        if kind is OutcomeKind.ABORT:
            reason_offset = r.offset
            try:
                reason = AbortReason(r.u8("abort reason"))
            except ValueError:
                raise DecodeError("unknown abort reason", reason_offset) from None
        msg = Outcome(kind, reason)

    r.finish()
    return msg

