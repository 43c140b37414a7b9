# obake/core/tampering.py

"""
Man-in-the-middle hooks for the session runner. A hook sees every frame as
it crosses the transport and may rewrite it before the peer receives it.
"""

import logging
from dataclasses import replace
from enum import Enum
from typing import Optional

from ..errors import ObakeError
from ..protocol.codec import decode, encode
from ..protocol.kdf import Tag, Verifier
from ..protocol.messages import MatchAnnounce, Query
from ..protocol.params import ProtocolParams

logger = logging.getLogger(__name__)


class TamperMode(Enum):
    NONE = "none"
    FLIP_TAG_BIT = "flip-tag"
    CORRUPT_QUERY = "corrupt-query"


def _flip_low_bit(value: bytes, position: int = 0) -> bytes:
    flipped = bytearray(value)
    flipped[position] ^= 0x01
    return bytes(flipped)


def flip_tag_bit(frame: bytes, params: ProtocolParams) -> bytes:
    """Flip one bit of the tag carried by a MatchAnnounce frame."""
    msg = decode(frame, params)
    if not isinstance(msg, MatchAnnounce) or not msg.tag.value:
        return frame
    return encode(replace(msg, tag=Tag(_flip_low_bit(msg.tag.value))), params)


def corrupt_query(frame: bytes, params: ProtocolParams) -> bytes:
    """Flip one bit in every verifier of a Query frame."""
    msg = decode(frame, params)
    if not isinstance(msg, Query):
        return frame
    verifiers = tuple(Verifier(_flip_low_bit(v.value)) for v in msg.verifiers if v.value)
    return encode(replace(msg, verifiers=verifiers), params)


class Tamperer:
    """
    Applies one TamperMode to the frames of a session.

    FLIP_TAG_BIT rewrites every MatchAnnounce on its way to the system.
    CORRUPT_QUERY rewrites only the first Query, so an honest round can
    follow it.
    """

    def __init__(self, mode: TamperMode, params: ProtocolParams):
        self.mode = mode
        self.params = params
        self.frames_tampered = 0

    def _apply(self, frame: bytes, rewrite) -> bytes:
        try:
            tampered = rewrite(frame, self.params)
        except ObakeError as e:
            logger.debug(f"Frame left untouched by tamper hook: {e}")
            return frame
        if tampered != frame:
            self.frames_tampered += 1
            logger.debug(f"Tamper hook {self.mode.value} rewrote a frame")
        return tampered

    def to_token(self, frame: bytes, round_no: Optional[int] = None) -> bytes:
        if self.mode is TamperMode.CORRUPT_QUERY and round_no == 0:
            return self._apply(frame, corrupt_query)
        return frame

    def to_system(self, frame: bytes) -> bytes:
        if self.mode is TamperMode.FLIP_TAG_BIT:
            return self._apply(frame, flip_tag_bit)
        return frame
