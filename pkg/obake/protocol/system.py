# obake/protocol/system.py

"""
Sensing system role.

The system opens the session, receives the blinded template and then runs
query rounds. Each round derives one candidate key per capture; a verified
tag on one of them ends the session with that key.
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence, Tuple

from ..errors import EntropyError, ParameterError
from . import kdf
from .entropy import EntropySource
from .kdf import DerivedKey
from .messages import AbortReason, MatchAnnounce, Outcome, Query, Setup, TemplateResponse
from .params import (
    CHALLENGE_LEN,
    DEFAULT_SESSION_ID_LEN,
    FeatureVector,
    ProtocolParams,
    check_vector,
)
from .vector import vec_add, vec_sub, vectorize

logger = logging.getLogger(__name__)


class SystemPhase(Enum):
    INIT = "init"
    AWAITING_TEMPLATE = "awaiting_template"
    QUERYING = "querying"
    DONE = "done"
    ABORTED = "aborted"


@dataclass(frozen=True)
class SystemState:
    """Per-session state of the sensing system."""
    params: ProtocolParams
    phase: SystemPhase = SystemPhase.INIT
    session_id: bytes = b""
    global_nonce: bytes = b""
    global_vector: Optional[FeatureVector] = None
    blinded_template: Optional[FeatureVector] = None
    current_round: int = -1
    round_challenge: bytes = b""
    round_keys: Tuple[DerivedKey, ...] = ()
    shared_key: Optional[DerivedKey] = None
    abort_reason: Optional[AbortReason] = None

    @property
    def is_terminal(self) -> bool:
        return self.phase in (SystemPhase.DONE, SystemPhase.ABORTED)

    @property
    def rounds_used(self) -> int:
        return self.current_round + 1

    @property
    def outcome(self) -> Optional[Outcome]:
        if self.phase is SystemPhase.DONE:
            return Outcome.established()
        if self.phase is SystemPhase.ABORTED:
            return Outcome.abort(self.abort_reason)
        return None


def system_abort(state: SystemState, reason: AbortReason) -> SystemState:
    """Abort the session; terminal states are left as they are."""
    if state.is_terminal:
        return state
    logger.warning(f"System aborting session: {reason.name}")
    return replace(state, phase=SystemPhase.ABORTED, abort_reason=reason, round_keys=())


def _draw(rng: EntropySource, n: int, what: str) -> bytes:
    value = rng.token_bytes(n)
    if len(value) != n:
        raise EntropyError(f"entropy source returned {len(value)} bytes for {what}, expected {n}")
    return value


def system_start(
    params: ProtocolParams,
    rng: EntropySource,
    session_id_len: int = DEFAULT_SESSION_ID_LEN,
) -> Tuple[SystemState, Setup]:
    """Pick a session id q and a global nonce N^G and emit Setup."""
    if not 1 <= session_id_len <= 255:
        raise ParameterError(f"session id length must be 1-255, got {session_id_len}")
    session_id = _draw(rng, session_id_len, "session id")
    global_nonce = _draw(rng, params.nonce_len_global, "global nonce")

    state = SystemState(
        params=params,
        phase=SystemPhase.AWAITING_TEMPLATE,
        session_id=session_id,
        global_nonce=global_nonce,
        global_vector=vectorize(global_nonce, params),
    )
    logger.debug(f"System started session {session_id.hex()}")
    return state, Setup(session_id=session_id, global_nonce=global_nonce)


def system_on_template(state: SystemState, resp: TemplateResponse) -> SystemState:
    """Store the blinded template C; only AwaitingTemplate accepts it."""
    if state.is_terminal:
        return state
    if state.phase is not SystemPhase.AWAITING_TEMPLATE or not isinstance(resp, TemplateResponse):
        return system_abort(state, AbortReason.PROTOCOL_VIOLATION)
    try:
        check_vector(resp.blinded_template, state.params)
    except ParameterError as e:
        logger.warning(f"Blinded template rejected: {e}")
        return system_abort(state, AbortReason.PROTOCOL_VIOLATION)
    return replace(state, phase=SystemPhase.QUERYING, blinded_template=resp.blinded_template)


def system_build_query(
    state: SystemState,
    captures: Sequence[FeatureVector],
    rng: EntropySource,
) -> Tuple[SystemState, Optional[Query]]:
    """
    Derive K_{r,i} = bbkdf(C - V^C_{r,i} + N^G) and v_{r,i} for each capture.

    Returns no query once the session is terminal or the round limit is hit;
    in the latter case the state is aborted with RoundLimit.
    """
    if state.is_terminal:
        return state, None
    if state.phase is not SystemPhase.QUERYING:
        raise ParameterError(f"cannot build a query in phase {state.phase.value}")
    params = state.params
    if not captures:
        raise ParameterError("a query needs at least one capture")
    if len(captures) > params.max_queries_per_round:
        raise ParameterError(
            f"{len(captures)} captures exceed max_queries_per_round={params.max_queries_per_round}"
        )
    for capture in captures:
        check_vector(capture, params)

    next_round = state.current_round + 1
    if next_round >= params.max_rounds:
        logger.info(f"Round limit {params.max_rounds} reached")
        return system_abort(state, AbortReason.ROUND_LIMIT), None

    challenge = _draw(rng, CHALLENGE_LEN, "round challenge")
    keys = tuple(
        kdf.bbkdf(vec_add(vec_sub(state.blinded_template, capture), state.global_vector), params)
        for capture in captures
    )
    verifiers = tuple(
        kdf.make_verifier(state.session_id, state.global_nonce, key, params) for key in keys
    )
    logger.debug(f"System built round {next_round} with {len(verifiers)} verifiers")
    state = replace(state, current_round=next_round, round_challenge=challenge, round_keys=keys)
    return state, Query(round=next_round, challenge=challenge, verifiers=verifiers)


def system_on_match(state: SystemState, ann: MatchAnnounce) -> Tuple[SystemState, Outcome]:
    """Verify T against K_{r,m}; success yields K_shared = K_{r,m}."""
    if state.is_terminal:
        return state, state.outcome
    if state.phase is not SystemPhase.QUERYING or not isinstance(ann, MatchAnnounce):
        state = system_abort(state, AbortReason.PROTOCOL_VIOLATION)
        return state, state.outcome
    if ann.round != state.current_round or not 0 <= ann.index < len(state.round_keys):
        logger.warning(
            f"MatchAnnounce for round {ann.round} index {ann.index} does not fit "
            f"round {state.current_round} with {len(state.round_keys)} verifiers"
        )
        state = system_abort(state, AbortReason.PROTOCOL_VIOLATION)
        return state, state.outcome

    candidate = state.round_keys[ann.index]
    expected = kdf.make_tag(state.session_id, state.round_challenge, candidate, state.params)
    if not kdf.ct_equal(bytes(ann.tag), bytes(expected)):
        state = system_abort(state, AbortReason.TAG_MISMATCH)
        return state, state.outcome

    logger.info(f"Tag verified for round {ann.round} index {ann.index}; key established")
    state = replace(state, phase=SystemPhase.DONE, shared_key=candidate)
    return state, state.outcome
