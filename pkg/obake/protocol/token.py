# obake/protocol/token.py

"""
User token role.

The token precomputes its presumptive key K' and verifier v' when the
session is set up. After that it answers each query with nothing but
verifier comparisons until one matches.
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Tuple

from ..errors import ParameterError
from . import kdf
from .entropy import EntropySource
from .kdf import DerivedKey, Verifier
from .messages import AbortReason, MatchAnnounce, Outcome, OutcomeKind, Query, SessionId, Setup, TemplateResponse
from .params import CHALLENGE_LEN, FeatureVector, ProtocolParams, check_vector
from .vector import centralize, vec_add, vec_sub, vectorize

logger = logging.getLogger(__name__)


class TokenPhase(Enum):
    AWAITING_SETUP = "awaiting_setup"
    AWAITING_QUERIES = "awaiting_queries"
    DONE = "done"
    ABORTED = "aborted"


@dataclass(frozen=True)
class TokenState:
    """Per-session state of the user token."""
    params: ProtocolParams
    phase: TokenPhase = TokenPhase.AWAITING_SETUP
    session_id: bytes = b""
    global_nonce: bytes = b""
    blind_nonce: bytes = b""
    precomputed_key: Optional[DerivedKey] = None
    precomputed_verifier: Optional[Verifier] = None
    last_round: int = -1
    shared_key: Optional[DerivedKey] = None
    abort_reason: Optional[AbortReason] = None

    @property
    def is_terminal(self) -> bool:
        return self.phase in (TokenPhase.DONE, TokenPhase.ABORTED)

    def mark_aborted(self, reason: AbortReason) -> "TokenState":
        return replace(
            self,
            phase=TokenPhase.ABORTED,
            abort_reason=reason,
            precomputed_key=None,
            precomputed_verifier=None,
            shared_key=None,
        )


def blinding_vector(global_vector: FeatureVector, blind_nonce: bytes, params: ProtocolParams) -> FeatureVector:
    """B = centralize(N^G + vectorize(N^B)) - N^G, so that B + N^G sits at a cell center."""
    anchor = centralize(vec_add(global_vector, vectorize(blind_nonce, params)), params)
    return vec_sub(anchor, global_vector)


def _setup_is_well_formed(setup: Setup, params: ProtocolParams) -> bool:
    if not isinstance(setup, Setup):
        return False
    try:
        SessionId(setup.session_id)
    except ParameterError:
        return False
    return len(setup.global_nonce) == params.nonce_len_global


def token_on_setup(
    params: ProtocolParams,
    setup: Setup,
    template: FeatureVector,
    rng: EntropySource,
) -> Tuple[TokenState, Optional[TemplateResponse]]:
    """Handle Setup: blind the template and precompute K' and v'."""
    check_vector(template, params)
    state = TokenState(params=params)

    if not _setup_is_well_formed(setup, params):
        logger.warning("Token received a malformed Setup; aborting session")
        return state.mark_aborted(AbortReason.PROTOCOL_VIOLATION), None

    blind_nonce = rng.token_bytes(params.nonce_len_blind)
    global_vector = vectorize(setup.global_nonce, params)
    blinding = blinding_vector(global_vector, blind_nonce, params)

    precomputed_key = kdf.bbkdf(vec_add(blinding, global_vector), params)
    precomputed_verifier = kdf.make_verifier(setup.session_id, setup.global_nonce, precomputed_key, params)
    blinded_template = vec_add(blinding, template)

    logger.debug(f"Token ready for queries, session {setup.session_id.hex()}")
    state = replace(
        state,
        phase=TokenPhase.AWAITING_QUERIES,
        session_id=setup.session_id,
        global_nonce=setup.global_nonce,
        blind_nonce=blind_nonce,
        precomputed_key=precomputed_key,
        precomputed_verifier=precomputed_verifier,
    )
    return state, TemplateResponse(blinded_template)


def _query_is_well_formed(state: TokenState, query: Query) -> bool:
    params = state.params
    if not isinstance(query, Query):
        return False
    if query.round <= state.last_round:
        return False
    if len(query.challenge) != CHALLENGE_LEN:
        return False
    if not 1 <= len(query.verifiers) <= params.max_queries_per_round:
        return False
    return all(len(v.value) == params.verifier_len for v in query.verifiers)


def token_on_query(state: TokenState, query: Query) -> Tuple[TokenState, Optional[MatchAnnounce]]:
    """
    Look for v' among the query's verifiers.

    Every verifier is compared, even after a match, so the work per query
    does not depend on the match position. Malformed and replayed queries
    are ignored and the token keeps waiting.
    """
    if state.phase is not TokenPhase.AWAITING_QUERIES:
        logger.debug(f"Token in phase {state.phase.value} ignores query")
        return state, None
    if not _query_is_well_formed(state, query):
        logger.warning("Token ignored a malformed or replayed query")
        return state, None

    expected = state.precomputed_verifier.value
    match_index = None
    for index, verifier in enumerate(query.verifiers):
        if kdf.ct_equal(verifier.value, expected) and match_index is None:
            match_index = index

    if match_index is None:
        return replace(state, last_round=query.round), None

    tag = kdf.make_tag(state.session_id, query.challenge, state.precomputed_key, state.params)
    logger.info(f"Token matched verifier {match_index} in round {query.round}")
    done = replace(
        state,
        phase=TokenPhase.DONE,
        last_round=query.round,
        shared_key=state.precomputed_key,
    )
    return done, MatchAnnounce(round=query.round, index=match_index, tag=tag)


def token_on_outcome(state: TokenState, outcome: Outcome) -> TokenState:
    """An Abort from the system discards the key the token settled on."""
    if not isinstance(outcome, Outcome):
        return state
    if outcome.kind is OutcomeKind.ABORT and state.phase is not TokenPhase.ABORTED:
        logger.warning(f"System aborted the session: {outcome.reason.name}")
        return state.mark_aborted(outcome.reason)
    return state
