# obake/protocol/__init__.py
"""
Pure protocol layer: no I/O, no threads, no global state.
"""
from .params import ProtocolParams, FeatureVector
from .vector import vec_add, vec_sub, vectorize, devectorize, cell_index, centralize, centered, is_close
from .kdf import DerivedKey, Verifier, Tag, bbkdf, mac, ct_equal, key_fingerprint
from .messages import (
    SessionId,
    Setup,
    TemplateResponse,
    Query,
    MatchAnnounce,
    Outcome,
    OutcomeKind,
    AbortReason,
    MessageType,
)
from .entropy import EntropySource, SystemEntropy, SeededEntropy
from .token import TokenPhase, TokenState, token_on_setup, token_on_query, token_on_outcome
from .system import (
    SystemPhase,
    SystemState,
    system_start,
    system_on_template,
    system_build_query,
    system_on_match,
    system_abort,
)
from .codec import encode, decode

__all__ = [
    "ProtocolParams",
    "FeatureVector",
    "vec_add",
    "vec_sub",
    "vectorize",
    "devectorize",
    "cell_index",
    "centralize",
    "centered",
    "is_close",
    "DerivedKey",
    "Verifier",
    "Tag",
    "bbkdf",
    "mac",
    "ct_equal",
    "key_fingerprint",
    "SessionId",
    "Setup",
    "TemplateResponse",
    "Query",
    "MatchAnnounce",
    "Outcome",
    "OutcomeKind",
    "AbortReason",
    "MessageType",
    "EntropySource",
    "SystemEntropy",
    "SeededEntropy",
    "TokenPhase",
    "TokenState",
    "token_on_setup",
    "token_on_query",
    "token_on_outcome",
    "SystemPhase",
    "SystemState",
    "system_start",
    "system_on_template",
    "system_build_query",
    "system_on_match",
    "system_abort",
    "encode",
    "decode",
]
