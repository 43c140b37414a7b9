# obake/core/session_runner.py

"""
End-to-end session over a transport.

The token runs on its own thread behind a ChannelEndpoint. The system is
driven from the calling thread. The two roles share nothing but the
channel, and every random choice is derived from one session seed, so a
session replays identically on any transport.
"""

import hashlib
import logging
import threading
import time
from dataclasses import dataclass, field, replace
from typing import Optional, Union

from ..errors import DecodeError, TransportError
from ..events import EventType
from ..interfaces.event_bus import EventBus as EventBusInterface
from ..interfaces.sensor import NoiseModel
from ..interfaces.transport import ChannelEndpoint, TransportInterface, TransportKind, TransportOptions
from ..protocol.codec import decode, encode
from ..protocol.entropy import SeededEntropy
from ..protocol.kdf import DerivedKey
from ..protocol.messages import (
    AbortReason,
    MatchAnnounce,
    Message,
    Outcome,
    OutcomeKind,
    Query,
    Setup,
    TemplateResponse,
)
from ..protocol.params import FeatureVector, ProtocolParams
from ..protocol.system import (
    SystemState,
    system_abort,
    system_build_query,
    system_on_match,
    system_on_template,
    system_start,
)
from ..protocol.token import TokenState, token_on_outcome, token_on_query, token_on_setup
from .inprocess_transport import InProcessTransport
from .synthetic_sensor import SyntheticSensor
from .tampering import Tamperer, TamperMode
from .tcp_transport import TcpLoopbackTransport

logger = logging.getLogger(__name__)

SEED_SPACE = 1 << 64


def derive_seed(master: int, index: int, label: bytes = b"") -> int:
    """First 8 bytes of SHA-256(master || index || label), big-endian."""
    if not 0 <= master < SEED_SPACE or not 0 <= index < SEED_SPACE:
        raise ValueError(f"seed {master} and index {index} must fit in 64 bits")
    digest = hashlib.sha256(master.to_bytes(8, "big") + index.to_bytes(8, "big") + label).digest()
    return int.from_bytes(digest[:8], "big")


def make_transport(kind: TransportKind, options: Optional[TransportOptions] = None) -> TransportInterface:
    if kind is TransportKind.TCP_LOOPBACK:
        return TcpLoopbackTransport(options)
    return InProcessTransport(options)


@dataclass
class SessionOptions:
    """Per-session knobs that are not protocol parameters."""
    tamper: TamperMode = TamperMode.NONE
    token_id: str = "token-0"
    join_timeout: float = 10.0


@dataclass(frozen=True)
class SessionOutcome:
    """What one session ended with, as seen by both parties."""
    kind: OutcomeKind
    reason: Optional[AbortReason]
    system_key: Optional[DerivedKey]
    token_key: Optional[DerivedKey]
    rounds_used: int
    queries_sent: int
    verifiers_sent: int
    matched_round: Optional[int] = None
    suspect_peer: Optional[str] = None
    wall_time: float = field(default=0.0, compare=False)

    @property
    def succeeded(self) -> bool:
        return self.kind is OutcomeKind.KEY_ESTABLISHED

    @property
    def keys_agree(self) -> bool:
        return self.system_key is not None and self.system_key == self.token_key


def _decode_or_none(frame: Optional[bytes], params: ProtocolParams) -> Optional[Message]:
    if frame is None:
        return None
    try:
        return decode(frame, params)
    except DecodeError as e:
        logger.warning(f"Dropping undecodable frame: {e}")
        return None


class TokenAgent(threading.Thread):
    """
    Drives one token state machine from its end of the channel.

    Every frame from the system except the final Outcome gets exactly one
    reply: a protocol frame or the idle marker.
    """

    def __init__(
        self,
        endpoint: ChannelEndpoint,
        params: ProtocolParams,
        template: FeatureVector,
        seed: int,
        tamperer: Tamperer,
        event_bus: Optional[EventBusInterface] = None,
    ):
        super().__init__(name="obake-token", daemon=True)
        self.endpoint = endpoint
        self.params = params
        self.template = template
        self.rng = SeededEntropy(seed)
        self.tamperer = tamperer
        self.event_bus = event_bus
        self.state: Optional[TokenState] = None
        self.error: Optional[BaseException] = None

    def _reply(self, msg: Optional[Message]) -> None:
        if msg is None:
            _publish(self.event_bus, EventType.FRAME_SENT, sender="token", message_type=None, frame=None)
            self.endpoint.send_idle()
            return
        frame = encode(msg, self.params)
        _publish(self.event_bus, EventType.FRAME_SENT, sender="token", message_type=msg.message_type, frame=frame)
        self.endpoint.send(self.tamperer.to_system(frame))

    def _handle(self, msg: Optional[Message]) -> bool:
        """Process one inbound message; False once the session is over."""
        if isinstance(msg, Outcome):
            if self.state is not None:
                self.state = token_on_outcome(self.state, msg)
            return False
        if self.state is None:
            if not isinstance(msg, Setup):
                logger.warning("Token expected Setup; ignoring frame")
                self._reply(None)
                return True
            self.state, response = token_on_setup(self.params, msg, self.template, self.rng)
            self._reply(response)
            return True
        if isinstance(msg, Query):
            self.state, announce = token_on_query(self.state, msg)
            self._reply(announce)
            return True
        logger.warning("Token ignored an unexpected frame")
        self._reply(None)
        return True

    def run(self) -> None:
        try:
            while self._handle(_decode_or_none(self.endpoint.receive(), self.params)):
                pass
        except TransportError as e:
            logger.error(f"Token transport failed: {e}")
            self.error = e
        except Exception as e:
            logger.error(f"Token crashed: {e}", exc_info=True)
            self.error = e


def _publish(event_bus: Optional[EventBusInterface], event_type: EventType, **data) -> None:
    if event_bus is not None:
        event_bus.publish(event_type, **data)


class SessionRunner:
    """
    Runs sessions between a template-holding token and a sensing system
    that captures noisy samples of the same person.
    """

    def __init__(
        self,
        params: ProtocolParams,
        transport: TransportInterface,
        event_bus: Optional[EventBusInterface] = None,
        options: Optional[SessionOptions] = None,
    ):
        self.params = params
        self.transport = transport
        self.event_bus = event_bus
        self.options = options or SessionOptions()

    def _send(self, endpoint: ChannelEndpoint, msg: Message, tamperer: Tamperer, round_no: Optional[int] = None) -> None:
        frame = encode(msg, self.params)
        _publish(self.event_bus, EventType.FRAME_SENT, sender="system", message_type=msg.message_type, frame=frame)
        endpoint.send(tamperer.to_token(frame, round_no))

    def _receive(self, endpoint: ChannelEndpoint) -> Optional[Message]:
        return _decode_or_none(endpoint.receive(), self.params)

    def _drive_system(self, endpoint: ChannelEndpoint, template: FeatureVector, sensor: SyntheticSensor,
                      seed: int, tamperer: Tamperer) -> dict:
        params = self.params
        rng = SeededEntropy(derive_seed(seed, 0, b"system"))
        counters = {"queries_sent": 0, "verifiers_sent": 0, "matched_round": None}

        state, setup = system_start(params, rng)
        self._send(endpoint, setup, tamperer)
        reply = self._receive(endpoint)
        if isinstance(reply, TemplateResponse):
            state = system_on_template(state, reply)
        else:
            logger.warning("System expected TemplateResponse")
            state = system_abort(state, AbortReason.PROTOCOL_VIOLATION)

        while not state.is_terminal:
            captures = sensor.sample(template, params.max_queries_per_round)
            state, query = system_build_query(state, captures, rng)
            if query is None:
                break
            _publish(self.event_bus, EventType.ROUND_STARTED, round=query.round, verifiers=len(query.verifiers))
            self._send(endpoint, query, tamperer, round_no=query.round)
            counters["queries_sent"] += 1
            counters["verifiers_sent"] += len(query.verifiers)

            reply = self._receive(endpoint)
            if reply is None:
                continue
            if not isinstance(reply, MatchAnnounce):
                logger.warning(f"System expected MatchAnnounce or no reply, got {type(reply).__name__}")
                state = system_abort(state, AbortReason.PROTOCOL_VIOLATION)
                break
            _publish(self.event_bus, EventType.MATCH_ANNOUNCED, round=reply.round, index=reply.index)
            state, _ = system_on_match(state, reply)
            counters["matched_round"] = reply.round

        self._send(endpoint, state.outcome, tamperer)
        return {"state": state, **counters}

    def run(self, template: FeatureVector, model: NoiseModel, seed: int) -> SessionOutcome:
        """
        Run one session to its end.

        Raises:
            TransportError: If the channel failed; a protocol abort is
                reported in the returned outcome instead.
            ParameterError: If the noise model cannot drive the sensor.
        """
        started = time.perf_counter()
        token_id = self.options.token_id
        sensor = SyntheticSensor(replace(model, seed=derive_seed(seed, model.seed, b"sensor")), self.params)
        tamperer = Tamperer(self.options.tamper, self.params)
        _publish(self.event_bus, EventType.SESSION_STARTED, token_id=token_id, seed=seed,
                 transport=self.transport.kind.value)
        logger.info(f"Session for {token_id} starting over {self.transport.kind.value} (seed {seed})")

        system_end, token_end = self.transport.open_pair()
        agent = TokenAgent(token_end, self.params, template, derive_seed(seed, 0, b"token"), tamperer, self.event_bus)
        agent.start()
        try:
            result = self._drive_system(system_end, template, sensor, seed, tamperer)
            agent.join(self.options.join_timeout)
            if agent.is_alive():
                raise TransportError(f"token did not finish within {self.options.join_timeout:.1f}s")
            if agent.error is not None:
                if isinstance(agent.error, TransportError):
                    raise agent.error
                raise TransportError(f"token failed: {agent.error}", agent.error)
        except TransportError as e:
            logger.error(f"Session for {token_id} failed: {e}")
            _publish(self.event_bus, EventType.SESSION_ERROR, token_id=token_id, error=str(e))
            raise
        finally:
            system_end.close()
            token_end.close()

        state: SystemState = result["state"]
        token_state = agent.state
        outcome = state.outcome
        session = SessionOutcome(
            kind=outcome.kind,
            reason=outcome.reason,
            system_key=state.shared_key,
            token_key=token_state.shared_key if token_state is not None else None,
            rounds_used=state.rounds_used,
            queries_sent=result["queries_sent"],
            verifiers_sent=result["verifiers_sent"],
            matched_round=result["matched_round"],
            suspect_peer=token_id if outcome.reason is AbortReason.TAG_MISMATCH else None,
            wall_time=time.perf_counter() - started,
        )

        if session.succeeded:
            logger.info(f"Session for {token_id} established key {session.system_key.fingerprint} "
                        f"in round {session.matched_round}")
            _publish(self.event_bus, EventType.KEY_ESTABLISHED, token_id=token_id, outcome=session)
        else:
            logger.info(f"Session for {token_id} aborted: {session.reason.name}")
            if session.suspect_peer is not None:
                logger.warning(f"Peer {session.suspect_peer} sent a bad tag; treat it with caution")
            _publish(self.event_bus, EventType.SESSION_ABORTED, token_id=token_id, outcome=session)
        return session


def run_session(
    params: ProtocolParams,
    template: FeatureVector,
    model: NoiseModel,
    transport: Union[TransportInterface, TransportKind],
    seed: int,
    tamper: TamperMode = TamperMode.NONE,
    token_id: str = "token-0",
    event_bus: Optional[EventBusInterface] = None,
) -> SessionOutcome:
    """One session between a token holding template and a sensor sampling model."""
    if isinstance(transport, TransportKind):
        transport = make_transport(transport)
    runner = SessionRunner(params, transport, event_bus, SessionOptions(tamper=tamper, token_id=token_id))
    return runner.run(template, model, seed)
