# obake/core/inprocess_transport.py

import logging
import queue
from typing import Optional, Tuple

from ..errors import TransportError
from ..interfaces.transport import ChannelEndpoint, TransportInterface, TransportKind, TransportOptions

logger = logging.getLogger(__name__)

_IDLE = object()
_CLOSED = object()


class QueueEndpoint(ChannelEndpoint):
    """Endpoint backed by a pair of in-memory queues."""

    def __init__(self, inbox: "queue.Queue", outbox: "queue.Queue", name: str, default_timeout: float):
        self.inbox = inbox
        self.outbox = outbox
        self.name = name
        self.default_timeout = default_timeout
        self.closed = False

    def _put(self, item) -> None:
        if self.closed:
            raise TransportError(f"{self.name}: send on closed endpoint")
        self.outbox.put(item)

    def send(self, frame: bytes) -> None:
        self._put(bytes(frame))

    def send_idle(self) -> None:
        self._put(_IDLE)

    def receive(self, timeout: Optional[float] = None) -> Optional[bytes]:
        if self.closed:
            raise TransportError(f"{self.name}: receive on closed endpoint")
        wait = self.default_timeout if timeout is None else timeout
        try:
            item = self.inbox.get(timeout=wait)
        except queue.Empty as e:
            raise TransportError(f"{self.name}: no frame within {wait:.1f}s", e) from e
        if item is _CLOSED:
            raise TransportError(f"{self.name}: peer closed the channel")
        if item is _IDLE:
            return None
        return item

    def close(self) -> None:
        if not self.closed:
            self.closed = True
            self.outbox.put(_CLOSED)


class InProcessTransport(TransportInterface):
    """Duplex channel between two threads of the same process."""

    kind = TransportKind.IN_PROCESS

    def __init__(self, options: Optional[TransportOptions] = None):
        self.options = options or TransportOptions()

    def open_pair(self) -> Tuple[ChannelEndpoint, ChannelEndpoint]:
        to_token: "queue.Queue" = queue.Queue()
        to_system: "queue.Queue" = queue.Queue()
        timeout = self.options.receive_timeout
        system_end = QueueEndpoint(to_system, to_token, "system", timeout)
        token_end = QueueEndpoint(to_token, to_system, "token", timeout)
        return system_end, token_end
