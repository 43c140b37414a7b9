# obake/interfaces/transport.py

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple


class TransportKind(Enum):
    IN_PROCESS = "inproc"
    TCP_LOOPBACK = "tcp"


@dataclass
class TransportOptions:
    """Configuration options for a session transport."""
    receive_timeout: float = 5.0
    host: str = "127.0.0.1"


class ChannelEndpoint:
    """
    One side of a duplex, frame-oriented channel.

    Besides protocol frames an endpoint can carry an idle marker, the
    token's "nothing to say" answer to a query it did not match. The marker
    is transport-level and never reaches the wire codec.
    """

    def send(self, frame: bytes) -> None:
        """
        Send one protocol frame.

        Raises:
            TransportError: If the channel is closed or broken
        """
        raise NotImplementedError("Subclasses must implement this method")

    def send_idle(self) -> None:
        """Send the idle marker."""
        raise NotImplementedError("Subclasses must implement this method")

    def receive(self, timeout: Optional[float] = None) -> Optional[bytes]:
        """
        Receive the next frame, or None for the idle marker.

        Raises:
            TransportError: On timeout, closed channel or socket failure
        """
        raise NotImplementedError("Subclasses must implement this method")

    def close(self) -> None:
        raise NotImplementedError("Subclasses must implement this method")


class TransportInterface:
    """Factory for connected endpoint pairs."""

    kind: TransportKind

    def open_pair(self) -> Tuple[ChannelEndpoint, ChannelEndpoint]:
        """
        Open a fresh duplex channel.

        Returns:
            (system_endpoint, token_endpoint)

        Raises:
            TransportError: If the channel cannot be established
        """
        raise NotImplementedError("Subclasses must implement this method")
