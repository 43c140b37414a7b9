# obake/core/tcp_transport.py

"""
TCP loopback transport: one duplex connection per session, each frame sent
as [u16 big-endian length | frame]. A zero length is the idle marker.
"""

import logging
import socket
import struct
from typing import Optional, Tuple

from ..errors import TransportError
from ..interfaces.transport import ChannelEndpoint, TransportInterface, TransportKind, TransportOptions
from ..protocol.codec import MAX_FRAME_LEN

logger = logging.getLogger(__name__)

_LENGTH = struct.Struct(">H")


class SocketEndpoint(ChannelEndpoint):
    """Length-prefixed framing over a connected stream socket."""

    def __init__(self, sock: socket.socket, name: str, default_timeout: float):
        self.sock = sock
        self.name = name
        self.default_timeout = default_timeout
        self.closed = False

    def _send_raw(self, payload: bytes) -> None:
        if self.closed:
            raise TransportError(f"{self.name}: send on closed endpoint")
        try:
            self.sock.sendall(_LENGTH.pack(len(payload)) + payload)
        except OSError as e:
            raise TransportError(f"{self.name}: send failed: {e}", e) from e

    def send(self, frame: bytes) -> None:
        if not 0 < len(frame) <= MAX_FRAME_LEN:
            raise TransportError(f"{self.name}: cannot send a frame of {len(frame)} bytes")
        self._send_raw(bytes(frame))

    def send_idle(self) -> None:
        self._send_raw(b"")

    def _recv_exact(self, n: int) -> bytes:
        chunks = []
        remaining = n
        while remaining:
            chunk = self.sock.recv(remaining)
            if not chunk:
                raise TransportError(f"{self.name}: peer closed the connection")
            chunks.append(chunk)
            remaining -= len(chunk)
        return b"".join(chunks)

    def receive(self, timeout: Optional[float] = None) -> Optional[bytes]:
        if self.closed:
            raise TransportError(f"{self.name}: receive on closed endpoint")
        wait = self.default_timeout if timeout is None else timeout
        try:
            self.sock.settimeout(wait)
            (length,) = _LENGTH.unpack(self._recv_exact(_LENGTH.size))
            if length == 0:
                return None
            return self._recv_exact(length)
        except socket.timeout as e:
            raise TransportError(f"{self.name}: no frame within {wait:.1f}s", e) from e
        except OSError as e:
            raise TransportError(f"{self.name}: receive failed: {e}", e) from e

    def close(self) -> None:
        if self.closed:
            return
        self.closed = True
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self.sock.close()


class TcpLoopbackTransport(TransportInterface):
    """Opens a fresh loopback connection for every session."""

    kind = TransportKind.TCP_LOOPBACK

    def __init__(self, options: Optional[TransportOptions] = None):
        self.options = options or TransportOptions()

    def open_pair(self) -> Tuple[ChannelEndpoint, ChannelEndpoint]:
        timeout = self.options.receive_timeout
        try:
            with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as listener:
                listener.bind((self.options.host, 0))
                listener.listen(1)
                listener.settimeout(timeout)
                port = listener.getsockname()[1]
                client = socket.create_connection((self.options.host, port), timeout=timeout)
                server, _ = listener.accept()
        except OSError as e:
            logger.error(f"Could not open loopback connection: {e}")
            raise TransportError(f"could not open loopback connection: {e}", e) from e

        for sock in (client, server):
            sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        logger.debug(f"Loopback connection established on port {port}")
        return SocketEndpoint(client, "system", timeout), SocketEndpoint(server, "token", timeout)
