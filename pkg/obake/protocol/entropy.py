# obake/protocol/entropy.py

import logging
import secrets

import numpy as np

from ..errors import EntropyError

logger = logging.getLogger(__name__)


class EntropySource:
    """Interface for the random byte generator each role draws nonces from."""

    def token_bytes(self, n: int) -> bytes:
        """
        Return n random bytes.

        Raises:
            EntropyError: If the source cannot deliver.
        """
        raise NotImplementedError("Subclasses must implement this method")


class SystemEntropy(EntropySource):
    """Cryptographically secure source backed by the operating system."""

    def token_bytes(self, n: int) -> bytes:
        try:
            return secrets.token_bytes(n)
        except Exception as e:
            logger.error(f"System entropy source failed: {e}")
            raise EntropyError(f"system entropy source failed: {e}") from e


class SeededEntropy(EntropySource):
    """
    Deterministic source for reproducible simulation runs.

    Not secure: anyone who knows the seed can predict every nonce.
    """

    def __init__(self, seed: int):
        self.seed = seed
        self._generator = np.random.Generator(np.random.PCG64(seed))

    def token_bytes(self, n: int) -> bytes:
        if n < 0:
            raise EntropyError(f"cannot draw {n} bytes")
        return self._generator.bytes(n)
