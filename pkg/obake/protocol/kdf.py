# obake/protocol/kdf.py

"""
Cell-partitioned key derivation, MAC and constant-time comparison.

Vectors in the same cell derive the same key. Vectors in different cells
derive keys that look like independent random strings.
"""

import hashlib
import struct
from dataclasses import dataclass
from typing import Union

from cryptography.hazmat.primitives import constant_time, hashes, hmac
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from ..errors import ParameterError
from .params import MAX_DIGEST_LEN, FeatureVector, ProtocolParams
from .vector import cell_index

BBKDF_SALT = b"oBAKE-bbkdf-v1"
PARAMS_INFO_LABEL = b"oBAKE-params"


def key_fingerprint(key: bytes) -> str:
    """Short, non-reversible identifier for logs and console output."""
    return hashlib.sha256(key).hexdigest()[:16]


@dataclass(frozen=True)
class DerivedKey:
    """Key material derived from a cell; repr shows only a fingerprint."""
    value: bytes

    def __bytes__(self) -> bytes:
        return self.value

    def __repr__(self) -> str:
        return f"DerivedKey(fp={key_fingerprint(self.value)})"

    @property
    def fingerprint(self) -> str:
        return key_fingerprint(self.value)


@dataclass(frozen=True)
class Verifier:
    value: bytes

    def __bytes__(self) -> bytes:
        return self.value


@dataclass(frozen=True)
class Tag:
    value: bytes

    def __bytes__(self) -> bytes:
        return self.value


def encode_cell_index(indices) -> bytes:
    return b"".join(int(i).to_bytes(4, "big") for i in indices)


def params_info(params: ProtocolParams) -> bytes:
    """HKDF info binding the derivation to dim, k and thresholds."""
    header = struct.pack(">HB", params.dim, params.component_bits)
    return PARAMS_INFO_LABEL + header + b"".join(t.to_bytes(4, "big") for t in params.thresholds)


def bbkdf(vector: FeatureVector, params: ProtocolParams) -> DerivedKey:
    """HKDF-SHA-256 over the canonical encoding of the vector's cell index."""
    hkdf = HKDF(
        algorithm=hashes.SHA256(),
        length=params.key_len,
        salt=BBKDF_SALT,
        info=params_info(params),
    )
    return DerivedKey(hkdf.derive(encode_cell_index(cell_index(vector, params))))


def mac(message: bytes, key: Union[DerivedKey, bytes], out_len: int) -> bytes:
    """HMAC-SHA-256 truncated to out_len bytes."""
    if not 1 <= out_len <= MAX_DIGEST_LEN:
        raise ParameterError(f"mac output length must be in [1, {MAX_DIGEST_LEN}], got {out_len}")
    h = hmac.HMAC(bytes(key), hashes.SHA256())
    h.update(message)
    return h.finalize()[:out_len]


def ct_equal(a: bytes, b: bytes) -> bool:
    """Equality whose running time does not depend on where inputs differ."""
    if len(a) != len(b):
        return False
    return constant_time.bytes_eq(bytes(a), bytes(b))


def make_verifier(session_id: bytes, global_nonce: bytes, key: DerivedKey, params: ProtocolParams) -> Verifier:
    return Verifier(mac(session_id + global_nonce, key, params.verifier_len))


def make_tag(session_id: bytes, challenge: bytes, key: DerivedKey, params: ProtocolParams) -> Tag:
    return Tag(mac(session_id + challenge, key, params.tag_len))
