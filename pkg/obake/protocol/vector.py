# obake/protocol/vector.py

"""
Modular vector arithmetic, nonce vectorization and cell centralization.

The `*_array` helpers operate on numpy integer arrays whose last axis is the
vector dimension, so the same arithmetic serves single vectors and bulk
checks. The FeatureVector functions are thin wrappers around them.
"""

from typing import List

import numpy as np

from ..errors import ParameterError
from .params import FeatureVector, ProtocolParams, check_same_ring, check_vector


# --- array level ---

def mod_add_array(a: np.ndarray, b: np.ndarray, component_bits: int) -> np.ndarray:
    return (a + b) % (1 << component_bits)


def mod_sub_array(a: np.ndarray, b: np.ndarray, component_bits: int) -> np.ndarray:
    return (a - b) % (1 << component_bits)


def cell_index_array(values: np.ndarray, params: ProtocolParams) -> np.ndarray:
    return values // params.width_array()


def centralize_array(values: np.ndarray, params: ProtocolParams) -> np.ndarray:
    widths = params.width_array()
    return widths * (values // widths) + params.threshold_array()


def centered_array(values: np.ndarray, component_bits: int) -> np.ndarray:
    """Map residues to their representative in [-2^(k-1), 2^(k-1))."""
    half = 1 << (component_bits - 1)
    return ((values + half) % (1 << component_bits)) - half


# --- vector level ---

def vec_add(a: FeatureVector, b: FeatureVector) -> FeatureVector:
    """Componentwise sum modulo 2^k."""
    check_same_ring(a, b)
    return FeatureVector.from_array(
        mod_add_array(a.as_array(), b.as_array(), a.component_bits), a.component_bits
    )


def vec_sub(a: FeatureVector, b: FeatureVector) -> FeatureVector:
    """Componentwise difference modulo 2^k."""
    check_same_ring(a, b)
    return FeatureVector.from_array(
        mod_sub_array(a.as_array(), b.as_array(), a.component_bits), a.component_bits
    )


def vectorize(nonce: bytes, params: ProtocolParams) -> FeatureVector:
    """
    Split a nonce into `dim` big-endian chunks of k/8 bytes, one per component.

    This is a bijection between nonces of exactly dim*k/8 bytes and vectors.
    """
    if len(nonce) != params.nonce_len_global:
        raise ParameterError(
            f"nonce must be {params.nonce_len_global} bytes for dim={params.dim}, "
            f"k={params.component_bits}; got {len(nonce)}"
        )
    width = params.component_bytes
    components = tuple(
        int.from_bytes(nonce[i * width:(i + 1) * width], "big") for i in range(params.dim)
    )
    return FeatureVector(components, params.component_bits)


def devectorize(vector: FeatureVector, params: ProtocolParams) -> bytes:
    """Inverse of vectorize."""
    check_vector(vector, params)
    width = params.component_bytes
    return b"".join(c.to_bytes(width, "big") for c in vector.components)


def cell_index(vector: FeatureVector, params: ProtocolParams) -> List[int]:
    """Index of the cell each component occupies: floor(v_i / (2 t_i))."""
    check_vector(vector, params)
    return [int(i) for i in cell_index_array(vector.as_array(), params)]


def centralize(vector: FeatureVector, params: ProtocolParams) -> FeatureVector:
    """Center of the cell the vector occupies."""
    check_vector(vector, params)
    return FeatureVector.from_array(
        centralize_array(vector.as_array(), params), params.component_bits
    )


def centered(vector: FeatureVector) -> List[int]:
    return [int(c) for c in centered_array(vector.as_array(), vector.component_bits)]


def is_close(a: FeatureVector, b: FeatureVector, params: ProtocolParams) -> bool:
    """True when every centered difference a_i - b_i lies strictly inside (-t_i, t_i)."""
    check_vector(a, params)
    check_vector(b, params)
    delta = centered_array(
        mod_sub_array(a.as_array(), b.as_array(), params.component_bits), params.component_bits
    )
    return bool(np.all(np.abs(delta) < params.threshold_array()))
