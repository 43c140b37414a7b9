# obake/protocol/params.py

"""
Protocol parameters and the fixed-width modular feature vector.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, Tuple

import numpy as np

from ..errors import ParameterError

SUPPORTED_COMPONENT_BITS = (8, 16, 32)
MAX_DIGEST_LEN = 32
CHALLENGE_LEN = 32
DEFAULT_SESSION_ID_LEN = 16
MAX_U16 = 0xFFFF
MAX_FRAME_LEN = 0xFFFF
MAX_SESSION_ID_LEN = 255

# type octet, then u16 round, u16-prefixed challenge and u16 verifier count
QUERY_HEADER_LEN = 1 + 2 + 2 + CHALLENGE_LEN + 2


def _is_power_of_two(value: int) -> bool:
    return value > 0 and value & (value - 1) == 0


@dataclass(frozen=True)
class ProtocolParams:
    """Parameters shared by the user token and the sensing system."""
    dim: int
    component_bits: int
    thresholds: Tuple[int, ...]
    verifier_len: int = 16
    tag_len: int = 32
    key_len: int = 32
    max_rounds: int = 16
    max_queries_per_round: int = 4

    def __post_init__(self):
        # Accept any sequence for thresholds but store a tuple so params stay hashable
        object.__setattr__(self, "thresholds", tuple(int(t) for t in self.thresholds))

        if self.dim <= 0:
            raise ParameterError(f"dim must be positive, got {self.dim}")
        if self.component_bits not in SUPPORTED_COMPONENT_BITS:
            raise ParameterError(
                f"component_bits must be one of {SUPPORTED_COMPONENT_BITS}, got {self.component_bits}"
            )
        if len(self.thresholds) != self.dim:
            raise ParameterError(
                f"expected {self.dim} thresholds, got {len(self.thresholds)}"
            )
        for i, t in enumerate(self.thresholds):
            if not _is_power_of_two(t):
                raise ParameterError(f"threshold {i} must be a power of two, got {t}")
            if t >= 1 << (self.component_bits - 1):
                raise ParameterError(
                    f"threshold {i} must be below 2^{self.component_bits - 1}, got {t}"
                )
        if not 1 <= self.verifier_len <= MAX_DIGEST_LEN:
            raise ParameterError(f"verifier_len must be in [1, {MAX_DIGEST_LEN}], got {self.verifier_len}")
        if not 1 <= self.tag_len <= MAX_DIGEST_LEN:
            raise ParameterError(f"tag_len must be in [1, {MAX_DIGEST_LEN}], got {self.tag_len}")
        if not 1 <= self.key_len <= 255 * MAX_DIGEST_LEN:
            raise ParameterError(f"key_len out of range: {self.key_len}")
        if not 1 <= self.max_rounds <= MAX_U16 + 1:
            raise ParameterError(f"max_rounds must be in [1, {MAX_U16 + 1}], got {self.max_rounds}")
        if not 1 <= self.max_queries_per_round <= MAX_U16:
            raise ParameterError(
                f"max_queries_per_round must be in [1, {MAX_U16}], got {self.max_queries_per_round}"
            )
        for message, length in self.largest_frame_lens().items():
            if length > MAX_FRAME_LEN:
                raise ParameterError(
                    f"largest {message} frame would be {length} bytes, over the {MAX_FRAME_LEN}-byte limit"
                )

    @classmethod
    def uniform(cls, dim: int, component_bits: int, threshold: int, **kwargs) -> "ProtocolParams":
        """Build params with the same threshold in every dimension."""
        return cls(dim=dim, component_bits=component_bits, thresholds=(threshold,) * dim, **kwargs)

    @property
    def modulus(self) -> int:
        return 1 << self.component_bits

    @property
    def component_bytes(self) -> int:
        return self.component_bits // 8

    @property
    def cell_widths(self) -> Tuple[int, ...]:
        return tuple(2 * t for t in self.thresholds)

    @property
    def cells_per_dim(self) -> Tuple[int, ...]:
        return tuple(self.modulus // w for w in self.cell_widths)

    @property
    def nonce_len_global(self) -> int:
        return self.dim * self.component_bytes

    @property
    def nonce_len_blind(self) -> int:
        return self.dim * self.component_bytes

    def largest_frame_lens(self) -> Dict[str, int]:
        """Longest frame each parameter-sized message can take."""
        return {
            "Setup": 1 + 2 + MAX_SESSION_ID_LEN + 2 + self.nonce_len_global,
            "TemplateResponse": 1 + self.dim * self.component_bytes,
            "Query": QUERY_HEADER_LEN + self.max_queries_per_round * self.verifier_len,
        }

    def threshold_array(self) -> np.ndarray:
        return np.array(self.thresholds, dtype=np.int64)

    def width_array(self) -> np.ndarray:
        return np.array(self.cell_widths, dtype=np.int64)


@dataclass(frozen=True)
class FeatureVector:
    """
    A vector of `dim` integers in Z_{2^k}.

    Carries templates, captures, nonce-derived vectors and blinded sums.
    Components are reduced modulo 2^k on construction.
    """
    components: Tuple[int, ...]
    component_bits: int = field(default=8)

    def __post_init__(self):
        if self.component_bits not in SUPPORTED_COMPONENT_BITS:
            raise ParameterError(f"unsupported component width {self.component_bits}")
        modulus = 1 << self.component_bits
        object.__setattr__(self, "components", tuple(int(c) % modulus for c in self.components))

    @classmethod
    def from_array(cls, values: np.ndarray, component_bits: int) -> "FeatureVector":
        return cls(tuple(int(v) for v in values), component_bits)

    @classmethod
    def zero(cls, params: ProtocolParams) -> "FeatureVector":
        return cls((0,) * params.dim, params.component_bits)

    @classmethod
    def of(cls, values: Iterable[int], params: ProtocolParams) -> "FeatureVector":
        """Build a vector for params, checking the dimension."""
        vector = cls(tuple(values), params.component_bits)
        check_vector(vector, params)
        return vector

    @property
    def dim(self) -> int:
        return len(self.components)

    def as_array(self) -> np.ndarray:
        return np.array(self.components, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, index: int) -> int:
        return self.components[index]


def check_vector(vector: FeatureVector, params: ProtocolParams) -> None:
    """Raise ParameterError unless vector is valid under params."""
    if vector.dim != params.dim:
        raise ParameterError(f"vector has dimension {vector.dim}, params expect {params.dim}")
    if vector.component_bits != params.component_bits:
        raise ParameterError(
            f"vector lives in Z_2^{vector.component_bits}, params expect Z_2^{params.component_bits}"
        )


def check_same_ring(a: FeatureVector, b: FeatureVector) -> None:
    if a.dim != b.dim:
        raise ParameterError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a.component_bits != b.component_bits:
        raise ParameterError(f"component width mismatch: {a.component_bits} vs {b.component_bits}")
