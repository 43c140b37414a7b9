# obake/core/synthetic_sensor.py

import logging
from typing import List

import numpy as np

from ..errors import ParameterError
from ..interfaces.sensor import NoiseKind, NoiseModel, SensorInterface
from ..protocol.params import FeatureVector, ProtocolParams, check_vector

logger = logging.getLogger(__name__)


def _magnitudes(model: NoiseModel, dim: int) -> np.ndarray:
    values = np.asarray(model.magnitudes, dtype=np.float64)
    if values.size == 1:
        values = np.full(dim, values.item())
    if values.size != dim:
        raise ParameterError(f"noise model has {values.size} magnitudes for dimension {dim}")
    return values


class SyntheticSensor(SensorInterface):
    """
    Stand-in for a real biometric sensor: perturbs the template according to
    a NoiseModel. Draws come from one seeded generator, so every round gets
    fresh samples while the whole sequence stays reproducible.
    """

    def __init__(self, model: NoiseModel, params: ProtocolParams):
        self.model = model
        self.params = params
        self.magnitudes = _magnitudes(model, params.dim)
        if not np.all(np.isfinite(self.magnitudes)):
            raise ParameterError(f"noise magnitudes must be finite, got {model.magnitudes}")
        if np.any(np.abs(self.magnitudes) > params.modulus):
            raise ParameterError(f"noise magnitudes must not exceed the modulus 2^{params.component_bits}")
        if model.kind is NoiseKind.BOUNDED_UNIFORM:
            if np.any(self.magnitudes < 0) or np.any(self.magnitudes != np.floor(self.magnitudes)):
                raise ParameterError("uniform noise bounds must be non-negative integers")
        elif model.kind is NoiseKind.GAUSSIAN:
            if np.any(self.magnitudes < 0):
                raise ParameterError("gaussian sigma must be non-negative")
        elif np.any(self.magnitudes != np.floor(self.magnitudes)):
            raise ParameterError("adversarial offsets must be integers")
        self._generator = np.random.Generator(np.random.PCG64(model.seed))

    def _perturbations(self, count: int) -> np.ndarray:
        shape = (count, self.params.dim)
        if self.model.kind is NoiseKind.BOUNDED_UNIFORM:
            bounds = self.magnitudes.astype(np.int64)
            return self._generator.integers(-bounds, bounds, size=shape, endpoint=True)
        if self.model.kind is NoiseKind.GAUSSIAN:
            return np.rint(self._generator.normal(0.0, self.magnitudes, size=shape)).astype(np.int64)
        return np.broadcast_to(self.magnitudes.astype(np.int64), shape)

    def sample(self, template: FeatureVector, count: int) -> List[FeatureVector]:
        check_vector(template, self.params)
        if not 1 <= count <= self.params.max_queries_per_round:
            raise ParameterError(
                f"sample count must be in [1, {self.params.max_queries_per_round}], got {count}"
            )
        captures = (template.as_array() + self._perturbations(count)) % self.params.modulus
        return [FeatureVector.from_array(row, self.params.component_bits) for row in captures]


def sensor_sample(
    template: FeatureVector,
    model: NoiseModel,
    count: int,
    params: ProtocolParams,
) -> List[FeatureVector]:
    """One batch of captures from a fresh sensor seeded with model.seed."""
    return SyntheticSensor(model, params).sample(template, count)


def random_template(params: ProtocolParams, seed: int) -> FeatureVector:
    generator = np.random.Generator(np.random.PCG64(seed))
    values = generator.integers(0, params.modulus, size=params.dim, dtype=np.int64)
    return FeatureVector.from_array(values, params.component_bits)
