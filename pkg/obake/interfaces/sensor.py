# obake/interfaces/sensor.py

from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

from ..protocol.params import FeatureVector


class NoiseKind(Enum):
    BOUNDED_UNIFORM = "uniform"
    GAUSSIAN = "gauss"
    ADVERSARIAL = "adv"


@dataclass(frozen=True)
class NoiseModel:
    """
    How a simulated capture deviates from the template.

    magnitudes holds one value per dimension: the maximum deviation for
    BOUNDED_UNIFORM, sigma for GAUSSIAN, the exact offset for ADVERSARIAL.
    A capture is template + perturbation, reduced modulo 2^k.
    """
    kind: NoiseKind
    magnitudes: Tuple[float, ...]
    seed: int = 0


class SensorInterface:
    """Interface for a biometric sensor producing feature vectors."""

    def sample(self, template: FeatureVector, count: int) -> List[FeatureVector]:
        """
        Capture count feature vectors of the person holding the template.

        Raises:
            ParameterError: If count is outside [1, max_queries_per_round]
        """
        raise NotImplementedError("Subclasses must implement this method")
