# File: obake/config.py

import json
import logging
import math
import os
import secrets
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

from dotenv import load_dotenv

from .core.tampering import TamperMode
from .errors import ConfigError, ParameterError
from .interfaces.sensor import NoiseKind, NoiseModel
from .interfaces.transport import TransportKind, TransportOptions
from .protocol.params import ProtocolParams

logger = logging.getLogger(__name__)

# --- Default Paths and Constants ---

PROJECT_ROOT_DIR = Path(__file__).resolve().parent.parent
DEFAULT_CONFIG_DIR = PROJECT_ROOT_DIR / "config"
DEFAULT_LOGS_DIR = PROJECT_ROOT_DIR / "logs"
DEFAULT_LOG_FILE = DEFAULT_LOGS_DIR / "obake.log"
DEFAULT_PROFILES_FILE_NAME = "profiles.json"

SEED_ENV_VAR = "OBAKE_SEED"
SEED_LIMIT = 1 << 64

DEFAULT_DIM = 8
DEFAULT_COMPONENT_BITS = 8
DEFAULT_THRESHOLD = 4
DEFAULT_VERIFIER_LEN = 16
DEFAULT_TAG_LEN = 32
DEFAULT_KEY_LEN = 32
DEFAULT_MAX_ROUNDS = 16
DEFAULT_QUERIES_PER_ROUND = 4
DEFAULT_NOISE = "uniform:1"
DEFAULT_TRANSPORT = "inproc"
DEFAULT_TAMPER = "none"
DEFAULT_RECEIVE_TIMEOUT = 5.0


@dataclass
class SimulationConfig:
    """Everything a demo or trial batch needs besides the seed."""
    params: ProtocolParams
    noise: NoiseModel
    transport: TransportKind = TransportKind.IN_PROCESS
    tamper: TamperMode = TamperMode.NONE
    profile_name: Optional[str] = None
    transport_options: TransportOptions = field(default_factory=TransportOptions)


def load_environment(env_file: Optional[Path] = None) -> None:
    """Load a .env file into os.environ without overriding what is already set."""
    if load_dotenv(dotenv_path=env_file):
        logger.info(f"Loaded environment from {env_file or '.env'}")


def parse_seed(value: Union[str, int], source: str) -> int:
    try:
        seed = int(str(value).strip(), 0)
    except ValueError as e:
        raise ConfigError(f"{source}: seed must be an integer, got '{value}'") from e
    if not 0 <= seed < SEED_LIMIT:
        raise ConfigError(f"{source}: seed must be in [0, 2^64), got {seed}")
    return seed


def resolve_master_seed(cmd_line_seed: Optional[Union[str, int]] = None) -> Tuple[int, str]:
    """
    Pick the master seed: command line, then OBAKE_SEED, then a fresh random one.

    Returns:
        (seed, source) where source names where the seed came from
    """
    if cmd_line_seed is not None:
        return parse_seed(cmd_line_seed, "--seed"), "command line"
    env_value = os.getenv(SEED_ENV_VAR)
    if env_value:
        return parse_seed(env_value, SEED_ENV_VAR), SEED_ENV_VAR
    seed = secrets.randbits(64)
    logger.info(f"No seed given; drew master seed {seed}")
    return seed, "random"


def parse_thresholds(value: Union[str, int, Sequence[int]], dim: int) -> Tuple[int, ...]:
    """'4' or 4 applies to every dimension; '4,8' or [4, 8] lists one per dimension."""
    try:
        if isinstance(value, int):
            items = [value]
        elif isinstance(value, str):
            items = [int(v) for v in value.split(",") if v.strip()]
        else:
            items = [int(v) for v in value]
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad threshold list '{value}': {e}") from e
    if len(items) == 1:
        return (items[0],) * dim
    if len(items) != dim:
        raise ConfigError(f"{len(items)} thresholds given for dimension {dim}")
    return tuple(items)


def parse_noise_spec(spec: str, seed: int = 0) -> NoiseModel:
    """
    Parse 'uniform:N', 'gauss:S' or 'adv:V[,V...]' into a NoiseModel.
    A single magnitude applies to every dimension.
    """
    kind_name, sep, values = spec.partition(":")
    try:
        kind = NoiseKind(kind_name.strip().lower())
    except ValueError:
        raise ConfigError(
            f"unknown noise kind '{kind_name}', expected one of {[k.value for k in NoiseKind]}"
        ) from None
    if not sep or not values.strip():
        raise ConfigError(f"noise spec '{spec}' has no magnitude")
    try:
        magnitudes = tuple(float(v) for v in values.split(",") if v.strip())
    except ValueError as e:
        raise ConfigError(f"bad noise magnitude in '{spec}': {e}") from e
    if not all(math.isfinite(m) for m in magnitudes):
        raise ConfigError(f"noise magnitudes must be finite, got '{values}'")
    if kind is not NoiseKind.GAUSSIAN and any(m != int(m) for m in magnitudes):
        raise ConfigError(f"{kind.value} noise takes integer magnitudes, got '{values}'")
    return NoiseModel(kind=kind, magnitudes=magnitudes, seed=seed)


# --- Configuration Loading Functions ---

def _load_json_config_file(file_path: Path, file_description: str) -> Dict[str, Any]:
    if not file_path.exists():
        logger.warning(f"{file_description} file not found at: {file_path}")
        return {}
    try:
        with open(file_path, 'r', encoding='utf-8') as f:
            config_data = json.load(f)
        logger.info(f"Successfully loaded {file_description} from {file_path}")
        return config_data
    except json.JSONDecodeError as e:
        msg = f"Error decoding JSON from {file_description} file {file_path}: {e}"
        logger.error(msg)
        raise ConfigError(msg) from e
    except OSError as e:
        msg = f"Could not read {file_description} file {file_path}: {e}"
        logger.error(msg)
        raise ConfigError(msg) from e


def load_profiles_config(profiles_file_path: Path) -> Dict[str, Any]:
    """
    Loads named parameter profiles from a JSON file.
    Expected structure: {"profiles": [{"name": "default", "dim": 8, ...}]}
    A missing file yields no profiles.
    """
    data = _load_json_config_file(profiles_file_path, "profiles configuration")
    if not data:
        return {"profiles": []}
    if not isinstance(data.get("profiles"), list):
        msg = f"Profiles file {profiles_file_path} is missing 'profiles' list."
        logger.error(msg)
        raise ConfigError(msg)
    return data


def get_profile_by_name(profiles_data: Dict[str, Any], name: str) -> Optional[Dict[str, Any]]:
    for profile in profiles_data.get("profiles", []):
        if isinstance(profile, dict) and profile.get("name") == name:
            return profile
    return None


def load_simulation_config(
    config_dir_path: Optional[Path] = None,
    profile_name: Optional[str] = None,
    cmd_line_options: Optional[Dict[str, Any]] = None,
    noise_seed: int = 0,
) -> SimulationConfig:
    """
    Build the SimulationConfig for a run.
    Prioritizes command-line overrides, then the selected profile, then defaults.
    """
    cfg_dir = config_dir_path if config_dir_path else DEFAULT_CONFIG_DIR
    settings: Dict[str, Any] = {
        "dim": DEFAULT_DIM,
        "bits": DEFAULT_COMPONENT_BITS,
        "threshold": DEFAULT_THRESHOLD,
        "verifier_len": DEFAULT_VERIFIER_LEN,
        "tag_len": DEFAULT_TAG_LEN,
        "key_len": DEFAULT_KEY_LEN,
        "max_rounds": DEFAULT_MAX_ROUNDS,
        "queries_per_round": DEFAULT_QUERIES_PER_ROUND,
        "noise": DEFAULT_NOISE,
        "transport": DEFAULT_TRANSPORT,
        "tamper": DEFAULT_TAMPER,
        "receive_timeout": DEFAULT_RECEIVE_TIMEOUT,
    }

    if profile_name:
        profiles_path = cfg_dir / DEFAULT_PROFILES_FILE_NAME
        profile = get_profile_by_name(load_profiles_config(profiles_path), profile_name)
        if profile is None:
            raise ConfigError(f"Profile '{profile_name}' not found in {profiles_path}")
        unknown = set(profile) - set(settings) - {"name", "description"}
        if unknown:
            logger.warning(f"Profile '{profile_name}' has unknown keys {sorted(unknown)}; ignoring them")
        settings.update({k: v for k, v in profile.items() if k in settings})
        logger.info(f"Using profile '{profile_name}'")

    for key, value in (cmd_line_options or {}).items():
        if key in settings and value is not None:
            settings[key] = value

    try:
        dim = int(settings["dim"])
        params = ProtocolParams(
            dim=dim,
            component_bits=int(settings["bits"]),
            thresholds=parse_thresholds(settings["threshold"], dim),
            verifier_len=int(settings["verifier_len"]),
            tag_len=int(settings["tag_len"]),
            key_len=int(settings["key_len"]),
            max_rounds=int(settings["max_rounds"]),
            max_queries_per_round=int(settings["queries_per_round"]),
        )
        transport = TransportKind(settings["transport"])
        tamper = TamperMode(settings["tamper"])
        receive_timeout = float(settings["receive_timeout"])
    except (ParameterError, TypeError, ValueError) as e:
        raise ConfigError(f"Invalid simulation settings: {e}") from e

    noise = parse_noise_spec(str(settings["noise"]), seed=noise_seed)
    if len(noise.magnitudes) not in (1, params.dim):
        raise ConfigError(f"noise spec has {len(noise.magnitudes)} magnitudes for dimension {params.dim}")
    if any(abs(m) > params.modulus for m in noise.magnitudes):
        raise ConfigError(f"noise magnitudes must not exceed the modulus 2^{params.component_bits}")
    if receive_timeout <= 0:
        raise ConfigError(f"receive timeout must be positive, got {receive_timeout}")

    config = SimulationConfig(params=params, noise=noise, transport=transport, tamper=tamper,
                              profile_name=profile_name,
                              transport_options=TransportOptions(receive_timeout=receive_timeout))
    logger.info(f"Simulation configuration loaded: {config}")
    return config
