# obake/core/__init__.py
from .event_bus import EventBus
from .inprocess_transport import InProcessTransport
from .tcp_transport import TcpLoopbackTransport
from .synthetic_sensor import SyntheticSensor, sensor_sample, random_template
from .template_store import TemplateStore
from .tampering import TamperMode, Tamperer
from .session_runner import SessionRunner, SessionOptions, SessionOutcome, run_session, derive_seed
from .trial_runner import TrialConfig, run_trials

__all__ = [
    "EventBus",
    "InProcessTransport",
    "TcpLoopbackTransport",
    "SyntheticSensor",
    "sensor_sample",
    "random_template",
    "TemplateStore",
    "TamperMode",
    "Tamperer",
    "SessionRunner",
    "SessionOptions",
    "SessionOutcome",
    "run_session",
    "derive_seed",
    "TrialConfig",
    "run_trials",
]
