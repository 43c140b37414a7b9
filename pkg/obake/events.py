# File: obake/events.py

from enum import Enum

class EventType(Enum):
    # Session events
    SESSION_STARTED = "session_started"
    FRAME_SENT = "frame_sent"
    ROUND_STARTED = "round_started"
    MATCH_ANNOUNCED = "match_announced"
    KEY_ESTABLISHED = "key_established"
    SESSION_ABORTED = "session_aborted"

    # Trial events
    TRIALS_STARTED = "trials_started"
    TRIAL_COMPLETED = "trial_completed"
    TRIALS_COMPLETED = "trials_completed"

    # Error events
    SESSION_ERROR = "session_error"
