# File: obake/ui/event_handlers.py

import logging
from typing import Any, Callable, Dict, Optional

from rich.console import Console
from rich.text import Text

from ..events import EventType
from ..interfaces.event_bus import EventBus as EventBusInterface
from .components import get_event_style

logger = logging.getLogger(__name__)


class EventHandlers:
    """Turns trial events into progress-display updates."""

    def __init__(self, update_callback: Callable[..., None]):
        self.update_stats_display = update_callback
        self.stats: Dict[str, int] = {"total": 0, "completed": 0, "succeeded": 0, "aborted": 0, "errors": 0}

    def handle_trials_started(self, event_type: EventType, **data):
        self.stats.update(total=data.get("total", 0), completed=0, succeeded=0, aborted=0, errors=0)
        self.update_stats_display(**self.stats)

    def handle_trial_completed(self, event_type: EventType, **data):
        row = data.get("row")
        self.stats["completed"] += 1
        if row is None or row.outcome is None:
            self.stats["errors"] += 1
        elif row.outcome.succeeded:
            self.stats["succeeded"] += 1
        else:
            self.stats["aborted"] += 1
        self.update_stats_display(**self.stats)

    def handle_trials_completed(self, event_type: EventType, **data):
        self.update_stats_display(**self.stats)


class FramePrinter:
    """
    Prints every frame of a session as it is sent, for `obake demo`.
    Keys are shown only as fingerprints.
    """

    def __init__(self, console: Optional[Console] = None):
        self.console = console or Console()

    def subscribe(self, event_bus: EventBusInterface) -> None:
        event_bus.subscribe(EventType.SESSION_STARTED, self.handle_session_started)
        event_bus.subscribe(EventType.FRAME_SENT, self.handle_frame_sent)
        event_bus.subscribe(EventType.ROUND_STARTED, self.handle_round_started)
        event_bus.subscribe(EventType.KEY_ESTABLISHED, self.handle_session_finished)
        event_bus.subscribe(EventType.SESSION_ABORTED, self.handle_session_finished)
        event_bus.subscribe(EventType.SESSION_ERROR, self.handle_session_error)

    def _line(self, event_type: EventType, message: str) -> None:
        self.console.print(Text.assemble(Text(f"[{event_type.value}] ", style=get_event_style(event_type)),
                                         Text(message)))

    def handle_session_started(self, event_type: EventType, **data: Any):
        self._line(event_type, f"token {data.get('token_id')} over {data.get('transport')}, seed {data.get('seed')}")

    def handle_round_started(self, event_type: EventType, **data: Any):
        self._line(event_type, f"round {data.get('round')} with {data.get('verifiers')} verifier(s)")

    def handle_frame_sent(self, event_type: EventType, **data: Any):
        sender = data.get("sender", "?")
        arrow = "system -> token" if sender == "system" else "token -> system"
        message_type = data.get("message_type")
        frame = data.get("frame")
        if frame is None:
            self.console.print(f"  {arrow}  [dim](no reply)[/dim]")
            return
        hex_text = frame.hex(" ")
        self.console.print(f"  {arrow}  [bold]{message_type.name}[/bold] [dim]{hex_text}[/dim]")

    def handle_session_finished(self, event_type: EventType, **data: Any):
        outcome = data.get("outcome")
        if outcome is None:
            return
        if outcome.succeeded:
            self._line(event_type, f"round {outcome.matched_round}")
        else:
            self._line(event_type, outcome.reason.name)
        system_fp = outcome.system_key.fingerprint if outcome.system_key else "-"
        token_fp = outcome.token_key.fingerprint if outcome.token_key else "-"
        self.console.print(f"  system key fingerprint: {system_fp}")
        self.console.print(f"  token key fingerprint:  {token_fp}")

    def handle_session_error(self, event_type: EventType, **data: Any):
        self._line(event_type, str(data.get("error")))
