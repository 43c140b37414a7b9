# File: obake/ui/rich_progress.py

"""
Rich progress bar for trial batches, fed by the event bus.
"""

import logging
from typing import Any, Optional

from rich.console import Console
from rich.progress import BarColumn, MofNCompleteColumn, Progress, SpinnerColumn, TextColumn, TimeElapsedColumn

from ..events import EventType
from ..interfaces.event_bus import EventBus as EventBusInterface
from ..interfaces.progress import ProgressDisplay
from .event_handlers import EventHandlers

logger = logging.getLogger(__name__)


class RichProgressDisplay(ProgressDisplay):
    """Live progress bar with running success / abort / error counts."""

    def __init__(self, event_bus: EventBusInterface, console: Optional[Console] = None):
        self.event_bus = event_bus
        self.console = console or Console(stderr=True)
        self.progress = Progress(
            SpinnerColumn(),
            TextColumn("[bold blue]Trials[/bold blue]"),
            BarColumn(),
            MofNCompleteColumn(),
            TextColumn("{task.description}"),
            TimeElapsedColumn(),
            console=self.console,
            expand=True,
        )
        self.task_id = None
        self.event_handlers = EventHandlers(update_callback=self.update)

    def _subscribe_to_events(self) -> None:
        self.event_bus.subscribe(EventType.TRIALS_STARTED, self.event_handlers.handle_trials_started)
        self.event_bus.subscribe(EventType.TRIAL_COMPLETED, self.event_handlers.handle_trial_completed)
        self.event_bus.subscribe(EventType.TRIALS_COMPLETED, self.event_handlers.handle_trials_completed)

    def _unsubscribe_from_events(self) -> None:
        self.event_bus.unsubscribe(EventType.TRIALS_STARTED, self.event_handlers.handle_trials_started)
        self.event_bus.unsubscribe(EventType.TRIAL_COMPLETED, self.event_handlers.handle_trial_completed)
        self.event_bus.unsubscribe(EventType.TRIALS_COMPLETED, self.event_handlers.handle_trials_completed)

    def initialize(self, total: int) -> None:
        self._subscribe_to_events()
        self.task_id = self.progress.add_task(description="starting", total=total)
        self.progress.start()

    def update(self, **stats: Any) -> None:
        if self.task_id is None:
            return
        description = (f"[green]{stats.get('succeeded', 0)} ok[/green] "
                       f"[yellow]{stats.get('aborted', 0)} aborted[/yellow] "
                       f"[red]{stats.get('errors', 0)} errors[/red]")
        self.progress.update(self.task_id, completed=stats.get("completed", 0),
                             total=stats.get("total") or None, description=description)

    def finalize(self) -> None:
        self._unsubscribe_from_events()
        self.progress.stop()
