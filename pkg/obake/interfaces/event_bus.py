# obake/interfaces/event_bus.py

from typing import Callable, Any, Set
from ..events import EventType

class EventBus:
    """Interface for publishing session and trial events to observers."""

    def subscribe(self, event_type: EventType, callback: Callable[..., Any]) -> None:
        """
        Register callback for event_type.

        Args:
            event_type: Event to listen for
            callback: Called with the event's keyword data
        """
        raise NotImplementedError("Subclasses must implement this method")

    def unsubscribe(self, event_type: EventType, callback: Callable[..., Any]) -> bool:
        """
        Remove a registered callback.

        Returns:
            True if the callback was registered, False otherwise
        """
        raise NotImplementedError("Subclasses must implement this method")

    def publish(self, event_type: EventType, **data: Any) -> None:
        """
        Deliver an event to every subscriber. May be called from the token's
        worker thread as well as the system's.
        """
        raise NotImplementedError("Subclasses must implement this method")

    def get_event_types(self) -> Set[EventType]:
        """Event types that currently have subscribers."""
        raise NotImplementedError("Subclasses must implement this method")

    def has_subscribers(self, event_type: EventType) -> bool:
        raise NotImplementedError("Subclasses must implement this method")

    def clear_all_subscriptions(self) -> None:
        raise NotImplementedError("Subclasses must implement this method")
