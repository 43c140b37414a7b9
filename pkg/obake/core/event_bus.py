# obake/core/event_bus.py

import logging
import threading
from typing import Callable, Dict, Any, List, Set
from ..interfaces.event_bus import EventBus as EventBusInterface
from ..events import EventType

logger = logging.getLogger(__name__)

class EventBus(EventBusInterface):
    """
    Synchronous event bus shared by the session runner, the trial runner and
    the console.

    Token and system run on different threads, so subscription changes and
    deliveries are serialized by a lock. Callbacks run on the publishing
    thread.
    """

    def __init__(self, debug_logging: bool = False):
        """
        Initialize a new event bus.

        Args:
            debug_logging: Whether to log all events for debugging
        """
        self.listeners: Dict[EventType, List[Callable[..., Any]]] = {}
        self.debug_logging = debug_logging
        self._lock = threading.RLock()

    def subscribe(self, event_type: EventType, callback: Callable[..., Any]) -> None:
        with self._lock:
            callbacks = self.listeners.setdefault(event_type, [])
            if callback not in callbacks:
                callbacks.append(callback)
                logger.debug(f"Subscribed to event '{event_type.name}'")

    def unsubscribe(self, event_type: EventType, callback: Callable[..., Any]) -> bool:
        with self._lock:
            if callback in self.listeners.get(event_type, []):
                self.listeners[event_type].remove(callback)
                logger.debug(f"Unsubscribed from event '{event_type.name}'")
                return True
        return False

    def publish(self, event_type: EventType, **data: Any) -> None:
        if self.debug_logging:
            logger.debug(f"Event published: {event_type.name} - {data}")

        with self._lock:
            callbacks = list(self.listeners.get(event_type, []))
            for callback in callbacks:
                try:
                    callback(event_type=event_type, **data)
                except Exception as e:
                    # A broken observer must not break a session
                    logger.error(f"Error in event handler for '{event_type.name}': {e}")

    def get_event_types(self) -> Set[EventType]:
        with self._lock:
            return {t for t, callbacks in self.listeners.items() if callbacks}

    def has_subscribers(self, event_type: EventType) -> bool:
        with self._lock:
            return bool(self.listeners.get(event_type))

    def clear_all_subscriptions(self) -> None:
        with self._lock:
            self.listeners.clear()
        logger.debug("All event subscriptions cleared")
