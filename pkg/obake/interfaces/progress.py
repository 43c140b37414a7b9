# obake/interfaces/progress.py

from typing import Any

class ProgressDisplay:
    """Interface for displaying trial progress."""

    def initialize(self, total: int) -> None:
        """Start the display for a batch of total sessions."""
        raise NotImplementedError("Subclasses must implement this method")

    def update(self, **stats: Any) -> None:
        """
        Refresh the display with new statistics.

        Args:
            **stats: Key-value pairs of statistics to update
        """
        raise NotImplementedError("Subclasses must implement this method")

    def finalize(self) -> None:
        """Stop the display."""
        raise NotImplementedError("Subclasses must implement this method")
