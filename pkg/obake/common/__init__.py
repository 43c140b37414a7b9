"""
Common utilities for the obake package.
"""

from .stats_tracker import StatsTracker, TrialReport, TrialRow

__all__ = ['StatsTracker', 'TrialReport', 'TrialRow']
