# File: obake/ui/components.py

"""
Rich building blocks for the obake console.
"""

import logging
from typing import Optional

from rich.table import Table
from rich.text import Text

from ..common.stats_tracker import TrialReport
from ..events import EventType
from ..protocol.params import ProtocolParams

logger = logging.getLogger(__name__)


def format_time(seconds: float) -> str:
    """
    Format seconds into a readable time string.

    Args:
        seconds: Number of seconds to format

    Returns:
        Formatted time string
    """
    if seconds < 1:
        return f"{seconds * 1000:.1f}ms"
    if seconds < 60:
        return f"{seconds:.1f}s"
    elif seconds < 3600:
        minutes = int(seconds / 60)
        seconds_rem = seconds % 60
        return f"{minutes}m {seconds_rem:.1f}s"
    else:
        hours = int(seconds / 3600)
        seconds_rem = seconds % 3600
        minutes = int(seconds_rem / 60)
        seconds_rem %= 60
        return f"{hours}h {minutes}m {seconds_rem:.1f}s"


def create_params_table(params: ProtocolParams, seed: Optional[int] = None) -> Table:
    table = Table(show_header=False, box=None, padding=(0, 1))
    table.add_column("Key", style="dim", min_width=18)
    table.add_column("Value")

    table.add_row("Dimension", str(params.dim))
    table.add_row("Component bits", str(params.component_bits))
    if len(set(params.thresholds)) == 1:
        table.add_row("Threshold", str(params.thresholds[0]))
    else:
        table.add_row("Thresholds", ", ".join(str(t) for t in params.thresholds))
    table.add_row("Captures / round", str(params.max_queries_per_round))
    table.add_row("Max rounds", str(params.max_rounds))
    table.add_row("Verifier / tag", f"{params.verifier_len} / {params.tag_len} bytes")
    if seed is not None:
        table.add_row("Seed", str(seed))
    return table


def create_report_table(report: TrialReport) -> Table:
    """
    Create the final summary table for a trial batch.

    Args:
        report: Aggregated trial statistics

    Returns:
        Rich Table object
    """
    logger.debug(f"Creating report table: {report.succeeded}/{report.sessions_run} succeeded")

    table = Table(show_header=False, title="[bold]Trial Report[/bold]", title_style="bold white on blue", box=None)
    table.add_column("Statistic", style="dim", min_width=24)
    table.add_column("Value", justify="right")

    table.add_row("Sessions run", str(report.sessions_run))
    table.add_row("Key established", Text(str(report.succeeded), style="green"))
    table.add_row("Success rate", f"{report.success_rate:.2%}")
    for reason, count in sorted(report.aborted_by_reason.items()):
        table.add_row(f"Aborted: {reason}", Text(str(count), style="yellow"))
    for round_no, count in sorted(report.rounds_to_success.items()):
        table.add_row(f"Succeeded in round {round_no}", str(count))
    table.add_row("Queries sent", str(report.queries_sent))
    table.add_row("Verifiers sent", str(report.verifiers_sent))

    if report.suspect_peers:
        peers = ", ".join(f"{peer} ({n})" for peer, n in sorted(report.suspect_peers.items()))
        table.add_row("Suspect peers", Text(peers, style="bold red"))
    error_style = "bold red" if report.infrastructure_errors > 0 else ""
    table.add_row("Infrastructure errors", Text(str(report.infrastructure_errors), style=error_style))
    if report.key_mismatches:
        table.add_row("Key mismatches", Text(str(report.key_mismatches), style="bold red"))

    table.add_row("Mean time / session", format_time(report.mean_wall_time))
    table.add_row("Total session time", format_time(report.total_wall_time))
    return table


def get_event_style(event_type: EventType) -> str:
    event_styles = {
        EventType.SESSION_STARTED: "cyan bold",
        EventType.ROUND_STARTED: "blue",
        EventType.MATCH_ANNOUNCED: "magenta",
        EventType.KEY_ESTABLISHED: "bold green",
        EventType.SESSION_ABORTED: "bold yellow",
        EventType.SESSION_ERROR: "bold red",
    }
    return event_styles.get(event_type, "dim cyan")
