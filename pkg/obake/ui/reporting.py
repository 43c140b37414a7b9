# File: obake/ui/reporting.py

import json
import logging
from typing import Optional, TextIO

from rich.console import Console

from ..common.stats_tracker import TrialReport
from .components import create_report_table

logger = logging.getLogger(__name__)

REPORT_FORMATS = ("table", "jsonl")


def write_jsonl(report: TrialReport, stream: TextIO) -> None:
    """One JSON object per trial, then the aggregate as the last line."""
    for row in report.rows:
        stream.write(json.dumps(row.to_dict(), sort_keys=True) + "\n")
    stream.write(json.dumps(report.to_dict(), sort_keys=True) + "\n")
    stream.flush()


def print_report(report: TrialReport, fmt: str = "table", console: Optional[Console] = None,
                 stream: Optional[TextIO] = None) -> None:
    if fmt == "jsonl":
        console = console or Console()
        write_jsonl(report, stream or console.file)
        return
    if fmt != "table":
        raise ValueError(f"unknown report format '{fmt}'")
    console = console or Console()
    console.print()
    console.print(create_report_table(report))
    for problem in report.check_invariants():
        console.print(f"[bold red]Invariant violated:[/bold red] {problem}")
