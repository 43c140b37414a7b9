"""
Statistics over a batch of simulated sessions.
"""

import logging
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import TYPE_CHECKING, Any, Dict, List, Optional

if TYPE_CHECKING:
    from ..core.session_runner import SessionOutcome

logger = logging.getLogger(__name__)


@dataclass
class TrialRow:
    """One line of a trial batch: the session outcome or the infrastructure error."""
    index: int
    seed: int
    outcome: Optional["SessionOutcome"] = None
    error: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        row: Dict[str, Any] = {"type": "trial", "index": self.index, "seed": self.seed}
        if self.outcome is None:
            row.update(result="error", error=self.error)
            return row
        o = self.outcome
        row.update(
            result=o.kind.name,
            reason=o.reason.name if o.reason else None,
            rounds_used=o.rounds_used,
            matched_round=o.matched_round,
            queries_sent=o.queries_sent,
            verifiers_sent=o.verifiers_sent,
            keys_agree=o.keys_agree,
            key_fingerprint=o.system_key.fingerprint if o.system_key else None,
            suspect_peer=o.suspect_peer,
            wall_time=round(o.wall_time, 6),
        )
        return row


@dataclass
class TrialReport:
    """Aggregate of a trial batch"""
    sessions_run: int = 0
    succeeded: int = 0
    aborted_by_reason: Dict[str, int] = field(default_factory=dict)
    infrastructure_errors: int = 0
    rounds_to_success: Dict[int, int] = field(default_factory=dict)
    queries_sent: int = 0
    verifiers_sent: int = 0
    key_mismatches: int = 0
    suspect_peers: Dict[str, int] = field(default_factory=dict)
    total_wall_time: float = 0.0
    rows: List[TrialRow] = field(default_factory=list, repr=False)

    @property
    def aborted(self) -> int:
        return sum(self.aborted_by_reason.values())

    @property
    def mean_wall_time(self) -> float:
        completed = self.succeeded + self.aborted
        return self.total_wall_time / completed if completed else 0.0

    @property
    def success_rate(self) -> float:
        return self.succeeded / self.sessions_run if self.sessions_run else 0.0

    def check_invariants(self) -> List[str]:
        """Arithmetic consistency of the counters; an empty list means all hold."""
        problems = []
        if self.succeeded + self.aborted > self.sessions_run:
            problems.append(f"succeeded {self.succeeded} + aborted {self.aborted} > sessions_run {self.sessions_run}")
        if self.succeeded + self.aborted + self.infrastructure_errors != self.sessions_run:
            problems.append("sessions are not all accounted for")
        if sum(self.rounds_to_success.values()) != self.succeeded:
            problems.append(f"histogram totals {sum(self.rounds_to_success.values())}, succeeded is {self.succeeded}")
        if self.key_mismatches:
            problems.append(f"{self.key_mismatches} established sessions ended with different keys")
        return problems

    def canonical(self) -> Dict[str, Any]:
        """Everything except wall time; identical across runs with the same seed."""
        data = self.to_dict()
        data.pop("total_wall_time")
        data.pop("mean_wall_time")
        data["rows"] = [{k: v for k, v in row.to_dict().items() if k != "wall_time"} for row in self.rows]
        return data

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data.pop("rows")
        data["type"] = "report"
        data["aborted"] = self.aborted
        data["rounds_to_success"] = {str(k): v for k, v in sorted(self.rounds_to_success.items())}
        data["aborted_by_reason"] = dict(sorted(self.aborted_by_reason.items()))
        data["mean_wall_time"] = round(self.mean_wall_time, 6)
        data["total_wall_time"] = round(self.total_wall_time, 6)
        return data


class StatsTracker:
    """
    Accumulates session outcomes into a TrialReport.

    Rows are recorded in trial-index order by the caller, so the report does
    not depend on which worker finished first.
    """

    def __init__(self):
        self._report = TrialReport()
        self._reasons: Counter = Counter()
        self._rounds: Counter = Counter()
        self._peers: Counter = Counter()
        logger.debug("StatsTracker initialized")

    @property
    def report(self) -> TrialReport:
        r = self._report
        r.aborted_by_reason = dict(self._reasons)
        r.rounds_to_success = dict(self._rounds)
        r.suspect_peers = dict(self._peers)
        return r

    def record(self, row: TrialRow) -> None:
        r = self._report
        r.sessions_run += 1
        r.rows.append(row)
        outcome = row.outcome
        if outcome is None:
            r.infrastructure_errors += 1
            logger.debug(f"Trial {row.index}: infrastructure error recorded")
            return

        r.queries_sent += outcome.queries_sent
        r.verifiers_sent += outcome.verifiers_sent
        r.total_wall_time += outcome.wall_time
        if outcome.succeeded:
            r.succeeded += 1
            self._rounds[outcome.matched_round] += 1
            if not outcome.keys_agree:
                r.key_mismatches += 1
                logger.error(f"Trial {row.index}: parties established different keys")
        else:
            self._reasons[outcome.reason.name] += 1
            if outcome.suspect_peer is not None:
                self._peers[outcome.suspect_peer] += 1
