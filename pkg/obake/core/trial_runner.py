# obake/core/trial_runner.py

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from ..common.stats_tracker import StatsTracker, TrialReport, TrialRow
from ..errors import EntropyError, ParameterError, TransportError
from ..events import EventType
from ..interfaces.event_bus import EventBus as EventBusInterface
from ..interfaces.sensor import NoiseModel
from ..interfaces.transport import TransportKind, TransportOptions
from ..protocol.params import FeatureVector, ProtocolParams
from .session_runner import SessionOptions, SessionRunner, derive_seed, make_transport
from .synthetic_sensor import random_template
from .tampering import TamperMode

logger = logging.getLogger(__name__)


@dataclass
class TrialConfig:
    """
    A batch of independent sessions.

    Without a fixed template every trial draws its own random template from
    the trial seed.
    """
    params: ProtocolParams
    model: NoiseModel
    trials: int
    master_seed: int
    transport: TransportKind = TransportKind.IN_PROCESS
    template: Optional[FeatureVector] = None
    token_id: str = "token-0"
    tamper: TamperMode = TamperMode.NONE
    workers: int = 1
    transport_options: TransportOptions = field(default_factory=TransportOptions)


def trial_seed(master_seed: int, index: int) -> int:
    return derive_seed(master_seed, index)


def _run_one(config: TrialConfig, index: int, event_bus: Optional[EventBusInterface]) -> TrialRow:
    seed = trial_seed(config.master_seed, index)
    template = config.template
    if template is None:
        template = random_template(config.params, derive_seed(seed, 0, b"template"))
    runner = SessionRunner(
        config.params,
        make_transport(config.transport, config.transport_options),
        event_bus,
        SessionOptions(tamper=config.tamper, token_id=config.token_id),
    )
    try:
        row = TrialRow(index=index, seed=seed, outcome=runner.run(template, config.model, seed))
    except (TransportError, EntropyError) as e:
        logger.error(f"Trial {index} failed: {e}")
        row = TrialRow(index=index, seed=seed, error=f"{type(e).__name__}: {e}")
    if event_bus is not None:
        event_bus.publish(EventType.TRIAL_COMPLETED, index=index, row=row)
    return row


def run_trials(config: TrialConfig, event_bus: Optional[EventBusInterface] = None) -> TrialReport:
    """
    Run config.trials sessions and aggregate them. Sessions may run on
    several workers; the report is assembled in trial-index order.
    """
    if config.trials < 1:
        raise ParameterError(f"trials must be at least 1, got {config.trials}")
    if config.workers < 1:
        raise ParameterError(f"workers must be at least 1, got {config.workers}")

    logger.info(f"Starting {config.trials} trials over {config.transport.value} "
                f"with {config.workers} worker(s), master seed {config.master_seed}")
    if event_bus is not None:
        event_bus.publish(EventType.TRIALS_STARTED, total=config.trials)

    if config.workers == 1:
        rows = [_run_one(config, i, event_bus) for i in range(config.trials)]
    else:
        with ThreadPoolExecutor(max_workers=config.workers, thread_name_prefix="obake-trial") as pool:
            rows = list(pool.map(lambda i: _run_one(config, i, event_bus), range(config.trials)))

    tracker = StatsTracker()
    for row in sorted(rows, key=lambda r: r.index):
        tracker.record(row)
    report = tracker.report

    for problem in report.check_invariants():
        logger.error(f"Report invariant violated: {problem}")
    logger.info(f"Trials finished: {report.succeeded}/{report.sessions_run} succeeded, "
                f"{report.aborted} aborted, {report.infrastructure_errors} infrastructure errors")
    if event_bus is not None:
        event_bus.publish(EventType.TRIALS_COMPLETED, report=report)
    return report
