#!/usr/bin/env python3
# File: obake/main.py

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from rich.console import Console
from rich.table import Table

from .config import (
    DEFAULT_CONFIG_DIR,
    DEFAULT_LOG_FILE,
    SimulationConfig,
    load_environment,
    load_simulation_config,
    resolve_master_seed,
)
from .core.event_bus import EventBus
from .core.session_runner import derive_seed, make_transport, run_session
from .core.synthetic_sensor import random_template
from .core.template_store import TemplateStore, read_template_lines
from .core.trial_runner import TrialConfig, run_trials
from .errors import ConfigError, EntropyError, ObakeError, ParameterError, TransportError
from .interfaces.transport import TransportKind
from .protocol.params import FeatureVector, ProtocolParams
from .ui.components import create_params_table
from .ui.event_handlers import FramePrinter
from .ui.reporting import REPORT_FORMATS, print_report
from .ui.rich_progress import RichProgressDisplay

logger = logging.getLogger("obake.main")

EXIT_OK = 0
EXIT_ABORT = 2
EXIT_USAGE = 3
EXIT_INFRASTRUCTURE = 4

SIMULATION_OPTIONS = ("dim", "bits", "threshold", "noise", "queries_per_round", "max_rounds", "transport", "tamper",
                      "receive_timeout")


class ObakeArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with EXIT_USAGE."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def setup_logging_config(log_level_str: str, log_file_path: Path):
    numeric_log_level = getattr(logging, log_level_str.upper(), logging.INFO)
    log_file_path.parent.mkdir(parents=True, exist_ok=True)
    for handler in logging.root.handlers[:]:
        logging.root.removeHandler(handler)
    logging.basicConfig(
        level=numeric_log_level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[logging.FileHandler(log_file_path, mode='w')]
    )
    logger.info(f"Logging configured. Level: {log_level_str}. File: {log_file_path}")


def _add_simulation_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--profile", help="Named profile from profiles.json in the config directory.")
    parser.add_argument("--dim", type=int, help="Feature vector dimension.")
    parser.add_argument("--bits", type=int, choices=[8, 16, 32], help="Bits per component.")
    parser.add_argument("--threshold", help="Closeness threshold, one value or one per dimension (T[,T...]).")
    parser.add_argument("--noise", help="Sensor noise: uniform:N, gauss:S or adv:V[,V...].")
    parser.add_argument("--queries-per-round", dest="queries_per_round", type=int,
                        help="Captures (verifiers) per query round.")
    parser.add_argument("--max-rounds", dest="max_rounds", type=int, help="Rounds before the system gives up.")
    parser.add_argument("--transport", choices=[k.value for k in TransportKind], help="Channel between the roles.")
    parser.add_argument("--receive-timeout", dest="receive_timeout", type=float,
                        help="Seconds either role waits for a frame before giving up.")
    parser.add_argument("--seed", help="Master seed (falls back to OBAKE_SEED, then a random seed).")
    parser.add_argument("--template", type=Path, help="Template file to take the token's template from.")
    parser.add_argument("--token-id", dest="token_id", help="Token whose template to use from --template.")
    parser.add_argument("--tamper", choices=["none", "flip-tag", "corrupt-query"],
                        help="Tamper with frames in transit.")


def build_parser() -> argparse.ArgumentParser:
    parser = ObakeArgumentParser(prog="obake", description="Simulate biometric-authenticated key exchange sessions.")
    parser.add_argument("--log-level", dest="log_level", choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
                        default='INFO', help="Logging level. Default: INFO")
    parser.add_argument("--log-file", dest="log_file", type=Path, default=DEFAULT_LOG_FILE,
                        help=f"Log file path. Default: {DEFAULT_LOG_FILE}")
    parser.add_argument("--config-dir", dest="config_dir", type=Path, default=DEFAULT_CONFIG_DIR,
                        help=f"Directory holding profiles.json. Default: {DEFAULT_CONFIG_DIR}")
    commands = parser.add_subparsers(dest="command", required=True)

    demo = commands.add_parser("demo", help="Run one session and print every frame.")
    _add_simulation_arguments(demo)

    trials = commands.add_parser("trials", help="Run many sessions and report statistics.")
    _add_simulation_arguments(trials)
    trials.add_argument("--trials", type=int, default=100, help="Number of sessions. Default: 100")
    trials.add_argument("--format", choices=REPORT_FORMATS, default="table", help="Report format. Default: table")
    trials.add_argument("--workers", type=int, default=1, help="Sessions run in parallel. Default: 1")
    trials.add_argument("--no-progress", dest="no_progress", action="store_true", help="Hide the progress bar.")

    template = commands.add_parser("template", help="Create or inspect template files.")
    template_commands = template.add_subparsers(dest="template_command", required=True)
    gen = template_commands.add_parser("gen", help="Write random templates to a file.")
    gen.add_argument("--dim", type=int, required=True)
    gen.add_argument("--bits", type=int, choices=[8, 16, 32], required=True)
    gen.add_argument("--out", type=Path, required=True)
    gen.add_argument("--seed", help="Master seed (falls back to OBAKE_SEED, then a random seed).")
    gen.add_argument("--token-id", dest="token_id", help="Token id for the first template. Default: token-0")
    gen.add_argument("--count", type=int, default=1, help="Number of templates. Default: 1")
    show = template_commands.add_parser("show", help="Print the templates in a file.")
    show.add_argument("file", type=Path)
    return parser


def _load_config(args: argparse.Namespace) -> SimulationConfig:
    cmd_line_options: Dict[str, Any] = {k: getattr(args, k) for k in SIMULATION_OPTIONS}
    return load_simulation_config(args.config_dir, args.profile, cmd_line_options)


def _resolve_template(args: argparse.Namespace, params: ProtocolParams) -> Optional[FeatureVector]:
    if args.template is None:
        if args.token_id:
            logger.info("--token-id without --template only names the simulated token")
        return None
    store = TemplateStore.load_file(args.template, params)
    if args.token_id:
        return store.get(args.token_id)
    token_id, template = store.first()
    args.token_id = token_id
    return template


def run_demo(args: argparse.Namespace, console: Console) -> int:
    seed, source = resolve_master_seed(args.seed)
    config = _load_config(args)
    params = config.params
    template = _resolve_template(args, params)
    if template is None:
        template = random_template(params, derive_seed(seed, 0, b"template"))
    token_id = args.token_id or "token-0"

    console.print(create_params_table(params, seed))
    console.print(f"[dim]seed from {source}; noise {config.noise.kind.value} "
                  f"{','.join(f'{m:g}' for m in config.noise.magnitudes)}[/dim]")

    event_bus = EventBus(debug_logging=args.log_level == "DEBUG")
    FramePrinter(console).subscribe(event_bus)
    transport = make_transport(config.transport, config.transport_options)
    outcome = run_session(params, template, config.noise, transport, seed,
                          tamper=config.tamper, token_id=token_id, event_bus=event_bus)
    if outcome.succeeded:
        console.print(f"[bold green]Key established[/bold green] in round {outcome.matched_round}; "
                      f"keys agree: {outcome.keys_agree}")
        return EXIT_OK
    console.print(f"[bold yellow]Session aborted:[/bold yellow] {outcome.reason.name} "
                  f"after {outcome.rounds_used} round(s)")
    return EXIT_ABORT


def run_trial_batch(args: argparse.Namespace, console: Console) -> int:
    seed, source = resolve_master_seed(args.seed)
    config = _load_config(args)
    template = _resolve_template(args, config.params)
    trial_config = TrialConfig(
        params=config.params,
        model=config.noise,
        trials=args.trials,
        master_seed=seed,
        transport=config.transport,
        template=template,
        token_id=args.token_id or "token-0",
        tamper=config.tamper,
        workers=args.workers,
        transport_options=config.transport_options,
    )

    event_bus = EventBus(debug_logging=args.log_level == "DEBUG")
    progress_display = None if args.no_progress else RichProgressDisplay(event_bus)
    if args.format == "table":
        console.print(create_params_table(config.params, seed))
        console.print(f"[dim]seed from {source}[/dim]")
    if progress_display is not None:
        progress_display.initialize(args.trials)
    try:
        report = run_trials(trial_config, event_bus)
    finally:
        if progress_display is not None:
            progress_display.finalize()

    print_report(report, args.format, console)
    if report.infrastructure_errors:
        logger.error(f"{report.infrastructure_errors} trial(s) failed below the protocol")
        return EXIT_INFRASTRUCTURE
    return EXIT_OK


def run_template_gen(args: argparse.Namespace, console: Console) -> int:
    if args.count < 1:
        raise ConfigError(f"--count must be at least 1, got {args.count}")
    seed, _ = resolve_master_seed(args.seed)
    try:
        # templates do not depend on the threshold; 1 is valid for every k
        params = ProtocolParams.uniform(args.dim, args.bits, 1)
    except ParameterError as e:
        raise ConfigError(str(e)) from e
    store = TemplateStore(params)
    first_id = args.token_id or "token-0"
    for i in range(args.count):
        token_id = first_id if i == 0 else f"{first_id}-{i}"
        store.put(token_id, random_template(params, derive_seed(seed, i, b"template")))
    store.save_file(args.out, header=f"obake templates: dim {args.dim}, {args.bits}-bit components, seed {seed}")
    console.print(f"Wrote {len(store)} template(s) to {args.out}")
    return EXIT_OK


def run_template_show(args: argparse.Namespace, console: Console) -> int:
    entries = read_template_lines(args.file)
    table = Table(title=str(args.file))
    table.add_column("Line", justify="right", style="dim")
    table.add_column("Token")
    table.add_column("Dim", justify="right")
    table.add_column("Components")
    for n, (line_no, token_id, values) in enumerate(entries):
        preview = " ".join(str(v) for v in values[:16]) + (" ..." if len(values) > 16 else "")
        table.add_row(str(line_no), token_id or f"template-{n}", str(len(values)), preview)
    console.print(table)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    setup_logging_config(args.log_level, args.log_file)
    logger.info(f"Application starting with arguments: {args}")
    load_environment()
    console = Console()

    try:
        if args.command == "demo":
            return run_demo(args, console)
        if args.command == "trials":
            return run_trial_batch(args, console)
        if args.template_command == "gen":
            return run_template_gen(args, console)
        return run_template_show(args, console)
    except (ConfigError, ParameterError) as e:
        logger.error(f"Configuration problem: {e}")
        print(f"ERROR: Configuration problem - {e}", file=sys.stderr)
        return EXIT_USAGE
    except (TransportError, EntropyError) as e:
        logger.critical(f"Infrastructure failure: {e}", exc_info=True)
        print(f"ERROR: Infrastructure failure - {e}", file=sys.stderr)
        return EXIT_INFRASTRUCTURE
    except ObakeError as e:
        logger.critical(f"Unexpected obake error: {e}", exc_info=True)
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_INFRASTRUCTURE


if __name__ == "__main__":
    sys.exit(main())
