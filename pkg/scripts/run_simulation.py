#!/usr/bin/env python3
"""Batch driver - parses a deck, runs its schedule and writes summary, PRT log and VTK fields."""

import argparse
import logging
import os
import sys
import time
from pathlib import Path

from dotenv import load_dotenv
from tqdm import tqdm
from tqdm.contrib.logging import logging_redirect_tqdm

from deck_module import build_case, parse_deck_file
from deck_module.case_builder import SimCase
from numerics_module.errors import ConfigurationError, InputError, SimulationAbort
from output_module import OutputQueue, SummaryWriter, snapshot_fields, write_vtk
from reservoir_module.model import BlackOilModel
from reservoir_module.units import DAY
from solver_module import NewtonConfig, SimulationMonitor, TimestepControl, run_schedule
from solver_module.nonlinear import ReportRecord, SimulationResults, SimulatorState

load_dotenv()

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_ABORTED = 2
PRT_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"


class SimulationRunner:
    """Runs one deck end to end."""

    def __init__(
        self,
        deck_path: str | Path,
        output_dir: str | Path,
        config: NewtonConfig,
        timestep: TimestepControl,
        vtk: bool = False,
        lenient: bool = False,
        sync_output: bool = False,
        quiet: bool = False,
    ):
        """Initialize the runner.

        Args:
            deck_path: Deck file to run
            output_dir: Directory for <CASE>.csv, <CASE>.PRT and <CASE>-NNNN.vtk
            config: Newton settings
            timestep: Adaptive time-step settings (seconds)
            vtk: Write cell fields at every report step
            lenient: Skip unknown keywords instead of failing
            sync_output: Write output on the stepping thread
            quiet: No banners and no progress bar
        """
        self.deck_path = Path(deck_path)
        self.output_dir = Path(output_dir)
        self.config = config
        self.timestep = timestep
        self.vtk = vtk
        self.lenient = lenient
        self.sync_output = sync_output
        self.quiet = quiet
        self.case_name = self.deck_path.stem.upper()
        self.monitor = SimulationMonitor()
        self.results: SimulationResults | None = None
        self.output_errors: list[str] = []

    def print_header(self, title: str):
        """Print formatted section header."""
        if self.quiet:
            return
        print("\n" + "=" * 100)
        print(f"🛢️  {title}")
        print("=" * 100 + "\n")

    def print_step(self, step_num: int, total_steps: int, description: str):
        """Print step information."""
        if self.quiet:
            return
        print(f"\n{'─' * 100}")
        print(f"📍 STEP {step_num}/{total_steps}: {description}")
        print("─" * 100 + "\n")

    def say(self, message: str):
        if not self.quiet:
            print(message)

    @property
    def summary_path(self) -> Path:
        return self.output_dir / f"{self.case_name}.csv"

    @property
    def prt_path(self) -> Path:
        return self.output_dir / f"{self.case_name}.PRT"

    def load_case(self) -> SimCase:
        """Parse the deck (stage 1) and resolve it into a case (stage 2)."""
        started = time.perf_counter()
        deck = parse_deck_file(self.deck_path, lenient=self.lenient)
        case = build_case(deck, self.case_name)
        self.say(f"✅ Parsed {len(deck)} keywords in {time.perf_counter() - started:.2f}s")
        self.say(f"   Grid:          {'x'.join(str(d) for d in case.grid.dims)} ({case.grid.num_cells} active)")
        self.say(f"   Connections:   {len(case.connections)}")
        self.say(f"   Wells:         {', '.join(case.well_names) or 'none'}")
        self.say(f"   Report steps:  {len(case.schedule)} ({case.total_time / DAY:g} days)")
        return case

    def _attach_prt(self) -> logging.Handler:
        handler = logging.FileHandler(self.prt_path, mode="w", encoding="utf-8")
        handler.setLevel(logging.INFO)
        handler.setFormatter(logging.Formatter(PRT_FORMAT))
        root = logging.getLogger()
        root.addHandler(handler)
        if root.level > logging.INFO or root.level == logging.NOTSET:
            root.setLevel(logging.INFO)
        return handler

    def simulate(self, case: SimCase) -> int:
        """Run the schedule, streaming report steps to the output worker."""
        model = BlackOilModel(case.grid, case.rock, case.fluid, case.satfunc, case.connections)
        summary = SummaryWriter(self.summary_path, case.summary, case.units)
        queue = OutputQueue(synchronous=self.sync_output)
        progress = tqdm(
            total=len(case.schedule),
            desc=case.name,
            unit="report",
            disable=self.quiet or not sys.stderr.isatty(),
        )

        def on_report(record: ReportRecord, state: SimulatorState):
            queue.submit(summary.append, record)
            if self.vtk:
                snapshot = snapshot_fields(model, state.primary, record.step, record.time, case.units)
                queue.submit(write_vtk, snapshot, case.grid, self.output_dir, case.name)
            if record.step > 0:
                progress.update(1)
                progress.set_postfix(days=f"{record.time / DAY:g}", newton=record.newton_iterations)

        code = EXIT_OK
        try:
            with logging_redirect_tqdm():
                self.results = run_schedule(
                    case, self.config, self.timestep, on_report=on_report, monitor=self.monitor, model=model
                )
        except SimulationAbort as abort:
            logger.error("simulation aborted: %s", abort)
            print(f"❌ Simulation aborted: {abort}", file=sys.stderr)
            code = EXIT_ABORTED
        finally:
            progress.close()
            queue.submit(summary.finalize)
            queue.close()
            self.output_errors = queue.errors

        for message in self.output_errors:
            print(f"⚠️  Output error: {message}", file=sys.stderr)
        return code

    def print_statistics(self):
        """Print run statistics."""
        if self.quiet or self.results is None:
            return
        self.print_header("RUN STATISTICS")
        self.monitor.print_summary()
        print("\n   ⚖️  Material balance error (relative, per component):")
        for component, error in self.results.material_balance.items():
            print(f"     • {component}: {error:.3e}")
        if self.results.control_events:
            print("\n   🔀 Control switches:")
            for event in self.results.control_events:
                print(
                    f"     • {event['well']}: {event['from']} → {event['to']} "
                    f"(report {event['report_step']}, {event['time_days']:g} days)"
                )

    def run(self) -> int:
        """Run the deck.

        Returns:
            Exit code: 0 completed, 1 input error, 2 convergence abort
        """
        run_start = time.perf_counter()
        self.print_header(f"BLACK-OIL SIMULATION: {self.deck_path.name}")

        self.print_step(1, 3, "Parsing Deck")
        case = self.load_case()

        self.output_dir.mkdir(parents=True, exist_ok=True)
        handler = self._attach_prt()
        try:
            logger.info("case %s: %s", case.name, case.title)
            logger.info("newton settings: %s", self.config)
            logger.info("time-step settings: %s", self.timestep)
            self.print_step(2, 3, "Running Schedule")
            code = self.simulate(case)
            if self.results is not None:
                logger.info("material balance: %s", self.results.material_balance)
                logger.info("telemetry: %s", self.results.telemetry)
        finally:
            logging.getLogger().removeHandler(handler)
            handler.close()

        self.print_step(3, 3, "Summary")
        self.print_statistics()
        self.say(f"\n📄 Summary:   {self.summary_path}")
        self.say(f"📄 Run log:   {self.prt_path}")
        if self.vtk:
            self.say(f"📄 Fields:    {self.output_dir / (case.name + '-NNNN.vtk')}")
        if code == EXIT_OK:
            self.say(f"\n🎉 SIMULATION COMPLETED in {time.perf_counter() - run_start:.1f}s\n")
        return code


def _option(value, variable: str, default, cast=float):
    """Command line first, then the environment, then the built-in default."""
    if value is not None:
        return value
    raw = os.getenv(variable)
    if raw is None or raw == "":
        return default
    try:
        return cast(raw)
    except ValueError:
        raise ConfigurationError(f"environment variable {variable}={raw!r} is not a valid {cast.__name__}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Run a three-phase black-oil simulation deck",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Run the SPE1-shaped deck with default settings
  python scripts/run_simulation.py data/decks/SPE1.DATA

  # Tighter convergence and VTK field output
  python scripts/run_simulation.py data/decks/SPE1.DATA --tolerance-mb 1e-7 --vtk

  # Smaller first step, results in another directory
  python scripts/run_simulation.py data/decks/MINI.DATA --dt-init 0.1 --output-dir out/mini

  # Skip keywords the parser does not know
  python scripts/run_simulation.py my_case.DATA --lenient

Environment variables (FLOW_OUTPUT_DIR, FLOW_TOLERANCE_MB, FLOW_DT_INIT, ...) are read
from .env and used when the matching option is not given.

Exit codes: 0 completed, 1 input error, 2 convergence abort.
        """,
    )
    parser.add_argument("deck", help="Deck file (.DATA)")
    parser.add_argument("--output-dir", help="Directory for output files (default: ./output)")
    parser.add_argument("--tolerance-mb", type=float, help="Mass-balance tolerance (default: 1e-6)")
    parser.add_argument("--tolerance-cnv", type=float, help="Local CNV tolerance (default: 1e-2)")
    parser.add_argument("--tolerance-wells", type=float, help="Well residual tolerance (default: 1e-4)")
    parser.add_argument("--tolerance-control", type=float, help="Relative well control tolerance (default: 1e-6)")
    parser.add_argument("--max-newton", type=int, help="Newton iterations per step (default: 15)")
    parser.add_argument("--ds-max", type=float, help="Largest saturation change per iteration (default: 0.2)")
    parser.add_argument("--dp-max-rel", type=float, help="Largest relative pressure change per iteration (default: 0.25)")
    parser.add_argument("--dt-init", type=float, help="First time step in days (default: 1)")
    parser.add_argument("--dt-min", type=float, help="Smallest time step in days before aborting (default: 1e-4)")
    parser.add_argument("--dt-max", type=float, help="Largest time step in days (default: 365)")
    parser.add_argument("--linear-solver", choices=["bicgstab", "direct"], help="Linear solver (default: bicgstab)")
    parser.add_argument("--linear-tolerance", type=float, help="Relative linear residual tolerance (default: 1e-3)")
    parser.add_argument("--vtk", action="store_true", help="Write VTK cell fields at every report step")
    parser.add_argument("--lenient", action="store_true", help="Skip unknown keywords with a warning")
    parser.add_argument("--sync-output", action="store_true", help="Write output on the stepping thread")
    parser.add_argument("--quiet", action="store_true", help="No banners and no progress bar")
    parser.add_argument("--verbose", action="store_true", help="Log debug messages to the console")
    return parser


def configure(args: argparse.Namespace) -> tuple[NewtonConfig, TimestepControl, Path]:
    """Resolve options against the environment and validate them."""
    defaults = NewtonConfig()
    config = NewtonConfig(
        tol_mb=_option(args.tolerance_mb, "FLOW_TOLERANCE_MB", defaults.tol_mb),
        tol_cnv=_option(args.tolerance_cnv, "FLOW_TOLERANCE_CNV", defaults.tol_cnv),
        tol_wells=_option(args.tolerance_wells, "FLOW_TOLERANCE_WELLS", defaults.tol_wells),
        tol_control=_option(args.tolerance_control, "FLOW_TOLERANCE_CONTROL", defaults.tol_control),
        max_iter=_option(args.max_newton, "FLOW_MAX_NEWTON", defaults.max_iter, int),
        ds_max=_option(args.ds_max, "FLOW_DS_MAX", defaults.ds_max),
        dp_max_rel=_option(args.dp_max_rel, "FLOW_DP_MAX_REL", defaults.dp_max_rel),
        linear_solver=_option(args.linear_solver, "FLOW_LINEAR_SOLVER", defaults.linear_solver, str),
        linear_tol=_option(args.linear_tolerance, "FLOW_LINEAR_TOLERANCE", defaults.linear_tol),
    ).validate()
    steps = TimestepControl()
    timestep = TimestepControl(
        initial=_option(args.dt_init, "FLOW_DT_INIT", steps.initial / DAY) * DAY,
        minimum=_option(args.dt_min, "FLOW_DT_MIN", steps.minimum / DAY) * DAY,
        maximum=_option(args.dt_max, "FLOW_DT_MAX", steps.maximum / DAY) * DAY,
    ).validate()
    output_dir = Path(_option(args.output_dir, "FLOW_OUTPUT_DIR", "output", str))
    return config, timestep, output_dir


def main(argv: list[str] | None = None) -> int:
    """Main entry point."""
    args = build_parser().parse_args(argv)

    console = logging.StreamHandler(sys.stderr)
    console.setLevel(logging.DEBUG if args.verbose else logging.WARNING)
    console.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger()
    root.addHandler(console)
    if args.verbose:
        root.setLevel(logging.DEBUG)

    try:
        config, timestep, output_dir = configure(args)
        runner = SimulationRunner(
            deck_path=args.deck,
            output_dir=output_dir,
            config=config,
            timestep=timestep,
            vtk=args.vtk,
            lenient=args.lenient,
            sync_output=args.sync_output,
            quiet=args.quiet,
        )
        return runner.run()
    except InputError as error:
        print(f"❌ Error: {error}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    finally:
        root.removeHandler(console)


if __name__ == "__main__":
    sys.exit(main())
