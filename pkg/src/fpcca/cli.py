"""Command-line interface for functional canonical correlation analysis."""

import argparse
import logging
import os
import sys
from typing import Any, Dict, List, NoReturn, Optional, Sequence

from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from .errors import FpccaError
from .models import SimConfig
from .runner import MC_MODELS, ExperimentRunner, Report
from .simulate import CCA_PAIR, PCCA_TRIPLE
from .utils import (
    COVARIANCE,
    DEFAULT_GRID_POINTS,
    DEFAULT_HARMONICS,
    DEFAULT_KL_TERMS,
    MODES,
)
from .verify import DEFAULT_DIM, DEFAULT_ORACLE_TOL, DEFAULT_TRIALS, FAULTS

# Configure logging; records go to stderr so --json output stays clean
logging.basicConfig(
    level=logging.INFO,
    format="%(message)s",
    datefmt="[%X]",
    handlers=[RichHandler(console=Console(stderr=True), rich_tracebacks=True)],
)
logger = logging.getLogger("fpcca")
console = Console()

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_IO = 2
EXIT_USAGE = 64
EXIT_DATA = 65

SIM_MODELS = {"cca-pair": CCA_PAIR, "pcca-triple": PCCA_TRIPLE}


class UsageArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that exits with the usage code 64."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _env_int(name: str, default: int) -> int:
    value = os.environ.get(name)
    if value is None or value == "":
        return default
    try:
        return int(value)
    except ValueError:
        logger.warning(f"Ignoring non-integer {name}={value!r}")
        return default


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _replications(text: str) -> int:
    value = int(text)
    if value < 2:
        raise argparse.ArgumentTypeError("at least two replications are needed")
    return value


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per pipeline step."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--seed",
        type=_seed,
        default=_env_int("FPCCA_SEED", 0),
        help="Random seed (CLI > env:FPCCA_SEED > 0)",
    )
    common.add_argument(
        "--grid-points",
        type=_positive,
        default=DEFAULT_GRID_POINTS,
        help=f"Grid size for simulation (default: {DEFAULT_GRID_POINTS})",
    )
    common.add_argument(
        "--harmonics",
        type=_positive,
        default=DEFAULT_HARMONICS,
        help=f"Harmonics retained by FPCA (default: {DEFAULT_HARMONICS})",
    )
    common.add_argument(
        "--mode",
        choices=MODES,
        default=COVARIANCE,
        help=(
            "Estimation mode (default: covariance; raw score cross-covariances "
            "reproduce the simulation summaries, correlation whitens the scores)"
        ),
    )
    common.add_argument("--out", help="Output file (simulate: output directory)")
    common.add_argument(
        "--json", action="store_true", help="Print the JSON report to stdout"
    )
    common.add_argument(
        "-d", "--debug", action="store_true", help="Enable debug logging"
    )

    parser = UsageArgumentParser(
        prog="fpcca",
        description="Functional canonical and partial canonical correlation analysis.",
    )
    sub = parser.add_subparsers(
        dest="command", required=True, parser_class=UsageArgumentParser
    )

    simulate = sub.add_parser("simulate", parents=[common], help="Simulate test processes")
    simulate.add_argument("--model", choices=sorted(SIM_MODELS), default="cca-pair")
    simulate.add_argument("--n", type=_positive, required=True, help="Sample paths")
    simulate.add_argument(
        "--kl-terms",
        type=_positive,
        default=DEFAULT_KL_TERMS,
        help=f"Karhunen-Loeve terms (default: {DEFAULT_KL_TERMS})",
    )
    simulate.add_argument(
        "--beta",
        type=float,
        nargs=2,
        metavar=("B1", "B2"),
        default=[1.0, 2.0],
        help="Confounder loadings of the triple (default: 1 2)",
    )

    fpca = sub.add_parser("fpca", parents=[common], help="Principal components of a CSV")
    fpca.add_argument("input", help="Dataset CSV")

    cca = sub.add_parser("cca", parents=[common], help="Canonical correlations")
    cca.add_argument("x1", help="First process CSV")
    cca.add_argument("x2", help="Second process CSV")

    pcca = sub.add_parser("pcca", parents=[common], help="Partial canonical correlations")
    pcca.add_argument("cond", help="Conditioning process CSV")
    pcca.add_argument("x2", help="First process of interest CSV")
    pcca.add_argument("x3", help="Second process of interest CSV")

    mc = sub.add_parser("montecarlo", parents=[common], help="Monte Carlo reproduction")
    mc.add_argument("--model", choices=sorted(MC_MODELS), default="cca")
    mc.add_argument("--n", type=_positive, default=250, help="Sample paths (default: 250)")
    mc.add_argument(
        "--replications", type=_replications, default=100, help="Replications (default: 100)"
    )
    mc.add_argument("--kl-terms", type=_positive, default=DEFAULT_KL_TERMS)
    mc.add_argument("--beta", type=float, nargs=2, metavar=("B1", "B2"), default=[1.0, 2.0])
    mc.add_argument(
        "--workers",
        type=_positive,
        default=_env_int("FPCCA_WORKERS", 1),
        help="Worker processes (CLI > env:FPCCA_WORKERS > 1)",
    )
    mc.add_argument(
        "--timing", action="store_true", help="Include the runtime in the JSON report"
    )

    verify = sub.add_parser("verify", parents=[common], help="Operator identity suite")
    verify.add_argument("--trials", type=_positive, default=DEFAULT_TRIALS)
    verify.add_argument("--dim", type=_positive, default=DEFAULT_DIM)
    verify.add_argument("--tol", type=float, default=1e-9)
    verify.add_argument("--oracle-tol", type=float, default=DEFAULT_ORACLE_TOL)
    verify.add_argument("--inject-fault", choices=FAULTS, help=argparse.SUPPRESS)

    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Parse and validate command line arguments.

    Returns:
        Parsed command line arguments
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    check_args(parser, args)
    return args


def _series_table(title: str, series: Dict[str, List[float]]) -> Table:
    table = Table(title=title)
    table.add_column("#", justify="right")
    for name in series:
        table.add_column(name, justify="right")
    length = max(len(values) for values in series.values())
    for k in range(length):
        cells = [
            f"{values[k]:.6f}" if k < len(values) else "" for values in series.values()
        ]
        table.add_row(str(k + 1), *cells)
    return table


def render(document: Report) -> None:
    """Print a report as rich tables."""
    command = document["command"]
    if command == "fpca":
        console.print(
            _series_table(
                f"FPCA of {document['n']} paths",
                {
                    "eigenvalue": document["eigenvalues"],
                    "score variance": document["score_variances"],
                },
            )
        )
    elif command in ("cca", "pcca"):
        title = "Canonical" if command == "cca" else "Partial canonical"
        console.print(
            _series_table(
                f"{title} correlations ({document['mode']}, m={document['m']})",
                {"correlation": document["correlations"]},
            )
        )
    elif command == "montecarlo":
        table = Table(title=f"Monte Carlo: {document['model']}, n={document['n']}")
        table.add_column("statistic")
        table.add_column("mean", justify="right")
        table.add_column("sd", justify="right")
        table.add_row("d1", f"{document['mean_first']:.4f}", f"{document['sd_first']:.4f}")
        table.add_row(
            "d2", f"{document['mean_second']:.4f}", f"{document['sd_second']:.4f}"
        )
        console.print(table)
    elif command == "verify":
        table = Table(title=f"Identity checks ({document['trials']} trials)")
        table.add_column("identity")
        table.add_column("max error", justify="right")
        table.add_column("tol", justify="right")
        table.add_column("result")
        for check in document["checks"]:
            status = "[green]pass[/green]" if check["passed"] else "[red]FAIL[/red]"
            table.add_row(
                check["name"], f"{check['max_error']:.3e}", f"{check['tol']:g}", status
            )
        console.print(table)


def _emit(runner: ExperimentRunner, document: Report, args: argparse.Namespace) -> None:
    if args.out:
        runner.save(document, args.out)
    if args.json:
        sys.stdout.write(runner.dumps(document))
    else:
        render(document)


def _sim_config(args: argparse.Namespace, model: str) -> SimConfig:
    return SimConfig(
        n=args.n,
        p=args.grid_points,
        kl_terms=args.kl_terms,
        seed=args.seed,
        model=model,
        beta=(args.beta[0], args.beta[1]),
    )


def check_args(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    """Reject flag combinations the simulation cannot honour as usage errors."""
    args.config = None
    if args.command in ("simulate", "montecarlo"):
        models = SIM_MODELS if args.command == "simulate" else MC_MODELS
        try:
            args.config = _sim_config(args, models[args.model])
        except FpccaError as e:
            parser.error(str(e))


def run(args: argparse.Namespace) -> int:
    """Execute a parsed command; returns the exit code."""
    runner = ExperimentRunner(m=args.harmonics, mode=args.mode)

    if args.command == "simulate":
        written = runner.simulate_to(args.config, args.out or ".")
        for path in written:
            console.print(str(path))
        return EXIT_OK

    document: Dict[str, Any]
    if args.command == "fpca":
        document = runner.fpca_report(runner.load(args.input))
    elif args.command == "cca":
        document = runner.cca_report(runner.load(args.x1), runner.load(args.x2))
    elif args.command == "pcca":
        document = runner.pcca_report(
            runner.load(args.cond), runner.load(args.x2), runner.load(args.x3)
        )
    elif args.command == "montecarlo":
        report = runner.montecarlo(args.config, args.replications, args.workers)
        document = runner.montecarlo_report(report, timing=args.timing)
        if not args.json:
            console.print(f"Runtime: {report.runtime:.1f}s")
    else:
        verification = runner.verify(
            trials=args.trials,
            dim=args.dim,
            seed=args.seed,
            tol=args.tol,
            oracle_tol=args.oracle_tol,
            inject_fault=args.inject_fault,
        )
        _emit(runner, runner.verify_report(verification), args)
        if not verification.passed:
            logger.error(f"Failed identities: {', '.join(verification.failures)}")
            return EXIT_VERIFY_FAILED
        return EXIT_OK

    _emit(runner, document, args)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> None:
    """Main entry point for the command-line interface."""
    args = parse_args(argv)

    # Configure logging level
    if args.debug:
        logging.getLogger().setLevel(logging.DEBUG)
        logger.debug("Debug mode enabled")

    try:
        code = run(args)
    except KeyboardInterrupt:
        logger.info("Operation cancelled by user")
        code = EXIT_VERIFY_FAILED
    except (OSError, FpccaError) as e:
        code = EXIT_IO if isinstance(e, OSError) else EXIT_DATA
        logger.error(f"An error occurred: {e}")
        if args.debug:
            import traceback

            traceback.print_exc()
    sys.exit(code)


if __name__ == "__main__":
    main()
