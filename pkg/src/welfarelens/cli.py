import logging
import math
import os
import sys
from argparse import ArgumentParser, Namespace
from collections.abc import Sequence
from dataclasses import dataclass
from datetime import datetime
from enum import StrEnum
from pathlib import Path
from typing import NoReturn

from dotenv import dotenv_values, find_dotenv
from rich.logging import RichHandler
from rich.markup import escape

from . import VERBOSE, __title__, __version__
from ._console import console
from .curves import CurveKind, Estimator, curve_grid, index_report
from .distributions import (
    Degenerate,
    Distribution,
    Exponential,
    LogNormal,
    Pareto,
    Uniform,
    load_sample,
)
from .dominance import (
    DEFAULT_GRID,
    lorenz_dominance,
    verdicts_agree,
    zenga_dominance,
)
from .exceptions import (
    ConfigError,
    DistSpecError,
    DomainError,
    NumericalError,
    WelfareLensError,
)
from .quadrature import DEFAULT_REL_TOL
from .reports import (
    OutputFormat,
    render_certificates,
    render_curve,
    render_dominance,
    render_index,
    render_weights,
    render_welfare,
)
from .welfare import (
    WeightVariant,
    WelfareFamily,
    WelfareKind,
    all_kinds,
    certify,
    depends_on_distribution,
    identity_report,
    weight_profile,
)

logger = logging.getLogger(__name__)

# Grid used by curve and weights when neither --grid nor WELFARELENS_GRID is set.
PLOT_GRID: int = 99
DEFAULT_K: float = 2.0

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERICAL = 2
EXIT_INTERRUPTED = 130


class Command(StrEnum):
    INDEX = "index"
    CURVE = "curve"
    WEIGHTS = "weights"
    WELFARE = "welfare"
    DOMINANCE = "dominance"
    VERIFY = "verify"


class MyArgParser(ArgumentParser):
    """Argument parser that prints help on error instead of just usage."""

    def error(self, message: str) -> NoReturn:
        """Print the error message followed by full help, then exit."""
        _ = sys.stderr.write(f"{self.prog}: {message}\n\n")
        self.print_help()
        sys.exit(EXIT_INVALID)


# ---------------------------------------------------------------------------
# Distribution specs
# ---------------------------------------------------------------------------

_FAMILIES: dict[str, tuple[type[Distribution], int]] = {
    "uniform": (Uniform, 2),
    "exponential": (Exponential, 1),
    "pareto": (Pareto, 2),
    "lognormal": (LogNormal, 2),
    "degenerate": (Degenerate, 1),
}


def parse_dist_spec(spec: str) -> Distribution:
    """Parse ``family:p1,p2`` into a validated parametric distribution.

    ``uniform:a,b``, ``exponential:rate``, ``pareto:alpha,x_min``,
    ``lognormal:mu,sigma`` and ``degenerate:value`` are understood.
    """
    family, sep, raw_params = spec.strip().partition(":")
    family = family.strip().lower()
    if family not in _FAMILIES:
        known = ", ".join(_FAMILIES)
        raise DistSpecError(f"unknown distribution family {family!r} (use {known})")
    cls, arity = _FAMILIES[family]
    fields = [item.strip() for item in raw_params.split(",")] if sep else []
    if len(fields) != arity or not all(fields):
        raise DistSpecError(
            f"{family} takes {arity} parameter(s), got {spec!r} "
            f"(format {family}:{','.join(['x'] * arity)})"
        )
    try:
        params = [float(item) for item in fields]
    except ValueError:
        raise DistSpecError(f"unparsable parameter in {spec!r}") from None
    try:
        return cls(*params)
    except DomainError as exc:
        raise DistSpecError(f"{spec}: {exc}") from None


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    """One fully resolved invocation (CLI > env > default already applied)."""

    command: Command
    input: Path | None = None
    dist: str | None = None
    input2: Path | None = None
    dist2: str | None = None
    column: str = "income"
    weight_column: str | None = None
    kind: WelfareFamily | None = None
    ks: tuple[float, ...] = ()
    curve: CurveKind = CurveKind.LORENZ
    variant: WeightVariant = WeightVariant.NU
    estimator: Estimator | None = None
    grid: int | None = None
    fmt: OutputFormat = OutputFormat.JSON
    output: Path | None = None
    rel_tol: float = DEFAULT_REL_TOL
    workers: int | None = None

    def __post_init__(self) -> None:
        for k in self.ks:
            if not k >= 1.0:
                raise ConfigError(f"--k must be at least 1, got {k}")
        if self.input is not None and self.dist is not None:
            raise ConfigError("--input and --dist are mutually exclusive")
        if self.input2 is not None and self.dist2 is not None:
            raise ConfigError("--input2 and --dist2 are mutually exclusive")
        if not self.has_first and self.needs_distribution:
            raise ConfigError(f"{self.command} needs --input or --dist")
        if self.command is Command.DOMINANCE and not self.has_second:
            raise ConfigError("dominance needs --input2 or --dist2")
        if not (math.isfinite(self.rel_tol) and 0.0 < self.rel_tol < 1.0):
            raise ConfigError(
                f"relative tolerance must lie in (0, 1), got {self.rel_tol}"
            )
        if self.grid is not None and self.grid < 1:
            raise ConfigError(f"grid needs at least 1 point, got {self.grid}")
        if self.workers is not None and self.workers < 1:
            raise ConfigError(f"workers must be positive, got {self.workers}")

    @property
    def has_first(self) -> bool:
        return self.input is not None or self.dist is not None

    @property
    def has_second(self) -> bool:
        return self.input2 is not None or self.dist2 is not None

    @property
    def weight_kind(self) -> WelfareKind:
        family = self.kind or WelfareFamily.ZENGA
        return WelfareKind(family, self.ks[0] if self.ks else DEFAULT_K)

    @property
    def needs_distribution(self) -> bool:
        if self.command is not Command.WEIGHTS:
            return True
        return depends_on_distribution(self.weight_kind, self.variant)


def _load(
    path: Path | None,
    spec: str | None,
    config: RunConfig,
) -> Distribution:
    if spec is not None:
        return parse_dist_spec(spec)
    assert path is not None
    sample = load_sample(path, config.column, config.weight_column)
    logger.log(VERBOSE, f"loaded {sample.describe()} from {path}")
    return sample


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _index(config: RunConfig) -> str:
    d = _load(config.input, config.dist, config)
    estimator = config.estimator or Estimator.DISCRETE
    report = index_report(d, config.ks or (DEFAULT_K,), estimator, config.rel_tol)
    return render_index(report, config.fmt)


def _curve(config: RunConfig) -> str:
    d = _load(config.input, config.dist, config)
    grid = curve_grid(d, config.curve, config.grid or PLOT_GRID)
    return render_curve(grid, config.fmt)


def _weights(config: RunConfig) -> str:
    d = _load(config.input, config.dist, config) if config.has_first else None
    profile = weight_profile(
        config.weight_kind,
        config.variant,
        config.grid or PLOT_GRID,
        d,
        config.rel_tol,
    )
    return render_weights(profile, config.fmt)


def _welfare_kinds(config: RunConfig) -> tuple[WelfareKind, ...]:
    if config.kind is None:
        return all_kinds(config.ks[0] if config.ks else DEFAULT_K)
    if config.kind is WelfareFamily.GINI_K:
        return tuple(WelfareKind(config.kind, k) for k in config.ks or (DEFAULT_K,))
    return (WelfareKind(config.kind),)


def _welfare(config: RunConfig) -> str:
    d = _load(config.input, config.dist, config)
    estimator = config.estimator or Estimator.EMBEDDING
    rows = identity_report(d, _welfare_kinds(config), estimator, config.rel_tol)
    return render_welfare(rows, config.fmt)


def _dominance(config: RunConfig) -> str:
    x = _load(config.input, config.dist, config)
    y = _load(config.input2, config.dist2, config)
    grid = config.grid or DEFAULT_GRID
    verdicts = {
        "lorenz": lorenz_dominance(x, y, grid),
        "zenga": zenga_dominance(x, y, grid),
    }
    equivalent = verdicts_agree(verdicts["lorenz"], verdicts["zenga"])
    if not equivalent:
        logger.warning("lorenz and zenga orderings disagree on this pair")
    return render_dominance(verdicts, equivalent, config.fmt)


def _verify(config: RunConfig) -> tuple[str, bool]:
    d = _load(config.input, config.dist, config)
    certificates = certify(d, config.workers, config.rel_tol)
    failed = [c.id for c in certificates if not c.passed]
    if failed:
        logger.error(f"{len(failed)} certificate(s) failed: {', '.join(failed)}")
    else:
        logger.info(f"all {len(certificates)} certificates passed")
    return render_certificates(certificates, config.fmt), not failed


def _dispatch(config: RunConfig) -> tuple[str, bool]:
    match config.command:
        case Command.INDEX:
            return _index(config), True
        case Command.CURVE:
            return _curve(config), True
        case Command.WEIGHTS:
            return _weights(config), True
        case Command.WELFARE:
            return _welfare(config), True
        case Command.DOMINANCE:
            return _dominance(config), True
        case Command.VERIFY:
            return _verify(config)


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        _ = sys.stdout.write(text)
        sys.stdout.flush()
        return
    _ = output.write_text(text, encoding="utf-8", newline="")
    logger.log(VERBOSE, f"wrote report to {output}")


def _fail(exc: BaseException, status: int) -> int:
    """Print an actionable error without a stack trace and return *status*."""
    console.print(f"[red]ERROR:[/red] {escape(str(exc))}")
    return status


def run(config: RunConfig) -> int:
    """Execute *config* and write its report; return the process exit status."""
    logger.debug(f"running {config}")
    try:
        text, passed = _dispatch(config)
        _emit(text, config.output)
    except KeyboardInterrupt:
        console.print("\n[yellow]Interrupted.[/yellow]")
        return EXIT_INTERRUPTED
    except NumericalError as exc:
        return _fail(exc, EXIT_NUMERICAL)
    except (WelfareLensError, OSError) as exc:
        return _fail(exc, EXIT_INVALID)
    return EXIT_OK if passed else EXIT_NUMERICAL


# ---------------------------------------------------------------------------
# Argument parsing and environment
# ---------------------------------------------------------------------------


def _parse_bool_env(value: str | None, *, env_var: str) -> bool | None:
    """Parse an environment variable string into a boolean, or ``None`` if unset."""
    if value is None or not value.strip():
        return None

    normalized = value.strip().lower()
    if normalized in {"1", "true", "yes", "y", "on"}:
        return True
    if normalized in {"0", "false", "no", "n", "off"}:
        return False

    raise ValueError(
        f"Invalid boolean value for {env_var}: {value!r}. "
        "Use one of 1/0, true/false, yes/no, on/off."
    )


def _with_env[T](arg_value: T | None, env_var: str) -> T | str | None:
    """Return *arg_value* if set, otherwise the (non-empty) environment variable."""
    if arg_value is not None:
        return arg_value
    return os.environ.get(env_var) or None


def _resolve_bool_option(arg_val: bool | None, env_var: str, *, default: bool) -> bool:
    """Resolve a boolean option through CLI > env var > default precedence."""
    if arg_val is not None:
        return arg_val
    parsed = _parse_bool_env(os.environ.get(env_var), env_var=env_var)
    return parsed if parsed is not None else default


def _resolve_float(arg_val: float | None, env_var: str, *, default: float) -> float:
    value = _with_env(arg_val, env_var)
    if value is None:
        return default
    try:
        return float(value)
    except ValueError:
        raise ValueError(f"Invalid number for {env_var}: {value!r}") from None


def _resolve_int(arg_val: int | None, env_var: str) -> int | None:
    value = _with_env(arg_val, env_var)
    if value is None:
        return None
    try:
        return int(value)
    except ValueError:
        raise ValueError(f"Invalid integer for {env_var}: {value!r}") from None


def _resolve_format(arg_val: str | None) -> OutputFormat:
    value = _with_env(arg_val, "WELFARELENS_FORMAT") or OutputFormat.JSON
    try:
        return OutputFormat(str(value).strip().lower())
    except ValueError:
        choices = "/".join(OutputFormat)
        raise ValueError(
            f"Invalid WELFARELENS_FORMAT={value!r}; use one of {choices}"
        ) from None


def _load_dotenv() -> str | None:
    """Load a ``.env`` file (searched upward from the CWD) into ``os.environ``.

    A non-empty shell variable wins over the file; an unset or empty one is
    filled from it.
    """
    dotenv_path = find_dotenv(usecwd=True)
    if not dotenv_path:
        return None
    for key, value in dotenv_values(dotenv_path).items():
        if value is not None and not os.environ.get(key):
            os.environ[key] = value
    return dotenv_path


def _common_options() -> MyArgParser:
    common = MyArgParser(add_help=False)
    source = common.add_argument_group("input")
    source.add_argument(
        "--input",
        type=Path,
        metavar="CSV",
        default=None,
        help="CSV file holding one income per row",
    )
    source.add_argument(
        "--dist",
        metavar="SPEC",
        default=None,
        help=(
            "Parametric distribution as family:params, e.g. uniform:0,1, "
            "exponential:1, pareto:2,1, lognormal:0,1, degenerate:5"
        ),
    )
    source.add_argument(
        "--column",
        default="income",
        help="Income column of the CSV (default: income)",
    )
    source.add_argument(
        "--weight-column",
        dest="weight_column",
        metavar="COLUMN",
        default=None,
        help="Optional column of positive frequency weights",
    )
    output = common.add_argument_group("output")
    output.add_argument(
        "--format",
        dest="fmt",
        choices=[str(fmt) for fmt in OutputFormat],
        default=None,
        help="Report format (default: json, env: WELFARELENS_FORMAT)",
    )
    output.add_argument(
        "--output",
        type=Path,
        metavar="FILE",
        default=None,
        help="Write the report to FILE instead of stdout",
    )
    output.add_argument(
        "--rel-tol",
        dest="rel_tol",
        type=float,
        metavar="TOL",
        default=None,
        help=(
            f"Relative quadrature tolerance (default: {DEFAULT_REL_TOL:g}, "
            "env: WELFARELENS_REL_TOL)"
        ),
    )
    common.add_argument(
        "-v",
        "--verbose",
        dest="verbose",
        help="Verbose output (env: WELFARELENS_VERBOSE)",
        action="store_true",
        default=None,
    )
    common.add_argument(
        "-d",
        "--debug",
        dest="debug",
        help="Debug output with raw log records (env: WELFARELENS_DEBUG)",
        action="store_true",
        default=None,
    )
    return common


def _add_grid(parser: ArgumentParser, default: int) -> None:
    parser.add_argument(
        "--grid",
        type=int,
        metavar="N",
        default=None,
        help=f"Number of grid points (default: {default}, env: WELFARELENS_GRID)",
    )


def _add_k(parser: ArgumentParser) -> None:
    parser.add_argument(
        "--k",
        dest="ks",
        type=float,
        action="append",
        metavar="K",
        default=None,
        help=f"Generalized Gini order, repeatable (default: {DEFAULT_K:g})",
    )


def _add_kind(parser: ArgumentParser, help_text: str) -> None:
    parser.add_argument(
        "--kind",
        choices=[str(family) for family in WelfareFamily],
        default=None,
        help=help_text,
    )


def _add_estimator(parser: ArgumentParser, default: Estimator) -> None:
    parser.add_argument(
        "--estimator",
        choices=[str(estimator) for estimator in Estimator],
        default=None,
        help=(
            f"Sample estimator for bonferroni/zenga (default: {default}); "
            "'embedding' integrates the piecewise-linear Lorenz curve"
        ),
    )


def _argparser() -> MyArgParser:
    """Build and return the CLI argument parser with all sub-commands."""
    parser = MyArgParser(
        prog=__title__,
        description="Inequality indices, welfare weights and Lorenz/Zenga dominance",
    )
    parser.add_argument(
        "-V",
        "--version",
        action="version",
        version=f"%(prog)s {__version__}",
    )
    common = _common_options()
    commands = parser.add_subparsers(
        dest="command",
        metavar="COMMAND",
        required=True,
        parser_class=MyArgParser,
    )

    index = commands.add_parser(
        Command.INDEX, parents=[common], help="Gini, G_k, Bonferroni and Zenga indices"
    )
    _add_k(index)
    _add_estimator(index, Estimator.DISCRETE)

    curve = commands.add_parser(
        Command.CURVE, parents=[common], help="A curve sampled on an open grid"
    )
    curve.add_argument(
        "--curve",
        choices=[str(kind) for kind in CurveKind],
        default=str(CurveKind.LORENZ),
        help="Curve to sample (default: lorenz)",
    )
    _add_grid(curve, PLOT_GRID)

    weights = commands.add_parser(
        Command.WEIGHTS,
        parents=[common],
        help="Welfare weight function and its integral",
    )
    _add_kind(weights, "Welfare family (default: zenga)")
    _add_k(weights)
    weights.add_argument(
        "--variant",
        choices=[str(variant) for variant in WeightVariant],
        default=str(WeightVariant.NU),
        help="zenga only: full weight nu, rank part nu_star or penalization beta",
    )
    _add_grid(weights, PLOT_GRID)

    welfare = commands.add_parser(
        Command.WELFARE,
        parents=[common],
        help="Welfare via the index against welfare via the weights",
    )
    _add_kind(welfare, "Welfare family (default: all four)")
    _add_k(welfare)
    _add_estimator(welfare, Estimator.EMBEDDING)

    dominance = commands.add_parser(
        Command.DOMINANCE,
        parents=[common],
        help="Lorenz and Zenga dominance between two distributions",
    )
    dominance.add_argument(
        "--input2",
        type=Path,
        metavar="CSV",
        default=None,
        help="Second CSV file",
    )
    dominance.add_argument(
        "--dist2",
        metavar="SPEC",
        default=None,
        help="Second parametric distribution",
    )
    _add_grid(dominance, DEFAULT_GRID)

    verify = commands.add_parser(
        Command.VERIFY,
        parents=[common],
        help="Numerically certify the properties of the Zenga weights",
    )
    verify.add_argument(
        "--workers",
        type=int,
        metavar="N",
        default=None,
        help="Threads used to run certificates (default: Python's pool size)",
    )
    return parser


def _build_config(args: Namespace) -> RunConfig:
    """Resolve parsed arguments and the environment into a :class:`RunConfig`."""
    options = vars(args)
    kind = options.get("kind")
    estimator = options.get("estimator")
    ks: list[float] | None = options.get("ks")
    return RunConfig(
        command=Command(args.command),
        input=args.input,
        dist=args.dist,
        input2=options.get("input2"),
        dist2=options.get("dist2"),
        column=args.column,
        weight_column=args.weight_column,
        kind=WelfareFamily(kind) if kind else None,
        ks=tuple(ks or ()),
        curve=CurveKind(options.get("curve") or CurveKind.LORENZ),
        variant=WeightVariant(options.get("variant") or WeightVariant.NU),
        estimator=Estimator(estimator) if estimator else None,
        grid=_resolve_int(options.get("grid"), "WELFARELENS_GRID"),
        fmt=_resolve_format(args.fmt),
        output=args.output,
        rel_tol=_resolve_float(
            args.rel_tol, "WELFARELENS_REL_TOL", default=DEFAULT_REL_TOL
        ),
        workers=options.get("workers"),
    )


def _resolve_log_path() -> Path | None:
    """Return the file path for this run's debug log, or ``None`` when disabled.

    ``WELFARELENS_LOG_FILE`` names the file; otherwise ``WELFARELENS_LOG_DIR``
    holds one timestamped file per run.
    """
    explicit = os.environ.get("WELFARELENS_LOG_FILE")
    if explicit:
        return Path(explicit)
    log_dir = os.environ.get("WELFARELENS_LOG_DIR")
    if not log_dir:
        return None
    stamp = f"{datetime.now().astimezone():%Y%m%d-%H%M%S}"
    return Path(log_dir) / f"{__title__}-{stamp}.log"


def _configure_logging(*, verbose: bool, debug: bool) -> Path | None:
    """Configure console logging plus the optional file log; return its path.

    Console verbosity follows the flags (INFO default, VERBOSE with ``-v``,
    DEBUG with ``-d``). A file log at DEBUG is attached only when
    ``WELFARELENS_LOG_FILE`` or ``WELFARELENS_LOG_DIR`` is set; failing to open
    it logs a warning and the run continues.
    """
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()
    root.setLevel(logging.DEBUG)

    if debug:
        console_handler: logging.Handler = logging.StreamHandler()
        console_handler.setFormatter(
            logging.Formatter("%(levelname)s: %(name)s: %(message)s")
        )
        console_handler.setLevel(logging.DEBUG)
    else:
        console_handler = RichHandler(
            console=console, show_path=False, markup=False, log_time_format="[%X]"
        )
        console_handler.setLevel(VERBOSE if verbose else logging.INFO)
    root.addHandler(console_handler)

    log_path = _resolve_log_path()
    if log_path is None:
        return None
    try:
        log_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_path, encoding="utf-8")
    except OSError as exc:
        logger.warning(f"Could not open log file; continuing without one ({exc})")
        return None
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(
        logging.Formatter("%(asctime)s %(levelname)-7s %(name)s: %(message)s")
    )
    root.addHandler(file_handler)
    return log_path


def main(argv: Sequence[str] | None = None) -> None:
    """Entry point: parse arguments, resolve env vars, and run the command."""
    # .env first so file-provided values are visible to the resolution below.
    dotenv_path = _load_dotenv()

    parser = _argparser()
    args: Namespace = parser.parse_args(argv)

    try:
        verbose = _resolve_bool_option(
            args.verbose, "WELFARELENS_VERBOSE", default=False
        )
        debug = _resolve_bool_option(args.debug, "WELFARELENS_DEBUG", default=False)
        config = _build_config(args)
    except (ValueError, ConfigError) as exc:
        _ = sys.stderr.write(f"ERROR: {exc}\n\n")
        parser.print_help()
        sys.exit(EXIT_INVALID)

    log_path = _configure_logging(verbose=verbose, debug=debug)
    if dotenv_path:
        logger.log(VERBOSE, f"Loaded environment from {dotenv_path}")
    if log_path is not None:
        logger.log(VERBOSE, f"Writing full debug log to {log_path}")

    sys.exit(run(config))


if __name__ == "__main__":
    main()
