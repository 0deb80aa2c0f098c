import argparse
import json
import sys
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import sentry_sdk
from pydantic import ValidationError

from .config.logging import configure_logging, get_logger, run_context
from .config.settings import settings
from .errors import ConfigError, GfdmError, VerificationFailed
from .models.params import GfdmParams, PrototypeFilter
from .models.reports import GridSpec, ResultTable, RunConfig, SweepPoint
from .services.filters import sample_gtilde, time_filter
from .services.io import read_symbols, split_blocks, write_symbols, write_table
from .services.metrics import (
    optimal_lambda,
    sir_asymptotic,
    sir_limit,
    zak_spectrum,
)
from .services.modem import (
    add_noise,
    demodulate_vectors,
    factorize_A,
    modulate_vectors,
)
from .services.sweeps import lambda_grid, m_grid, run_sweep
from .services.verify import run_verification

# Configure logging before anything else
configure_logging()
logger = get_logger(__name__)

DEFAULT_GRIDS = {
    "cond-sweep": "0:0.05:0.95",
    "nef-sweep": "0:0.05:0.95",
    "metrics-vs-m": "4:4:64",
}

CONFIG_KEYS = {"family", "alpha", "beta", "generator", "K", "M", "lambda"}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--K", type=int, help="Number of subcarriers")
    common.add_argument("--M", type=int, help="Number of subsymbols")
    common.add_argument("--alpha", type=float, help="Roll-off factor")
    common.add_argument(
        "--lambda",
        dest="lam",
        type=float,
        help="Sampling shift (default: optimal for M)",
    )
    common.add_argument("--filter", choices=["rc", "rrc", "xia"])
    common.add_argument("--family", choices=["a", "b", "xia"])
    common.add_argument("--beta", type=int, choices=[0, 1, 2, 3])
    common.add_argument("--generator", choices=["rc", "linear"])
    common.add_argument(
        "--receiver", choices=["zf", "mf"], default="zf"
    )
    common.add_argument("--snr-db", dest="snr_db", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="Output file (default: stdout)")
    common.add_argument("--input", help="Input symbol file")
    common.add_argument(
        "--binary",
        action="store_true",
        help="Symbol files hold little-endian float64 pairs",
    )
    common.add_argument("--grid", help="Sweep grid as start:step:stop")
    common.add_argument(
        "--quick", action="store_true", help="Restrict verify to K, M <= 8"
    )
    common.add_argument("--config", help="JSON filter specification")

    parser = argparse.ArgumentParser(
        prog="gfdm",
        description=(
            "GFDM modulation-matrix factorizations, shifted filter design "
            "and conditioning analysis"
        ),
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"{settings.app_name} {settings.app_version}",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True
    commands = {
        "design": "Sampled frequency and time filters",
        "spectrum": "Zak spectrum and squared singular values",
        "cond-sweep": "Condition number over a lambda grid",
        "nef-sweep": "NEF and SIR metric over a lambda grid",
        "metrics-vs-m": "Metrics over an M grid at the optimal lambda",
        "modulate": "Modulate a symbol file",
        "demodulate": "Demodulate a sample file",
        "verify": "Run the oracle suite",
    }
    for name, description in commands.items():
        subparsers.add_parser(
            name, parents=[common], help=description, description=description
        )
    return parser


def _load_config_file(path: str) -> Dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except (OSError, ValueError) as exc:
        # ValueError covers JSONDecodeError and UnicodeDecodeError
        raise ConfigError(f"Cannot load config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"Config {path} must hold a JSON object")
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"Unknown config keys: {sorted(unknown)}")
    return data


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge the JSON config with the flags; flags win"""
    values = _load_config_file(args.config) if args.config else {}

    def pick(flag: Any, key: str, default: Any) -> Any:
        return flag if flag is not None else values.get(key, default)

    K = pick(args.K, "K", 16)
    M = pick(args.M, "M", 8)
    lam = pick(args.lam, "lambda", None)
    if lam is None:
        lam = optimal_lambda(M) if isinstance(M, int) and M >= 2 else 0.0

    family = args.family or (None if args.filter else values.get("family"))
    prototype = PrototypeFilter.from_name(
        args.filter or "rc",
        alpha=pick(args.alpha, "alpha", 0.5),
        family=family,
        beta=pick(args.beta, "beta", 0),
        generator=pick(args.generator, "generator", "rc"),
    )

    grid = args.grid or DEFAULT_GRIDS.get(args.command)
    try:
        grid_spec = GridSpec.parse(grid) if grid else None
    except ValueError as exc:
        raise ConfigError(f"Invalid grid {grid!r}: {exc}") from exc

    seed = args.seed
    if seed is None:
        seed = settings.verify_seed if args.command == "verify" else 0

    return RunConfig(
        command=args.command,
        params=GfdmParams(K=K, M=M, lam=lam),
        filter=prototype,
        grid=grid_spec,
        input=args.input,
        out=args.out,
        binary=args.binary,
        receiver=args.receiver,
        seed=seed,
        snr_db=args.snr_db,
        quick=args.quick,
    )


def _table(config: RunConfig, columns: List[str]) -> ResultTable:
    return ResultTable(
        columns=columns,
        metadata={
            "app": settings.app_name,
            "version": settings.app_version,
            "config": config.echo(),
        },
    )


def cmd_design(config: RunConfig) -> ResultTable:
    """Sampled filter g~ and its time-domain counterpart g"""
    gtilde = sample_gtilde(config.params, config.filter)
    g = time_filter(gtilde)
    table = _table(config, ["n", "gtilde_re", "gtilde_im", "g_re", "g_im"])
    for n, (a, b) in enumerate(zip(gtilde, g)):
        table.add_row([n, a.real, a.imag, b.real, b.imag])
    return table


def cmd_spectrum(config: RunConfig) -> ResultTable:
    zak = zak_spectrum(config.params, config.filter)
    table = _table(config, ["k", "m", "z_re", "z_im", "sigma_sq"])
    sigma_sq = zak.sigma_sq
    for k in range(config.params.K):
        for m in range(config.params.M):
            z = zak.z[k, m]
            table.add_row([k, m, z.real, z.imag, sigma_sq[k, m]])
    return table


def _report_cells(row: SweepPoint, names: List[str]) -> List[Any]:
    if not row.ok:
        return [None] * len(names)
    return [getattr(row.report, name) for name in names]


def cmd_cond_sweep(config: RunConfig) -> ResultTable:
    """Numeric and closed-form condition number over lambda"""
    rows = run_sweep(lambda_grid(config.params, config.filter, config.grid))
    table = _table(
        config,
        ["lambda", "cond_numeric", "cond_closed", "filter", "M", "K", "error"],
    )
    for row in rows:
        table.add_row(
            [row.params.lam]
            + _report_cells(row, ["cond_numeric", "cond_closed"])
            + [row.filter.label, row.params.M, row.params.K, row.error]
        )
    return table


def cmd_nef_sweep(config: RunConfig) -> ResultTable:
    """NEF and SIR metric over lambda"""
    rows = run_sweep(lambda_grid(config.params, config.filter, config.grid))
    names = [
        "nef",
        "nef_db",
        "sir_metric",
        "sir_metric_db",
        "cond_numeric",
    ]
    table = _table(config, ["lambda"] + names + ["error"])
    for row in rows:
        table.add_row(
            [row.params.lam] + _report_cells(row, names) + [row.error]
        )
    return table


def cmd_metrics_vs_m(config: RunConfig) -> ResultTable:
    """Metrics over M with the optimal shift of each M"""
    rows = run_sweep(m_grid(config.params, config.filter, config.grid))
    asymptotic = sir_asymptotic(config.filter, config.params.K)
    limit = sir_limit(config.filter, config.params.K)
    names = [
        "cond_numeric",
        "cond_closed",
        "nef",
        "nef_db",
        "sir_metric",
        "sir_metric_db",
    ]
    table = _table(
        config,
        ["M", "lambda_used"]
        + names
        + ["sir_asymptotic", "sir_limit", "error"],
    )
    for row in rows:
        table.add_row(
            [row.params.M, row.params.lam]
            + _report_cells(row, names)
            + [asymptotic, limit, row.error]
        )
    return table


def _require_input(config: RunConfig) -> np.ndarray:
    if not config.input:
        raise ConfigError(f"{config.command} requires --input")
    values = read_symbols(config.input, config.binary)
    return split_blocks(values, config.params.N)


def cmd_modulate(config: RunConfig) -> None:
    """Modulate every N-symbol block of the input file"""
    blocks = _require_input(config)
    params = config.params
    matrix = factorize_A(params, sample_gtilde(params, config.filter))
    samples = modulate_vectors(matrix, blocks)
    if config.snr_db is not None:
        samples = add_noise(
            samples, config.snr_db, np.random.default_rng(config.seed)
        )
    write_symbols(samples, config.out, config.binary)
    logger.info("Modulated blocks", blocks=len(blocks), N=params.N)


def cmd_demodulate(config: RunConfig) -> None:
    """Demodulate every N-sample block of the input file"""
    blocks = _require_input(config)
    params = config.params
    matrix = factorize_A(params, sample_gtilde(params, config.filter))
    symbols = demodulate_vectors(matrix, blocks, config.receiver)
    write_symbols(symbols, config.out, config.binary)
    logger.info(
        "Demodulated blocks",
        blocks=len(blocks),
        N=params.N,
        receiver=config.receiver,
    )


def cmd_verify(config: RunConfig) -> ResultTable:
    """Oracle suite; the table is written before a failure is raised"""
    results = run_verification(quick=config.quick, seed=config.seed)
    table = _table(
        config, ["check", "cases", "max_error", "tolerance", "passed"]
    )
    for result in results:
        table.add_row(
            [
                result.name,
                result.cases,
                result.max_error,
                result.tolerance,
                result.passed,
            ]
        )
    return table


COMMANDS: Dict[str, Callable[[RunConfig], Optional[ResultTable]]] = {
    "design": cmd_design,
    "spectrum": cmd_spectrum,
    "cond-sweep": cmd_cond_sweep,
    "nef-sweep": cmd_nef_sweep,
    "metrics-vs-m": cmd_metrics_vs_m,
    "modulate": cmd_modulate,
    "demodulate": cmd_demodulate,
    "verify": cmd_verify,
}


def run(config: RunConfig) -> None:
    table = COMMANDS[config.command](config)
    if table is None:
        return
    write_table(table, config.out)
    if config.command == "verify":
        failed = [row[0] for row in table.rows if row[-1] is False]
        if failed:
            raise VerificationFailed(failed)


def init_sentry() -> None:
    """Initialize Sentry if DSN is provided"""
    if settings.sentry_dsn:
        sentry_sdk.init(
            dsn=settings.sentry_dsn,
            release=f"{settings.app_name}@{settings.app_version}",
        )
        logger.info("Sentry initialized")


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command and return its exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 0

    init_sentry()

    try:
        with run_context(args.command):
            run(resolve_config(args))
        return 0

    except ValidationError as exc:
        logger.warning("Validation error", errors=exc.errors())
        for err in exc.errors():
            location = ".".join(str(part) for part in err["loc"])
            print(f"error: {location}: {err['msg']}", file=sys.stderr)
        return ConfigError.exit_code

    except GfdmError as exc:
        print(f"error: {exc.detail}", file=sys.stderr)
        return exc.exit_code

    except Exception as exc:
        logger.error("Unexpected error", error=str(exc), exc_info=True)
        sentry_sdk.capture_exception(exc)
        print(f"error: {exc}", file=sys.stderr)
        return 1
