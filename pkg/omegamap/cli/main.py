import hashlib
import logging
import sys
import time
from dataclasses import fields
from importlib.resources import files
from pathlib import Path
from typing import Any, Dict, List
import configargparse
from humanfriendly import format_timespan
from ..errors import NumericalError, OmegaMapError, ValidationError
from ..model import CANNED_NAMES, GridSpec, RunOptions, load_config
from ..utils import THREADS_ENV
from .emit import emit_frame, emit_json, emit_matrix_grid, error_json
from .verbs import SIMULATE_TARGETS, VERBS, Context, VerbOutput
from .verify import verify

logger = logging.getLogger(__name__)

SEED_ENV = "OMEGA_MAP_SEED"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
COMMANDS = tuple(VERBS) + ("verify",)


class ArgumentParser(configargparse.ArgumentParser):
    """Raise on bad arguments so that they leave through the error JSON like any other input error."""

    def error(self, message: str):
        raise ValidationError(message, code="invalid_arguments")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="omega-map",
        description="Scale matrices, omega-killed fluctuation identities and Monte Carlo checks for MMBM.",
    )
    parser.add_argument("verb", choices=COMMANDS, help="Computation to run")
    parser.add_argument("--config", required=True, help="JSON configuration file or a bundled name (e.g. fig2)")
    parser.add_argument("--out", help="Output file; stdout when omitted")
    parser.add_argument("--q", type=float, help="Killing rate of the classic scale matrix")
    parser.add_argument("--delta", type=float, help="Discount rate added to omega")
    parser.add_argument("--x", type=float, help="Starting level")
    parser.add_argument("--c", type=float, help="Upper barrier")
    parser.add_argument("--d", type=float, help="Lower barrier (ruin depth for dividends)")
    parser.add_argument("--grid", type=GridSpec.parse, help="Output grid as min:max:h")
    parser.add_argument("--step", type=float, help="Volterra grid step when it differs from the grid's")
    parser.add_argument("--extrapolate", action="store_true", help="Richardson-combine grids at h and h/2")
    parser.add_argument("--paths", type=int, help="Monte Carlo paths per starting state")
    parser.add_argument("--seed", type=int, env_var=SEED_ENV, help="Monte Carlo root seed")
    parser.add_argument("--dt", type=float, help="Monte Carlo sub-step")
    parser.add_argument("--t-max", dest="t_max", type=float, help="Monte Carlo censoring horizon")
    parser.add_argument("--target", choices=SIMULATE_TARGETS, default="exit", help="Quantity to simulate")
    parser.add_argument("--sweep", type=GridSpec.parse, help="Dividend barriers to sweep as min:max:h")
    parser.add_argument("--threads", type=int, env_var=THREADS_ENV, help="Worker processes")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug")
    return parser


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def read_config(ref: str) -> bytes:
    """
    Bytes of a configuration file, or of a bundled configuration when ref names one.

    Args:
        ref (str): Path to a JSON file, or the name of a bundled configuration such as "fig2".

    Returns:
        bytes: The raw configuration, hashed into the sidecar before parsing.

    Raises:
        ValidationError: With code "config_not_found" when neither exists.
    """
    path = Path(ref)
    if path.is_file():
        return path.read_bytes()
    if ref in CANNED_NAMES:
        return files("omegamap.assets").joinpath(f"{ref}.json").read_bytes()
    raise ValidationError(f"Configuration file not found: {ref}", code="config_not_found")


def parameters(options: RunOptions) -> Dict[str, Any]:
    out = {}
    for f in fields(options):
        if f.name == "overrides":
            continue
        value = getattr(options, f.name)
        if isinstance(value, GridSpec):
            value = {"x_min": value.x_min, "x_max": value.x_max, "h": value.h}
        out[f.name] = value
    return out


def write_output(output: VerbOutput, sink: str | None) -> None:
    if output.grids is not None:
        emit_matrix_grid(output.grids, sink)
    elif output.table is not None:
        emit_frame(output.table, sink)
    else:
        emit_json(output.doc, sink)


def run(argv: List[str] | None = None) -> int:
    """
    Run one command.

    Args:
        argv (List[str] | None): Arguments without the program name. Defaults to sys.argv[1:].

    Returns:
        int: 0 on success, 1 on invalid input, 2 on numerical failure.
    """
    try:
        args = build_parser().parse_args(argv)
        configure_logging(args.verbose)
        start = time.perf_counter()

        raw = read_config(args.config)
        model, om, options = load_config(raw)
        options = options.with_overrides(
            q=args.q, delta=args.delta, x=args.x, c=args.c, d=args.d, grid=args.grid,
            paths=args.paths, seed=args.seed, dt=args.dt, t_max=args.t_max,
        )
        ctx = Context(model, om, options, args.step, args.extrapolate, args.threads, args.target, args.sweep)
        logger.info(f"{args.verb}: N = {model.n_states}, omega = {om.kind}, overrides = {sorted(options.overrides)}")

        summary: Dict[str, Any] = {}
        if args.verb == "verify":
            verify(ctx, args.out)
        else:
            output = VERBS[args.verb](ctx)
            write_output(output, args.out)
            summary = output.doc

        elapsed = time.perf_counter() - start
        if args.out not in (None, "-"):
            emit_json(
                {
                    "verb": args.verb,
                    "config": args.config,
                    "config_sha256": hashlib.sha256(raw).hexdigest(),
                    "parameters": parameters(options),
                    "step": ctx.h,
                    "extrapolate": args.extrapolate,
                    "summary": summary,
                    "runtime_seconds": elapsed,
                },
                f"{args.out}.json",
            )
        logger.info(f"{args.verb} finished in {format_timespan(elapsed)}")
        return 0
    except ValidationError as e:
        sys.stderr.write(error_json(e) + "\n")
        return 1
    except NumericalError as e:
        sys.stderr.write(error_json(e) + "\n")
        return 2
    except OSError as e:
        sys.stderr.write(error_json(OmegaMapError(str(e), code="io_error")) + "\n")
        return 1


def main() -> None:
    sys.exit(run())
