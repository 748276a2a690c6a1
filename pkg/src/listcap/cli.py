"""Command-line entry point: ``listcap <command> [options]``.

Exit codes: 0 success, 1 input error, 2 capacity iteration did not
converge, 3 converse bound violated.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import logging
import math
import sys

from .capacity import DEFAULT_MAX_ITER, arimoto_blahut
from .codes import error_probability, lift_code, verify_converse_bound
from .errors import ListcapError, NotConverged
from .harness import SWEEP_COLUMNS, SweepConfig, run_sweep, write_csv
from .io import code_to_json, load_json, read_channel, read_code, state_from_json
from .renyi import DEFAULT_GRID_POINTS, DEFAULT_S_LO, ExponentQuery, sc_exponent

EXIT_OK, EXIT_INPUT, EXIT_NOT_CONVERGED, EXIT_VIOLATION = 0, 1, 2, 3

log = logging.getLogger("listcap")


class InputError(Exception):
    pass


def _floats(text: str) -> list:
    items = [t for t in text.replace(" ", "").split(",") if t]
    try:
        return [float(t) for t in items]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _ints(text: str) -> list:
    return [int(v) for v in _floats(text)]


def _scale(units: str) -> float:
    return 1.0 / math.log(2) if units == "bits" else 1.0


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _emit_json(obj, path):
    with _output(path) as fh:
        fh.write(json.dumps(obj, indent=2, allow_nan=True) + "\n")


def _sigma(args, W):
    if args.sigma == "capacity":
        return arimoto_blahut(W, tol=args.tol).sigma_star
    return state_from_json(load_json(args.sigma))


def cmd_capacity(args) -> int:
    W = read_channel(args.channel)
    try:
        result = arimoto_blahut(W, tol=args.tol, max_iter=args.max_iter)
    except NotConverged as exc:
        log.error("%s", exc)
        _emit_json({**exc.result.to_json(args.units), "converged": False}, args.out)
        return EXIT_NOT_CONVERGED
    _emit_json({**result.to_json(args.units), "converged": True}, args.out)
    return EXIT_OK


def cmd_exponent(args) -> int:
    W = read_channel(args.channel)
    sigma = _sigma(args, W)
    rate = args.rate / _scale(args.units)
    result = sc_exponent(ExponentQuery(rate, args.s_lo, args.grid_points), W, sigma)
    with _output(args.out) as fh:
        write_csv(fh, ("s", "phi", "log_phi", "objective"), result.to_csv_rows())
    infinite = sum(1 for _, ph, _ in result.trace if math.isinf(ph))
    if infinite:
        log.warning("%d grid points have infinite phi (support mismatch)", infinite)
    summary = {
        "rate": args.rate,
        "exponent": result.exponent * _scale(args.units),
        "s_star": result.s_star,
        "infinite_rows": infinite,
        "units": args.units,
    }
    if args.summary:
        _emit_json(summary, args.summary)
    else:
        sys.stderr.write(json.dumps(summary) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    if not args.s:
        raise InputError("need at least one s value")
    if any(s > 0 for s in args.s):
        raise InputError("s values must be <= 0")
    W = read_channel(args.channel)
    code = read_code(args.code)
    report = verify_converse_bound(code, W, _sigma(args, W), args.s)
    _emit_json({**report.to_json(), "units": "probability"}, args.out)
    return EXIT_VIOLATION if report.violated else EXIT_OK


def cmd_code_eval(args) -> int:
    W = read_channel(args.channel)
    metrics = error_probability(read_code(args.code), W)
    _emit_json({"p_e": metrics.p_e, "success": metrics.success, "units": "probability"}, args.out)
    return EXIT_OK


def cmd_lift(args) -> int:
    code = lift_code(read_code(args.code), args.list_size)
    if args.channel:
        W = read_channel(args.channel)
        metrics = error_probability(code, W)
        log.info("lifted code: N=%d L=%d p_e=%.12g", code.N, code.L, metrics.p_e)
    _emit_json(code_to_json(code), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    W = read_channel(args.channel)
    cfg = SweepConfig(
        rates=tuple(args.rates),
        block_lengths=tuple(args.n),
        list_size=args.list_size,
        rho=args.rho,
        trials=args.trials,
        seed=args.seed,
        method=args.method,
    )
    rows = run_sweep(W, cfg, tol=args.tol)
    with _output(args.out) as fh:
        write_csv(fh, SWEEP_COLUMNS, (r.as_tuple() for r in rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--channel", help="channel JSON file")
    common.add_argument("--units", choices=("bits", "nats"), default="nats")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=1e-8, help="capacity duality-gap tolerance (nats)")
    common.add_argument("--out", default="-", help="output path (default stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="listcap", description="List-decoding capacity toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", parents=[common], help="capacity with duality-gap certificate")
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("exponent", parents=[common], help="strong-converse exponent trace (CSV)")
    p.add_argument("--sigma", default="capacity", help="'capacity' or a state JSON file")
    p.add_argument("--rate", type=float, required=True, help="rate in --units per channel use")
    p.add_argument("--s-lo", type=float, default=DEFAULT_S_LO)
    p.add_argument("--grid-points", type=int, default=DEFAULT_GRID_POINTS)
    p.add_argument("--summary", help="write the summary JSON here instead of stderr")
    p.set_defaults(func=cmd_exponent)

    p = sub.add_parser("verify", parents=[common], help="check the converse bound on a code")
    p.add_argument("--code", required=True)
    p.add_argument("--sigma", default="capacity")
    p.add_argument("--s", type=_floats, default=[0.0, -0.5, -1.0], help="comma-separated s values <= 0")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", parents=[common], help="random-code rate sweep (CSV)")
    p.add_argument("--rates", type=_floats, required=True, help="comma-separated rates in nats")
    p.add_argument("--n", type=_ints, required=True, help="comma-separated block lengths")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--list-size", type=int, default=1)
    group.add_argument("--rho", type=float, help="exponential list size L_n = ceil(exp(rho n))")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--method", choices=("auto", "exact", "mc"), default="auto")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("lift", parents=[common], help="lift a conventional code to an L-list code")
    p.add_argument("--code", required=True)
    p.add_argument("--list-size", type=int, required=True)
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("code-eval", parents=[common], help="exact error probability of a code")
    p.add_argument("--code", required=True)
    p.set_defaults(func=cmd_code_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="listcap: %(levelname)s: %(message)s")
    if args.command != "lift" and not args.channel:
        log.error("--channel is required")
        return EXIT_INPUT
    try:
        return args.func(args)
    except (InputError, ListcapError, ValueError, KeyError, TypeError, OSError) as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
