"""Command-line front end.

Exit status: 0 on success (a rejected model fit counts as success), 1 on
domain errors, 2 on usage errors and malformed input files.
"""

from __future__ import annotations

import argparse
import json
import sys
from decimal import ROUND_CEILING, ROUND_FLOOR, Decimal, InvalidOperation

from . import book as bk
from . import calibration as cal
from . import gibbs
from . import pipeline as pl
from .errors import DomainError, ModelRejected, ParseError

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class _Usage(Exception):
    pass


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (v > 0 and v != float("inf")):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text!r}")
    return v


def _negative_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (v < 0 and v != float("-inf")):
        raise argparse.ArgumentTypeError(f"must be negative and finite: {text!r}")
    return v


def _positive_decimal(text: str) -> Decimal:
    try:
        v = Decimal(text)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a decimal: {text!r}") from None
    if not (v.is_finite() and v > 0):
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1: {text!r}")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _add_io(p: argparse.ArgumentParser, read: bool = True) -> None:
    if read:
        p.add_argument("--input", default="-", help="input file, '-' for stdin")
    p.add_argument("--output", default="-", help="output file, '-' for stdout")


def _add_gas(p: argparse.ArgumentParser) -> None:
    p.add_argument("--t-bid", type=_positive_float, required=True)
    p.add_argument("--mu-bid", type=_negative_float, required=True)
    p.add_argument("--t-ask", type=_positive_float, required=True)
    p.add_argument("--mu-ask", type=_negative_float, required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lobthermo",
        description="Grand-canonical order book model: curves, clearing, sampling, fits, VAO.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("curve", help="mean occupancy curves of both gases")
    _add_gas(p)
    p.add_argument("--tick", type=_positive_decimal, default=Decimal("0.01"),
                   help="offset step of the grid (default 0.01)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    _add_io(p, read=False)

    p = sub.add_parser("clear", help="clearing price of a book file")
    p.add_argument("--prev-close", type=_positive_decimal, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    _add_io(p)

    p = sub.add_parser("sample", help="synthetic book from gas parameters")
    _add_gas(p)
    p.add_argument("--prev-close", type=_positive_decimal, required=True)
    p.add_argument("--tick", type=_positive_decimal, required=True)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--mean", action="store_true",
                   help="emit the noise-free book of mean occupancies instead")
    _add_io(p, read=False)

    p = sub.add_parser("fit", help="fit one side's gas parameters to a depth CSV")
    p.add_argument("--side", choices=("bid", "ask"), required=True)
    _add_io(p)

    p = sub.add_parser("thermo", help="temperatures and VAO from OHLCV CSV")
    p.add_argument("--vao-window", type=_positive_int, default=10)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--keep-zero-volume", action="store_true",
                   help="treat zero-volume bars as errors instead of null records")
    _add_io(p)
    return parser


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise _Usage(f"cannot read {path}: {exc}") from exc


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise _Usage(f"cannot write {path}: {exc}") from exc


def _num(x) -> str:
    """Stable text for a quantity: integers plainly, floats at 17 digits."""
    if isinstance(x, Decimal):
        return format(x, "f")
    if isinstance(x, int) or (isinstance(x, float) and x.is_integer() and abs(x) < 2**53):
        return str(int(x))
    return format(x, ".17g")


def _gas(args) -> tuple:
    return (
        gibbs.GasParams.bid(args.t_bid, args.mu_bid),
        gibbs.GasParams.ask(args.t_ask, args.mu_ask),
    )


def _cmd_curve(args) -> str:
    bid, ask = _gas(args)
    tick = args.tick
    lo, hi = Decimal(repr(bid.chemical_potential)), Decimal(repr(-ask.chemical_potential))
    first = int((lo / tick).to_integral_value(rounding=ROUND_FLOOR)) + 1
    last = int((hi / tick).to_integral_value(rounding=ROUND_CEILING)) - 1
    offsets = [(k * tick).quantize(tick) for k in range(first, last + 1)]
    rows = gibbs.curve_table([float(o) for o in offsets], bid, ask)
    if args.format == "json":
        items = [
            "  {" + f'"offset": {o}, "bid": {_num(b)}, "ask": {_num(a)}' + "}"
            for o, (_, b, a) in zip(offsets, rows)
        ]
        return "[\n" + ",\n".join(items) + "\n]\n" if items else "[]\n"
    lines = ["offset,bid,ask"]
    lines += [f"{o},{_num(b)},{_num(a)}" for o, (_, b, a) in zip(offsets, rows)]
    return "\n".join(lines) + "\n"


def _cmd_clear(args) -> str:
    snapshot, extras = bk.read_book_json(_read(args.input))
    prev_close = args.prev_close if args.prev_close is not None else extras.get("prev_close")
    result = bk.clearing_price(snapshot, prev_close)
    price = result.price.quantize(snapshot.tick)
    if args.format == "json":
        levels = [
            "    {"
            + f'"price": {lv.price.quantize(snapshot.tick)}, "agg_bid": {_num(lv.agg_bid)}, '
            + f'"agg_ask": {_num(lv.agg_ask)}, "tradeable": {_num(lv.tradeable)}'
            + "}"
            for lv in snapshot.levels
        ]
        return (
            "{\n"
            f'  "price": {price},\n'
            f'  "tradeable": {_num(result.tradeable)},\n'
            '  "levels": [\n' + ",\n".join(levels) + "\n  ]\n}\n"
        )
    return f"price,tradeable\n{price},{_num(result.tradeable)}\n"


def _cmd_sample(args) -> str:
    bid, ask = _gas(args)
    if args.mean:
        snapshot = bk.model_book(bid, ask, args.prev_close, args.tick)
    else:
        snapshot = bk.sample_synthetic_book(bid, ask, args.prev_close, args.tick, args.seed)
    return bk.book_to_json(snapshot)


def _cmd_fit(args) -> str:
    points = cal.read_depth_csv(_read(args.input))
    doc = {"side": args.side}
    try:
        res = cal.fit_gas(points, args.side)
    except ModelRejected as rej:
        doc.update(status=type(rej).__name__, message=str(rej))
        doc.update(rej.fit.as_dict())
    else:
        doc.update(
            status="ok",
            temperature=res.params.temperature,
            chemical_potential=res.params.chemical_potential,
            r_squared=res.r_squared,
            rmse_transformed=res.rmse_transformed,
            points_used=res.points_used,
        )
    return json.dumps(doc, indent=2) + "\n"


def _cmd_thermo(args) -> str:
    cfg = pl.PipelineConfig(vao_window=args.vao_window, skip_zero_volume=not args.keep_zero_volume)
    records = pl.run_pipeline(_read(args.input), cfg)
    return pl.write_output(records, args.format)


_COMMANDS = {
    "curve": _cmd_curve,
    "clear": _cmd_clear,
    "sample": _cmd_sample,
    "fit": _cmd_fit,
    "thermo": _cmd_thermo,
}


def run(argv: list | None = None) -> int:
    """Parse ``argv``, dispatch, and return the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text = _COMMANDS[args.command](args)
        _write(args.output, text)
    except ParseError as exc:
        print(f"lobthermo {args.command}: ParseError: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _Usage as exc:
        parser.print_usage(sys.stderr)
        print(f"lobthermo {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"lobthermo {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
