"""OHLCV bars to per-day temperatures and the VAO indicator.

The bar high and low stand in for the maximum ask and minimum bid prices of
the book, and the interval is one bar.  For bar ``t`` the previous close is
``close[t-1]``; the first bar only seeds that value.

Prices are parsed as ``Decimal`` and volumes as ``int``, which makes the
linearized temperatures, their difference and the VAO rolling sums exact.
The log-based temperatures are floats.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
from collections import deque
from dataclasses import dataclass, field, replace
from decimal import Decimal, Inexact, InvalidOperation, localcontext
from typing import Iterable, Sequence

from .errors import InvariantError, OrderingError, ParseError, TooFewBars, ZeroVolume
from .gibbs import (
    DEGENERATE_ASK,
    DEGENERATE_BID,
    MarketObservables,
    linearized_temperatures,
    temperatures_from_observables,
)

__all__ = [
    "DailyBar",
    "ThermoRecord",
    "PipelineConfig",
    "ZERO_VOLUME",
    "FLAG_ORDER",
    "INPUT_HEADER",
    "OUTPUT_COLUMNS",
    "parse_ohlcv",
    "thermo_series",
    "vao_series",
    "run_pipeline",
    "write_output",
    "read_output_json",
]

ZERO_VOLUME = "ZERO_VOLUME"
FLAG_ORDER = (ZERO_VOLUME, DEGENERATE_BID, DEGENERATE_ASK)
INPUT_HEADER = ["date", "open", "high", "low", "close", "volume"]
OUTPUT_COLUMNS = [
    "date",
    "t_bid",
    "t_ask",
    "delta_t",
    "t_bid_lin",
    "t_ask_lin",
    "delta_t_lin",
    "vao",
    "flags",
]
_FLOAT_FIELDS = ("t_bid", "t_ask", "delta_t")
_EXACT_FIELDS = ("t_bid_lin", "t_ask_lin", "delta_t_lin", "vao")


class _Exact:
    """Decimal context that raises instead of rounding."""

    def __enter__(self):
        self._ctx = localcontext()
        c = self._ctx.__enter__()
        c.prec = 200
        c.traps[Inexact] = True
        return c

    def __exit__(self, *exc):
        return self._ctx.__exit__(*exc)


@dataclass(frozen=True)
class DailyBar:
    date: dt.date
    open: Decimal
    high: Decimal
    low: Decimal
    close: Decimal
    volume: int


@dataclass(frozen=True)
class ThermoRecord:
    date: dt.date
    t_bid: float | None = None
    t_ask: float | None = None
    delta_t: float | None = None
    t_bid_lin: Decimal | None = None
    t_ask_lin: Decimal | None = None
    delta_t_lin: Decimal | None = None
    vao: Decimal | None = None
    flags: frozenset = field(default_factory=frozenset)


@dataclass(frozen=True)
class PipelineConfig:
    vao_window: int = 10
    skip_zero_volume: bool = True

    def __post_init__(self):
        w = self.vao_window
        if isinstance(w, bool) or not isinstance(w, int) or w < 1:
            raise ValueError(f"vao_window must be a positive integer, got {w!r}")


def _price(cell: str, line: int, column: str) -> Decimal:
    try:
        value = Decimal(cell.strip())
    except InvalidOperation:
        raise ParseError(f"not a decimal price: {cell!r}", line=line, column=column) from None
    if not value.is_finite():
        raise ParseError(f"price must be finite: {cell!r}", line=line, column=column)
    return value


def _volume(cell: str, line: int) -> int:
    text = cell.strip()
    if not (text.isascii() and text.isdigit()):
        raise ParseError(
            f"volume must be a non-negative integer: {cell!r}", line=line, column="volume"
        )
    return int(text)


def parse_ohlcv(text: str) -> list:
    """Parse ``date,open,high,low,close,volume`` CSV into ascending bars."""
    if text.startswith("\ufeff"):
        text = text[1:]
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty input; expected header " + ",".join(INPUT_HEADER), line=1)
    if header != INPUT_HEADER:
        raise ParseError(
            f"header must be exactly {','.join(INPUT_HEADER)!r}, got {','.join(header)!r}",
            line=1,
        )
    bars = []
    for row in reader:
        line = reader.line_num
        if not row:
            continue
        if len(row) != len(INPUT_HEADER):
            raise ParseError(f"expected {len(INPUT_HEADER)} fields, got {len(row)}", line=line)
        try:
            date = dt.date.fromisoformat(row[0].strip())
        except ValueError:
            raise ParseError(f"not an ISO date: {row[0]!r}", line=line, column="date") from None
        o, h, lo, c = (_price(row[i], line, INPUT_HEADER[i]) for i in range(1, 5))
        bar = DailyBar(date, o, h, lo, c, _volume(row[5], line))
        _check_bar(bar, line)
        if bars and not bar.date > bars[-1].date:
            kind = "duplicate" if bar.date == bars[-1].date else "out-of-order"
            raise OrderingError(f"{kind} date {bar.date} after {bars[-1].date}", line=line)
        bars.append(bar)
    return bars


def _check_bar(bar: DailyBar, line: int) -> None:
    for name in ("open", "high", "low", "close"):
        if not getattr(bar, name) > 0:
            raise InvariantError(f"{name} must be positive", line=line)
    if not bar.low <= bar.high:
        raise InvariantError(f"high {bar.high} below low {bar.low}", line=line)
    if not bar.low <= bar.open <= bar.high:
        raise InvariantError(f"open {bar.open} outside [{bar.low}, {bar.high}]", line=line)
    if not bar.low <= bar.close <= bar.high:
        raise InvariantError(f"close {bar.close} outside [{bar.low}, {bar.high}]", line=line)


def _record(prev: DailyBar, bar: DailyBar) -> ThermoRecord:
    m = MarketObservables(
        prev_close=prev.close,
        close=bar.close,
        min_bid_price=bar.low,
        max_ask_price=bar.high,
        volume=bar.volume,
    )
    temps = temperatures_from_observables(m)
    with _Exact():
        lin = linearized_temperatures(m)
    return ThermoRecord(
        date=bar.date,
        t_bid=temps.t_bid,
        t_ask=temps.t_ask,
        delta_t=temps.delta,
        t_bid_lin=lin.t_bid,
        t_ask_lin=lin.t_ask,
        delta_t_lin=lin.delta,
        flags=temps.flags,
    )


def thermo_series(bars: Sequence[DailyBar], cfg: PipelineConfig | None = None) -> list:
    """Exact and linearized temperatures for every bar after the first."""
    cfg = cfg or PipelineConfig()
    if len(bars) < 2:
        raise TooFewBars(f"need at least 2 bars, got {len(bars)}")
    records = []
    for prev, bar in zip(bars, bars[1:]):
        if bar.volume == 0:
            if not cfg.skip_zero_volume:
                raise ZeroVolume(f"zero volume on {bar.date}")
            records.append(ThermoRecord(bar.date, flags=frozenset({ZERO_VOLUME})))
            continue
        records.append(_record(prev, bar))
    return records


def vao_series(records: Iterable[ThermoRecord], cfg: PipelineConfig | None = None) -> list:
    """Fill ``vao`` with the rolling sum of ``delta_t_lin`` over the window.

    Null records are skipped by the window and keep a null ``vao``; the value
    stays null until ``cfg.vao_window`` non-null records have been seen.
    """
    cfg = cfg or PipelineConfig()
    window: deque = deque(maxlen=cfg.vao_window)
    out = []
    for rec in records:
        if rec.delta_t_lin is None:
            out.append(replace(rec, vao=None))
            continue
        window.append(rec.delta_t_lin)
        vao = None
        if len(window) == cfg.vao_window:
            with _Exact():
                vao = sum(window, Decimal(0))
        out.append(replace(rec, vao=vao))
    return out


def run_pipeline(text: str, cfg: PipelineConfig | None = None) -> list:
    """Parse, compute temperatures and VAO.  Header-only input yields ``[]``."""
    cfg = cfg or PipelineConfig()
    bars = parse_ohlcv(text)
    if not bars:
        return []
    return vao_series(thermo_series(bars, cfg), cfg)


# -- output -------------------------------------------------------------------


def _fmt_float(x: float) -> str:
    return format(x, ".17g")


def _fmt_exact(d: Decimal) -> str:
    return format(d, "f")


def _flags_text(flags: frozenset) -> str:
    return "|".join(f for f in FLAG_ORDER if f in flags)


def _cells(rec: ThermoRecord) -> list:
    cells = [rec.date.isoformat()]
    for name in _FLOAT_FIELDS:
        v = getattr(rec, name)
        cells.append(None if v is None else _fmt_float(v))
    for name in _EXACT_FIELDS:
        v = getattr(rec, name)
        cells.append(None if v is None else _fmt_exact(v))
    return cells


def write_output(records: Iterable[ThermoRecord], fmt: str = "csv") -> str:
    """Serialize records as CSV or JSON with fixed columns and formatting.

    Floats carry 17 significant digits and exact fields are written in full,
    so both formats round-trip losslessly.  Nulls are empty CSV fields or
    JSON ``null``.
    """
    fmt = fmt.lower()
    if fmt == "csv":
        lines = [",".join(OUTPUT_COLUMNS)]
        for rec in records:
            cells = ["" if c is None else c for c in _cells(rec)]
            lines.append(",".join(cells + [_flags_text(rec.flags)]))
        return "\n".join(lines) + "\n"
    if fmt == "json":
        objs = []
        for rec in records:
            cells = _cells(rec)
            parts = [f'"date": "{cells[0]}"']
            for name, c in zip(OUTPUT_COLUMNS[1:-1], cells[1:]):
                parts.append(f'"{name}": {"null" if c is None else c}')
            flags = [f for f in FLAG_ORDER if f in rec.flags]
            parts.append(f'"flags": {json.dumps(flags)}')
            objs.append("  {" + ", ".join(parts) + "}")
        if not objs:
            return "[]\n"
        return "[\n" + ",\n".join(objs) + "\n]\n"
    raise ValueError(f"unknown output format {fmt!r}")


def read_output_json(text: str) -> list:
    """Inverse of ``write_output(records, "json")``."""
    records = []
    for obj in json.loads(text, parse_float=Decimal, parse_int=Decimal):
        kwargs = {"date": dt.date.fromisoformat(obj["date"])}
        for name in _FLOAT_FIELDS:
            v = obj.get(name)
            kwargs[name] = None if v is None else float(v)
        for name in _EXACT_FIELDS:
            kwargs[name] = obj.get(name)
        kwargs["flags"] = frozenset(obj.get("flags", []))
        records.append(ThermoRecord(**kwargs))
    return records
