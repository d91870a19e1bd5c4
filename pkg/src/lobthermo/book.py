"""Tick-quantized limit order book: aggregation, clearing and synthetic books.

Aggregate depth follows the call-auction convention: the
aggregate bid at price ``p`` counts every bid whose limit is ``>= p`` (buyers
willing to pay at least ``p``) and the aggregate ask counts every ask whose
limit is ``<= p``.  The tradeable quantity at ``p`` is the smaller of the two
and the clearing price maximizes it.

Prices are ``Decimal`` throughout so tick alignment is exact.

Seeded sampling
---------------
``sample_synthetic_book`` and ``sample_depth_draws`` build one
``numpy.random.default_rng(seed)`` (PCG64 seeded through ``SeedSequence``) and
consume it in a fixed order: the bid side first, then the ask side.  For each
side an array of uniforms of shape ``(draws, levels)`` is drawn, followed by
an array of geometric variates of the same shape.  Levels are ordered from
the side's far end inward (bid: descending price, ask: ascending price).
Changing this order changes every golden file.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from decimal import ROUND_CEILING, ROUND_FLOOR, ROUND_HALF_UP, Decimal, InvalidOperation
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import (
    EmptyBook,
    EmptyGrid,
    InvalidOrder,
    NonPositiveTick,
    NoTrade,
    ParseError,
    UnknownLevel,
)
from .gibbs import GasParams, Side, _check_side

__all__ = [
    "LimitOrder",
    "Level",
    "OrderBookSnapshot",
    "ClearingResult",
    "DepthDraws",
    "to_decimal",
    "aggregate_book",
    "tradeable_quantity",
    "clearing_price",
    "synthetic_grid",
    "sample_synthetic_book",
    "sample_depth_draws",
    "model_book",
    "read_book_json",
    "book_to_json",
    "orders_to_json",
]


def to_decimal(value) -> Decimal:
    """Exact decimal for a price; floats go through their shortest repr."""
    if isinstance(value, Decimal):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InvalidOrder(f"price must be finite, got {value!r}")
        return Decimal(repr(value))
    try:
        return Decimal(value)
    except (InvalidOperation, TypeError) as exc:
        raise InvalidOrder(f"not a price: {value!r}") from exc


def _check_tick(tick) -> Decimal:
    tick = to_decimal(tick)
    if not (tick.is_finite() and tick > 0):
        raise NonPositiveTick(f"tick must be positive, got {tick}")
    return tick


def quantize(price, tick) -> Decimal:
    """Round ``price`` to the nearest multiple of ``tick``, halves upward."""
    price = to_decimal(price)
    tick = _check_tick(tick)
    steps = (price / tick).to_integral_value(rounding=ROUND_HALF_UP)
    return _on_grid(steps, tick)


def _on_grid(steps: Decimal, tick: Decimal) -> Decimal:
    return (steps * tick).quantize(tick)


@dataclass(frozen=True)
class LimitOrder:
    side: Side
    limit_price: Decimal
    quantity: int

    def __post_init__(self):
        object.__setattr__(self, "side", Side(self.side))
        object.__setattr__(self, "limit_price", to_decimal(self.limit_price))
        q = self.quantity
        if isinstance(q, bool) or int(q) != q or q <= 0:
            raise InvalidOrder(f"quantity must be a positive integer, got {q!r}")
        object.__setattr__(self, "quantity", int(q))
        if not self.limit_price > 0:
            raise InvalidOrder(f"limit price must be positive, got {self.limit_price}")


@dataclass(frozen=True)
class Level:
    price: Decimal
    bid: float
    ask: float
    agg_bid: float
    agg_ask: float

    @property
    def tradeable(self):
        return min(self.agg_bid, self.agg_ask)


@dataclass(frozen=True)
class OrderBookSnapshot:
    """Immutable tick grid with per-level and aggregate quantities."""

    tick: Decimal
    levels: tuple

    @classmethod
    def from_levels(cls, tick, rows: Iterable[tuple]) -> OrderBookSnapshot:
        """Build from ``(price, bid_at_level, ask_at_level)`` rows."""
        tick = _check_tick(tick)
        rows = sorted(((to_decimal(p), b, a) for p, b, a in rows), key=lambda r: r[0])
        _validate_prices([r[0] for r in rows], tick)
        bids = [r[1] for r in rows]
        asks = [r[2] for r in rows]
        for q in bids + asks:
            if not q >= 0:
                raise InvalidOrder(f"level quantities must be non-negative, got {q!r}")
        agg_bid = _suffix_sums(bids)
        agg_ask = _prefix_sums(asks)
        levels = tuple(
            Level(p, b, a, ab, aa)
            for (p, b, a), ab, aa in zip(rows, agg_bid, agg_ask)
        )
        return cls(tick, levels)

    @classmethod
    def from_aggregates(
        cls, tick, prices: Sequence, agg_bid: Sequence, agg_ask: Sequence
    ) -> OrderBookSnapshot:
        """Build from aggregate depth, keeping the aggregates verbatim.

        ``prices`` must be ascending; aggregates must be monotone in the
        call-auction directions.  Per-level quantities are recovered as differences.
        """
        tick = _check_tick(tick)
        prices = [to_decimal(p) for p in prices]
        _validate_prices(prices, tick)
        agg_bid, agg_ask = list(agg_bid), list(agg_ask)
        if not len(prices) == len(agg_bid) == len(agg_ask):
            raise ValueError("prices and aggregate columns differ in length")
        levels = []
        for i, p in enumerate(prices):
            b_next = agg_bid[i + 1] if i + 1 < len(prices) else 0
            a_prev = agg_ask[i - 1] if i > 0 else 0
            bid, ask = agg_bid[i] - b_next, agg_ask[i] - a_prev
            if bid < 0 or ask < 0:
                raise InvalidOrder(f"aggregates are not monotone at price {p}")
            levels.append(Level(p, bid, ask, agg_bid[i], agg_ask[i]))
        return cls(tick, tuple(levels))

    @property
    def prices(self) -> list:
        return [lv.price for lv in self.levels]

    def level(self, price) -> Level:
        price = to_decimal(price)
        for lv in self.levels:
            if lv.price == price:
                return lv
        raise UnknownLevel(f"no level at price {price}")

    def __len__(self):
        return len(self.levels)


def _validate_prices(prices: list, tick: Decimal) -> None:
    for a, b in zip(prices, prices[1:]):
        if not a < b:
            raise InvalidOrder(f"duplicate price level {b}")
    for p in prices:
        if p % tick != 0:
            raise InvalidOrder(f"price {p} is not a multiple of tick {tick}")


def _suffix_sums(values: list) -> list:
    out, acc = [], 0
    for v in reversed(values):
        acc = acc + v
        out.append(acc)
    return out[::-1]


def _prefix_sums(values: list) -> list:
    out, acc = [], 0
    for v in values:
        acc = acc + v
        out.append(acc)
    return out


def aggregate_book(orders: Iterable[LimitOrder], tick) -> OrderBookSnapshot:
    """Quantize orders to the tick grid and aggregate them per level."""
    tick = _check_tick(tick)
    per_level: dict = {}
    for order in orders:
        price = quantize(order.limit_price, tick)
        if not price > 0:
            raise InvalidOrder(f"limit price {order.limit_price} rounds to {price}")
        bid, ask = per_level.get(price, (0, 0))
        if order.side is Side.BID:
            bid += order.quantity
        else:
            ask += order.quantity
        per_level[price] = (bid, ask)
    if not per_level:
        raise EmptyBook("no orders to aggregate")
    return OrderBookSnapshot.from_levels(tick, ((p, b, a) for p, (b, a) in per_level.items()))


def tradeable_quantity(book: OrderBookSnapshot, price):
    return book.level(price).tradeable


class ClearingResult(NamedTuple):
    price: Decimal
    tradeable: float


def clearing_price(book: OrderBookSnapshot, prev_close=None) -> ClearingResult:
    """Level that maximizes the tradeable quantity.

    Ties go to the level nearest ``prev_close`` and then to the lower price;
    without ``prev_close`` only the lower-price rule applies.
    """
    if not book.levels:
        raise EmptyBook("book has no levels")
    anchor = None if prev_close is None else to_decimal(prev_close)

    def rank(lv: Level):
        distance = 0 if anchor is None else abs(lv.price - anchor)
        return (-lv.tradeable, distance, lv.price)

    best = min(book.levels, key=rank)
    if not best.tradeable > 0:
        raise NoTrade("no level has a positive tradeable quantity")
    return ClearingResult(best.price, best.tradeable)


def synthetic_grid(bid: GasParams, ask: GasParams, prev_close, tick) -> tuple:
    """Tick multiples strictly inside ``(prev_close + mu_b, prev_close - mu_a)``.

    Returns ``(prices, offsets)`` with prices as ``Decimal`` and offsets from
    ``prev_close`` as a float array.
    """
    _check_side(bid, Side.BID)
    _check_side(ask, Side.ASK)
    tick = _check_tick(tick)
    prev = to_decimal(prev_close)
    lo = prev + to_decimal(bid.chemical_potential)
    hi = prev - to_decimal(ask.chemical_potential)
    if hi - lo < tick:
        raise EmptyGrid(f"interval ({lo}, {hi}) is shorter than one tick {tick}")
    first = (lo / tick).to_integral_value(rounding=ROUND_FLOOR) + 1
    last = (hi / tick).to_integral_value(rounding=ROUND_CEILING) - 1
    if last < first:
        raise EmptyGrid(f"no tick multiple inside ({lo}, {hi})")
    prices = [_on_grid(Decimal(k), tick) for k in range(int(first), int(last) + 1)]
    offsets = np.array([float(p - prev) for p in prices])
    return prices, offsets


def _excitations(offsets: np.ndarray, g: GasParams) -> np.ndarray:
    if g.side is Side.BID:
        gap = offsets - g.chemical_potential
    else:
        gap = -g.chemical_potential - offsets
    return gap / g.temperature


def _nested_geometric(x_outward_in: np.ndarray, rng: np.random.Generator, draws: int):
    """Per-level increments whose running sums are geometric at every level.

    ``x_outward_in`` holds excitations ordered from the far end of the side
    (largest x, smallest q) towards the singular point.  With
    ``q_k = exp(-x_k)`` increasing along that order, the increment at level k
    is zero with probability ``c_k = (1 - q_k) / (1 - q_{k-1})`` and otherwise
    a geometric count on ``{1, 2, ...}`` with success probability
    ``1 - q_k``.  Its generating function times that of a geometric law with
    ratio ``q_{k-1}`` gives a geometric law with ratio ``q_k``, so every
    running sum has the exact single-level law while levels stay monotone
    and increments stay independent.
    """
    p = -np.expm1(-x_outward_in)  # 1 - q
    if np.any(p <= 0):
        raise EmptyGrid("grid level coincides with the singular offset")
    p_prev = np.concatenate(([1.0], p[:-1]))
    keep = np.clip(p / p_prev, 0.0, 1.0)  # c_k
    u = rng.random((draws, len(p)))
    g = rng.geometric(p, size=(draws, len(p)))
    return np.where(u < 1.0 - keep, g, 0)


class DepthDraws(NamedTuple):
    prices: list
    offsets: np.ndarray
    bid: np.ndarray  # per-level increments, shape (draws, levels), ascending price
    ask: np.ndarray
    agg_bid: np.ndarray
    agg_ask: np.ndarray


def sample_depth_draws(
    bid: GasParams, ask: GasParams, prev_close, tick, seed: int, draws: int = 1
) -> DepthDraws:
    """``draws`` independent synthetic books on the same grid, as arrays.

    Columns follow ascending price.  Each aggregate column has the exact
    geometric law of its level; the two sides are independent.
    """
    prices, offsets = synthetic_grid(bid, ask, prev_close, tick)
    rng = np.random.default_rng(seed)
    # bid aggregates accumulate from the top price downward
    bid_inc = _nested_geometric(_excitations(offsets, bid)[::-1], rng, draws)[:, ::-1]
    ask_inc = _nested_geometric(_excitations(offsets, ask), rng, draws)
    agg_bid = np.cumsum(bid_inc[:, ::-1], axis=1)[:, ::-1]
    agg_ask = np.cumsum(ask_inc, axis=1)
    return DepthDraws(prices, offsets, bid_inc, ask_inc, agg_bid, agg_ask)


def sample_synthetic_book(
    bid: GasParams, ask: GasParams, prev_close, tick, seed: int
) -> OrderBookSnapshot:
    """One seeded book with integer share quantities drawn from the gas model."""
    d = sample_depth_draws(bid, ask, prev_close, tick, seed, draws=1)
    rows = zip(d.prices, (int(v) for v in d.bid[0]), (int(v) for v in d.ask[0]))
    return OrderBookSnapshot.from_levels(tick, rows)


def model_book(bid: GasParams, ask: GasParams, prev_close, tick) -> OrderBookSnapshot:
    """Noise-free book whose aggregates are the mean occupancies."""
    prices, offsets = synthetic_grid(bid, ask, prev_close, tick)
    agg_bid = 1.0 / np.expm1(_excitations(offsets, bid))
    agg_ask = 1.0 / np.expm1(_excitations(offsets, ask))
    return OrderBookSnapshot.from_aggregates(
        tick, prices, [float(v) for v in agg_bid], [float(v) for v in agg_ask]
    )


# -- JSON book files ---------------------------------------------------------


def _plain(value):
    """JSON scalar for a quantity: ints stay ints, everything else is float."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return int(value)
    f = float(value)
    return int(f) if f.is_integer() and abs(f) < 2**53 else f


def book_to_json(book: OrderBookSnapshot) -> str:
    """Aggregated form: ``{"tick": .., "levels": [{"price", "bid", "ask"}]}``.

    ``bid`` and ``ask`` are the quantities resting at that exact level.
    """
    doc = {
        "tick": float(book.tick),
        "levels": [
            {"price": float(lv.price), "bid": _plain(lv.bid), "ask": _plain(lv.ask)}
            for lv in book.levels
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def orders_to_json(orders: Iterable[LimitOrder], tick) -> str:
    doc = {
        "tick": float(to_decimal(tick)),
        "orders": [
            {"side": o.side.value, "price": float(o.limit_price), "qty": o.quantity}
            for o in orders
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def _quantity(value, where: str):
    if isinstance(value, bool) or not isinstance(value, (int, Decimal)):
        raise ParseError(f"{where}: quantity must be a number, got {value!r}")
    if isinstance(value, Decimal):
        if not value.is_finite():
            raise ParseError(f"{where}: quantity must be finite")
        return int(value) if value == value.to_integral_value() else float(value)
    return value


def read_book_json(text: str) -> tuple:
    """Parse either book file form.

    Returns ``(snapshot, extras)`` where ``extras`` carries optional top-level
    keys such as ``prev_close`` (as ``Decimal``).
    """
    try:
        doc = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(doc, dict) or "tick" not in doc:
        raise ParseError("book file must be an object with a 'tick' key")
    tick = doc["tick"]
    if isinstance(tick, bool) or not isinstance(tick, (int, Decimal)):
        raise ParseError("'tick' must be a number", column="tick")
    extras = {}
    if "prev_close" in doc:
        extras["prev_close"] = to_decimal(doc["prev_close"])
    if "orders" in doc:
        orders = []
        for i, item in enumerate(doc["orders"]):
            where = f"orders[{i}]"
            try:
                side, price, qty = item["side"], item["price"], item["qty"]
            except (KeyError, TypeError) as exc:
                raise ParseError(f"{where}: expected side/price/qty ({exc})") from exc
            if side not in ("bid", "ask"):
                raise ParseError(f"{where}: side must be 'bid' or 'ask', got {side!r}")
            qty = _quantity(qty, where)
            orders.append(LimitOrder(Side(side), to_decimal(price), qty))
        return aggregate_book(orders, tick), extras
    if "levels" in doc:
        rows = []
        for i, item in enumerate(doc["levels"]):
            where = f"levels[{i}]"
            try:
                rows.append(
                    (
                        to_decimal(item["price"]),
                        _quantity(item["bid"], where),
                        _quantity(item["ask"], where),
                    )
                )
            except (KeyError, TypeError) as exc:
                raise ParseError(f"{where}: expected price/bid/ask ({exc})") from exc
        if not rows:
            raise EmptyBook("book file has no levels")
        return OrderBookSnapshot.from_levels(tick, rows), extras
    raise ParseError("book file needs an 'orders' or 'levels' array")
