"""Grand-canonical occupancy laws for the bid and ask order gases.

Price offsets ``eps`` are measured from the previous closing price.  Each side
is a Bose-like gas with temperature ``T`` and negative chemical potential
``mu``; Boltzmann's constant is 1 so both carry price units.

The bid gas diverges at ``eps = mu_bid`` and decays towards higher prices.
The ask gas has its energy axis reversed: it diverges at ``eps = -mu_ask`` and
decays towards lower prices.  Everything below is written in terms of the
*excitation* ``x`` of a level, the positive distance from the singular point
in units of temperature::

    bid:  x = (eps - mu_bid) / T_bid
    ask:  x = (-mu_ask - eps) / T_ask

so that the mean occupancy is ``1 / (exp(x) - 1)`` on both sides.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .errors import (
    Divergence,
    InvalidObservables,
    InvalidParameter,
    NoIntersection,
    OutOfDomain,
    ZeroVolume,
)

__all__ = [
    "Side",
    "GasParams",
    "EquilibriumPoint",
    "MarketObservables",
    "Temperatures",
    "LinearizedTemperatures",
    "Curve",
    "excitation",
    "mean_bid_occupancy",
    "mean_ask_occupancy",
    "mean_occupancy",
    "level_occupation_probability",
    "grand_potential",
    "equilibrium_point",
    "observables_from_equilibrium",
    "temperatures_from_observables",
    "temperature_difference",
    "linearized_temperatures",
    "occupancy_curve",
]

DEGENERATE_BID = "DEGENERATE_BID"
DEGENERATE_ASK = "DEGENERATE_ASK"


class Side(str, enum.Enum):
    BID = "bid"
    ASK = "ask"


@dataclass(frozen=True)
class GasParams:
    """Temperature and chemical potential of one side of the book."""

    temperature: float
    chemical_potential: float
    side: Side

    def __post_init__(self):
        object.__setattr__(self, "side", Side(self.side))
        t, mu = self.temperature, self.chemical_potential
        if not (math.isfinite(t) and t > 0):
            raise InvalidParameter(f"temperature must be positive and finite, got {t!r}")
        if not (math.isfinite(mu) and mu < 0):
            raise InvalidParameter(
                f"chemical potential must be negative and finite, got {mu!r}"
            )

    @classmethod
    def bid(cls, temperature: float, chemical_potential: float) -> GasParams:
        return cls(temperature, chemical_potential, Side.BID)

    @classmethod
    def ask(cls, temperature: float, chemical_potential: float) -> GasParams:
        return cls(temperature, chemical_potential, Side.ASK)

    @property
    def singular_offset(self) -> float:
        """Offset where the mean occupancy diverges."""
        if self.side is Side.BID:
            return self.chemical_potential
        return -self.chemical_potential


class EquilibriumPoint(NamedTuple):
    price_offset: float
    volume: float


def excitation(eps: float, g: GasParams) -> float:
    """Distance of ``eps`` from the singular offset of ``g``, in units of T.

    Raises
    ------
    Divergence
        ``eps`` sits exactly on the singular offset.
    OutOfDomain
        ``eps`` is on the wrong side of the singular offset.
    """
    if g.side is Side.BID:
        gap = eps - g.chemical_potential
    else:
        gap = -g.chemical_potential - eps
    if gap == 0:
        raise Divergence(f"occupancy of the {g.side.value} gas diverges at eps={eps!r}")
    if not gap > 0:
        raise OutOfDomain(
            f"eps={eps!r} is outside the {g.side.value} domain "
            f"(singular offset {g.singular_offset!r})"
        )
    return gap / g.temperature


def _check_side(g: GasParams, side: Side) -> None:
    if g.side is not side:
        raise InvalidParameter(f"expected {side.value} gas parameters, got {g.side.value}")


def mean_occupancy(eps: float, g: GasParams) -> float:
    """Mean aggregate quantity at offset ``eps`` for either side."""
    return 1.0 / math.expm1(excitation(eps, g))


def mean_bid_occupancy(eps: float, g: GasParams) -> float:
    """Mean aggregate bid quantity, ``1 / (exp((eps - mu_b) / T_b) - 1)``.

    Strictly decreasing in ``eps`` and unbounded as ``eps`` approaches
    ``mu_b`` from above.
    """
    _check_side(g, Side.BID)
    return mean_occupancy(eps, g)


def mean_ask_occupancy(eps: float, g: GasParams) -> float:
    """Mean aggregate ask quantity, ``1 / (exp((-mu_a - eps) / T_a) - 1)``.

    Strictly increasing in ``eps`` and unbounded as ``eps`` approaches
    ``-mu_a`` from below.
    """
    _check_side(g, Side.ASK)
    return mean_occupancy(eps, g)


def level_occupation_probability(n: int, eps: float, g: GasParams) -> float:
    """Probability of exactly ``n`` aggregate shares at offset ``eps``.

    The grand-canonical weight of a single level is geometric,
    ``(1 - q) * q**n`` with ``q = exp(-x)``.
    """
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise ValueError(f"n must be a non-negative integer, got {n!r}")
    x = excitation(eps, g)
    return -math.expm1(-x) * math.exp(-int(n) * x)


def grand_potential(eps: float, g: GasParams) -> float:
    """Per-level grand potential ``T * ln(1 - exp(-x))``; always negative.

    Its negative derivative with respect to the chemical potential is the
    mean occupancy.
    """
    x = excitation(eps, g)
    return g.temperature * math.log(-math.expm1(-x))


def equilibrium_point(bid: GasParams, ask: GasParams) -> EquilibriumPoint:
    """Intersection of the bid and ask occupancy curves.

    Equating the two excitations gives::

        eps_bar = (T_a * mu_b - T_b * mu_a) / (T_a + T_b)
        n_bar   = 1 / (exp(-(mu_a + mu_b) / (T_a + T_b)) - 1)
    """
    _check_side(bid, Side.BID)
    _check_side(ask, Side.ASK)
    t_b, mu_b = bid.temperature, bid.chemical_potential
    t_a, mu_a = ask.temperature, ask.chemical_potential
    if not mu_b < -mu_a:
        raise NoIntersection(f"bid domain ({mu_b}, inf) and ask domain (-inf, {-mu_a}) are disjoint")
    t_sum = t_a + t_b
    eps_bar = (t_a * mu_b - t_b * mu_a) / t_sum
    n_bar = 1.0 / math.expm1(-(mu_a + mu_b) / t_sum)
    return EquilibriumPoint(eps_bar, n_bar)


@dataclass(frozen=True)
class MarketObservables:
    """What one interval of trading reveals about the two gases.

    Only ``min_bid_price <= close <= max_ask_price`` and a non-negative volume
    are enforced on construction.  The strict bracketing of ``prev_close``
    (equivalent to both chemical potentials being negative) is checked only
    by the properties that need it, because daily high/low proxies routinely
    gap past the previous close and the temperatures do not depend on it.
    """

    prev_close: float
    close: float
    min_bid_price: float
    max_ask_price: float
    volume: float

    def __post_init__(self):
        if not self.min_bid_price <= self.close <= self.max_ask_price:
            raise InvalidObservables(
                f"close {self.close} outside [{self.min_bid_price}, {self.max_ask_price}]"
            )
        if not self.volume >= 0:
            raise InvalidObservables(f"volume must be non-negative, got {self.volume!r}")

    @property
    def closing_offset(self):
        return self.close - self.prev_close

    @property
    def bid_chemical_potential(self):
        mu = self.min_bid_price - self.prev_close
        if not mu < 0:
            raise OutOfDomain("minimum bid price must lie below the previous close")
        return mu

    @property
    def ask_chemical_potential(self):
        mu = self.prev_close - self.max_ask_price
        if not mu < 0:
            raise OutOfDomain("maximum ask price must lie above the previous close")
        return mu


def observables_from_equilibrium(
    bid: GasParams, ask: GasParams, prev_close: float = 0.0
) -> MarketObservables:
    """Observables the model predicts for one interval starting at ``prev_close``."""
    eq = equilibrium_point(bid, ask)
    return MarketObservables(
        prev_close=prev_close,
        close=prev_close + eq.price_offset,
        min_bid_price=prev_close + bid.chemical_potential,
        max_ask_price=prev_close - ask.chemical_potential,
        volume=eq.volume,
    )


@dataclass(frozen=True)
class Temperatures:
    t_bid: float
    t_ask: float
    flags: frozenset = field(default_factory=frozenset)

    def __iter__(self):
        return iter((self.t_bid, self.t_ask))

    @property
    def delta(self) -> float:
        return self.t_ask - self.t_bid


def _log_volume_factor(volume) -> float:
    if volume == 0:
        raise ZeroVolume("temperatures are undefined for zero traded volume")
    return math.log1p(1.0 / float(volume))


def temperatures_from_observables(m: MarketObservables) -> Temperatures:
    """Bid and ask temperatures implied by one interval.

    With ``L = ln(1 + 1/volume)``::

        T_bid = (close - min_bid_price) / L
        T_ask = (max_ask_price - close) / L

    A close sitting on a bound yields a zero temperature and a
    ``DEGENERATE_BID`` / ``DEGENERATE_ASK`` flag instead of an error.
    """
    log_factor = _log_volume_factor(m.volume)
    bid_gap = m.close - m.min_bid_price
    ask_gap = m.max_ask_price - m.close
    flags = set()
    if bid_gap == 0:
        flags.add(DEGENERATE_BID)
    if ask_gap == 0:
        flags.add(DEGENERATE_ASK)
    return Temperatures(
        float(bid_gap) / log_factor, float(ask_gap) / log_factor, frozenset(flags)
    )


def temperature_difference(m: MarketObservables) -> float:
    """``T_ask - T_bid``, i.e. ``2 * (midrange - close) / ln(1 + 1/volume)``.

    Computed as the difference of the two temperatures so the identity with
    :func:`temperatures_from_observables` is exact.
    """
    return temperatures_from_observables(m).delta


class LinearizedTemperatures(NamedTuple):
    t_bid: object
    t_ask: object
    delta: object


def linearized_temperatures(m: MarketObservables) -> LinearizedTemperatures:
    """First-order temperatures for large volume, ``ln(1 + 1/n) ~ 1/n``.

    Arithmetic follows the input types, so ``Decimal`` prices with an integer
    volume give exact results.
    """
    if m.volume == 0:
        raise ZeroVolume("temperatures are undefined for zero traded volume")
    t_bid = m.volume * (m.close - m.min_bid_price)
    t_ask = m.volume * (m.max_ask_price - m.close)
    return LinearizedTemperatures(t_bid, t_ask, t_ask - t_bid)


class Curve(NamedTuple):
    points: list
    omitted: int


def occupancy_curve(grid: Iterable[float], g: GasParams) -> Curve:
    """Mean occupancy over ``grid``; offsets outside the open domain are dropped."""
    points = []
    omitted = 0
    for eps in grid:
        try:
            points.append((eps, mean_occupancy(eps, g)))
        except (OutOfDomain, Divergence):
            omitted += 1
    return Curve(points, omitted)


def curve_table(grid: Sequence[float], bid: GasParams, ask: GasParams) -> list:
    """Rows of ``(eps, bid occupancy or None, ask occupancy or None)``."""
    rows = []
    for eps in grid:
        row = [eps]
        for g in (bid, ask):
            try:
                row.append(mean_occupancy(eps, g))
            except (OutOfDomain, Divergence):
                row.append(None)
        rows.append(tuple(row))
    return rows
