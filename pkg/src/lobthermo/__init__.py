"""Grand-canonical ensemble model of the limit order book."""

from .book import (
    LimitOrder,
    OrderBookSnapshot,
    aggregate_book,
    clearing_price,
    model_book,
    sample_synthetic_book,
    tradeable_quantity,
)
from .calibration import DepthPoint, FitResult, fit_gas, goodness_of_fit, linearize_depth
from .gibbs import (
    GasParams,
    MarketObservables,
    Side,
    equilibrium_point,
    grand_potential,
    level_occupation_probability,
    linearized_temperatures,
    mean_ask_occupancy,
    mean_bid_occupancy,
    occupancy_curve,
    temperature_difference,
    temperatures_from_observables,
)
from .pipeline import PipelineConfig, parse_ohlcv, thermo_series, vao_series, write_output

__version__ = "0.1.0"

__all__ = [
    "aggregate_book",
    "clearing_price",
    "DepthPoint",
    "equilibrium_point",
    "fit_gas",
    "FitResult",
    "GasParams",
    "goodness_of_fit",
    "grand_potential",
    "level_occupation_probability",
    "LimitOrder",
    "linearize_depth",
    "linearized_temperatures",
    "MarketObservables",
    "mean_ask_occupancy",
    "mean_bid_occupancy",
    "model_book",
    "occupancy_curve",
    "OrderBookSnapshot",
    "parse_ohlcv",
    "PipelineConfig",
    "sample_synthetic_book",
    "Side",
    "temperature_difference",
    "temperatures_from_observables",
    "thermo_series",
    "tradeable_quantity",
    "vao_series",
    "write_output",
]
