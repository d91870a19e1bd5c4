"""Fit gas parameters to observed aggregate depth.

Inverting the occupancy law gives an exact straight line.  For mean depth
``n`` at offset ``eps``::

    y = ln(1 + 1/n) = (eps - mu_b) / T_b          (bid)
    y = ln(1 + 1/n) = (-eps - mu_a) / T_a         (ask)

so ordinary least squares of ``y`` on ``eps`` (bid) or ``-eps`` (ask) returns
``1/T`` as the slope and ``-mu/T`` as the intercept.  A non-positive slope or
a non-negative chemical potential means the data contradict the model; those
outcomes raise a :class:`~lobthermo.errors.ModelRejected` subclass carrying
the regression diagnostics, so callers can report them as results.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import (
    InsufficientData,
    NonPositiveQuantity,
    ParseError,
    WrongInterceptSign,
    WrongSlopeSign,
)
from .gibbs import GasParams, Side

__all__ = [
    "DepthPoint",
    "LineFit",
    "FitResult",
    "linearize_depth",
    "fit_gas",
    "goodness_of_fit",
    "read_depth_csv",
    "depth_to_csv",
]


class DepthPoint(NamedTuple):
    price_offset: float
    mean_quantity: float


@dataclass(frozen=True)
class LineFit:
    """Raw OLS diagnostics in transformed space."""

    slope: float
    intercept: float
    r_squared: float
    rmse_transformed: float
    points_used: int

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "rmse_transformed": self.rmse_transformed,
            "points_used": self.points_used,
        }


@dataclass(frozen=True)
class FitResult:
    params: GasParams
    r_squared: float
    rmse_transformed: float
    points_used: int


def linearize_depth(points: Iterable) -> list:
    """Pairs ``(eps, ln(1 + 1/n))``; exact inverse of the occupancy law."""
    out = []
    for i, (eps, n) in enumerate(points):
        if not n > 0:
            raise NonPositiveQuantity(
                f"point {i} (offset {eps!r}) has non-positive quantity {n!r}", index=i
            )
        out.append((eps, math.log1p(1.0 / n)))
    return out


def _regressor(side: Side, eps: np.ndarray) -> np.ndarray:
    return eps if side is Side.BID else -eps


def _r2_rmse(y: np.ndarray, y_hat: np.ndarray) -> tuple:
    resid = y - y_hat
    ss_res = float(np.dot(resid, resid))
    centred = y - y.mean()
    ss_tot = float(np.dot(centred, centred))
    if ss_tot == 0.0:
        # constant y: no variance to explain (same convention as scikit-learn)
        r2 = 1.0 if ss_res == 0.0 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return r2, math.sqrt(ss_res / len(y))


def _usable(points: Iterable) -> list:
    """Drop zero-quantity points; reject negative ones."""
    kept = []
    for i, (eps, n) in enumerate(points):
        if n == 0:
            continue
        if not n > 0:
            raise NonPositiveQuantity(
                f"point {i} (offset {eps!r}) has negative quantity {n!r}", index=i
            )
        kept.append(DepthPoint(float(eps), float(n)))
    return kept


def fit_gas(points: Sequence, side) -> FitResult:
    """Estimate ``(T, mu)`` for one side from mean aggregate depth.

    Zero-quantity points are skipped (``points_used`` reflects the rest).

    Raises
    ------
    InsufficientData
        Fewer than two distinct offsets with positive depth.
    WrongSlopeSign
        Depth grows away from the singular point instead of decaying.
    WrongInterceptSign
        The fitted line implies a non-negative chemical potential.
    """
    side = Side(side)
    pts = _usable(points)
    if len({p.price_offset for p in pts}) < 2:
        raise InsufficientData(
            f"need at least two distinct offsets with positive depth, got {len(pts)} point(s)"
        )
    lin = np.array(linearize_depth(pts))
    x = _regressor(side, lin[:, 0])
    y = lin[:, 1]
    x_mean, y_mean = x.mean(), y.mean()
    dx = x - x_mean
    slope = float(np.dot(dx, y - y_mean) / np.dot(dx, dx))
    intercept = float(y_mean - slope * x_mean)
    r2, rmse = _r2_rmse(y, intercept + slope * x)
    diag = LineFit(slope, intercept, r2, rmse, len(pts))
    if not slope > 0:
        raise WrongSlopeSign(
            f"fitted slope {slope:.6g} is not positive: depth does not decay "
            f"away from the {side.value} singular point",
            fit=diag,
        )
    temperature = 1.0 / slope
    mu = -intercept * temperature
    if not mu < 0:
        raise WrongInterceptSign(
            f"fitted chemical potential {mu:.6g} is not negative", fit=diag
        )
    return FitResult(GasParams(temperature, mu, side), r2, rmse, len(pts))


def goodness_of_fit(params: GasParams, points: Sequence) -> tuple:
    """``(r_squared, rmse)`` of ``points`` against the line implied by ``params``.

    R² may be negative when the line explains the data worse than its mean.
    """
    pts = _usable(points)
    if len(pts) < 2:
        raise InsufficientData("need at least two points with positive depth")
    lin = np.array(linearize_depth(pts))
    x = _regressor(params.side, lin[:, 0])
    y_hat = (x - params.chemical_potential) / params.temperature
    return _r2_rmse(lin[:, 1], y_hat)


DEPTH_HEADER = ["offset", "quantity"]


def read_depth_csv(text: str) -> list:
    """Parse a one-sided depth file with header ``offset,quantity``."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty depth file; expected header 'offset,quantity'", line=1)
    if [h.strip() for h in header] != DEPTH_HEADER:
        raise ParseError(f"header must be 'offset,quantity', got {','.join(header)!r}", line=1)
    points = []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise ParseError(f"expected 2 fields, got {len(row)}", line=line)
        values = []
        for name, cell in zip(DEPTH_HEADER, row):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"not a number: {cell!r}", line=line, column=name) from None
            if not math.isfinite(v):
                raise ParseError(f"not a finite number: {cell!r}", line=line, column=name)
            values.append(v)
        points.append(DepthPoint(*values))
    return points


def depth_to_csv(points: Iterable) -> str:
    lines = [",".join(DEPTH_HEADER)]
    lines += [f"{eps!r},{n!r}" for eps, n in points]
    return "\n".join(lines) + "\n"
