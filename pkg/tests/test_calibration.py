import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lobthermo.book import sample_depth_draws
from lobthermo.calibration import (
    DepthPoint,
    depth_to_csv,
    fit_gas,
    goodness_of_fit,
    linearize_depth,
    read_depth_csv,
)
from lobthermo.errors import (
    InsufficientData,
    NonPositiveQuantity,
    ParseError,
    WrongInterceptSign,
    WrongSlopeSign,
)
from lobthermo.gibbs import GasParams, Side, mean_ask_occupancy, mean_bid_occupancy


def bid_depth(t, mu, offsets):
    g = GasParams.bid(t, mu)
    return [DepthPoint(e, mean_bid_occupancy(e, g)) for e in offsets]


def ask_depth(t, mu, offsets):
    g = GasParams.ask(t, mu)
    return [DepthPoint(e, mean_ask_occupancy(e, g)) for e in offsets]


class TestLinearize:
    def test_unit(self):
        assert linearize_depth([(0.0, 1.0)]) == [(0.0, pytest.approx(math.log(2), rel=1e-15))]

    def test_large_depth(self):
        ys = [y for _, y in linearize_depth([(0, 1e3), (0, 1e6), (0, 1e12)])]
        assert ys == sorted(ys, reverse=True) and 0 < ys[-1] < 1e-11

    def test_round_trip(self):
        g = GasParams.bid(2.0, -4.0)
        for e in (-3.9, -2.0, 0.0, 5.0):
            (_, y), = linearize_depth([(e, mean_bid_occupancy(e, g))])
            assert y == pytest.approx((e + 4.0) / 2.0, abs=1e-12)

    def test_zero_curvature(self):
        g = GasParams.ask(0.7, -1.2)
        grid = np.linspace(-3, 1.1, 41)
        ys = np.array([y for _, y in linearize_depth(ask_depth(0.7, -1.2, grid))])
        assert np.max(np.abs(np.diff(ys, 2))) < 1e-10
        assert g.side is Side.ASK

    def test_rejects_non_positive(self):
        with pytest.raises(NonPositiveQuantity) as exc:
            linearize_depth([(0, 1.0), (1, 0.0)])
        assert exc.value.index == 1


class TestFit:
    def test_worked_bid(self):
        res = fit_gas(bid_depth(2.0, -4.0, [-3, -2, -1, 0, 1]), "bid")
        assert res.params.side is Side.BID
        assert res.params.temperature == pytest.approx(2.0, rel=1e-9)
        assert res.params.chemical_potential == pytest.approx(-4.0, rel=1e-9)
        assert res.r_squared == pytest.approx(1.0, abs=1e-12)
        assert res.rmse_transformed < 1e-12
        assert res.points_used == 5

    def test_worked_ask(self):
        res = fit_gas(ask_depth(3.0, -5.0, [-3, -2, -1, 0, 1]), Side.ASK)
        assert res.params.temperature == pytest.approx(3.0, rel=1e-9)
        assert res.params.chemical_potential == pytest.approx(-5.0, rel=1e-9)

    @given(
        t=st.floats(0.1, 100), mu=st.floats(-50, -0.1),
        side=st.sampled_from([Side.BID, Side.ASK]),
    )
    def test_round_trip(self, t, mu, side):
        offsets_from_singular = t * np.array([0.2, 0.7, 1.3, 2.1, 3.0])
        if side is Side.BID:
            pts = bid_depth(t, mu, mu + offsets_from_singular)
        else:
            pts = ask_depth(t, mu, -mu - offsets_from_singular)
        res = fit_gas(pts, side)
        assert res.params.temperature == pytest.approx(t, rel=1e-9)
        assert res.params.chemical_potential == pytest.approx(mu, rel=1e-9)

    def test_single_offset(self):
        with pytest.raises(InsufficientData):
            fit_gas([DepthPoint(0.0, 1.0), DepthPoint(0.0, 2.0)], "bid")
        with pytest.raises(InsufficientData):
            fit_gas([DepthPoint(0.0, 1.0)], "bid")

    def test_ask_shape_fed_as_bid(self):
        pts = ask_depth(1.0, -2.0, [-1.5, -1.0, -0.5, 0.0, 0.5])
        with pytest.raises(WrongSlopeSign) as exc:
            fit_gas(pts, "bid")
        assert exc.value.fit.slope < 0
        assert exc.value.fit.points_used == 5

    def test_positive_potential_rejected(self):
        # decaying depth whose divergence sits above the previous close
        pts = [DepthPoint(e, 1 / math.expm1(e - 0.5)) for e in (1.0, 1.5, 2.0)]
        with pytest.raises(WrongInterceptSign):
            fit_gas(pts, "bid")

    def test_zero_points_skipped(self):
        pts = bid_depth(2.0, -4.0, [-3, -2, -1]) + [DepthPoint(40.0, 0.0)]
        res = fit_gas(pts, "bid")
        assert res.points_used == 3
        assert res.params.temperature == pytest.approx(2.0, rel=1e-9)

    def test_negative_point_rejected(self):
        with pytest.raises(NonPositiveQuantity):
            fit_gas(bid_depth(2.0, -4.0, [-3, -2]) + [DepthPoint(0.0, -1.0)], "bid")

    def test_scale_changes_fit(self):
        pts = bid_depth(2.0, -4.0, [-3, -2, -1, 0, 1])
        scaled = [DepthPoint(e, 10 * n) for e, n in pts]
        res = fit_gas(scaled, "bid")
        assert res.params.temperature != pytest.approx(2.0, rel=1e-3)
        assert res.r_squared < 1.0


class TestGoodness:
    def test_exact(self):
        g = GasParams.bid(2.0, -4.0)
        r2, rmse = goodness_of_fit(g, bid_depth(2.0, -4.0, [-3, -2, -1]))
        assert r2 == pytest.approx(1.0, abs=1e-12) and rmse < 1e-12

    def test_constant_y(self):
        pts = [DepthPoint(e, 1.0) for e in (-1.0, 0.0, 1.0)]
        r2, rmse = goodness_of_fit(GasParams.bid(1.0, -1.0), pts)
        assert r2 <= 0 and rmse > 0

    def test_worse_than_mean_is_negative(self):
        pts = bid_depth(2.0, -4.0, [-3, -2, -1])
        r2, _ = goodness_of_fit(GasParams.bid(0.5, -1.0), pts)
        assert r2 < 0

    def test_insufficient(self):
        with pytest.raises(InsufficientData):
            goodness_of_fit(GasParams.bid(1, -1), [DepthPoint(0, 1)])

    def test_monte_carlo_book(self):
        g_b, g_a = GasParams.bid(1.0, -1.0), GasParams.ask(1.0, -1.0)
        d = sample_depth_draws(g_b, g_a, "100", "0.1", seed=42, draws=100_000)
        means = d.agg_bid.mean(axis=0)
        pts = [DepthPoint(float(e), float(n)) for e, n in zip(d.offsets, means)]
        res = fit_gas(pts, "bid")
        assert res.r_squared >= 0.99
        assert goodness_of_fit(g_b, pts)[0] >= 0.99
        assert res.params.temperature == pytest.approx(1.0, rel=0.05)


class TestDepthCsv:
    def test_round_trip(self):
        pts = bid_depth(2.0, -4.0, [-3.5, 0.25])
        assert read_depth_csv(depth_to_csv(pts)) == pts

    def test_crlf_and_blank(self):
        assert read_depth_csv("offset,quantity\r\n-1,2.5\r\n\r\n") == [DepthPoint(-1.0, 2.5)]

    @pytest.mark.parametrize(
        "text,line",
        [("", 1), ("price,qty\n", 1), ("offset,quantity\n1,x\n", 2), ("offset,quantity\n1\n", 2),
         ("offset,quantity\n1,2\nnan,3\n", 3), ("offset,quantity\n1,1e999\n", 2)],
    )
    def test_errors(self, text, line):
        with pytest.raises(ParseError) as exc:
            read_depth_csv(text)
        assert exc.value.line == line
