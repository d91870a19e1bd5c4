"""Regenerate the bundled 250-bar synthetic OHLCV file.

    python3 scripts/make_synthetic_ohlcv.py > src/lobthermo/data/synthetic_ohlcv_250.csv

A geometric random walk on a 0.01 grid over business days.  Bar 40 has zero
volume and bars 60 and 61 close on their low and high, so every output flag
appears at least once.
"""

import datetime as dt
import sys
from decimal import Decimal

import numpy as np

N_BARS = 250
SEED = 20141101


def business_days(start: dt.date, n: int):
    d = start
    while n:
        if d.weekday() < 5:
            yield d
            n -= 1
        d += dt.timedelta(days=1)


def cents(x: float) -> Decimal:
    return Decimal(int(round(x * 100))) / 100


def main() -> None:
    rng = np.random.default_rng(SEED)
    out = sys.stdout
    out.write("date,open,high,low,close,volume\n")
    close = 16.50
    for i, day in enumerate(business_days(dt.date(2014, 11, 3), N_BARS)):
        open_ = close * np.exp(rng.normal(0, 0.005))
        new_close = open_ * np.exp(rng.normal(0, 0.012))
        hi = max(open_, new_close) * np.exp(abs(rng.normal(0, 0.006)))
        lo = min(open_, new_close) * np.exp(-abs(rng.normal(0, 0.006)))
        volume = int(rng.lognormal(np.log(2.0e7), 0.35))
        o, h, l, c = cents(open_), cents(hi), cents(lo), cents(new_close)
        h = max(h, o, c)
        l = min(l, o, c)
        if i == 40:
            volume = 0
        if i == 60:
            c = l
        if i == 61:
            c = h
        out.write(f"{day.isoformat()},{o},{h},{l},{c},{volume}\n")
        close = float(c)


if __name__ == "__main__":
    main()
