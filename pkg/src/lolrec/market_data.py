"""Price history ingestion and conversion to price relatives."""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np


class DataError(ValueError):
    """Raised when an input file violates the expected layout or value domain."""


@dataclass(frozen=True)
class PriceTable:
    dates: list[dt.date]
    tickers: list[str]
    prices: np.ndarray  # n x d, strictly positive

    @property
    def n(self) -> int:
        return self.prices.shape[0]

    @property
    def d(self) -> int:
        return self.prices.shape[1]


@dataclass(frozen=True)
class MarketMatrix:
    """Grid of price relatives, one row per trading period.

    ``dates[i]`` is the date at the end of period ``i``; ``start_date`` is the
    date the first period opens on (``None`` when loaded from a relatives file).
    """

    relatives: np.ndarray  # n x d, entries >= 0
    tickers: list[str]
    dates: list[Optional[dt.date]]
    start_date: Optional[dt.date] = None

    @property
    def n(self) -> int:
        return self.relatives.shape[0]

    @property
    def d(self) -> int:
        return self.relatives.shape[1]

    def __post_init__(self):
        rel = self.relatives
        if rel.ndim != 2:
            raise DataError(f"relatives must be 2-dimensional, got shape {rel.shape}")
        if rel.shape[1] != len(self.tickers):
            raise DataError("number of tickers does not match relatives columns")
        if len(self.dates) != rel.shape[0]:
            raise DataError("number of dates does not match relatives rows")
        if not np.all(np.isfinite(rel)) or np.any(rel < 0):
            raise DataError("price relatives must be finite and non-negative")

    @classmethod
    def from_array(cls, relatives, tickers: Optional[Sequence[str]] = None) -> "MarketMatrix":
        """Wrap a raw array (synthetic markets, tests) with placeholder labels."""
        rel = np.array(relatives, dtype=float)
        if rel.ndim == 1:
            rel = rel[:, None]
        if tickers is None:
            tickers = [f"A{j}" for j in range(rel.shape[1])]
        return cls(rel, list(tickers), [None] * rel.shape[0])

    def head(self, periods: int) -> "MarketMatrix":
        return MarketMatrix(
            self.relatives[:periods].copy(), list(self.tickers), list(self.dates[:periods]), self.start_date
        )


def _read_grid(path: Path, kind: str):
    """Parse a ``date,T1,...,Td`` CSV into dates, tickers and a float grid.

    Every cell is validated; errors carry the file, 1-based line and column name.
    """
    if not path.exists():
        raise DataError(f"{path}: file not found")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if len(header) < 2:
            raise DataError(f"{path}: header needs a date column and at least one ticker")
        tickers = header[1:]
        seen = set()
        for t in tickers:
            if not t:
                raise DataError(f"{path}: empty ticker name in header")
            if t in seen:
                raise DataError(f"{path}: duplicate ticker {t!r} in header")
            seen.add(t)

        dates: list[dt.date] = []
        rows: list[list[float]] = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(
                    f"{path}:{lineno}: expected {len(header)} cells, found {len(row)}"
                )
            try:
                date = dt.date.fromisoformat(row[0].strip())
            except ValueError:
                raise DataError(f"{path}:{lineno}: unparseable date {row[0]!r}") from None
            if dates and date <= dates[-1]:
                raise DataError(f"{path}:{lineno}: date {date} is not after {dates[-1]}")
            values = []
            for col, cell in zip(tickers, row[1:]):
                cell = cell.strip()
                if not cell:
                    raise DataError(f"{path}:{lineno}: missing value for {col}")
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(f"{path}:{lineno}: non-numeric value {cell!r} for {col}") from None
                if not math.isfinite(v):
                    raise DataError(f"{path}:{lineno}: non-finite value {cell!r} for {col}")
                if kind == "prices" and v <= 0:
                    raise DataError(f"{path}:{lineno}: non-positive price {cell!r} for {col}")
                if kind == "relatives" and v < 0:
                    raise DataError(f"{path}:{lineno}: negative price relative {cell!r} for {col}")
                values.append(v)
            dates.append(date)
            rows.append(values)
    grid = np.array(rows, dtype=float).reshape(len(rows), len(tickers))
    return dates, tickers, grid


def _restrict(dates, grid, date_range):
    if date_range is None:
        return dates, grid
    lo, hi = date_range
    keep = [i for i, d in enumerate(dates) if (lo is None or d >= lo) and (hi is None or d <= hi)]
    return [dates[i] for i in keep], grid[keep]


def load_price_table(path, date_range: Optional[tuple] = None) -> PriceTable:
    """Load adjusted closing prices from CSV.

    ``date_range`` is an inclusive ``(start, end)`` pair; either end may be None.
    """
    dates, tickers, grid = _read_grid(Path(path), "prices")
    dates, grid = _restrict(dates, grid, date_range)
    return PriceTable(dates, tickers, grid)


def to_market_matrix(table: PriceTable) -> MarketMatrix:
    if table.n < 2:
        raise DataError(f"need at least 2 price rows to form relatives, got {table.n}")
    p = table.prices
    rel = p[1:] / p[:-1]
    return MarketMatrix(rel, list(table.tickers), list(table.dates[1:]), table.dates[0])


def load_relatives(path, date_range: Optional[tuple] = None) -> MarketMatrix:
    """Load a CSV of pre-computed price relatives (same layout as a price file)."""
    dates, tickers, grid = _read_grid(Path(path), "relatives")
    dates, grid = _restrict(dates, grid, date_range)
    if grid.shape[0] < 1:
        raise DataError(f"{path}: no rows of price relatives")
    return MarketMatrix(grid, tickers, dates)


def load_market(path, kind: str = "prices", date_range: Optional[tuple] = None) -> MarketMatrix:
    if kind == "prices":
        return to_market_matrix(load_price_table(path, date_range))
    if kind == "relatives":
        return load_relatives(path, date_range)
    raise ValueError(f"unknown data kind {kind!r}")
