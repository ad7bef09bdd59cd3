"""Data ingestion: price panels, log-returns, sector tables, synthetic panels.

CSV layouts are fixed: price files carry a date column plus one numeric
column per ticker; sector files carry ticker plus the four nested
classification levels. The synthetic generator plants a block structure that
the clustering stages are expected to recover.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .dbht import Clustering

SECTOR_LEVELS = ("industry", "supersector", "sector", "subsector")


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class PricePanel:
    dates: tuple
    tickers: tuple
    prices: np.ndarray


@dataclass(frozen=True)
class ReturnsPanel:
    dates: tuple
    tickers: tuple
    returns: np.ndarray
    detrended: bool = False


@dataclass(frozen=True)
class IngestReport:
    """What the missing-data policy did: cells filled, tickers dropped."""

    filled: tuple
    dropped_tickers: tuple
    n_missing: int


@dataclass(frozen=True)
class SectorTable:
    """Four nested classification labels per ticker, finest level last."""

    tickers: tuple
    industry: tuple
    supersector: tuple
    sector: tuple
    subsector: tuple

    def labels_for(self, tickers, level: str) -> tuple:
        if level not in SECTOR_LEVELS:
            raise ValueError(f"unknown level {level!r}, expected one of {SECTOR_LEVELS}")
        index = {t: i for i, t in enumerate(self.tickers)}
        out = []
        for t in tickers:
            if t not in index:
                raise ValueError(f"ticker {t!r} has no sector labels")
            out.append(getattr(self, level)[index[t]])
        return tuple(out)


@dataclass(frozen=True)
class BlockModelSpec:
    """Parameters of the planted-block return generator."""

    n_assets: int
    n_blocks: int
    block_loading: float
    market_loading: float
    noise_sigma: float
    n_days: int
    seed: int


def _parse_dates(raw, path):
    try:
        parsed = np.array([np.datetime64(str(v)) for v in raw])
    except ValueError as exc:
        raise ValueError(f"{path}: unparseable date: {exc}") from None
    if len(parsed) > 1 and not (parsed[1:] > parsed[:-1]).all():
        k = int(np.flatnonzero(~(parsed[1:] > parsed[:-1]))[0])
        raise ValueError(
            f"{path}: dates not strictly increasing at row {k + 2} ({raw[k + 1]!r})"
        )
    return tuple(str(v) for v in raw)


def load_price_panel(path, date_column: str = "date", missing_policy: str = "reject"):
    """Load a price CSV, applying the chosen missing-data policy.

    Returns (PricePanel, IngestReport). Policies: ``reject`` errors on the
    first missing cell, ``forward_fill`` repeats the previous day's price
    (a leading gap is an error; there is nothing to repeat), ``drop_ticker``
    removes any column with a gap.
    """
    if missing_policy not in ("reject", "forward_fill", "drop_ticker"):
        raise ValueError(f"unknown missing policy {missing_policy!r}")
    try:
        with open(path, newline="") as fh:
            header = next(csv.reader(fh), [])
        df = pd.read_csv(path)
    except OSError as exc:
        raise ValueError(f"cannot read {path}: {exc}") from None
    except Exception as exc:
        raise ValueError(f"cannot parse {path}: {exc}") from None
    # check the raw header: pandas silently renames duplicate columns
    if len(set(header)) != len(header):
        raise ValueError(f"{path}: duplicate ticker columns")
    if date_column not in df.columns:
        raise ValueError(f"{path}: no {date_column!r} column")
    tickers = [c for c in df.columns if c != date_column]
    if not tickers:
        raise ValueError(f"{path}: no ticker columns")
    dates = _parse_dates(df[date_column].tolist(), path)
    values = df[tickers].apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)

    missing = np.isnan(values)
    n_missing = int(missing.sum())
    filled: list = []
    dropped: list = []

    if missing.any():
        if missing_policy == "reject":
            r, c = np.argwhere(missing)[0]
            raise ValueError(
                f"{path}: missing price for ticker {tickers[c]!r} on {dates[r]}"
            )
        if missing_policy == "forward_fill":
            lead = missing[0]
            if lead.any():
                c = int(np.flatnonzero(lead)[0])
                raise ValueError(
                    f"{path}: ticker {tickers[c]!r} starts with a gap on {dates[0]}; "
                    "a leading gap cannot be forward-filled"
                )
            filled = [(dates[r], tickers[c]) for r, c in np.argwhere(missing)]
            last_valid = np.where(~missing, np.arange(len(dates))[:, None], 0)
            np.maximum.accumulate(last_valid, axis=0, out=last_valid)
            values = values[last_valid, np.arange(len(tickers))[None, :]]
        else:  # drop_ticker
            gone = missing.any(axis=0)
            dropped = [t for t, g in zip(tickers, gone) if g]
            tickers = [t for t, g in zip(tickers, gone) if not g]
            values = values[:, ~gone]
            if not tickers:
                raise ValueError(f"{path}: every ticker has missing data")

    if len(dates) < 2:
        raise ValueError(
            f"{path}: {len(dates)} row(s); every ticker has fewer than 2 observations"
        )
    nonpos = values <= 0
    if nonpos.any():
        r, c = np.argwhere(nonpos)[0]
        raise ValueError(
            f"{path}: non-positive price {values[r, c]!r} for ticker "
            f"{tickers[c]!r} on {dates[r]}"
        )

    panel = PricePanel(dates=dates, tickers=tuple(tickers), prices=_freeze(values))
    report = IngestReport(
        filled=tuple(filled), dropped_tickers=tuple(dropped), n_missing=n_missing
    )
    return panel, report


def compute_log_returns(panel: PricePanel) -> ReturnsPanel:
    """Daily log-returns; row t is ln(P[t+1]/P[t]), labeled by the later date."""
    if len(panel.dates) < 2:
        raise ValueError("need at least 2 dates to compute returns")
    r = np.log(panel.prices[1:] / panel.prices[:-1])
    return ReturnsPanel(
        dates=tuple(panel.dates[1:]),
        tickers=panel.tickers,
        returns=_freeze(r),
        detrended=False,
    )


def load_sector_table(path) -> SectorTable:
    """Load ticker classifications, enforcing that finer levels nest in coarser."""
    try:
        df = pd.read_csv(path, dtype=str)
    except Exception as exc:
        raise ValueError(f"cannot parse {path}: {exc}") from None
    needed = ("ticker",) + SECTOR_LEVELS
    for col in needed:
        if col not in df.columns:
            raise ValueError(f"{path}: missing column {col!r}")
    if df["ticker"].isna().any() or df[list(SECTOR_LEVELS)].isna().any().any():
        raise ValueError(f"{path}: empty cells in sector table")
    tickers = df["ticker"].tolist()
    if len(set(tickers)) != len(tickers):
        dup = sorted({t for t in tickers if tickers.count(t) > 1})
        raise ValueError(f"{path}: duplicate tickers {dup[:5]}")

    # finest to coarsest, each label must determine its parent
    chain = ("subsector", "sector", "supersector", "industry")
    for child, parent in zip(chain[:-1], chain[1:]):
        seen: dict = {}
        for _, row in df.iterrows():
            c, p = row[child], row[parent]
            if c in seen and seen[c] != p:
                raise ValueError(
                    f"{path}: {child} {c!r} appears under {parent}s "
                    f"{seen[c]!r} and {p!r}"
                )
            seen[c] = p

    return SectorTable(
        tickers=tuple(tickers),
        industry=tuple(df["industry"].tolist()),
        supersector=tuple(df["supersector"].tolist()),
        sector=tuple(df["sector"].tolist()),
        subsector=tuple(df["subsector"].tolist()),
    )


def block_labels(n_assets: int, n_blocks: int) -> np.ndarray:
    """Contiguous, near-equal block assignment used by the generator."""
    return np.arange(n_assets, dtype=np.int64) * n_blocks // n_assets


def generate_synthetic_panel(spec: BlockModelSpec):
    """Generate a returns panel with one market factor and planted blocks.

    r_i(t) = market_loading * M(t) + block_loading * F_{b(i)}(t)
             + noise_sigma * eps_i(t), all factors i.i.d. standard normal
    from a generator seeded with spec.seed. Returns (ReturnsPanel, planted
    Clustering). Deterministic: the draw order (M, F, eps) is fixed.
    """
    if spec.n_assets < 1 or spec.n_blocks < 1:
        raise ValueError("n_assets and n_blocks must be positive")
    if spec.n_blocks > spec.n_assets:
        raise ValueError("more blocks than assets")
    if spec.n_days < 2:
        raise ValueError("n_days must be >= 2")
    if not spec.noise_sigma > 0:
        raise ValueError("noise_sigma must be positive")
    if not 0 <= spec.block_loading < 1:
        raise ValueError("block_loading must lie in [0, 1)")
    if not 0 <= spec.market_loading < 1:
        raise ValueError("market_loading must lie in [0, 1)")

    rng = np.random.default_rng(spec.seed)
    m = rng.standard_normal(spec.n_days)
    f = rng.standard_normal((spec.n_days, spec.n_blocks))
    eps = rng.standard_normal((spec.n_days, spec.n_assets))
    b = block_labels(spec.n_assets, spec.n_blocks)
    r = spec.market_loading * m[:, None] + spec.block_loading * f[:, b] + spec.noise_sigma * eps

    width = max(3, len(str(spec.n_assets - 1)))
    tickers = tuple(f"S{i:0{width}d}" for i in range(spec.n_assets))
    start = np.datetime64("2000-01-03")
    dates = tuple(str(start + np.timedelta64(i, "D")) for i in range(spec.n_days))
    panel = ReturnsPanel(dates=dates, tickers=tickers, returns=_freeze(r), detrended=False)
    planted = Clustering(tickers=tickers, labels=_freeze(b))
    return panel, planted
