"""Correlation and distance estimation on return windows.

A window of (optionally market-detrended) returns is turned into an
exponentially weighted Pearson correlation matrix and then into the metric
distance d = sqrt(2(1 - rho)). Metacorrelation compares two correlation
matrices entry-wise over distinct pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


def _default_tickers(n):
    return tuple(str(i) for i in range(n))


@dataclass(frozen=True)
class DetrendResult:
    """Per-window market-mode regression output.

    residuals[t, i] is the return of asset i on day t with the fitted
    market component removed; the fit guarantees each residual column has
    zero mean and zero sample covariance with the index.
    """

    residuals: np.ndarray
    alphas: np.ndarray
    betas: np.ndarray
    index: np.ndarray


@dataclass(frozen=True)
class CorrelationMatrix:
    tickers: tuple
    rho: np.ndarray
    window_id: str | None = None


@dataclass(frozen=True)
class DistanceMatrix:
    tickers: tuple
    d: np.ndarray
    window_id: str | None = None


def exponential_weights(length: int, theta: float) -> np.ndarray:
    """Normalized exponential day weights, oldest first.

    w_t proportional to exp((t - length)/theta) for t = 1..length, so the
    most recent day carries the most weight. theta=inf gives the uniform
    vector (every factor is exp(0)), which is how unweighted estimation is
    requested.
    """
    if length < 2:
        raise ValueError(f"window length must be >= 2, got {length}")
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    if math.isinf(theta):
        w = np.ones(length)
    else:
        t = np.arange(1, length + 1, dtype=float)
        w = np.exp((t - length) / theta)
    return _freeze(w / w.sum())


def _as_returns_array(window):
    if hasattr(window, "returns"):
        return np.asarray(window.returns, dtype=float)
    return np.asarray(window, dtype=float)


def detrend_market_mode(window) -> DetrendResult:
    """Remove the market mode from a returns window by per-asset OLS.

    The market index is the equal-weight cross-sectional mean return; each
    asset is regressed on it (with intercept, unweighted) and the residuals
    are returned. Residuals are invariant to any rescaling of the index, so
    the equal-weight choice over the plain cross-sectional sum is
    immaterial.
    """
    r = _as_returns_array(window)
    if r.ndim != 2:
        raise ValueError("returns window must be 2-dimensional (days x assets)")
    t_len, n = r.shape
    if t_len < 3:
        raise ValueError(f"detrending needs >= 3 days, got {t_len}")
    index = r.mean(axis=1)
    ic = index - index.mean()
    ss = float(ic @ ic)
    if ss == 0.0:
        raise ValueError("market index is constant over the window; regression is degenerate")
    rc = r - r.mean(axis=0)
    betas = (ic @ rc) / ss
    alphas = r.mean(axis=0) - betas * index.mean()
    residuals = rc - np.outer(ic, betas)
    return DetrendResult(
        residuals=_freeze(residuals),
        alphas=_freeze(alphas),
        betas=_freeze(betas),
        index=_freeze(index),
    )


def weighted_correlation(window, w, tickers=None, window_id=None) -> CorrelationMatrix:
    """Weighted Pearson correlation matrix of a returns window.

    All time averages in the Pearson formula are taken with the supplied
    day weights (which must sum to 1 and match the window length). The
    result is exactly symmetric with unit diagonal, clamped to [-1, 1].
    Raises naming the first asset whose weighted variance vanishes.
    """
    x = _as_returns_array(window)
    w = np.asarray(w, dtype=float)
    if x.ndim != 2:
        raise ValueError("returns window must be 2-dimensional (days x assets)")
    if w.ndim != 1 or w.shape[0] != x.shape[0]:
        raise ValueError(
            f"weight length {w.shape} does not match window length {x.shape[0]}"
        )
    if tickers is None:
        tickers = getattr(window, "tickers", None) or _default_tickers(x.shape[1])
    tickers = tuple(tickers)

    mean = w @ x
    gram = x.T @ (w[:, None] * x)
    cov = gram - np.outer(mean, mean)
    cov = (cov + cov.T) / 2.0  # enforce exact symmetry before normalizing
    var = np.diag(cov).copy()
    bad = np.flatnonzero(var <= 0.0)
    if bad.size:
        raise ValueError(
            f"asset {tickers[bad[0]]!r} has zero weighted variance in this window"
        )
    scale = np.sqrt(var)
    rho = cov / np.outer(scale, scale)
    np.clip(rho, -1.0, 1.0, out=rho)
    np.fill_diagonal(rho, 1.0)
    return CorrelationMatrix(tickers=tickers, rho=_freeze(rho), window_id=window_id)


def correlation_to_distance(c) -> DistanceMatrix:
    """Map correlations to metric distances d = sqrt(2(1 - rho))."""
    if isinstance(c, CorrelationMatrix):
        rho, tickers, window_id = c.rho, c.tickers, c.window_id
    else:
        rho = np.asarray(c, dtype=float)
        tickers, window_id = _default_tickers(rho.shape[0]), None
    arg = 2.0 * (1.0 - rho)
    np.clip(arg, 0.0, None, out=arg)  # guard -0.0-scale float dust at rho=1
    d = np.sqrt(arg)
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(tickers=tickers, d=_freeze(d), window_id=window_id)


def _upper_entries(m) -> np.ndarray:
    rho = m.rho if isinstance(m, CorrelationMatrix) else np.asarray(m, dtype=float)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("correlation matrix must be square")
    iu = np.triu_indices(rho.shape[0], 1)
    return rho[iu]


def metacorrelation(a, b) -> float:
    """Pearson correlation between two correlation matrices.

    Taken over the N(N-1)/2 distinct off-diagonal pairs only; the constant
    unit diagonal would otherwise inflate the similarity.
    """
    if isinstance(a, CorrelationMatrix) and isinstance(b, CorrelationMatrix):
        if a.tickers != b.tickers:
            raise ValueError("correlation matrices are over different ticker sets")
    xa = _upper_entries(a)
    xb = _upper_entries(b)
    if xa.shape != xb.shape:
        raise ValueError("correlation matrices have different sizes")
    xa = xa - xa.mean()
    xb = xb - xb.mean()
    va = float(xa @ xa)
    vb = float(xb @ xb)
    if va == 0.0 or vb == 0.0:
        raise ValueError("off-diagonal entries are constant; metacorrelation undefined")
    return float((xa @ xb) / math.sqrt(va * vb))
