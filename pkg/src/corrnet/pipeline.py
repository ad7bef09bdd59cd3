"""Rolling-window orchestration of the correlation-clustering study.

Cuts a returns panel into overlapping windows, runs the per-window chain
(detrend, weighted correlation, distance, PMFG, bubble clustering), and
derives the study outputs: the cluster-count series, adjacent-window
persistence, the all-pairs clustering-similarity matrix s, the
metacorrelation matrix z, ICB comparison series, and cluster tracking
against a benchmark partition.

Windows are computed data-parallel across processes. Every reduction is
a fixed-order loop over window indices, so results are identical for any
worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .compare import adjusted_rand_index, match_similar_clusters
from .dbht import Clustering, dbht_cluster
from .estimator import (
    correlation_to_distance,
    detrend_market_mode,
    exponential_weights,
    metacorrelation,
    weighted_correlation,
)


@dataclass(frozen=True)
class WindowSpec:
    """Half-open row range [start, end) of one analysis window."""

    index: int
    start: int
    end: int
    length: int
    shift: int


@dataclass(frozen=True)
class RollingResult:
    windows: tuple
    correlations: tuple
    clusterings: tuple
    n_clusters_series: np.ndarray
    bubble_stats: tuple

    def __len__(self) -> int:
        return len(self.windows)


@dataclass(frozen=True)
class TrackingRecord:
    """One benchmark cluster followed across windows.

    sizes[k] is the cardinality S of the matched cluster in window k (0
    when no candidate passes the test); histograms[k] maps ICB industry to
    member count within the matched cluster, summing to sizes[k].
    """

    cluster_id: int
    sizes: np.ndarray
    histograms: tuple


def make_windows(total_days: int, length: int, shift: int) -> list:
    """Anchor windows of `length` rows every `shift` rows from the start."""
    total_days, length, shift = int(total_days), int(length), int(shift)
    if length < 2:
        raise ValueError("window length must be >= 2")
    if shift < 1:
        raise ValueError("shift must be >= 1")
    if total_days < length:
        raise ValueError(
            f"panel has {total_days} rows, shorter than one window of {length}"
        )
    count = (total_days - length) // shift + 1
    return [
        WindowSpec(index=k, start=k * shift, end=k * shift + length, length=length, shift=shift)
        for k in range(count)
    ]


def bubble_summary(dbt) -> dict:
    """Compact bubble statistics for reporting alongside a clustering."""
    sizes = [len(b) for b in dbt.base.bubbles]
    return {
        "n_bubbles": len(sizes),
        "n_converging": sum(1 for k in dbt.kinds if k == "converging"),
        "bubble_sizes": sizes,
    }


# per-process window context, installed once per worker by the initializer
_CTX = None


def _init_worker(returns, tickers, cfg) -> None:
    global _CTX
    _CTX = (returns, tickers, cfg)


def _compute_window(k: int):
    returns, tickers, (length, shift, theta, detrend, strategy) = _CTX
    win = WindowSpec(index=k, start=k * shift, end=k * shift + length, length=length, shift=shift)
    try:
        rows = returns[win.start : win.end]
        if detrend:
            rows = detrend_market_mode(rows).residuals
        w = exponential_weights(win.length, theta)
        corr = weighted_correlation(rows, w, tickers=tickers, window_id=str(win.index))
        dist = correlation_to_distance(corr)
        clustering, dbt, _ = dbht_cluster(dist, strategy=strategy, details=True)
    except Exception as e:
        raise RuntimeError(
            f"window {win.index} (rows {win.start}:{win.end}) failed: {e}"
        ) from e
    return win, corr, clustering, bubble_summary(dbt)


def _warm_planarity_kernel() -> None:
    # compile before forking workers so children inherit the jitted code
    from ._planarity import is_planar_edges

    tri = np.array([0, 1, 2], dtype=np.int64)
    is_planar_edges(3, tri, np.roll(tri, 1))


def run_rolling(
    panel,
    length: int,
    shift: int,
    theta: float | None = None,
    detrend: bool = True,
    jobs: int = 1,
    strategy: str = "fast",
) -> RollingResult:
    """Cluster every rolling window of a returns panel.

    theta=None selects the length/3 decay default; math.inf gives uniform
    weights. Any window failure aborts the whole run, naming the window,
    because silently skipping one would misalign every downstream series.
    """
    returns = np.asarray(panel.returns, dtype=float)
    tickers = tuple(panel.tickers)
    windows = make_windows(returns.shape[0], length, shift)
    if theta is None:
        theta = length / 3
    jobs = max(1, int(jobs))
    cfg = (int(length), int(shift), float(theta), bool(detrend), strategy)

    if jobs == 1 or len(windows) == 1:
        _init_worker(returns, tickers, cfg)
        results = [_compute_window(k) for k in range(len(windows))]
    else:
        if strategy == "fast":
            _warm_planarity_kernel()
        with ProcessPoolExecutor(
            max_workers=min(jobs, len(windows)),
            initializer=_init_worker,
            initargs=(returns, tickers, cfg),
        ) as ex:
            results = list(ex.map(_compute_window, range(len(windows))))

    wins, corrs, clusterings, stats = zip(*results)
    n_clusters = np.array([c.n_clusters for c in clusterings], dtype=np.int64)
    return RollingResult(
        windows=tuple(wins),
        correlations=tuple(corrs),
        clusterings=tuple(clusterings),
        n_clusters_series=n_clusters,
        bubble_stats=tuple(stats),
    )


def persistence_series(rr: RollingResult) -> list:
    """ARI between each window's clustering and its predecessor's.

    Element (k, value) compares windows k-1 and k, for k = 1..n-1.
    """
    if len(rr) < 2:
        raise ValueError("persistence needs at least 2 windows")
    return [
        (k, float(adjusted_rand_index(rr.clusterings[k - 1], rr.clusterings[k])))
        for k in range(1, len(rr))
    ]


def clustering_similarity_matrix(rr: RollingResult) -> np.ndarray:
    """Symmetric matrix s of pairwise ARIs between window clusterings."""
    n = len(rr)
    s = np.ones((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            v = float(adjusted_rand_index(rr.clusterings[a], rr.clusterings[b]))
            s[a, b] = s[b, a] = v
    return s


def metacorrelation_matrix(rr: RollingResult) -> np.ndarray:
    """Symmetric matrix z of pairwise metacorrelations between windows."""
    n = len(rr)
    z = np.ones((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            v = metacorrelation(rr.correlations[a], rr.correlations[b])
            z[a, b] = z[b, a] = v
    return z


def _level_clustering(tickers, sectors, level: str) -> Clustering:
    labs = sectors.labels_for(tickers, level)
    _, codes = np.unique(np.asarray(labs, dtype=object), return_inverse=True)
    return Clustering(tickers=tickers, labels=codes.astype(np.int64))


def icb_similarity_series(rr: RollingResult, sectors, level: str) -> list:
    """Per-window ARI against the partition induced by one ICB level."""
    tickers = rr.clusterings[0].tickers
    ref = _level_clustering(tickers, sectors, level)
    return [float(adjusted_rand_index(c, ref)) for c in rr.clusterings]


def _window_clusterings(rr_or_clusterings) -> tuple:
    cl = getattr(rr_or_clusterings, "clusterings", rr_or_clusterings)
    return tuple(cl)


def track_cluster_evolution(
    benchmark: Clustering,
    rr,
    sectors,
    alpha: float = 0.01,
    point_mass: bool = False,
) -> list:
    """Follow each benchmark cluster through the window clusterings.

    At every window the benchmark cluster is tested against all candidate
    clusters (Bonferroni over the window's cluster count); the matched
    cluster's size and ICB-industry composition are recorded, S=0 with an
    empty histogram when nothing passes.
    """
    clusterings = _window_clusterings(rr)
    if not clusterings:
        raise ValueError("no window clusterings to track against")
    tickers = benchmark.tickers
    for c in clusterings:
        if c.tickers != tickers:
            raise ValueError("benchmark and window clusterings cover different tickers")
    industries = sectors.labels_for(tickers, "industry")

    records = []
    for cid in np.unique(benchmark.labels).tolist():
        members = [t for t, lab in zip(tickers, benchmark.labels) if lab == cid]
        sizes = np.zeros(len(clusterings), dtype=np.int64)
        hists = []
        for k, cand in enumerate(clusterings):
            res = match_similar_clusters(
                members, cand, alpha=alpha, n_tests=cand.n_clusters, point_mass=point_mass
            )
            if res.selected is None:
                hists.append({})
                continue
            picked = np.asarray(cand.labels) == res.selected
            sizes[k] = int(picked.sum())
            hist: dict = {}
            for ind, hit in zip(industries, picked):
                if hit:
                    hist[ind] = hist.get(ind, 0) + 1
            hists.append(hist)
        records.append(
            TrackingRecord(cluster_id=int(cid), sizes=sizes, histograms=tuple(hists))
        )
    return records
