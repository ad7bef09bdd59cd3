"""Partition and cluster comparison.

Adjusted Rand index between whole partitions, and a one-tail hypergeometric
over-representation test between individual clusters with Bonferroni
correction for the number of candidates tested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


@dataclass(frozen=True)
class ContingencyTable:
    """Intersection counts between two partitions of the same ticker set.

    ``m[i, j]`` counts tickers in cluster i of the first partition and
    cluster j of the second. Row/column order follows sorted cluster ids.
    """

    m: np.ndarray
    row_labels: tuple
    col_labels: tuple
    row_sums: np.ndarray
    col_sums: np.ndarray
    total: int


@dataclass(frozen=True)
class MatchResult:
    """Outcome of testing one reference cluster against every candidate."""

    cluster_ids: tuple
    overlaps: np.ndarray
    p_values: np.ndarray
    threshold: float
    matched: np.ndarray
    selected: object  # cluster id of the largest matched cluster, or None


def _check_same_tickers(y, y2):
    if tuple(y.tickers) != tuple(y2.tickers):
        raise ValueError("clusterings are over different ticker sets")


def contingency_table(y, y2) -> ContingencyTable:
    """Cross-tabulate two clusterings of the same, identically ordered tickers."""
    _check_same_tickers(y, y2)
    a = np.asarray(y.labels)
    b = np.asarray(y2.labels)
    ra, ia = np.unique(a, return_inverse=True)
    rb, ib = np.unique(b, return_inverse=True)
    m = np.zeros((ra.size, rb.size), dtype=np.int64)
    np.add.at(m, (ia, ib), 1)
    return ContingencyTable(
        m=m,
        row_labels=tuple(ra.tolist()),
        col_labels=tuple(rb.tolist()),
        row_sums=m.sum(axis=1),
        col_sums=m.sum(axis=0),
        total=int(a.size),
    )


def _partition_sets(labels):
    groups = {}
    for idx, lab in enumerate(labels):
        groups.setdefault(lab, []).append(idx)
    return {frozenset(g) for g in groups.values()}


def adjusted_rand_index(y, y2, exact: bool = False):
    """Adjusted Rand index between two clusterings.

    Computed in exact integer/rational arithmetic from the contingency
    table; ``exact=True`` returns the value as a Fraction instead of a
    float. The chance-degenerate case (both partitions all-singletons or
    both one-cluster, where the normalizer vanishes) returns 1.0 when the
    partitions are identical and 0.0 otherwise.
    """
    ct = contingency_table(y, y2)
    n = ct.total
    if n < 2:
        raise ValueError("adjusted Rand index needs at least 2 elements")

    def pairs(c):
        c = int(c)
        return c * (c - 1) // 2

    t1 = sum(pairs(c) for c in ct.row_sums)
    t2 = sum(pairs(c) for c in ct.col_sums)
    agree = sum(pairs(c) for c in ct.m.ravel())
    t3 = Fraction(2 * t1 * t2, n * (n - 1))
    denom = Fraction(t1 + t2, 2) - t3
    if denom == 0:
        same = _partition_sets(y.labels) == _partition_sets(y2.labels)
        value = Fraction(1 if same else 0)
    else:
        value = (agree - t3) / denom
    return value if exact else float(value)


def _log_binom(a: int, b: int) -> float:
    if b < 0 or b > a:
        return -math.inf
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


def hypergeometric_pvalue(
    n: int, size_ref: int, size_cand: int, k: int, point_mass: bool = False
) -> float:
    """Over-representation p-value for an overlap of k between two clusters.

    Under the null, drawing ``size_ref`` of ``n`` tickers uniformly at
    random, the overlap X with a fixed set of ``size_cand`` tickers is
    hypergeometric. Returns the one-tail P(X >= k); ``point_mass=True``
    returns P(X = k) instead. Evaluated through log-gamma so counts in the
    hundreds cannot overflow.
    """
    for name, v in (("n", n), ("size_ref", size_ref), ("size_cand", size_cand), ("k", k)):
        if int(v) != v or v < 0:
            raise ValueError(f"{name} must be a non-negative integer, got {v!r}")
    n, size_ref, size_cand, k = int(n), int(size_ref), int(size_cand), int(k)
    hi = min(size_ref, size_cand)
    lo = max(0, size_ref + size_cand - n)
    if size_ref > n or size_cand > n or k < lo or k > hi:
        raise ValueError(
            f"infeasible parameters: n={n} size_ref={size_ref} "
            f"size_cand={size_cand} k={k}"
        )

    log_total = _log_binom(n, size_ref)

    def log_pmf(x):
        return _log_binom(size_cand, x) + _log_binom(n - size_cand, size_ref - x) - log_total

    if point_mass:
        return math.exp(log_pmf(k))
    if k == lo:
        return 1.0  # the whole support
    p = math.fsum(math.exp(log_pmf(x)) for x in range(k, hi + 1))
    return min(p, 1.0)


def match_similar_clusters(
    ref,
    candidates,
    alpha: float = 0.01,
    n_tests: int | None = None,
    point_mass: bool = False,
) -> MatchResult:
    """Find candidate clusters over-represented in a reference vertex set.

    ``ref`` is a collection of tickers; every cluster of ``candidates`` is
    tested at the Bonferroni-adjusted threshold ``alpha / n_tests``
    (``n_tests`` defaults to the number of candidate clusters). ``selected``
    is the largest matched cluster, ties going to the lower cluster id, or
    None when nothing matches.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    ref = set(ref)
    if not ref:
        raise ValueError("reference cluster is empty")
    tickers = list(candidates.tickers)
    universe = set(tickers)
    missing = ref - universe
    if missing:
        raise ValueError(f"reference tickers not in candidate universe: {sorted(missing)[:5]}")

    labels = np.asarray(candidates.labels)
    ids = np.unique(labels)
    if n_tests is None:
        n_tests = ids.size
    if n_tests < 1:
        raise ValueError("n_tests must be >= 1")
    threshold = alpha / n_tests

    n = len(tickers)
    in_ref = np.array([t in ref for t in tickers], dtype=bool)
    size_ref = int(in_ref.sum())

    overlaps = np.empty(ids.size, dtype=np.int64)
    p_values = np.empty(ids.size, dtype=float)
    for pos, cid in enumerate(ids):
        members = labels == cid
        overlaps[pos] = int((members & in_ref).sum())
        p_values[pos] = hypergeometric_pvalue(
            n, size_ref, int(members.sum()), int(overlaps[pos]), point_mass=point_mass
        )
    matched = p_values < threshold

    selected = None
    if matched.any():
        sizes = np.array([(labels == cid).sum() for cid in ids])
        sizes = np.where(matched, sizes, -1)
        best = int(np.argmax(sizes))  # argmax takes the first, i.e. lowest id, on ties
        selected = ids[best].item()

    return MatchResult(
        cluster_ids=tuple(ids.tolist()),
        overlaps=overlaps,
        p_values=p_values,
        threshold=threshold,
        matched=matched,
        selected=selected,
    )
