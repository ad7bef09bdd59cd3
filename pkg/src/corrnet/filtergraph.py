"""Correlation-filtered graphs: minimum spanning tree and PMFG.

Both constructions scan candidate edges in order of increasing distance
(decreasing correlation), ties broken by (distance, i, j) on the input
ticker ordering so results are reproducible. The PMFG accepts an edge iff
the graph stays planar and stops at the maximal planar count 3(N-2).

Two planarity strategies are provided: "fast" combines free accepts
(component-bridging edges and the first few edges cannot break planarity)
with a compiled boolean left-right test; "scratch" re-runs the networkx
planarity check from scratch at every candidate and serves as the oracle
the fast path is validated against.
"""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
import numpy as np

from ._planarity import is_planar_edges
from .estimator import DistanceMatrix


@dataclass(frozen=True)
class FilteredGraph:
    """Edge-filtered correlation network over an ordered ticker list.

    Edges are parallel arrays (src < dst as indices into tickers) carrying
    both the similarity rho and the distance d. For a PMFG the combinatorial
    embedding (cyclic neighbor order per vertex) witnesses planarity.
    """

    tickers: tuple
    src: np.ndarray
    dst: np.ndarray
    rho: np.ndarray
    dist: np.ndarray
    kind: str
    embedding: dict | None = None
    window_id: str | None = None

    @property
    def n(self) -> int:
        return len(self.tickers)

    @property
    def n_edges(self) -> int:
        return int(self.src.size)

    def edges(self):
        """Iterate (i, j, rho, dist) in construction order."""
        for k in range(self.n_edges):
            yield int(self.src[k]), int(self.dst[k]), float(self.rho[k]), float(self.dist[k])


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


def _distance_input(d):
    if isinstance(d, DistanceMatrix):
        tickers, arr, wid = d.tickers, np.asarray(d.d, dtype=float), d.window_id
    else:
        arr = np.asarray(d, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("distance matrix must be square")
        tickers, wid = tuple(str(i) for i in range(arr.shape[0])), None
    iu = np.triu_indices(arr.shape[0], 1)
    if not np.isfinite(arr[iu]).all():
        raise ValueError("distance matrix has non-finite entries")
    return tickers, arr, wid


def _candidate_order(d):
    """All pairs i<j sorted by (distance, i, j). Only the upper triangle is read."""
    n = d.shape[0]
    iu, ju = np.triu_indices(n, 1)
    dist = d[iu, ju]
    order = np.lexsort((ju, iu, dist))
    return iu[order], ju[order], dist[order]


def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def build_mst(d, window_id=None) -> FilteredGraph:
    """Minimum spanning tree under distance weights (Kruskal)."""
    tickers, dm, wid = _distance_input(d)
    if window_id is not None:
        wid = window_id
    n = dm.shape[0]
    if n < 2:
        raise ValueError(f"minimum spanning tree needs N >= 2, got N={n}")
    iu, ju, dist = _candidate_order(dm)
    parent = np.arange(n)
    src = np.empty(n - 1, np.int64)
    dst = np.empty(n - 1, np.int64)
    dd = np.empty(n - 1, float)
    m = 0
    for k in range(iu.size):
        i, j = int(iu[k]), int(ju[k])
        ri, rj = _find(parent, i), _find(parent, j)
        if ri == rj:
            continue
        parent[ri] = rj
        src[m], dst[m], dd[m] = i, j, dist[k]
        m += 1
        if m == n - 1:
            break
    if m != n - 1:
        raise RuntimeError("internal error: complete candidate scan left the tree short")
    rho = 1.0 - dd * dd / 2.0
    return FilteredGraph(
        tickers=tuple(tickers),
        src=_freeze(src),
        dst=_freeze(dst),
        rho=_freeze(rho),
        dist=_freeze(dd),
        kind="MST",
        embedding=None,
        window_id=wid,
    )


def _embedding_dict(graph: nx.Graph) -> dict:
    ok, emb = nx.check_planarity(graph)
    if not ok:
        raise RuntimeError("internal error: accepted edge set is not planar")
    return {v: tuple(neigh) for v, neigh in emb.get_data().items()}


def build_pmfg(d, strategy: str = "fast", window_id=None) -> FilteredGraph:
    """Planar maximally filtered graph of a distance matrix.

    Greedy over candidates in increasing distance: keep an edge iff the
    graph stays planar, stop at 3(N-2) edges. ``strategy`` selects the
    internal planarity test ("fast" or "scratch"); the accepted edge
    sequence is identical by construction contract.
    """
    tickers, dm, wid = _distance_input(d)
    if window_id is not None:
        wid = window_id
    n = dm.shape[0]
    if n < 3:
        raise ValueError(f"PMFG needs N >= 3, got N={n}")
    if strategy not in ("fast", "scratch"):
        raise ValueError(f"unknown strategy {strategy!r}")
    iu, ju, dist = _candidate_order(dm)
    target = 3 * (n - 2)

    src = np.empty(target, np.int64)
    dst = np.empty(target, np.int64)
    dd = np.empty(target, float)
    m = 0

    if strategy == "scratch":
        g = nx.Graph()
        g.add_nodes_from(range(n))
        for k in range(iu.size):
            i, j = int(iu[k]), int(ju[k])
            g.add_edge(i, j)
            if nx.check_planarity(g)[0]:
                src[m], dst[m], dd[m] = i, j, dist[k]
                m += 1
            else:
                g.remove_edge(i, j)
            if m == target:
                break
    else:
        parent = np.arange(n)
        esrc = np.empty(target + 1, np.int64)
        edst = np.empty(target + 1, np.int64)
        for k in range(iu.size):
            i, j = int(iu[k]), int(ju[k])
            ri, rj = _find(parent, i), _find(parent, j)
            esrc[m], edst[m] = i, j
            if ri != rj:
                # bridging two planar components cannot break planarity
                parent[ri] = rj
                accept = True
            elif m + 1 <= 8:
                # no simple graph with <= 8 edges contains a Kuratowski subdivision
                accept = True
            else:
                accept = is_planar_edges(n, esrc[: m + 1], edst[: m + 1])
            if accept:
                src[m], dst[m], dd[m] = i, j, dist[k]
                m += 1
                if m == target:
                    break

    if m != target:
        raise RuntimeError(
            f"PMFG construction stalled at {m} of {target} edges; "
            "input matrix is not a complete pairwise distance matrix"
        )

    final = nx.Graph()
    final.add_nodes_from(range(n))
    final.add_edges_from(zip(src.tolist(), dst.tolist()))
    embedding = _embedding_dict(final)

    rho = 1.0 - dd * dd / 2.0
    return FilteredGraph(
        tickers=tuple(tickers),
        src=_freeze(src),
        dst=_freeze(dst),
        rho=_freeze(rho),
        dist=_freeze(dd),
        kind="PMFG",
        embedding=embedding,
        window_id=wid,
    )


def is_planar(edges, n=None):
    """Planarity check with a witness.

    Returns (True, embedding) where the embedding maps each vertex to its
    cyclic neighbor order, or (False, obstruction) where the obstruction is
    the frozen vertex set of a K5 or K3,3 subdivision found in the graph.
    """
    g = nx.Graph()
    if n is not None:
        g.add_nodes_from(range(n))
    g.add_edges_from((int(a), int(b)) for a, b in edges)
    ok, emb = nx.check_planarity(g)
    if ok:
        return True, {v: tuple(neigh) for v, neigh in emb.get_data().items()}
    obstruction = nx.algorithms.planarity.get_counterexample(g)
    return False, frozenset(obstruction.nodes)
