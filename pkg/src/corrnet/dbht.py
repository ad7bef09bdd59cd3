"""Flat clustering from the bubble structure of a maximal planar graph.

A maximal planar graph decomposes at its separating 3-cliques (triangles
whose removal disconnects it) into "bubbles" whose adjacency is a tree.
Directing each tree edge toward the side with stronger correlation
attachment singles out converging bubbles (all edges inward), which seed
the clusters; every other vertex joins the converging bubble it is most
attached to along directed paths. All tie-breaks are deterministic so
repeated runs and different worker counts give identical labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components


@dataclass(frozen=True)
class Clustering:
    """A partition of an ordered ticker list into labeled clusters."""

    tickers: tuple
    labels: np.ndarray
    n_clusters: int = field(init=False)

    def __post_init__(self):
        tickers = tuple(self.tickers)
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1 or labels.size != len(tickers):
            raise ValueError("labels must be one cluster id per ticker")
        if labels.size == 0:
            raise ValueError("empty clustering")
        if len(set(tickers)) != len(tickers):
            raise ValueError("duplicate tickers")
        labels = np.ascontiguousarray(labels)
        labels.flags.writeable = False
        object.__setattr__(self, "tickers", tickers)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "n_clusters", int(np.unique(labels).size))

    def members(self, cluster_id) -> tuple:
        return tuple(
            t for t, lab in zip(self.tickers, self.labels) if lab == cluster_id
        )


@dataclass(frozen=True)
class BubbleTree:
    """Bubbles of a maximal planar graph and their tree adjacency.

    bubbles: vertex frozensets, indexed in discovery order.
    tree_edges: (bubble_a, bubble_b, separating 3-clique) triples.
    membership: vertex -> frozenset of bubble indices containing it.
    edge_bubble: for each input graph edge, the lowest-indexed bubble
    containing both endpoints (a deterministic one-bubble-per-edge
    assignment; clique edges lie in several bubbles' vertex sets).
    """

    bubbles: tuple
    tree_edges: tuple
    membership: dict
    edge_bubble: np.ndarray


@dataclass(frozen=True)
class DirectedBubbleTree:
    """BubbleTree plus a direction per tree edge and a kind per bubble.

    directions[k] = (src, dst) aligned with base.tree_edges[k]; kind is
    "converging" (every incident edge inward), "diverging" (outward) or
    "passage" (mixed). A lone bubble with no tree edges is converging.
    """

    base: BubbleTree
    directions: tuple
    kinds: tuple


def _check_pmfg(pmfg):
    if getattr(pmfg, "kind", None) != "PMFG":
        raise ValueError("bubble decomposition requires a PMFG")
    n = pmfg.n
    if n < 3:
        raise ValueError("PMFG must have at least 3 vertices")
    if pmfg.n_edges != 3 * (n - 2):
        raise ValueError(
            f"not a maximal planar graph: {pmfg.n_edges} edges, expected {3 * (n - 2)}"
        )


def _adjacency_sets(pmfg):
    adj = [set() for _ in range(pmfg.n)]
    for k in range(pmfg.n_edges):
        i, j = int(pmfg.src[k]), int(pmfg.dst[k])
        adj[i].add(j)
        adj[j].add(i)
    return adj


def _rho_matrix(pmfg) -> np.ndarray:
    r = np.zeros((pmfg.n, pmfg.n))
    r[pmfg.src, pmfg.dst] = pmfg.rho
    r[pmfg.dst, pmfg.src] = pmfg.rho
    return r


def _csr(pmfg):
    rows = np.concatenate([pmfg.src, pmfg.dst])
    cols = np.concatenate([pmfg.dst, pmfg.src])
    data = np.ones(rows.size, dtype=np.int8)
    return sp.csr_matrix((data, (rows, cols)), shape=(pmfg.n, pmfg.n))


def _piece_triangles(verts, adj):
    """Triangles u<v<w of the induced subgraph, in lexicographic order."""
    vset = set(verts.tolist())
    out = []
    for u in verts.tolist():
        au = adj[u] & vset
        for v in sorted(au):
            if v <= u:
                continue
            for w in sorted(adj[v] & au):
                if w > v:
                    out.append((u, v, w))
    return out


def _split_components(a_csr, verts, triangle):
    """Connected components of the piece after removing the triangle vertices."""
    keep = np.array([v for v in verts.tolist() if v not in triangle], dtype=np.int64)
    if keep.size == 0:
        return None
    sub = a_csr[keep][:, keep]
    n_comp, comp = connected_components(sub, directed=False)
    if n_comp == 1:
        return None
    return [keep[comp == c] for c in range(n_comp)]


def decompose_bubbles(pmfg) -> BubbleTree:
    """Split a PMFG at every separating 3-clique into its bubble tree.

    Pieces are split recursively: the lexicographically first separating
    triangle of a piece divides it, the clique vertices replicated into
    both sides, until no piece has a separating triangle. Each split
    records one bubble-tree edge per pair of sides sharing the clique; the
    final adjacency is verified to be a tree.
    """
    _check_pmfg(pmfg)
    n = pmfg.n
    adj = _adjacency_sets(pmfg)
    a_csr = _csr(pmfg)

    bubbles: list = []
    links: list = []  # [clique, endpoint_a, endpoint_b] with bubble ids filled late
    # work items: (sorted vertex array, pending (link_id, slot) handles)
    work = [(np.arange(n, dtype=np.int64), [])]
    while work:
        verts, pending = work.pop()
        split = None
        for tri in _piece_triangles(verts, adj):
            comps = _split_components(a_csr, verts, set(tri))
            if comps is not None:
                split = (tri, comps)
                break
        if split is None:
            bid = len(bubbles)
            bubbles.append(frozenset(verts.tolist()))
            for link_id, slot in pending:
                links[link_id][1 + slot] = bid
            continue

        tri, comps = split
        tri_set = set(tri)
        comps.sort(key=lambda c: int(c.min()))
        tri_arr = np.array(sorted(tri), dtype=np.int64)
        sub_verts = [np.sort(np.concatenate([c, tri_arr])) for c in comps]
        sub_pending: list = [[] for _ in comps]

        # each pending clique survives on exactly one side: the component
        # holding its off-split vertices (a clique cannot straddle components)
        comp_index = {}
        for ci, c in enumerate(comps):
            for v in c.tolist():
                comp_index[v] = ci
        for link_id, slot in pending:
            rest = links[link_id][0] - tri_set
            if not rest:
                raise RuntimeError(
                    "separating clique recurred inside a derived piece"
                )
            sub_pending[comp_index[next(iter(rest))]].append((link_id, slot))

        # one tree edge per pair of sides sharing this clique (two sides in
        # every planar triangulation; more would fail the tree check below)
        for a in range(len(comps)):
            for b in range(a + 1, len(comps)):
                link_id = len(links)
                links.append([frozenset(tri), None, None])
                sub_pending[a].append((link_id, 0))
                sub_pending[b].append((link_id, 1))

        for sv, pend in zip(reversed(sub_verts), reversed(sub_pending)):
            work.append((sv, pend))

    for clique, a, b in links:
        if a is None or b is None:
            raise RuntimeError("bubble link left unresolved")

    # tree invariant: k bubbles, k-1 edges, connected
    k = len(bubbles)
    if len(links) != k - 1:
        raise ValueError(
            f"bubble adjacency is not a tree ({k} bubbles, {len(links)} edges); "
            "a separating 3-clique bordered more than two pieces"
        )
    parent = list(range(k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for clique, a, b in links:
        ra, rb = find(a), find(b)
        if ra == rb:
            raise ValueError("bubble adjacency contains a cycle")
        parent[ra] = rb

    membership: dict = {v: [] for v in range(n)}
    for bid, bub in enumerate(bubbles):
        for v in bub:
            membership[v].append(bid)
    membership = {v: frozenset(bids) for v, bids in membership.items()}
    for v in range(n):
        if not membership[v]:
            raise RuntimeError(f"vertex {v} fell out of every bubble")

    edge_bubble = np.empty(pmfg.n_edges, dtype=np.int64)
    for e in range(pmfg.n_edges):
        shared = membership[int(pmfg.src[e])] & membership[int(pmfg.dst[e])]
        if not shared:
            raise RuntimeError("graph edge not inside any bubble")
        edge_bubble[e] = min(shared)
    edge_bubble.flags.writeable = False

    return BubbleTree(
        bubbles=tuple(bubbles),
        tree_edges=tuple((a, b, clique) for clique, a, b in links),
        membership=membership,
        edge_bubble=edge_bubble,
    )


def _attachment(clique, bubble, adj, rho) -> float:
    """Mean clique-to-interior correlation mass of one side of a tree edge."""
    interior = bubble - clique
    total = 0.0
    for v in clique:
        for u in adj[v] & interior:
            total += rho[v, u]
    return total / len(interior)


def direct_bubble_tree(bt: BubbleTree, pmfg) -> DirectedBubbleTree:
    """Orient every bubble-tree edge toward the more attached side.

    For tree edge (a, b) with clique t, side x scores
    A(t, x) = sum over clique vertices of their rho-weighted degree into
    x's non-clique vertices, divided by the count of those vertices. The
    edge points at the larger score; ties go to the larger bubble, then to
    the lower bubble index.
    """
    _check_pmfg(pmfg)
    adj = _adjacency_sets(pmfg)
    rho = _rho_matrix(pmfg)
    directions = []
    for a, b, clique in bt.tree_edges:
        aa = _attachment(clique, bt.bubbles[a], adj, rho)
        ab = _attachment(clique, bt.bubbles[b], adj, rho)
        if aa > ab:
            to = a
        elif ab > aa:
            to = b
        elif len(bt.bubbles[a]) != len(bt.bubbles[b]):
            to = a if len(bt.bubbles[a]) > len(bt.bubbles[b]) else b
        else:
            to = min(a, b)
        directions.append((b if to == a else a, to))

    k = len(bt.bubbles)
    has_in = [False] * k
    has_out = [False] * k
    for srcb, dstb in directions:
        has_out[srcb] = True
        has_in[dstb] = True
    kinds = []
    for bid in range(k):
        if has_out[bid]:
            kinds.append("passage" if has_in[bid] else "diverging")
        else:
            # no outgoing edges: converging; covers the lone-bubble tree
            kinds.append("converging")
    if "converging" not in kinds:
        raise RuntimeError("directed bubble tree has no converging bubble")
    return DirectedBubbleTree(base=bt, directions=tuple(directions), kinds=tuple(kinds))


def _bubble_distances(dbt: DirectedBubbleTree) -> np.ndarray:
    """Directed-path lengths between bubbles (np.inf where unreachable)."""
    k = len(dbt.base.bubbles)
    out = [[] for _ in range(k)]
    for srcb, dstb in dbt.directions:
        out[srcb].append(dstb)
    dist = np.full((k, k), np.inf)
    for s in range(k):
        dist[s, s] = 0.0
        frontier = [s]
        d = 0
        while frontier:
            d += 1
            nxt = []
            for u in frontier:
                for w in out[u]:
                    if dist[s, w] == np.inf:
                        dist[s, w] = d
                        nxt.append(w)
            frontier = nxt
    return dist


def assign_clusters(dbt: DirectedBubbleTree, pmfg) -> Clustering:
    """Label every vertex with the converging bubble it is most attached to.

    Converging bubbles seed clusters (in bubble-index order). A vertex
    interior to a converging bubble joins it outright. Every other vertex v
    maximizes S(v, c) = sum over its bubbles b with a directed path to c of
    rho-degree(v within b) / |b|; ties prefer the shortest directed path,
    then the lowest cluster index.
    """
    _check_pmfg(pmfg)
    bt = dbt.base
    adj = _adjacency_sets(pmfg)
    rho = _rho_matrix(pmfg)
    n = pmfg.n
    k = len(bt.bubbles)

    conv = [bid for bid in range(k) if dbt.kinds[bid] == "converging"]
    cluster_of = {bid: ci for ci, bid in enumerate(conv)}
    labels = np.full(n, -1, dtype=np.int64)

    for v in range(n):
        mb = bt.membership[v]
        if len(mb) == 1:
            (bid,) = mb
            if bid in cluster_of:
                labels[v] = cluster_of[bid]

    dist = _bubble_distances(dbt)
    # rho-weighted degree of v inside each of its bubbles, reused across candidates
    rho_deg: dict = {}
    for v in range(n):
        if labels[v] >= 0:
            continue
        per_bubble = {}
        for bid in bt.membership[v]:
            bub = bt.bubbles[bid]
            per_bubble[bid] = sum(rho[v, u] for u in adj[v] & bub) / len(bub)
        rho_deg[v] = per_bubble

    for v in range(n):
        if labels[v] >= 0:
            continue
        best = None  # (score, path length, cluster index)
        for ci, cbid in enumerate(conv):
            score = 0.0
            path = np.inf
            for bid, contrib in rho_deg[v].items():
                dd = dist[bid, cbid]
                if dd != np.inf:
                    score += contrib
                    path = min(path, dd)
            if (
                best is None
                or score > best[0]
                or (score == best[0] and path < best[1])
            ):
                best = (score, path, ci)
        labels[v] = best[2]

    # drop empty seed clusters, keeping cluster order compact and stable
    present = np.unique(labels)
    remap = {int(old): new for new, old in enumerate(present.tolist())}
    labels = np.array([remap[int(x)] for x in labels], dtype=np.int64)
    return Clustering(tickers=pmfg.tickers, labels=labels)


def dbht_cluster(d, strategy: str = "fast", details: bool = False):
    """Cluster a distance matrix end to end: PMFG, bubbles, directions, labels.

    With ``details=True`` also returns the DirectedBubbleTree and the PMFG,
    for callers that report bubble statistics.
    """
    from .filtergraph import build_pmfg

    pmfg = build_pmfg(d, strategy=strategy)
    bt = decompose_bubbles(pmfg)
    dbt = direct_bubble_tree(bt, pmfg)
    clustering = assign_clusters(dbt, pmfg)
    if details:
        return clustering, dbt, pmfg
    return clustering
