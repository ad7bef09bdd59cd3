"""
Rolling windows over a regime change
====================================

Cluster every window of a two-regime panel (block memberships reshuffled
halfway through) and look at the study outputs: the adjacent-window
persistence series dips exactly at the switch, the all-pairs similarity
matrix s shows two high-similarity blocks of windows, and the
metacorrelation z blurs the same contrast because raw correlations keep
the shared market component.
"""

import numpy as np

from corrnet import (
    Clustering,
    SectorTable,
    clustering_similarity_matrix,
    metacorrelation_matrix,
    persistence_series,
    run_rolling,
    track_cluster_evolution,
)
from corrnet.ingest import ReturnsPanel, block_labels

n, blocks, days, switch = 60, 6, 2000, 1000
rng = np.random.default_rng(5)
beta = rng.uniform(0.3, 0.9, size=n)          # persistent market exposures
m = rng.standard_normal(days)
f = rng.standard_normal((days, blocks))
eps = rng.standard_normal((days, n))
b1 = block_labels(n, blocks)
b2 = b1[rng.permutation(n)]                   # regime B: memberships reshuffled

r = np.empty((days, n))
r[:switch] = beta * m[:switch, None] + 0.7 * f[:switch][:, b1] + 0.5 * eps[:switch]
r[switch:] = beta * m[switch:, None] + 0.7 * f[switch:][:, b2] + 0.5 * eps[switch:]

tickers = tuple(f"S{i:03d}" for i in range(n))
dates = tuple(str(np.datetime64("2000-01-03") + np.timedelta64(i, "D")) for i in range(days))
panel = ReturnsPanel(dates=dates, tickers=tickers, returns=r, detrended=False)

rr = run_rolling(panel, length=200, shift=200, detrend=False, jobs=1)
print(f"{len(rr)} windows of 200 days, switch falls between windows 4 and 5")
print("clusters per window:", rr.n_clusters_series.tolist())

print("\npersistence (ARI of window k vs k-1):")
for k, v in persistence_series(rr):
    bar = "#" * int(round(30 * max(v, 0)))
    print(f"  window {k}: {v:+.3f} {bar}")

s = clustering_similarity_matrix(rr)
z = metacorrelation_matrix(rr)

def block_contrast(mat, k=5):
    w, c = [], []
    for a in range(mat.shape[0]):
        for b in range(a + 1, mat.shape[0]):
            (w if (a < k) == (b < k) else c).append(mat[a, b])
    return np.mean(w) - np.mean(c)

print(f"\nwithin-regime minus cross-regime similarity, s: {block_contrast(s):.3f}")
print(f"same contrast on the metacorrelation z:          {block_contrast(z):.3f}")
print("(z is flatter: the market component correlates windows across regimes)")

# Track regime-A blocks through time. Each one should be found (at some
# size) before the switch and vanish after it.
bench = Clustering(tickers=tickers, labels=b1.copy())
sect = SectorTable(
    tickers=tickers,
    industry=tuple(f"IND{c}" for c in b1),
    supersector=tuple(f"SUP{c}" for c in b1),
    sector=tuple(f"SEC{c}" for c in b1),
    subsector=tuple(f"SUB{c}" for c in b1),
)
print("\nmatched size S of each regime-A block per window (0 = no significant match):")
for rec in track_cluster_evolution(bench, rr, sect, alpha=0.05):
    print(f"  block {rec.cluster_id}: {rec.sizes.tolist()}")
