"""
Filtering a correlation matrix into a graph
===========================================

A correlation matrix over N assets has N(N-1)/2 numbers; the filtered
graphs keep only the strongest structure. The MST keeps N-1 edges, the
PMFG keeps 3(N-2) while staying planar, and the MST is always inside the
PMFG.
"""

import numpy as np

from corrnet import (
    BlockModelSpec,
    build_mst,
    build_pmfg,
    correlation_to_distance,
    detrend_market_mode,
    exponential_weights,
    generate_synthetic_panel,
    is_planar,
    weighted_correlation,
)

spec = BlockModelSpec(
    n_assets=40, n_blocks=5, block_loading=0.7, market_loading=0.4,
    noise_sigma=0.5, n_days=1000, seed=7,
)
panel, planted = generate_synthetic_panel(spec)

# estimation chain: market residuals -> weighted correlation -> distance.
# Recent days get more weight; theta is the decay scale in days.
residuals = detrend_market_mode(panel.returns).residuals
weights = exponential_weights(1000, theta=1000 / 3)
corr = weighted_correlation(residuals, weights, tickers=panel.tickers)
dist = correlation_to_distance(corr)
print(f"distance range on the off-diagonal: "
      f"{dist.d[np.triu_indices(40, 1)].min():.3f} .. "
      f"{dist.d[np.triu_indices(40, 1)].max():.3f}  (0 = perfectly correlated, 2 = anti)")

mst = build_mst(dist)
pmfg = build_pmfg(dist)
print(f"MST:  {mst.n_edges} edges")
print(f"PMFG: {pmfg.n_edges} edges = 3(N-2)")

mst_edges = {(int(a), int(b)) for a, b in zip(mst.src, mst.dst)}
pmfg_edges = {(int(a), int(b)) for a, b in zip(pmfg.src, pmfg.dst)}
print("MST contained in PMFG:", mst_edges <= pmfg_edges)

planar, _ = is_planar(list(pmfg_edges), 40)
print("PMFG is planar:", planar)

# adding back the single strongest rejected correlation breaks planarity
rejected = sorted(
    ((dist.d[i, j], i, j) for i in range(40) for j in range(i + 1, 40)
     if (i, j) not in pmfg_edges),
)
d0, i0, j0 = rejected[0]
planar, _ = is_planar(list(pmfg_edges) + [(i0, j0)], 40)
print(f"PMFG + closest rejected pair ({i0},{j0}) at d={d0:.3f} planar: {planar}")

# strongest PMFG edges stay within planted blocks
labels = np.asarray(planted.labels)
order = np.argsort(pmfg.dist)[:10]
print("ten strongest PMFG edges (ticker, ticker, rho, same planted block?):")
for k in order:
    i, j = int(pmfg.src[k]), int(pmfg.dst[k])
    print(f"  {pmfg.tickers[i]} {pmfg.tickers[j]}  rho={pmfg.rho[k]:+.3f}  "
          f"{'same' if labels[i] == labels[j] else 'DIFFERENT'}")

frac = np.mean([labels[int(a)] == labels[int(b)] for a, b in zip(pmfg.src, pmfg.dst)])
print(f"fraction of PMFG edges inside a planted block: {frac:.2f}")
