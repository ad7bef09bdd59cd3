import numpy as np

from corrnet.dbht import Clustering


def random_distance(n, rng, days=None):
    """Distance matrix from correlations of a random factor-ish panel.

    Using actual correlated data (not raw random symmetric noise) keeps the
    entries inside the metric range the builders expect and makes ties
    measure-zero.
    """
    days = days or max(3 * n, 30)
    x = rng.standard_normal((days, n)) + 0.3 * rng.standard_normal((days, 1))
    rho = np.corrcoef(x, rowvar=False)
    d = np.sqrt(np.clip(2.0 * (1.0 - rho), 0.0, None))
    np.fill_diagonal(d, 0.0)
    return d


def clustering_from(labels, tickers=None):
    labels = list(labels)
    if tickers is None:
        tickers = tuple(f"T{i:02d}" for i in range(len(labels)))
    return Clustering(tickers=tuple(tickers), labels=tuple(int(v) for v in labels))
