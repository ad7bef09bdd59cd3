import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import clustering_from
from corrnet.compare import (
    adjusted_rand_index,
    contingency_table,
    hypergeometric_pvalue,
    match_similar_clusters,
)


def ari_pair_oracle(a, b):
    """ARI from the raw pair-agreement counts, in exact rationals."""
    n = len(a)
    together_a = together_b = together_both = 0
    for i, j in itertools.combinations(range(n), 2):
        sa = a[i] == a[j]
        sb = b[i] == b[j]
        together_a += sa
        together_b += sb
        together_both += sa and sb
    total = Fraction(n * (n - 1), 2)
    expected = Fraction(together_a) * Fraction(together_b) / total
    maximum = Fraction(together_a + together_b, 2)
    if maximum == expected:
        return Fraction(1) if together_a == together_b == together_both else Fraction(0)
    return (Fraction(together_both) - expected) / (maximum - expected)


def pvalue_enum_oracle(n, size_ref, size_cand, k):
    """P(X >= k) by enumerating every size_ref-subset of an n-set, as a Fraction."""
    universe = range(n)
    cand = set(range(size_cand))
    hits = sum(
        1
        for pick in itertools.combinations(universe, size_ref)
        if len(cand & set(pick)) >= k
    )
    return Fraction(hits, math.comb(n, size_ref))


def pmf_enum_oracle(n, size_ref, size_cand, k):
    universe = range(n)
    cand = set(range(size_cand))
    hits = sum(
        1
        for pick in itertools.combinations(universe, size_ref)
        if len(cand & set(pick)) == k
    )
    return Fraction(hits, math.comb(n, size_ref))


def test_ari_hand_case_is_minus_one_ninth():
    a = clustering_from([0, 0, 0, 1, 1, 1])
    b = clustering_from([0, 0, 1, 0, 1, 1])
    assert adjusted_rand_index(a, b, exact=True) == Fraction(-1, 9)
    assert abs(adjusted_rand_index(a, b) + 1 / 9) < 1e-15


def test_ari_identical_and_permuted_labels():
    a = clustering_from([0, 0, 1, 1, 2, 2])
    b = clustering_from([5, 5, 3, 3, 9, 9])  # same partition, renamed
    assert adjusted_rand_index(a, b) == 1.0
    assert adjusted_rand_index(a, a) == 1.0


def test_ari_matches_pair_oracle_on_random_partitions():
    rng = np.random.default_rng(30)
    for _ in range(500):
        n = int(rng.integers(2, 9))
        la = rng.integers(0, 4, size=n).tolist()
        lb = rng.integers(0, 4, size=n).tolist()
        got = adjusted_rand_index(clustering_from(la), clustering_from(lb), exact=True)
        assert got == ari_pair_oracle(la, lb), (la, lb)


def test_ari_degenerate_partitions():
    ones = clustering_from([0, 0, 0, 0])
    singles = clustering_from([0, 1, 2, 3])
    assert adjusted_rand_index(ones, ones) == 1.0
    assert adjusted_rand_index(singles, singles) == 1.0
    assert adjusted_rand_index(ones, singles) == 0.0


def test_ari_symmetry():
    rng = np.random.default_rng(31)
    for _ in range(50):
        n = int(rng.integers(3, 10))
        a = clustering_from(rng.integers(0, 3, size=n).tolist())
        b = clustering_from(rng.integers(0, 3, size=n).tolist())
        assert adjusted_rand_index(a, b) == adjusted_rand_index(b, a)


def test_ari_requires_same_tickers():
    a = clustering_from([0, 1], tickers=("A", "B"))
    b = clustering_from([0, 1], tickers=("A", "C"))
    with pytest.raises(ValueError, match="different ticker sets"):
        adjusted_rand_index(a, b)


def test_contingency_table_counts():
    a = clustering_from([0, 0, 1, 1, 1])
    b = clustering_from([0, 1, 1, 1, 2])
    ct = contingency_table(a, b)
    np.testing.assert_array_equal(ct.m, [[1, 1, 0], [0, 2, 1]])
    assert ct.total == 5
    np.testing.assert_array_equal(ct.row_sums, [2, 3])
    np.testing.assert_array_equal(ct.col_sums, [1, 3, 1])


def test_hypergeometric_tail_matches_enumeration():
    rng = np.random.default_rng(32)
    for _ in range(60):
        n = int(rng.integers(2, 13))
        size_ref = int(rng.integers(1, n + 1))
        size_cand = int(rng.integers(1, n + 1))
        lo = max(0, size_ref + size_cand - n)
        hi = min(size_ref, size_cand)
        k = int(rng.integers(lo, hi + 1))
        got = hypergeometric_pvalue(n, size_ref, size_cand, k)
        want = pvalue_enum_oracle(n, size_ref, size_cand, k)
        assert abs(got - float(want)) < 1e-12, (n, size_ref, size_cand, k)


def test_hypergeometric_pmf_matches_enumeration():
    rng = np.random.default_rng(33)
    for _ in range(60):
        n = int(rng.integers(2, 13))
        size_ref = int(rng.integers(1, n + 1))
        size_cand = int(rng.integers(1, n + 1))
        lo = max(0, size_ref + size_cand - n)
        hi = min(size_ref, size_cand)
        k = int(rng.integers(lo, hi + 1))
        got = hypergeometric_pvalue(n, size_ref, size_cand, k, point_mass=True)
        want = pmf_enum_oracle(n, size_ref, size_cand, k)
        assert abs(got - float(want)) < 1e-12, (n, size_ref, size_cand, k)


def test_hypergeometric_known_values():
    # overlap 3 of ref 3, cand 4, n 10: C(4,3)/C(10,3) = 4/120
    assert abs(hypergeometric_pvalue(10, 3, 4, 3) - 4 / 120) < 1e-15
    assert hypergeometric_pvalue(10, 3, 4, 0) == 1.0


def test_hypergeometric_tail_monotone_and_normalized():
    n, size_ref, size_cand = 20, 7, 9
    ks = range(0, min(size_ref, size_cand) + 1)
    tail = [hypergeometric_pvalue(n, size_ref, size_cand, k) for k in ks]
    assert tail[0] == 1.0
    assert all(a >= b for a, b in zip(tail, tail[1:]))
    pmf = [hypergeometric_pvalue(n, size_ref, size_cand, k, point_mass=True) for k in ks]
    assert abs(sum(pmf) - 1.0) < 1e-12


def test_hypergeometric_large_counts_stable():
    # log-space evaluation keeps full-universe counts finite
    p = hypergeometric_pvalue(342, 40, 35, 30)
    assert 0.0 < p < 1e-20


def test_hypergeometric_validation():
    with pytest.raises(ValueError, match="infeasible"):
        hypergeometric_pvalue(10, 4, 4, 5)
    with pytest.raises(ValueError, match="infeasible"):
        hypergeometric_pvalue(10, 12, 4, 2)
    with pytest.raises(ValueError, match="infeasible"):
        hypergeometric_pvalue(10, 9, 9, 2)  # overlap at least 8 is forced
    with pytest.raises(ValueError, match="non-negative"):
        hypergeometric_pvalue(10, -1, 4, 0)


def test_match_selects_largest_significant():
    # reference covers clusters 0 and 1 completely; both are significant,
    # the larger one wins
    cand = clustering_from([0] * 5 + [1] * 9 + [2] * 46)
    ref = list(cand.tickers[:14])
    res = match_similar_clusters(ref, cand, alpha=0.01)
    assert res.cluster_ids == (0, 1, 2)
    np.testing.assert_array_equal(res.overlaps, [5, 9, 0])
    assert res.threshold == pytest.approx(0.01 / 3)
    assert res.matched[0] and res.matched[1] and not res.matched[2]
    assert res.selected == 1


def test_match_size_tie_goes_to_lower_id():
    cand = clustering_from([0] * 7 + [1] * 7 + [2] * 46)
    ref = list(cand.tickers[:14])
    res = match_similar_clusters(ref, cand, alpha=0.01)
    assert res.matched[0] and res.matched[1]
    assert res.selected == 0


def test_match_none_when_overlap_is_chance_level():
    rng = np.random.default_rng(34)
    cand = clustering_from(rng.integers(0, 4, size=40).tolist())
    tickers = cand.tickers
    ref = list(tickers[::4])  # scattered picks, one in four
    res = match_similar_clusters(ref, cand, alpha=0.01)
    assert res.selected is None
    assert not res.matched.any()


def test_match_bonferroni_uses_explicit_test_count():
    cand = clustering_from([0] * 5 + [1] * 5)
    ref = list(cand.tickers[:5])
    r1 = match_similar_clusters(ref, cand, alpha=0.01, n_tests=1)
    r5 = match_similar_clusters(ref, cand, alpha=0.01, n_tests=5)
    assert r1.threshold == 0.01
    assert r5.threshold == pytest.approx(0.002)


def test_match_validation():
    cand = clustering_from([0, 0, 1, 1])
    with pytest.raises(ValueError, match="alpha"):
        match_similar_clusters(list(cand.tickers[:2]), cand, alpha=1.5)
    with pytest.raises(ValueError, match="empty"):
        match_similar_clusters([], cand)
    with pytest.raises(ValueError, match="not in candidate universe"):
        match_similar_clusters(["NOPE"], cand)
