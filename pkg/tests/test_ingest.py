import math

import numpy as np
import pytest

from corrnet.ingest import (
    BlockModelSpec,
    block_labels,
    compute_log_returns,
    generate_synthetic_panel,
    load_price_panel,
    load_sector_table,
)


def write(path, text):
    path.write_text(text)
    return str(path)


def test_log_returns_match_hand_computation(tmp_path):
    p = write(
        tmp_path / "p.csv",
        "date,AAA,BBB\n2020-01-01,100,50\n2020-01-02,110,45\n2020-01-03,121,54\n",
    )
    panel, report = load_price_panel(p)
    returns = compute_log_returns(panel)
    assert returns.tickers == ("AAA", "BBB")
    assert returns.dates == ("2020-01-02", "2020-01-03")
    expected = [
        [math.log(110 / 100), math.log(45 / 50)],
        [math.log(121 / 110), math.log(54 / 45)],
    ]
    np.testing.assert_allclose(returns.returns, expected, rtol=0, atol=1e-15)
    assert report.n_missing == 0


def test_reject_policy_names_ticker_and_date(tmp_path):
    p = write(tmp_path / "p.csv", "date,AAA,BBB\n2020-01-01,100,50\n2020-01-02,,45\n")
    with pytest.raises(ValueError, match="'AAA' on 2020-01-02"):
        load_price_panel(p)


def test_forward_fill_repeats_previous_price(tmp_path):
    p = write(
        tmp_path / "p.csv",
        "date,AAA,BBB\n2020-01-01,100,50\n2020-01-02,,45\n2020-01-03,121,54\n",
    )
    panel, report = load_price_panel(p, missing_policy="forward_fill")
    assert panel.prices[1, 0] == 100.0
    assert report.filled == (("2020-01-02", "AAA"),)
    assert report.n_missing == 1


def test_forward_fill_rejects_leading_gap(tmp_path):
    p = write(tmp_path / "p.csv", "date,AAA,BBB\n2020-01-01,,50\n2020-01-02,110,45\n")
    with pytest.raises(ValueError, match="leading gap"):
        load_price_panel(p, missing_policy="forward_fill")


def test_drop_ticker_removes_gapped_column(tmp_path):
    p = write(
        tmp_path / "p.csv",
        "date,AAA,BBB\n2020-01-01,100,50\n2020-01-02,,45\n2020-01-03,121,54\n",
    )
    panel, report = load_price_panel(p, missing_policy="drop_ticker")
    assert panel.tickers == ("BBB",)
    assert report.dropped_tickers == ("AAA",)


def test_nonincreasing_dates_rejected(tmp_path):
    p = write(
        tmp_path / "p.csv",
        "date,AAA\n2020-01-02,100\n2020-01-01,110\n",
    )
    with pytest.raises(ValueError, match="not strictly increasing"):
        load_price_panel(p)


def test_nonpositive_price_rejected(tmp_path):
    p = write(tmp_path / "p.csv", "date,AAA\n2020-01-01,100\n2020-01-02,-3\n")
    with pytest.raises(ValueError, match="non-positive"):
        load_price_panel(p)


def test_duplicate_ticker_columns_rejected(tmp_path):
    p = write(tmp_path / "p.csv", "date,AAA,AAA\n2020-01-01,1,2\n2020-01-02,3,4\n")
    with pytest.raises(ValueError, match="duplicate"):
        load_price_panel(p)


def test_unknown_missing_policy_rejected(tmp_path):
    p = write(tmp_path / "p.csv", "date,AAA\n2020-01-01,1\n2020-01-02,2\n")
    with pytest.raises(ValueError, match="policy"):
        load_price_panel(p, missing_policy="mean")


def test_sector_table_roundtrip(tmp_path):
    p = write(
        tmp_path / "s.csv",
        "ticker,industry,supersector,sector,subsector\n"
        "AAA,Financials,Banks,Banks,Banks\n"
        "BBB,Industrials,Goods,Machines,Tools\n",
    )
    table = load_sector_table(p)
    assert table.tickers == ("AAA", "BBB")
    assert table.labels_for(("BBB", "AAA"), "industry") == ("Industrials", "Financials")
    assert table.labels_for(("AAA",), "subsector") == ("Banks",)
    with pytest.raises(ValueError, match="unknown level"):
        table.labels_for(("AAA",), "megasector")
    with pytest.raises(ValueError, match="no sector labels"):
        table.labels_for(("ZZZ",), "industry")


def test_block_labels_contiguous_and_balanced():
    lab = block_labels(342, 9)
    assert lab.shape == (342,)
    assert lab.min() == 0 and lab.max() == 8
    sizes = np.bincount(lab)
    assert sizes.tolist() == [38] * 9
    assert (np.diff(lab) >= 0).all()
    # non-divisible: sizes differ by at most one
    sizes = np.bincount(block_labels(10, 3))
    assert sorted(sizes.tolist()) == [3, 3, 4]


def test_generator_is_deterministic_and_shaped():
    spec = BlockModelSpec(12, 3, 0.7, 0.5, 0.5, 40, seed=5)
    a, pa = generate_synthetic_panel(spec)
    b, pb = generate_synthetic_panel(spec)
    np.testing.assert_array_equal(a.returns, b.returns)
    assert a.returns.shape == (40, 12)
    assert len(a.tickers) == 12 and len(set(a.tickers)) == 12
    assert tuple(pa.labels) == tuple(pb.labels)
    np.testing.assert_array_equal(np.asarray(pa.labels), block_labels(12, 3))


def test_generator_block_signal_visible():
    panel, planted = generate_synthetic_panel(BlockModelSpec(12, 3, 0.7, 0.0, 0.5, 4000, seed=0))
    rho = np.corrcoef(panel.returns, rowvar=False)
    lab = np.asarray(planted.labels)
    same = lab[:, None] == lab[None, :]
    off = ~np.eye(12, dtype=bool)
    within = rho[same & off].mean()
    across = rho[~same].mean()
    # loadings 0.7/0.5 put the population within-block correlation at 0.662
    assert within > 0.6
    assert abs(across) < 0.05


def test_generator_validation():
    with pytest.raises(ValueError, match="blocks"):
        generate_synthetic_panel(BlockModelSpec(3, 5, 0.5, 0.5, 0.5, 10, seed=0))
    with pytest.raises(ValueError, match="noise_sigma"):
        generate_synthetic_panel(BlockModelSpec(6, 2, 0.5, 0.5, 0.0, 10, seed=0))
    with pytest.raises(ValueError, match="block_loading"):
        generate_synthetic_panel(BlockModelSpec(6, 2, 1.5, 0.5, 0.5, 10, seed=0))
