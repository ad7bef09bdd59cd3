import hashlib
import json
import math

import numpy as np
import pytest

from conftest import clustering_from, random_distance
from corrnet.estimator import CorrelationMatrix
from corrnet.filtergraph import build_mst, build_pmfg
from corrnet.serialize import (
    read_clustering_csv,
    read_corr_cache,
    read_graph,
    read_json,
    read_matrix_csv,
    read_matrix_json,
    read_table_csv,
    write_clustering_csv,
    write_corr_cache,
    write_graph,
    write_json,
    write_matrix_csv,
    write_matrix_json,
    write_table_csv,
)


def sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


AWKWARD = [0.1, 1 / 3, 1e-17, 1e300, -2.5, 123456789.123456789, 5e-324]


def test_table_roundtrip_with_quoting(tmp_path):
    p = tmp_path / "t.csv"
    rows = [
        ["plain", 3, 0.1],
        ['with,comma', -1, 1 / 3],
        ['with"quote', 0, 2.0],
        ["with\nnewline", 7, -0.0],
    ]
    write_table_csv(p, ["name", "count", "value"], rows)
    header, got = read_table_csv(p)
    assert header == ["name", "count", "value"]
    assert [r[0] for r in got] == ["plain", "with,comma", 'with"quote', "with\nnewline"]
    assert [float(r[2]) for r in got] == [0.1, 1 / 3, 2.0, -0.0]


def test_float_cells_roundtrip_exactly(tmp_path):
    p = tmp_path / "f.csv"
    write_table_csv(p, ["x"], [[v] for v in AWKWARD])
    _, rows = read_table_csv(p)
    assert [float(r[0]) for r in rows] == AWKWARD


def test_csv_writer_is_byte_stable(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    rows = [["r", i, i / 7] for i in range(20)]
    write_table_csv(a, ["n", "i", "x"], rows)
    write_table_csv(b, ["n", "i", "x"], rows)
    assert sha(a) == sha(b)
    assert b"\r" not in a.read_bytes()


def test_json_writer_sorted_and_stable(tmp_path):
    p = tmp_path / "o.json"
    write_json(p, {"zeta": 1, "alpha": [1.5, None, "x"], "mid": {"b": 2, "a": 1}})
    raw = p.read_text()
    assert raw.index('"alpha"') < raw.index('"mid"') < raw.index('"zeta"')
    assert raw.endswith("\n")
    assert read_json(p) == {"zeta": 1, "alpha": [1.5, None, "x"], "mid": {"b": 2, "a": 1}}


def test_matrix_csv_roundtrip(tmp_path):
    p = tmp_path / "m.csv"
    rng = np.random.default_rng(50)
    m = rng.standard_normal((4, 4))
    write_matrix_csv(p, ("A", "B", "C", "D"), m)
    labels, got = read_matrix_csv(p)
    assert labels == ("A", "B", "C", "D")
    np.testing.assert_array_equal(got, m)  # repr round-trip is exact


def test_matrix_csv_rejects_malformed(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text(",A,B\nA,1.0,2.0\n")
    with pytest.raises(ValueError, match="row"):
        read_matrix_csv(p)
    p.write_text(",A,B\nX,1.0,2.0\nB,3.0,4.0\n")
    with pytest.raises(ValueError, match="malformed matrix row"):
        read_matrix_csv(p)


def test_matrix_json_roundtrip(tmp_path):
    p = tmp_path / "m.json"
    m = np.array([[1.0, 0.25], [0.25, 1.0]])
    write_matrix_json(p, ("X", "Y"), m)
    labels, got = read_matrix_json(p)
    assert labels == ("X", "Y")
    np.testing.assert_array_equal(got, m)


def test_clustering_roundtrip(tmp_path):
    p = tmp_path / "c.csv"
    c = clustering_from([2, 0, 1, 0], tickers=("N1", "N2", "N3", "N4"))
    write_clustering_csv(p, c)
    got = read_clustering_csv(p)
    assert got.tickers == c.tickers
    assert tuple(got.labels) == tuple(c.labels)
    header, _ = read_table_csv(p)
    assert header == ["ticker", "cluster_id"]


def test_graph_roundtrip_preserves_edges(tmp_path):
    rng = np.random.default_rng(51)
    for builder in (build_mst, build_pmfg):
        g = builder(random_distance(9, rng))
        csv_p, json_p = tmp_path / f"{g.kind}.csv", tmp_path / f"{g.kind}.json"
        write_graph(csv_p, json_p, g)
        got = read_graph(csv_p, json_p)
        assert got.kind == g.kind
        assert got.tickers == g.tickers
        np.testing.assert_array_equal(got.src, g.src)
        np.testing.assert_array_equal(got.dst, g.dst)
        np.testing.assert_array_equal(got.rho, g.rho)
        np.testing.assert_array_equal(got.dist, g.dist)


def test_graph_reader_validates(tmp_path):
    rng = np.random.default_rng(52)
    g = build_mst(random_distance(5, rng))
    csv_p, json_p = tmp_path / "g.csv", tmp_path / "g.json"
    write_graph(csv_p, json_p, g)
    lines = csv_p.read_text().splitlines()
    cells = lines[1].split(",")
    cells[0] = "GHOST"
    lines[1] = ",".join(cells)
    csv_p.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValueError, match="missing from sidecar"):
        read_graph(csv_p, json_p)
    write_graph(csv_p, json_p, g)
    lines = csv_p.read_text().splitlines()
    cells = lines[1].split(",")
    cells[2] = "not-a-number"
    lines[1] = ",".join(cells)
    csv_p.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValueError, match="malformed edge row"):
        read_graph(csv_p, json_p)


def test_corr_cache_roundtrip_and_determinism(tmp_path):
    rng = np.random.default_rng(53)
    mats = []
    for k in range(3):
        rho = np.corrcoef(rng.standard_normal((40, 6)), rowvar=False)
        mats.append(CorrelationMatrix(tickers=("A", "B", "C", "D", "E", "F"), rho=rho, window_id=str(k)))
    p1, p2 = tmp_path / "c1.npz", tmp_path / "c2.npz"
    write_corr_cache(p1, mats)
    write_corr_cache(p2, mats)
    assert sha(p1) == sha(p2)  # pinned zip metadata, no timestamps
    got = read_corr_cache(p1)
    assert [c.window_id for c in got] == ["0", "1", "2"]
    for a, b in zip(got, mats):
        assert a.tickers == b.tickers
        np.testing.assert_array_equal(a.rho, b.rho)


def test_corr_cache_validates(tmp_path):
    rho = np.eye(2)
    a = CorrelationMatrix(tickers=("A", "B"), rho=rho, window_id="0")
    dup = CorrelationMatrix(tickers=("A", "B"), rho=rho, window_id="0")
    nowid = CorrelationMatrix(tickers=("A", "B"), rho=rho)
    other = CorrelationMatrix(tickers=("A", "C"), rho=rho, window_id="1")
    with pytest.raises(ValueError, match="duplicate"):
        write_corr_cache(tmp_path / "x.npz", [a, dup])
    with pytest.raises(ValueError, match="window_id"):
        write_corr_cache(tmp_path / "x.npz", [nowid])
    with pytest.raises(ValueError, match="ticker"):
        write_corr_cache(tmp_path / "x.npz", [a, other])
    with pytest.raises(ValueError, match="nothing"):
        write_corr_cache(tmp_path / "x.npz", [])


def test_nan_and_inf_cells_roundtrip(tmp_path):
    p = tmp_path / "s.csv"
    write_table_csv(p, ["x"], [[math.inf], [-math.inf], [math.nan]])
    _, rows = read_table_csv(p)
    assert float(rows[0][0]) == math.inf
    assert float(rows[1][0]) == -math.inf
    assert math.isnan(float(rows[2][0]))
