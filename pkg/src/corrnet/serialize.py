"""Deterministic readers and writers for the on-disk formats.

Every writer here produces the same bytes for the same data: floats are
rendered with repr (shortest round-trip form), newlines are always "\\n",
JSON keys are sorted, and the binary correlation cache pins its zip
metadata. Readers accept anything the writers emit.
"""

from __future__ import annotations

import csv
import io
import json
import zipfile

import numpy as np
from numpy.lib import format as npformat

from .dbht import Clustering
from .estimator import CorrelationMatrix
from .filtergraph import FilteredGraph


def _cell(x) -> str:
    """One CSV cell: shortest round-trip form for floats, quoted if needed."""
    if isinstance(x, (bool, np.bool_)):
        s = "true" if x else "false"
    elif isinstance(x, (int, np.integer)):
        s = str(int(x))
    elif isinstance(x, (float, np.floating)):
        s = repr(float(x))
    else:
        s = str(x)
    if any(ch in s for ch in ',"\n\r'):
        s = '"' + s.replace('"', '""') + '"'
    return s


def _write_lines(path, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for row in rows:
            fh.write(",".join(_cell(x) for x in row))
            fh.write("\n")


def _read_rows(path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return [row for row in csv.reader(fh) if row]


def write_table_csv(path, columns, rows) -> None:
    _write_lines(path, [list(columns), *rows])


def read_table_csv(path):
    """Header list plus data rows (cells as strings; callers coerce)."""
    rows = _read_rows(path)
    if not rows:
        raise ValueError(f"{path}: empty table")
    return rows[0], rows[1:]


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(obj, indent=2, sort_keys=True))
        fh.write("\n")


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


# -- dense matrices: label header row and column ------------------------------


def write_matrix_csv(path, labels, m) -> None:
    m = np.asarray(m, dtype=float)
    labels = [str(lab) for lab in labels]
    if m.shape != (len(labels), len(labels)):
        raise ValueError("matrix shape does not match its labels")
    rows = [["", *labels]]
    for lab, row in zip(labels, m):
        rows.append([lab, *[float(v) for v in row]])
    _write_lines(path, rows)


def read_matrix_csv(path):
    rows = _read_rows(path)
    if not rows or rows[0][:1] != [""]:
        raise ValueError(f"{path}: not a labeled matrix file")
    labels = tuple(rows[0][1:])
    n = len(labels)
    if len(rows) != n + 1:
        raise ValueError(f"{path}: expected {n} matrix rows, found {len(rows) - 1}")
    m = np.empty((n, n))
    for i, row in enumerate(rows[1:]):
        if row[0] != labels[i] or len(row) != n + 1:
            raise ValueError(f"{path}: malformed matrix row {i + 1}")
        m[i] = [float(v) for v in row[1:]]
    return labels, m


def write_matrix_json(path, labels, m) -> None:
    m = np.asarray(m, dtype=float)
    labels = [str(lab) for lab in labels]
    if m.shape != (len(labels), len(labels)):
        raise ValueError("matrix shape does not match its labels")
    write_json(path, {"labels": labels, "matrix": [[float(v) for v in row] for row in m]})


def read_matrix_json(path):
    obj = read_json(path)
    return tuple(obj["labels"]), np.asarray(obj["matrix"], dtype=float)


# -- clusterings ---------------------------------------------------------------


def write_clustering_csv(path, clustering: Clustering) -> None:
    rows = [(t, int(lab)) for t, lab in zip(clustering.tickers, clustering.labels)]
    write_table_csv(path, ["ticker", "cluster_id"], rows)


def read_clustering_csv(path) -> Clustering:
    header, rows = read_table_csv(path)
    if header != ["ticker", "cluster_id"]:
        raise ValueError(f"{path}: expected header ticker,cluster_id")
    try:
        labels = np.array([int(r[1]) for r in rows], dtype=np.int64)
    except (IndexError, ValueError) as e:
        raise ValueError(f"{path}: malformed clustering row: {e}") from None
    return Clustering(tickers=tuple(r[0] for r in rows), labels=labels)


# -- filtered graphs: edge list plus sidecar -----------------------------------


def write_graph(csv_path, json_path, graph: FilteredGraph) -> None:
    rows = [
        (graph.tickers[i], graph.tickers[j], rho, dist)
        for i, j, rho, dist in graph.edges()
    ]
    write_table_csv(csv_path, ["src", "dst", "rho", "dist"], rows)
    write_json(
        json_path,
        {
            "kind": graph.kind,
            "n": graph.n,
            "window_id": graph.window_id,
            "tickers": list(graph.tickers),
        },
    )


def read_graph(csv_path, json_path) -> FilteredGraph:
    header, rows = read_table_csv(csv_path)
    if header != ["src", "dst", "rho", "dist"]:
        raise ValueError(f"{csv_path}: expected header src,dst,rho,dist")
    meta = read_json(json_path)
    tickers = tuple(meta["tickers"])
    index = {t: i for i, t in enumerate(tickers)}
    try:
        src = np.array([index[r[0]] for r in rows], dtype=np.int64)
        dst = np.array([index[r[1]] for r in rows], dtype=np.int64)
    except KeyError as e:
        raise ValueError(f"{csv_path}: edge endpoint {e} missing from sidecar tickers") from None
    try:
        rho = np.array([float(r[2]) for r in rows])
        dist = np.array([float(r[3]) for r in rows])
    except (IndexError, ValueError) as e:
        raise ValueError(f"{csv_path}: malformed edge row: {e}") from None
    return FilteredGraph(
        tickers=tickers,
        src=src,
        dst=dst,
        rho=rho,
        dist=dist,
        kind=meta["kind"],
        embedding=None,
        window_id=meta["window_id"],
    )


# -- binary correlation cache ---------------------------------------------------

# np.savez stamps current time into the zip, so it is rebuilt here with
# pinned entry metadata; np.load reads the result as a normal npz.
_EPOCH = (1980, 1, 1, 0, 0, 0)


def write_corr_cache(path, correlations) -> None:
    correlations = list(correlations)
    if not correlations:
        raise ValueError("nothing to cache")
    tickers = correlations[0].tickers
    ids = []
    for c in correlations:
        if c.window_id is None:
            raise ValueError("cache entries need a window_id key")
        if c.tickers != tickers:
            raise ValueError("cache entries are over different ticker sets")
        ids.append(str(c.window_id))
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate window_id keys")

    def entry(zf, name, arr):
        buf = io.BytesIO()
        npformat.write_array(buf, np.ascontiguousarray(arr))
        zf.writestr(zipfile.ZipInfo(name + ".npy", date_time=_EPOCH), buf.getvalue())

    with zipfile.ZipFile(path, "w", zipfile.ZIP_STORED) as zf:
        entry(zf, "tickers", np.array(tickers, dtype="U"))
        entry(zf, "window_ids", np.array(ids, dtype="U"))
        for wid, c in zip(ids, correlations):
            entry(zf, f"corr_{wid}", c.rho)


def read_corr_cache(path):
    with np.load(path) as data:
        tickers = tuple(str(t) for t in data["tickers"])
        out = []
        for wid in data["window_ids"]:
            wid = str(wid)
            out.append(
                CorrelationMatrix(tickers=tickers, rho=data[f"corr_{wid}"], window_id=wid)
            )
    return out
