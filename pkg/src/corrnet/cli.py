"""Command-line front end: reproducible runs over CSV price panels.

One binary with verb subcommands. Every file-writing command first drops a
run_manifest.json (resolved configuration, input digests, tool version)
into the output directory so a result can always be traced to its inputs.
Defaults reproduce the studied configuration: 1000-day windows shifted by
30 days, exponential weight decay of a third of the window, significance
0.01.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import serialize as ser
from .compare import adjusted_rand_index
from .dbht import Clustering, dbht_cluster
from .estimator import (
    CorrelationMatrix,
    correlation_to_distance,
    detrend_market_mode,
    exponential_weights,
    metacorrelation,
    weighted_correlation,
)
from .filtergraph import build_mst, build_pmfg
from .ingest import (
    SECTOR_LEVELS,
    BlockModelSpec,
    compute_log_returns,
    generate_synthetic_panel,
    load_price_panel,
    load_sector_table,
)
from .pipeline import (
    bubble_summary,
    clustering_similarity_matrix,
    icb_similarity_series,
    metacorrelation_matrix,
    persistence_series,
    run_rolling,
    track_cluster_evolution,
)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _date_str(d) -> str:
    return str(d)[:10]


def _write_manifest(out_dir: Path, command: str, config: dict, inputs: dict) -> None:
    # worker count is deliberately not recorded: it cannot affect outputs
    manifest = {
        "artifact": "corrnet",
        "version": __version__,
        "command": command,
        "config": config,
        "inputs": {
            name: {"path": str(p), "sha256": _sha256(p)} for name, p in inputs.items()
        },
        "created_utc": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
    }
    ser.write_json(out_dir / "run_manifest.json", manifest)


def _make_out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _resolve_jobs(flag_value) -> int:
    if flag_value is None:
        env = os.environ.get("CORRNET_JOBS", "").strip()
        if not env:
            return 1
        try:
            flag_value = int(env)
        except ValueError:
            raise ValueError(f"CORRNET_JOBS must be an integer, got {env!r}") from None
    if flag_value < 1:
        raise ValueError("jobs must be >= 1")
    return int(flag_value)


# short flag spellings for the loader's policy names
_MISSING_POLICY = {"reject": "reject", "ffill": "forward_fill", "drop": "drop_ticker"}


def _load_returns(args):
    panel, _report = load_price_panel(
        args.prices, missing_policy=_MISSING_POLICY[args.missing]
    )
    return compute_log_returns(panel)


def _theta_config(args, length: int):
    """(value passed to the pipeline, value recorded in the manifest)."""
    if args.uniform:
        return math.inf, None
    if args.theta is not None:
        return float(args.theta), float(args.theta)
    return length / 3, length / 3


def _estimate_full_panel(returns_panel, args, theta: float):
    rows = returns_panel.returns
    if not args.no_detrend:
        rows = detrend_market_mode(rows).residuals
    w = exponential_weights(rows.shape[0], theta)
    corr = weighted_correlation(rows, w, tickers=returns_panel.tickers)
    return corr, correlation_to_distance(corr)


def _align_clustering(c: Clustering, tickers) -> Clustering:
    """Reorder a clustering onto a reference ticker order."""
    tickers = tuple(tickers)
    if set(c.tickers) != set(tickers):
        missing = sorted(set(tickers) - set(c.tickers))[:5]
        extra = sorted(set(c.tickers) - set(tickers))[:5]
        raise ValueError(
            f"clustering covers a different ticker set (missing {missing}, extra {extra})"
        )
    index = {t: i for i, t in enumerate(c.tickers)}
    labels = np.array([c.labels[index[t]] for t in tickers], dtype=np.int64)
    return Clustering(tickers=tickers, labels=labels)


# -- subcommands ---------------------------------------------------------------


def cmd_synth(args) -> int:
    out = _make_out_dir(args)
    spec = BlockModelSpec(
        n_assets=args.assets,
        n_blocks=args.blocks,
        block_loading=args.block_loading,
        market_loading=args.market_loading,
        noise_sigma=args.noise_sigma,
        n_days=args.days,
        seed=args.seed,
    )
    _write_manifest(
        out,
        "synth",
        config={
            "assets": spec.n_assets,
            "blocks": spec.n_blocks,
            "days": spec.n_days,
            "seed": spec.seed,
            "block_loading": spec.block_loading,
            "market_loading": spec.market_loading,
            "noise_sigma": spec.noise_sigma,
        },
        inputs={},
    )
    panel, planted = generate_synthetic_panel(spec)

    # price levels that reproduce the generated returns under a log-ratio
    prices = 100.0 * np.exp(np.cumsum(panel.returns, axis=0))
    day_zero = _date_str(np.datetime64(panel.dates[0]) - np.timedelta64(1, "D"))
    rows = [[day_zero, *([100.0] * len(panel.tickers))]]
    for t, d in enumerate(panel.dates):
        rows.append([_date_str(d), *prices[t]])
    ser.write_table_csv(out / "prices.csv", ["date", *panel.tickers], rows)

    ser.write_clustering_csv(out / "planted.csv", planted)
    sector_rows = [
        (t, f"IND{lab}", f"SUP{lab}", f"SEC{lab}", f"SUB{lab}")
        for t, lab in zip(panel.tickers, planted.labels)
    ]
    ser.write_table_csv(
        out / "sectors.csv",
        ["ticker", "industry", "supersector", "sector", "subsector"],
        sector_rows,
    )
    return 0


def cmd_filter(args) -> int:
    out = _make_out_dir(args)
    returns = _load_returns(args)
    theta, theta_rec = _theta_config(args, returns.returns.shape[0])
    _write_manifest(
        out,
        "filter",
        config={
            "kind": args.kind,
            "missing": args.missing,
            "detrend": not args.no_detrend,
            "theta": theta_rec,
            "uniform": args.uniform,
            "pmfg_strategy": args.pmfg_strategy,
        },
        inputs={"prices": args.prices},
    )
    _, dist = _estimate_full_panel(returns, args, theta)
    if args.kind == "mst":
        graph = build_mst(dist)
    else:
        graph = build_pmfg(dist, strategy=args.pmfg_strategy)
    ser.write_graph(out / "edges.csv", out / "edges.json", graph)
    return 0


def cmd_cluster(args) -> int:
    out = _make_out_dir(args)
    returns = _load_returns(args)
    theta, theta_rec = _theta_config(args, returns.returns.shape[0])
    _write_manifest(
        out,
        "cluster",
        config={
            "missing": args.missing,
            "detrend": not args.no_detrend,
            "theta": theta_rec,
            "uniform": args.uniform,
            "pmfg_strategy": args.pmfg_strategy,
        },
        inputs={"prices": args.prices},
    )
    _, dist = _estimate_full_panel(returns, args, theta)
    clustering, dbt, _ = dbht_cluster(dist, strategy=args.pmfg_strategy, details=True)
    ser.write_clustering_csv(out / "clusters.csv", clustering)
    ser.write_json(
        out / "clusters.json",
        {
            "window_id": None,
            "n_clusters": clustering.n_clusters,
            "bubbles": bubble_summary(dbt),
        },
    )
    return 0


def cmd_rolling(args) -> int:
    out = _make_out_dir(args)
    jobs = _resolve_jobs(args.jobs)
    theta, theta_rec = _theta_config(args, args.window_length)
    inputs = {"prices": args.prices, "sectors": args.sectors}
    if args.benchmark:
        inputs["benchmark"] = args.benchmark
    _write_manifest(
        out,
        "rolling",
        config={
            "window_length": args.window_length,
            "shift": args.shift,
            "theta": theta_rec,
            "uniform": args.uniform,
            "detrend": not args.no_detrend,
            "alpha": args.alpha,
            "missing": args.missing,
            "format": args.format,
            "pmfg_strategy": args.pmfg_strategy,
            "benchmark": args.benchmark,
        },
        inputs=inputs,
    )

    panel = _load_returns(args)
    sectors = load_sector_table(args.sectors)
    rr = run_rolling(
        panel,
        args.window_length,
        args.shift,
        theta=theta,
        detrend=not args.no_detrend,
        jobs=jobs,
        strategy=args.pmfg_strategy,
    )
    end_dates = [_date_str(panel.dates[w.end - 1]) for w in rr.windows]

    cdir = out / "clusterings"
    cdir.mkdir(exist_ok=True)
    for w, c, stats in zip(rr.windows, rr.clusterings, rr.bubble_stats):
        ser.write_clustering_csv(cdir / f"window_{w.index:04d}.csv", c)
        ser.write_json(
            cdir / f"window_{w.index:04d}.json",
            {
                "window_id": str(w.index),
                "end_date": end_dates[w.index],
                "n_clusters": c.n_clusters,
                "bubbles": stats,
            },
        )

    if args.benchmark:
        benchmark = _align_clustering(ser.read_clustering_csv(args.benchmark), panel.tickers)
        bench_meta = {"window_id": None, "n_clusters": benchmark.n_clusters, "source": "file"}
    else:
        # default benchmark: the same chain applied to the entire panel
        full_theta, _ = _theta_config(args, panel.returns.shape[0])
        _, dist_full = _estimate_full_panel(panel, args, full_theta)
        benchmark, dbt_full, _ = dbht_cluster(
            dist_full, strategy=args.pmfg_strategy, details=True
        )
        bench_meta = {
            "window_id": None,
            "n_clusters": benchmark.n_clusters,
            "source": "full-period",
            "bubbles": bubble_summary(dbt_full),
        }
    ser.write_clustering_csv(out / "benchmark_clusters.csv", benchmark)
    ser.write_json(out / "benchmark_clusters.json", bench_meta)

    ser.write_table_csv(
        out / "n_clusters.csv",
        ["window", "end_date", "n_clusters"],
        [
            (w.index, end_dates[w.index], int(nc))
            for w, nc in zip(rr.windows, rr.n_clusters_series)
        ],
    )
    pers = persistence_series(rr) if len(rr) >= 2 else []
    ser.write_table_csv(
        out / "persistence.csv",
        ["window", "end_date", "ari"],
        [(k, end_dates[k], v) for k, v in pers],
    )

    wlabels = [str(w.index) for w in rr.windows]
    s = clustering_similarity_matrix(rr)
    z = metacorrelation_matrix(rr)
    if args.format == "json":
        ser.write_matrix_json(out / "similarity_s.json", wlabels, s)
        ser.write_matrix_json(out / "metacorr_z.json", wlabels, z)
    else:
        ser.write_matrix_csv(out / "similarity_s.csv", wlabels, s)
        ser.write_matrix_csv(out / "metacorr_z.csv", wlabels, z)

    for level in SECTOR_LEVELS:
        series = icb_similarity_series(rr, sectors, level)
        ser.write_table_csv(
            out / f"icb_ari_{level}.csv",
            ["window", "end_date", "ari"],
            [(w.index, end_dates[w.index], v) for w, v in zip(rr.windows, series)],
        )

    industries = sorted(set(sectors.labels_for(panel.tickers, "industry")))
    for rec in track_cluster_evolution(benchmark, rr, sectors, alpha=args.alpha):
        rows = [
            (
                w.index,
                end_dates[w.index],
                int(rec.sizes[k]),
                *[rec.histograms[k].get(ind, 0) for ind in industries],
            )
            for k, w in enumerate(rr.windows)
        ]
        ser.write_table_csv(
            out / f"tracking_{rec.cluster_id}.csv",
            ["window", "end_date", "S", *industries],
            rows,
        )

    ser.write_corr_cache(out / "correlations.npz", rr.correlations)
    return 0


def cmd_compare(args) -> int:
    a = ser.read_clustering_csv(args.a)
    b = _align_clustering(ser.read_clustering_csv(args.b), a.tickers)
    print(float(adjusted_rand_index(a, b)))
    return 0


def cmd_metacorr(args) -> int:
    la, ma = ser.read_matrix_csv(args.a)
    lb, mb = ser.read_matrix_csv(args.b)
    if la != lb:
        raise ValueError("matrices are labeled over different tickers")
    v = metacorrelation(
        CorrelationMatrix(tickers=la, rho=ma), CorrelationMatrix(tickers=lb, rho=mb)
    )
    print(float(v))
    return 0


def cmd_track(args) -> int:
    out = _make_out_dir(args)
    cdir = Path(args.clusters)
    files = sorted(cdir.glob("window_*.csv"))
    if not files:
        raise ValueError(f"no window_*.csv clustering files under {cdir}")
    inputs = {"benchmark": args.benchmark, "sectors": args.sectors}
    for f in files:
        inputs[f"clusters/{f.name}"] = f
    _write_manifest(
        out, "track", config={"alpha": args.alpha, "clusters_dir": str(cdir)}, inputs=inputs
    )

    benchmark = ser.read_clustering_csv(args.benchmark)
    sectors = load_sector_table(args.sectors)
    window_ids = []
    end_dates = []
    clusterings = []
    for f in files:
        clusterings.append(_align_clustering(ser.read_clustering_csv(f), benchmark.tickers))
        meta_path = f.with_suffix(".json")
        meta = ser.read_json(meta_path) if meta_path.exists() else {}
        window_ids.append(int(f.stem.split("_")[-1]))
        end_dates.append(meta.get("end_date", ""))

    industries = sorted(set(sectors.labels_for(benchmark.tickers, "industry")))
    for rec in track_cluster_evolution(benchmark, clusterings, sectors, alpha=args.alpha):
        rows = [
            (
                window_ids[k],
                end_dates[k],
                int(rec.sizes[k]),
                *[rec.histograms[k].get(ind, 0) for ind in industries],
            )
            for k in range(len(clusterings))
        ]
        ser.write_table_csv(
            out / f"tracking_{rec.cluster_id}.csv",
            ["window", "end_date", "S", *industries],
            rows,
        )
    return 0


# -- argument parsing ------------------------------------------------------------


def _add_estimator_flags(sp) -> None:
    sp.add_argument(
        "--missing",
        choices=("reject", "ffill", "drop"),
        default="reject",
        help="missing-price policy: reject the file, forward-fill, or drop the ticker",
    )
    g = sp.add_mutually_exclusive_group()
    g.add_argument(
        "--theta",
        type=float,
        default=None,
        help="exponential weight decay in days (default: window length / 3)",
    )
    g.add_argument(
        "--uniform", action="store_true", help="uniform day weights instead of exponential"
    )
    sp.add_argument(
        "--no-detrend",
        action="store_true",
        help="correlate raw returns instead of market-mode residuals",
    )


def _add_strategy_flag(sp) -> None:
    sp.add_argument(
        "--pmfg-strategy",
        choices=("fast", "scratch"),
        default="fast",
        help="planarity backend: jitted array test or per-candidate library check",
    )


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="corrnet",
        description="Correlation-network filtering, clustering, and rolling-window studies.",
    )
    p.add_argument("--version", action="version", version=f"corrnet {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="generate a synthetic planted-block price panel")
    sp.add_argument("--assets", type=int, default=60)
    sp.add_argument("--blocks", type=int, default=6)
    sp.add_argument("--days", type=int, default=2000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--block-loading", type=float, default=0.7)
    sp.add_argument("--market-loading", type=float, default=0.5)
    sp.add_argument("--noise-sigma", type=float, default=0.5)
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(handler=cmd_synth)

    sp = sub.add_parser("filter", help="build the MST or PMFG of a price panel")
    sp.add_argument("--prices", required=True)
    _add_estimator_flags(sp)
    sp.add_argument("--kind", choices=("mst", "pmfg"), default="pmfg")
    _add_strategy_flag(sp)
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(handler=cmd_filter)

    sp = sub.add_parser("cluster", help="cluster a full price panel")
    sp.add_argument("--prices", required=True)
    _add_estimator_flags(sp)
    _add_strategy_flag(sp)
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(handler=cmd_cluster)

    sp = sub.add_parser("rolling", help="run the rolling-window study")
    sp.add_argument("--prices", required=True)
    sp.add_argument("--sectors", required=True)
    sp.add_argument("--window-length", type=int, default=1000)
    sp.add_argument("--shift", type=int, default=30)
    _add_estimator_flags(sp)
    sp.add_argument("--alpha", type=float, default=0.01, help="tracking significance level")
    sp.add_argument(
        "--benchmark",
        default=None,
        help="benchmark clustering CSV for tracking (default: full-period clustering)",
    )
    _add_strategy_flag(sp)
    sp.add_argument("--jobs", type=int, default=None, help="worker processes (env CORRNET_JOBS)")
    sp.add_argument("--format", choices=("csv", "json"), default="csv", help="matrix output format")
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(handler=cmd_rolling)

    sp = sub.add_parser("compare", help="adjusted Rand index between two clustering files")
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    sp.set_defaults(handler=cmd_compare)

    sp = sub.add_parser("metacorr", help="metacorrelation between two correlation matrices")
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    sp.set_defaults(handler=cmd_metacorr)

    sp = sub.add_parser("track", help="track benchmark clusters through saved clusterings")
    sp.add_argument("--benchmark", required=True, help="benchmark clustering CSV")
    sp.add_argument("--clusters", required=True, help="directory of window_*.csv clusterings")
    sp.add_argument("--sectors", required=True)
    sp.add_argument("--alpha", type=float, default=0.01)
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(handler=cmd_track)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, RuntimeError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
