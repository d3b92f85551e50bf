"""Scenario execution and sweeps: builds worlds from configs, writes run
artifacts (summary rows, transition logs, manifests, traces), aggregates
seed means, and emits cumulative series plus plot scripts."""

import csv
import math
import os
from multiprocessing import get_context

from . import metrics as mt
from . import plotgen
from .config import ScenarioConfig, SweepSpec, dump_config
from .mobility import neighbor_map
from .network import World


def build_world(cfg, trace_sink=None):
    cfg.validate()
    trace = None
    if cfg.trace and trace_sink is not None:
        trace = trace_sink
    return World(cfg, trace=trace)


def run_scenario(cfg, out_dir=None, run_name=None):
    """Execute one scenario; returns (RunSummary, World).

    With out_dir set, writes <name>/transitions.log, <name>/manifest.ini and,
    when tracing is on, <name>/trace.log, and appends the summary row to
    out_dir/summary.csv (creating it with the header when absent).
    """
    trace_lines = []
    world = build_world(cfg, trace_sink=trace_lines.append)
    summary = world.run()
    if out_dir is not None:
        name = run_name or f"{cfg.protocol}_{cfg.security_mode}_n{cfg.n}_s{cfg.seed}"
        run_dir = os.path.join(out_dir, name)
        os.makedirs(run_dir, exist_ok=True)
        with open(os.path.join(run_dir, "transitions.log"), "w") as fh:
            for line in world.transitions:
                fh.write(line + "\n")
        with open(os.path.join(run_dir, "manifest.ini"), "w") as fh:
            fh.write(dump_config(cfg))
        if cfg.trace:
            with open(os.path.join(run_dir, "trace.log"), "w") as fh:
                for line in trace_lines:
                    fh.write(line + "\n")
        summary_path = os.path.join(out_dir, "summary.csv")
        new = not os.path.exists(summary_path)
        with open(summary_path, "a", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if new:
                w.writerow(mt.CSV_HEADER)
            w.writerow(summary.csv_row())
    return summary, world


def _run_cell(cfg):
    world = World(cfg)
    summary = world.run()
    return summary


def run_cells(cells, parallel=1):
    """Run a list of configs, optionally in worker processes.

    Results come back in input order either way, so downstream CSVs are
    byte-identical regardless of parallelism.
    """
    if parallel > 1 and len(cells) > 1:
        with get_context("fork").Pool(parallel) as pool:
            return pool.map(_run_cell, cells, chunksize=1)
    return [_run_cell(c) for c in cells]


def seed_means(summaries):
    """Per-(protocol, mode, N) means over seeds, NaN-aware, ordered."""
    groups = {}
    order = []
    for s in summaries:
        key = (s.protocol, s.security_mode, s.network_size)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(s)
    rows = []
    for key in order:
        group = groups[key]

        def mean_of(vals):
            vals = [v for v in vals if v == v]
            return sum(vals) / len(vals) if vals else float("nan")

        rows.append({
            "protocol": key[0],
            "security_mode": key[1],
            "N": key[2],
            "avg_delay_s": mean_of([s.avg_delay for s in group]),
            "avg_jitter_s": mean_of([s.avg_jitter for s in group]),
            "ctl_packets": mean_of([float(s.routing_load_packets) for s in group]),
            "ctl_bytes": mean_of([float(s.routing_load_bytes) for s in group]),
            "data_sent": mean_of([float(s.data_packets_sent) for s in group]),
            "data_delivered": mean_of([float(s.data_packets_delivered) for s in group]),
            "goodput_ratio": mean_of([s.goodput_ratio for s in group]),
            "phase_shifts": mean_of([float(s.phase_shifts) for s in group]),
        })
    return rows


def run_sweep(spec, out_dir=None, parallel=1):
    """Run the full cross product; returns (summaries, mean_rows).

    Artifacts: summary.csv (every run), means.csv (per-size seed means),
    cumulative.csv (prefix sums over N of the means), and plot scripts.
    """
    cells = spec.cells()
    summaries = run_cells(cells, parallel=parallel)
    means = seed_means(summaries)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        mt.write_summary_csv(summaries, os.path.join(out_dir, "summary.csv"))
        with open(os.path.join(out_dir, "means.csv"), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            cols = ["protocol", "security_mode", "N", "avg_delay_s", "avg_jitter_s",
                    "ctl_packets", "ctl_bytes", "data_sent", "data_delivered",
                    "goodput_ratio", "phase_shifts"]
            w.writerow(cols)
            for row in means:
                w.writerow([row[c] if isinstance(row[c], str) else
                            (str(row[c]) if isinstance(row[c], int) else f"{row[c]:.9f}")
                            for c in cols])
        mt.write_cumulative_csv(means, os.path.join(out_dir, "cumulative.csv"))
        plotgen.write_plot_scripts(out_dir)
        with open(os.path.join(out_dir, "manifest.ini"), "w") as fh:
            fh.write(dump_config(spec.base))
    return summaries, means


def graph_diameter(world):
    """Max BFS hop distance over the current neighbor graph (0 if empty)."""
    ids = [n.id for n in world.nodes if n.active]
    best = 0
    for src in ids:
        dist = {src: 0}
        frontier = [src]
        while frontier:
            nxt = []
            for u in frontier:
                for v in world.neighbors(u):
                    if v not in dist:
                        dist[v] = dist[u] + 1
                        nxt.append(v)
            frontier = nxt
        if dist:
            best = max(best, max(dist.values()))
    return best


def static_connected_world(cfg, max_attempts=50):
    """Build a static world, re-seeding placement until connected."""
    base_seed = cfg.seed
    for attempt in range(max_attempts):
        world = World(cfg.replace(v_min=0.0, v_max=0.0,
                                  seed=base_seed + 1000 * attempt))
        if world.connected():
            return world
    raise RuntimeError(f"no connected placement found for n={cfg.n}")


def calibrate_k(sizes=(10, 15, 20, 25, 30, 35, 40, 45, 50), seeds=(1, 2, 3, 4, 5),
                base=None):
    """Offline size-estimate regression: fit N = k * h_max^2 through the
    origin over static uniform topologies, h_max from true BFS diameters.

    Returns (k, samples) with samples = [(N, h_max)].
    """
    base = base or ScenarioConfig()
    samples = []
    for n in sizes:
        for seed in seeds:
            cfg = base.replace(n=n, seed=seed, duration=1.0, warmup=0.0,
                               traffic_rate=0.0)
            world = static_connected_world(cfg)
            h = graph_diameter(world)
            if h > 0:
                samples.append((n, h))
    num = sum(n * h * h for n, h in samples)
    den = sum(h ** 4 for _, h in samples)
    if den == 0:
        raise RuntimeError("degenerate calibration: all diameters zero")
    return num / den, samples
