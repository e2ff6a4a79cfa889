"""Flat-file outputs: monitor CSV, snapshot node lists and the final-state JSON."""

import json
import os

import numpy as np

from .errors import ConfigError
from .geometry import DomainShape, Triod
from .solver import FlowState


def fmt(x):
    """Shortest round-tripping decimal form; deterministic across runs."""
    return repr(float(x))


def monitor_header(probes):
    names = [p.name for p in probes]
    return (
        ["t", "L1", "L2", "L3", "L", "k2_int", "k_sup"]
        + [f"theta_{n}" for n in names]
        + [f"b_rate_{n}" for n in names]
        + ["E", "Ox", "Oy", "res_angle", "res_sumk", "res_sumlambda"]
    )


def monitor_rows(series):
    for r in series:
        yield (
            [r.t, r.L1, r.L2, r.L3, r.L, r.k2_int, r.k_sup]
            + list(r.theta)
            + list(r.b_rate)
            + [r.E, r.O[0], r.O[1], r.residuals["angle"], r.residuals["sum_k"], r.residuals["sum_lambda"]]
        )


def write_monitors(path, series, probes):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(monitor_header(probes)) + "\n")
        for row in monitor_rows(series):
            fh.write(",".join(fmt(v) for v in row) + "\n")


def read_csv_table(path):
    """Header list and float array of a comma-separated file."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def write_snapshot(path, state):
    """Node list, one ``curve node x y`` row per node, time in a comment line."""
    p = state.points
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# t {fmt(state.t)} step {state.step_index}\n")
        for c in range(p.shape[0]):
            for j in range(p.shape[1]):
                fh.write(f"{c} {j} {fmt(p[c, j, 0])} {fmt(p[c, j, 1])}\n")


def read_snapshot(path, domain):
    """Inverse of :func:`write_snapshot`.

    Raises
    ------
    ConfigError
        If the file is not a node list of a triod.
    """
    t, step = 0.0, 0
    with open(path) as fh:
        first = fh.readline().split()
    if len(first) >= 3 and first[0] == "#" and first[1] == "t":
        t = float(first[2])
        if len(first) >= 5 and first[3] == "step":
            step = int(first[4])
    try:
        rows = np.loadtxt(path, comments="#", ndmin=2)
    except ValueError as exc:
        raise ConfigError(f"{path}: not a node list ({exc})") from exc
    if rows.shape[1] != 4:
        raise ConfigError(f"{path}: expected rows 'curve node x y'")
    n = int(rows[:, 1].max())
    pts = np.full((3, n + 1, 2), np.nan)
    for c, j, x, y in rows:
        pts[int(c), int(j)] = (x, y)
    if np.isnan(pts).any():
        raise ConfigError(f"{path}: incomplete node list")
    try:
        triod = Triod(pts, domain)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return FlowState(t, triod, step_index=step)


def final_state_dict(result, scenario):
    st = result.final
    return {
        "name": scenario.name,
        "t": st.t,
        "step_index": st.step_index,
        "stop_reason": None if result.reason is None else str(result.reason),
        "stop_kind": None if result.reason is None else result.reason.kind.value,
        "stop_curve": None if result.reason is None else result.reason.curve,
        "domain": scenario.domain.to_dict(),
        "endpoints": np.asarray(scenario.endpoints).tolist(),
        "junction": st.points[0, 0].tolist(),
        "lengths": st.triod.lengths().tolist(),
        "probes": [{"name": p.name, "x0": list(p.x0), "T_hat": p.T_hat} for p in result.probes],
        "stats": {k: v for k, v in result.stats.items() if not isinstance(v, dict)},
        "n_snapshots": len(result.snapshots),
        "points": st.points.tolist(),
    }


def write_json(path, obj):
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_final_state(path):
    with open(path) as fh:
        d = json.load(fh)
    domain = DomainShape.from_dict(d["domain"])
    st = FlowState(d["t"], Triod(np.asarray(d["points"], dtype=float), domain), step_index=d["step_index"])
    return d, st


def snapshot_paths(run_dir):
    snap = os.path.join(run_dir, "snapshots")
    if not os.path.isdir(snap):
        return []
    names = sorted(n for n in os.listdir(snap) if n.endswith(".txt"))
    return [os.path.join(snap, n) for n in names]
