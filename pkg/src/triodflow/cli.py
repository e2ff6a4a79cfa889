"""Command-line entry point: ``triodflow run|blowup|steiner|render|check``."""

import argparse
import csv
import os
import sys
import time

import numpy as np

from . import acceptance
from . import io as tio
from . import rescale as rs
from . import solver as so
from .config import PRESETS, load_config
from .errors import CollinearPoints, ConfigError, InvalidHorizon, TriodFlowError
from .geometry import DomainShape
from .steiner import fermat_point, junction_angles
from .svg import frame_svg, triod_svg, write_svg

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_CHECK_FAILED = 3


def _err(msg):
    print(f"triodflow: {msg}", file=sys.stderr)


def _point_arg(text):
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y but got '{text}'") from None
    return np.array([x, y])


def cmd_run(args):
    try:
        scenario = load_config(args.config)
        initial = scenario.build_initial()
    except ConfigError as exc:
        _err(f"config error: {exc}")
        return EXIT_CONFIG
    out = args.out or scenario.outputs.get("dir") or os.path.join("runs", scenario.name)
    snap_dir = os.path.join(out, "snapshots")
    os.makedirs(snap_dir, exist_ok=True)

    t0 = time.perf_counter()
    try:
        result = so.run(initial, scenario.solver, probes=scenario.probes, pair_budget=args.pair_budget)
    except TriodFlowError as exc:
        _err(f"solver error: {type(exc).__name__}: {exc}")
        return EXIT_SOLVER
    secs = time.perf_counter() - t0

    tio.write_monitors(os.path.join(out, "monitors.csv"), result.series, result.probes)
    for i, s in enumerate(result.snapshots):
        stem = os.path.join(snap_dir, f"snap_{i:05d}")
        tio.write_snapshot(stem + ".txt", s)
        write_svg(stem + ".svg", triod_svg(s.points, scenario.domain, f"{scenario.name}  t={s.t:.6g}"))
    tio.write_snapshot(os.path.join(out, "final_nodes.txt"), result.final)
    tio.write_json(os.path.join(out, "final_state.json"), tio.final_state_dict(result, scenario))
    print(f"{scenario.name}: {result.reason} at t={result.final.t:.6g} after {result.final.step_index} steps ({secs:.1f} s)")
    print(f"wrote {out}")
    return EXIT_OK


def _run_domain(run_dir):
    path = os.path.join(run_dir, "final_state.json")
    if os.path.isfile(path):
        d, _ = tio.read_final_state(path)
        return DomainShape.from_dict(d["domain"])
    return DomainShape.disc()


def cmd_blowup(args):
    if not os.path.isdir(args.dir):
        _err(f"no such run directory: {args.dir}")
        return EXIT_CONFIG
    paths = tio.snapshot_paths(args.dir)
    if not paths:
        _err(f"no snapshots in {args.dir}")
        return EXIT_CONFIG
    if not args.T > 0:
        _err("--T must be positive")
        return EXIT_CONFIG
    try:
        domain = _run_domain(args.dir)
        states = [tio.read_snapshot(p, domain) for p in paths]
    except (ConfigError, ValueError, KeyError) as exc:
        _err(f"cannot read run: {exc}")
        return EXIT_CONFIG
    states = [s for s in states if s.t < args.T]
    if not states:
        _err(f"every snapshot is at or after T={args.T}")
        return EXIT_CONFIG

    out = args.out or os.path.join(args.dir, "blowup")
    fdir = os.path.join(out, "frames")
    os.makedirs(fdir, exist_ok=True)
    rows = []
    for i, s in enumerate(states):
        try:
            frame = rs.rescale_frame(s, args.x0, args.T)
        except InvalidHorizon:
            continue
        cls = rs.classify_blowup(frame, args.window)
        dens = rs.rescaled_density(frame)
        integrand = rs.rescaled_monotonicity_integrand(frame)
        rows.append((frame.frak_t, dens, integrand, cls.kind.value, cls.fit_residual))
        if i % args.svg_every == 0 or i == len(states) - 1:
            title = f"t~={frame.frak_t:.4f}  {cls.kind.value}  density={dens:.4f}"
            write_svg(os.path.join(fdir, f"frame_{i:05d}.svg"), frame_svg(frame, args.window, title))
    with open(os.path.join(out, "frames.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["frak_t", "density", "integrand", "class", "fit_residual"])
        for r in rows:
            w.writerow([tio.fmt(r[0]), tio.fmt(r[1]), tio.fmt(r[2]), r[3], tio.fmt(r[4])])
    last = rows[-1]
    print(f"{len(rows)} frames; last frak_t={last[0]:.4f} class={last[3]} density={last[1]:.4f}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_steiner(args):
    try:
        sol = fermat_point(args.P1, args.P2, args.P3)
    except CollinearPoints as exc:
        _err(str(exc))
        return EXIT_CONFIG
    if sol.is_interior:
        ang = np.degrees(junction_angles(sol))
        print(f"interior Fermat point {sol.fermat[0]:.12g},{sol.fermat[1]:.12g}")
        print("angles " + " ".join(f"{a:.9f}" for a in ang))
    else:
        print(f"degenerate: junction at endpoint {sol.vertex + 1} ({sol.fermat[0]:.12g},{sol.fermat[1]:.12g})")
    print(f"total length {sol.total_length:.12g}")
    return EXIT_OK


def cmd_render(args):
    try:
        if args.state.endswith(".json"):
            _, st = tio.read_final_state(args.state)
            domain = st.triod.domain
        else:
            run_dir = os.path.dirname(os.path.dirname(os.path.abspath(args.state)))
            domain = _run_domain(run_dir)
            st = tio.read_snapshot(args.state, domain)
    except (OSError, ValueError, KeyError) as exc:
        _err(f"cannot read state: {exc}")
        return EXIT_CONFIG
    write_svg(args.out, triod_svg(st.points, domain, f"t={st.t:.6g}"))
    return EXIT_OK


def cmd_check(args):
    if args.suite not in acceptance.SUITES:
        _err(f"unknown suite '{args.suite}' (choose from {', '.join(acceptance.SUITES)})")
        return EXIT_CONFIG
    t0 = time.perf_counter()
    results = acceptance.run_suite(args.suite, fault=args.inject_fault, workers=args.workers)
    for r in results:
        print(r.line(), flush=True)
    n_ok = sum(r.passed for r in results)
    print(f"{args.suite}: {n_ok}/{len(results)} passed in {time.perf_counter() - t0:.1f} s")
    return EXIT_OK if n_ok == len(results) else EXIT_CHECK_FAILED


def build_parser():
    p = argparse.ArgumentParser(prog="triodflow", description="Curvature flow of planar triods.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate a scenario")
    r.add_argument("config", help=f"TOML file or preset name ({', '.join(PRESETS)})")
    r.add_argument("--out", help="output directory (default: [output].dir or runs/<name>)")
    r.add_argument("--pair-budget", type=int, default=1500, help="node pairs sampled for E per record")
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("blowup", help="rescale the snapshots of a run about (x0, T)")
    b.add_argument("dir", help="run directory written by 'triodflow run'")
    b.add_argument("--x0", type=_point_arg, required=True, metavar="X,Y")
    b.add_argument("--T", type=float, required=True, help="reference time of the rescaling")
    b.add_argument("--window", type=float, default=rs.MIN_WINDOW, help="classification radius")
    b.add_argument("--svg-every", type=int, default=1, help="write every n-th frame as SVG")
    b.add_argument("--out", help="output directory (default: <dir>/blowup)")
    b.set_defaults(func=cmd_blowup)

    s = sub.add_parser("steiner", help="Steiner tree of three points (use -- before negative coordinates)")
    for name in ("P1", "P2", "P3"):
        s.add_argument(name, type=_point_arg, metavar=f"{name}=X,Y")
    s.set_defaults(func=cmd_steiner)

    d = sub.add_parser("render", help="draw a snapshot or final_state.json as SVG")
    d.add_argument("state")
    d.add_argument("out")
    d.set_defaults(func=cmd_render)

    c = sub.add_parser("check", help="run an acceptance suite")
    c.add_argument("suite", help="fast or full")
    c.add_argument("--inject-fault", choices=acceptance.FAULTS, default=None,
                   help="deliberately break the solver to exercise the checks")
    c.add_argument("--workers", type=int, default=None, help="parallel workers (default: TRIODFLOW_THREADS)")
    c.set_defaults(func=cmd_check)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
