"""Independent reference computations whose results are frozen in ``data/oracle_values.json``.

Run ``python tests/oracles.py`` to regenerate the file. Each oracle avoids the
package code path it checks: Weiszfeld and the density quadratures are
re-implemented here, areas come from quasi Monte Carlo sampling, and the
curvature integral from Richardson extrapolation of a refinement sequence.
"""

import json
import math
import os
import sys

import numpy as np
from scipy import integrate
from scipy.stats import qmc

HERE = os.path.dirname(os.path.abspath(__file__))
VALUES_PATH = os.path.join(HERE, "data", "oracle_values.json")


def load_values():
    with open(VALUES_PATH) as fh:
        return json.load(fh)


# Weiszfeld fixed point for (0,0),(4,0),(0,3)


def weiszfeld_reference(P, tol=1e-14, max_iter=200000):
    P = [tuple(map(float, p)) for p in P]
    x = sum(p[0] for p in P) / 3.0
    y = sum(p[1] for p in P) / 3.0
    for _ in range(max_iter):
        w = [1.0 / math.hypot(x - a, y - b) for a, b in P]
        nx = sum(wi * a for wi, (a, _) in zip(w, P)) / sum(w)
        ny = sum(wi * b for wi, (_, b) in zip(w, P)) / sum(w)
        done = math.hypot(nx - x, ny - y) <= tol
        x, y = nx, ny
        if done:
            break
    return [x, y], sum(math.hypot(x - a, y - b) for a, b in P)


# figure-eight loop: path from p=(0,0) to q=(3,0) crossing the chord once at x=1.5


def figure_eight_path(n=400):
    x = np.linspace(0.0, 3.0, n + 1)
    y = 0.5 * np.sin(2.0 * np.pi * x / 3.0) * (1.0 + 0.2 * x)
    return np.stack([x, y], axis=1)


def _even_odd(poly, pts):
    inside = np.zeros(len(pts), dtype=bool)
    x, y = pts[:, 0], pts[:, 1]
    a = poly
    b = np.roll(poly, -1, axis=0)
    for (x1, y1), (x2, y2) in zip(a, b):
        cond = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= cond & (x < xc)
    return inside


def figure_eight_area_qmc(m=22, seed=0):
    path = figure_eight_path()
    lo = path.min(axis=0)
    hi = path.max(axis=0)
    box = float(np.prod(hi - lo))
    sampler = qmc.Sobol(d=2, scramble=True, seed=seed)
    hits, total = 0, 0
    for _ in range(8):
        u = sampler.random_base2(m - 3) if total == 0 else sampler.random(2 ** (m - 3))
        pts = lo + u * (hi - lo)
        hits += int(np.count_nonzero(_even_odd(path, pts)))
        total += len(pts)
    return box * hits / total


def figure_eight_area_quad():
    f = lambda x: abs(0.5 * math.sin(2.0 * math.pi * x / 3.0) * (1.0 + 0.2 * x))
    return integrate.quad(f, 0.0, 1.5)[0] + integrate.quad(f, 1.5, 3.0)[0]


# Gaussian tail


def normal_tail(y0):
    pdf = lambda y: math.exp(-0.5 * y * y) / math.sqrt(2.0 * math.pi)
    return integrate.quad(pdf, y0, np.inf, epsabs=1e-14, epsrel=1e-14)[0]


# density and endpoint rate re-implemented node by node


def _dx_node(c, j, n):
    if j == 0:
        return [(-3 * c[0][d] + 4 * c[1][d] - c[2][d]) * 0.5 * n for d in range(2)]
    if j == n:
        return [(3 * c[n][d] - 4 * c[n - 1][d] + c[n - 2][d]) * 0.5 * n for d in range(2)]
    return [(c[j + 1][d] - c[j - 1][d]) * 0.5 * n for d in range(2)]


def density_and_rate_loop(points, x0, horizon):
    """Trapezoid density with ``|gamma_x| dx`` weights and the endpoint rate, in plain loops."""
    theta = 0.0
    rate = 0.0
    for c in points.tolist():
        n = len(c) - 1
        for j in range(n + 1):
            gx = _dx_node(c, j, n)
            w = (0.5 if j in (0, n) else 1.0) / n
            r2 = (c[j][0] - x0[0]) ** 2 + (c[j][1] - x0[1]) ** 2
            rho = math.exp(-r2 / (4 * horizon)) / math.sqrt(4 * math.pi * horizon)
            theta += rho * math.hypot(*gx) * w
        gx = _dx_node(c, n, n)
        sp = math.hypot(*gx)
        P = c[n]
        r2 = (P[0] - x0[0]) ** 2 + (P[1] - x0[1]) ** 2
        rho = math.exp(-r2 / (4 * horizon)) / math.sqrt(4 * math.pi * horizon)
        inner = ((P[0] - x0[0]) * gx[0] + (P[1] - x0[1]) * gx[1]) / (sp * 2 * horizon)
        rate += inner * rho
    return theta, rate


def shipped_initial_points():
    from triodflow.config import load_config
    from triodflow.solver import prepare_initial

    sc = load_config("equilateral")
    return prepare_initial(sc.build_initial(), sc.solver).points


# curvature integral of a fixed analytic triod, sampled uniformly in its parameter

ANALYTIC_O = (0.03, -0.02)
ANALYTIC_BUMPS = ((0.08, -0.03), (-0.05, 0.02), (0.06, 0.04))


def analytic_triod_points(N):
    o = np.array(ANALYTIC_O)
    ang = np.radians([90.0, 210.0, 330.0])
    P = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    x = np.linspace(0.0, 1.0, N + 1)[:, None]
    out = []
    for i in range(3):
        chord = P[i] - o
        nrm = np.array([-chord[1], chord[0]]) / np.linalg.norm(chord)
        c = o + x * chord
        for m, cm in enumerate(ANALYTIC_BUMPS[i], start=1):
            c = c + cm * np.sin(np.pi * m * x) ** 2 * nrm
        out.append(c)
    return np.stack(out)


def curvature_l2_richardson():
    from triodflow.functionals import curvature_l2

    I = [curvature_l2(analytic_triod_points(N)) for N in (512, 1024, 2048)]
    r1 = (4 * I[1] - I[0]) / 3
    r2 = (4 * I[2] - I[1]) / 3
    return (16 * r2 - r1) / 15


def curvature_l2_quad():
    """The same integral from the analytic derivatives via adaptive quadrature."""
    o = np.array(ANALYTIC_O)
    ang = np.radians([90.0, 210.0, 330.0])
    P = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    total = 0.0
    for i in range(3):
        chord = P[i] - o
        nrm = np.array([-chord[1], chord[0]]) / np.linalg.norm(chord)

        def integrand(x):
            d1 = chord.copy()
            d2 = np.zeros(2)
            for m, cm in enumerate(ANALYTIC_BUMPS[i], start=1):
                d1 = d1 + cm * np.pi * m * np.sin(2 * np.pi * m * x) * nrm
                d2 = d2 + cm * 2 * (np.pi * m) ** 2 * np.cos(2 * np.pi * m * x) * nrm
            sp = math.hypot(*d1)
            k = (d1[0] * d2[1] - d1[1] * d2[0]) / sp ** 3
            return k * k * sp

        total += integrate.quad(integrand, 0.0, 1.0, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    return total


# explicit-scheme stability threshold on the perturbed symmetric triod


def _explicit_stable(cfl, steps=600, N=64):
    from triodflow import scenarios, solver
    from triodflow.errors import TriodFlowError

    cfg = solver.SolverConfig(cfl=cfl, scheme="explicit", n_nodes=N, t_max=1e9)
    st = solver.FlowState(0.0, scenarios.symmetric(N, 0.1))
    k0 = None
    try:
        for _ in range(steps):
            st = solver.step(st, solver.stable_dt(st, cfg), cfg)
            k2 = st.metrics[1]
            k0 = k2 if k0 is None else k0
            if not np.isfinite(k2) or k2 > 100 * k0:
                return False
    except TriodFlowError:
        return False
    return True


def stability_threshold(lo=0.1, hi=1.0, iters=12):
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if _explicit_stable(mid):
            lo = mid
        else:
            hi = mid
    return lo, hi


# all-pairs chord/area ratios of the straight Steiner triod from triangle areas


def steiner_all_pairs_min(N=32):
    ang = np.radians([90.0, 210.0, 330.0])
    dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    best = math.inf
    for a in range(3):
        for b in range(a + 1, 3):
            for i in range(1, N + 1):
                for j in range(1, N + 1):
                    p = dirs[a] * i / N
                    q = dirs[b] * j / N
                    area = 0.5 * abs(p[0] * q[1] - p[1] * q[0])
                    best = min(best, float(np.sum((p - q) ** 2) / area))
    return best


def compute_all():
    pts = shipped_initial_points()
    theta, rate = density_and_rate_loop(pts, (0.2, 0.1), 1.0)
    w, wl = weiszfeld_reference([(0, 0), (4, 0), (0, 3)])
    lo, hi = stability_threshold()
    return {
        "weiszfeld_043": {"point": w, "length": wl},
        "normal_tail_1": normal_tail(1.0),
        "figure_eight_area_qmc": figure_eight_area_qmc(),
        "figure_eight_area_quad": figure_eight_area_quad(),
        "equilateral_initial_density": {"x0": [0.2, 0.1], "horizon": 1.0, "theta": theta, "b_rate": rate},
        "analytic_triod_k2_richardson": curvature_l2_richardson(),
        "analytic_triod_k2_quad": curvature_l2_quad(),
        "explicit_cfl_threshold": [lo, hi],
        "steiner_all_pairs_min_N32": steiner_all_pairs_min(),
    }


if __name__ == "__main__":
    vals = compute_all()
    os.makedirs(os.path.dirname(VALUES_PATH), exist_ok=True)
    with open(VALUES_PATH, "w") as fh:
        json.dump(vals, fh, indent=2, sort_keys=True)
        fh.write("\n")
    json.dump(vals, sys.stdout, indent=2, sort_keys=True)
    print()
