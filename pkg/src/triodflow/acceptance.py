"""Acceptance criteria of the simulator, runnable as suites.

Each criterion is a function of a :class:`RunCache` returning a
:class:`CriterionResult`. Criteria that share a simulation are grouped so a
worker computes that simulation once; groups may run in parallel, capped by
``TRIODFLOW_THREADS``. Results are always reported in criterion order.
"""

import math
import os
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import functionals as fn
from . import rescale as rs
from . import scenarios as sc
from . import solver as so
from .errors import JunctionSolveFailed, TriodFlowError
from .steiner import compare_to_steiner, fermat_point, torricelli, weiszfeld

SUITES = ("fast", "full")
FAULTS = ("junction-sign",)


@dataclass
class CriterionResult:
    cid: int
    title: str
    passed: bool
    measured: str
    seconds: float = 0.0

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] C{self.cid:<2d} {self.title}: {self.measured} ({self.seconds:.1f} s)"


class RunCache:
    """Simulations shared between criteria, computed on first use."""

    def __init__(self, fault=False):
        self.fault = fault
        self._runs = {}

    def config(self, **kw):
        return so.SolverConfig(junction_fault=self.fault, **kw)

    def get(self, key, build):
        if key not in self._runs:
            t0 = time.perf_counter()
            self._runs[key] = (build(), time.perf_counter() - t0)
        return self._runs[key]

    # shared runs

    def convergent(self):
        def build():
            P = sc.endpoints_at_angles(sc.UNIT_DISC, [90.0, 210.0, 330.0])
            tri = sc.perturbed(P, 64, 0.1, 7)
            return so.run(tri, self.config(n_nodes=64, t_max=10.0, record_every=50), pair_budget=1500)

        return self.get("convergent", build)

    def collapse(self):
        def build():
            tri = sc.obtuse150(64)
            return so.run(tri, self.config(n_nodes=64, t_max=10.0, record_every=200), record_series=False)

        return self.get("collapse", build)


def _good(x):
    return bool(np.isfinite(x))


def _fmt(x):
    return f"{x:.3g}"


# criteria


def c1_density_fingerprints(cache):
    x0 = np.array([0.3, -0.2])
    h = 0.37
    f = math.sqrt(2.0 * h)
    measured = {}
    for kind, target in (("line", 1.0), ("halfline", 0.5), ("flat_triod", 1.5)):
        curves = [x0 + f * c for c in rs.model_curves(kind, 0.7, radius=8.0, n=4096)]
        measured[kind] = (fn.density_of_curves(curves, x0, h), target)
    err = max(abs(v - t) for v, t in measured.values())
    txt = ", ".join(f"{k}={v:.6f}" for k, (v, _) in measured.items())
    return err <= 1e-3, f"{txt}; max error {_fmt(err)} (tol 1e-3)"


def c2_steiner_convergence(cache):
    res, secs = cache.convergent()
    P = sc.endpoints_at_angles(sc.UNIT_DISC, [90.0, 210.0, 330.0])
    cmp = compare_to_steiner(res.final, fermat_point(*P))
    jd = float(np.linalg.norm(res.final.points[0, 0]))
    L = float(res.final.triod.lengths().sum())
    ok = (
        res.reason.kind is so.StopKind.STEADY_STATE
        and jd <= 1e-3
        and abs(L - 3.0) <= 1e-3
        and cmp["hausdorff"] <= 2e-3
        and secs < 60.0
    )
    return ok, (
        f"{res.reason} at t={res.final.t:.3f}; |O|={_fmt(jd)}, |L-3|={_fmt(abs(L - 3.0))}, "
        f"Hausdorff={_fmt(cmp['hausdorff'])}, run {secs:.1f} s"
    )


def c3_collapse(cache):
    res, secs = cache.collapse()
    Lmin = float(res.final.triod.lengths().min())
    ok = res.reason.kind is so.StopKind.LENGTH_COLLAPSE and Lmin < 1e-2 and math.isfinite(res.final.t) and secs < 60.0
    return ok, f"{res.reason} at t={res.final.t:.4f}; min L={Lmin:.4g}, run {secs:.1f} s"


CONVERGENT_PROBES = (((0.0, 0.0), 1.5), ((0.2, 0.1), 2.0), ((-0.3, -0.2), 1.5))
COLLAPSE_WINDOW = 0.08
COLLAPSE_PROBES = (((0.0, 0.75), 0.1), ((0.1, 0.7), 0.13), ((-0.2, 0.4), 0.18))


def _monotonicity_runs(cache):
    def conv():
        P = sc.endpoints_at_angles(sc.UNIT_DISC, [90.0, 210.0, 330.0])
        tri = sc.perturbed(P, 128, 0.1, 7)
        probes = [fn.KernelConfig(x, T) for x, T in CONVERGENT_PROBES]
        return so.run(tri, cache.config(n_nodes=128, t_max=1.0, record_every=50), probes=probes, pair_budget=60)

    def coll():
        tri = sc.obtuse150(128)
        probes = [fn.KernelConfig(x, T) for x, T in COLLAPSE_PROBES]
        return so.run(
            tri, cache.config(n_nodes=128, t_max=COLLAPSE_WINDOW, record_every=50), probes=probes, pair_budget=60
        )

    return [("convergent", cache.get("mono-conv", conv)[0]), ("collapse", cache.get("mono-coll", coll)[0])]


def c4_monotonicity(cache):
    worst_defect, worst_rel, checked = 0.0, 0.0, 0
    for _, res in _monotonicity_runs(cache):
        for i in range(len(res.probes)):
            rep = fn.monotonicity_defect(res.series, i)
            worst_defect = max(worst_defect, rep.defect)
            m = np.abs(rep.predicted) > 1e-3
            checked += int(np.count_nonzero(m))
            if np.any(m):
                rel = np.abs(rep.measured[m] - rep.predicted[m]) / np.abs(rep.predicted[m])
                worst_rel = max(worst_rel, float(rel.max()))
    ok = worst_defect <= 1e-4 and worst_rel <= 0.05 and checked > 0
    return ok, f"max defect {_fmt(worst_defect)} (tol 1e-4), max rel. mismatch {_fmt(worst_rel)} (tol 0.05) over {checked} intervals"


def c5_boundary_bounds(cache):
    res, _ = cache.collapse()
    x0 = res.final.points[0, 0]
    T_hat = fn.default_T_hat(res, so.SolverConfig())
    vals = []
    for s in res.snapshots:
        h = T_hat - s.t
        for P in s.points[:, -1]:
            vals.append(fn.boundary_term_bound(float(np.linalg.norm(P - x0)), h))
    vals = np.array(vals)
    frames = rs.frames_from_snapshots(res.snapshots, x0, T_hat)
    cum = rs.cumulative_boundary_integral(frames)
    bound = math.sqrt(math.pi / 2.0)
    ok = bool(np.all((vals >= 0) & (vals <= 0.5))) and bool(np.all(cum <= bound + 1e-9))
    return ok, (
        f"{vals.size} bounds in [{vals.min():.3g}, {vals.max():.3g}]; "
        f"cumulative rescaled endpoint integrals {np.array2string(cum, precision=4)} (<= {bound:.4f})"
    )


def _junction_study(cache, N):
    def build():
        P = sc.endpoints_at_angles(sc.UNIT_DISC, [90.0, 210.0, 330.0])
        tri = sc.perturbed(P, N, 0.1, 7)
        cfg = cache.config(n_nodes=N, t_max=0.3, scheme="explicit", record_every=10 ** 9)
        return so.run(tri, cfg, record_series=False, monitor_junction=True)

    return cache.get(f"junction-{N}", build)[0]


# below this a residual is at rounding level and carries no convergence information
ROUNDING_FLOOR = 1e-11


def c6_junction_identities(cache):
    try:
        r64 = _junction_study(cache, 64).stats["junction_max"]
        r128 = _junction_study(cache, 128).stats["junction_max"]
    except JunctionSolveFailed as exc:
        return False, f"|sum tau| cannot be brought below 1e-8: {exc}"
    angle = max(r64["angle"], r128["angle"])
    parts = [f"|sum tau| max {_fmt(angle)} (tol 1e-8)"]
    ok = angle <= 1e-8
    for key in ("sum_k", "sum_lambda", "lambda_identity"):
        a, b = r64[key], r128[key]
        if b <= ROUNDING_FLOOR:
            parts.append(f"{key} {_fmt(a)}->{_fmt(b)} (rounding level)")
            continue
        ratio = a / b
        ok = ok and ratio >= 2.0
        parts.append(f"{key} {_fmt(a)}->{_fmt(b)} ratio {ratio:.2f}")
    return ok, "; ".join(parts) + " (ratio >= 2 when N doubles)"


def _length_dissipation(cache, which):
    def build():
        if which == "convergent":
            P = sc.endpoints_at_angles(sc.UNIT_DISC, [90.0, 210.0, 330.0])
            tri, T = sc.perturbed(P, 128, 0.1, 7), 0.5
        else:
            tri, T = sc.obtuse150(128), 0.1
        cfg = cache.config(n_nodes=128, t_max=T)
        st = so.FlowState(0.0, so.prepare_initial(tri, cfg))
        st = so.FlowState(0.0, st.triod, metrics=so.kernels.step_metrics(st.points))
        worst = 0.0
        while st.t < T * (1 - 1e-12):
            nw = so.step(st, so._step_dt(st, cfg), cfg)
            if st.t >= SMOOTH_AFTER:
                k2 = 0.5 * (st.metrics[1] + nw.metrics[1])
                dL = (nw.metrics[0].sum() - st.metrics[0].sum()) / nw.dt_last
                worst = max(worst, abs(dL + k2) / k2)
            if nw.step_index % cfg.resample_every == 0:
                nw = so.resample_state(nw, cfg)
            st = nw
        return worst

    return cache.get(f"dissipation-{which}", build)[0]


# the initial layer (where the data are only compatible to low order) is not a smooth segment
SMOOTH_AFTER = 0.01


def c7_length_dissipation(cache):
    a = _length_dissipation(cache, "convergent")
    b = _length_dissipation(cache, "collapse")
    worst = max(a, b)
    return worst <= 0.02, f"max |dL/dt + int k^2|/int k^2 = {_fmt(a)} (convergent), {_fmt(b)} (collapse) (tol 0.02)"


def _pde_level(cache, N):
    tri = sc.symmetric(N, 0.1)
    cfg = cache.config(n_nodes=N, t_max=0.05)
    s = so.run(tri, cfg, record_series=False).final
    ce = cfg.replace(scheme="explicit", t_max=100.0)
    s2 = so.step(s, so.stable_dt(s, ce), ce)
    return so.pde_residual_check(s, s2, s2.dt_last)


def c8_pde_residuals(cache):
    a = _pde_level(cache, 64)
    b = _pde_level(cache, 128)
    rk = a["res_k"] / b["res_k"]
    rl = a["res_lambda"] / b["res_lambda"]
    return min(rk, rl) >= 3.0, (
        f"res_k {_fmt(a['res_k'])}->{_fmt(b['res_k'])} ({rk:.2f}x), "
        f"res_lambda {_fmt(a['res_lambda'])}->{_fmt(b['res_lambda'])} ({rl:.2f}x) (need >= 3x)"
    )


def c9_embeddedness(cache):
    P = sc.endpoints_at_angles(sc.UNIT_DISC, [90.0, 210.0, 330.0])
    exact = sc.steiner_exact(P, 32)
    junction_pair = np.array([[0, 1, 1, 1]], dtype=np.int64)
    phi_j = float(fn.phi_values(exact, junction_pair)[0])
    all_phi = fn.phi_values(exact, fn.node_pairs(32))
    E_exact = fn.embeddedness_E(exact)
    undercut = float(fn.FOUR_SQRT3 - all_phi.min())
    ok = abs(phi_j - fn.FOUR_SQRT3) <= 1e-9 and abs(E_exact - fn.FOUR_SQRT3) <= 1e-9 and undercut <= 1e-9

    res, _ = cache.convergent()
    E = np.array([r.E for r in res.series])
    running = np.maximum.accumulate(E)
    drop = float(np.max(1.0 - E / running))
    ok = ok and drop <= 0.05

    state = res.snapshots[min(3, len(res.snapshots) - 1)]
    base = fn.embeddedness_E(state, pair_budget=1500)
    dil = []
    for r in (0.5, 3.0, 17.0):
        scaled = so.FlowState(state.t, type(state.triod)(state.points * r, state.triod.domain))
        dil.append(abs(fn.embeddedness_E(scaled, pair_budget=1500, check=False) / base - 1.0))
    ok = ok and max(dil) <= 1e-12
    return ok, (
        f"junction pair {phi_j:.12f} vs 4*sqrt(3)={fn.FOUR_SQRT3:.12f}, all-pairs undercut {_fmt(undercut)}; "
        f"largest relative drop along run {_fmt(drop)} (tol 0.05); dilation rel. change {_fmt(max(dil))}"
    )


def c10_reachable(cache):
    res, _ = cache.collapse()
    x = res.final.points[0, 0]
    rep = fn.reachable_check(res.snapshots, x, res.final.t)
    return rep.max_violation <= 1e-6, f"max of d^2(t) - d^2(s) - 2(s-t) = {_fmt(rep.max_violation)} over {len(rep.t)} records (tol 1e-6)"


def _random_triangles(n, seed=11):
    """Random triangles with all angles below 119 degrees and area above 1e-2."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        T = rng.uniform(-1.0, 1.0, size=(3, 2))
        a = T[[1, 2, 0]] - T
        b = T[[2, 0, 1]] - T
        cosang = np.einsum("ik,ik->i", a, b) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
        ang = np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0)))
        area = 0.5 * abs(a[0, 0] * b[0, 1] - a[0, 1] * b[0, 0])
        if ang.max() < 119.0 and area > 1e-2:
            out.append(T)
    return out


def c11_oracles(cache):
    worst, margin = 0.0, np.inf
    rng = np.random.default_rng(5)
    tris = _random_triangles(200)
    for T in tris:
        tor = torricelli(T)
        wz = weiszfeld(*T, iters=20000, tol=1e-15)
        worst = max(worst, float(np.linalg.norm(tor - wz)))
        best = fermat_point(*T).total_length
        # Y-connections through random junctions inside the triangle
        w = rng.dirichlet(np.ones(3), size=50)
        Y = np.linalg.norm(T[None, :, :] - (w @ T)[:, None, :], axis=2).sum(axis=1)
        margin = min(margin, float((Y - best).min()))
    ok = worst <= 1e-10 and margin >= -1e-12
    return ok, (
        f"max Torricelli-Weiszfeld distance {_fmt(worst)} (tol 1e-10) on {len(tris)} triangles; "
        f"smallest excess of 50 random Y-connections over the Steiner length {_fmt(margin)}"
    )


def synthetic_frames(seed=3, per_class=10, amplitude=0.02, n=512, radius=8.0):
    """Smoothly perturbed model frames with their expected labels, plus random blobs."""
    rng = np.random.default_rng(seed)
    out = []
    for kind, label in (("line", rs.BlowupKind.LINE), ("halfline", rs.BlowupKind.HALFLINE),
                        ("flat_triod", rs.BlowupKind.FLAT_TRIOD)):
        for _ in range(per_class):
            curves = rs.model_curves(kind, rng.uniform(0, 2 * np.pi), radius=radius, n=n)
            pert = []
            for c in curves:
                d = c[-1] - c[0]
                nrm = np.array([-d[1], d[0]]) / np.linalg.norm(d)
                s = np.linspace(0.0, 1.0, c.shape[0])[:, None]
                bump = sum(rng.uniform(-1, 1) * np.sin(np.pi * m * s) for m in range(1, 4)) / 3.0
                pert.append(c + amplitude * bump * nrm)
            out.append((rs.frame_from_points(pert), label))
    blobs = []
    for _ in range(per_class):
        curves = []
        for _ in range(3):
            steps = rng.normal(size=(n, 2)) * 0.15
            curves.append(np.cumsum(steps, axis=0) + rng.uniform(-1, 1, size=2))
        blobs.append(rs.frame_from_points(curves))
    return out, blobs


def c12_classifier(cache):
    frames, blobs = synthetic_frames()
    right = 0
    cross = True
    for f, label in frames:
        got = rs.classify_blowup(f, 4.0)
        right += int(got.kind is label)
        cross = cross and abs(got.density_estimate - rs.MODEL_DENSITY[label]) <= rs.EPS_THETA
    models = sum(rs.classify_blowup(b, 4.0).kind in rs.MODEL_DENSITY for b in blobs)
    ok = right == len(frames) and cross and models == 0
    return ok, f"{right}/{len(frames)} model frames correct, density cross-check {'ok' if cross else 'failed'}; {models}/{len(blobs)} blobs labelled as a model set"


CRITERIA = {
    1: ("Gaussian density fingerprints", c1_density_fingerprints),
    2: ("Steiner convergence", c2_steiner_convergence),
    3: ("collapse scenario", c3_collapse),
    4: ("monotonicity", c4_monotonicity),
    5: ("boundary bounds", c5_boundary_bounds),
    6: ("junction identities", c6_junction_identities),
    7: ("length dissipation", c7_length_dissipation),
    8: ("PDE residuals", c8_pde_residuals),
    9: ("embeddedness functional", c9_embeddedness),
    10: ("reachable-set inequality", c10_reachable),
    11: ("oracle equivalence", c11_oracles),
    12: ("blow-up classifier", c12_classifier),
}

# criteria sharing a simulation stay in one group
GROUPS = ((2, 9), (3, 5, 10), (4,), (6,), (7,), (8,), (1, 11, 12))
SUITE_MEMBERS = {"fast": (1, 2, 3, 5, 6, 9, 10, 11, 12), "full": tuple(sorted(CRITERIA))}


def evaluate(cid, cache=None):
    """Run one criterion; solver errors count as a failure, never as a crash."""
    cache = cache if cache is not None else RunCache()
    title, func = CRITERIA[cid]
    t0 = time.perf_counter()
    try:
        ok, measured = func(cache)
    except TriodFlowError as exc:
        ok, measured = False, f"solver error: {type(exc).__name__}: {exc}"
    except Exception as exc:  # noqa: BLE001 - reported, not swallowed
        ok, measured = False, f"error: {type(exc).__name__}: {exc}\n{traceback.format_exc(limit=3)}"
    return CriterionResult(cid, title, bool(ok), measured, time.perf_counter() - t0)


def _run_group(ids, fault):
    cache = RunCache(fault=fault)
    return [evaluate(c, cache) for c in ids]


def thread_cap():
    raw = os.environ.get("TRIODFLOW_THREADS", "")
    try:
        cap = int(raw)
    except ValueError:
        cap = os.cpu_count() or 1
    return max(1, cap)


def run_suite(suite, fault=None, workers=None):
    """Evaluate a suite and return the results in criterion order.

    Raises
    ------
    ValueError
        For an unknown suite or fault name.
    """
    if suite not in SUITES:
        raise ValueError(f"unknown suite '{suite}'; choose from {SUITES}")
    if fault is not None and fault not in FAULTS:
        raise ValueError(f"unknown fault '{fault}'; choose from {FAULTS}")
    members = set(SUITE_MEMBERS[suite])
    groups = [tuple(c for c in g if c in members) for g in GROUPS]
    groups = [g for g in groups if g]
    workers = thread_cap() if workers is None else max(1, workers)
    flag = fault is not None
    if workers == 1:
        results = [r for g in groups for r in _run_group(g, flag)]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(groups))) as ex:
            futures = [ex.submit(_run_group, g, flag) for g in groups]
            results = [r for f in futures for r in f.result()]
    return sorted(results, key=lambda r: r.cid)
