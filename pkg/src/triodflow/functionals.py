"""Scalar monitors of an evolving triod.

Lengths and curvature norms, the Gaussian density against a backward heat
kernel with its endpoint correction, the embeddedness ratio ``E``, the
shrinking-ball distance test and the L2-curvature growth diagnostic.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from . import kernels
from .errors import (
    CutNotTransversal,
    InsufficientRecords,
    InvalidHorizon,
    NotEmbedded,
)
from .geometry import Triod, d_ds, differentiate, self_intersections

FOUR_SQRT3 = 4.0 * math.sqrt(3.0)


@dataclass(frozen=True)
class KernelConfig:
    """Backward heat kernel centred at ``x0`` with reference time ``T_hat``."""

    x0: tuple
    T_hat: float
    name: str = ""

    def horizon(self, t):
        h = self.T_hat - t
        if not h > 0:
            raise InvalidHorizon(f"T_hat={self.T_hat} is not after t={t}")
        return h


@dataclass
class MonitorRecord:
    t: float
    L1: float
    L2: float
    L3: float
    L: float
    k2_int: float
    k_sup: float
    theta: list
    b_rate: list
    mono_rhs: list
    E: float
    O: tuple
    residuals: dict = field(default_factory=dict)
    # time integrals from t=0 of b_rate and mono_rhs, when tracked step by step
    rate_int: list = None
    mono_int: list = None


def _pts(state):
    return np.asarray(getattr(state, "points", state), dtype=float)


def lengths(state):
    """Chord-length sums ``(L1, L2, L3, L)``."""
    ch = np.linalg.norm(np.diff(_pts(state), axis=1), axis=2).sum(axis=1)
    return float(ch[0]), float(ch[1]), float(ch[2]), float(ch.sum())


def curvature_l2(state):
    gq = differentiate(_pts(state))
    return float(np.sum(gq.k * gq.k * gq.ds))


def heat_kernel(x, x0, horizon):
    r2 = np.sum((np.asarray(x) - np.asarray(x0, dtype=float)) ** 2, axis=-1)
    return np.exp(-r2 / (4.0 * horizon)) / math.sqrt(4.0 * math.pi * horizon)


def density_of_curves(curves, x0, horizon):
    """Trapezoid quadrature of the heat kernel over arbitrary sampled curves."""
    total = 0.0
    for c in curves:
        c = np.asarray(c, dtype=float)
        gq = differentiate(c)
        total += float(np.sum(heat_kernel(c, x0, horizon) * gq.ds))
    return total


def gaussian_density(state, kernel):
    """Integral of the backward heat kernel over the triod at time ``state.t``.

    Raises
    ------
    InvalidHorizon
        If ``kernel.T_hat <= state.t``.
    """
    h = kernel.horizon(state.t)
    p = _pts(state)
    gq = differentiate(p)
    return float(np.sum(heat_kernel(p, kernel.x0, h) * gq.ds))


def boundary_term_rate(state, kernel):
    """Endpoint contribution to the time derivative of the Gaussian density."""
    h = kernel.horizon(state.t)
    p = _pts(state)
    gq = differentiate(p)
    P = p[:, -1]
    rel = P - np.asarray(kernel.x0, dtype=float)
    inner = np.einsum("ik,ik->i", rel / (2.0 * h), gq.tau[:, -1])
    return float(np.sum(inner * heat_kernel(P, kernel.x0, h)))


def monotonicity_integrand(state, kernel):
    """``int |k nu + (x - x0)^perp / (2 (T - t))|^2 rho ds`` (nonnegative)."""
    h = kernel.horizon(state.t)
    p = _pts(state)
    gq = differentiate(p)
    rel = p - np.asarray(kernel.x0, dtype=float)
    normal = np.einsum("...k,...k->...", rel, gq.nu) / (2.0 * h)
    return float(np.sum((gq.k + normal) ** 2 * heat_kernel(p, kernel.x0, h) * gq.ds))


def boundary_term_bound(d, horizon):
    """Standard normal tail beyond ``d / sqrt(2 * horizon)``; always in ``[0, 1/2]``."""
    if d < 0 or not horizon > 0:
        raise ValueError("need d >= 0 and horizon > 0")
    y0 = d / math.sqrt(2.0 * horizon)
    return 0.5 * math.erfc(y0 / math.sqrt(2.0))


@dataclass
class MonotonicityReport:
    defect: float
    t_mid: np.ndarray
    measured: np.ndarray  # d(Theta + b)/dt per interval
    predicted: np.ndarray  # -(mean integrand) per interval
    theta: np.ndarray
    b: np.ndarray


def monotonicity_defect(series, probe=0):
    """Check that ``Theta + b`` is nonincreasing along a recorded series.

    ``b(t)`` is the integral of the endpoint rate from ``t`` to the last
    record, so that ``b`` vanishes at the end of the series. When the records
    carry step-by-step time integrals these are used; otherwise the trapezoid
    rule runs over the records. ``defect`` is the largest positive slope of
    ``Theta + b``; ``predicted`` is minus the interval mean of the integrand.

    Raises
    ------
    InsufficientRecords
        With fewer than three records.
    """
    if len(series) < 3:
        raise InsufficientRecords("need at least three records")
    t = np.array([r.t for r in series])
    theta = np.array([r.theta[probe] for r in series])
    rate = np.array([r.b_rate[probe] for r in series])
    rhs = np.array([r.mono_rhs[probe] for r in series])
    dt = np.diff(t)
    tracked = all(r.rate_int is not None and np.isfinite(r.rate_int[probe]) for r in series)
    if tracked:
        rate_int = np.array([r.rate_int[probe] for r in series])
        b = rate_int[-1] - rate_int
        predicted = -np.diff([r.mono_int[probe] for r in series]) / dt
    else:
        inc = 0.5 * (rate[1:] + rate[:-1]) * dt
        b = np.concatenate([np.cumsum(inc[::-1])[::-1], [0.0]])
        predicted = -0.5 * (rhs[1:] + rhs[:-1])
    total = theta + b
    measured = np.diff(total) / dt
    defect = float(max(0.0, measured.max()))
    return MonotonicityReport(defect, 0.5 * (t[1:] + t[:-1]), measured, predicted, theta, b)


def node_pairs(n):
    """All unordered pairs of distinct triod nodes as ``(c1, j1, c2, j2)`` rows.

    The junction is listed once, as ``(0, 0)``.
    """
    nodes = [(0, 0)] + [(c, j) for c in range(3) for j in range(1, n + 1)]
    nodes = np.array(nodes, dtype=np.int64)
    ii, jj = np.triu_indices(len(nodes), k=1)
    return np.concatenate([nodes[ii], nodes[jj]], axis=1)


def _stratum(pairs):
    c1 = np.where(pairs[:, 1] == 0, pairs[:, 2], pairs[:, 0])
    c2 = np.where(pairs[:, 3] == 0, pairs[:, 0], pairs[:, 2])
    lo, hi = np.minimum(c1, c2), np.maximum(c1, c2)
    return lo * 3 + hi


def select_pairs(n, pair_budget=None, seed=0):
    """Node pairs used by :func:`embeddedness_E`, stratified by curve pair."""
    pairs = node_pairs(n)
    if pair_budget is None or pairs.shape[0] <= pair_budget:
        return pairs
    rng = np.random.default_rng(seed)
    strata = _stratum(pairs)
    keys = np.unique(strata)
    quota = max(1, pair_budget // len(keys))
    chosen = []
    for key in keys:
        idx = np.flatnonzero(strata == key)
        if idx.size > quota:
            idx = np.sort(rng.choice(idx, size=quota, replace=False))
        chosen.append(idx)
    return pairs[np.concatenate(chosen)]


def phi_values(state, pairs):
    return kernels.pair_ratios(_pts(state), pairs)


def embeddedness_E(state, pair_budget=None, seed=0, check=True):
    """Minimum of chord squared over enclosed area across node pairs, capped at 4 sqrt(3).

    With a budget smaller than the number of pairs the result is an upper
    bound of the all-pairs value. The junction paired with itself always
    contributes ``4 sqrt(3)``.

    Raises
    ------
    NotEmbedded
        If the triod has a self-intersection (only when ``check``).
    """
    triod = state if isinstance(state, Triod) else getattr(state, "triod", None)
    p = _pts(state)
    if check and triod is not None and self_intersections(triod):
        raise NotEmbedded("triod has self-intersections")
    pairs = select_pairs(p.shape[1] - 1, pair_budget, seed)
    phi = kernels.pair_ratios(p, pairs)
    return float(min(FOUR_SQRT3, phi.min() if phi.size else np.inf))


def _dist_to_triod(p, x):
    from .steiner import point_to_segments

    a = p[:, :-1].reshape(-1, 2)
    b = p[:, 1:].reshape(-1, 2)
    return float(point_to_segments(np.asarray(x, float)[None], a, b)[0])


@dataclass
class ReachableReport:
    is_reachable_consistent: bool
    max_violation: float
    t: np.ndarray
    d: np.ndarray


def reachable_check(snapshots, x, T_hat, tol=1e-9):
    """Distance from ``x`` to the triod across records against the shrinking-ball bounds.

    ``max_violation`` is the largest ``d(t)^2 - d(s)^2 - 2 (s - t)`` over
    record pairs ``s > t`` (nonpositive for an exact flow).
    """
    if not snapshots:
        raise InsufficientRecords("empty series")
    t = np.array([s.t for s in snapshots])
    d = np.array([_dist_to_triod(_pts(s), x) for s in snapshots])
    d2 = d * d
    viol = d2[:, None] - d2[None, :] - 2.0 * (t[None, :] - t[:, None])
    later = t[None, :] > t[:, None]
    max_violation = float(viol[later].max()) if np.any(later) else -np.inf
    consistent = bool(np.all(d2 <= 2.0 * (T_hat - t) + tol))
    return ReachableReport(consistent, max_violation, t, d)


def _cut_curve(p, gq, center, radius):
    r = np.linalg.norm(p - center, axis=1)
    if r[0] >= radius:
        raise CutNotTransversal("junction outside the cut circle")
    out = np.flatnonzero(r >= radius)
    if out.size == 0:
        raise CutNotTransversal("curve does not reach the cut circle")
    j = int(out[0]) - 1
    w = (radius - r[j]) / (r[j + 1] - r[j])
    radial = (p[j + 1] - p[j]) / np.linalg.norm(p[j + 1] - p[j])
    u = (p[j] - center) / max(r[j], 1e-300)
    if abs(radial @ u) < 1e-3:
        raise CutNotTransversal("curve meets the cut circle tangentially")
    seg = np.linalg.norm(np.diff(p[: j + 2], axis=0), axis=1)
    k2 = gq.k[: j + 2] ** 2
    ks = d_ds(gq.k, gq)
    s_nodes = np.concatenate([[0.0], np.cumsum(seg)])
    s_q = s_nodes[j] + w * seg[j]
    k2_q = (1 - w) * k2[j] + w * k2[j + 1]
    integral = float(np.sum(0.5 * (k2[1:j + 1] + k2[:j]) * seg[:j]) + 0.5 * (k2[j] + k2_q) * w * seg[j])
    kq = (1 - w) * gq.k[j] + w * gq.k[j + 1]
    ksq = (1 - w) * ks[j] + w * ks[j + 1]
    lq = (1 - w) * gq.lam[j] + w * gq.lam[j + 1]
    return integral, s_q, kq * (ksq + lq * kq)


@dataclass
class KKEvolReport:
    t: np.ndarray
    k2: np.ndarray
    lhs: np.ndarray
    boundary: np.ndarray
    min_length: np.ndarray
    C1: float
    C2: float
    defect: np.ndarray


def kkevol_bound_check(snapshots, cut_radius, center=None):
    """Growth of the L2 curvature inside a circle, against the cubic/quadratic bound.

    Each curve is cut where it first leaves the circle of radius
    ``cut_radius`` around ``center`` (the current junction when ``None``).
    ``C1`` and ``C2`` are the nonnegative constants of least sum for which
    the bound holds on every record; they are fitted, not prescribed.

    Raises
    ------
    CutNotTransversal
    InsufficientRecords
    """
    if len(snapshots) < 3:
        raise InsufficientRecords("need at least three records")
    t, K, B, Lmin = [], [], [], []
    for s in snapshots:
        p = _pts(s)
        gq = differentiate(p)
        c = p[0, 0] if center is None else np.asarray(center, float)
        tot, bsum, lens = 0.0, 0.0, []
        for i in range(3):
            integral, length, flux = _cut_curve(p[i], _slice_gq(gq, i), c, cut_radius)
            tot += integral
            bsum += flux
            lens.append(length)
        t.append(s.t)
        K.append(tot)
        B.append(2.0 * bsum)
        Lmin.append(min(lens))
    t, K, B, Lmin = map(np.asarray, (t, K, B, Lmin))
    lhs = np.gradient(K, t)
    excess = lhs - B
    a1 = K ** 3
    a2 = K ** 2 / Lmin
    need = excess > 0
    C1 = C2 = 0.0
    if np.any(need):
        res = linprog(
            c=[1.0, 1.0],
            A_ub=-np.stack([a1[need], a2[need]], axis=1),
            b_ub=-excess[need],
            bounds=[(0, None), (0, None)],
            method="highs",
        )
        if res.status == 0:
            C1, C2 = float(res.x[0]), float(res.x[1])
        else:
            C1 = C2 = float("inf")
    defect = lhs - (C1 * a1 + C2 * a2 + B)
    return KKEvolReport(t, K, lhs, B, Lmin, C1, C2, defect)


def _slice_gq(gq, i):
    from .geometry import GeometricQuantities

    return GeometricQuantities(
        tau=gq.tau[i], nu=gq.nu[i], k=gq.k[i], lam=gq.lam[i], v=gq.v[i], ds=gq.ds[i], speed=gq.speed[i]
    )


def default_T_hat(result, config):
    from .solver import StopKind

    if result.reason is not None and result.reason.kind in (StopKind.LENGTH_COLLAPSE, StopKind.CURVATURE_BLOWUP):
        return 1.05 * result.final.t
    return 10.0 * config.t_max


def resolve_probes(probes, result, config):
    """Turn probe specs into :class:`KernelConfig` objects with a definite ``T_hat``."""
    out = []
    for i, pr in enumerate(probes):
        if isinstance(pr, KernelConfig):
            x0, T, name = pr.x0, pr.T_hat, pr.name
        elif isinstance(pr, dict):
            x0, T, name = pr["x0"], pr.get("T_hat"), pr.get("name", "")
        else:
            x0, T = pr
            name = ""
        if T is None:
            T = default_T_hat(result, config)
        out.append(KernelConfig(tuple(float(v) for v in x0), float(T), name or f"p{i}"))
    return out


def record_state(state, probes, pair_budget=1500, accumulated=None):
    from .solver import junction_residuals

    p = state.points
    gq = differentiate(p)
    L1, L2, L3, L = lengths(p)
    theta, rate, rhs = [], [], []
    for kc in probes:
        if kc.T_hat > state.t:
            theta.append(gaussian_density(state, kc))
            rate.append(boundary_term_rate(state, kc))
            rhs.append(monotonicity_integrand(state, kc))
        else:
            theta.append(float("nan"))
            rate.append(float("nan"))
            rhs.append(float("nan"))
    try:
        E = embeddedness_E(state, pair_budget=pair_budget)
    except NotEmbedded:
        E = 0.0
    return MonitorRecord(
        t=state.t,
        L1=L1,
        L2=L2,
        L3=L3,
        L=L,
        k2_int=float(np.sum(gq.k ** 2 * gq.ds)),
        k_sup=float(np.max(np.abs(gq.k))),
        theta=theta,
        b_rate=rate,
        mono_rhs=rhs,
        E=E,
        O=(float(p[0, 0, 0]), float(p[0, 0, 1])),
        residuals=junction_residuals(p),
        rate_int=None if accumulated is None else [float(v) for v in accumulated[:, 0]],
        mono_int=None if accumulated is None else [float(v) for v in accumulated[:, 1]],
    )


def series_from_snapshots(snapshots, probes, pair_budget=1500, accumulated=None):
    if accumulated is None:
        return [record_state(s, probes, pair_budget) for s in snapshots]
    return [record_state(s, probes, pair_budget, a) for s, a in zip(snapshots, accumulated)]
