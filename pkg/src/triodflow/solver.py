"""Time integration of the triod curvature flow.

Interior nodes follow ``gamma_t = gamma_xx / |gamma_x|^2``; the outer
endpoints never move and the junction is re-solved after each interior sweep
so that the three one-sided unit tangents sum to zero.
"""

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import DegenerateSegment, JunctionSolveFailed, PreconditionViolation, TopologyMismatch, TriodFlowError
from .geometry import Triod, d_ds, differentiate, resample_arclength

SCHEMES = ("explicit", "semi-implicit")


@dataclass(frozen=True, eq=False)
class FlowState:
    t: float
    triod: Triod
    step_index: int = 0
    dt_last: float = 0.0
    n_projections: int = 0
    # (lengths, int k^2 ds, angle residual, min chord), filled in by ``step``
    metrics: tuple = None
    # junction displacement over the last step divided by dt
    v_junction: np.ndarray = None

    @property
    def points(self):
        return self.triod.points


@dataclass(frozen=True)
class SolverConfig:
    cfl: float = 0.25
    n_nodes: int = 64
    resample_every: int = 10
    t_max: float = 10.0
    eps_collapse: float = 1e-2
    k2_blow: float = 1e6
    eps_steady: float = 1e-5
    scheme: str = "semi-implicit"
    implicit_factor: float = 10.0
    tol_angle: float = 1e-8
    newton_max_iter: int = 50
    record_every: int = 50
    # fault injection for the acceptance runner: flips the first tangent in the junction solve
    junction_fault: bool = False

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        for name in ("t_max", "eps_collapse", "k2_blow", "eps_steady", "tol_angle", "implicit_factor"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.n_nodes < 8 or self.resample_every < 1 or self.record_every < 1:
            raise ValueError("n_nodes >= 8, resample_every >= 1 and record_every >= 1 required")
        if self.implicit_factor > 10:
            raise ValueError("implicit_factor above 10 is outside the supported range")

    def replace(self, **kw):
        return replace(self, **kw)


class StopKind(str, enum.Enum):
    TIME_MAX = "TimeMax"
    LENGTH_COLLAPSE = "LengthCollapse"
    CURVATURE_BLOWUP = "CurvatureBlowup"
    STEADY_STATE = "SteadyState"


@dataclass(frozen=True)
class StopReason:
    kind: StopKind
    curve: int = None

    def __str__(self):
        if self.kind is StopKind.LENGTH_COLLAPSE:
            return f"LengthCollapse({self.curve})"
        return self.kind.value


def stable_dt(state, config):
    """``cfl * (min chord)^2``, the explicit parabolic stability limit."""
    if state.metrics is not None:
        h = state.metrics[3]
    else:
        h = float(np.linalg.norm(np.diff(state.points, axis=1), axis=2).min())
    if not h > 1e-12 * float(np.hypot(*np.ptp(state.points.reshape(-1, 2), axis=0))):
        raise DegenerateSegment("vanishing chord")
    return config.cfl * h * h


def junction_anchors(points):
    """Points whose direction from the junction is its second-order one-sided tangent."""
    return (4.0 * points[:, 1] - points[:, 2]) / 3.0


def solve_junction(anchors, start, tol=1e-8, max_iter=50, signs=(1.0, 1.0, 1.0)):
    """Damped Newton for the point where the unit vectors to the anchors sum to zero.

    Raises
    ------
    JunctionSolveFailed
        If the residual is above ``tol`` after ``max_iter`` iterations.
    """
    o, res = kernels.junction_newton(anchors, start, signs, max_iter)
    if not np.isfinite(res):
        raise JunctionSolveFailed("junction coincides with an anchor")
    if not res <= tol:
        raise JunctionSolveFailed(f"junction residual {res:.3e} above {tol:.1e}")
    return o


def _place_junction(points, config, start=None):
    a = junction_anchors(points)
    signs = (-1.0, 1.0, 1.0) if config.junction_fault else (1.0, 1.0, 1.0)
    o = solve_junction(
        a,
        points[0, 0] if start is None else start,
        tol=config.tol_angle,
        max_iter=config.newton_max_iter,
        signs=signs,
    )
    points[:, 0] = o
    return points


def _coupled_implicit(p, dt, config):
    """Implicit sweep solved together with the junction condition.

    With frozen coefficients the new interior is ``base + beta * o``, so the
    one-sided anchors are affine in the junction ``o``: ``a_i = b_i + c_i o``
    with ``0 < c_i < 1``. The unit vectors from ``o`` to ``a_i`` point the same
    way as those to ``b_i / (1 - c_i)``, which turns the coupled problem into
    the plain junction solve.
    """
    base, beta = kernels.implicit_split(p, dt)
    b = (4.0 * base[:, 1] - base[:, 2]) / 3.0
    c = (4.0 * beta[:, 1] - beta[:, 2]) / 3.0
    if not np.all(c < 1.0):
        raise JunctionSolveFailed("implicit junction coupling is singular")
    signs = (-1.0, 1.0, 1.0) if config.junction_fault else (1.0, 1.0, 1.0)
    o = solve_junction(
        b / (1.0 - c)[:, None],
        p[0, 0],
        tol=config.tol_angle,
        max_iter=config.newton_max_iter,
        signs=signs,
    )
    new = base + beta[..., None] * o
    new[:, 0] = o
    new[:, -1] = p[:, -1]
    return new


def step(state, dt, config):
    """Advance one time step: interior sweep, junction solve, confinement check.

    Raises
    ------
    PreconditionViolation
        If ``dt`` exceeds the scheme's limit (``stable_dt``, or ten times it
        for the semi-implicit scheme).
    JunctionSolveFailed, DegenerateSegment
    """
    limit = stable_dt(state, config)
    if config.scheme != "explicit":
        limit *= 10.0
    if not 0 < dt <= limit * (1 + 1e-9):
        raise PreconditionViolation(f"dt={dt:.3e} outside (0, {limit:.3e}]")
    p = state.points
    if config.scheme == "explicit":
        new = kernels.interior_sweep(p, dt, False)
        _place_junction(new, config, start=p[0, 0])
    else:
        new = _coupled_implicit(p, dt, config)
    domain = state.triod.domain
    interior = new[:, 1:-1].reshape(-1, 2)
    outside = ~domain.contains(interior)
    n_proj = int(np.count_nonzero(outside))
    if n_proj:
        fixed = domain.project_inside(interior[outside], 1e-9 * domain.diameter)
        interior = interior.copy()
        interior[outside] = fixed
        new[:, 1:-1] = interior.reshape(3, -1, 2)
    metrics = kernels.step_metrics(new)
    if not metrics[3] > 1e-12 * domain.diameter or not math.isfinite(metrics[1]):
        raise DegenerateSegment("step produced coincident nodes")
    return FlowState(
        t=state.t + dt,
        triod=Triod(new, domain),
        step_index=state.step_index + 1,
        dt_last=dt,
        n_projections=state.n_projections + n_proj,
        metrics=metrics,
        v_junction=(new[0, 0] - p[0, 0]) / dt,
    )


def resample_state(state, config):
    """Arclength-resample every curve, then restore the junction angle condition."""
    p = np.stack([resample_arclength(state.points[i], config.n_nodes) for i in range(3)])
    _place_junction(p, config)
    return replace(state, triod=Triod(p, state.triod.domain), metrics=kernels.step_metrics(p))


def prepare_initial(triod, config):
    """Resample to ``config.n_nodes`` if needed and enforce the junction condition."""
    p = triod.points.copy()
    if triod.N != config.n_nodes:
        p = np.stack([resample_arclength(p[i], config.n_nodes) for i in range(3)])
    tau0 = differentiate(p).tau[:, 0]
    if np.linalg.norm(tau0.sum(axis=0)) > 0.01 * config.tol_angle:
        _place_junction(p, config)
    return Triod(p, triod.domain)


@dataclass
class RunResult:
    series: list
    final: FlowState
    reason: StopReason
    snapshots: list
    probes: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    # per snapshot and probe: (int of endpoint rate, int of monotonicity integrand) from t=0
    accumulated: np.ndarray = None


def _step_dt(state, config):
    dt = stable_dt(state, config)
    if config.scheme == "semi-implicit":
        dt *= config.implicit_factor
    return min(dt, config.t_max - state.t) if config.t_max > state.t else dt


def run(initial, config, probes=(), pair_budget=1500, record_series=True, on_record=None, monitor_junction=False):
    """Integrate until the first stopping criterion fires.

    Parameters
    ----------
    initial : Triod
    config : SolverConfig
    probes : sequence of KernelConfig or ``(x0, T_hat)`` pairs
        A ``T_hat`` of ``None`` is resolved after the run: ``1.05`` times the
        final time for singular stops, ``10 * t_max`` otherwise.
    pair_budget : int
        Node-pair budget for the embeddedness functional on each record.
    monitor_junction : bool
        Evaluate :func:`junction_residuals` after every accepted step and keep
        the maxima in ``stats["junction_max"]`` (costly).

    Returns
    -------
    RunResult
        Stopping errors are re-raised with the partial result attached as
        ``exc.partial``.
    """
    from .functionals import KernelConfig, resolve_probes, series_from_snapshots

    stats = {"max_angle_residual": 0.0, "n_resamples": 0, "n_steps": 0}
    try:
        state = FlowState(0.0, prepare_initial(initial, config))
    except TriodFlowError as exc:
        exc.partial = RunResult([], FlowState(0.0, initial), None, [], [], stats)
        raise
    snapshots = [state]
    # probes with a known T_hat get their time integrals accumulated at every step
    online = [i for i, pr in enumerate(probes) if _probe_T_hat(pr) is not None]
    acc_track = _ProbeAccumulator([_probe_spec(probes[i]) for i in online], state)
    accumulated = [acc_track.value()]
    reason = None
    try:
        while reason is None:
            dt = _step_dt(state, config)
            new = step(state, dt, config)
            speed = float(np.max(np.abs(new.points - state.points))) / dt
            if new.step_index % config.resample_every == 0:
                new = resample_state(new, config)
                stats["n_resamples"] += 1
            lengths, k2, ang, _ = new.metrics
            stats["max_angle_residual"] = max(stats["max_angle_residual"], ang)
            state = new
            acc_track.advance(state, dt)
            if monitor_junction:
                jr = junction_residuals(state)
                jm = stats.setdefault("junction_max", dict.fromkeys(jr, 0.0))
                for key, val in jr.items():
                    jm[key] = max(jm[key], val)
            if state.t >= config.t_max * (1 - 1e-12):
                reason = StopReason(StopKind.TIME_MAX)
            elif lengths.min() < config.eps_collapse:
                reason = StopReason(StopKind.LENGTH_COLLAPSE, int(np.argmin(lengths)))
            elif k2 > config.k2_blow:
                reason = StopReason(StopKind.CURVATURE_BLOWUP)
            elif speed < config.eps_steady:
                reason = StopReason(StopKind.STEADY_STATE)
            if reason is not None or state.step_index % config.record_every == 0:
                snapshots.append(state)
                accumulated.append(acc_track.value())
                if on_record is not None:
                    on_record(state)
    except TriodFlowError as exc:
        stats["n_steps"] = state.step_index
        exc.partial = RunResult([], state, None, snapshots, [], stats)
        raise
    stats["n_steps"] = state.step_index
    stats["n_projections"] = state.n_projections
    result = RunResult([], state, reason, snapshots, [], stats)
    result.probes = resolve_probes(probes, result, config)
    m = len(result.probes)
    full = np.full((len(snapshots), m, 2), np.nan)
    for col, i in enumerate(online):
        full[:, i] = np.array([a[col] for a in accumulated]).reshape(len(snapshots), 2)
    result.accumulated = full
    if record_series:
        result.series = series_from_snapshots(snapshots, result.probes, pair_budget=pair_budget, accumulated=full)
    return result


def _probe_T_hat(pr):
    if hasattr(pr, "T_hat"):
        return pr.T_hat
    if isinstance(pr, dict):
        return pr.get("T_hat")
    return pr[1]


def _probe_spec(pr):
    if hasattr(pr, "x0"):
        return np.asarray(pr.x0, float), float(pr.T_hat)
    if isinstance(pr, dict):
        return np.asarray(pr["x0"], float), float(pr["T_hat"])
    return np.asarray(pr[0], float), float(pr[1])


class _ProbeAccumulator:
    """Trapezoid-in-time integrals of the endpoint rate and the monotonicity integrand.

    Integration stops for a probe once its horizon is exhausted; from then on
    its value is NaN.
    """

    def __init__(self, specs, state):
        self.centers = np.array([c for c, _ in specs]).reshape(-1, 2)
        self.T = np.array([T for _, T in specs], dtype=float)
        self.acc = np.zeros((len(specs), 2))
        self.prev = self._terms(state)

    def _terms(self, state):
        out = np.full((self.T.size, 3), np.nan)
        live = self.T > state.t
        if np.any(live):
            out[live] = kernels.probe_terms(state.points, self.centers[live], self.T[live] - state.t)
        return out

    def advance(self, state, dt):
        if not self.T.size:
            return
        cur = self._terms(state)
        self.acc += 0.5 * dt * (self.prev[:, 1:] + cur[:, 1:])
        self.prev = cur

    def value(self):
        return self.acc.copy()


def junction_residuals(state, velocity=None):
    """Discrete residuals of the junction identities.

    The tangential velocity of curve ``i`` at the junction is taken as
    ``<V, tau_i(0)>`` where ``V`` is the junction velocity: ``velocity`` if
    given, else ``state.v_junction`` when the state came out of :func:`step`.
    Without either, the parametric value ``<gamma_xx, tau>/|gamma_x|^2`` at
    node 0 is used; resampling resets that value, so it is only meaningful on
    runs that do not resample.

    ``lambda_identity`` compares each tangential velocity with the difference
    of the neighbouring curvatures over sqrt(3), with neighbours taken in the
    counterclockwise order of the junction tangents.
    """
    p = np.asarray(getattr(state, "points", state))
    if velocity is None:
        velocity = getattr(state, "v_junction", None)
    gq = differentiate(p)
    o = p[:, 0]
    conc = max(float(np.linalg.norm(o[i] - o[j])) for i in range(3) for j in range(i + 1, 3))
    k0 = gq.k[:, 0]
    t0 = gq.tau[:, 0]
    l0 = gq.lam[:, 0] if velocity is None else t0 @ np.asarray(velocity, dtype=float)
    ks = d_ds(gq.k, gq)[:, 0]
    flux = ks + l0 * k0
    ccw = (t0[0, 0] * t0[1, 1] - t0[0, 1] * t0[1, 0]) > 0
    prev = np.roll(k0, 1)
    nxt = np.roll(k0, -1)
    pred = (prev - nxt) / math.sqrt(3.0) if ccw else (nxt - prev) / math.sqrt(3.0)
    return {
        "concurrency": conc,
        "angle": float(np.linalg.norm(t0.sum(axis=0))),
        "sum_k": float(abs(k0.sum())),
        "sum_lambda": float(abs(l0.sum())),
        "flux_spread": float(np.max(flux) - np.min(flux)),
        "lambda_identity": float(np.max(np.abs(l0 - pred))),
    }


def _matched(before, after):
    a = np.asarray(getattr(before, "points", before))
    b = np.asarray(getattr(after, "points", after))
    if a.shape != b.shape:
        raise TopologyMismatch("states have different node layouts")
    return a, b


def pde_residual_check(state_before, state_after, dt, margin=4):
    """Max mismatch between measured rates and the curvature-flow evolution laws.

    Rates are difference quotients between the two states; right-hand sides
    are evaluated on the midpoint geometry. Nodes within ``margin`` of either
    end of a curve are excluded.
    """
    a, b = _matched(state_before, state_after)
    ga, gb = differentiate(a), differentiate(b)
    gm = differentiate(0.5 * (a + b))
    k, lam = gm.k, gm.lam
    ks = d_ds(k, gm)
    kss = d_ds(ks, gm)
    ls = d_ds(lam, gm)
    lss = d_ds(ls, gm)
    sl = slice(margin, -margin if margin else None)
    rate_k = (gb.k - ga.k) / dt
    rate_l = (gb.lam - ga.lam) / dt
    rate_t = (gb.tau - ga.tau) / dt
    rhs_k = kss + ks * lam + k ** 3
    rhs_l = lss - lam * ls - 2.0 * k * ks + lam * k * k
    rhs_t = (ks + k * lam)[..., None] * gm.nu
    return {
        "res_k": float(np.max(np.abs(rate_k - rhs_k)[:, sl])),
        "res_lambda": float(np.max(np.abs(rate_l - rhs_l)[:, sl])),
        "res_tau": float(np.max(np.linalg.norm(rate_t - rhs_t, axis=-1)[:, sl])),
    }


def commutation_residual(state_before, state_after, dt, margin=4):
    """Mismatch of the time/arclength commutation rule applied to the curvature."""
    a, b = _matched(state_before, state_after)
    ga, gb = differentiate(a), differentiate(b)
    gm = differentiate(0.5 * (a + b))
    dt_ds = (d_ds(gb.k, gb) - d_ds(ga.k, ga)) / dt
    ds_dt = d_ds((gb.k - ga.k) / dt, gm)
    ks = d_ds(gm.k, gm)
    corr = (gm.k ** 2 - d_ds(gm.lam, gm)) * ks
    sl = slice(margin, -margin if margin else None)
    return float(np.max(np.abs(dt_ds - ds_dt - corr)[:, sl]))
