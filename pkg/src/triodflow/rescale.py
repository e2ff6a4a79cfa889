"""Parabolic rescaling of snapshots and classification of blow-up frames.

A snapshot at time ``t`` is mapped to ``y = (x - x0) / sqrt(2 (T_hat - t))``
with rescaled time ``-log(T_hat - t) / 2``. The three model sets are a line
through the origin (density 1), a halfline from the origin (1/2) and a flat
120 degree triod centred at the origin (3/2).
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidHorizon, PreconditionViolation
from .geometry import d_ds, differentiate

EPS_FIT = 0.05
EPS_ANG_DEG = 3.0
EPS_THETA = 0.1
MIN_WINDOW = 4.0
# how close the inner end of a halfline must come to the origin
HALFLINE_REACH = 0.25
MULTIPLICITY_SLACK = 1.2

SQRT_2PI = math.sqrt(2.0 * math.pi)


class BlowupKind(str, enum.Enum):
    LINE = "Line"
    HALFLINE = "Halfline"
    FLAT_TRIOD = "FlatTriod"
    EMPTY = "Empty"
    UNCLASSIFIED = "Unclassified"


MODEL_DENSITY = {BlowupKind.LINE: 1.0, BlowupKind.HALFLINE: 0.5, BlowupKind.FLAT_TRIOD: 1.5}


@dataclass(frozen=True)
class BlowupClass:
    """Verdict of :func:`classify_blowup`.

    ``direction`` is a unit vector for lines and halflines and a ``(3, 2)``
    array of ray directions for flat triods.
    """

    kind: BlowupKind
    density_estimate: float
    fit_residual: float
    direction: np.ndarray = None

    def __str__(self):
        return self.kind.value


@dataclass(frozen=True, eq=False)
class RescaledFrame:
    """One rescaled snapshot; curve arrays are lists so that synthetic frames
    may have any number of curves with their own node counts."""

    frak_t: float
    x0: np.ndarray
    T_hat: float
    points: list
    tau: list
    nu: list
    k_tilde: list
    lambda_tilde: list
    dsigma: list
    speed: list
    P_tilde: np.ndarray
    junction: np.ndarray = None
    scale: float = 1.0
    meta: dict = field(default_factory=dict)

    @property
    def n_curves(self):
        return len(self.points)


def _curve_list(points):
    pts = getattr(points, "points", points)
    return [np.asarray(c, dtype=float) for c in pts]


def _shared_junction(curves):
    if len(curves) == 3 and all(np.array_equal(curves[0][0], c[0]) for c in curves[1:]):
        return curves[0][0].copy()
    return None


def rescale_frame(state, x0, T_hat):
    """Rescale ``state`` about ``x0`` against the reference time ``T_hat``.

    Raises
    ------
    InvalidHorizon
        If ``T_hat <= state.t``.
    """
    h = T_hat - state.t
    if not h > 0:
        raise InvalidHorizon(f"T_hat={T_hat} is not after t={state.t}")
    f = math.sqrt(2.0 * h)
    x0 = np.asarray(x0, dtype=float)
    src = _curve_list(state)
    pts, tau, nu, kt, lt, dsig, spd = [], [], [], [], [], [], []
    for c in src:
        gq = differentiate(c)
        pts.append((c - x0) / f)
        tau.append(gq.tau)
        nu.append(gq.nu)
        kt.append(gq.k * f)
        lt.append(gq.lam * f)
        dsig.append(gq.ds / f)
        spd.append(gq.speed / f)
    junction = _shared_junction(pts)
    return RescaledFrame(
        frak_t=-0.5 * math.log(h),
        x0=x0,
        T_hat=float(T_hat),
        points=pts,
        tau=tau,
        nu=nu,
        k_tilde=kt,
        lambda_tilde=lt,
        dsigma=dsig,
        speed=spd,
        P_tilde=np.array([p[-1] for p in pts]),
        junction=junction,
        scale=f,
        meta={"t": float(state.t)},
    )


def frame_from_points(curves, frak_t=0.0):
    """Frame built directly from curves already in rescaled coordinates.

    Used for synthetic model sets; node 0 of each curve is its inner end.
    """
    pts = _curve_list(curves)
    tau, nu, kt, lt, dsig, spd = [], [], [], [], [], []
    for c in pts:
        gq = differentiate(c)
        tau.append(gq.tau)
        nu.append(gq.nu)
        kt.append(gq.k)
        lt.append(gq.lam)
        dsig.append(gq.ds)
        spd.append(gq.speed)
    return RescaledFrame(
        frak_t=float(frak_t),
        x0=np.zeros(2),
        T_hat=float("nan"),
        points=pts,
        tau=tau,
        nu=nu,
        k_tilde=kt,
        lambda_tilde=lt,
        dsigma=dsig,
        speed=spd,
        P_tilde=np.array([p[-1] for p in pts]),
        junction=_shared_junction(pts),
    )


def scaled_frame(frame, r):
    """The frame dilated by ``r`` about the origin (curvatures scale by ``1/r``)."""
    return frame_from_points([r * p for p in frame.points], frame.frak_t)


def rho_tilde(y):
    y = np.asarray(y, dtype=float)
    return np.exp(-0.5 * np.sum(y * y, axis=-1))


def rescaled_density(frame):
    """``(1/sqrt(2 pi)) * int exp(-|y|^2/2) dsigma``; equals the source Gaussian density."""
    total = 0.0
    for p, ds in zip(frame.points, frame.dsigma):
        total += float(np.sum(rho_tilde(p) * ds))
    return total / SQRT_2PI


def rescaled_monotonicity_integrand(frame, x_perp_sign=1.0):
    """``int |k_tilde nu + <y, nu> nu|^2 exp(-|y|^2/2) dsigma``.

    ``x_perp_sign=-1`` flips the sign of the position term; it exists only to
    document the orientation convention (see the circle test).
    """
    total = 0.0
    for p, nu, k, ds in zip(frame.points, frame.nu, frame.k_tilde, frame.dsigma):
        q = k + x_perp_sign * np.einsum("jk,jk->j", p, nu)
        total += float(np.sum(q * q * rho_tilde(p) * ds))
    return total


def boundary_term_rescaled_bound(frame):
    """Per-endpoint ``|<P_tilde, tau(1)>| exp(-|P_tilde|^2/2)`` for the frame."""
    P = frame.P_tilde
    t_end = np.array([t[-1] for t in frame.tau])
    return np.abs(np.einsum("ik,ik->i", P, t_end)) * rho_tilde(P)


def cumulative_boundary_integral(frames):
    """Trapezoid integral over rescaled time of the per-endpoint magnitudes.

    Returns one value per endpoint; frames must be ordered in time.

    Raises
    ------
    PreconditionViolation
        If the frames are not strictly increasing in rescaled time.
    """
    if len(frames) < 2:
        return np.zeros(frames[0].P_tilde.shape[0]) if frames else np.zeros(0)
    ft = np.array([f.frak_t for f in frames])
    if np.any(np.diff(ft) <= 0):
        raise PreconditionViolation("frames must be strictly increasing in rescaled time")
    vals = np.array([boundary_term_rescaled_bound(f) for f in frames])
    return np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(ft)[:, None], axis=0)


def _clip_length(a, b, R):
    """Length of the part of segment ``a -> b`` inside the closed disc of radius ``R``."""
    d = b - a
    dd = float(d @ d)
    if dd == 0.0:
        return 0.0
    # |a + s d|^2 = R^2
    bq = float(a @ d)
    c = float(a @ a) - R * R
    disc = bq * bq - dd * c
    if disc <= 0.0:
        return 0.0
    sq = math.sqrt(disc)
    s0 = max(0.0, (-bq - sq) / dd)
    s1 = min(1.0, (-bq + sq) / dd)
    return max(0.0, s1 - s0) * math.sqrt(dd)


def mass_in_ball(frame, R):
    """Length of the frame's polylines inside the ball ``B_R(0)``, segments clipped."""
    if not R > 0:
        raise PreconditionViolation("R must be positive")
    total = 0.0
    for p in frame.points:
        for j in range(p.shape[0] - 1):
            total += _clip_length(p[j], p[j + 1], R)
    return total


def _window_nodes(frame, R):
    pts = [p[np.sum(p * p, axis=1) <= R * R] for p in frame.points]
    return [q for q in pts if q.size]


def _tls_direction(X):
    """Principal direction of the points about the origin, and the RMS normal residual."""
    M = X.T @ X
    w, V = np.linalg.eigh(M)
    d = V[:, 1]
    n = V[:, 0]
    rms = math.sqrt(max(float(np.mean((X @ n) ** 2)), 0.0))
    return d, rms


def _ray_fit(X):
    """Best ray from the origin through points ``X``: direction and RMS distance."""
    u = X.sum(axis=0)
    nrm = float(np.linalg.norm(u))
    if nrm == 0.0:
        return None, float("inf")
    d = u / nrm
    t = X @ d
    perp = X - np.outer(np.maximum(t, 0.0), d)
    return d, math.sqrt(float(np.mean(np.sum(perp * perp, axis=1))))


def classify_blowup(frame, window_R=MIN_WINDOW, eps_fit=EPS_FIT, eps_ang_deg=EPS_ANG_DEG, eps_theta=EPS_THETA):
    """Match a frame against the line, halfline and flat-triod models.

    Nodes with ``|y| <= window_R`` are fitted in the order line, halfline,
    flat triod. A geometric match is kept only if the rescaled density is
    within ``eps_theta`` of the model value; a line must also carry mass at
    most ``1.2 * 2 R`` inside the window (multiplicity one).

    Raises
    ------
    PreconditionViolation
        If ``window_R < 4``.
    """
    if window_R < MIN_WINDOW:
        raise PreconditionViolation(f"window_R must be at least {MIN_WINDOW}")
    R = float(window_R)
    density = rescaled_density(frame)
    parts = _window_nodes(frame, R)
    if not parts:
        return BlowupClass(BlowupKind.EMPTY, density, 0.0)
    X = np.concatenate(parts)

    def accept(kind, resid, direction):
        if abs(density - MODEL_DENSITY[kind]) <= eps_theta:
            return BlowupClass(kind, density, resid, direction)
        return None

    best_resid = float("inf")
    if X.shape[0] >= 2:
        d, rms = _tls_direction(X)
        best_resid = rms
        if rms <= eps_fit:
            t = X @ d
            # both rays must be populated out to a fair part of the window
            if t.max() >= 0.5 * R and t.min() <= -0.5 * R:
                if mass_in_ball(frame, R) <= MULTIPLICITY_SLACK * 2.0 * R:
                    got = accept(BlowupKind.LINE, rms, d)
                    if got is not None:
                        return got
            else:
                if t.min() < 0:
                    d, t = -d, -t
                near = float(np.min(np.linalg.norm(X, axis=1)))
                if t.min() >= -eps_fit and near <= HALFLINE_REACH and t.max() >= 0.5 * R:
                    got = accept(BlowupKind.HALFLINE, rms, d)
                    if got is not None:
                        return got
    if frame.junction is not None and np.linalg.norm(frame.junction) <= eps_fit:
        dirs, res = [], []
        for p in frame.points:
            q = p[np.sum(p * p, axis=1) <= R * R][1:]
            if q.shape[0] < 2:
                break
            d, r = _ray_fit(q)
            if d is None:
                break
            dirs.append(d)
            res.append(r)
        if len(dirs) == 3:
            rms = max(res)
            best_resid = min(best_resid, rms)
            ang = []
            for i in range(3):
                for j in range(i + 1, 3):
                    c = float(np.clip(dirs[i] @ dirs[j], -1.0, 1.0))
                    ang.append(math.degrees(math.acos(c)))
            if rms <= eps_fit and all(abs(a - 120.0) <= eps_ang_deg for a in ang):
                got = accept(BlowupKind.FLAT_TRIOD, rms, np.array(dirs))
                if got is not None:
                    return got
    return BlowupClass(BlowupKind.UNCLASSIFIED, density, best_resid)


def rescaled_curvature_residual(frame_a, frame_b, margin=4):
    """Max mismatch of the rescaled curvature evolution between two frames.

    Checks ``d k~/dt~ = k~_ss + k~_s lambda~ + k~^3 - k~`` on nodes at least
    ``margin`` away from the curve ends; the right-hand side is the average
    of its values on the two frames. Both frames must share ``x0``,
    ``T_hat`` and node layout, with no resampling in between.
    """
    if len(frame_a.points) != len(frame_b.points) or any(
        a.shape != b.shape for a, b in zip(frame_a.points, frame_b.points)
    ):
        raise PreconditionViolation("frames have different node layouts")
    dft = frame_b.frak_t - frame_a.frak_t
    if not dft > 0:
        raise PreconditionViolation("frames must be increasing in rescaled time")
    worst = 0.0
    for i in range(len(frame_a.points)):
        rhs = []
        for f in (frame_a, frame_b):
            g = _FrameGeom(f.speed[i])
            k = f.k_tilde[i]
            ks = d_ds(k, g)
            kss = d_ds(ks, g)
            rhs.append(kss + ks * f.lambda_tilde[i] + k ** 3 - k)
        rate = (frame_b.k_tilde[i] - frame_a.k_tilde[i]) / dft
        err = np.abs(rate - 0.5 * (rhs[0] + rhs[1]))
        sl = slice(margin, -margin if margin else None)
        worst = max(worst, float(np.max(err[sl])))
    return worst


@dataclass(frozen=True)
class _FrameGeom:
    speed: np.ndarray


def model_curves(kind, direction=0.0, radius=8.0, n=4096, center=(0.0, 0.0)):
    """Sampled model set: ``"line"``, ``"halfline"`` or ``"flat_triod"``.

    ``direction`` is an angle in radians and ``n`` the segment count per
    curve. Each curve starts at ``center``; the line is a single curve
    through it.
    """
    c = np.asarray(center, dtype=float)
    s = np.linspace(0.0, radius, n + 1)[:, None]
    u = np.array([math.cos(direction), math.sin(direction)])
    if kind == "line":
        s2 = np.linspace(-radius, radius, n + 1)[:, None]
        return [c + s2 * u]
    if kind == "halfline":
        return [c + s * u]
    if kind == "flat_triod":
        out = []
        for m in range(3):
            a = direction + 2.0 * math.pi * m / 3.0
            out.append(c + s * np.array([math.cos(a), math.sin(a)]))
        for o in out:
            o[0] = c
        return out
    raise ValueError(f"unknown model set {kind!r}")


def frames_from_snapshots(snapshots, x0, T_hat):
    """Rescale every snapshot strictly before ``T_hat``."""
    return [rescale_frame(s, x0, T_hat) for s in snapshots if s.t < T_hat]
