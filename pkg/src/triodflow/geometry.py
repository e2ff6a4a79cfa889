"""Discrete differential geometry on sampled curves and triods.

A curve is an array of ``N + 1`` planar nodes at the uniform parameter values
``x_j = j / N``. A triod stores its three curves in one ``(3, N + 1, 2)``
array; node 0 of every curve is the shared junction and node ``N`` is the
fixed endpoint on the domain boundary.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from . import kernels
from .errors import DegenerateSegment, EmptyWindow

__all__ = [
    "DomainShape",
    "SampledCurve",
    "Triod",
    "GeometricQuantities",
    "differentiate",
    "d_ds",
    "resample_arclength",
    "tree_geodesic",
    "enclosed_area",
    "self_intersections",
    "count_line_intersections",
    "graph_window_check",
    "GraphWindow",
    "rotate90",
]

MIN_NODES = 8


def rotate90(v):
    """Counterclockwise rotation by pi/2 of the last axis."""
    v = np.asarray(v)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


@dataclass(frozen=True, eq=False)
class DomainShape:
    """Strictly convex domain: a disc or a counterclockwise convex polygon."""

    kind: str
    center: np.ndarray = field(default_factory=lambda: np.zeros(2))
    radius: float = 1.0
    vertices: np.ndarray = None

    def __post_init__(self):
        if self.kind == "disc":
            object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(2))
            if not self.radius > 0:
                raise ValueError("disc radius must be positive")
        elif self.kind == "polygon":
            v = np.asarray(self.vertices, dtype=float)
            if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
                raise ValueError("polygon needs at least three 2-d vertices")
            e = np.roll(v, -1, axis=0) - v
            turn = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
            if not np.all(turn > 0):
                raise ValueError("polygon must be strictly convex and counterclockwise")
            object.__setattr__(self, "vertices", v)
            object.__setattr__(self, "center", v.mean(axis=0))
        else:
            raise ValueError(f"unknown domain kind {self.kind!r}")

    @classmethod
    def disc(cls, center=(0.0, 0.0), radius=1.0):
        return cls("disc", center=np.asarray(center, dtype=float), radius=float(radius))

    @classmethod
    def polygon(cls, vertices):
        return cls("polygon", vertices=vertices)

    def signed_distance(self, pts):
        """Distance to the boundary, positive inside."""
        pts = np.asarray(pts, dtype=float)
        if self.kind == "disc":
            return self.radius - np.linalg.norm(pts - self.center, axis=-1)
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        n_in = rotate90(e) / np.linalg.norm(e, axis=1)[:, None]
        d = np.einsum("...k,ek->...e", pts, n_in) - np.einsum("ek,ek->e", v, n_in)
        return d.min(axis=-1)

    def contains(self, pts, strict=True):
        d = self.signed_distance(pts)
        return d > 0 if strict else d >= 0

    def project_inside(self, pts, offset):
        """Move points lying outside or on the boundary to depth ``offset``."""
        pts = np.array(pts, dtype=float)
        if self.kind == "disc":
            r = np.linalg.norm(pts - self.center, axis=-1, keepdims=True)
            return self.center + (pts - self.center) * ((self.radius - offset) / r)
        out = pts.copy()
        c = self.center
        for _ in range(60):
            d = self.signed_distance(out)
            bad = d < offset
            if not np.any(bad):
                break
            out[bad] = c + (out[bad] - c) * 0.999
        return out

    @property
    def diameter(self):
        if self.kind == "disc":
            return 2.0 * self.radius
        v = self.vertices
        return float(np.max(np.linalg.norm(v[:, None] - v[None], axis=-1)))

    def boundary_polyline(self, n=256):
        if self.kind == "disc":
            th = np.linspace(0.0, 2 * np.pi, n + 1)
            return self.center + self.radius * np.stack([np.cos(th), np.sin(th)], axis=1)
        return np.concatenate([self.vertices, self.vertices[:1]])

    def point_at_angle(self, angle_deg):
        """Boundary point hit by the ray from the center at ``angle_deg``."""
        u = np.array([np.cos(np.radians(angle_deg)), np.sin(np.radians(angle_deg))])
        if self.kind == "disc":
            return self.center + self.radius * u
        lo, hi = 0.0, self.diameter
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.signed_distance(self.center + mid * u) > 0:
                lo = mid
            else:
                hi = mid
        return self.center + 0.5 * (lo + hi) * u

    def to_dict(self):
        if self.kind == "disc":
            return {"kind": "disc", "center": self.center.tolist(), "radius": self.radius}
        return {"kind": "polygon", "vertices": self.vertices.tolist()}

    @classmethod
    def from_dict(cls, d):
        if d["kind"] == "disc":
            return cls.disc(d.get("center", (0.0, 0.0)), d.get("radius", 1.0))
        return cls.polygon(d["vertices"])


def _check_regular(p):
    chords = np.linalg.norm(np.diff(p, axis=-2), axis=-1)
    span = np.ptp(p.reshape(-1, 2), axis=0)
    diam = float(np.hypot(*span))
    if not np.all(chords > 1e-12 * diam):
        raise DegenerateSegment("consecutive nodes coincide")
    return chords


@dataclass(frozen=True, eq=False)
class SampledCurve:
    points: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        if p.ndim != 2 or p.shape[1] != 2 or p.shape[0] < MIN_NODES + 1:
            raise ValueError(f"a curve needs at least {MIN_NODES + 1} planar nodes")
        if not np.all(np.isfinite(p)):
            raise ValueError("curve coordinates must be finite")
        _check_regular(p)
        object.__setattr__(self, "points", p)

    @property
    def N(self):
        return self.points.shape[0] - 1

    @property
    def length(self):
        return float(np.linalg.norm(np.diff(self.points, axis=0), axis=1).sum())


@dataclass(frozen=True, eq=False)
class Triod:
    """Three curves sharing node 0 (the junction), each ending on the boundary."""

    points: np.ndarray
    domain: DomainShape

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        if p.ndim != 3 or p.shape[0] != 3 or p.shape[2] != 2 or p.shape[1] < MIN_NODES + 1:
            raise ValueError("triod points must have shape (3, N+1, 2) with N >= 8")
        if not np.all(np.isfinite(p)):
            raise ValueError("triod coordinates must be finite")
        if not (np.array_equal(p[0, 0], p[1, 0]) and np.array_equal(p[0, 0], p[2, 0])):
            raise ValueError("the three curves must share node 0")
        object.__setattr__(self, "points", p)

    @classmethod
    def from_curves(cls, curves, domain):
        pts = [c.points if isinstance(c, SampledCurve) else np.asarray(c, float) for c in curves]
        return cls(np.stack(pts), domain)

    @property
    def N(self):
        return self.points.shape[1] - 1

    @property
    def curves(self):
        return tuple(SampledCurve(self.points[i]) for i in range(3))

    @property
    def junction(self):
        return self.points[0, 0].copy()

    @property
    def endpoints(self):
        return self.points[:, -1].copy()

    def with_points(self, points):
        return Triod(points, self.domain)

    def lengths(self):
        return np.linalg.norm(np.diff(self.points, axis=1), axis=2).sum(axis=1)

    def violations(self, tol_boundary=1e-9, tol_angle=None):
        """Human-readable list of broken triod invariants (empty when valid)."""
        out = []
        p = self.points
        try:
            _check_regular(p)
        except DegenerateSegment:
            out.append("regularity")
        dist = self.domain.signed_distance(p[:, -1])
        if np.any(np.abs(dist) > tol_boundary * max(1.0, self.domain.diameter)):
            out.append("endpoints off the boundary")
        if np.any(np.linalg.norm(p[:, -1] - np.roll(p[:, -1], 1, axis=0), axis=1) == 0):
            out.append("endpoints not distinct")
        if not np.all(self.domain.contains(p[:, :-1].reshape(-1, 2))):
            out.append("interior node outside the domain")
        if tol_angle is not None:
            tau0 = differentiate(p).tau[:, 0]
            if np.linalg.norm(tau0.sum(axis=0)) > tol_angle:
                out.append("junction angle condition")
        if self_intersections(self):
            out.append("not embedded")
        return out


@dataclass(frozen=True, eq=False)
class GeometricQuantities:
    """Nodal geometry; arrays carry the curve shape ``(..., N+1)``."""

    tau: np.ndarray
    nu: np.ndarray
    k: np.ndarray
    lam: np.ndarray
    v: np.ndarray
    ds: np.ndarray
    speed: np.ndarray  # |gamma_x|

    @property
    def N(self):
        return self.k.shape[-1] - 1


def _points_of(obj):
    if isinstance(obj, (SampledCurve, Triod)):
        return obj.points
    return np.asarray(obj, dtype=float)


def _dx(p, n):
    """First parameter derivative, central inside and second-order one-sided at the ends."""
    g = np.empty_like(p)
    g[..., 1:-1, :] = (p[..., 2:, :] - p[..., :-2, :]) * (0.5 * n)
    g[..., 0, :] = (-3.0 * p[..., 0, :] + 4.0 * p[..., 1, :] - p[..., 2, :]) * (0.5 * n)
    g[..., -1, :] = (3.0 * p[..., -1, :] - 4.0 * p[..., -2, :] + p[..., -3, :]) * (0.5 * n)
    return g


def _dxx(p, n):
    g = np.empty_like(p)
    n2 = float(n) * n
    g[..., 1:-1, :] = (p[..., 2:, :] - 2.0 * p[..., 1:-1, :] + p[..., :-2, :]) * n2
    g[..., 0, :] = (2.0 * p[..., 0, :] - 5.0 * p[..., 1, :] + 4.0 * p[..., 2, :] - p[..., 3, :]) * n2
    g[..., -1, :] = (2.0 * p[..., -1, :] - 5.0 * p[..., -2, :] + 4.0 * p[..., -3, :] - p[..., -4, :]) * n2
    return g


def differentiate(curve):
    """Tangent, normal, curvature, tangential velocity and arclength weights.

    Accepts a :class:`SampledCurve`, a :class:`Triod` or any array of shape
    ``(..., N+1, 2)``; the result is vectorized over the leading axes.

    Raises
    ------
    DegenerateSegment
        If two consecutive nodes are closer than ``1e-12`` times the curve size.
    """
    p = _points_of(curve)
    n = p.shape[-2] - 1
    _check_regular(p)
    gx = _dx(p, n)
    gxx = _dxx(p, n)
    speed = np.linalg.norm(gx, axis=-1)
    tau = gx / speed[..., None]
    nu = rotate90(tau)
    s2 = speed * speed
    k = np.einsum("...k,...k->...", gxx, nu) / s2
    lam = np.einsum("...k,...k->...", gxx, tau) / s2
    v = gxx / s2[..., None]
    w = np.full(n + 1, 1.0 / n)
    w[0] = w[-1] = 0.5 / n
    return GeometricQuantities(tau=tau, nu=nu, k=k, lam=lam, v=v, ds=speed * w, speed=speed)


def d_ds(f, gq):
    """Arclength derivative of a nodal field, same stencils as :func:`differentiate`."""
    f = np.asarray(f, dtype=float)
    n = f.shape[-1] - 1
    fx = np.empty_like(f)
    fx[..., 1:-1] = (f[..., 2:] - f[..., :-2]) * (0.5 * n)
    fx[..., 0] = (-3.0 * f[..., 0] + 4.0 * f[..., 1] - f[..., 2]) * (0.5 * n)
    fx[..., -1] = (3.0 * f[..., -1] - 4.0 * f[..., -2] + f[..., -3]) * (0.5 * n)
    return fx / gq.speed


def resample_arclength(curve, N=None):
    """Redistribute nodes uniformly in cumulative chord length.

    A cubic spline through the nodes, parametrized by chord length, supplies
    the new positions; both end nodes are copied exactly.
    """
    p = _points_of(curve)
    if N is None:
        N = p.shape[0] - 1
    chords = _check_regular(p)
    s = np.concatenate([[0.0], np.cumsum(chords)])
    spline = CubicSpline(s, p, axis=0)
    s_new = np.linspace(0.0, s[-1], N + 1)
    out = spline(s_new)
    out[0] = p[0]
    out[-1] = p[-1]
    if isinstance(curve, SampledCurve):
        return SampledCurve(out)
    return out


def tree_geodesic(triod, a, b):
    """Unique path in the triod between two ``(curve, node)`` locators."""
    n = triod.N
    for c, j in (a, b):
        if not (0 <= c < 3 and 0 <= j <= n):
            raise IndexError(f"invalid node locator {(c, j)}")
    return np.array(kernels.geodesic_points(triod.points, a[0], a[1], b[0], b[1]))


def enclosed_area(p, q, geodesic):
    """Area enclosed by a path from ``p`` to ``q`` and the segment ``[q, p]``.

    Where the closing segment crosses the path, the loop is split at each
    crossing and the absolute areas of the pieces are summed.
    """
    g = np.asarray(geodesic, dtype=float)
    if g.shape[0] < 3:
        return 0.0
    loop = g
    if not np.array_equal(g[0], p):
        loop = np.concatenate([[np.asarray(p, float)], loop])
    if not np.array_equal(g[-1], q):
        loop = np.concatenate([loop, [np.asarray(q, float)]])
    return float(kernels.loop_area(loop))


def _segments(triod):
    p = triod.points
    a = p[:, :-1].reshape(-1, 2)
    b = p[:, 1:].reshape(-1, 2)
    n = triod.N
    ids = np.array([(i, j) for i in range(3) for j in range(n)])
    return a, b, ids


def self_intersections(triod):
    """Crossings between segments that do not share a node.

    Returns a list of ``((curve, segment), (curve, segment), point)``; the
    list is empty exactly when the triod is embedded.
    """
    a, b, ids = _segments(triod)
    pairs, pts = kernels.segment_intersections(a, b)
    out = []
    for (s1, s2), x in zip(pairs, pts):
        (c1, j1), (c2, j2) = ids[s1], ids[s2]
        if c1 == c2 and abs(j1 - j2) <= 1:
            continue
        if c1 != c2 and j1 == 0 and j2 == 0:
            continue
        out.append(((int(c1), int(j1)), (int(c2), int(j2)), np.array(x)))
    return out


def count_line_intersections(curve, point, direction):
    """Number of sign changes of the signed distance from the nodes to a line.

    Nodes exactly on the line are nudged to the positive side by
    ``1e-14`` times the curve size, so a tangency does not count.
    """
    p = _points_of(curve)
    d = np.asarray(direction, dtype=float)
    nd = np.linalg.norm(d)
    if nd == 0:
        raise ValueError("line direction must be nonzero")
    d = d / nd
    rel = p - np.asarray(point, dtype=float)
    sd = d[0] * rel[:, 1] - d[1] * rel[:, 0]
    diam = float(np.hypot(*np.ptp(p, axis=0)))
    sd = np.where(sd == 0.0, 1e-14 * max(diam, 1.0), sd)
    return int(np.count_nonzero(np.sign(sd[1:]) != np.sign(sd[:-1])))


@dataclass(frozen=True)
class GraphWindow:
    is_graph: bool
    slope_sup: float


def graph_window_check(curve, center, R, direction):
    """Is the curve a graph over ``direction`` inside the square of half-side ``R``?

    ``slope_sup`` is the largest ``1 / |<nu, e2>|`` over the window, where
    ``e2`` is ``direction`` rotated by pi/2.
    """
    if not R > 0:
        raise ValueError("R must be positive")
    p = _points_of(curve)
    e1 = np.asarray(direction, dtype=float)
    e1 = e1 / np.linalg.norm(e1)
    e2 = rotate90(e1)
    rel = p - np.asarray(center, dtype=float)
    u1 = rel @ e1
    u2 = rel @ e2
    inside = (np.abs(u1) <= R) & (np.abs(u2) <= R)
    if not np.any(inside):
        raise EmptyWindow("no nodes inside the window")
    gq = differentiate(p)
    proj = u1[inside]
    steps = np.diff(proj)
    monotone = bool(proj.size == 1 or np.all(steps > 0) or np.all(steps < 0))
    c = np.abs(gq.nu[inside] @ e2)
    with np.errstate(divide="ignore"):
        slope = float(np.max(np.where(c > 0, 1.0 / c, np.inf)))
    return GraphWindow(is_graph=monotone and np.isfinite(slope), slope_sup=slope)
