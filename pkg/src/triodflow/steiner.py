"""Fermat point and Steiner triod of three points.

Used as the independent reference for the long-time limit of the flow.
"""

from dataclasses import dataclass

import numpy as np

from .errors import CollinearPoints, PreconditionViolation

DEGENERATE_ANGLE = 2 * np.pi / 3 - 1e-9


@dataclass(frozen=True, eq=False)
class SteinerSolution:
    """Minimal connection of three endpoints.

    ``kind`` is ``"interior"`` (junction at ``fermat``) or ``"degenerate"``
    (the two triangle edges meeting at ``vertex``).
    """

    kind: str
    endpoints: np.ndarray
    fermat: np.ndarray
    vertex: int
    total_length: float
    segments: tuple

    @property
    def is_interior(self):
        return self.kind == "interior"

    def to_dict(self):
        return {
            "kind": self.kind,
            "endpoints": self.endpoints.tolist(),
            "fermat": self.fermat.tolist(),
            "vertex": self.vertex,
            "total_length": self.total_length,
        }


def _angles(P):
    out = np.empty(3)
    for i in range(3):
        a = P[(i + 1) % 3] - P[i]
        b = P[(i + 2) % 3] - P[i]
        c = np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b))
        out[i] = np.arccos(np.clip(c, -1.0, 1.0))
    return out


def _as_points(P1, P2, P3):
    P = np.array([P1, P2, P3], dtype=float)
    scale = max(np.max(np.linalg.norm(P - P.mean(axis=0), axis=1)), 1e-300)
    e1 = P[1] - P[0]
    e2 = P[2] - P[0]
    if abs(e1[0] * e2[1] - e1[1] * e2[0]) <= 1e-12 * scale * scale:
        raise CollinearPoints("the three points are collinear")
    return P


def weiszfeld(P1, P2, P3, iters=1000, tol=1e-14):
    """Weiszfeld fixed-point iteration for the point minimizing the distance sum.

    A vertex is returned directly when it satisfies the vertex optimality
    test (the unit vectors from it to the other two points sum to length at
    most one), which is the case exactly when its angle is at least 120
    degrees; the plain iteration only creeps towards such a vertex.
    Otherwise the iteration starts at the centroid, and an iterate within
    ``1e-14`` of a vertex returns that vertex.
    """
    P = _as_points(P1, P2, P3)
    for v in range(3):
        u = P[[(v + 1) % 3, (v + 2) % 3]] - P[v]
        u /= np.linalg.norm(u, axis=1)[:, None]
        if np.linalg.norm(u.sum(axis=0)) <= 1.0 + 1e-12:
            return P[v].copy()
    x = P.mean(axis=0)
    scale = np.max(np.linalg.norm(P - x, axis=1))
    for _ in range(int(iters)):
        d = np.linalg.norm(P - x, axis=1)
        close = d < 1e-14 * scale
        if np.any(close):
            return P[np.argmax(close)].copy()
        w = 1.0 / d
        x_new = (w[:, None] * P).sum(axis=0) / w.sum()
        if np.linalg.norm(x_new - x) <= tol * scale:
            return x_new
        x = x_new
    return x


def _apex(a, b, opposite):
    """Apex of the equilateral triangle on ``ab`` away from ``opposite``."""
    m = 0.5 * (a + b)
    e = b - a
    h = np.array([-e[1], e[0]]) * (np.sqrt(3.0) / 2.0)
    c1, c2 = m + h, m - h
    return c1 if np.linalg.norm(c1 - opposite) > np.linalg.norm(c2 - opposite) else c2


def _line_intersection(p, r, q, s):
    den = r[0] * s[1] - r[1] * s[0]
    t = ((q[0] - p[0]) * s[1] - (q[1] - p[1]) * s[0]) / den
    return p + t * r


def torricelli(P):
    """Fermat point by intersecting two vertex-to-outer-apex lines.

    The pair of lines that meet at the largest angle is used.
    """
    best = None
    lines = []
    for i in range(3):
        a, b, c = P[i], P[(i + 1) % 3], P[(i + 2) % 3]
        apex = _apex(b, c, a)
        lines.append((a, apex - a))
    for i in range(3):
        for j in range(i + 1, 3):
            r, s = lines[i][1], lines[j][1]
            sin = abs(r[0] * s[1] - r[1] * s[0]) / (np.linalg.norm(r) * np.linalg.norm(s))
            if best is None or sin > best[0]:
                best = (sin, i, j)
    _, i, j = best
    return _line_intersection(lines[i][0], lines[i][1], lines[j][0], lines[j][1])


def fermat_point(P1, P2, P3, polish=5):
    """Steiner solution for three endpoints.

    Raises
    ------
    CollinearPoints
        If the endpoints are collinear to within ``1e-12`` of their scale.
    """
    P = _as_points(P1, P2, P3)
    ang = _angles(P)
    v = int(np.argmax(ang))
    if ang[v] >= DEGENERATE_ANGLE:
        segs = (np.array([P[v], P[(v + 1) % 3]]), np.array([P[v], P[(v + 2) % 3]]))
        total = float(sum(np.linalg.norm(s[1] - s[0]) for s in segs))
        return SteinerSolution("degenerate", P, P[v].copy(), v, total, segs)
    x = torricelli(P)
    for _ in range(polish):
        d = np.linalg.norm(P - x, axis=1)
        w = 1.0 / d
        x = (w[:, None] * P).sum(axis=0) / w.sum()
    segs = tuple(np.array([x, P[i]]) for i in range(3))
    total = float(np.linalg.norm(P - x, axis=1).sum())
    return SteinerSolution("interior", P, x, -1, total, segs)


def junction_angles(sol):
    """Pairwise angles between the directions from the Fermat point to the endpoints."""
    u = sol.endpoints - sol.fermat
    u /= np.linalg.norm(u, axis=1)[:, None]
    return np.array([np.arccos(np.clip(u[i] @ u[(i + 1) % 3], -1, 1)) for i in range(3)])


def _densify(segments, per_seg):
    pts = []
    for s in segments:
        t = np.linspace(0.0, 1.0, per_seg + 1)[:, None]
        pts.append(s[0] + t * (s[-1] - s[0]))
    return np.concatenate(pts)


def point_to_segments(points, a, b):
    """Distance from each point to the nearest of the segments ``a[k] -> b[k]``."""
    points = np.asarray(points, float)
    e = b - a
    ee = np.einsum("ij,ij->i", e, e)
    rel = points[:, None, :] - a[None]
    t = np.clip(np.einsum("pij,ij->pi", rel, e) / np.where(ee > 0, ee, 1.0), 0.0, 1.0)
    nearest = a[None] + t[..., None] * e[None]
    return np.linalg.norm(points[:, None, :] - nearest, axis=2).min(axis=1)


def hausdorff_polylines(curves_a, curves_b, per_seg=8):
    """Symmetric Hausdorff distance between two unions of polylines."""
    def segs(curves):
        a = np.concatenate([c[:-1] for c in curves])
        b = np.concatenate([c[1:] for c in curves])
        return a, b

    def dense(curves):
        out = []
        for c in curves:
            t = np.linspace(0.0, 1.0, per_seg, endpoint=False)[:, None, None]
            out.append((c[:-1][None] + t * (c[1:] - c[:-1])[None]).reshape(-1, 2))
            out.append(c[-1:])
        return np.concatenate(out)

    aa, ab = segs(curves_a)
    ba, bb = segs(curves_b)
    d1 = point_to_segments(dense(curves_a), ba, bb).max()
    d2 = point_to_segments(dense(curves_b), aa, ab).max()
    return float(max(d1, d2))


def compare_to_steiner(state, sol, tol=1e-9):
    """Junction distance, length gap and Hausdorff distance to the Steiner triod.

    Raises
    ------
    PreconditionViolation
        If the state's endpoints are not the solution's endpoints.
    """
    triod = getattr(state, "triod", state)
    ends = triod.endpoints
    scale = max(1.0, float(np.max(np.abs(sol.endpoints))))
    if np.max(np.linalg.norm(ends - sol.endpoints, axis=1)) > tol * scale:
        raise PreconditionViolation("state endpoints differ from the Steiner endpoints")
    L = float(triod.lengths().sum())
    jd = float(np.linalg.norm(triod.junction - sol.fermat)) if sol.is_interior else float("inf")
    oracle = [_densify([s], 64) for s in sol.segments]
    h = hausdorff_polylines(list(triod.points), oracle)
    return {"junction_dist": jd, "length_gap": L - sol.total_length, "hausdorff": h}
