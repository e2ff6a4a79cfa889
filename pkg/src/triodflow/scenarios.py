"""Initial triods: exact Steiner, perturbed, 3-fold symmetric and Hermite-built."""

import numpy as np

from .errors import ConfigError
from .geometry import DomainShape, Triod, resample_arclength, rotate90, self_intersections
from .steiner import fermat_point

UNIT_DISC = DomainShape.disc()


def endpoints_at_angles(domain, angles_deg):
    return np.array([domain.point_at_angle(a) for a in angles_deg])


def straight_triod(junction, endpoints, N, domain):
    x = np.linspace(0.0, 1.0, N + 1)[:, None]
    o = np.asarray(junction, dtype=float)
    pts = np.stack([o + x * (np.asarray(P) - o) for P in endpoints])
    pts[:, 0] = o
    pts[:, -1] = endpoints
    return Triod(pts, domain)


def steiner_exact(endpoints, N, domain=UNIT_DISC):
    """Straight, uniformly parametrized Steiner triod of the endpoints."""
    sol = fermat_point(*endpoints)
    if not sol.is_interior:
        raise ConfigError("endpoints have an angle of 120 degrees or more; no interior Steiner triod")
    return straight_triod(sol.fermat, sol.endpoints, N, domain)


def _hermite(o, d0, P, x):
    """Quintic from ``o`` leaving along ``d0`` and arriving at ``P`` along the chord.

    Second derivatives vanish at both ends, so the curvature is zero at the
    junction and at the fixed endpoint (compatible initial data).
    """
    chord = P - o
    L = np.linalg.norm(chord)
    m0 = L * d0
    m1 = chord
    x3, x4, x5 = x ** 3, x ** 4, x ** 5
    h0 = 1 - 10 * x3 + 15 * x4 - 6 * x5
    h1 = x - 6 * x3 + 8 * x4 - 3 * x5
    h3 = 10 * x3 - 15 * x4 + 6 * x5
    h4 = -4 * x3 + 7 * x4 - 3 * x5
    return h0 * o + h1 * m0 + h3 * P + h4 * m1


def star_directions(junction, endpoints):
    """Three unit vectors at mutual 120 degrees, best aligned with the endpoint directions."""
    u = np.asarray(endpoints, float) - np.asarray(junction, float)
    phi = np.arctan2(u[:, 1], u[:, 0])
    order = np.argsort(phi)
    base = np.empty(3)
    base[order] = np.arange(3) * (2 * np.pi / 3)
    theta = np.angle(np.sum(np.exp(1j * (phi - base))))
    ang = theta + base
    return np.stack([np.cos(ang), np.sin(ang)], axis=1)


def hermite_triod(junction, endpoints, N, domain=UNIT_DISC, bumps=None, directions=None, fine=8):
    """Curves leaving the junction at 120 degrees, plus optional normal bumps.

    ``bumps[i]`` lists coefficients ``c_m`` of ``c_m (1 - cos(2 pi m x))^2 / 2``
    added along the chord normal of curve ``i``; these vanish to third order at
    both ends, so the junction angles and end curvatures are untouched.
    """
    o = np.asarray(junction, dtype=float)
    P = np.asarray(endpoints, dtype=float)
    d = star_directions(o, P) if directions is None else np.asarray(directions, float)
    M = N * fine
    x = np.linspace(0.0, 1.0, M + 1)[:, None]
    curves = []
    for i in range(3):
        c = _hermite(o, d[i], P[i], x)
        if bumps is not None:
            chord = (P[i] - o) / np.linalg.norm(P[i] - o)
            n = rotate90(chord)
            for m, cm in enumerate(bumps[i], start=1):
                c = c + 0.5 * cm * (1 - np.cos(2 * np.pi * m * x)) ** 2 * n
        c[0] = o
        c[-1] = P[i]
        curves.append(resample_arclength(c, N))
    triod = Triod(np.stack(curves), domain)
    bad = triod.violations()
    if bad:
        raise ConfigError("initial triod invalid: " + ", ".join(bad))
    return triod


def perturbed(endpoints, N, amplitude, seed, domain=UNIT_DISC):
    """Randomly perturbed triod near the Steiner configuration (seed mandatory)."""
    if amplitude < 0:
        raise ConfigError("amplitude must be nonnegative")
    rng = np.random.default_rng(seed)
    P = np.asarray(endpoints, dtype=float)
    sol = fermat_point(*P)
    base = sol.fermat if sol.is_interior else P.mean(axis=0)
    r = np.sqrt(rng.uniform()) * 0.5 * amplitude
    phi = rng.uniform(0, 2 * np.pi)
    o = base + r * np.array([np.cos(phi), np.sin(phi)])
    bumps = amplitude * rng.uniform(-1.0, 1.0, size=(3, 3)) / np.array([1.0, 2.0, 3.0])
    return hermite_triod(o, P, N, domain, bumps=bumps)


def symmetric(N, amplitude, radius=1.0, modes=(1.0, 0.5)):
    """3-fold symmetric triod in the disc of given radius, junction at the centre."""
    domain = DomainShape.disc((0.0, 0.0), radius)
    x = np.linspace(0.0, 1.0, 8 * N + 1)
    arm = np.zeros((x.size, 2))
    arm[:, 1] = radius * x
    for m, c in enumerate(modes, start=1):
        arm[:, 0] += amplitude * radius * c * (1 - np.cos(2 * np.pi * m * x))
    arm = resample_arclength(arm, N)
    pts = []
    for i in range(3):
        a = 2 * np.pi * i / 3
        R = np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
        pts.append(arm @ R.T)
    pts = np.stack(pts)
    pts[:, 0] = 0.0
    return Triod(pts, domain)


def collapse_endpoints(domain=UNIT_DISC, wide_angle_deg=150.0):
    """Endpoints on the circle whose triangle has ``wide_angle_deg`` at the first one."""
    half = 180.0 - wide_angle_deg
    return endpoints_at_angles(domain, [90.0, 90.0 - half, 90.0 + half])


def obtuse150(N, domain=UNIT_DISC):
    P = collapse_endpoints(domain, 150.0)
    o = np.array([0.0, 0.55])
    return hermite_triod(o, P, N, domain)


def from_node_rows(rows, domain):
    """Triod from ``(curve, node, x, y)`` rows."""
    rows = np.asarray(rows, dtype=float)
    n = int(rows[:, 1].max())
    pts = np.zeros((3, n + 1, 2))
    for c, j, x, y in rows:
        pts[int(c), int(j)] = (x, y)
    return Triod(pts, domain)


def check_embedded(triod):
    if self_intersections(triod):
        raise ConfigError("initial triod is self-intersecting")
    return triod
