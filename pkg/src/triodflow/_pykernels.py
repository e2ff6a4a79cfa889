"""Pure NumPy implementations of the hot kernels.

Every function here has a twin with the same signature in ``_ckernels.pyx``.
The twins must agree to rounding; ``tests/test_kernels.py`` runs both.
"""

import numpy as np


def solve_tridiagonal(lower, diag, upper, rhs):
    """Thomas algorithm for one tridiagonal system with several right-hand sides.

    ``lower[i]`` multiplies ``x[i-1]`` and ``upper[i]`` multiplies ``x[i+1]``;
    ``lower[0]`` and ``upper[-1]`` are ignored. ``rhs`` has shape ``(n, m)``.
    """
    lower = np.asarray(lower, dtype=float)
    diag = np.asarray(diag, dtype=float)
    upper = np.asarray(upper, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    n = diag.shape[0]
    cp = np.empty(n)
    dp = np.empty_like(rhs)
    cp[0] = upper[0] / diag[0]
    dp[0] = rhs[0] / diag[0]
    for i in range(1, n):
        denom = diag[i] - lower[i] * cp[i - 1]
        cp[i] = upper[i] / denom
        dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / denom
    out = np.empty_like(rhs)
    out[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        out[i] = dp[i] - cp[i] * out[i + 1]
    return out


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def segment_intersections(starts, ends):
    """All intersecting pairs ``i < j`` among closed segments.

    Returns ``(pairs, points)`` with ``pairs`` of shape ``(K, 2)``. Touching
    segments count; callers filter pairs that share a node by topology.
    """
    a = np.asarray(starts, dtype=float)
    b = np.asarray(ends, dtype=float)
    m = a.shape[0]
    if m < 2:
        return np.empty((0, 2), dtype=np.int64), np.empty((0, 2))
    ii, jj = np.triu_indices(m, k=1)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    box = np.all((lo[ii] <= hi[jj]) & (lo[jj] <= hi[ii]), axis=1)
    ii = ii[box]
    jj = jj[box]
    ai, bi, aj, bj = a[ii], b[ii], a[jj], b[jj]
    ei = bi - ai
    ej = bj - aj
    o1 = _cross(ei[:, 0], ei[:, 1], aj[:, 0] - ai[:, 0], aj[:, 1] - ai[:, 1])
    o2 = _cross(ei[:, 0], ei[:, 1], bj[:, 0] - ai[:, 0], bj[:, 1] - ai[:, 1])
    o3 = _cross(ej[:, 0], ej[:, 1], ai[:, 0] - aj[:, 0], ai[:, 1] - aj[:, 1])
    o4 = _cross(ej[:, 0], ej[:, 1], bi[:, 0] - aj[:, 0], bi[:, 1] - aj[:, 1])
    proper = (o1 * o2 < 0) & (o3 * o4 < 0)
    pts = np.full((ii.shape[0], 2), np.nan)
    t = np.zeros(ii.shape[0])
    t[proper] = o3[proper] / (o3[proper] - o4[proper])
    pts[proper] = ai[proper] + t[proper, None] * ei[proper]
    # touching: a zero orientation with the endpoint inside the bounding box
    hit = proper.copy()
    for o, p in ((o1, aj), (o2, bj), (o3, ai), (o4, bi)):
        sel = (o == 0) & ~hit
        if not np.any(sel):
            continue
        inside = np.all((p >= np.minimum(ai, bi)) & (p <= np.maximum(ai, bi)), axis=1)
        inside &= np.all((p >= np.minimum(aj, bj)) & (p <= np.maximum(aj, bj)), axis=1)
        sel &= inside
        pts[sel] = p[sel]
        hit |= sel
    pairs = np.stack([ii[hit], jj[hit]], axis=1).astype(np.int64)
    return pairs, pts[hit]


def first_crossing(loop):
    """First proper crossing of non-adjacent edges in a closed polygon.

    Edges are ``loop[i] -> loop[i+1]`` with wraparound. Returns
    ``(i, j, x, y)`` with ``i < j`` in lexicographic order, or ``None``.
    """
    v = np.asarray(loop, dtype=float)
    n = v.shape[0]
    if n < 4:
        return None
    a = v
    b = np.roll(v, -1, axis=0)
    ii, jj = np.triu_indices(n, k=2)
    keep = ~((ii == 0) & (jj == n - 1))
    ii = ii[keep]
    jj = jj[keep]
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    box = np.all((lo[ii] <= hi[jj]) & (lo[jj] <= hi[ii]), axis=1)
    ii = ii[box]
    jj = jj[box]
    if ii.size == 0:
        return None
    ai, bi, aj, bj = a[ii], b[ii], a[jj], b[jj]
    ei = bi - ai
    ej = bj - aj
    o1 = _cross(ei[:, 0], ei[:, 1], aj[:, 0] - ai[:, 0], aj[:, 1] - ai[:, 1])
    o2 = _cross(ei[:, 0], ei[:, 1], bj[:, 0] - ai[:, 0], bj[:, 1] - ai[:, 1])
    o3 = _cross(ej[:, 0], ej[:, 1], ai[:, 0] - aj[:, 0], ai[:, 1] - aj[:, 1])
    o4 = _cross(ej[:, 0], ej[:, 1], bi[:, 0] - aj[:, 0], bi[:, 1] - aj[:, 1])
    hits = np.flatnonzero((o1 * o2 < 0) & (o3 * o4 < 0))
    if hits.size == 0:
        return None
    k = hits[0]
    t = o3[k] / (o3[k] - o4[k])
    x = ai[k] + t * ei[k]
    return int(ii[k]), int(jj[k]), float(x[0]), float(x[1])


def shoelace(loop):
    v = np.asarray(loop, dtype=float)
    if v.shape[0] < 3:
        return 0.0
    x = v[:, 0]
    y = v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def loop_area(loop):
    """Sum of absolute areas of the simple loops a closed polygon splits into.

    The polygon is cut at each proper self-crossing into two shorter loops;
    both pieces have strictly fewer vertices, so the recursion terminates.
    """
    stack = [np.asarray(loop, dtype=float)]
    total = 0.0
    while stack:
        v = stack.pop()
        n = v.shape[0]
        if n < 3:
            continue
        c = first_crossing(v)
        if c is None:
            total += abs(shoelace(v))
            continue
        i, j, x, y = c
        xp = np.array([[x, y]])
        stack.append(np.concatenate([xp, v[i + 1:j + 1]]))
        stack.append(np.concatenate([v[:i + 1], xp, v[j + 1:]]))
    return total


def geodesic_points(points, ci, ni, cj, nj):
    """Tree path between node ``ni`` of curve ``ci`` and node ``nj`` of curve ``cj``.

    Node 0 of every curve is the shared junction.
    """
    if ni == 0:
        ci = cj
    if nj == 0:
        cj = ci
    if ci == cj:
        if ni <= nj:
            return points[ci, ni:nj + 1]
        return points[ci, nj:ni + 1][::-1]
    first = points[ci, :ni + 1][::-1]
    second = points[cj, 1:nj + 1]
    return np.concatenate([first, second])


def pair_ratios(points, pairs):
    """Chord-squared over enclosed area for each node pair; ``inf`` where area is 0."""
    points = np.asarray(points, dtype=float)
    pairs = np.asarray(pairs, dtype=np.int64)
    out = np.empty(pairs.shape[0])
    for k in range(pairs.shape[0]):
        ci, ni, cj, nj = pairs[k]
        g = geodesic_points(points, ci, ni, cj, nj)
        d = g[-1] - g[0]
        area = loop_area(g)
        out[k] = float(d @ d) / area if area > 0.0 else np.inf
    return out


def interior_sweep(points, dt, implicit):
    """One diffusion sweep of the interior nodes with both curve ends held fixed.

    ``|gamma_x|^2`` is frozen at the old positions (central chord). The
    explicit variant is forward Euler; the implicit one solves a tridiagonal
    system per curve.
    """
    p = np.asarray(points, dtype=float)
    d = p[:, 2:] - p[:, :-2]
    q = 0.25 * np.einsum("ijk,ijk->ij", d, d)
    r = dt / q
    out = p.copy()
    if not implicit:
        out[:, 1:-1] += r[..., None] * (p[:, 2:] - 2.0 * p[:, 1:-1] + p[:, :-2])
        return out
    for i in range(p.shape[0]):
        ri = r[i]
        rhs = p[i, 1:-1].copy()
        rhs[0] += ri[0] * p[i, 0]
        rhs[-1] += ri[-1] * p[i, -1]
        out[i, 1:-1] = solve_tridiagonal(-ri, 1.0 + 2.0 * ri, -ri, rhs)
    return out


def junction_newton(anchors, start, signs, max_iter):
    """Damped Newton for ``sum_i signs_i * unit(anchors_i - o) = 0``.

    Returns ``(o, residual_norm)``; never raises.
    """
    a = np.asarray(anchors, dtype=float)
    sg = np.asarray(signs, dtype=float)
    scale = float(np.max(np.abs(a - a.mean(axis=0))))

    def residual(o):
        d = a - o
        r = np.sqrt(d[:, 0] ** 2 + d[:, 1] ** 2)
        if np.any(r <= 1e-15 * scale):
            return None, None, None
        u = d / r[:, None]
        return (sg[:, None] * u).sum(axis=0), u, r

    o = np.array(start, dtype=float)
    f, u, r = residual(o)
    if f is None:
        return o, float("inf")
    res = float(np.hypot(f[0], f[1]))
    for _ in range(max_iter):
        if res <= 1e-14:
            break
        w = sg / r
        jac = -(w.sum() * np.eye(2) - np.einsum("i,ij,ik->jk", w, u, u))
        det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
        if det == 0:
            break
        delta = np.array([-(jac[1, 1] * f[0] - jac[0, 1] * f[1]),
                          -(-jac[1, 0] * f[0] + jac[0, 0] * f[1])]) / det
        lam = 1.0
        improved = False
        while lam > 1e-6:
            trial = o + lam * delta
            ft, ut, rt = residual(trial)
            if ft is not None:
                rn = float(np.hypot(ft[0], ft[1]))
                if rn < res:
                    o, f, u, r, res = trial, ft, ut, rt, rn
                    improved = True
                    break
            lam *= 0.5
        if not improved:
            break
    return o, res


def step_metrics(points):
    """Per-curve lengths, ``int k^2 ds``, the junction angle residual and the shortest chord.

    Uses the same stencils as ``geometry.differentiate``.
    """
    p = np.asarray(points, dtype=float)
    n = p.shape[1] - 1
    chords = np.linalg.norm(np.diff(p, axis=1), axis=2)
    lengths = chords.sum(axis=1)
    gx = np.empty_like(p)
    gx[:, 1:-1] = (p[:, 2:] - p[:, :-2]) * (0.5 * n)
    gx[:, 0] = (-3.0 * p[:, 0] + 4.0 * p[:, 1] - p[:, 2]) * (0.5 * n)
    gx[:, -1] = (3.0 * p[:, -1] - 4.0 * p[:, -2] + p[:, -3]) * (0.5 * n)
    gxx = np.empty_like(p)
    n2 = float(n) * n
    gxx[:, 1:-1] = (p[:, 2:] - 2.0 * p[:, 1:-1] + p[:, :-2]) * n2
    gxx[:, 0] = (2.0 * p[:, 0] - 5.0 * p[:, 1] + 4.0 * p[:, 2] - p[:, 3]) * n2
    gxx[:, -1] = (2.0 * p[:, -1] - 5.0 * p[:, -2] + 4.0 * p[:, -3] - p[:, -4]) * n2
    speed = np.sqrt(gx[..., 0] ** 2 + gx[..., 1] ** 2)
    k = (gx[..., 0] * gxx[..., 1] - gx[..., 1] * gxx[..., 0]) / speed ** 3
    w = np.full(n + 1, 1.0 / n)
    w[0] = w[-1] = 0.5 / n
    k2 = float(np.sum(k * k * speed * w))
    tsum = (gx[:, 0] / speed[:, 0, None]).sum(axis=0)
    return lengths, k2, float(np.hypot(tsum[0], tsum[1])), float(chords.min())


def probe_terms(points, centers, horizons):
    """Density, endpoint rate and monotonicity integrand for several kernels at once.

    Returns an array of shape ``(m, 3)``; row ``i`` refers to the heat kernel
    centred at ``centers[i]`` with horizon ``horizons[i]``.
    """
    p = np.asarray(points, dtype=float)
    c = np.asarray(centers, dtype=float).reshape(-1, 2)
    h = np.asarray(horizons, dtype=float).reshape(-1)
    n = p.shape[1] - 1
    gx = np.empty_like(p)
    gx[:, 1:-1] = (p[:, 2:] - p[:, :-2]) * (0.5 * n)
    gx[:, 0] = (-3.0 * p[:, 0] + 4.0 * p[:, 1] - p[:, 2]) * (0.5 * n)
    gx[:, -1] = (3.0 * p[:, -1] - 4.0 * p[:, -2] + p[:, -3]) * (0.5 * n)
    gxx = np.empty_like(p)
    n2 = float(n) * n
    gxx[:, 1:-1] = (p[:, 2:] - 2.0 * p[:, 1:-1] + p[:, :-2]) * n2
    gxx[:, 0] = (2.0 * p[:, 0] - 5.0 * p[:, 1] + 4.0 * p[:, 2] - p[:, 3]) * n2
    gxx[:, -1] = (2.0 * p[:, -1] - 5.0 * p[:, -2] + 4.0 * p[:, -3] - p[:, -4]) * n2
    speed = np.sqrt(gx[..., 0] ** 2 + gx[..., 1] ** 2)
    tau = gx / speed[..., None]
    nu = np.stack([-tau[..., 1], tau[..., 0]], axis=-1)
    k = (gx[..., 0] * gxx[..., 1] - gx[..., 1] * gxx[..., 0]) / speed ** 3
    w = np.full(n + 1, 1.0 / n)
    w[0] = w[-1] = 0.5 / n
    ds = speed * w
    out = np.empty((c.shape[0], 3))
    for i in range(c.shape[0]):
        y = p - c[i]
        rho = np.exp(-(y[..., 0] ** 2 + y[..., 1] ** 2) / (4.0 * h[i])) / np.sqrt(4.0 * np.pi * h[i])
        out[i, 0] = np.sum(rho * ds)
        ye = y[:, -1]
        out[i, 1] = np.sum((ye[:, 0] * tau[:, -1, 0] + ye[:, 1] * tau[:, -1, 1]) / (2.0 * h[i]) * rho[:, -1])
        q = k + (y[..., 0] * nu[..., 0] + y[..., 1] * nu[..., 1]) / (2.0 * h[i])
        out[i, 2] = np.sum(q * q * rho * ds)
    return out


def implicit_split(points, dt):
    """Implicit sweep split into a part with the junction at the origin and a response.

    The implicit diffusion step is linear in the junction position ``o``:
    the new interior nodes are ``base + beta[..., None] * o``. ``base`` has
    shape ``(3, N+1, 2)`` with row 0 set to zero; ``beta`` has shape
    ``(3, N+1)`` with ``beta[:, 0] = 1`` and ``beta[:, -1] = 0``.
    """
    p = np.asarray(points, dtype=float)
    d = p[:, 2:] - p[:, :-2]
    r = dt / (0.25 * np.einsum("ijk,ijk->ij", d, d))
    base = np.zeros_like(p)
    beta = np.zeros(p.shape[:2])
    base[:, -1] = p[:, -1]
    beta[:, 0] = 1.0
    for i in range(p.shape[0]):
        ri = r[i]
        rhs = np.zeros((ri.size, 3))
        rhs[:, :2] = p[i, 1:-1]
        rhs[-1, :2] += ri[-1] * p[i, -1]
        rhs[0, 2] = ri[0]
        x = solve_tridiagonal(-ri, 1.0 + 2.0 * ri, -ri, rhs)
        base[i, 1:-1] = x[:, :2]
        beta[i, 1:-1] = x[:, 2]
    return base, beta
