# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the kernels in ``_pykernels``. Same signatures, same results."""

import numpy as np

from libc.math cimport fabs, sqrt, exp, M_PI, INFINITY


def solve_tridiagonal(lower, diag, upper, rhs):
    cdef double[::1] lo = np.ascontiguousarray(lower, dtype=float)
    cdef double[::1] dg = np.ascontiguousarray(diag, dtype=float)
    cdef double[::1] up = np.ascontiguousarray(upper, dtype=float)
    cdef double[:, ::1] d = np.ascontiguousarray(rhs, dtype=float)
    cdef Py_ssize_t n = dg.shape[0]
    cdef Py_ssize_t m = d.shape[1]
    cp_arr = np.empty(n)
    out_arr = np.empty((n, m))
    cdef double[::1] cp = cp_arr
    cdef double[:, ::1] x = out_arr
    cdef Py_ssize_t i, c
    cdef double denom
    with nogil:
        cp[0] = up[0] / dg[0]
        for c in range(m):
            x[0, c] = d[0, c] / dg[0]
        for i in range(1, n):
            denom = dg[i] - lo[i] * cp[i - 1]
            cp[i] = up[i] / denom
            for c in range(m):
                x[i, c] = (d[i, c] - lo[i] * x[i - 1, c]) / denom
        for i in range(n - 2, -1, -1):
            for c in range(m):
                x[i, c] = x[i, c] - cp[i] * x[i + 1, c]
    return out_arr


cdef inline double _cross(double ax, double ay, double bx, double by) nogil:
    return ax * by - ay * bx


cdef inline bint _in_box(double px, double py, double ax, double ay,
                         double bx, double by) nogil:
    return (min(ax, bx) <= px <= max(ax, bx)) and (min(ay, by) <= py <= max(ay, by))


def segment_intersections(starts, ends):
    cdef double[:, ::1] a = np.ascontiguousarray(starts, dtype=float)
    cdef double[:, ::1] b = np.ascontiguousarray(ends, dtype=float)
    cdef Py_ssize_t m = a.shape[0]
    cdef Py_ssize_t i, j
    cdef double o1, o2, o3, o4, eix, eiy, ejx, ejy, t, px, py
    cdef bint hit
    pairs = []
    pts = []
    for i in range(m):
        eix = b[i, 0] - a[i, 0]
        eiy = b[i, 1] - a[i, 1]
        for j in range(i + 1, m):
            if (min(a[i, 0], b[i, 0]) > max(a[j, 0], b[j, 0]) or
                    min(a[j, 0], b[j, 0]) > max(a[i, 0], b[i, 0]) or
                    min(a[i, 1], b[i, 1]) > max(a[j, 1], b[j, 1]) or
                    min(a[j, 1], b[j, 1]) > max(a[i, 1], b[i, 1])):
                continue
            ejx = b[j, 0] - a[j, 0]
            ejy = b[j, 1] - a[j, 1]
            o1 = _cross(eix, eiy, a[j, 0] - a[i, 0], a[j, 1] - a[i, 1])
            o2 = _cross(eix, eiy, b[j, 0] - a[i, 0], b[j, 1] - a[i, 1])
            o3 = _cross(ejx, ejy, a[i, 0] - a[j, 0], a[i, 1] - a[j, 1])
            o4 = _cross(ejx, ejy, b[i, 0] - a[j, 0], b[i, 1] - a[j, 1])
            hit = False
            if o1 * o2 < 0 and o3 * o4 < 0:
                t = o3 / (o3 - o4)
                px = a[i, 0] + t * eix
                py = a[i, 1] + t * eiy
                hit = True
            elif (o1 == 0 and _in_box(a[j, 0], a[j, 1], a[i, 0], a[i, 1], b[i, 0], b[i, 1])
                  and _in_box(a[j, 0], a[j, 1], a[j, 0], a[j, 1], b[j, 0], b[j, 1])):
                px = a[j, 0]
                py = a[j, 1]
                hit = True
            elif (o2 == 0 and _in_box(b[j, 0], b[j, 1], a[i, 0], a[i, 1], b[i, 0], b[i, 1])):
                px = b[j, 0]
                py = b[j, 1]
                hit = True
            elif (o3 == 0 and _in_box(a[i, 0], a[i, 1], a[j, 0], a[j, 1], b[j, 0], b[j, 1])):
                px = a[i, 0]
                py = a[i, 1]
                hit = True
            elif (o4 == 0 and _in_box(b[i, 0], b[i, 1], a[j, 0], a[j, 1], b[j, 0], b[j, 1])):
                px = b[i, 0]
                py = b[i, 1]
                hit = True
            if hit:
                pairs.append((i, j))
                pts.append((px, py))
    if not pairs:
        return np.empty((0, 2), dtype=np.int64), np.empty((0, 2))
    return np.asarray(pairs, dtype=np.int64), np.asarray(pts, dtype=float)


cdef bint _first_crossing(double[:, ::1] v, Py_ssize_t n, Py_ssize_t* oi,
                          Py_ssize_t* oj, double* ox, double* oy) nogil:
    cdef Py_ssize_t i, j, i1, j1
    cdef double o1, o2, o3, o4, eix, eiy, ejx, ejy, t
    for i in range(n):
        i1 = i + 1 if i + 1 < n else 0
        eix = v[i1, 0] - v[i, 0]
        eiy = v[i1, 1] - v[i, 1]
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            j1 = j + 1 if j + 1 < n else 0
            if (min(v[i, 0], v[i1, 0]) > max(v[j, 0], v[j1, 0]) or
                    min(v[j, 0], v[j1, 0]) > max(v[i, 0], v[i1, 0]) or
                    min(v[i, 1], v[i1, 1]) > max(v[j, 1], v[j1, 1]) or
                    min(v[j, 1], v[j1, 1]) > max(v[i, 1], v[i1, 1])):
                continue
            ejx = v[j1, 0] - v[j, 0]
            ejy = v[j1, 1] - v[j, 1]
            o1 = _cross(eix, eiy, v[j, 0] - v[i, 0], v[j, 1] - v[i, 1])
            o2 = _cross(eix, eiy, v[j1, 0] - v[i, 0], v[j1, 1] - v[i, 1])
            if not (o1 * o2 < 0):
                continue
            o3 = _cross(ejx, ejy, v[i, 0] - v[j, 0], v[i, 1] - v[j, 1])
            o4 = _cross(ejx, ejy, v[i1, 0] - v[j, 0], v[i1, 1] - v[j, 1])
            if o3 * o4 < 0:
                t = o3 / (o3 - o4)
                oi[0] = i
                oj[0] = j
                ox[0] = v[i, 0] + t * eix
                oy[0] = v[i, 1] + t * eiy
                return True
    return False


def first_crossing(loop):
    cdef double[:, ::1] v = np.ascontiguousarray(loop, dtype=float)
    cdef Py_ssize_t i = 0, j = 0
    cdef double x = 0, y = 0
    if v.shape[0] < 4:
        return None
    if _first_crossing(v, v.shape[0], &i, &j, &x, &y):
        return int(i), int(j), x, y
    return None


cdef double _shoelace(double[:, ::1] v, Py_ssize_t n) nogil:
    cdef double s = 0
    cdef Py_ssize_t i, i1
    for i in range(n):
        i1 = i + 1 if i + 1 < n else 0
        s += v[i, 0] * v[i1, 1] - v[i, 1] * v[i1, 0]
    return 0.5 * s


def shoelace(loop):
    cdef double[:, ::1] v = np.ascontiguousarray(loop, dtype=float)
    if v.shape[0] < 3:
        return 0.0
    return _shoelace(v, v.shape[0])


cdef double _loop_area(double[:, ::1] start):
    cdef double total = 0
    cdef Py_ssize_t i = 0, j = 0, n
    cdef double x = 0, y = 0
    cdef double[:, ::1] v
    stack = [start]
    while stack:
        v = stack.pop()
        n = v.shape[0]
        if n < 3:
            continue
        if n >= 4 and _first_crossing(v, n, &i, &j, &x, &y):
            arr = np.asarray(v)
            xp = np.array([[x, y]])
            stack.append(np.concatenate([xp, arr[i + 1:j + 1]]))
            stack.append(np.concatenate([arr[:i + 1], xp, arr[j + 1:]]))
        else:
            total += fabs(_shoelace(v, n))
    return total


def loop_area(loop):
    return _loop_area(np.ascontiguousarray(loop, dtype=float))


def geodesic_points(points, ci, ni, cj, nj):
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
    cdef double[:, :, ::1] p = np.ascontiguousarray(points, dtype=float)
    cdef long long[:, ::1] pr = np.ascontiguousarray(pairs, dtype=np.int64)
    cdef Py_ssize_t m = pr.shape[0]
    cdef Py_ssize_t nmax = 2 * p.shape[1]
    out_arr = np.empty(m)
    buf_arr = np.empty((nmax, 2))
    cdef double[::1] out = out_arr
    cdef double[:, ::1] buf = buf_arr
    cdef Py_ssize_t k, ci, ni, cj, nj, cnt, s
    cdef double dx, dy, area
    for k in range(m):
        ci = pr[k, 0]
        ni = pr[k, 1]
        cj = pr[k, 2]
        nj = pr[k, 3]
        if ni == 0:
            ci = cj
        if nj == 0:
            cj = ci
        cnt = 0
        if ci == cj:
            if ni <= nj:
                for s in range(ni, nj + 1):
                    buf[cnt, 0] = p[ci, s, 0]
                    buf[cnt, 1] = p[ci, s, 1]
                    cnt += 1
            else:
                for s in range(ni, nj - 1, -1):
                    buf[cnt, 0] = p[ci, s, 0]
                    buf[cnt, 1] = p[ci, s, 1]
                    cnt += 1
        else:
            for s in range(ni, -1, -1):
                buf[cnt, 0] = p[ci, s, 0]
                buf[cnt, 1] = p[ci, s, 1]
                cnt += 1
            for s in range(1, nj + 1):
                buf[cnt, 0] = p[cj, s, 0]
                buf[cnt, 1] = p[cj, s, 1]
                cnt += 1
        dx = buf[cnt - 1, 0] - buf[0, 0]
        dy = buf[cnt - 1, 1] - buf[0, 1]
        if cnt < 3:
            out[k] = INFINITY
            continue
        area = _loop_area(buf[:cnt].copy())
        out[k] = (dx * dx + dy * dy) / area if area > 0 else INFINITY
    return out_arr


def interior_sweep(points, double dt, bint implicit):
    cdef double[:, :, ::1] p = np.ascontiguousarray(points, dtype=float)
    out_arr = np.array(p, copy=True)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t nc = p.shape[0]
    cdef Py_ssize_t n = p.shape[1] - 1
    cdef Py_ssize_t m = n - 1
    r_arr = np.empty(m)
    cp_arr = np.empty(m)
    cdef double[::1] r = r_arr
    cdef double[::1] cp = cp_arr
    cdef Py_ssize_t i, j, c
    cdef double dx, dy, denom, rx, ry, bx, by
    with nogil:
        for i in range(nc):
            for j in range(1, n):
                dx = p[i, j + 1, 0] - p[i, j - 1, 0]
                dy = p[i, j + 1, 1] - p[i, j - 1, 1]
                r[j - 1] = dt / (0.25 * (dx * dx + dy * dy))
            if not implicit:
                for j in range(1, n):
                    for c in range(2):
                        out[i, j, c] = p[i, j, c] + r[j - 1] * (p[i, j + 1, c] - 2.0 * p[i, j, c] + p[i, j - 1, c])
                continue
            # Thomas sweep; diag = 1 + 2r, off-diagonals = -r
            denom = 1.0 + 2.0 * r[0]
            cp[0] = -r[0] / denom
            out[i, 1, 0] = (p[i, 1, 0] + r[0] * p[i, 0, 0]) / denom
            out[i, 1, 1] = (p[i, 1, 1] + r[0] * p[i, 0, 1]) / denom
            if m == 1:
                out[i, 1, 0] += r[0] * p[i, n, 0] / denom
                out[i, 1, 1] += r[0] * p[i, n, 1] / denom
            for j in range(1, m):
                denom = 1.0 + 2.0 * r[j] + r[j] * cp[j - 1]
                cp[j] = -r[j] / denom
                bx = p[i, j + 1, 0]
                by = p[i, j + 1, 1]
                if j == m - 1:
                    bx += r[j] * p[i, n, 0]
                    by += r[j] * p[i, n, 1]
                out[i, j + 1, 0] = (bx + r[j] * out[i, j, 0]) / denom
                out[i, j + 1, 1] = (by + r[j] * out[i, j, 1]) / denom
            for j in range(m - 2, -1, -1):
                out[i, j + 1, 0] -= cp[j] * out[i, j + 2, 0]
                out[i, j + 1, 1] -= cp[j] * out[i, j + 2, 1]
    return out_arr


cdef bint _jres(double[:, ::1] a, double* sg, double ox, double oy, double scale,
                double* f, double* u, double* r) nogil:
    cdef int i
    cdef double dx, dy
    f[0] = 0
    f[1] = 0
    for i in range(3):
        dx = a[i, 0] - ox
        dy = a[i, 1] - oy
        r[i] = sqrt(dx * dx + dy * dy)
        if r[i] <= 1e-15 * scale:
            return False
        u[2 * i] = dx / r[i]
        u[2 * i + 1] = dy / r[i]
        f[0] += sg[i] * u[2 * i]
        f[1] += sg[i] * u[2 * i + 1]
    return True


def junction_newton(anchors, start, signs, int max_iter):
    cdef double[:, ::1] a = np.ascontiguousarray(anchors, dtype=float)
    cdef double[::1] s = np.ascontiguousarray(signs, dtype=float)
    cdef double sg[3]
    cdef double f[2]
    cdef double ft[2]
    cdef double u[6]
    cdef double ut[6]
    cdef double r[3]
    cdef double rt[3]
    cdef double ox = float(start[0]), oy = float(start[1])
    cdef double mx, my, scale = 0, res, rn, w, j00, j01, j11, det, ddx, ddy, lam, tx, ty
    cdef int i, it
    cdef bint improved
    for i in range(3):
        sg[i] = s[i]
    mx = (a[0, 0] + a[1, 0] + a[2, 0]) / 3.0
    my = (a[0, 1] + a[1, 1] + a[2, 1]) / 3.0
    for i in range(3):
        scale = max(scale, max(fabs(a[i, 0] - mx), fabs(a[i, 1] - my)))
    if not _jres(a, sg, ox, oy, scale, f, u, r):
        return np.array([ox, oy]), float("inf")
    res = sqrt(f[0] * f[0] + f[1] * f[1])
    for it in range(max_iter):
        if res <= 1e-14:
            break
        j00 = 0
        j01 = 0
        j11 = 0
        for i in range(3):
            w = sg[i] / r[i]
            j00 -= w * (1.0 - u[2 * i] * u[2 * i])
            j01 -= w * (-u[2 * i] * u[2 * i + 1])
            j11 -= w * (1.0 - u[2 * i + 1] * u[2 * i + 1])
        det = j00 * j11 - j01 * j01
        if det == 0:
            break
        ddx = -(j11 * f[0] - j01 * f[1]) / det
        ddy = -(-j01 * f[0] + j00 * f[1]) / det
        lam = 1.0
        improved = False
        while lam > 1e-6:
            tx = ox + lam * ddx
            ty = oy + lam * ddy
            if _jres(a, sg, tx, ty, scale, ft, ut, rt):
                rn = sqrt(ft[0] * ft[0] + ft[1] * ft[1])
                if rn < res:
                    ox = tx
                    oy = ty
                    res = rn
                    for i in range(3):
                        r[i] = rt[i]
                        u[2 * i] = ut[2 * i]
                        u[2 * i + 1] = ut[2 * i + 1]
                    f[0] = ft[0]
                    f[1] = ft[1]
                    improved = True
                    break
            lam *= 0.5
        if not improved:
            break
    return np.array([ox, oy]), res


def step_metrics(points):
    cdef double[:, :, ::1] p = np.ascontiguousarray(points, dtype=float)
    cdef Py_ssize_t n = p.shape[1] - 1
    cdef double hn = 0.5 * n
    cdef double n2 = <double>n * n
    lengths_arr = np.zeros(3)
    cdef double[::1] lengths = lengths_arr
    cdef double k2 = 0, gx, gy, gxx, gyy, sp, k, w, tx = 0, ty = 0, dx, dy, c, hmin = INFINITY
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(3):
            for j in range(n):
                dx = p[i, j + 1, 0] - p[i, j, 0]
                dy = p[i, j + 1, 1] - p[i, j, 1]
                c = sqrt(dx * dx + dy * dy)
                lengths[i] += c
                if c < hmin:
                    hmin = c
            for j in range(n + 1):
                if j == 0:
                    gx = (-3.0 * p[i, 0, 0] + 4.0 * p[i, 1, 0] - p[i, 2, 0]) * hn
                    gy = (-3.0 * p[i, 0, 1] + 4.0 * p[i, 1, 1] - p[i, 2, 1]) * hn
                    gxx = (2.0 * p[i, 0, 0] - 5.0 * p[i, 1, 0] + 4.0 * p[i, 2, 0] - p[i, 3, 0]) * n2
                    gyy = (2.0 * p[i, 0, 1] - 5.0 * p[i, 1, 1] + 4.0 * p[i, 2, 1] - p[i, 3, 1]) * n2
                    w = 0.5 / n
                elif j == n:
                    gx = (3.0 * p[i, n, 0] - 4.0 * p[i, n - 1, 0] + p[i, n - 2, 0]) * hn
                    gy = (3.0 * p[i, n, 1] - 4.0 * p[i, n - 1, 1] + p[i, n - 2, 1]) * hn
                    gxx = (2.0 * p[i, n, 0] - 5.0 * p[i, n - 1, 0] + 4.0 * p[i, n - 2, 0] - p[i, n - 3, 0]) * n2
                    gyy = (2.0 * p[i, n, 1] - 5.0 * p[i, n - 1, 1] + 4.0 * p[i, n - 2, 1] - p[i, n - 3, 1]) * n2
                    w = 0.5 / n
                else:
                    gx = (p[i, j + 1, 0] - p[i, j - 1, 0]) * hn
                    gy = (p[i, j + 1, 1] - p[i, j - 1, 1]) * hn
                    gxx = (p[i, j + 1, 0] - 2.0 * p[i, j, 0] + p[i, j - 1, 0]) * n2
                    gyy = (p[i, j + 1, 1] - 2.0 * p[i, j, 1] + p[i, j - 1, 1]) * n2
                    w = 1.0 / n
                sp = sqrt(gx * gx + gy * gy)
                k = (gx * gyy - gy * gxx) / (sp * sp * sp)
                k2 += k * k * sp * w
                if j == 0:
                    tx += gx / sp
                    ty += gy / sp
    return lengths_arr, k2, sqrt(tx * tx + ty * ty), hmin


def probe_terms(points, centers, horizons):
    cdef double[:, :, ::1] p = np.ascontiguousarray(points, dtype=float)
    cdef double[:, ::1] c = np.ascontiguousarray(np.reshape(centers, (-1, 2)), dtype=float)
    cdef double[::1] h = np.ascontiguousarray(np.reshape(horizons, -1), dtype=float)
    cdef Py_ssize_t m = c.shape[0]
    cdef Py_ssize_t n = p.shape[1] - 1
    cdef double hn = 0.5 * n
    cdef double n2 = <double>n * n
    out_arr = np.zeros((m, 3))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, s
    cdef double gx, gy, gxx, gyy, sp, k, w, tx, ty, yx, yy, rho, q, ds
    with nogil:
        for i in range(3):
            for j in range(n + 1):
                if j == 0:
                    gx = (-3.0 * p[i, 0, 0] + 4.0 * p[i, 1, 0] - p[i, 2, 0]) * hn
                    gy = (-3.0 * p[i, 0, 1] + 4.0 * p[i, 1, 1] - p[i, 2, 1]) * hn
                    gxx = (2.0 * p[i, 0, 0] - 5.0 * p[i, 1, 0] + 4.0 * p[i, 2, 0] - p[i, 3, 0]) * n2
                    gyy = (2.0 * p[i, 0, 1] - 5.0 * p[i, 1, 1] + 4.0 * p[i, 2, 1] - p[i, 3, 1]) * n2
                    w = 0.5 / n
                elif j == n:
                    gx = (3.0 * p[i, n, 0] - 4.0 * p[i, n - 1, 0] + p[i, n - 2, 0]) * hn
                    gy = (3.0 * p[i, n, 1] - 4.0 * p[i, n - 1, 1] + p[i, n - 2, 1]) * hn
                    gxx = (2.0 * p[i, n, 0] - 5.0 * p[i, n - 1, 0] + 4.0 * p[i, n - 2, 0] - p[i, n - 3, 0]) * n2
                    gyy = (2.0 * p[i, n, 1] - 5.0 * p[i, n - 1, 1] + 4.0 * p[i, n - 2, 1] - p[i, n - 3, 1]) * n2
                    w = 0.5 / n
                else:
                    gx = (p[i, j + 1, 0] - p[i, j - 1, 0]) * hn
                    gy = (p[i, j + 1, 1] - p[i, j - 1, 1]) * hn
                    gxx = (p[i, j + 1, 0] - 2.0 * p[i, j, 0] + p[i, j - 1, 0]) * n2
                    gyy = (p[i, j + 1, 1] - 2.0 * p[i, j, 1] + p[i, j - 1, 1]) * n2
                    w = 1.0 / n
                sp = sqrt(gx * gx + gy * gy)
                k = (gx * gyy - gy * gxx) / (sp * sp * sp)
                tx = gx / sp
                ty = gy / sp
                ds = sp * w
                for s in range(m):
                    yx = p[i, j, 0] - c[s, 0]
                    yy = p[i, j, 1] - c[s, 1]
                    rho = exp(-(yx * yx + yy * yy) / (4.0 * h[s])) / sqrt(4.0 * M_PI * h[s])
                    out[s, 0] += rho * ds
                    q = k + (-yx * ty + yy * tx) / (2.0 * h[s])
                    out[s, 2] += q * q * rho * ds
                    if j == n:
                        out[s, 1] += (yx * tx + yy * ty) / (2.0 * h[s]) * rho
    return out_arr


def implicit_split(points, double dt):
    cdef double[:, :, ::1] p = np.ascontiguousarray(points, dtype=float)
    cdef Py_ssize_t nc = p.shape[0]
    cdef Py_ssize_t n = p.shape[1] - 1
    cdef Py_ssize_t m = n - 1
    base_arr = np.zeros((nc, n + 1, 2))
    beta_arr = np.zeros((nc, n + 1))
    cdef double[:, :, ::1] base = base_arr
    cdef double[:, ::1] beta = beta_arr
    r_arr = np.empty(m)
    cp_arr = np.empty(m)
    cdef double[::1] r = r_arr
    cdef double[::1] cp = cp_arr
    cdef Py_ssize_t i, j
    cdef double dx, dy, denom, bx, by
    with nogil:
        for i in range(nc):
            base[i, n, 0] = p[i, n, 0]
            base[i, n, 1] = p[i, n, 1]
            beta[i, 0] = 1.0
            for j in range(1, n):
                dx = p[i, j + 1, 0] - p[i, j - 1, 0]
                dy = p[i, j + 1, 1] - p[i, j - 1, 1]
                r[j - 1] = dt / (0.25 * (dx * dx + dy * dy))
            for j in range(m):
                denom = 1.0 + 2.0 * r[j]
                bx = p[i, j + 1, 0]
                by = p[i, j + 1, 1]
                if j == m - 1:
                    bx += r[j] * p[i, n, 0]
                    by += r[j] * p[i, n, 1]
                if j == 0:
                    beta[i, 1] = r[0] / denom
                else:
                    denom += r[j] * cp[j - 1]
                    bx += r[j] * base[i, j, 0]
                    by += r[j] * base[i, j, 1]
                    beta[i, j + 1] = r[j] * beta[i, j] / denom
                cp[j] = -r[j] / denom
                base[i, j + 1, 0] = bx / denom
                base[i, j + 1, 1] = by / denom
            for j in range(m - 2, -1, -1):
                base[i, j + 1, 0] -= cp[j] * base[i, j + 2, 0]
                base[i, j + 1, 1] -= cp[j] * base[i, j + 2, 1]
                beta[i, j + 1] -= cp[j] * beta[i, j + 2]
    return base_arr, beta_arr
