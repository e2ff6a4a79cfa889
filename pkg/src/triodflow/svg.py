"""Minimal SVG rendering of triods and rescaled frames (no plotting dependency)."""

import numpy as np

CURVE_CLASSES = ("curve-1", "curve-2", "curve-3")
STYLE = """<style>
.domain { fill: none; stroke: #888; stroke-width: 1.5; }
.curve-1 { fill: none; stroke: #c0392b; stroke-width: 2; }
.curve-2 { fill: none; stroke: #2471a3; stroke-width: 2; }
.curve-3 { fill: none; stroke: #229954; stroke-width: 2; }
.junction { fill: #111; }
.window { fill: none; stroke: #bbb; stroke-dasharray: 4 3; }
.label { font: 12px sans-serif; fill: #333; }
</style>"""


class _Canvas:
    def __init__(self, lo, hi, size=480, pad=16):
        span = max(hi[0] - lo[0], hi[1] - lo[1]) or 1.0
        self.s = (size - 2 * pad) / span
        self.lo = lo
        self.hi = hi
        self.pad = pad
        self.size = size
        self.items = []

    def xy(self, p):
        x = self.pad + (p[0] - self.lo[0]) * self.s
        y = self.size - self.pad - (p[1] - self.lo[1]) * self.s
        return x, y

    def polyline(self, pts, cls, closed=False):
        coords = " ".join("%.3f,%.3f" % self.xy(p) for p in pts)
        tag = "polygon" if closed else "polyline"
        self.items.append(f'<{tag} class="{cls}" points="{coords}"/>')

    def circle(self, c, r_user, cls):
        x, y = self.xy(c)
        self.items.append(f'<circle class="{cls}" cx="{x:.3f}" cy="{y:.3f}" r="{r_user * self.s:.3f}"/>')

    def dot(self, c, cls, r_px=4.0):
        x, y = self.xy(c)
        self.items.append(f'<circle class="{cls}" cx="{x:.3f}" cy="{y:.3f}" r="{r_px}"/>')

    def text(self, s):
        self.items.append(f'<text class="label" x="{self.pad}" y="{self.pad}">{s}</text>')

    def render(self):
        head = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.size}" height="{self.size}" '
            f'viewBox="0 0 {self.size} {self.size}">'
        )
        return "\n".join([head, STYLE] + self.items + ["</svg>"]) + "\n"


def triod_svg(points, domain, title=""):
    """SVG text with the domain boundary, three curves and the junction marker."""
    p = np.asarray(points, dtype=float)
    b = domain.boundary_polyline(256)
    allp = np.concatenate([b, p.reshape(-1, 2)])
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    c = _Canvas(lo, hi)
    c.polyline(b, "domain", closed=True)
    for i in range(p.shape[0]):
        c.polyline(p[i], CURVE_CLASSES[i % 3])
    c.dot(p[0, 0], "junction")
    if title:
        c.text(title)
    return c.render()


def frame_svg(frame, window_R, title=""):
    """Rescaled frame clipped to the window square, with the window circle drawn."""
    R = float(window_R)
    c = _Canvas(np.array([-R, -R]), np.array([R, R]))
    c.circle((0.0, 0.0), R, "window")
    for i, pts in enumerate(frame.points):
        keep = np.all(np.abs(pts) <= 1.5 * R, axis=1)
        if np.count_nonzero(keep) >= 2:
            c.polyline(pts[keep], CURVE_CLASSES[i % 3])
    if frame.junction is not None and np.all(np.abs(frame.junction) <= R):
        c.dot(frame.junction, "junction")
    if title:
        c.text(title)
    return c.render()


def write_svg(path, text):
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


