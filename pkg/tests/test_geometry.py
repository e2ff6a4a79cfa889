import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import rotation
from oracles import _even_odd, figure_eight_path
from triodflow import scenarios as sc
from triodflow.errors import DegenerateSegment, EmptyWindow
from triodflow.geometry import (
    DomainShape,
    SampledCurve,
    Triod,
    count_line_intersections,
    differentiate,
    enclosed_area,
    graph_window_check,
    resample_arclength,
    self_intersections,
    tree_geodesic,
)


def arc(N, radius=1.0, turn=np.pi / 2):
    th = np.linspace(0.0, turn, N + 1)
    return radius * np.stack([np.cos(th), np.sin(th)], axis=1)


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def brute_force_crossings(points):
    """All-pairs segment test, skipping segments that share a node."""
    segs = []
    for c in range(3):
        row = points[c].tolist()
        for j in range(len(row) - 1):
            segs.append((c, j, row[j], row[j + 1]))
    found = 0
    for a in range(len(segs)):
        c1, j1, p1, p2 = segs[a]
        for b in range(a + 1, len(segs)):
            c2, j2, q1, q2 = segs[b]
            if c1 == c2 and abs(j1 - j2) <= 1:
                continue
            if c1 != c2 and j1 == 0 and j2 == 0:
                continue
            rx, ry = p2[0] - p1[0], p2[1] - p1[1]
            sx, sy = q2[0] - q1[0], q2[1] - q1[1]
            d1 = _cross(rx, ry, q1[0] - p1[0], q1[1] - p1[1])
            d2 = _cross(rx, ry, q2[0] - p1[0], q2[1] - p1[1])
            d3 = _cross(sx, sy, p1[0] - q1[0], p1[1] - q1[1])
            d4 = _cross(sx, sy, p2[0] - q1[0], p2[1] - q1[1])
            if d1 * d2 < 0 and d3 * d4 < 0:
                found += 1
    return found


def polyline_curve(corners, N):
    """``N + 1`` nodes spaced evenly along a polyline through ``corners``."""
    c = np.asarray(corners, float)
    s = np.concatenate([[0], np.cumsum(np.linalg.norm(np.diff(c, axis=0), axis=1))])
    u = np.linspace(0, s[-1], N + 1)
    return np.stack([np.interp(u, s, c[:, 0]), np.interp(u, s, c[:, 1])], axis=1)


class TestDomain:
    def test_polygon_must_be_strictly_convex(self):
        with pytest.raises(ValueError):
            DomainShape.polygon([[0, 0], [1, 0], [2, 0], [1, 1]])

    def test_disc_radius_positive(self):
        with pytest.raises(ValueError):
            DomainShape.disc(radius=0.0)

    def test_round_trip(self):
        d = DomainShape.polygon([[0, 0], [2, 0], [2, 1], [0, 1]])
        e = DomainShape.from_dict(d.to_dict())
        assert np.array_equal(d.vertices, e.vertices)


class TestDifferentiate:
    def test_quarter_circle_curvature(self):
        gq = differentiate(arc(64))
        assert np.max(np.abs(gq.k - 1.0)) <= 1e-2

    def test_parabola_curvature_at_vertex(self):
        x = np.linspace(-1.0, 1.0, 129)
        gq = differentiate(np.stack([x, 0.5 * x * x], axis=1))
        assert abs(gq.k[64] - 1.0) < 1e-3

    def test_circle_curvature_converges_second_order(self):
        errs = [np.max(np.abs(differentiate(arc(N, 2.0)).k - 0.5)) for N in (32, 64, 128)]
        assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5

    def test_degenerate_segment(self):
        p = arc(16)
        p[5] = p[4]
        with pytest.raises(DegenerateSegment):
            differentiate(p)

    @given(st.integers(0, 10 ** 6), st.integers(8, 64))
    def test_frame_is_orthonormal(self, seed, N):
        rng = np.random.default_rng(seed)
        x = np.linspace(0, 1, N + 1)
        c = np.stack([x, 0.2 * np.sin(2 * np.pi * x * rng.uniform(0.5, 2))], axis=1) @ rotation(rng.uniform(0, 6.3)).T
        gq = differentiate(c)
        assert np.allclose(np.linalg.norm(gq.tau, axis=1), 1.0, atol=1e-12)
        assert np.array_equal(gq.nu, np.stack([-gq.tau[:, 1], gq.tau[:, 0]], axis=1))
        assert np.allclose(np.einsum("ij,ij->i", gq.tau, gq.nu), 0.0, atol=1e-12)


class TestResample:
    def test_uniform_segment_unchanged(self):
        p = np.stack([np.linspace(0, 1, 17), np.zeros(17)], axis=1)
        assert np.allclose(resample_arclength(p), p, atol=1e-14)

    def test_clustered_nodes_equalized(self):
        s = np.geomspace(1e-3, 1.0, 40)
        s = np.concatenate([[0.0], s])
        out = resample_arclength(np.stack([s, s], axis=1), 40)
        ch = np.linalg.norm(np.diff(out, axis=0), axis=1)
        assert np.ptp(ch) <= 1e-12

    def test_quarter_circle_length(self):
        out = resample_arclength(arc(32), 64)
        L = np.linalg.norm(np.diff(out, axis=0), axis=1).sum()
        assert abs(L - np.pi / 2) / (np.pi / 2) <= 1e-3
        assert np.array_equal(out[0], arc(32)[0]) and np.array_equal(out[-1], arc(32)[-1])


class TestTreeGeodesicAndArea:
    def triod(self):
        return sc.steiner_exact(sc.endpoints_at_angles(sc.UNIT_DISC, [90, 210, 330]), 16)

    def test_same_curve(self):
        t = self.triod()
        g = tree_geodesic(t, (1, 3), (1, 10))
        assert np.array_equal(g, t.points[1, 3:11])

    def test_through_junction(self):
        t = self.triod()
        g = tree_geodesic(t, (0, 4), (2, 2))
        assert g.shape[0] == 4 + 2 + 1
        assert np.array_equal(g[4], t.junction)

    def test_single_point(self):
        assert tree_geodesic(self.triod(), (2, 5), (2, 5)).shape[0] == 1

    def test_invalid_locator(self):
        with pytest.raises(IndexError):
            tree_geodesic(self.triod(), (3, 0), (0, 1))

    def test_unit_square(self):
        g = np.array([[0, 0], [0, 1], [1, 1], [1, 0]], float)
        assert enclosed_area(g[0], g[-1], g) == pytest.approx(1.0, abs=1e-15)

    def test_straight_segment(self):
        g = np.stack([np.linspace(0, 1, 5), np.zeros(5)], axis=1)
        assert enclosed_area(g[0], g[-1], g) == 0.0

    def test_figure_eight_against_sampling_oracle(self, oracle_values):
        g = figure_eight_path()
        a = enclosed_area(g[0], g[-1], g)
        assert abs(a - oracle_values["figure_eight_area_qmc"]) <= 1e-3
        assert abs(a - oracle_values["figure_eight_area_quad"]) <= 1e-3

    def test_even_odd_oracle_sanity(self):
        sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float)
        pts = np.array([[0.5, 0.5], [1.5, 0.5]])
        assert _even_odd(sq, pts).tolist() == [True, False]

    @given(st.integers(0, 10 ** 6))
    def test_symmetric_and_rigid_invariant(self, seed):
        rng = np.random.default_rng(seed)
        x = np.linspace(0, 1, 30)
        g = np.stack([x, rng.uniform(-0.5, 0.5) * np.sin(np.pi * x * rng.integers(1, 4))], axis=1)
        a = enclosed_area(g[0], g[-1], g)
        assert enclosed_area(g[-1], g[0], g[::-1]) == pytest.approx(a, abs=1e-10)
        R, b = rotation(rng.uniform(0, 2 * np.pi)), rng.uniform(-3, 3, 2)
        h = g @ R.T + b
        assert enclosed_area(h[0], h[-1], h) == pytest.approx(a, abs=1e-10)


class TestSelfIntersections:
    def test_steiner_embedded(self):
        t = sc.steiner_exact(sc.endpoints_at_angles(sc.UNIT_DISC, [90, 210, 330]), 16)
        assert self_intersections(t) == []

    def test_folded_curve_crosses_once(self):
        N = 16
        p = np.stack([
            polyline_curve([[0, 0], [0, 0.5], [0.53, 0.5], [0.53, -1.0]], N),
            polyline_curve([[0, 0], [1.0, 0]], N),
            polyline_curve([[0, 0], [-1.0, 0]], N),
        ])
        hits = self_intersections(Triod(p, sc.UNIT_DISC))
        assert len(hits) == 1 == brute_force_crossings(p)
        assert np.allclose(hits[0][2], [0.53, 0.0])

    @given(st.integers(0, 10 ** 6))
    def test_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        N = 12
        base = sc.steiner_exact(sc.endpoints_at_angles(sc.UNIT_DISC, [90, 210, 330]), N).points
        amp = rng.choice([0.01, 0.3, 0.8])
        p = base.copy()
        p[:, 1:-1] += rng.normal(scale=amp / N * 4, size=p[:, 1:-1].shape)
        t = Triod(p, sc.UNIT_DISC)
        assert len(self_intersections(t)) == brute_force_crossings(p)

    def test_small_perturbations_stay_embedded(self):
        rng = np.random.default_rng(1)
        base = sc.steiner_exact(sc.endpoints_at_angles(sc.UNIT_DISC, [90, 210, 330]), 24).points
        clearance = np.linalg.norm(base[0, 1] - base[1, 1])
        for _ in range(100):
            p = base.copy()
            p[:, 1:-1] += rng.uniform(-1, 1, size=p[:, 1:-1].shape) * 0.049 * clearance
            assert self_intersections(Triod(p, sc.UNIT_DISC)) == []
            assert brute_force_crossings(p) == 0


class TestLineCounts:
    def test_graph(self):
        x = np.linspace(-1, 1, 41)
        assert count_line_intersections(np.stack([x, x ** 3], 1), (0.3, 0.0), (0.0, 1.0)) == 1

    def test_s_curve(self):
        x = np.linspace(-1.25, 1.25, 201)
        assert count_line_intersections(np.stack([x, np.sin(np.pi * x)], 1), (0.0, 0.0), (1.0, 0.0)) == 3

    def test_disjoint(self):
        assert count_line_intersections(arc(20), (0, 5), (1, 0)) == 0

    def test_zero_direction(self):
        with pytest.raises(ValueError):
            count_line_intersections(arc(10), (0, 0), (0, 0))

    @given(st.floats(-0.9, 0.9))
    def test_refinement_invariant(self, c):
        y = np.linspace(-1.25, 1.25, 101)
        curve = np.stack([np.sin(np.pi * y), y], 1)
        fine = resample_arclength(curve, 400)
        line = ((c + 1e-3, 0.0), (0.0, 1.0))
        assert count_line_intersections(curve, *line) == count_line_intersections(fine, *line)


class TestGraphWindow:
    def test_horizontal(self):
        w = graph_window_check(np.stack([np.linspace(-1, 1, 11), np.zeros(11)], 1), (0, 0), 0.5, (1, 0))
        assert w.is_graph and w.slope_sup == pytest.approx(1.0, abs=1e-12)

    def test_vertical(self):
        w = graph_window_check(np.stack([np.zeros(11), np.linspace(-1, 1, 11)], 1), (0, 0), 0.5, (1, 0))
        assert not w.is_graph

    def test_45_degrees(self):
        s = np.linspace(-1, 1, 11)
        w = graph_window_check(np.stack([s, s], 1), (0, 0), 0.5, (1, 0))
        assert w.slope_sup == pytest.approx(math.sqrt(2), abs=1e-12)

    def test_empty(self):
        with pytest.raises(EmptyWindow):
            graph_window_check(arc(10), (5, 5), 0.5, (1, 0))


def test_sampled_curve_regularity():
    with pytest.raises((ValueError, DegenerateSegment)):
        SampledCurve(np.zeros((10, 2)))
