import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import solve_banded

from triodflow import kernels
from triodflow import scenarios as sc

BACKENDS = kernels.backends()
PY = BACKENDS["python"]


def both(name):
    return [getattr(m, name) for m in BACKENDS.values()]


def wavy_triod(seed, N=24, amp=0.1):
    P = sc.endpoints_at_angles(sc.UNIT_DISC, [90, 210, 330])
    return sc.perturbed(P, N, amp, seed).points


def test_compiled_backend_is_available():
    assert "cython" in BACKENDS
    assert kernels.BACKEND == "cython"


def test_pure_python_switch():
    code = "from triodflow import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, TRIODFLOW_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@given(st.integers(0, 10 ** 6), st.integers(3, 40))
def test_tridiagonal_against_banded_solver(seed, n):
    rng = np.random.default_rng(seed)
    lo, up = rng.uniform(-1, 0, n), rng.uniform(-1, 0, n)
    diag = 2.5 + rng.uniform(0, 1, n)
    rhs = rng.normal(size=(n, 2))
    ab = np.zeros((3, n))
    ab[0, 1:] = up[:-1]
    ab[1] = diag
    ab[2, :-1] = lo[1:]
    ref = solve_banded((1, 1), ab, rhs)
    for f in both("solve_tridiagonal"):
        assert np.allclose(f(lo, diag, up, rhs), ref, atol=1e-12)


@given(st.integers(0, 10 ** 6))
def test_segment_intersections_agree(seed):
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1, 1, (30, 2))
    b = a + rng.normal(scale=0.4, size=(30, 2))
    res = [f(a, b) for f in both("segment_intersections")]
    keys = [sorted(map(tuple, np.asarray(r[0]).tolist())) for r in res]
    assert all(k == keys[0] for k in keys)


@given(st.integers(0, 10 ** 6))
def test_loop_area_agree(seed):
    rng = np.random.default_rng(seed)
    loop = np.cumsum(rng.normal(size=(15, 2)), axis=0)
    vals = [f(loop) for f in both("loop_area")]
    assert np.allclose(vals, vals[0], rtol=1e-12, atol=1e-12)
    s = [f(loop) for f in both("shoelace")]
    assert np.allclose(s, s[0], rtol=1e-12)


@given(st.integers(0, 10 ** 6))
def test_pair_ratios_agree(seed):
    p = wavy_triod(seed % 1000)
    from triodflow.functionals import select_pairs

    pairs = select_pairs(p.shape[1] - 1, 300, seed)
    vals = [f(p, pairs) for f in both("pair_ratios")]
    # nearly collinear pairs have tiny areas, so allow for their conditioning
    for v in vals[1:]:
        assert np.allclose(v, vals[0], rtol=1e-9, equal_nan=True)


@given(st.integers(0, 1000), st.booleans())
def test_interior_sweep_agree(seed, implicit):
    p = wavy_triod(seed)
    h = np.linalg.norm(np.diff(p, axis=1), axis=2).min()
    dt = 0.25 * h * h * (10 if implicit else 1)
    vals = [f(p, dt, implicit) for f in both("interior_sweep")]
    for v in vals[1:]:
        assert np.allclose(v, vals[0], atol=1e-13)


@given(st.integers(0, 1000))
def test_implicit_split_reproduces_the_sweep(seed):
    p = wavy_triod(seed)
    h = np.linalg.norm(np.diff(p, axis=1), axis=2).min()
    dt = 2.5 * h * h
    base, beta = PY.implicit_split(p, dt)
    # with the junction held at its old place the split equals the frozen-coefficient sweep
    recon = base + beta[..., None] * p[0, 0]
    recon[:, -1] = p[:, -1]
    assert np.allclose(recon, PY.interior_sweep(p, dt, True), atol=1e-12)
    for f in both("implicit_split")[1:]:
        b2, be2 = f(p, dt)
        assert np.allclose(b2, base, atol=1e-13) and np.allclose(be2, beta, atol=1e-13)


@given(st.integers(0, 10 ** 6))
def test_junction_newton_agree_and_solve(seed):
    rng = np.random.default_rng(seed)
    ang = np.radians([90, 210, 330]) + rng.uniform(-0.3, 0.3, 3)
    anchors = np.stack([np.cos(ang), np.sin(ang)], 1) * rng.uniform(0.5, 1.5, (3, 1))
    start = rng.uniform(-0.1, 0.1, 2)
    signs = np.ones(3)
    out = [f(anchors, start, signs, 50) for f in both("junction_newton")]
    for o, r in out:
        assert r < 1e-10
        u = anchors - o
        u /= np.linalg.norm(u, axis=1)[:, None]
        assert np.linalg.norm(u.sum(axis=0)) < 1e-9
    assert np.allclose(out[0][0], out[-1][0], atol=1e-12)


def test_junction_newton_start_on_anchor():
    anchors = np.array([[0.0, 1.0], [-1.0, -0.5], [1.0, -0.5]])
    for f in both("junction_newton"):
        _, r = f(anchors, anchors[0].copy(), np.ones(3), 50)
        assert not np.isfinite(r)


@given(st.integers(0, 1000))
def test_step_metrics_and_probe_terms_agree(seed):
    p = wavy_triod(seed)
    m = [f(p) for f in both("step_metrics")]
    for a in m[1:]:
        for x, y in zip(a, m[0]):
            assert np.allclose(x, y, rtol=1e-12, atol=1e-14)
    centers = np.array([[0.0, 0.0], [0.3, -0.2]])
    horizons = np.array([0.5, 2.0])
    pt = [f(p, centers, horizons) for f in both("probe_terms")]
    for a in pt[1:]:
        assert np.allclose(a, pt[0], rtol=1e-12)


def test_probe_terms_match_functionals():
    from triodflow.functionals import KernelConfig, boundary_term_rate, gaussian_density, monotonicity_integrand

    from triodflow.geometry import Triod
    from triodflow.solver import FlowState

    p = wavy_triod(3)
    s = FlowState(0.0, Triod(p, sc.UNIT_DISC))
    k = KernelConfig((0.3, -0.2), 2.0)
    row = PY.probe_terms(p, np.array([k.x0]), np.array([2.0]))[0]
    assert row[0] == pytest.approx(gaussian_density(s, k), rel=1e-12)
    assert row[1] == pytest.approx(boundary_term_rate(s, k), rel=1e-12)
    assert row[2] == pytest.approx(monotonicity_integrand(s, k), rel=1e-12)
