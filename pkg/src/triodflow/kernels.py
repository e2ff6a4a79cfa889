"""Backend selection for the hot kernels.

The compiled extension is used when it was built; otherwise, or when
``TRIODFLOW_PURE_PYTHON=1`` is set, the NumPy fallback is used.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("TRIODFLOW_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels

solve_tridiagonal = _impl.solve_tridiagonal
segment_intersections = _impl.segment_intersections
first_crossing = _impl.first_crossing
shoelace = _impl.shoelace
loop_area = _impl.loop_area
geodesic_points = _impl.geodesic_points
pair_ratios = _impl.pair_ratios
interior_sweep = _impl.interior_sweep
junction_newton = _impl.junction_newton
step_metrics = _impl.step_metrics
probe_terms = _impl.probe_terms
implicit_split = _impl.implicit_split


def backends():
    """Available kernel modules keyed by name (for tests and benchmarks)."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        return out
    out["cython"] = _ckernels
    return out
