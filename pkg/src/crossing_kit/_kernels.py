"""Numerical inner-loop kernels with two interchangeable backends.

Everything here is called inside the hot loops of the package: the
cumulative quadrature that powers the Volterra coupling operators, and the
right-hand sides handed to the ODE integrator (~1e6 evaluations per solve at
the smallest mesh sizes). Each kernel exists twice:

* a scalar-loop version compiled with ``numba.njit`` (nogil, cached), and
* a vectorized pure-numpy version with identical semantics.

The active backend is chosen once at import time from the environment
variable ``CROSSING_KIT_BACKEND`` (``"numba"`` or ``"numpy"``, default
``"numba"``; falls back to numpy with a log message when numba is not
importable). ``benchmarks/bench_kernels.py`` times the two implementations
against each other.
"""

from __future__ import annotations

import logging
import os

import numpy as np

logger = logging.getLogger("crossing_kit")

_requested = os.environ.get("CROSSING_KIT_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    logger.warning("unknown CROSSING_KIT_BACKEND=%r, using 'numba'", _requested)
    _requested = "numba"

if _requested == "numba":
    try:
        import numba as nb
    except ImportError:
        logger.warning("numba not importable, falling back to numpy backend")
        _requested = "numpy"

BACKEND = _requested

_numba_setting = {"nogil": True, "cache": True}

# Weights of the order-6 cumulative rule: the integral over one mesh cell of
# the quintic through six consecutive samples. Row d integrates [t_d, t_{d+1}]
# with nodes at t_0..t_5; d=2 is the centered (interior) row, d=0,1 / d=3,4
# serve the first / last two cells where the stencil cannot be centered.
# Exact rationals, derived from the 6x6 Vandermonde moment system.
_W6 = np.array(
    [
        [95 / 288, 1427 / 1440, -133 / 240, 241 / 720, -173 / 1440, 3 / 160],
        [-3 / 160, 637 / 1440, 511 / 720, -43 / 240, 77 / 1440, -11 / 1440],
        [11 / 1440, -31 / 480, 401 / 720, 401 / 720, -31 / 480, 11 / 1440],
        [-11 / 1440, 77 / 1440, -43 / 240, 511 / 720, 637 / 1440, -3 / 160],
        [3 / 160, -173 / 1440, 241 / 720, -133 / 240, 1427 / 1440, 95 / 288],
    ]
)


def _cum_quad6_loop(values, dx, w6):
    # cumulative integral from the first grid point, one output per node
    n = values.shape[0]
    out = np.empty(n, dtype=np.complex128)
    out[0] = 0.0 + 0.0j
    acc = 0.0 + 0.0j
    for k in range(n - 1):
        s = k - 2
        if s < 0:
            s = 0
        if s > n - 6:
            s = n - 6
        d = k - s
        cell = 0.0 + 0.0j
        for j in range(6):
            cell += w6[d, j] * values[s + j]
        acc += dx * cell
        out[k + 1] = acc
    return out


def _cum_quad6_numpy(values, dx, w6):
    n = values.shape[0]
    out = np.empty(n, dtype=np.complex128)
    out[0] = 0.0
    # interior cells k = 2 .. n-4 all use the centered row
    windows = np.lib.stride_tricks.sliding_window_view(values, 6)
    cells = np.empty(n - 1, dtype=np.complex128)
    cells[2 : n - 3] = windows[: n - 5] @ w6[2]
    cells[0] = values[:6] @ w6[0]
    cells[1] = values[:6] @ w6[1]
    cells[n - 3] = values[n - 6 :] @ w6[3]
    cells[n - 2] = values[n - 6 :] @ w6[4]
    np.cumsum(cells, out=out[1:])
    out[1:] *= dx
    return out


def _bump_val(x, center, width, amplitude):
    # smooth compactly supported profile, value `amplitude` at its center
    t = (x - center) / width
    t2 = t * t
    if t2 >= 1.0:
        return 0.0
    return amplitude * np.exp(1.0 - 1.0 / (1.0 - t2))


def _polyval_asc(coeffs, x):
    # Horner evaluation, coefficients in ascending order
    acc = 0.0
    for k in range(coeffs.shape[0] - 1, -1, -1):
        acc = acc * x + coeffs[k]
    return acc


def _model_rhs(x, y, f_coeffs, r1p, r2p, h):
    """Right-hand side of the 2x2 reduced system, first-order form.

    y = (u1, u2) with u1' = -i r1 u2, u2' = (i/h) f u2 - i r2 u1.
    r1p/r2p pack (center, width, amplitude) of the coupling bumps.
    """
    f = _polyval_asc(f_coeffs, x)
    r1 = _bump_val(x, r1p[0], r1p[1], r1p[2])
    r2 = _bump_val(x, r2p[0], r2p[1], r2p[2])
    out = np.empty(2, dtype=np.complex128)
    out[0] = -1j * r1 * y[1]
    out[1] = (1j / h) * f * y[1] - 1j * r2 * y[0]
    return out


def _schrod_rhs(x, y, v1_coeffs, v2_coeffs, wp, e0, h):
    """Right-hand side of the coupled Schrodinger pair, first-order form.

    y = (u1, u1', u2, u2'); u_j'' = ((V_j - E0) u_j + h W u_other) / h^2.
    """
    v1 = _polyval_asc(v1_coeffs, x)
    v2 = _polyval_asc(v2_coeffs, x)
    w = _bump_val(x, wp[0], wp[1], wp[2])
    out = np.empty(4, dtype=np.complex128)
    out[0] = y[1]
    out[1] = ((v1 - e0) * y[0] + h * w * y[2]) / (h * h)
    out[2] = y[3]
    out[3] = ((v2 - e0) * y[2] + h * w * y[0]) / (h * h)
    return out


if BACKEND == "numba":
    _cum_quad6_impl = nb.njit(**_numba_setting)(_cum_quad6_loop)
    _bump_val = nb.njit(**_numba_setting)(_bump_val)
    _polyval_asc = nb.njit(**_numba_setting)(_polyval_asc)
    model_rhs = nb.njit(**_numba_setting)(_model_rhs)
    schrod_rhs = nb.njit(**_numba_setting)(_schrod_rhs)
else:
    _cum_quad6_impl = _cum_quad6_numpy
    model_rhs = _model_rhs
    schrod_rhs = _schrod_rhs


def cum_quad6(values: np.ndarray, dx: float) -> np.ndarray:
    """Cumulative integral of uniformly sampled values, sixth order.

    Returns an array of the same length whose entry k approximates the
    integral from the first node to node k (entry 0 is exactly 0). Each mesh
    cell integrates the quintic through the six nearest samples.
    """
    values = np.ascontiguousarray(values, dtype=np.complex128)
    if values.shape[0] < 6:
        raise ValueError("cum_quad6 needs at least 6 samples")
    return _cum_quad6_impl(values, float(dx), _W6)


def quad6(values: np.ndarray, dx: float) -> complex:
    """Integral over the full sampled range, sixth order."""
    return complex(cum_quad6(values, dx)[-1])
