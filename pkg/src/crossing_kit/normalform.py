"""Reduced 2x2 model on an interval: coupling operators, Neumann solver,
a direct ODE oracle, and transfer-matrix extraction.

The model system is

    u1'(x) = -i r1(x) u2(x)
    u2'(x) = (i/h) f(x) u2(x) - i r2(x) u1(x)

with f vanishing to finite order m at 0 and smooth compactly supported
couplings r1, r2. Writing F for the antiderivative of f with F(0) = 0 and
factoring u2 = e^{iF/h} w turns the system into Volterra integral
equations driven by the cumulative oscillatory integrals

    gamma_plus(v)(x)  = int_{x0}^x e^{+iF(y)/h} r1(y) v(y) dy
    gamma_minus(v)(x) = int_{x0}^x e^{-iF(y)/h} r2(y) v(y) dy

whose compositions K1 = -gamma_plus o gamma_minus and
K2 = -gamma_minus o gamma_plus shrink like h^{1/(m+1)} as h -> 0, so both
components come out of rapidly converging geometric (Neumann) series:

    u1 = (I - K1)^{-1} (a1 - i a2 gamma_plus(1))
    u2 = e^{iF/h} (I - K2)^{-1} (a2 - i a1 gamma_minus(1))

for incoming data u1(x0) = a1, e^{-iF(x0)/h} u2(x0) = a2. The outgoing
pair (u1, e^{-iF/h} u2) at the right end is constant once the couplings
have switched off; reading it off for the two basis inputs yields the
transfer matrix, whose off-diagonal entries carry the h^{1/(m+1)}
stationary-point contribution predicted by predict_transfer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp

from ._kernels import cum_quad6, model_rhs
from .errors import (
    NotContractive,
    StepFailure,
    ValidationError,
    WindowInsideSupport,
)
from .grids import GridFunction, grid_for
from .oscquad import stationary_prefactor
from .profiles import Bump, Poly1
from .transfer import TransferMatrix

ODE_TOL = 1e-11
EXTRACT_WINDOW = 65


def _poly_max_abs(f: Poly1, a: float, b: float) -> float:
    """max |f| over [a, b], via the critical points of the polynomial."""
    cand = [a, b]
    dcoef = np.asarray(f.deriv().coeffs)
    if dcoef.size > 1 or dcoef[0] != 0.0:
        for r in np.polynomial.polynomial.polyroots(dcoef):
            if abs(r.imag) < 1e-12 and a <= r.real <= b:
                cand.append(float(r.real))
    return float(max(abs(f(c)) for c in cand))


def _poly_real_roots(f: Poly1) -> list[float]:
    coeffs = np.asarray(f.coeffs)
    if not coeffs.any():
        return []
    roots = np.polynomial.polynomial.polyroots(coeffs)
    return [float(r.real) for r in roots if abs(r.imag) < 1e-9]


@dataclass(frozen=True)
class NormalFormProblem:
    """Problem data for the reduced model on [x0, x1].

    f must vanish at 0 to the exact order m, and must not vanish anywhere
    else inside the coupling supports; both couplings must be supported
    strictly inside the interval.
    """

    f: Poly1
    r1: Bump
    r2: Bump
    x0: float
    x1: float
    h: float
    m: int

    def __post_init__(self):
        if not (self.x0 < 0.0 < self.x1):
            raise ValidationError("interval must satisfy x0 < 0 < x1")
        if not (self.h > 0):
            raise ValidationError("h must be positive")
        if self.m < 1:
            raise ValidationError("m must be a positive integer")
        coeffs = self.f.coeffs
        low = next((k for k, c in enumerate(coeffs) if c != 0.0), None)
        if low != self.m:
            raise ValidationError(
                f"f must vanish at 0 to order exactly m={self.m}"
            )
        for name, r in (("r1", self.r1), ("r2", self.r2)):
            if r.amplitude == 0.0:
                continue
            lo, hi = r.support
            if not (self.x0 < lo and hi < self.x1):
                raise ValidationError(
                    f"support of {name} must lie strictly inside the interval"
                )
            for root in _poly_real_roots(self.f):
                if abs(root) > 1e-12 and lo < root < hi:
                    raise ValidationError(
                        f"f vanishes at x={root:g} inside the support of {name}"
                    )

    @property
    def interval(self) -> tuple[float, float]:
        return (self.x0, self.x1)

    def coupling_support(self) -> tuple[float, float] | None:
        """Hull of the supports of the active couplings, None if decoupled."""
        spans = [r.support for r in (self.r1, self.r2) if r.amplitude != 0.0]
        if not spans:
            return None
        return (min(s[0] for s in spans), max(s[1] for s in spans))

    def f_order_coeff(self) -> float:
        """f^(m)(0), the first nonvanishing derivative at the crossing."""
        return math.factorial(self.m) * self.f.coeffs[self.m]


class ModelWorkspace:
    """Grid plus precomputed oscillatory weights for one (problem, h)."""

    def __init__(self, prob: NormalFormProblem, points_per_period: int = 96):
        self.prob = prob
        rate = _poly_max_abs(prob.f, prob.x0, prob.x1)
        x, dx, n, k0 = grid_for(
            prob.x0, prob.x1, rate, prob.h, points_per_period
        )
        self.x, self.dx, self.n, self.k0 = x, dx, n, k0
        fvals = np.asarray(prob.f(x), dtype=float)
        cum = cum_quad6(fvals, dx).real
        self.F = cum - cum[k0]
        self.osc_plus = np.exp(1j * self.F / prob.h)
        # conjugated couplings: multiplication operators commute with the
        # phase factor, so the weights are just r_j times the oscillation
        self.w_plus = prob.r1(x) * self.osc_plus
        self.w_minus = prob.r2(x) * np.conj(self.osc_plus)

    def grid_fn(self, values: np.ndarray) -> GridFunction:
        return GridFunction(values, float(self.x[0]), self.dx, self.n)

    def cumulative(self, weights: np.ndarray, v: np.ndarray) -> np.ndarray:
        return cum_quad6(weights * v, self.dx)


@lru_cache(maxsize=6)
def _workspace(prob: NormalFormProblem, points_per_period: int) -> ModelWorkspace:
    return ModelWorkspace(prob, points_per_period)


def build_workspace(
    prob: NormalFormProblem, points_per_period: int = 96
) -> ModelWorkspace:
    return _workspace(prob, points_per_period)


def antiderivative_F(prob: NormalFormProblem) -> GridFunction:
    """F(x) = integral of f from 0 to x, sampled on the problem grid."""
    ws = build_workspace(prob)
    return ws.grid_fn(ws.F.astype(complex))


def _on_grid(ws: ModelWorkspace, v: GridFunction) -> np.ndarray:
    if v.n != ws.n or v.dx != ws.dx:
        raise ValidationError("input is not sampled on the problem grid")
    return np.asarray(v.values, dtype=complex)


def gamma_plus(prob: NormalFormProblem, v: GridFunction) -> GridFunction:
    ws = build_workspace(prob)
    return ws.grid_fn(ws.cumulative(ws.w_plus, _on_grid(ws, v)))


def gamma_minus(prob: NormalFormProblem, v: GridFunction) -> GridFunction:
    ws = build_workspace(prob)
    return ws.grid_fn(ws.cumulative(ws.w_minus, _on_grid(ws, v)))


def k_operators(
    prob: NormalFormProblem, v: GridFunction
) -> tuple[GridFunction, GridFunction]:
    """(K1 v, K2 v), the two composed Volterra couplings."""
    ws = build_workspace(prob)
    vv = _on_grid(ws, v)
    k1 = -ws.cumulative(ws.w_plus, ws.cumulative(ws.w_minus, vv))
    k2 = -ws.cumulative(ws.w_minus, ws.cumulative(ws.w_plus, vv))
    return ws.grid_fn(k1), ws.grid_fn(k2)


@dataclass(frozen=True)
class ModelSolution:
    """Neumann-series solution with its truncation diagnostics."""

    u1: GridFunction
    u2: GridFunction
    k_norm_est: float
    residual_bound: float
    terms: int


def neumann_solve(
    prob: NormalFormProblem,
    alpha_in: tuple[complex, complex],
    terms: int = 8,
) -> ModelSolution:
    """Truncated geometric series for both components.

    ``terms`` counts the operator powers applied on top of the data term.
    Raises NotContractive when the measured size of K1 applied to the
    constant 1 reaches 1/2, where the series can no longer be trusted.
    """
    if terms < 1:
        raise ValidationError("terms must be >= 1")
    a1, a2 = complex(alpha_in[0]), complex(alpha_in[1])
    ws = build_workspace(prob)
    ones = np.ones(ws.n, dtype=complex)
    gp1 = ws.cumulative(ws.w_plus, ones)
    gm1 = ws.cumulative(ws.w_minus, ones)

    k_norm = float(np.max(np.abs(ws.cumulative(ws.w_plus, gm1))))
    if k_norm >= 0.5:
        raise NotContractive(
            f"coupling operator size estimate {k_norm:.3g} >= 1/2; "
            "decrease h or the coupling strength"
        )

    rhs1 = a1 * ones - 1j * a2 * gp1
    rhs2 = a2 * ones - 1j * a1 * gm1
    u1 = rhs1.copy()
    w2 = rhs2.copy()
    t1, t2 = rhs1, rhs2
    for _ in range(terms):
        t1 = -ws.cumulative(ws.w_plus, ws.cumulative(ws.w_minus, t1))
        t2 = -ws.cumulative(ws.w_minus, ws.cumulative(ws.w_plus, t2))
        u1 += t1
        w2 += t2

    data_norm = max(float(np.max(np.abs(rhs1))), float(np.max(np.abs(rhs2))))
    residual = k_norm ** (terms + 1) / (1.0 - k_norm) * data_norm
    return ModelSolution(
        u1=ws.grid_fn(u1),
        u2=ws.grid_fn(ws.osc_plus * w2),
        k_norm_est=k_norm,
        residual_bound=residual,
        terms=terms,
    )


def ode_oracle(
    prob: NormalFormProblem, alpha_in: tuple[complex, complex]
) -> tuple[GridFunction, GridFunction]:
    """Direct adaptive integration of the model system on the grid.

    Same incoming convention as neumann_solve: u2(x0) = a2 e^{iF(x0)/h}.
    """
    ws = build_workspace(prob)
    a1, a2 = complex(alpha_in[0]), complex(alpha_in[1])
    y0 = np.array([a1, a2 * np.exp(1j * ws.F[0] / prob.h)], dtype=complex)
    args = (
        np.asarray(prob.f.coeffs, dtype=float),
        prob.r1.kernel_params(),
        prob.r2.kernel_params(),
        prob.h,
    )
    # Where a component is identically zero the controller would take steps
    # spanning thousands of fast periods; the step itself is fine but the
    # dense-output interpolant amplifies stage noise by the stiff factor
    # f/h. Capping the step at one local period keeps it conditioned.
    rate = _poly_max_abs(prob.f, prob.x0, prob.x1)
    max_step = 2.0 * np.pi * prob.h / rate if rate > 0 else np.inf
    sol = solve_ivp(
        model_rhs,
        (float(ws.x[0]), float(ws.x[-1])),
        y0,
        method="DOP853",
        t_eval=ws.x,
        rtol=ODE_TOL,
        atol=ODE_TOL,
        max_step=max_step,
        args=args,
    )
    if not sol.success:
        raise StepFailure(f"adaptive integrator failed: {sol.message}")
    return ws.grid_fn(sol.y[0]), ws.grid_fn(sol.y[1])


def _solution_pair(pair) -> tuple[GridFunction, GridFunction]:
    if isinstance(pair, ModelSolution):
        return pair.u1, pair.u2
    u1, u2 = pair
    return u1, u2


def extract_transfer(
    prob: NormalFormProblem,
    pair_e1,
    pair_e2,
    eps: float | None = None,
    window_points: int = EXTRACT_WINDOW,
) -> TransferMatrix:
    """Read the outgoing coefficients off two basis solves.

    The outgoing pair (u1, e^{-iF/h} u2) is constant to the right of the
    coupling supports; it is averaged over a window of grid points centered
    at x1 - eps to suppress residual quadrature ripple. Raises
    WindowInsideSupport when that window touches a coupling support.
    """
    ws = build_workspace(prob)
    if eps is None:
        support = prob.coupling_support()
        margin = ws.x[-1] - (support[1] if support else 0.0)
        eps = 0.5 * margin
    x_read = float(ws.x[-1]) - eps
    sl = ws.grid_fn(np.zeros(ws.n, complex)).window(x_read, window_points)
    support = prob.coupling_support()
    if support is not None and ws.x[sl.start] <= support[1]:
        raise WindowInsideSupport(
            f"extraction window starting at x={ws.x[sl.start]:g} overlaps "
            f"the coupling support (ending at {support[1]:g})"
        )
    cols = []
    for pair in (pair_e1, pair_e2):
        u1, u2 = _solution_pair(pair)
        v1 = np.asarray(u1.values)[sl]
        v2 = np.conj(ws.osc_plus[sl]) * np.asarray(u2.values)[sl]
        cols.append((complex(v1.mean()), complex(v2.mean())))
    entries = [[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]]
    return TransferMatrix(entries, h=prob.h, kind="extracted")


def model_omega(prob: NormalFormProblem) -> complex:
    """Stationary-point coefficient of the plus-phase coupling integral."""
    return stationary_prefactor(prob.m, prob.f_order_coeff())


def predict_transfer(prob: NormalFormProblem) -> TransferMatrix:
    """Leading-order transfer matrix for the model problem.

    Off-diagonal entries are -i h^{1/(m+1)} r_j(0) times the stationary
    prefactor of the corresponding phase sign; diagonal entries are 1 up to
    a higher-order remainder.
    """
    lam = prob.h ** (1.0 / (prob.m + 1))
    fm0 = prob.f_order_coeff()
    t12 = -1j * lam * prob.r1(0.0) * stationary_prefactor(prob.m, fm0)
    t21 = -1j * lam * prob.r2(0.0) * stationary_prefactor(prob.m, -fm0)
    return TransferMatrix(
        [[1.0, t12], [t21, 1.0]], h=prob.h, kind="predicted"
    )


def transfer_numeric(
    prob: NormalFormProblem,
    method: str = "neumann",
    terms: int = 8,
    eps: float | None = None,
) -> TransferMatrix:
    """Extracted transfer matrix from two basis solves."""
    if method == "neumann":
        pairs = [neumann_solve(prob, a, terms) for a in ((1, 0), (0, 1))]
    elif method == "ode":
        pairs = [ode_oracle(prob, a) for a in ((1, 0), (0, 1))]
    else:
        raise ValidationError(f"unknown solve method {method!r}")
    return extract_transfer(prob, pairs[0], pairs[1], eps)


def model_corpus(h: float) -> list[NormalFormProblem]:
    """The six reference problems used by the verification suite.

    The first three share a wide unit-amplitude coupling: the width keeps
    the amplitude's curvature at the crossing small, which keeps the
    next-order corrections out of the asymptotic fits.
    """
    wide = Bump(width=0.8, amplitude=1.0)
    return [
        NormalFormProblem(
            f=Poly1((0.0, 1.0)), r1=wide, r2=wide, x0=-1.0, x1=1.0, h=h, m=1
        ),
        NormalFormProblem(
            f=Poly1((0.0, 0.0, 1.0)),
            r1=wide,
            r2=wide,
            x0=-1.0,
            x1=1.0,
            h=h,
            m=2,
        ),
        NormalFormProblem(
            f=Poly1((0.0, 0.0, 0.0, 1.0)),
            r1=wide,
            r2=wide,
            x0=-1.0,
            x1=1.0,
            h=h,
            m=3,
        ),
        NormalFormProblem(
            f=Poly1((0.0, -1.0)),
            r1=wide,
            r2=Bump(width=0.4, amplitude=0.7),
            x0=-1.0,
            x1=1.0,
            h=h,
            m=1,
        ),
        NormalFormProblem(
            f=Poly1((0.0, 0.0, -1.0)),
            r1=Bump(width=0.35, amplitude=0.8),
            r2=Bump(width=0.5, amplitude=1.2),
            x0=-1.0,
            x1=1.0,
            h=h,
            m=2,
        ),
        NormalFormProblem(
            f=Poly1((0.0, 1.0, 0.5)),
            r1=Bump(width=0.45, amplitude=1.0),
            r2=Bump(width=0.45, amplitude=1.0),
            x0=-1.0,
            x1=1.0,
            h=h,
            m=1,
        ),
    ]
