"""Coupled semiclassical Schrodinger pair: prediction and numerical extraction
of the transfer matrices across the crossings of its characteristic curves.

The system on [x_in, x_out] is

    -h^2 u1'' + (V1 - E0) u1 + h W u2 = 0
    -h^2 u2'' + (V2 - E0) u2 + h W u1 = 0

with polynomial potentials satisfying (V2 - V1)^(j)(0) = 0 for j < n and
!= 0 at j = n. Two regimes are supported:

* case "i" (E0 > 0, no classical turning point on the interval): the
  characteristic curves xi^2 + V_j = E0 cross at (0, +-xi0), xi0 = sqrt(E0),
  with contact order n. Solutions are tracked in the oscillatory basis
  sigma_j e^{+-i phi_j / h} and the transfer matrix is both predicted in
  closed form and extracted from adaptive solves.
* case "ii" (E0 = 0, V_j(0) = 0, V_j'(0) != 0): the curves meet at the
  phase-space origin with contact order 2n. The origin is a turning point,
  so only the closed-form prediction and its symbol-level cross-checks are
  available; propagation requests raise TurningPointInRange.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from ._kernels import schrod_rhs
from .errors import (
    CaseMismatch,
    IllConditioned,
    StepFailure,
    TurningPointInRange,
    ValidationError,
    WindowInsideSupport,
)
from .grids import GridFunction, grid_for
from .oscquad import gamma_real, mu_m
from .profiles import Bump, Poly1
from .symbolcalc import CrossingData, Poly2, crossing_data_from_symbols
from .transfer import TransferMatrix

ODE_TOL = 1e-11
DECOMPOSE_WINDOW = 33

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)


def _poly_min_on(p: Poly1, a: float, b: float) -> float:
    """min of p over [a, b], via the critical points of the polynomial."""
    cand = [a, b]
    dcoef = np.asarray(p.deriv().coeffs)
    if dcoef.size > 1 or dcoef[0] != 0.0:
        for r in np.polynomial.polynomial.polyroots(dcoef):
            if abs(r.imag) < 1e-12 and a < r.real < b:
                cand.append(float(r.real))
    return float(min(p(c) for c in cand))


@dataclass(frozen=True)
class SchrodingerProblem:
    """Problem data for the coupled pair on [x_in, x_out].

    n is the exact vanishing order of V2 - V1 at 0. The coupling W must be
    supported strictly inside the interval so that branch coefficients can
    be read off in coupling-free zones near both ends.
    """

    v1: Poly1
    v2: Poly1
    w: Bump
    e0: float
    n: int
    h: float
    x_in: float
    x_out: float

    def __post_init__(self):
        if not (self.x_in < 0.0 < self.x_out):
            raise ValidationError("interval must satisfy x_in < 0 < x_out")
        if not (self.h > 0):
            raise ValidationError("h must be positive")
        if self.n < 1:
            raise ValidationError("n must be a positive integer")
        diff = self.v2 - self.v1
        low = next((k for k, c in enumerate(diff.coeffs) if c != 0.0), None)
        if low != self.n:
            raise ValidationError(
                f"V2 - V1 must vanish at 0 to order exactly n={self.n}"
            )
        if self.w.amplitude != 0.0:
            lo, hi = self.w.support
            if not (self.x_in < lo and hi < self.x_out):
                raise ValidationError(
                    "support of W must lie strictly inside the interval"
                )
        if self.e0 > 0.0:
            for name, v in (("V1", self.v1), ("V2", self.v2)):
                gap = _poly_min_on(Poly1((self.e0,)) - v, self.x_in, self.x_out)
                if gap <= 0.0:
                    raise ValidationError(
                        f"E0 - {name} must stay positive on the interval "
                        f"(classical turning point, min gap {gap:g})"
                    )
        elif self.e0 == 0.0:
            if self.v1(0.0) != 0.0:
                raise ValidationError("the zero-energy case needs V1(0) = 0")
            for name, v in (("V1", self.v1), ("V2", self.v2)):
                if v.deriv_at(1, 0.0) == 0.0:
                    raise ValidationError(
                        f"the zero-energy case needs {name}'(0) != 0"
                    )
        else:
            raise ValidationError("E0 must be nonnegative")

    @property
    def case(self) -> str:
        """"i" for E0 > 0 (crossings at +-xi0), "ii" for E0 = 0 (origin)."""
        return "i" if self.e0 > 0.0 else "ii"

    @property
    def xi0(self) -> float:
        return math.sqrt(self.e0)

    @property
    def interval(self) -> tuple[float, float]:
        return (self.x_in, self.x_out)

    def delta_n(self) -> float:
        """(V2 - V1)^(n)(0), the first nonvanishing difference derivative."""
        return math.factorial(self.n) * (self.v2 - self.v1).coeffs[self.n]


class WkbBasis:
    """Oscillatory basis sigma_j e^{+-i phi_j / h} of the decoupled equations.

    phi_j(x) = int_0^x sqrt(E0 - V_j), sigma_j = c_j (1 - V_j/E0)^(-1/4).
    The normalization c_j = (1 + V_j'(0)^2 / (4 E0))^(1/4) makes the
    conserved flux sigma_j^2 phi_j' equal to half the phase-space gradient
    norm of the symbol at the crossing, which is the convention under which
    the predicted transfer matrices apply to the branch coefficients.
    """

    def __init__(self, prob: SchrodingerProblem):
        if prob.case != "i":
            raise CaseMismatch(
                "the oscillatory basis needs E0 > 0 with no turning point"
            )
        self.prob = prob
        self.c = tuple(
            (1.0 + v.deriv_at(1, 0.0) ** 2 / (4.0 * prob.e0)) ** 0.25
            for v in (prob.v1, prob.v2)
        )

    def _potential(self, j: int) -> Poly1:
        if j not in (1, 2):
            raise ValidationError("equation index j must be 1 or 2")
        return self.prob.v1 if j == 1 else self.prob.v2

    def momentum(self, j: int, x):
        """phi_j'(x) = sqrt(E0 - V_j(x))."""
        return np.sqrt(self.prob.e0 - self._potential(j)(x))

    def phase(self, j: int, x):
        """phi_j(x), by composite 15-node Gauss-Legendre panels from 0.

        The integrand is analytic on the interval (no turning point), so a
        handful of panels per unit length reaches machine accuracy.
        """
        v = self._potential(j)
        e0 = self.prob.e0

        def one(xx: float) -> float:
            if xx == 0.0:
                return 0.0
            npan = max(4, math.ceil(abs(xx) * 8))
            edges = np.linspace(0.0, xx, npan + 1)
            mid = 0.5 * (edges[:-1] + edges[1:])
            half = 0.5 * (edges[1:] - edges[:-1])
            pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
            vals = np.sqrt(e0 - v(pts))
            return float((vals @ _GL_WEIGHTS) @ half)

        arr = np.asarray(x, dtype=float)
        if arr.ndim == 0:
            return one(float(arr))
        return np.array([one(float(xx)) for xx in arr])

    def amplitude(self, j: int, x):
        """sigma_j(x); sigma_j^2 phi_j' is constant on the interval."""
        return self.c[j - 1] * (1.0 - self._potential(j)(x) / self.prob.e0) ** -0.25

    def synthesize(self, coeffs, x: float) -> np.ndarray:
        """State vector (u1, u1', u2, u2') with branch coefficients ``coeffs``.

        coeffs = (a1_plus, a1_minus, a2_plus, a2_minus). Derivatives keep the
        phase term only; the dropped amplitude derivative is an O(h) data
        error, matching the decomposition convention on the other end.
        """
        a = [complex(c) for c in coeffs]
        h = self.prob.h
        out = np.empty(4, dtype=complex)
        for j in (1, 2):
            ap, am = a[2 * j - 2], a[2 * j - 1]
            sig = float(self.amplitude(j, x))
            rate = float(self.momentum(j, x))
            osc = np.exp(1j * self.phase(j, x) / h)
            out[2 * j - 2] = sig * (ap * osc + am * np.conj(osc))
            out[2 * j - 1] = (1j * rate / h) * sig * (ap * osc - am * np.conj(osc))
        return out


def branch_decompose(basis: WkbBasis, j: int, x, u, hdu):
    """Branch coefficients (a_plus, a_minus) of equation j at points x.

    Solves [u; h u'] = M(x) [a_plus; a_minus] with M built from the basis
    at leading order (amplitude derivative dropped, an O(h) truncation).
    The determinant of M is the x-independent flux 2 sigma_j^2 phi_j', so
    conditioning is uniform; callers should still stay outside supp W,
    where the coefficients are constants of the motion.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=complex)
    hdu = np.asarray(hdu, dtype=complex)
    rate = np.asarray(basis.momentum(j, x), dtype=float)
    sig = np.asarray(basis.amplitude(j, x), dtype=float)
    if np.min(2.0 * sig**2 * rate) < 1e-8:
        raise IllConditioned(
            "branch matrix nearly singular (turning point too close)"
        )
    osc = np.exp(1j * np.asarray(basis.phase(j, x)) / basis.prob.h)
    a_plus = (u - 1j * hdu / rate) / (2.0 * sig * osc)
    a_minus = (u + 1j * hdu / rate) / (2.0 * sig * np.conj(osc))
    return a_plus, a_minus


@dataclass(frozen=True)
class WaveSolution:
    """Dense solution of the coupled pair on a uniform grid."""

    u1: GridFunction
    du1: GridFunction
    u2: GridFunction
    du2: GridFunction


def _rhs_args(prob: SchrodingerProblem):
    return (
        np.asarray(prob.v1.coeffs, dtype=float),
        np.asarray(prob.v2.coeffs, dtype=float),
        prob.w.kernel_params(),
        prob.e0,
        prob.h,
    )


def _integrate(
    prob: SchrodingerProblem, y0, x_from: float, x_to: float, t_eval, tol=ODE_TOL
):
    sol = solve_ivp(
        schrod_rhs,
        (x_from, x_to),
        np.asarray(y0, dtype=complex),
        method="DOP853",
        t_eval=t_eval,
        rtol=tol,
        atol=tol,
        args=_rhs_args(prob),
    )
    if not sol.success:
        raise StepFailure(f"adaptive integrator failed: {sol.message}")
    return sol.y


def solve_schrodinger_ode(
    prob: SchrodingerProblem,
    initial,
    points_per_period: int = 24,
    tol: float = ODE_TOL,
) -> WaveSolution:
    """Propagate branch data from x_in across the interval, dense output.

    ``initial`` holds the four branch coefficients at x_in in the order
    (a1_plus, a1_minus, a2_plus, a2_minus); the state is synthesized from
    the oscillatory basis at leading order.
    """
    if prob.case == "ii":
        raise TurningPointInRange(
            "E0 = 0 puts the turning point at the crossing; "
            "propagation in the oscillatory basis is not defined there"
        )
    basis = WkbBasis(prob)
    rate = math.sqrt(
        prob.e0 - min(_poly_min_on(v, prob.x_in, prob.x_out) for v in (prob.v1, prob.v2))
    )
    x, dx, n, _ = grid_for(prob.x_in, prob.x_out, rate, prob.h, points_per_period)
    y0 = basis.synthesize(initial, float(x[0]))
    y = _integrate(prob, y0, float(x[0]), float(x[-1]), x, tol=tol)
    x0 = float(x[0])
    return WaveSolution(
        u1=GridFunction(y[0], x0, dx, n),
        du1=GridFunction(y[1], x0, dx, n),
        u2=GridFunction(y[2], x0, dx, n),
        du2=GridFunction(y[3], x0, dx, n),
    )


def _read_window(
    prob: SchrodingerProblem, side: int, eps: float | None, points: int
) -> np.ndarray:
    """Sample points for coefficient read-off near one end of the interval.

    side=+1 reads near x_out, side=-1 near x_in; the window must stay
    strictly outside the coupling support (and away from the crossing when
    the problem is decoupled).
    """
    support = prob.w.support if prob.w.amplitude != 0.0 else None
    if side == 1:
        inner = support[1] if support else 0.0
        margin = prob.x_out - inner
        if eps is None:
            eps = 0.5 * margin
        xs = np.linspace(prob.x_out - eps, prob.x_out, points)
        if xs[0] <= inner:
            raise WindowInsideSupport(
                f"read-off window starting at x={xs[0]:g} overlaps the "
                f"coupling support (ending at {inner:g})"
            )
    else:
        inner = support[0] if support else 0.0
        margin = inner - prob.x_in
        if eps is None:
            eps = 0.5 * margin
        xs = np.linspace(prob.x_in, prob.x_in + eps, points)
        if xs[-1] >= inner:
            raise WindowInsideSupport(
                f"read-off window ending at x={xs[-1]:g} overlaps the "
                f"coupling support (starting at {inner:g})"
            )
    return xs


def numeric_transfer_case_i(
    prob: SchrodingerProblem,
    which_sign: int = 1,
    eps: float | None = None,
    window_points: int = DECOMPOSE_WINDOW,
) -> TransferMatrix:
    """Transfer matrix at (0, which_sign * xi0) extracted from two solves.

    which_sign=+1: basis inputs on the + branches at x_in, integrated
    rightward, + coefficients averaged over a window before x_out.
    which_sign=-1: the - branches move leftward, so their incoming data
    lives at x_out; basis inputs there are integrated leftward and the -
    coefficients are read near x_in. Averaging over the window suppresses
    the oscillatory cross-branch contamination of the leading-order
    decomposition.
    """
    if prob.case != "i":
        raise CaseMismatch("numeric transfer extraction needs case i")
    if which_sign not in (1, -1):
        raise ValidationError("which_sign must be +1 or -1")
    basis = WkbBasis(prob)
    xs = _read_window(prob, which_sign, eps, window_points)
    h = prob.h
    cols = []
    for data in ((1.0, 0.0), (0.0, 1.0)):
        if which_sign == 1:
            coeffs = (data[0], 0.0, data[1], 0.0)
            y0 = basis.synthesize(coeffs, prob.x_in)
            y = _integrate(prob, y0, prob.x_in, prob.x_out, xs)
            got = [
                branch_decompose(basis, j, xs, y[2 * j - 2], h * y[2 * j - 1])[0]
                for j in (1, 2)
            ]
        else:
            coeffs = (0.0, data[0], 0.0, data[1])
            y0 = basis.synthesize(coeffs, prob.x_out)
            y = _integrate(prob, y0, prob.x_out, prob.x_in, xs[::-1])
            got = [
                branch_decompose(
                    basis, j, xs[::-1], y[2 * j - 2], h * y[2 * j - 1]
                )[1]
                for j in (1, 2)
            ]
        cols.append((complex(np.mean(got[0])), complex(np.mean(got[1]))))
    entries = [[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]]
    return TransferMatrix(entries, h=prob.h, kind="extracted")


def build_crossing_data(prob: SchrodingerProblem, which: int) -> CrossingData:
    """Crossing invariants at (0, which * xi0); which=0 is the origin case.

    The symbols xi^2 + V_j - E0 are recentred at the crossing exactly
    (binomial shift); the constant term, zero in exact arithmetic, is
    removed explicitly so a floating-point sqrt(E0) cannot break the
    vanishing precondition of the bracket analysis.
    """
    if which in (1, -1):
        if prob.case != "i":
            raise CaseMismatch("momentum +-xi0 crossings need E0 > 0")
        xi_c = which * prob.xi0
    elif which == 0:
        if prob.case != "ii":
            raise CaseMismatch("the origin crossing needs E0 = 0")
        xi_c = 0.0
    else:
        raise ValidationError("which must be +1, -1 or 0")
    symbols = []
    for v in (prob.v1, prob.v2):
        p = Poly2({(0, 2): 1.0}) + Poly2.from_x_poly(v.coeffs)
        p = (p - Poly2.const(prob.e0)).shift(0.0, xi_c)
        c00 = p.at_origin()
        if abs(c00) > 1e-9 * max(1.0, p.max_abs_coeff()):
            raise ValidationError(
                f"symbol does not vanish at the requested crossing ({c00:g})"
            )
        symbols.append(p - Poly2.const(c00))
    w0 = complex(prob.w(0.0))
    data = crossing_data_from_symbols(
        symbols[0], symbols[1], w0, w0, max_m=2 * prob.n + 2
    )
    expected = prob.n if which != 0 else 2 * prob.n
    if data.m != expected:
        raise ValidationError(
            f"contact order {data.m} does not match the expected {expected}"
        )
    return data


def _omega_case_i(prob: SchrodingerProblem) -> complex:
    delta = prob.delta_n()
    n = prob.n
    theta = -math.copysign(math.pi / (2 * (n + 1)), delta)
    mag = (2.0 * math.factorial(n + 1) / abs(delta)) ** (1.0 / (n + 1))
    return mu_m(n, theta) * gamma_real((n + 2) / (n + 1)) * mag


def predict_transfer_case_i(
    prob: SchrodingerProblem, which_sign: int = 1
) -> TransferMatrix:
    """Closed-form leading transfer matrix at (0, which_sign * xi0).

    At +xi0 the off-diagonals are -i h^{1/(n+1)} W(0) (omega, conj(omega));
    at -xi0 the two amplitudes trade places. Diagonal entries are 1 up to a
    higher-order remainder.
    """
    if prob.case != "i":
        raise CaseMismatch("the +-xi0 prediction needs case i")
    if which_sign not in (1, -1):
        raise ValidationError("which_sign must be +1 or -1")
    omega = _omega_case_i(prob)
    if which_sign == -1:
        omega = np.conj(omega)
    lam = prob.h ** (1.0 / (prob.n + 1))
    w0 = prob.w(0.0)
    entries = [
        [1.0, -1j * lam * omega * w0],
        [-1j * lam * np.conj(omega) * w0, 1.0],
    ]
    return TransferMatrix(entries, h=prob.h, kind="predicted")


def predict_transfer_case_ii(prob: SchrodingerProblem) -> TransferMatrix:
    """Closed-form leading transfer matrix at the zero-energy crossing.

    Both off-diagonal amplitudes are real and positive:

        omega_j = 2 (|V_k'(0)|/|V_j'(0)|
                     * (2n+1) n! / (|V_j'(0)|^n |delta_n|))^{1/(2n+1)}
                  * Gamma((2n+2)/(2n+1)) * cos(pi / (2(2n+1)))

    with k the other index and delta_n the first nonvanishing derivative
    of V2 - V1 at 0.
    """
    if prob.case != "ii":
        raise CaseMismatch("the zero-energy prediction needs case ii")
    n = prob.n
    delta = abs(prob.delta_n())
    g = [abs(v.deriv_at(1, 0.0)) for v in (prob.v1, prob.v2)]
    root = 1.0 / (2 * n + 1)
    shared = gamma_real((2 * n + 2) / (2 * n + 1)) * math.cos(
        math.pi / (2 * (2 * n + 1))
    )
    omega = [
        2.0
        * (g[1 - j] / g[j] * (2 * n + 1) * math.factorial(n) / (g[j] ** n * delta))
        ** root
        * shared
        for j in (0, 1)
    ]
    lam = prob.h ** root
    w0 = prob.w(0.0)
    entries = [
        [1.0, -1j * lam * omega[0] * w0],
        [-1j * lam * omega[1] * w0, 1.0],
    ]
    return TransferMatrix(entries, h=prob.h, kind="predicted")


def schrodinger_corpus(h: float) -> list[SchrodingerProblem]:
    """Reference problems: two positive-energy cases and one zero-energy case.

    The positive-energy entries use E0 = 1 and equal potential slopes at 0,
    where the closed-form amplitudes coincide with the general symbol-level
    route exactly; the coupling width keeps its curvature at the crossing
    small so next-order corrections stay out of the asymptotic fits.
    """
    wide = Bump(width=0.8, amplitude=1.0)
    return [
        SchrodingerProblem(
            v1=Poly1((0.0, -0.25)),
            v2=Poly1((0.0, 0.25)),
            w=wide,
            e0=1.0,
            n=1,
            h=h,
            x_in=-1.2,
            x_out=1.2,
        ),
        SchrodingerProblem(
            v1=Poly1((0.0, 0.25)),
            v2=Poly1((0.0, 0.25, 0.4)),
            w=wide,
            e0=1.0,
            n=2,
            h=h,
            x_in=-1.2,
            x_out=1.2,
        ),
        SchrodingerProblem(
            v1=Poly1((0.0, -1.0)),
            v2=Poly1((0.0, -2.0)),
            w=Bump(width=0.5, amplitude=1.0),
            e0=0.0,
            n=1,
            h=h,
            x_in=-0.9,
            x_out=0.9,
        ),
    ]
