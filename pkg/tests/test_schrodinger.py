"""Coupled-pair front end: crossing data from potentials, closed-form
transfer predictions for both energy regimes, and numeric extraction in the
oscillatory basis.

Numeric tolerances were measured once with margin and frozen; the tight
h=1e-3 comparison lives in the acceptance suite, module tests run at a
cheaper h.
"""

import dataclasses
import math

import numpy as np
import pytest

from crossing_kit.errors import (
    CaseMismatch,
    IllConditioned,
    TurningPointInRange,
    ValidationError,
    WindowInsideSupport,
)
from crossing_kit.profiles import Bump, Poly1, ZERO_BUMP
from crossing_kit.schrodinger import (
    SchrodingerProblem,
    WkbBasis,
    branch_decompose,
    build_crossing_data,
    numeric_transfer_case_i,
    predict_transfer_case_i,
    predict_transfer_case_ii,
    schrodinger_corpus,
    solve_schrodinger_ode,
)
from crossing_kit.symbolcalc import transfer_predicted_general

SQRT_2PI = 2.506628274631000502415765284811045253007


# ---------------------------------------------------------------- validation


def test_problem_validation():
    v1 = Poly1((0.0, -0.25))
    v2 = Poly1((0.0, 0.25))
    w = Bump(width=0.5)
    with pytest.raises(ValidationError):
        SchrodingerProblem(v1=v1, v2=v2, w=w, e0=1.0, n=1, h=1e-3, x_in=0.1, x_out=1.0)
    with pytest.raises(ValidationError):
        SchrodingerProblem(v1=v1, v2=v2, w=w, e0=1.0, n=2, h=1e-3, x_in=-1.0, x_out=1.0)
    with pytest.raises(ValidationError):  # identical potentials: no declared order fits
        SchrodingerProblem(v1=v1, v2=v1, w=w, e0=1.0, n=1, h=1e-3, x_in=-1.0, x_out=1.0)
    with pytest.raises(ValidationError):  # negative energy
        SchrodingerProblem(v1=v1, v2=v2, w=w, e0=-1.0, n=1, h=1e-3, x_in=-1.0, x_out=1.0)
    with pytest.raises(ValidationError):  # turning point inside the interval
        SchrodingerProblem(
            v1=Poly1((0.0, 2.0)), v2=Poly1((0.0, 2.0, 1.0)), w=Bump(width=0.2),
            e0=1.0, n=2, h=1e-3, x_in=-1.0, x_out=1.0,
        )
    with pytest.raises(ValidationError):  # coupling support reaches the boundary
        SchrodingerProblem(v1=v1, v2=v2, w=Bump(width=1.0), e0=1.0, n=1, h=1e-3,
                           x_in=-1.0, x_out=1.0)
    with pytest.raises(ValidationError):  # zero-energy case needs V1(0) = 0
        SchrodingerProblem(v1=Poly1((0.5, -1.0)), v2=Poly1((0.5, -2.0)), w=w,
                           e0=0.0, n=1, h=1e-3, x_in=-0.9, x_out=0.9)
    with pytest.raises(ValidationError):  # zero-energy case needs V_j'(0) != 0
        SchrodingerProblem(v1=Poly1((0.0, 0.0, 1.0)), v2=Poly1((0.0, 0.0, 2.0)), w=w,
                           e0=0.0, n=2, h=1e-3, x_in=-0.9, x_out=0.9)


def test_corpus_shape_and_cases():
    corpus = schrodinger_corpus(1e-3)
    assert [p.case for p in corpus] == ["i", "i", "ii"]
    assert [p.n for p in corpus] == [1, 2, 1]
    assert corpus[0].xi0 == 1.0
    assert corpus[0].delta_n() == 0.5
    assert corpus[1].delta_n() == 0.8  # (V2-V1)''(0) with V2-V1 = 0.4 x^2


# -------------------------------------------------------------- crossing data


def test_crossing_data_tangential_example():
    # E0=1, V1=2x, V2=2x+x^2: order-2 contact at (0, 1) with bracket 8
    prob = SchrodingerProblem(
        v1=Poly1((0.0, 2.0)), v2=Poly1((0.0, 2.0, 1.0)), w=Bump(width=0.2),
        e0=1.0, n=2, h=1e-3, x_in=-0.3, x_out=0.3,
    )
    data = build_crossing_data(prob, 1)
    assert data.m == 2
    assert data.bracket_m == 8.0
    assert data.grad1 == (2.0, 2.0)
    assert data.grad2 == (2.0, 2.0)
    assert data.s == 1
    assert data.theta1 == data.theta2 == -math.atan(1.0)
    assert data.q1_0 == data.q2_0 == complex(prob.w(0.0))


def test_minus_crossing_bracket_parity():
    # the n-fold bracket picks up (-1)^n between the two crossing momenta
    corpus = schrodinger_corpus(1e-3)
    odd = build_crossing_data(corpus[0], 1), build_crossing_data(corpus[0], -1)
    assert odd[0].bracket_m == 1.0
    assert odd[1].bracket_m == -1.0
    even = build_crossing_data(corpus[1], 1), build_crossing_data(corpus[1], -1)
    assert even[0].bracket_m == even[1].bracket_m == pytest.approx(3.2, abs=1e-12)


def test_crossing_data_case_mismatch():
    corpus = schrodinger_corpus(1e-3)
    with pytest.raises(CaseMismatch):
        build_crossing_data(corpus[0], 0)
    with pytest.raises(CaseMismatch):
        build_crossing_data(corpus[2], 1)
    with pytest.raises(ValidationError):
        build_crossing_data(corpus[0], 2)


def test_zero_energy_bracket_identity():
    # 2n-fold bracket at the origin equals ((-1)^n (2n)!/n!) V1'(0)^n delta_n
    p1 = schrodinger_corpus(1e-3)[2]  # V1 = -x, V2 = -2x
    assert build_crossing_data(p1, 0).bracket_m == -2.0
    p2 = SchrodingerProblem(
        v1=Poly1((0.0, -1.0)), v2=Poly1((0.0, -1.0, 1.0)), w=Bump(width=0.5),
        e0=0.0, n=2, h=1e-3, x_in=-0.9, x_out=0.9,
    )
    assert build_crossing_data(p2, 0).bracket_m == 24.0


# ------------------------------------------------------------ the predictions


def test_predicted_amplitude_goldens():
    corpus = schrodinger_corpus(1e-3)
    T = predict_transfer_case_i(corpus[0], 1)
    lam = math.sqrt(corpus[0].h)
    omega = T.t12 / (-1j * lam * corpus[0].w(0.0))
    assert abs(abs(omega) - SQRT_2PI) < 1e-12
    assert abs(np.angle(omega) + math.pi / 4.0) < 1e-12
    # unit difference slope: amplitude reduces to sqrt(pi) e^{-i pi/4}
    unit = SchrodingerProblem(
        v1=Poly1((0.0, -0.5)), v2=Poly1((0.0, 0.5)), w=Bump(width=0.3),
        e0=1.0, n=1, h=1e-3, x_in=-1.0, x_out=1.0,
    )
    Tu = predict_transfer_case_i(unit, 1)
    omega_u = Tu.t12 / (-1j * math.sqrt(unit.h) * unit.w(0.0))
    assert abs(omega_u - math.sqrt(math.pi) * np.exp(-1j * math.pi / 4.0)) < 1e-12


def test_prediction_matches_general_route_both_signs():
    for prob in schrodinger_corpus(1e-3)[:2]:
        for sign in (1, -1):
            display = predict_transfer_case_i(prob, sign)
            general = transfer_predicted_general(
                build_crossing_data(prob, sign), prob.h
            )
            assert display.max_abs_diff(general) < 1e-12


def test_minus_crossing_swaps_the_amplitudes():
    prob = schrodinger_corpus(1e-3)[0]
    plus = predict_transfer_case_i(prob, 1)
    minus = predict_transfer_case_i(prob, -1)
    assert abs(plus.t12 - minus.t21) < 1e-15
    assert abs(plus.t21 - minus.t12) < 1e-15


def test_zero_coupling_prediction_is_identity():
    prob = dataclasses.replace(
        schrodinger_corpus(1e-3)[0], w=Bump(width=0.2, center=0.5)
    )
    assert prob.w(0.0) == 0.0
    T = predict_transfer_case_i(prob, 1)
    assert np.abs(T.entries - np.eye(2)).max() == 0.0


def test_case_ii_goldens_and_ratio():
    prob = schrodinger_corpus(1e-3)[2]  # V1 = -x, V2 = -2x
    T = predict_transfer_case_ii(prob)
    lam = prob.h ** (1.0 / 3.0)
    w0 = prob.w(0.0)
    omega1 = T.t12 / (-1j * lam * w0)
    omega2 = T.t21 / (-1j * lam * w0)
    assert abs(omega1 - 2.8105147707426159) < 1e-12
    assert abs(omega2 - 1.4052573853713080) < 1e-12
    # exact algebraic ratio (|V2'|/|V1'|)^{(n+2)/(2n+1)} = 2
    assert abs(omega1 / omega2 - 2.0) < 1e-12
    general = transfer_predicted_general(build_crossing_data(prob, 0), prob.h)
    assert T.max_abs_diff(general) < 1e-12


def test_case_mismatch_between_predictors():
    corpus = schrodinger_corpus(1e-3)
    with pytest.raises(CaseMismatch):
        predict_transfer_case_i(corpus[2], 1)
    with pytest.raises(CaseMismatch):
        predict_transfer_case_ii(corpus[0])
    with pytest.raises(ValidationError):
        predict_transfer_case_i(corpus[0], 3)


# ------------------------------------------------------------------ the basis


def test_basis_normalization_and_flux():
    prob = schrodinger_corpus(1e-3)[0]
    basis = WkbBasis(prob)
    for j, v in ((1, prob.v1), (2, prob.v2)):
        c = (1.0 + v.deriv_at(1, 0.0) ** 2 / 4.0) ** 0.25
        assert basis.amplitude(j, 0.0) == pytest.approx(c, rel=1e-14)
        xs = np.linspace(prob.x_in, prob.x_out, 17)
        flux = basis.amplitude(j, xs) ** 2 * basis.momentum(j, xs)
        assert np.abs(flux - flux[0]).max() < 1e-13


def test_phase_closed_form_for_constant_potential():
    prob = SchrodingerProblem(
        v1=Poly1((0.36,)), v2=Poly1((0.36, 0.5)), w=Bump(width=0.3),
        e0=1.0, n=1, h=1e-3, x_in=-0.8, x_out=0.8,
    )
    basis = WkbBasis(prob)
    for x in (-0.7, 0.3, 0.8):
        assert basis.phase(1, x) == pytest.approx(0.8 * x, rel=1e-13, abs=1e-15)


def test_basis_requires_positive_energy():
    with pytest.raises(CaseMismatch):
        WkbBasis(schrodinger_corpus(1e-3)[2])


def test_decompose_round_trip_and_conjugation():
    prob = schrodinger_corpus(1e-3)[0]
    basis = WkbBasis(prob)
    rng = np.random.default_rng(11)
    coeffs = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    x = 0.95
    y = basis.synthesize(coeffs, x)
    got = []
    for j in (1, 2):
        ap, am = branch_decompose(
            basis, j, x, y[2 * j - 2], prob.h * y[2 * j - 1]
        )
        got.extend([complex(ap), complex(am)])
    assert np.abs(np.array(got) - coeffs).max() < 1e-12
    # conjugating the state swaps the branches with conjugated coefficients
    swapped = np.conj(coeffs[[1, 0, 3, 2]])
    assert np.abs(np.conj(y) - basis.synthesize(swapped, x)).max() < 1e-12


def test_decompose_ill_conditioned_near_flux_collapse():
    tiny = SchrodingerProblem(
        v1=Poly1((0.0,)), v2=Poly1((0.0, 1e-20)), w=Bump(width=0.2),
        e0=1e-18, n=1, h=1e-3, x_in=-0.5, x_out=0.5,
    )
    basis = WkbBasis(tiny)
    with pytest.raises(IllConditioned):
        branch_decompose(
            basis, 1, np.array([0.4]), np.array([1.0 + 0j]), np.array([0.0j])
        )


# ------------------------------------------------------------------ the solves


def test_solver_rejects_the_turning_point_case():
    with pytest.raises(TurningPointInRange):
        solve_schrodinger_ode(schrodinger_corpus(1e-3)[2], (1.0, 0.0, 0.0, 0.0))


def test_decoupled_solution_tracks_its_branch():
    prob = dataclasses.replace(schrodinger_corpus(2.5e-3)[0], w=ZERO_BUMP)
    sol = solve_schrodinger_ode(prob, (1.0, 0.0, 0.0, 0.0))
    assert np.abs(sol.u2.values).max() < 1e-9
    basis = WkbBasis(prob)
    for x in (-1.2, 0.0, 0.9):
        k = sol.u1.index_of(x)
        xg = sol.u1.x0 + k * sol.u1.dx
        wkb = basis.amplitude(1, xg) * np.exp(1j * basis.phase(1, xg) / prob.h)
        assert abs(sol.u1.values[k] - wkb) < 0.5 * prob.h


def test_tolerance_refinement_is_converged():
    prob = schrodinger_corpus(2.5e-3)[0]
    a = solve_schrodinger_ode(prob, (1.0, 0.0, 0.0, 0.0), tol=1e-11)
    b = solve_schrodinger_ode(prob, (1.0, 0.0, 0.0, 0.0), tol=5e-12)
    diff = max(
        np.abs(a.u1.values - b.u1.values).max(),
        np.abs(a.u2.values - b.u2.values).max(),
    )
    assert diff < 1e-8


def test_numeric_transfer_both_crossings():
    prob = schrodinger_corpus(2.5e-3)[0]
    for sign in (1, -1):
        ext = numeric_transfer_case_i(prob, sign)
        pred = predict_transfer_case_i(prob, sign)
        for entry in ("t12", "t21"):
            e, p = getattr(ext, entry), getattr(pred, entry)
            assert abs(e - p) / abs(p) < 0.08, (sign, entry)
        assert abs(ext.t11 - 1.0) < 0.03
        assert abs(ext.t22 - 1.0) < 0.03


def test_numeric_transfer_decoupled_is_identity():
    prob = dataclasses.replace(schrodinger_corpus(2.5e-3)[0], w=ZERO_BUMP)
    ext = numeric_transfer_case_i(prob, 1)
    assert np.abs(ext.entries - np.eye(2)).max() < 1e-4


def test_numeric_transfer_window_and_case_guards():
    prob = schrodinger_corpus(2.5e-3)[0]  # support ends at 0.8, x_out = 1.2
    with pytest.raises(WindowInsideSupport):
        numeric_transfer_case_i(prob, 1, eps=0.5)
    with pytest.raises(WindowInsideSupport):
        numeric_transfer_case_i(prob, -1, eps=0.5)
    with pytest.raises(CaseMismatch):
        numeric_transfer_case_i(schrodinger_corpus(1e-3)[2], 1)
    with pytest.raises(ValidationError):
        numeric_transfer_case_i(prob, 0)
