import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nikkit import branchkit as bk
from nikkit.branchkit import PROPOSITION, DomainError, FactorExponents, SheetSide, SystemParams

# values computed independently with mpmath at 30 digits
F_AT_10 = 0.48354072033846346
F_PLUS_0 = 0.37623391098737596 - 0.18400991300619937j
JUMP_AT_0 = -0.36801982601239874j
RHO1_AT_0 = 0.7524678219747519
RHO2_AT_0 = 0.3907962192460212
SECOND_SHEET_AT_10 = -0.05654836486541811
H1_AT_0 = 2.570126704165378
H2_AT_0 = 3.510634603648856

rng = np.random.default_rng(1234)


def off_cut_points(n, rmin=1.01, rmax=100.0):
    r = np.exp(rng.uniform(math.log(rmin), math.log(rmax), n))
    t = rng.uniform(-np.pi, np.pi, n)
    return r * np.exp(1j * t)


def test_params_validation():
    with pytest.raises(ValueError):
        SystemParams(1.0, 3.0)
    with pytest.raises(ValueError):
        SystemParams(2.0, 1.5)
    p = SystemParams(1.5, 3.0)
    assert 1 < p.a1 < p.a2
    assert p.a1 == pytest.approx((1.5 + 1 / 1.5) / 2)
    assert p.c_inf == pytest.approx(1 / math.sqrt(4.5))


def test_sqrt_joukowski_examples():
    assert bk.sqrt_joukowski(2.0) == pytest.approx(math.sqrt(3), abs=1e-15)
    assert bk.sqrt_joukowski(-2.0) == pytest.approx(-math.sqrt(3), abs=1e-15)
    assert bk.boundary_phi(0.0, "above") == pytest.approx(1j)
    assert bk.boundary_phi(0.0, "below") == pytest.approx(-1j)
    with pytest.raises(DomainError):
        bk.sqrt_joukowski(0.3)


def test_phi_examples():
    assert bk.phi(2.0) == pytest.approx(2 + math.sqrt(3), abs=1e-14)
    assert bk.phi_recip(2.0) == pytest.approx(2 - math.sqrt(3), abs=1e-15)


def test_phi_branch_consistency():
    z = off_cut_points(1000)
    assert np.max(np.abs(bk.phi(z) * bk.phi_recip(z) - 1)) < 1e-14
    assert np.all(np.abs(bk.phi(z)) > 1)
    w = bk.sqrt_joukowski(z)
    assert np.max(np.abs(w * w - (z * z - 1)) / np.abs(z * z)) < 1e-13


def test_sqrt_joukowski_mpmath_matches_double():
    with mpmath.workdps(30):
        v = bk.sqrt_joukowski(mpmath.mpc(-0.3, 0.7))
    assert complex(v) == pytest.approx(bk.sqrt_joukowski(-0.3 + 0.7j), abs=1e-15)


def test_eval_f_examples(params):
    assert bk.eval_f(params, PROPOSITION, 10.0) == pytest.approx(F_AT_10, abs=1e-15)
    assert bk.eval_f(params, PROPOSITION, 1e12) == pytest.approx(1 / math.sqrt(4.5), abs=1e-12)
    e = bk.conjecture_exponents(1 / 3)
    assert bk.eval_f(params, e, 1e12) == pytest.approx((1.5 / 3.0) ** (1 / 3), abs=1e-12)
    with pytest.raises(DomainError):
        bk.eval_f(params, PROPOSITION, 0.5)
    with pytest.raises(DomainError):
        bk.eval_f(params, PROPOSITION, 1.0)


def test_value_at_infinity(params):
    assert bk.value_at_infinity(params, PROPOSITION) == pytest.approx(params.c_inf)
    assert bk.value_at_infinity(params, FactorExponents(0.25, -0.25)) == pytest.approx(0.5 ** 0.25)


def test_boundary_f_examples(params):
    fp = bk.boundary_f(params, PROPOSITION, 0.0, "above")
    fm = bk.boundary_f(params, PROPOSITION, 0.0, SheetSide.BELOW)
    assert fp == pytest.approx(F_PLUS_0, abs=1e-15)
    assert fm == pytest.approx(np.conj(F_PLUS_0), abs=1e-15)
    # principal inverse square root of 3.5 + 4.5i
    assert fp == pytest.approx((3.5 + 4.5j) ** -0.5, abs=1e-15)
    prod = abs(fp * fm)
    assert prod == pytest.approx(1 / (2 * math.sqrt(4.5 * params.a1 * params.a2)), abs=1e-14)
    with pytest.raises(DomainError):
        bk.boundary_f(params, PROPOSITION, 1.0, "above")


def test_boundary_matches_limit_from_above(params):
    x = np.linspace(-0.9, 0.9, 7)
    lim = bk.eval_f(params, PROPOSITION, x + 1e-10j)
    assert np.max(np.abs(lim - bk.boundary_f(params, PROPOSITION, x, "above"))) < 1e-8


def test_eval_h_examples(params):
    assert bk.eval_h(params, 1, 0.0) == pytest.approx(H1_AT_0, abs=1e-14)
    assert bk.eval_h(params, 2, 0.0) == pytest.approx(H2_AT_0, abs=1e-14)
    assert bk.eval_h(params, 1, 1.0) == pytest.approx(2 * math.sqrt(0.5), abs=1e-14)
    x = np.linspace(-1, 1, 201)
    assert np.all(bk.eval_h(params, 1, x) > 0)
    assert np.all(bk.eval_h(params, 2, x) > 0)


def test_jump_f(params):
    assert bk.jump_f(params, PROPOSITION, 0.0) == pytest.approx(JUMP_AT_0, abs=1e-15)
    x = rng.uniform(-1, 1, 100)
    j = bk.jump_f(params, PROPOSITION, x)
    assert np.max(np.abs(j.real)) < 1e-15
    assert np.max(np.abs(j - bk.jump_f_closed_form(params, x))) < 1e-12
    assert abs(bk.jump_f(params, PROPOSITION, 1 - 1e-12)) < 1e-5


def test_second_sheet_examples(params):
    above = bk.second_sheet_f(params, PROPOSITION, 10.0, "above")
    assert above == pytest.approx(SECOND_SHEET_AT_10, abs=1e-15)
    # continuation of f- across (-1, 1) from the upper half-plane
    assert bk.second_sheet_f(params, PROPOSITION, 1e-12j) == pytest.approx(
        np.conj(F_PLUS_0), abs=1e-10)
    for R in (1e3, 1e4):
        v = bk.second_sheet_f(params, PROPOSITION, R + 1e-9j)
        assert (v * R).real == pytest.approx(-0.5, rel=5 / R)


def test_second_sheet_ambiguous_on_second_cut(params):
    with pytest.raises(DomainError):
        bk.second_sheet_f(params, PROPOSITION, 0.5 * (params.a1 + params.a2))


def test_ratio_R_values(params):
    assert bk.ratio_R(params, PROPOSITION, 1, 3.0) == 1
    assert bk.ratio_R(params, PROPOSITION, 2, 0.0, "above") == pytest.approx(RHO1_AT_0, abs=1e-15)
    assert bk.ratio_R(params, PROPOSITION, 3, 0.0, "above") == pytest.approx(RHO2_AT_0, abs=1e-15)
    assert RHO2_AT_0 == pytest.approx(7 / 32.5 + 1 / math.sqrt(32.5), abs=1e-15)
    assert bk.ratio_R(params, PROPOSITION, 3, 1e8 + 1e-3j) == pytest.approx(1 / 4.5, abs=1e-7)


def test_ratio_R_single_valued_across_first_cut(params):
    x = np.linspace(-0.95, 0.95, 50)
    for k in (2, 3):
        up = bk.ratio_R(params, PROPOSITION, k, x, "above")
        dn = bk.ratio_R(params, PROPOSITION, k, x, "below")
        assert np.max(np.abs(up - dn)) < 1e-12


def test_rho2_explicit_matches_symmetric_form(params):
    z = off_cut_points(50, 1.2, 50)
    z = z[(np.abs(z.imag) > 0.05)]
    assert np.max(np.abs(bk.ratio_R(params, PROPOSITION, 3, z) - bk.rho2_explicit(params, z))) < 1e-12


def test_rho1_jump_on_second_cut(params):
    x = np.linspace(params.a1, params.a2, 52)[1:-1]
    jump = (bk.ratio_R(params, PROPOSITION, 2, x, "above")
            - bk.ratio_R(params, PROPOSITION, 2, x, "below"))
    assert np.max(np.abs(jump.real)) < 1e-12
    assert np.max(np.abs(np.abs(jump) - bk.rho1_jump_closed_form(params, x))) < 1e-12


def test_rho3_is_f(params):
    x = np.linspace(params.a1, params.a2, 52)[1:-1]
    assert np.max(np.abs(bk.rho3(params, x) - bk.eval_f(params, PROPOSITION, x))) < 1e-12


def test_rho2_endpoint_poles(params):
    r1, r2 = bk.rho2_endpoint_residues(params)
    for a, r in ((params.a1, r1), (params.a2, r2)):
        eps = 1e-8j
        z = a + eps
        rho2 = bk.ratio_R(params, PROPOSITION, 3, z)
        poles = r1 / (z - params.a1) + r2 / (z - params.a2)
        # the remainder only carries inverse-square-root growth
        assert abs(rho2 * eps - r) < 1e-3
        assert abs((rho2 - poles) * eps) < 1e-3 * abs(r)


@settings(max_examples=60, deadline=None)
@given(st.floats(1.05, 5.0), st.floats(0.05, 5.0), st.floats(-np.pi, np.pi), st.floats(1.05, 30.0))
def test_conjugate_symmetry(A1, dA, t, r):
    p = SystemParams(A1, A1 + dA)
    z = r * np.exp(1j * t)
    if abs(z.imag) < 1e-6:
        return
    for fn in (lambda w: bk.eval_f(p, PROPOSITION, w),
               lambda w: bk.ratio_R(p, PROPOSITION, 3, w),
               bk.phi):
        assert abs(fn(np.conj(z)) - np.conj(fn(z))) <= 1e-14 * max(1.0, abs(fn(z)))
