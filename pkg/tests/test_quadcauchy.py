import math

import numpy as np
import pytest

from nikkit import branchkit as bk
from nikkit.branchkit import PROPOSITION
from nikkit.measures import compose, proposition_measures, sigma, sigma2, sigma3, tabulated
from nikkit.quadcauchy import (Interval, NearSingularityError, RuleMismatchError, build_rule,
                               cauchy_transform, integrate, mass, moment, reconstruct_from_jump,
                               rule_for)

MASS_SIGMA = 0.11785113019775793
MASS_SIGMA2 = 0.3821488698
SIGMA_HAT_10 = 0.012136199547431725
K_HAT_0 = 0.2810633011837202  # int d sigma_2(t) / t = rho_1(0) - c


def test_interval():
    iv = Interval(-1.0, 1.0)
    assert iv.mid == 0 and iv.half == 1
    assert iv.distance(2.0) == pytest.approx(1.0)
    assert iv.distance(0.5 + 0.3j) == pytest.approx(0.3)
    assert iv.disjoint(Interval(1.5, 2.0)) and not iv.disjoint(Interval(0.5, 2.0))
    with pytest.raises(ValueError):
        Interval(1.0, 1.0)


def test_rule_examples():
    r = build_rule(Interval(-1, 1), (0.5, 0.5), 16)
    assert np.sum(r.weights) == pytest.approx(math.pi / 2, abs=1e-12)
    a1, a2 = 1.2, 1.9
    r2 = build_rule(Interval(a1, a2), (-0.5, -0.5), 16)
    assert np.sum(r2.weights) == pytest.approx(math.pi, abs=1e-12)
    r3 = build_rule(Interval(a1, a2), (-0.5, -0.5), 16, node_map="joukowski")
    assert np.sum(r3.weights) == pytest.approx(math.pi, abs=1e-12)


@pytest.mark.parametrize("profile", [(0.5, 0.5), (-0.5, -0.5), (0.0, 0.0), (0.5, -0.5), (-0.5, 0.0)])
@pytest.mark.parametrize("N", [4, 9, 32])
def test_rule_shape(profile, N):
    r = build_rule(Interval(-0.5, 2.0), profile, N)
    assert np.all(r.weights > 0)
    assert np.all(np.diff(r.nodes) > 0)
    assert r.nodes[0] > -0.5 and r.nodes[-1] < 2.0
    # exact on low-degree polynomials against its own weight
    ref = build_rule(Interval(-0.5, 2.0), profile, 64)
    for k in range(min(N, 4)):
        assert np.sum(r.weights * r.nodes ** k) == pytest.approx(np.sum(ref.weights * ref.nodes ** k),
                                                                  rel=1e-12)


def test_unsupported_profile():
    with pytest.raises(ValueError):
        build_rule(Interval(0, 1), (0.25, 0.5), 10)
    with pytest.raises(ValueError):
        build_rule(Interval(0.5, 2), (0.5, 0.5), 10, node_map="joukowski")


def test_rule_mismatch(params):
    with pytest.raises(RuleMismatchError):
        mass(sigma(params), build_rule(Interval(-1, 1), (0.0, 0.0), 20))
    with pytest.raises(RuleMismatchError):
        mass(sigma(params), build_rule(Interval(-1, 2), (0.5, 0.5), 20))


def test_mass_sigma(params):
    exact = (1 / 1.5 + 1 / 3.0) / (4 * math.sqrt(4.5))
    assert exact == pytest.approx(MASS_SIGMA, abs=1e-16)
    assert mass(sigma(params)) == pytest.approx(exact, abs=1e-12)


def test_mass_convergence(params):
    for m in (sigma(params), sigma2(params), sigma3(params)):
        diffs = [abs(mass(m, rule_for(m, N)) - mass(m, rule_for(m, 2 * N))) for N in (25, 50, 100)]
        assert max(diffs) < 1e-9
        assert integrate(m, rule=rule_for(m, 200)).error_estimate <= 1e-9


def test_mass_convergence_stress(stress_params):
    for m in (sigma(stress_params), sigma2(stress_params)):
        a, b = mass(m, rule_for(m, 100)), mass(m, rule_for(m, 200))
        assert abs(a - b) < 1e-9


def test_mass_sigma2_slope_oracle(params):
    c = params.c_inf
    slopes = [Z * (c - bk.ratio_R(params, PROPOSITION, 2, Z)) for Z in (1e3, 1e4)]
    assert mass(sigma2(params)) == pytest.approx(slopes[-1], abs=1e-4)
    assert mass(sigma2(params)) == pytest.approx(MASS_SIGMA2, abs=1e-9)


def test_moment_zero_is_mass(params):
    m = sigma(params)
    assert moment(m, 0) == pytest.approx(mass(m), abs=1e-15)
    with pytest.raises(ValueError):
        moment(m, -1)


def test_cauchy_transform_examples(params):
    res = cauchy_transform(sigma(params), 10.0)
    assert res.value == pytest.approx(SIGMA_HAT_10, abs=1e-14)
    assert res.value == pytest.approx(bk.eval_f(params, PROPOSITION, 10.0) - params.c_inf, abs=1e-14)
    assert res.error_estimate >= 0
    s2 = cauchy_transform(sigma2(params), 0.0).value
    assert s2 == pytest.approx(-K_HAT_0, abs=1e-13)
    assert s2 == pytest.approx(params.c_inf - bk.ratio_R(params, PROPOSITION, 2, 0.0, "above"),
                               abs=1e-13)
    # z * transform = mass + moment_1 / z + O(z**-2); moment_1 / z is ~3e-6 at |z| = 1e4
    z = 1e4 * np.exp(0.3j)
    zs = z * cauchy_transform(sigma(params), z).value
    assert zs == pytest.approx(MASS_SIGMA + moment(sigma(params), 1) / z, abs=1e-8)
    assert abs(zs - MASS_SIGMA) < 1e-5


def test_near_singularity(params):
    with pytest.raises(NearSingularityError):
        cauchy_transform(sigma(params), 0.5 + 1e-4j)
    # configurable threshold
    cauchy_transform(sigma(params), 1.0 + 1e-3j, delta_min=1e-4)


def test_transform_maps_upper_to_lower(params):
    rng = np.random.default_rng(7)
    z = rng.uniform(-3, 3, 100) + 1j * rng.uniform(0.05, 3, 100)
    v = cauchy_transform(sigma(params), z).value
    assert np.all(v.imag < 0)
    vc = cauchy_transform(sigma(params), np.conj(z)).value
    assert np.max(np.abs(vc - np.conj(v))) < 1e-15


def test_nested_transform_consistency(params):
    ms = proposition_measures(params, 200, "positive")
    s1 = ms["s1"]
    z = np.array([2.0 + 0.5j, -3.0, 0.4 + 1.0j])
    nested = cauchy_transform(s1, z).value
    # single integral of K(x) d sigma(x) written out by hand
    rule = build_rule(Interval(-1, 1), (0.5, 0.5), 200)
    x = rule.nodes
    r2 = rule_for(ms["sigma2"], 200)
    t = r2.nodes
    K = (r2.weights * ms["sigma2"].density(t) / r2.weight_function(t)) @ (1.0 / (t[:, None] - x[None, :]))
    g = K * ms["sigma"].density(x) / rule.weight_function(x)
    direct = (1.0 / (z[:, None] - x[None, :])) @ (rule.weights * g)
    assert np.max(np.abs(nested - direct)) < 1e-10


def test_reconstruct_rho1_from_sigma2(params):
    x = np.linspace(-0.99, 0.99, 40)
    rec = reconstruct_from_jump(sigma2(params), params.c_inf, x, sign=-1)
    direct = bk.ratio_R(params, PROPOSITION, 2, x, "above")
    assert np.max(np.abs(rec - direct)) < 1e-6


def test_reconstruct_rho2_needs_endpoint_poles(params):
    x = np.linspace(-0.99, 0.99, 40)
    c2 = params.c_inf ** 2
    rec = reconstruct_from_jump(sigma3(params), c2, x, sign=-1)
    direct = bk.ratio_R(params, PROPOSITION, 3, x, "above")
    r1, r2 = bk.rho2_endpoint_residues(params)
    poles = r1 / (x - params.a1) + r2 / (x - params.a2)
    # the jump alone misses the two simple poles of rho_2 at a1, a2
    assert np.max(np.abs(rec - direct)) > 1e-3
    assert np.max(np.abs(rec + poles - direct)) < 1e-6


def test_reconstruct_zero_density(params):
    rule = build_rule(Interval(params.a1, params.a2), (-0.5, -0.5), 32)
    zero = tabulated(rule, np.zeros(32))
    out = reconstruct_from_jump(zero, 0.25, np.array([0.0, 0.5]), rule)
    assert np.allclose(out, 0.25)
    with pytest.raises(ValueError):
        reconstruct_from_jump(zero, 0.0, 0.0, rule, sign=2)


def test_composition_zero_inner(params):
    rule = build_rule(Interval(params.a1, params.a2), (-0.5, -0.5), 32, "joukowski")
    zero = tabulated(rule, np.zeros(32))
    c = compose(sigma(params), zero)
    assert np.allclose(c.density(np.linspace(-0.9, 0.9, 5)), 0.0)
