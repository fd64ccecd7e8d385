import math

import numpy as np
import pytest

from randhyp import (BaseSystemSpec, ConfigurationError, make_family,
                     min_log_expansion, sample_base, supadditivity_residuals,
                     symbol_at, tempered_constant, temperedness_curve,
                     uniform_rate_estimate, variable_rate_corollary,
                     build_expansion_certificate, min_expansion_table)
from randhyp.base import base_step, shift_by, symbol_window
from randhyp.expansion import (certified_depth, lipschitz_slack,
                               min_expansion_sweep, one_step_min_expansion)

LOG2 = math.log(2)
FLOOR = math.log(2 - 0.2 * math.pi)


def dirac():
    return sample_base(BaseSystemSpec.dirac(), 0, 1)[0]


def bern_spec():
    return BaseSystemSpec.bernoulli([0.5, 0.5])


def test_doubling_min_expansion_exact():
    fam = make_family("doubling")
    for n in (1, 5, 12):
        lo, up = min_log_expansion(fam, dirac(), n)
        assert lo == up == pytest.approx(n * LOG2, abs=1e-12)


def test_bernoulli_linear_min_expansion():
    fam = make_family("bernoulli-linear", {"values": [2, 3]})
    w = sample_base(bern_spec(), 31, 1)[0]
    lo, up = min_log_expansion(fam, w, 3, grid_size=1)
    syms = symbol_window(w, 0, 3)
    expected = sum(math.log((2, 3)[s]) for s in syms)
    assert lo == up == pytest.approx(expected, abs=1e-12)


def test_perturbed_one_step_grid_vs_analytic():
    fam = make_family("perturbed-doubling", {"eps_max": 0.1})
    ws = sample_base(bern_spec(), 3, 8)
    w = next(w for w in ws if symbol_at(w, 0) == 1)  # eps = 0.1
    lo, up = min_log_expansion(fam, w, 1, grid_size=4096)
    assert up == pytest.approx(FLOOR, abs=1e-6)
    assert lo <= FLOOR <= up + 1e-15
    assert up - lo <= lipschitz_slack(fam, 1, 4096) + 1e-15


def test_perturbed_bracket_contains_brute_force():
    # brute-force oracle on a 10^6 grid for small n
    fam = make_family("perturbed-doubling", {"eps_max": 0.1})
    w = sample_base(bern_spec(), 17, 1)[0]
    for n in (1, 3, 6):
        lo, up = min_log_expansion(fam, w, n, grid_size=4096)
        xs = np.arange(1_000_000) / 1_000_000
        acc = np.zeros_like(xs)
        state = w
        for _ in range(n):
            acc += np.log(fam.deriv_vec(state, xs))
            xs = fam.apply_vec(state, xs)
            state = base_step(state)
        brute = float(acc.min())
        assert lo - 1e-12 <= brute <= up + 1e-12


def test_matrix_family_min_is_sigma_min():
    fam = make_family("random-cat")
    w = sample_base(bern_spec(), 5, 1)[0]
    lo, up = min_log_expansion(fam, w, 4)
    idx = fam.matrix_indices(w, 4)
    prod = np.eye(2)
    for j in idx:
        prod = fam.matrices[j] @ prod
    sigma_min = np.linalg.svd(prod, compute_uv=False)[-1]
    assert lo == up == pytest.approx(math.log(sigma_min), abs=1e-9)


def test_supadditivity_doubling_exact_zero():
    # zero up to accumulated ulps: every A_n is exactly n log 2
    fam = make_family("doubling")
    rep = supadditivity_residuals(fam, dirac(), N=10)
    assert all(abs(r) <= 1e-13 for (_, _, r) in rep.residuals)
    assert abs(rep.min_residual) <= 1e-13


def test_supadditivity_bernoulli_linear():
    fam = make_family("bernoulli-linear", {"values": [2, 3]})
    w = sample_base(bern_spec(), 23, 1)[0]
    rep = supadditivity_residuals(fam, w, N=12, grid_size=1)
    assert abs(rep.min_residual) <= 1e-12


def test_supadditivity_perturbed():
    fam = make_family("perturbed-doubling", {"eps_max": 0.1})
    w = sample_base(bern_spec(), 29, 1)[0]
    rep = supadditivity_residuals(fam, w, N=12, grid_size=8192)
    assert rep.min_residual >= -1e-6
    # table covers all pairs n+m <= N
    assert len(rep.residuals) == sum(1 for n in range(1, 12)
                                     for m in range(1, 12 - n + 1))


def test_uniform_rate_doubling():
    fam = make_family("doubling")
    est = uniform_rate_estimate(fam, BaseSystemSpec.dirac(), 1, samples=3, n_max=10)
    assert est.a_estimate == pytest.approx(LOG2, abs=1e-12)
    for (_, u, _) in est.trend:
        assert u == pytest.approx(LOG2, abs=1e-12)


def test_uniform_rate_bernoulli_linear():
    fam = make_family("bernoulli-linear", {"values": [2, 3]})
    est = uniform_rate_estimate(fam, bern_spec(), 2, samples=50, n_max=1000,
                                grid_size=1)
    assert est.a_estimate == pytest.approx(math.log(6) / 2, abs=0.02)


def test_uniform_rate_perturbed_bracket_and_trend():
    # every trend value is pinched by the pointwise derivative bounds; the
    # monotone climb toward A is the supadditivity residual test's job
    fam = make_family("perturbed-doubling", {"eps_max": 0.1})
    est = uniform_rate_estimate(fam, bern_spec(), 3, samples=10, n_max=12,
                                grid_size=8192)
    assert FLOOR <= est.a_estimate <= LOG2
    for (_, u, _) in est.trend:
        assert FLOOR - 1e-12 <= u <= LOG2 + 1e-12


def test_tempered_constant_doubling():
    fam = make_family("doubling")
    c = tempered_constant(fam, dirac(), 0.5 * LOG2, 20)
    assert c.value == pytest.approx(math.sqrt(2), abs=1e-12)
    assert c.attained_n == 1
    c_eq = tempered_constant(fam, dirac(), LOG2, 50)
    assert c_eq.value == pytest.approx(1.0, abs=1e-12)


def test_tempered_constant_monotone_in_depth():
    fam = make_family("bernoulli-linear", {"values": [2, 3]})
    w = sample_base(bern_spec(), 37, 1)[0]
    values = [tempered_constant(fam, w, 0.6, d).value for d in (1, 5, 20, 50)]
    for a, b in zip(values, values[1:]):
        assert b <= a + 1e-15
    assert values[-1] > 0.0


def test_tempered_constant_finite_evaluation_oracle():
    fam = make_family("bernoulli-linear", {"values": [2, 3]})
    w = sample_base(bern_spec(), 41, 1)[0]
    c = tempered_constant(fam, w, 0.6, 30)
    syms = symbol_window(w, 0, 30)
    terms = []
    acc = 0.0
    for n, s in enumerate(syms, start=1):
        acc += math.log((2, 3)[s])
        terms.append(math.exp(acc - 0.6 * n))
    assert c.value == pytest.approx(min(terms), rel=1e-12)


def test_tempered_constant_validation():
    fam = make_family("doubling")
    with pytest.raises(ConfigurationError):
        tempered_constant(fam, dirac(), -0.1, 10)
    with pytest.raises(ConfigurationError):
        tempered_constant(fam, dirac(), 0.8, 10, a_estimate=LOG2)


def test_temperedness_curve_doubling_analytic():
    fam = make_family("doubling")
    curve = temperedness_curve(fam, BaseSystemSpec.dirac(), 1, lam=0.5 * LOG2,
                               n_max=200, depth=20)
    # C is constant along the one-point base, so the curve is log(sqrt 2)/n
    expected = 0.5 * LOG2 / curve.ns
    assert np.allclose(curve.values, expected, atol=1e-12)


def test_temperedness_curve_bernoulli_linear():
    fam = make_family("bernoulli-linear", {"values": [2, 3]})
    vals = []
    for seed in range(20):
        curve = temperedness_curve(fam, bern_spec(), seed, lam=0.6,
                                   n_max=10_000, depth=50)
        vals.append(curve.last())
    assert abs(np.mean(vals)) < 0.02
    # no exponential drift: value at 2n within |value at n| + 0.01
    assert abs(curve.values[-1]) <= abs(curve.values[4999]) + 0.01


def test_curve_matches_direct_constant():
    # the vectorized sliding-window path equals the direct computation
    fam = make_family("bernoulli-linear", {"values": [2, 3]})
    w = sample_base(bern_spec(), 53, 1)[0]
    from randhyp.expansion import temperedness_curve_at
    curve = temperedness_curve_at(fam, w, 0.6, 30, depth=10)
    state = base_step(w)
    for i, n in enumerate(curve.ns):
        direct = tempered_constant(fam, state, 0.6, 10).log_value / n
        assert curve.values[i] == pytest.approx(direct, abs=1e-12)
        state = base_step(state)


def test_recursion_bound_attained_beyond_first():
    # with lambda between log2 and log3 the infimum can move past n = 1,
    # exercising C(w) >= C(Tw) e^{-lam} D_1(w)
    fam = make_family("bernoulli-linear", {"values": [2, 3]})
    lam = 0.8
    hit = 0
    for seed in range(40):
        w = sample_base(bern_spec(), seed, 1)[0]
        c_w = tempered_constant(fam, w, lam, 50)
        c_tw = tempered_constant(fam, base_step(w), lam, 50)
        d1 = one_step_min_expansion(fam, w)
        if c_w.attained_n >= 2:
            hit += 1
            assert c_w.log_value >= (c_tw.log_value - lam + math.log(d1)) - 1e-12
        # combined bound holds in every case
        lhs = c_tw.log_value - c_w.log_value
        rhs = math.log(max(one_step_min_expansion(fam, base_step(w)), math.exp(lam))) \
            - math.log(d1)
        assert lhs <= rhs + 1e-12
    assert hit > 0


def test_corollary_positive_for_two_three():
    fam = make_family("bernoulli-linear", {"values": [2, 3]})
    rep = variable_rate_corollary(fam, bern_spec(), 11, samples=400, grid_size=1)
    assert rep.verdict == "positive"
    assert rep.estimate == pytest.approx(math.log(6) / 2, abs=0.1)
    assert rep.lambda_const > 0


def test_corollary_inconclusive_for_symmetric_rates():
    fam = make_family("bernoulli-linear", {"values": [0.5, 2.0]})
    rep = variable_rate_corollary(fam, bern_spec(), 11, samples=1000, grid_size=1)
    assert rep.verdict == "inconclusive"
    assert abs(rep.estimate) <= 3 * rep.std_err


def test_corollary_doubling():
    fam = make_family("doubling")
    rep = variable_rate_corollary(fam, BaseSystemSpec.dirac(), 1, samples=10)
    assert rep.verdict == "positive"
    assert rep.estimate == pytest.approx(LOG2, abs=1e-12)


def test_certificate_doubling_certified():
    fam = make_family("doubling")
    cert = build_expansion_certificate(fam, BaseSystemSpec.dirac(), 1,
                                       samples=3, n_max=10, curve_n_max=500)
    assert cert.verdict == "certified-expanding"
    assert cert.a_estimate == pytest.approx(LOG2, abs=1e-12)
    assert cert.lam == pytest.approx(0.5 * LOG2, abs=1e-12)
    assert all(c > 0 for (_, c, _, _) in cert.c_samples)
    assert cert.supadditivity_min_residual >= -1e-9


def test_certificate_marginal_family_inconclusive():
    fam = make_family("bernoulli-linear", {"values": [0.5, 2.0]})
    cert = build_expansion_certificate(fam, bern_spec(), 3, samples=20,
                                       n_max=12, grid_size=1, curve_n_max=500)
    assert cert.verdict == "inconclusive"


def test_certificate_lambda_validation():
    fam = make_family("doubling")
    with pytest.raises(ConfigurationError):
        build_expansion_certificate(fam, BaseSystemSpec.dirac(), 1, samples=2,
                                    n_max=6, lam=5.0, curve_n_max=100)


def test_certified_depth_limits_slack():
    fam = make_family("perturbed-doubling", {"eps_max": 0.1})
    d = certified_depth(fam, 8192)
    assert 1 <= d <= 50
    assert lipschitz_slack(fam, d, 8192) <= 0.1
    exact = make_family("doubling")
    assert certified_depth(exact, 8192) == 50


def test_min_expansion_table_rows():
    fam = make_family("perturbed-doubling", {"eps_max": 0.1})
    w = sample_base(bern_spec(), 3, 1)[0]
    table = min_expansion_table(fam, w, 6, grid_size=4096)
    assert len(table.rows) == 6
    for (n, lo, up) in table.rows:
        assert lo <= up
        assert up - lo <= table.slack + 1e-15


def test_ordering_chain_perturbed():
    # sampled exponents dominate the uniform rate estimate
    fam = make_family("perturbed-doubling", {"eps_max": 0.1})
    spec = bern_spec()
    rate = uniform_rate_estimate(fam, spec, 7, samples=10, n_max=12,
                                 grid_size=4096)
    from randhyp import exponent_positivity_report
    rep = exponent_positivity_report(fam, spec, 7, samples=20, n=5000)
    assert rep["min_exponent"] >= rate.a_estimate - 0.05
