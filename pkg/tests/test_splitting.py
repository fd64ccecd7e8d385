import math

import numpy as np
import pytest

from randhyp import (BaseSystemSpec, UnsupportedOperationError, bundle_rates,
                     finite_time_bundles, hyperbolicity_certificate,
                     invariance_residual, make_family, oseledets_spectrum,
                     point, sample_base, top_exponent, unit_tangent)

CAT_RATE = math.log((3 + math.sqrt(5)) / 2)
GOLD = (math.sqrt(5) - 1) / 2          # unstable eigvec slope of [[2,1],[1,1]]


def dirac():
    return sample_base(BaseSystemSpec.dirac(), 0, 1)[0]


def bern_spec():
    return BaseSystemSpec.bernoulli([0.5, 0.5])


def det_cat():
    return make_family("random-cat", {"matrices": [[[2, 1], [1, 1]]]})


def angle_between(u, v):
    u = np.asarray(u) / np.linalg.norm(u)
    v = np.asarray(v) / np.linalg.norm(v)
    return math.acos(min(1.0, abs(float(u @ v))))


def test_deterministic_cat_bundles_golden():
    pair = finite_time_bundles(det_cat(), dirac(), point(0.0, 0.0), 25)
    unstable = np.array([1.0, GOLD])
    stable = np.array([1.0, -(math.sqrt(5) + 1) / 2])
    assert angle_between(pair.gamma2, unstable) < 1e-8
    assert angle_between(pair.gamma1, stable) < 1e-8
    # symmetric matrix: eigenvectors are orthogonal, so the angle is pi/2
    assert pair.angle == pytest.approx(math.pi / 2, abs=1e-10)


def test_diagonal_bundles_exact_axes():
    fam = make_family("diagonal-cocycle", {"a_values": [2.0], "b_values": [0.5]})
    pair = finite_time_bundles(fam, dirac(), point(0.0, 0.0), 10)
    assert pair.gamma2 == pytest.approx((1.0, 0.0), abs=1e-15)
    assert pair.gamma1 == pytest.approx((0.0, 1.0), abs=1e-15)
    assert pair.angle == pytest.approx(math.pi / 2, abs=1e-15)


def test_horizon_self_consistency_random_cat():
    fam = make_family("random-cat")
    for i in range(10):
        w = sample_base(bern_spec(), 100 + i, 1)[0]
        p40 = finite_time_bundles(fam, w, point(0.1, 0.2), 40)
        p60 = finite_time_bundles(fam, w, point(0.1, 0.2), 60)
        assert angle_between(p40.gamma2, p60.gamma2) < 1e-6
        assert angle_between(p40.gamma1, p60.gamma1) < 1e-6


def test_horizon_convergence_is_exponential():
    # at short horizons the drift is visible and shrinks when doubled
    fam = make_family("random-cat")
    ref_h = 80
    for i in range(10):
        w = sample_base(bern_spec(), 500 + i, 1)[0]
        ref = finite_time_bundles(fam, w, point(0.1, 0.2), ref_h)
        p6 = finite_time_bundles(fam, w, point(0.1, 0.2), 6)
        p12 = finite_time_bundles(fam, w, point(0.1, 0.2), 12)
        err6 = angle_between(p6.gamma2, ref.gamma2)
        err12 = angle_between(p12.gamma2, ref.gamma2)
        assert err12 <= err6 + 1e-12


def test_invariance_residual_deterministic_cat():
    pair = finite_time_bundles(det_cat(), dirac(), point(0.0, 0.0), 40)
    res = invariance_residual(det_cat(), dirac(), point(0.0, 0.0), pair)
    assert res < 1e-10


def test_invariance_residual_diagonal_zero():
    fam = make_family("diagonal-cocycle", {"a_values": [2.0], "b_values": [0.5]})
    pair = finite_time_bundles(fam, dirac(), point(0.0, 0.0), 10)
    assert invariance_residual(fam, dirac(), point(0.0, 0.0), pair) == 0.0


def test_invariance_residual_random_cat_samples():
    fam = make_family("random-cat")
    worst = 0.0
    for i in range(100):
        w = sample_base(bern_spec(), 300 + i, 1)[0]
        pair = finite_time_bundles(fam, w, point(0.3, 0.8), 50)
        worst = max(worst, invariance_residual(fam, w, point(0.3, 0.8), pair))
    assert worst < 1e-6


def test_residual_shrinks_with_horizon():
    fam = make_family("random-cat")
    w = sample_base(bern_spec(), 55, 1)[0]
    x = point(0.2, 0.6)
    res_small = invariance_residual(fam, w, x, finite_time_bundles(fam, w, x, 8))
    res_big = invariance_residual(fam, w, x, finite_time_bundles(fam, w, x, 30))
    assert res_big <= res_small + 1e-12


def test_bundle_rates_deterministic_cat():
    pair = finite_time_bundles(det_cat(), dirac(), point(0.0, 0.0), 30)
    rates = bundle_rates(det_cat(), dirac(), point(0.0, 0.0), pair, 1000)
    assert rates.rate1 == pytest.approx(CAT_RATE, abs=1e-3)
    assert rates.rate2 == pytest.approx(CAT_RATE, abs=1e-3)
    assert rates.c1 > 0 and rates.c2 > 0


def test_bundle_rates_diagonal_exact():
    fam = make_family("diagonal-cocycle", {"a_values": [2.0], "b_values": [0.5]})
    pair = finite_time_bundles(fam, dirac(), point(0.0, 0.0), 10)
    rates = bundle_rates(fam, dirac(), point(0.0, 0.0), pair, 100)
    assert rates.rate1 == pytest.approx(math.log(2), abs=1e-12)
    assert rates.rate2 == pytest.approx(math.log(2), abs=1e-12)


def test_rate2_matches_top_exponent():
    fam = make_family("random-cat")
    w = sample_base(bern_spec(), 71, 1)[0]
    x = point(0.5, 0.1)
    pair = finite_time_bundles(fam, w, x, 50)
    rates = bundle_rates(fam, w, x, pair, 10_000)
    top = top_exponent(fam, unit_tangent(w, x, (0.6, 0.8)), 10_000)
    assert abs(rates.rate2 - top.value) <= 3 * (top.batch_std_err + 1e-4)


def test_rate1_matches_bottom_exponent():
    fam = make_family("random-cat")
    w = sample_base(bern_spec(), 72, 1)[0]
    x = point(0.5, 0.1)
    pair = finite_time_bundles(fam, w, x, 50)
    rates = bundle_rates(fam, w, x, pair, 10_000)
    spectrum = oseledets_spectrum(fam, w, x, 10_000)
    assert rates.rate1 == pytest.approx(-spectrum.exponents[0], abs=0.02)


def test_angle_stays_above_threshold_along_orbit():
    fam = make_family("random-cat")
    w = sample_base(bern_spec(), 91, 1)[0]
    from randhyp.base import base_step
    state = w
    angles = []
    for _ in range(1000):
        pair = finite_time_bundles(fam, state, point(0.0, 0.0), 25)
        angles.append(pair.angle)
        state = base_step(state)
    assert min(angles) > 0.1


def test_certificate_random_cat():
    fam = make_family("random-cat")
    cert = hyperbolicity_certificate(fam, bern_spec(), 13, samples=20,
                                     horizon=50, n=4000)
    assert cert.verdict == "certified"
    assert cert.invariance_residual_max < 1e-6
    assert cert.angle_min > 0.1
    assert cert.lam > 0
    assert all(c1 > 0 and c2 > 0 for (_, c1, c2) in cert.c_samples)
    # bundle constant curves decay toward zero
    assert abs(cert.details["c1_curve"][-1]) < 0.05
    assert abs(cert.details["c2_curve"][-1]) < 0.05


def test_certificate_payload_shape():
    fam = make_family("random-cat")
    cert = hyperbolicity_certificate(fam, bern_spec(), 13, samples=4,
                                     horizon=30, n=500, curve_len=20)
    payload = cert.to_payload()
    assert set(payload) >= {"lambda", "c_samples", "angle_min",
                            "invariance_residual_max", "verdict"}
    rec = cert.details["per_sample"][0]
    assert set(rec) == {"omega", "x", "angle", "residual", "rate1", "rate1_se",
                       "rate2", "rate2_se", "top_exponent", "top_se"}


def test_unsupported_families_rejected():
    with pytest.raises(UnsupportedOperationError):
        finite_time_bundles(make_family("doubling"), dirac(), point(0.1), 10)
    with pytest.raises(UnsupportedOperationError):
        hyperbolicity_certificate(make_family("doubling"), BaseSystemSpec.dirac(),
                                  1, samples=2, horizon=10, n=100)
