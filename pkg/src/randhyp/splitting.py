"""Finite-time Oseledets bundles and hyperbolicity certificates for
invertible linear torus families.

The expanding direction at a base point is the top left-singular direction
of the derivative product over a backward window; the contracting direction
is the most-contracted direction of the forward window.  Both converge
exponentially in the window length.  Contraction rates are measured through
the inverse cocycle (pushing a stable vector forward in float arithmetic
re-aligns it with the expanding direction, so the backward form is the
numerically faithful one; the two agree in exact arithmetic).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .base import base_step, random_point, sample_base
from .cocycle import unit_tangent
from .errors import ContractError, UnsupportedOperationError
from .fibers import LinearTorusFamily, ManifoldPoint
from .lyapunov import _batch_stats, top_exponent

DEFAULT_DEPTH = 50


@dataclass(frozen=True)
class BundlePair:
    gamma1: tuple                # contracting direction (unit)
    gamma2: tuple                # expanding direction (unit)
    horizon: int
    angle: float                 # principal angle, in (0, pi/2]


@dataclass(frozen=True)
class BundleRates:
    rate1: float                 # contraction rate along gamma1 (> 0 expected)
    rate2: float                 # expansion rate along gamma2
    c1: float                    # truncated-infimum constant, inverse cocycle
    c2: float                    # truncated-infimum constant, forward cocycle
    lam: float


@dataclass(frozen=True)
class SplittingCertificate:
    lam: float
    c_samples: tuple             # (omega id, c1, c2)
    angle_min: float
    invariance_residual_max: float
    verdict: str
    details: dict = field(default_factory=dict)

    def to_payload(self):
        return {
            "lambda": self.lam,
            "c_samples": [{"omega": o, "c1": c1, "c2": c2}
                          for (o, c1, c2) in self.c_samples],
            "angle_min": self.angle_min,
            "invariance_residual_max": self.invariance_residual_max,
            "verdict": self.verdict,
            "details": self.details,
        }


def _require_linear_2d(family):
    if not isinstance(family, LinearTorusFamily) or family.manifold_dim != 2:
        raise UnsupportedOperationError(
            "splitting analysis needs an invertible linear torus family")


def _canonical(v):
    v = v / np.linalg.norm(v)
    if v[0] < 0 or (v[0] == 0 and v[1] < 0):
        v = -v
    return v


def finite_time_bundles(family, omega, x, horizon):
    """Expanding/contracting directions from symmetric finite windows.

    gamma2: top left-singular direction of the product over the backward
    window ending at omega.  gamma1: the forward window's most-contracted
    direction.  Directions converge exponentially fast in the horizon.
    """
    _require_linear_2d(family)
    if horizon < 2:
        raise ContractError("horizon must be >= 2")
    back_idx = family.matrix_indices_back(omega, horizon)
    back = np.eye(2)
    for j in back_idx:
        back = back @ family.matrices[j]
        back /= np.abs(back).max()
    u, _, _ = np.linalg.svd(back)
    gamma2 = _canonical(u[:, 0])

    fwd_idx = family.matrix_indices(omega, horizon)
    fwd = np.eye(2)
    for j in fwd_idx:
        fwd = family.matrices[j] @ fwd
        fwd /= np.abs(fwd).max()
    _, _, vh = np.linalg.svd(fwd)
    gamma1 = _canonical(vh[-1])

    dot = abs(float(gamma1 @ gamma2))
    angle = math.acos(min(1.0, dot))
    return BundlePair(gamma1=(float(gamma1[0]), float(gamma1[1])),
                      gamma2=(float(gamma2[0]), float(gamma2[1])),
                      horizon=horizon, angle=angle)


def _sin_angle(u, w):
    u = u / np.linalg.norm(u)
    w = w / np.linalg.norm(w)
    return abs(float(u[0] * w[1] - u[1] * w[0]))


def invariance_residual(family, omega, x, pair):
    """max over both bundles of sin(angle(A gamma_i(w), gamma_i(T w)))."""
    _require_linear_2d(family)
    next_x = ManifoldPoint(family.apply_raw(omega, x.coords))
    nxt = finite_time_bundles(family, base_step(omega), next_x, pair.horizon)
    a = family.matrix(omega)
    r1 = _sin_angle(a @ np.asarray(pair.gamma1), np.asarray(nxt.gamma1))
    r2 = _sin_angle(a @ np.asarray(pair.gamma2), np.asarray(nxt.gamma2))
    return max(r1, r2)


def _push_entries(entries, idx, v):
    """Renormalized per-step log stretches through a matrix sequence."""
    v0, v1 = float(v[0]), float(v[1])
    out = np.empty(len(idx))
    sqrt, log = math.sqrt, math.log
    for i, j in enumerate(idx):
        a00, a01, a10, a11 = entries[j]
        w0 = a00 * v0 + a01 * v1
        w1 = a10 * v0 + a11 * v1
        norm = sqrt(w0 * w0 + w1 * w1)
        out[i] = log(norm)
        v0, v1 = w0 / norm, w1 / norm
    return out


def _push_logs_forward(family, omega, v, n):
    """Per-step log stretches of v under the forward cocycle."""
    return _push_entries(family.entry_tuples(),
                         family.matrix_indices(omega, n), v)


def _push_logs_backward(family, omega, v, n):
    """Per-step log stretches of v under the inverse cocycle (backward)."""
    return _push_entries(family.inverse_entry_tuples(),
                         family.matrix_indices_back(omega, n), v)


def _truncated_log_inf(logs, lam, depth):
    """min over 1 <= k <= depth of (cumulative log stretch - lam k)."""
    depth = min(depth, len(logs))
    csum = np.cumsum(logs[:depth])
    terms = csum - lam * np.arange(1, depth + 1)
    return float(terms.min())


def bundle_rates(family, omega, x, pair, n, lam=None, depth=DEFAULT_DEPTH):
    """Per-bundle rates and truncated-infimum constants.

    rate1 is the forward contraction rate along gamma1, measured via the
    inverse cocycle; rate2 the forward expansion rate along gamma2.  The
    constants certify expansion of each bundle cocycle at rate lam (default
    half the smaller measured rate).
    """
    _require_linear_2d(family)
    if n < 1:
        raise ContractError("n must be >= 1")
    logs2 = _push_logs_forward(family, omega, pair.gamma2, n)
    logs1 = _push_logs_backward(family, omega, pair.gamma1, n)
    rate2 = float(logs2.mean())
    rate1 = float(logs1.mean())
    if lam is None:
        lam = 0.5 * min(rate1, rate2)
    if lam <= 0.0:
        return BundleRates(rate1, rate2, math.nan, math.nan, lam)
    c1 = math.exp(_truncated_log_inf(logs1, lam, depth))
    c2 = math.exp(_truncated_log_inf(logs2, lam, depth))
    return BundleRates(rate1, rate2, c1, c2, lam)


def _bundle_constant_curve(family, omega, x, lam, curve_len, horizon, depth):
    """(1/k) log C_i(T^k w) for both bundle constants along the orbit."""
    vals1 = np.empty(curve_len)
    vals2 = np.empty(curve_len)
    state = base_step(omega)
    cur_x = ManifoldPoint(family.apply_raw(omega, x.coords))
    for k in range(1, curve_len + 1):
        pair = finite_time_bundles(family, state, cur_x, horizon)
        logs2 = _push_logs_forward(family, state, pair.gamma2, depth)
        logs1 = _push_logs_backward(family, state, pair.gamma1, depth)
        vals1[k - 1] = _truncated_log_inf(logs1, lam, depth) / k
        vals2[k - 1] = _truncated_log_inf(logs2, lam, depth) / k
        cur_x = ManifoldPoint(family.apply_raw(state, cur_x.coords))
        state = base_step(state)
    return vals1, vals2


def hyperbolicity_certificate(family, spec, seed, samples, horizon, n,
                              depth=DEFAULT_DEPTH, curve_len=200,
                              batches=20, threads=1):
    """Aggregate splitting evidence over sampled base points.

    Per sample: finite-time bundles, principal angle, invariance residual,
    per-bundle rates with batch standard errors, an independent top-exponent
    estimate, and tempered constants at the global rate lam (half the worst
    measured rate).  Certified requires residuals below 1e-6, positive
    angles, and all rates at or above lam.
    """
    _require_linear_2d(family)
    omegas = sample_base(spec, seed, samples)

    def one(i):
        omega = omegas[i]
        x = ManifoldPoint(random_point(seed, i, 2))
        pair = finite_time_bundles(family, omega, x, horizon)
        residual = invariance_residual(family, omega, x, pair)
        logs2 = _push_logs_forward(family, omega, pair.gamma2, n)
        logs1 = _push_logs_backward(family, omega, pair.gamma1, n)
        rate2, rate2_se, _ = _batch_stats(logs2, batches)
        rate1, rate1_se, _ = _batch_stats(logs1, batches)
        v = np.asarray(random_point(seed, samples + i, 2)) - 0.5
        if np.linalg.norm(v) < 1e-9:
            v = np.array([1.0, 0.0])
        top = top_exponent(family, unit_tangent(omega, x, v), n, batches)
        return {
            "omega": omega.describe(), "x": list(x.coords), "pair": pair,
            "angle": pair.angle, "residual": residual,
            "rate1": rate1, "rate1_se": rate1_se,
            "rate2": rate2, "rate2_se": rate2_se,
            "top_exponent": top.value, "top_se": top.batch_std_err,
            "logs1": logs1[:depth], "logs2": logs2[:depth],
        }

    from ._parallel import deterministic_map
    recs = deterministic_map(one, range(samples), threads)

    angle_min = min(r["angle"] for r in recs)
    residual_max = max(r["residual"] for r in recs)
    min_rate = min(min(r["rate1"], r["rate2"]) for r in recs)
    lam = 0.5 * min_rate

    details = {"horizon": horizon, "n": n, "samples": samples,
               "rate1_mean": float(np.mean([r["rate1"] for r in recs])),
               "rate2_mean": float(np.mean([r["rate2"] for r in recs]))}
    per_sample = []
    c_samples = []
    for r in recs:
        if lam > 0.0:
            c1 = math.exp(_truncated_log_inf(r["logs1"], lam, depth))
            c2 = math.exp(_truncated_log_inf(r["logs2"], lam, depth))
        else:
            c1 = c2 = math.nan
        c_samples.append((r["omega"], c1, c2))
        per_sample.append({k: r[k] for k in
                           ("omega", "x", "angle", "residual", "rate1",
                            "rate1_se", "rate2", "rate2_se", "top_exponent",
                            "top_se")})
    details["per_sample"] = per_sample

    if lam > 0.0:
        x0 = ManifoldPoint(random_point(seed, 0, 2))
        vals1, vals2 = _bundle_constant_curve(family, omegas[0], x0, lam,
                                              curve_len, horizon, depth)
        details["c1_curve"] = [float(v) for v in vals1]
        details["c2_curve"] = [float(v) for v in vals2]

    certified = (lam > 0.0 and residual_max < 1e-6 and angle_min > 0.0
                 and min_rate >= lam)
    verdict = "certified" if certified else "inconclusive"
    return SplittingCertificate(lam=lam, c_samples=tuple(c_samples),
                                angle_min=angle_min,
                                invariance_residual_max=residual_max,
                                verdict=verdict, details=details)
