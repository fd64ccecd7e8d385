"""Fiber map families on the circle and the 2-torus.

Each family maps a base state to a concrete map with an exact analytic
Jacobian and certified global derivative bounds.  Parameters depend on the
base state only through the symbol at position 0 (or the rotation angle),
so measurability in the base variable is immediate.

Catalog:
  doubling            x -> 2x mod 1 (deterministic)
  perturbed-doubling  x -> 2x + eps(w) sin(2 pi x) mod 1, eps(w) in [0, eps_max]
  bernoulli-linear    x -> d(w) x mod 1, d(w) from a finite multiplier set
  diagonal-cocycle    torus map with matrix diag(a(w), b(w))
  random-cat          torus map with a unimodular integer matrix per symbol
"""

import math
from dataclasses import dataclass

import numpy as np

from .base import symbol_at, symbol_window
from .errors import ConfigurationError, ContractError, UnsupportedOperationError

_TWO_PI = 2.0 * math.pi
_SEAM_SNAP = 1e-15


def mod1(x):
    """Reduce to [0,1); values within 1e-15 of the seam snap to 0."""
    y = x - math.floor(x)
    if y >= 1.0 - _SEAM_SNAP:
        return 0.0
    return y


def mod1_array(x):
    y = x - np.floor(x)
    y[y >= 1.0 - _SEAM_SNAP] = 0.0
    return y


@dataclass(frozen=True)
class ManifoldPoint:
    """Point of the flat circle (dim 1) or 2-torus, coordinates in [0,1)."""

    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(mod1(float(c)) for c in self.coords))

    @property
    def dim(self):
        return len(self.coords)

    @property
    def x(self):
        return self.coords[0]


def point(*coords):
    if isinstance(coords[0], (tuple, list, np.ndarray)) and len(coords) == 1:
        coords = tuple(coords[0])
    return ManifoldPoint(tuple(float(c) for c in coords))


def _choice_index(omega, n_choices):
    """Discrete parameter choice driven by the base state."""
    if n_choices == 1:
        return 0
    if omega.kind == "rotation":
        return int(omega.angle * n_choices) % n_choices
    if omega.kind == "dirac":
        return 0
    return symbol_at(omega, 0) % n_choices


def _choice_indices(omega, n, n_choices):
    """Choice index along the forward orbit w, Tw, ..., T^{n-1}w."""
    if n_choices == 1:
        return np.zeros(n, dtype=np.int64)
    if omega.kind == "dirac":
        return np.zeros(n, dtype=np.int64)
    if omega.kind == "rotation":
        rho = omega.spec.rotation_number
        angles = (omega.angle + rho * np.arange(n)) % 1.0
        return (angles * n_choices).astype(np.int64) % n_choices
    return symbol_window(omega, 0, n) % n_choices


def _choice_indices_back(omega, n, n_choices):
    """Choice index along the backward orbit T^{-1}w, ..., T^{-n}w."""
    if n_choices == 1 or omega.kind == "dirac":
        return np.zeros(n, dtype=np.int64)
    if omega.kind == "rotation":
        rho = omega.spec.rotation_number
        angles = (omega.angle - rho * np.arange(1, n + 1)) % 1.0
        return (angles * n_choices).astype(np.int64) % n_choices
    return symbol_window(omega, -n, 0)[::-1] % n_choices


def _drive01(omega):
    """Continuous driving value in [0,1], read from the base state."""
    if omega.kind == "rotation":
        return omega.angle
    a = omega.spec.alphabet_size
    if omega.kind == "dirac" or a <= 1:
        return 0.0
    return symbol_at(omega, 0) / (a - 1)


def _drives01(omega, n):
    if omega.kind == "rotation":
        rho = omega.spec.rotation_number
        return (omega.angle + rho * np.arange(n)) % 1.0
    a = omega.spec.alphabet_size
    if omega.kind == "dirac" or a <= 1:
        return np.zeros(n)
    return symbol_window(omega, 0, n).astype(np.float64) / (a - 1)


class FiberFamily:
    """Common surface of all catalog families.

    Families are immutable; every operation is pure.  `linear` means the
    derivative does not depend on the manifold point, in which case all
    minimizations over the fiber are exact and need no grid.
    """

    family_id = None
    manifold_dim = 1
    invertible = False
    expanding = False
    linear = False

    # -- analytic bounds ---------------------------------------------------
    sup_dphi = None            # global bound on |D phi|
    sup_dphi_inv = None        # global bound on |D phi^{-1}|
    log_deriv_lipschitz = 0.0  # Lipschitz constant of x -> log|D_x phi (v)|

    def params(self):
        return {}

    def describe(self):
        return {"family": self.family_id, "params": self.params()}

    # Point-level operations; raw coordinate tuples keep hot loops cheap.
    def apply_raw(self, omega, coords):
        raise NotImplementedError

    def jacobian_raw(self, omega, coords):
        """Jacobian as a tuple of rows."""
        raise NotImplementedError

    def inverse_raw(self, omega, coords):
        raise UnsupportedOperationError(
            f"{self.family_id} is a covering map; no global inverse exists")


class CircleFamily(FiberFamily):
    """Scalar fiber maps of the circle."""

    manifold_dim = 1

    def deriv1(self, omega, x):
        raise NotImplementedError

    def apply1(self, omega, x):
        raise NotImplementedError

    def lift1(self, omega, x):
        """Monotone lift to the real line (used by the orbit solver)."""
        raise NotImplementedError

    def degree(self, omega):
        raise NotImplementedError

    # vectorized over a grid of points, one base step at a time
    def apply_vec(self, omega, xs):
        raise NotImplementedError

    def deriv_vec(self, omega, xs):
        raise NotImplementedError

    def apply_raw(self, omega, coords):
        return (self.apply1(omega, coords[0]),)

    def jacobian_raw(self, omega, coords):
        return ((self.deriv1(omega, coords[0]),),)


class Doubling(CircleFamily):
    """Angle doubling; constant derivative 2, pairs with the one-point base."""

    family_id = "doubling"
    expanding = True
    linear = True
    sup_dphi = 2.0
    sup_dphi_inv = 0.5
    log_deriv_lipschitz = 0.0

    def apply1(self, omega, x):
        return mod1(2.0 * x)

    def deriv1(self, omega, x):
        return 2.0

    def lift1(self, omega, x):
        return 2.0 * x

    def lift_vec(self, omega, xs):
        return 2.0 * xs

    def degree(self, omega):
        return 2

    def apply_vec(self, omega, xs):
        return mod1_array(2.0 * xs)

    def deriv_vec(self, omega, xs):
        return np.full_like(xs, 2.0)

    def step_log_derivs(self, omega, n):
        """log|D phi| along the orbit of the base (x-independent)."""
        return np.full(n, math.log(2.0))

    def step_derivs(self, omega, n):
        return np.full(n, 2.0)


class PerturbedDoubling(CircleFamily):
    """x -> 2x + eps(w) sin(2 pi x), eps(w) = eps_max * drive(w).

    eps_max < 1/(2 pi) keeps every realization an expanding local
    diffeomorphism.  The log-derivative Lipschitz bound is the conservative
    envelope 4 pi^2 eps_max / (2 - 2 pi eps_max), sound for all w.
    """

    family_id = "perturbed-doubling"
    expanding = True
    linear = False

    def __init__(self, eps_max):
        if not (0.0 <= eps_max < 1.0 / _TWO_PI):
            raise ConfigurationError(
                f"eps_max must lie in [0, 1/(2 pi)) to stay expanding, got {eps_max}")
        self.eps_max = float(eps_max)
        self.sup_dphi = 2.0 + _TWO_PI * self.eps_max
        self.sup_dphi_inv = 1.0 / (2.0 - _TWO_PI * self.eps_max)
        self.log_deriv_lipschitz = (4.0 * math.pi ** 2 * self.eps_max
                                    / (2.0 - _TWO_PI * self.eps_max))

    def params(self):
        return {"eps_max": self.eps_max}

    def _eps(self, omega):
        return self.eps_max * _drive01(omega)

    def apply1(self, omega, x):
        return mod1(2.0 * x + self._eps(omega) * math.sin(_TWO_PI * x))

    def deriv1(self, omega, x):
        return 2.0 + _TWO_PI * self._eps(omega) * math.cos(_TWO_PI * x)

    def lift1(self, omega, x):
        return 2.0 * x + self._eps(omega) * math.sin(_TWO_PI * x)

    def lift_vec(self, omega, xs):
        return 2.0 * xs + self._eps(omega) * np.sin(_TWO_PI * xs)

    def degree(self, omega):
        return 2

    def apply_vec(self, omega, xs):
        return mod1_array(2.0 * xs + self._eps(omega) * np.sin(_TWO_PI * xs))

    def deriv_vec(self, omega, xs):
        return 2.0 + _TWO_PI * self._eps(omega) * np.cos(_TWO_PI * xs)

    def orbit_log_derivs(self, omega, x0, n):
        """Per-step log derivatives along one orbit, drive values hoisted."""
        eps = self.eps_max * _drives01(omega, n)
        out = np.empty(n)
        x = float(x0)
        sin, cos, log = math.sin, math.cos, math.log
        for i in range(n):
            e = eps[i]
            c = _TWO_PI * x
            out[i] = log(2.0 + _TWO_PI * e * cos(c))
            x = (2.0 * x + e * sin(c)) % 1.0
        return out


class BernoulliLinear(CircleFamily):
    """x -> d(w) x mod 1 with the multiplier chosen by the symbol at 0.

    Integer multipliers > 1 are genuine expanding circle maps; arbitrary
    positive values are accepted for rate (cocycle) experiments where only
    the derivative matters.
    """

    family_id = "bernoulli-linear"
    linear = True

    def __init__(self, values=(2.0, 3.0)):
        vals = tuple(float(v) for v in values)
        if not vals or any(v <= 0 for v in vals):
            raise ConfigurationError("multipliers must be positive")
        self.values = vals
        self.expanding = min(vals) > 1.0
        self.sup_dphi = max(vals)
        self.sup_dphi_inv = 1.0 / min(vals)
        self.log_deriv_lipschitz = 0.0
        self._log_values = np.log(np.asarray(vals))

    def params(self):
        return {"values": list(self.values)}

    def _d(self, omega):
        return self.values[_choice_index(omega, len(self.values))]

    def apply1(self, omega, x):
        return mod1(self._d(omega) * x)

    def deriv1(self, omega, x):
        return self._d(omega)

    def lift1(self, omega, x):
        return self._d(omega) * x

    def lift_vec(self, omega, xs):
        return self._d(omega) * xs

    def degree(self, omega):
        d = self._d(omega)
        if d != int(d):
            raise UnsupportedOperationError(
                "periodic-orbit search needs integer multipliers")
        return int(d)

    def apply_vec(self, omega, xs):
        return mod1_array(self._d(omega) * xs)

    def deriv_vec(self, omega, xs):
        return np.full_like(xs, self._d(omega))

    def step_log_derivs(self, omega, n):
        idx = _choice_indices(omega, n, len(self.values))
        return self._log_values[idx]

    def step_derivs(self, omega, n):
        idx = _choice_indices(omega, n, len(self.values))
        return np.asarray(self.values)[idx]


class LinearTorusFamily(FiberFamily):
    """Torus maps x -> A(w) x mod 1 with the matrix chosen by the symbol.

    The derivative is the constant matrix A(w), so fiber minimizations are
    exact singular-value computations.  Point-level inversion is supported
    exactly when every matrix is an integer unimodular matrix (a torus
    automorphism).
    """

    manifold_dim = 2
    linear = True

    def __init__(self, matrices):
        mats = [np.asarray(m, dtype=np.float64).reshape(2, 2) for m in matrices]
        if not mats:
            raise ConfigurationError("at least one matrix is required")
        for m in mats:
            if abs(np.linalg.det(m)) < 1e-14:
                raise ConfigurationError("matrices must be nonsingular")
        self.matrices = tuple(m.copy() for m in mats)
        for m in self.matrices:
            m.setflags(write=False)
        self._inverses = tuple(np.linalg.inv(m) for m in mats)
        svals = [np.linalg.svd(m, compute_uv=False) for m in mats]
        self.sup_dphi = max(float(s[0]) for s in svals)
        self.sup_dphi_inv = max(1.0 / float(s[-1]) for s in svals)
        self.log_deriv_lipschitz = 0.0
        self.expanding = min(float(s[-1]) for s in svals) > 1.0
        self.invertible = all(
            np.allclose(m, np.round(m)) and abs(abs(np.linalg.det(m)) - 1.0) < 1e-12
            for m in mats)

    def matrix(self, omega):
        return self.matrices[_choice_index(omega, len(self.matrices))]

    def matrix_index(self, omega):
        return _choice_index(omega, len(self.matrices))

    def matrix_indices(self, omega, n):
        return _choice_indices(omega, n, len(self.matrices))

    def matrix_indices_back(self, omega, n):
        return _choice_indices_back(omega, n, len(self.matrices))

    def entry_tuples(self):
        """Matrix entries as plain float tuples, for tight scalar loops."""
        return tuple((float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]))
                     for m in self.matrices)

    def inverse_entry_tuples(self):
        return tuple((float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]))
                     for m in self._inverses)

    def apply_raw(self, omega, coords):
        a = self.matrix(omega)
        x0, x1 = coords
        return (mod1(a[0, 0] * x0 + a[0, 1] * x1),
                mod1(a[1, 0] * x0 + a[1, 1] * x1))

    def jacobian_raw(self, omega, coords):
        a = self.matrix(omega)
        return ((a[0, 0], a[0, 1]), (a[1, 0], a[1, 1]))

    def inverse_raw(self, omega, coords):
        if not self.invertible:
            raise UnsupportedOperationError(
                f"{self.family_id} matrices are not torus automorphisms")
        inv = self._inverses[_choice_index(omega, len(self.matrices))]
        x0, x1 = coords
        return (mod1(inv[0, 0] * x0 + inv[0, 1] * x1),
                mod1(inv[1, 0] * x0 + inv[1, 1] * x1))


class DiagonalCocycle(LinearTorusFamily):
    """Matrices diag(a(w), b(w)); axes stay invariant."""

    family_id = "diagonal-cocycle"

    def __init__(self, a_values=(2.0,), b_values=(3.0,)):
        a_vals = tuple(float(v) for v in a_values)
        b_vals = tuple(float(v) for v in b_values)
        if len(a_vals) != len(b_vals):
            raise ConfigurationError("a_values and b_values must have equal length")
        if any(v <= 0 for v in a_vals + b_vals):
            raise ConfigurationError("diagonal entries must be positive")
        super().__init__([np.diag([a, b]) for a, b in zip(a_vals, b_vals)])
        self.a_values = a_vals
        self.b_values = b_vals
        # singular values of diagonal matrices are the entries themselves
        self.sup_dphi = max(a_vals + b_vals)
        self.sup_dphi_inv = 1.0 / min(a_vals + b_vals)
        self.expanding = min(a_vals + b_vals) > 1.0

    def params(self):
        return {"a_values": list(self.a_values), "b_values": list(self.b_values)}


class RandomCat(LinearTorusFamily):
    """Hyperbolic unimodular integer matrices chosen per symbol."""

    family_id = "random-cat"

    DEFAULT = (((2, 1), (1, 1)), ((3, 1), (2, 1)))

    def __init__(self, matrices=DEFAULT):
        super().__init__(matrices)
        if not self.invertible:
            raise ConfigurationError("random-cat matrices must be integer with |det| = 1")

    def params(self):
        return {"matrices": [[[float(v) for v in row] for row in m] for m in self.matrices]}


def _wrap_cocycle_matrix(entries, n):
    from .cocycle import CocycleMatrix
    return CocycleMatrix(np.asarray(entries, dtype=np.float64), n)


def fiber_apply(family, omega, x):
    """phi_w(x), coordinates reduced mod 1."""
    if x.dim != family.manifold_dim:
        raise ContractError(
            f"point has dim {x.dim}, family {family.family_id} needs {family.manifold_dim}")
    return ManifoldPoint(family.apply_raw(omega, x.coords))


def fiber_derivative(family, omega, x):
    """Exact Jacobian D_x phi_w as a one-step cocycle matrix."""
    if x.dim != family.manifold_dim:
        raise ContractError(
            f"point has dim {x.dim}, family {family.family_id} needs {family.manifold_dim}")
    return _wrap_cocycle_matrix(family.jacobian_raw(omega, x.coords), 1)


def fiber_inverse(family, omega, x):
    """phi_w^{-1}(x); only diffeomorphic families support this."""
    if not family.invertible:
        raise UnsupportedOperationError(
            f"{family.family_id} is not invertible on the fiber")
    if x.dim != family.manifold_dim:
        raise ContractError("dimension mismatch")
    return ManifoldPoint(family.inverse_raw(omega, x.coords))


def derivative_bounds(family):
    """Certified global bounds (sup |Dphi|, sup |Dphi^-1|, log-derivative Lipschitz)."""
    return (family.sup_dphi, family.sup_dphi_inv, family.log_deriv_lipschitz)


FAMILY_CATALOG = {
    "doubling": lambda params: Doubling(),
    "perturbed-doubling": lambda params: PerturbedDoubling(
        eps_max=params.get("eps_max", 0.1)),
    "bernoulli-linear": lambda params: BernoulliLinear(
        values=params.get("values", (2.0, 3.0))),
    "diagonal-cocycle": lambda params: DiagonalCocycle(
        a_values=params.get("a_values", (2.0,)),
        b_values=params.get("b_values", (3.0,))),
    "random-cat": lambda params: RandomCat(
        matrices=params.get("matrices", RandomCat.DEFAULT)),
}


def make_family(name, params=None):
    if name not in FAMILY_CATALOG:
        raise ConfigurationError(
            f"unknown family {name!r}; catalog: {sorted(FAMILY_CATALOG)}")
    return FAMILY_CATALOG[name](params or {})
