"""Ergodic base systems: two-sided Bernoulli and Markov shifts, circle
rotations, and the trivial one-point base.

A base state is a point of the driving system together with the shift map
and its inverse.  Symbol sequences are realized lazily from a counter-based
hash keyed by (seed, absolute position), so stepping backwards needs no
stored history and every symbol is a pure function of (seed, position).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (ConfigurationError, ContractError,
                     UnsupportedOperationError, WindowLimitError)

# Positions a single state may address on either side of its origin.
WINDOW_LIMIT = 1_000_000

# Stream tags keep independent random uses (symbols, angles, sub-seeds,
# manifold points) from colliding on the same hash counter.
STREAM_SYMBOL = 0x53594D42
STREAM_ANGLE = 0x414E474C
STREAM_SAMPLE = 0x53554253
STREAM_POINT = 0x504F494E

_U64 = np.uint64
_SHIFT_30 = _U64(30)
_SHIFT_27 = _U64(27)
_SHIFT_31 = _U64(31)
_SHIFT_11 = _U64(11)
_C1 = _U64(0x9E3779B97F4A7C15)
_C2 = _U64(0xBF58476D1CE4E5B9)
_C3 = _U64(0x94D049BB133111EB)
_TO_UNIT = 2.0 ** -53


def _mix64(z):
    """SplitMix64 finalizer on uint64 scalars or arrays (wraps mod 2^64)."""
    z = z + _C1
    z = (z ^ (z >> _SHIFT_30)) * _C2
    z = (z ^ (z >> _SHIFT_27)) * _C3
    return z ^ (z >> _SHIFT_31)


def _uniforms(seed, stream, positions):
    """Deterministic uniforms in [0,1) for an int64 array of positions."""
    ks = np.asarray(positions, dtype=np.int64).view(_U64)
    with np.errstate(over="ignore"):
        h = _mix64(_mix64(_U64(seed & 0xFFFFFFFFFFFFFFFF) ^ _U64(stream)) + _mix64(ks))
    return (h >> _SHIFT_11).astype(np.float64) * _TO_UNIT


def _uniform(seed, stream, position):
    return float(_uniforms(seed, stream, [position])[0])


def derive_seed(seed, stream, index):
    """Child seed for sample `index`, independent across indices."""
    with np.errstate(over="ignore"):
        h = _mix64(_mix64(_U64(seed & 0xFFFFFFFFFFFFFFFF) ^ _U64(stream)) + _U64(index & 0xFFFFFFFFFFFFFFFF))
    return int(h)


def _stationary_distribution(transition):
    """Left fixed vector of a stochastic matrix, normalized to sum 1."""
    p = np.asarray(transition, dtype=np.float64)
    n = p.shape[0]
    a = np.vstack([p.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    return np.clip(pi, 0.0, None) / np.sum(np.clip(pi, 0.0, None))


def _is_irreducible(transition):
    p = np.asarray(transition) > 0.0
    n = p.shape[0]
    reach = np.eye(n, dtype=bool) | p
    for _ in range(n):
        reach = reach | (reach @ reach)
    return bool(reach.all())


@dataclass(frozen=True)
class BaseSystemSpec:
    """Description of one driving system.

    kind is one of "bernoulli", "markov", "rotation", "dirac".  Bernoulli
    carries a probability vector, Markov a stochastic transition matrix
    (must be irreducible), rotation a rotation number in (0,1) whose
    irrationality is the caller's responsibility (not checkable at runtime).
    """

    kind: str
    alphabet_size: int = 1
    probabilities: tuple = None
    transition: tuple = None
    rotation_number: float = None
    stationary: tuple = field(default=None, compare=False)

    def __post_init__(self):
        errors = self.validation_errors()
        if errors:
            raise ConfigurationError(errors)
        if self.kind == "markov" and self.stationary is None:
            pi = _stationary_distribution(self.transition)
            object.__setattr__(self, "stationary", tuple(float(v) for v in pi))
        if self.kind == "bernoulli" and self.stationary is None:
            object.__setattr__(self, "stationary", tuple(self.probabilities))

    def validation_errors(self):
        errs = []
        if self.kind not in ("bernoulli", "markov", "rotation", "dirac"):
            return [f"unknown base kind {self.kind!r}"]
        if self.kind == "bernoulli":
            p = self.probabilities
            if p is None or len(p) != self.alphabet_size:
                errs.append("probabilities must have length alphabet_size")
            else:
                if any(v < 0 for v in p):
                    errs.append("probabilities must be nonnegative")
                if abs(sum(p) - 1.0) > 1e-12:
                    errs.append("probabilities must sum to 1 within 1e-12")
        elif self.kind == "markov":
            t = self.transition
            if t is None or len(t) != self.alphabet_size or any(len(r) != self.alphabet_size for r in t):
                errs.append("transition must be a square alphabet_size matrix")
            else:
                for i, row in enumerate(t):
                    if any(v < 0 for v in row):
                        errs.append(f"transition row {i} has negative entries")
                    if abs(sum(row) - 1.0) > 1e-12:
                        errs.append(f"transition row {i} must sum to 1 within 1e-12")
                if not errs and not _is_irreducible(t):
                    errs.append("transition matrix must be irreducible")
        elif self.kind == "rotation":
            r = self.rotation_number
            if r is None or not (0.0 < r < 1.0):
                errs.append("rotation_number must lie in (0, 1)")
        return errs

    @staticmethod
    def bernoulli(probabilities):
        p = tuple(float(v) for v in probabilities)
        return BaseSystemSpec(kind="bernoulli", alphabet_size=len(p), probabilities=p)

    @staticmethod
    def markov(transition):
        t = tuple(tuple(float(v) for v in row) for row in transition)
        return BaseSystemSpec(kind="markov", alphabet_size=len(t), transition=t)

    @staticmethod
    def rotation(rotation_number):
        return BaseSystemSpec(kind="rotation", rotation_number=float(rotation_number))

    @staticmethod
    def dirac():
        return BaseSystemSpec(kind="dirac")

    def to_json_dict(self):
        out = {"kind": self.kind, "alphabet_size": self.alphabet_size}
        if self.probabilities is not None:
            out["probabilities"] = list(self.probabilities)
        if self.transition is not None:
            out["transition"] = [list(r) for r in self.transition]
        if self.rotation_number is not None:
            out["rotation_number"] = self.rotation_number
        return out


class _BernoulliSource:
    """Symbols i.i.d. per position; pure formula, no state needed."""

    def __init__(self, seed, probabilities):
        self.seed = seed
        self.cdf = np.cumsum(np.asarray(probabilities, dtype=np.float64))

    def symbol(self, k):
        u = _uniform(self.seed, STREAM_SYMBOL, k)
        return int(np.searchsorted(self.cdf, u, side="right"))

    def window(self, lo, hi):
        us = _uniforms(self.seed, STREAM_SYMBOL, np.arange(lo, hi, dtype=np.int64))
        return np.searchsorted(self.cdf, us, side="right").astype(np.int64)


class _MarkovSource:
    """Stationary two-sided Markov chain.

    Position 0 is drawn from the stationary vector; positions k > 0 follow
    the forward transition matrix and k < 0 the time-reversed matrix, so the
    two-sided law is the stationary chain.  The memo fill is idempotent,
    which keeps concurrent readers consistent.
    """

    def __init__(self, seed, transition, stationary):
        self.seed = seed
        self.fwd_cdf = np.cumsum(np.asarray(transition, dtype=np.float64), axis=1)
        pi = np.asarray(stationary, dtype=np.float64)
        p = np.asarray(transition, dtype=np.float64)
        rev = (p.T * pi[None, :]) / pi[:, None]
        rev = rev / rev.sum(axis=1, keepdims=True)
        self.rev_cdf = np.cumsum(rev, axis=1)
        self.pi_cdf = np.cumsum(pi)
        self.memo = {}

    def _draw(self, cdf_row, k):
        u = _uniform(self.seed, STREAM_SYMBOL, k)
        return int(np.searchsorted(cdf_row, u, side="right"))

    def symbol(self, k):
        memo = self.memo
        if k in memo:
            return memo[k]
        if 0 not in memo:
            memo[0] = self._draw(self.pi_cdf, 0)
        if k > 0:
            lo = k
            while lo - 1 not in memo:
                lo -= 1
            for j in range(lo, k + 1):
                memo[j] = self._draw(self.fwd_cdf[memo[j - 1]], j)
        elif k < 0:
            hi = k
            while hi + 1 not in memo:
                hi += 1
            for j in range(hi, k - 1, -1):
                memo[j] = self._draw(self.rev_cdf[memo[j + 1]], j)
        return memo[k]

    def window(self, lo, hi):
        self.symbol(lo)
        self.symbol(hi - 1)
        return np.array([self.symbol(k) for k in range(lo, hi)], dtype=np.int64)


class _ConstantSource:
    """One-point base and degenerate single-letter alphabets."""

    def symbol(self, k):
        return 0

    def window(self, lo, hi):
        return np.zeros(hi - lo, dtype=np.int64)


class _PeriodicSource:
    """Explicit periodic word, used by the periodic-orbit enumerator."""

    def __init__(self, word):
        self.word = tuple(int(s) for s in word)

    def symbol(self, k):
        return self.word[k % len(self.word)]

    def window(self, lo, hi):
        return np.array([self.symbol(k) for k in range(lo, hi)], dtype=np.int64)


class BaseState:
    """A point of the driving system.

    Immutable except for the shared symbol memo, whose fills are idempotent;
    states may be shared between threads.  Shifted copies share the
    underlying source, so queries agree across the whole orbit.
    """

    __slots__ = ("spec", "seed", "origin_offset", "_source", "_angle0")

    def __init__(self, spec, seed, origin_offset=0, source=None, angle0=0.0):
        self.spec = spec
        self.seed = seed
        self.origin_offset = origin_offset
        self._angle0 = angle0
        if source is not None:
            self._source = source
        elif spec.kind == "bernoulli":
            if spec.alphabet_size == 1:
                self._source = _ConstantSource()
            else:
                self._source = _BernoulliSource(seed, spec.probabilities)
        elif spec.kind == "markov":
            self._source = _MarkovSource(seed, spec.transition, spec.stationary)
        elif spec.kind == "dirac":
            self._source = _ConstantSource()
        else:
            self._source = None

    @property
    def kind(self):
        return self.spec.kind

    @property
    def angle(self):
        """Current angle of a rotation state (recomputed, hence exactly invertible)."""
        if self.spec.kind != "rotation":
            raise UnsupportedOperationError("angle is defined for rotation bases only")
        return (self._angle0 + self.origin_offset * self.spec.rotation_number) % 1.0

    def _shifted(self, delta):
        return BaseState(self.spec, self.seed, self.origin_offset + delta,
                         source=self._source, angle0=self._angle0)

    def describe(self):
        if self.spec.kind == "rotation":
            return f"rotation:{self.seed}@{self.origin_offset}"
        return f"{self.spec.kind}:{self.seed}@{self.origin_offset}"

    def __repr__(self):
        return f"BaseState({self.describe()})"

    def __eq__(self, other):
        if not isinstance(other, BaseState):
            return NotImplemented
        return (self.spec == other.spec and self.seed == other.seed
                and self.origin_offset == other.origin_offset
                and self._angle0 == other._angle0
                and self._source is other._source)

    def __hash__(self):
        return hash((self.spec, self.seed, self.origin_offset, self._angle0, id(self._source)))


def base_step(state):
    """One application of the shift (rotation adds the rotation number mod 1)."""
    if state.spec.kind == "dirac":
        return state
    return state._shifted(+1)


def base_inverse_step(state):
    """Inverse shift; base_step(base_inverse_step(w)) observes identically to w."""
    if state.spec.kind == "dirac":
        return state
    return state._shifted(-1)


def shift_by(state, n):
    """n-fold shift (negative n steps backwards)."""
    if state.spec.kind == "dirac" or n == 0:
        return state
    return state._shifted(n)


def symbol_at(state, k):
    """Symbol at signed position k relative to the state's current origin."""
    if state._source is None:
        raise UnsupportedOperationError("rotation bases carry an angle, not symbols")
    pos = state.origin_offset + k
    if abs(pos) > WINDOW_LIMIT:
        raise WindowLimitError(
            f"position {pos} exceeds the supported window of +/-{WINDOW_LIMIT}")
    return state._source.symbol(pos)


def symbol_window(state, lo, hi):
    """Symbols at positions lo..hi-1 (relative), as an int64 array."""
    if state._source is None:
        raise UnsupportedOperationError("rotation bases carry an angle, not symbols")
    a, b = state.origin_offset + lo, state.origin_offset + hi
    if max(abs(a), abs(b)) > WINDOW_LIMIT:
        raise WindowLimitError("requested window exceeds the supported position range")
    return state._source.window(a, b)


def sample_base(spec, seed, count):
    """count independent states distributed per the base measure.

    Deterministic in (spec, seed); sample i uses the derived child seed, so
    sampling is independent of call order and thread scheduling.
    """
    if count < 1:
        raise ContractError("count must be >= 1")
    if spec.kind == "dirac":
        state = BaseState(spec, seed)
        return [state] * count
    out = []
    for i in range(count):
        sub = derive_seed(seed, STREAM_SAMPLE, i)
        if spec.kind == "rotation":
            angle0 = _uniform(sub, STREAM_ANGLE, 0)
            out.append(BaseState(spec, sub, 0, angle0=angle0))
        else:
            out.append(BaseState(spec, sub, 0))
    return out


def periodic_state(alphabet_size, word):
    """State of a full shift whose symbol sequence is the repeated word."""
    word = tuple(int(s) for s in word)
    if not word or any(not (0 <= s < alphabet_size) for s in word):
        raise ConfigurationError("word symbols must lie in the alphabet")
    p = [0.0] * alphabet_size
    for s in set(word):
        p[s] = 1.0 / len(set(word))
    # spec probabilities are irrelevant for a periodic source; uniform placeholder
    spec = BaseSystemSpec(kind="bernoulli", alphabet_size=alphabet_size,
                          probabilities=tuple(1.0 / alphabet_size for _ in range(alphabet_size)))
    return BaseState(spec, seed=0, origin_offset=0, source=_PeriodicSource(word))


def random_point(seed, index, dim):
    """Deterministic point of the unit cube, for seeding fiber orbits."""
    coords = _uniforms(seed, STREAM_POINT, np.arange(index * dim, (index + 1) * dim))
    return tuple(float(c) for c in coords)
