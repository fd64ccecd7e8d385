"""
Driving systems: shifts, rotations, and the one-point base
===========================================================

Every experiment in randhyp sits over a driving system: a seed-deterministic
point of a Bernoulli or Markov shift, a circle rotation, or the trivial
one-point base.  Symbols are realized lazily from a counter-based hash, so a
state can be shifted backwards and forwards at will and every position is a
pure function of (seed, position).
"""

import numpy as np

from randhyp import (BaseSystemSpec, base_inverse_step, base_step, sample_base,
                     symbol_at)

# A two-sided fair coin flip sequence.
spec = BaseSystemSpec.bernoulli([0.5, 0.5])
w = sample_base(spec, seed=7, count=1)[0]

print("symbols around the origin:", [symbol_at(w, k) for k in range(-8, 9)])

# Shifting moves the origin; the sequence itself never changes.
fw = base_step(w)
print("after one shift:          ", [symbol_at(fw, k) for k in range(-8, 9)])
back = base_inverse_step(fw)
print("round trip restores it:   ",
      all(symbol_at(back, k) == symbol_at(w, k) for k in range(-100, 101)))

# A Markov chain with a sticky first state.  Backward positions are drawn
# from the time-reversed chain, so the two-sided law is stationary.
markov = BaseSystemSpec.markov([[0.9, 0.1], [0.4, 0.6]])
print("\nMarkov stationary vector:", markov.stationary)
states = sample_base(markov, seed=3, count=5000)
freq0 = np.mean([symbol_at(s, 0) == 0 for s in states])
freq_neg5 = np.mean([symbol_at(s, -5) == 0 for s in states])
print(f"frequency of state 0 at position 0:  {freq0:.3f}")
print(f"frequency of state 0 at position -5: {freq_neg5:.3f}")

# Rotations carry an angle instead of symbols.
rot = BaseSystemSpec.rotation(0.381966011)  # close to the golden rotation
r = sample_base(rot, seed=1, count=1)[0]
print("\nrotation orbit:", [round(x, 4) for x in
                            [r.angle, base_step(r).angle,
                             base_step(base_step(r)).angle]])

# The one-point base is fixed by the shift; pairing it with a deterministic
# fiber map recovers ordinary (non-random) dynamics.
dirac = BaseSystemSpec.dirac()
d = sample_base(dirac, seed=0, count=1)[0]
print("one-point base is fixed by the shift:", base_step(d) == d)
