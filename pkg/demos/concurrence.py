"""
Generalized concurrence of pure states
======================================

The concurrence vanishes exactly on product states and is invariant under
local unitaries.  For three parties it never exceeds one.
"""

import numpy as np

from rank2sep import (
    LocalUnitary,
    PartyShape,
    apply_local_unitary,
    concurrence,
    ghz_state,
    invariants,
)
from rank2sep.samples import random_product, random_pure

rng = np.random.default_rng(0)
shape = PartyShape(3, 3)

# GHZ: every reduced purity is 1/N, which pins C at one
ghz = ghz_state(shape)
print("C(GHZ) =", concurrence(ghz))
print("biquadratic invariants:", invariants(ghz).biquadratics)

# product states sit at zero
print("C(product) =", concurrence(random_product(shape, rng)))

# a random state, before and after a random local unitary
psi = random_pure(shape, rng)
moved = apply_local_unitary(psi, LocalUnitary.random(shape, rng))
print("C(psi) =", concurrence(psi), " C(U psi) =", concurrence(moved))

# distribution over Haar-random states
values = np.array([concurrence(random_pure(shape, rng)) for _ in range(500)])
print(f"random states: mean C = {values.mean():.3f}, max C = {values.max():.3f}")
