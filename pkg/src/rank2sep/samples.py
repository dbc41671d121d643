"""Random states and standard test instances."""

from __future__ import annotations

import numpy as np

from .multilinear import (
    DensityMatrix,
    PartyShape,
    PureState,
    RankTwoState,
    ghz_state,
    product_state,
)


def _gaussian(rng, size, real):
    if real:
        return rng.normal(size=size)
    return rng.normal(size=size) + 1j * rng.normal(size=size)


def random_pure(shape: PartyShape, rng=None, real: bool = False) -> PureState:
    """Haar-random pure state (or its real analogue)."""
    rng = np.random.default_rng(rng)
    return PureState.from_vector(_gaussian(rng, shape.dim, real), shape)


def random_product(shape: PartyShape, rng=None, real: bool = False) -> PureState:
    rng = np.random.default_rng(rng)
    return product_state([_gaussian(rng, shape.local_dim, real)
                          for _ in range(shape.num_parties)], shape)


def random_orthogonal_to(state: PureState, rng=None, real: bool = False) -> PureState:
    rng = np.random.default_rng(rng)
    vec = _gaussian(rng, state.shape.dim, real)
    vec = vec - np.vdot(state.amplitudes, vec) * state.amplitudes
    return PureState.from_vector(vec, state.shape)


def product_mixture(shape: PartyShape, rng=None, weight: float | None = None,
                    real: bool = False) -> DensityMatrix:
    """``w |u><u| + (1 - w) |v><v|`` for two random, non-parallel product states."""
    rng = np.random.default_rng(rng)
    if weight is None:
        weight = rng.uniform(0.1, 0.9)
    while True:
        u = random_product(shape, rng, real)
        v = random_product(shape, rng, real)
        if abs(np.vdot(u.amplitudes, v.amplitudes)) < 0.99:
            break
    rho = weight * u.projector() + (1 - weight) * v.projector()
    return DensityMatrix(shape, rho)


def ghz_orthogonal(shape: PartyShape, p: float, rng=None, real: bool = False) -> RankTwoState:
    """``p |E1><E1| + (1 - p) |GHZ><GHZ|`` with a random ``E1`` orthogonal to GHZ."""
    ghz = ghz_state(shape)
    return RankTwoState(shape, p, random_orthogonal_to(ghz, rng, real), ghz)
