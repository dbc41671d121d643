"""Local-unitary invariants and the generalized concurrence of pure states."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import InvalidState, NotSeparable
from .multilinear import (
    DEFAULT_TOL,
    SIGNIFICANT,
    Bipartition,
    PureState,
    canonical_bipartitions,
    fix_phase,
    matricize,
)

SEPARABLE_TOL = 1e-8


@dataclass(frozen=True)
class InvariantSet:
    """Quadratic invariant ``i0`` and one biquadratic invariant per canonical cut."""

    i0: float
    biquadratics: tuple[float, ...]
    cuts: tuple[Bipartition, ...]

    def as_dict(self) -> dict:
        return {"i0": self.i0,
                "biquadratics": {str(c): v for c, v in zip(self.cuts, self.biquadratics)}}


def _check_normalized(state: PureState, tol: float) -> float:
    i0 = float(np.vdot(state.amplitudes, state.amplitudes).real)
    if abs(i0 - 1.0) > tol:
        raise InvalidState(f"state is not normalized (<psi|psi> = {i0!r})")
    return i0


def invariants(state: PureState, tol: float = DEFAULT_TOL) -> InvariantSet:
    """``I_0 = sum |a|^2`` and ``I_TS = tr((A A^dagger)^2)`` for every canonical cut.

    ``A`` is the matricization of the state across the cut, so ``A A^dagger`` is
    the reduced density matrix on the T parties and ``I_TS`` its purity.
    """
    i0 = _check_normalized(state, tol)
    cuts = tuple(canonical_bipartitions(state.shape.num_parties))
    values = []
    for cut in cuts:
        a = matricize(state, cut)
        reduced = a @ a.conj().T
        values.append(float(np.sum(np.abs(reduced) ** 2)))
    return InvariantSet(i0, tuple(values), cuts)


def biquadratic_bruteforce(state: PureState, cut: Bipartition) -> float:
    """``sum a_TS a*_TS' a_T'S' a*_T'S`` summed index by index.

    Only meant as a cross-check on small states (``N**M <= 81``).
    """
    a = matricize(state, cut)
    rows, cols = a.shape
    total = 0j
    for t, tp in itertools.product(range(rows), repeat=2):
        for s, sp in itertools.product(range(cols), repeat=2):
            total += a[t, s] * np.conj(a[t, sp]) * a[tp, sp] * np.conj(a[tp, s])
    return float(total.real)


def _cut_deficit(state: PureState, cut: Bipartition) -> float:
    # (sum sigma^2)^2 - sum sigma^4 = 2 sum_{i<j} sigma_i^2 sigma_j^2, free of cancellation
    sq = np.linalg.svd(matricize(state, cut), compute_uv=False) ** 2
    cumulative = np.cumsum(sq)
    return float(2.0 * np.sum(sq[1:] * cumulative[:-1]))


def concurrence(state: PureState, tol: float = DEFAULT_TOL) -> float:
    """Generalized concurrence ``C_N^M``.

    Equals ``sqrt(N / (d (N - 1)) * (d I_0^2 - sum_T I_TS))`` with ``d`` the number
    of canonical bipartitions.  Each cut contributes ``I_0^2 - I_TS``, which is
    evaluated from the Schmidt coefficients as a sum of positive terms so product
    states come out at rounding level instead of ``sqrt(eps)``.
    """
    _check_normalized(state, tol)
    n = state.shape.local_dim
    cuts = canonical_bipartitions(state.shape.num_parties)
    d = len(cuts)
    radicand = n / (d * (n - 1)) * sum(_cut_deficit(state, cut) for cut in cuts)
    return float(np.sqrt(max(radicand, 0.0)))


def concurrence_from_invariants(inv: InvariantSet, local_dim: int) -> float:
    """The same quantity computed directly from the invariants.

    Loses about half the digits near zero to cancellation; a negative radicand
    within ``-1e-12`` is clamped to zero.
    """
    d = len(inv.biquadratics)
    radicand = local_dim / (d * (local_dim - 1)) * (d * inv.i0 ** 2 - sum(inv.biquadratics))
    if radicand < -1e-12:
        raise ValueError(f"negative concurrence radicand {radicand:.3g}")
    return float(np.sqrt(max(radicand, 0.0)))


def is_pure_separable(state: PureState, tol: float = SEPARABLE_TOL) -> bool:
    """Whether the state is a full product state (its concurrence is below ``tol``)."""
    return concurrence(state) < tol


@dataclass(frozen=True, eq=False)
class ProductFactorization:
    """``global_phase * factors[0] x factors[1] x ... x factors[M-1]``."""

    factors: tuple[np.ndarray, ...]
    global_phase: complex

    def vector(self) -> np.ndarray:
        vec = np.array([self.global_phase], dtype=complex)
        for f in self.factors:
            vec = np.kron(vec, f)
        return vec

    def residual(self, state: PureState) -> float:
        return float(np.linalg.norm(self.vector() - state.amplitudes))


def factorize(state: PureState, tol: float = SEPARABLE_TOL) -> ProductFactorization:
    """Split a product state into unit vectors, one per party.

    The fibers through the largest-modulus amplitude are the per-party factors
    up to scale.  Each factor is normalized with its first significant entry
    made real positive; the leftover phase goes into ``global_phase``.

    Raises :class:`NotSeparable` if the rebuilt state differs from the input by
    more than ``tol`` in norm.
    """
    tensor = state.tensor
    anchor = np.unravel_index(np.argmax(np.abs(tensor)), tensor.shape)
    factors = []
    for k in range(state.shape.num_parties):
        index = list(anchor)
        index[k] = slice(None)
        fiber = tensor[tuple(index)]
        factors.append(fix_phase(fiber / np.linalg.norm(fiber)))
    trial = ProductFactorization(tuple(factors), 1.0)
    overlap = np.vdot(trial.vector(), state.amplitudes)
    if abs(overlap) < SIGNIFICANT:
        raise NotSeparable("anchor fibers do not overlap the state")
    result = ProductFactorization(tuple(factors), complex(overlap / abs(overlap)))
    residual = result.residual(state)
    if residual > tol:
        raise NotSeparable(f"product reconstruction residual {residual:.3g} exceeds {tol}")
    return result
