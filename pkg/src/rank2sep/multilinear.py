"""Dense tensor representation of multipartite states.

Amplitudes are stored as flat complex vectors of length ``N**M`` in row-major
multi-index order with party 0 varying slowest, so ``amplitudes.reshape((N,) * M)``
is the amplitude tensor ``a[i_0, ..., i_{M-1}]``.  Everything that enumerates
coefficients (matricizations, quadratic systems, file formats) relies on this
ordering.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidState, NotDensityMatrix, NotRankTwo, ShapeMismatch

DEFAULT_TOL = 1e-9

# relative magnitude below which an amplitude is ignored when fixing phases
SIGNIFICANT = 1e-8


@dataclass(frozen=True)
class PartyShape:
    """``num_parties`` subsystems, each of dimension ``local_dim``."""

    num_parties: int
    local_dim: int

    def __post_init__(self):
        if int(self.num_parties) < 2 or int(self.local_dim) < 2:
            raise ValueError(
                f"need num_parties >= 2 and local_dim >= 2, got "
                f"M={self.num_parties}, N={self.local_dim}"
            )
        if self.local_dim ** self.num_parties > np.iinfo(np.intp).max:
            raise ValueError("total dimension N**M exceeds the addressable range")

    @property
    def dim(self) -> int:
        return self.local_dim ** self.num_parties

    @property
    def tensor_shape(self) -> tuple[int, ...]:
        return (self.local_dim,) * self.num_parties

    @property
    def num_bipartitions(self) -> int:
        return 2 ** (self.num_parties - 1) - 1

    def bipartitions(self) -> list[Bipartition]:
        return canonical_bipartitions(self.num_parties)

    def single_party_cuts(self) -> list[Bipartition]:
        return [Bipartition((k,), _complement((k,), self.num_parties))
                for k in range(self.num_parties)]

    def multi_index(self, flat: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(flat, self.tensor_shape))

    def flat_index(self, multi) -> int:
        multi = tuple(multi)
        if len(multi) != self.num_parties or any(
                not 0 <= i < self.local_dim for i in multi):
            raise ShapeMismatch(f"multi-index {multi} invalid for {self}")
        return int(np.ravel_multi_index(multi, self.tensor_shape))


def _complement(positions, num_parties):
    return tuple(k for k in range(num_parties) if k not in positions)


@dataclass(frozen=True)
class Bipartition:
    """A split of party positions into a nonempty strict subset ``t`` and its complement ``s``."""

    t_positions: tuple[int, ...]
    s_positions: tuple[int, ...]

    def __post_init__(self):
        t, s = tuple(self.t_positions), tuple(self.s_positions)
        if not t or not s:
            raise ValueError("both sides of a bipartition must be nonempty")
        if set(t) & set(s):
            raise ValueError(f"overlapping bipartition {t} | {s}")
        if sorted(t + s) != list(range(len(t) + len(s))):
            raise ValueError(f"bipartition {t} | {s} does not cover 0..M-1")
        object.__setattr__(self, "t_positions", tuple(sorted(t)))
        object.__setattr__(self, "s_positions", tuple(sorted(s)))

    @classmethod
    def from_t(cls, t_positions, num_parties: int) -> Bipartition:
        t = tuple(sorted(set(t_positions)))
        return cls(t, _complement(t, num_parties))

    @property
    def num_parties(self) -> int:
        return len(self.t_positions) + len(self.s_positions)

    @property
    def is_canonical(self) -> bool:
        return 0 in self.s_positions

    def canonical(self) -> Bipartition:
        if self.is_canonical:
            return self
        return Bipartition(self.s_positions, self.t_positions)

    def __str__(self):
        t = ",".join(map(str, self.t_positions))
        s = ",".join(map(str, self.s_positions))
        return f"T={{{t}}}|S={{{s}}}"


def canonical_bipartitions(num_parties: int) -> list[Bipartition]:
    """All ``2**(M-1) - 1`` inequivalent bipartitions, with party 0 always on the S side.

    Ordered by the size of T, then lexicographically.
    """
    rest = range(1, num_parties)
    return [Bipartition.from_t(t, num_parties)
            for size in range(1, num_parties)
            for t in itertools.combinations(rest, size)]


def _frozen_array(values, dtype=complex):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized pure state on ``shape``."""

    shape: PartyShape
    amplitudes: np.ndarray
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        amps = _frozen_array(self.amplitudes).reshape(-1)
        if amps.size != self.shape.dim:
            raise ShapeMismatch(
                f"expected {self.shape.dim} amplitudes for {self.shape}, got {amps.size}")
        if not np.all(np.isfinite(amps)):
            raise InvalidState("amplitudes must be finite")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > self.tol:
            raise InvalidState(f"state norm {norm!r} differs from 1 by more than {self.tol}")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, vector, shape: PartyShape, normalize: bool = True,
                    tol: float = DEFAULT_TOL) -> PureState:
        vec = np.asarray(vector, dtype=complex).reshape(-1)
        if normalize:
            norm = np.linalg.norm(vec)
            if norm == 0:
                raise InvalidState("cannot normalize the zero vector")
            vec = vec / norm
        return cls(shape, vec, tol=tol)

    @classmethod
    def basis(cls, shape: PartyShape, multi) -> PureState:
        vec = np.zeros(shape.dim, dtype=complex)
        vec[shape.flat_index(multi)] = 1.0
        return cls(shape, vec)

    @property
    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.shape.tensor_shape)

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def is_real(self, tol: float = DEFAULT_TOL) -> bool:
        return bool(np.all(np.abs(self.amplitudes.imag) < tol))

    def __repr__(self):
        return f"PureState({self.shape.num_parties}x{self.shape.local_dim})"


def product_state(factors, shape: PartyShape | None = None) -> PureState:
    """Tensor product of per-party vectors, normalized."""
    factors = [np.asarray(f, dtype=complex) for f in factors]
    if shape is None:
        shape = PartyShape(len(factors), factors[0].size)
    if len(factors) != shape.num_parties or any(f.size != shape.local_dim for f in factors):
        raise ShapeMismatch("factor count or dimension does not match shape")
    vec = factors[0]
    for f in factors[1:]:
        vec = np.kron(vec, f)
    return PureState.from_vector(vec, shape)


def ghz_state(shape: PartyShape) -> PureState:
    """``(1/sqrt(N)) sum_i e_i x e_i x ... x e_i``."""
    vec = np.zeros(shape.dim, dtype=complex)
    for i in range(shape.local_dim):
        vec[shape.flat_index((i,) * shape.num_parties)] = 1.0
    return PureState.from_vector(vec, shape)


def _check_same_shape(*states):
    shapes = {s.shape for s in states}
    if len(shapes) != 1:
        raise ShapeMismatch(f"shape mismatch: {sorted(map(str, shapes))}")


def inner_product(a: PureState, b: PureState) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    _check_same_shape(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def _check_cut(shape: PartyShape, cut: Bipartition):
    if cut.num_parties != shape.num_parties:
        raise ShapeMismatch(f"cut {cut} does not fit {shape.num_parties} parties")


def matricize_array(tensor: np.ndarray, cut: Bipartition) -> np.ndarray:
    """Reshape an amplitude tensor to ``N**|T| x N**|S|`` (rows over T, columns over S)."""
    dims = tensor.shape
    rows = int(np.prod([dims[k] for k in cut.t_positions]))
    return tensor.transpose(cut.t_positions + cut.s_positions).reshape(rows, -1)


def matricize(state: PureState, cut: Bipartition) -> np.ndarray:
    _check_cut(state.shape, cut)
    return matricize_array(state.tensor, cut)


def unmatricize(matrix, cut: Bipartition, shape: PartyShape) -> np.ndarray:
    """Inverse of :func:`matricize`, returning the flat amplitude vector."""
    _check_cut(shape, cut)
    n = shape.local_dim
    matrix = np.asarray(matrix)
    if matrix.shape != (n ** len(cut.t_positions), n ** len(cut.s_positions)):
        raise ShapeMismatch(f"matrix of shape {matrix.shape} does not match cut {cut}")
    tensor = matrix.reshape(shape.tensor_shape)
    order = cut.t_positions + cut.s_positions
    return np.transpose(tensor, np.argsort(order)).reshape(-1)


@dataclass(frozen=True, eq=False)
class LocalUnitary:
    """``U_0 x U_1 x ... x U_{M-1}``.

    ``factors[k]`` is the operator matrix acting on party ``k``; it sends the
    basis vector ``e_i`` to ``sum_j U[j, i] e_j``.
    """

    shape: PartyShape
    factors: tuple
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        factors = tuple(_frozen_array(f) for f in self.factors)
        n = self.shape.local_dim
        if len(factors) != self.shape.num_parties:
            raise ShapeMismatch(f"need {self.shape.num_parties} factors, got {len(factors)}")
        for k, u in enumerate(factors):
            if u.shape != (n, n):
                raise ShapeMismatch(f"factor {k} has shape {u.shape}, expected {(n, n)}")
            err = np.max(np.abs(u @ u.conj().T - np.eye(n)))
            if err > self.tol:
                raise InvalidState(f"factor {k} is not unitary (deviation {err:.3g})")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def identity(cls, shape: PartyShape) -> LocalUnitary:
        return cls(shape, tuple(np.eye(shape.local_dim) for _ in range(shape.num_parties)))

    @classmethod
    def random(cls, shape: PartyShape, rng=None) -> LocalUnitary:
        from scipy.stats import unitary_group

        rng = np.random.default_rng(rng)
        return cls(shape, tuple(unitary_group.rvs(shape.local_dim, random_state=rng)
                                for _ in range(shape.num_parties)))

    def then(self, other: LocalUnitary) -> LocalUnitary:
        """The local unitary that applies ``self`` first, then ``other``."""
        return LocalUnitary(self.shape, tuple(v @ u for u, v in zip(self.factors, other.factors)))


def apply_local_unitary(state: PureState, u: LocalUnitary) -> PureState:
    if state.shape != u.shape:
        raise ShapeMismatch(f"state shape {state.shape} != unitary shape {u.shape}")
    tensor = state.tensor
    for k, factor in enumerate(u.factors):
        tensor = np.moveaxis(np.tensordot(factor, tensor, axes=([1], [k])), 0, k)
    return PureState(state.shape, tensor.reshape(-1), tol=max(state.tol, u.tol))


def fix_phase(vector: np.ndarray) -> np.ndarray:
    """Rotate ``vector`` so its first significant entry is real and positive."""
    vector = np.asarray(vector, dtype=complex)
    mags = np.abs(vector)
    if mags.max() == 0:
        return vector.copy()
    first = np.flatnonzero(mags > SIGNIFICANT * mags.max())[0]
    return vector * (abs(vector[first]) / vector[first])


def _lex_key(vector):
    mags = np.abs(vector)
    return tuple(np.round(mags / mags.max(), 8))


def hermitian_eigh(matrix, tol: float = DEFAULT_TOL):
    """Eigenpairs of a Hermitian matrix in a reproducible order.

    Eigenvalues descend.  Within a cluster of eigenvalues closer than ``tol`` the
    vector with the lexicographically larger modulus profile comes first.  Each
    eigenvector has its first significant entry real positive.

    Returns ``(values, vectors)`` with eigenvectors as columns.
    """
    values, vectors = np.linalg.eigh(np.asarray(matrix))
    order = list(np.argsort(values)[::-1])
    # group near-degenerate eigenvalues, then sort each group by modulus profile
    groups, current = [], [order[0]]
    for idx in order[1:]:
        if values[current[-1]] - values[idx] < tol:
            current.append(idx)
        else:
            groups.append(current)
            current = [idx]
    groups.append(current)
    order = [i for g in groups
             for i in sorted(g, key=lambda j: _lex_key(vectors[:, j]), reverse=True)]
    vecs = np.column_stack([fix_phase(vectors[:, j]) for j in order])
    return values[order], vecs


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite ``N**M x N**M`` matrix."""

    shape: PartyShape
    entries: np.ndarray
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        mat = _frozen_array(self.entries)
        n = self.shape.dim
        if mat.shape != (n, n):
            raise ShapeMismatch(f"expected a {n}x{n} matrix, got {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise NotDensityMatrix("entries must be finite")
        herm = np.max(np.abs(mat - mat.conj().T))
        if herm > self.tol:
            raise NotDensityMatrix(f"matrix is not Hermitian (deviation {herm:.3g})")
        trace = np.trace(mat).real
        if abs(trace - 1.0) > self.tol:
            raise NotDensityMatrix(f"trace {trace!r} differs from 1")
        min_eig = np.linalg.eigvalsh(mat).min()
        if min_eig < -self.tol:
            raise NotDensityMatrix(f"matrix has negative eigenvalue {min_eig:.3g}")
        object.__setattr__(self, "entries", mat)

    @cached_property
    def spectrum(self):
        return hermitian_eigh(self.entries, self.tol)


@dataclass(frozen=True, eq=False)
class RankTwoState:
    """``p |E1><E1| + (1 - p) |E2><E2|`` with orthonormal ``E1``, ``E2``."""

    shape: PartyShape
    p: float
    e1: PureState
    e2: PureState
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        if self.e1.shape != self.shape or self.e2.shape != self.shape:
            raise ShapeMismatch("eigenvector shapes do not match the declared shape")
        if not 0.0 < self.p < 1.0:
            raise InvalidState(f"weight p={self.p!r} must lie strictly inside (0, 1)")
        overlap = abs(inner_product(self.e1, self.e2))
        if overlap > self.tol:
            raise InvalidState(f"E1 and E2 are not orthogonal (|<E1|E2>| = {overlap:.3g})")
        object.__setattr__(self, "p", float(self.p))

    @property
    def q(self) -> float:
        return 1.0 - self.p

    def density(self) -> np.ndarray:
        return self.p * self.e1.projector() + self.q * self.e2.projector()

    def is_real(self, tol: float = DEFAULT_TOL) -> bool:
        return self.e1.is_real(tol) and self.e2.is_real(tol)


def assemble(p: float, e1: PureState, e2: PureState) -> DensityMatrix:
    state = RankTwoState(e1.shape, p, e1, e2)
    return DensityMatrix(state.shape, state.density())


def rank_two_extract(rho: DensityMatrix, tol: float = DEFAULT_TOL) -> RankTwoState:
    """Split a rank-two density matrix into its weight and two eigenvectors.

    The larger eigenvalue is ``p`` (so ``p >= 1/2``).  Raises :class:`NotRankTwo`
    when the matrix has rank one or rank three and above at tolerance ``tol``.
    """
    if not isinstance(rho, DensityMatrix):
        raise NotDensityMatrix(f"expected a DensityMatrix, got {type(rho).__name__}")
    values, vectors = hermitian_eigh(rho.entries, tol)
    if values.size < 2 or values[1] < tol:
        raise NotRankTwo(f"matrix has rank one (second eigenvalue {values[1]:.3g})")
    if values.size > 2 and abs(values[2]) >= tol:
        raise NotRankTwo(f"matrix has rank above two (third eigenvalue {values[2]:.3g})")
    total = values[0] + values[1]
    p = float(values[0] / total)
    state = RankTwoState(
        rho.shape, p,
        PureState(rho.shape, vectors[:, 0], tol=tol),
        PureState(rho.shape, vectors[:, 1], tol=tol),
        tol=tol,
    )
    residual = np.max(np.abs(state.density() - rho.entries))
    if residual > tol + np.abs(values[2:]).sum():
        raise NotRankTwo(f"rank-two reconstruction residual {residual:.3g} exceeds tolerance")
    return state
