"""Criterion-free cross-checks.

None of these use the quadratic system.  ``ppt_check`` is one-sided: a failure
proves entanglement, a pass proves nothing once ``N**M > 6``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch
from .multilinear import (
    DEFAULT_TOL,
    Bipartition,
    DensityMatrix,
    PureState,
    canonical_bipartitions,
    matricize,
)


def pure_product_oracle(state: PureState, tol: float = 1e-8) -> bool:
    """True iff every single-party matricization has ``sigma_2 / sigma_1 < tol``."""
    for cut in state.shape.single_party_cuts():
        sv = np.linalg.svd(matricize(state, cut), compute_uv=False)
        if sv.size > 1 and sv[1] >= tol * sv[0]:
            return False
    return True


def partial_transpose(rho: DensityMatrix, cut: Bipartition) -> np.ndarray:
    """Transpose the T-party indices of ``rho`` between its row and column multi-indices."""
    shape = rho.shape
    m = shape.num_parties
    if cut.num_parties != m:
        raise ShapeMismatch(f"cut {cut} does not fit {m} parties")
    tensor = np.asarray(rho.entries).reshape(shape.tensor_shape * 2)
    axes = list(range(2 * m))
    for k in cut.t_positions:
        axes[k], axes[m + k] = axes[m + k], axes[k]
    return tensor.transpose(axes).reshape(shape.dim, shape.dim)


@dataclass(frozen=True)
class PPTReport:
    per_bipartition: tuple[tuple[Bipartition, float], ...]
    passed: bool

    @property
    def min_eigenvalue(self) -> float:
        return min(v for _, v in self.per_bipartition)


def ppt_check(rho: DensityMatrix, tol: float = DEFAULT_TOL) -> PPTReport:
    results = []
    for cut in canonical_bipartitions(rho.shape.num_parties):
        pt = partial_transpose(rho, cut)
        results.append((cut, float(np.linalg.eigvalsh(pt).min())))
    return PPTReport(tuple(results), all(v >= -tol for _, v in results))


def reconstruct(p_prime: float, e1p: PureState, e2p: PureState) -> DensityMatrix:
    """``p' |E1'><E1'| + (1 - p') |E2'><E2'|``."""
    if e1p.shape != e2p.shape:
        raise ShapeMismatch("components have different shapes")
    if not 0.0 <= p_prime <= 1.0:
        raise ValueError(f"p'={p_prime!r} outside [0, 1]")
    mat = p_prime * e1p.projector() + (1 - p_prime) * e2p.projector()
    return DensityMatrix(e1p.shape, mat)


def max_abs_distance(a, b) -> float:
    a = a.entries if isinstance(a, DensityMatrix) else np.asarray(a)
    b = b.entries if isinstance(b, DensityMatrix) else np.asarray(b)
    if a.shape != b.shape:
        raise ShapeMismatch(f"{a.shape} != {b.shape}")
    return float(np.abs(a - b).max())
