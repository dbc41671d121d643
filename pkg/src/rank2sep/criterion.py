"""Separability of rank-two mixed states.

For ``rho = p |E1><E1| + (1 - p) |E2><E2|`` every vector ``|E1> + lam |E2>`` in
the range is a product state exactly when ``lam`` solves all of the quadratics

    alpha * lam**2 + beta * lam + gamma = 0,

one per 2x2 minor of every matricization, where ``alpha`` is the minor built
from E2's amplitudes, ``gamma`` the one from E1's and ``beta`` the mixed term.
``rho`` is separable iff the system has two distinct common roots whose
product states mix back into ``rho`` with a weight in [0, 1].  Whenever the
verdict is separable the decomposition is returned together with product
factorizations of both components, so a caller can check it without trusting
the criterion.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .concurrence import (
    SEPARABLE_TOL,
    ProductFactorization,
    concurrence,
    factorize,
)
from .errors import (
    ComplexInput,
    E2Separable,
    InconsistentRoots,
    NotOrthogonalToGHZ,
    NotSeparable,
)
from .multilinear import (
    Bipartition,
    PartyShape,
    PureState,
    RankTwoState,
    canonical_bipartitions,
    ghz_state,
    inner_product,
    matricize,
)

CRITERION_TOL = 1e-8


class Decision(str, enum.Enum):
    SEPARABLE = "Separable"
    ENTANGLED = "Entangled"
    BOTH_EIGENVECTORS_SEPARABLE = "BothEigenvectorsSeparable"


@dataclass(frozen=True)
class QuadraticEntry:
    cut: Bipartition
    idx_pair: tuple[tuple[int, ...], tuple[int, ...]]
    alpha: complex
    beta: complex
    gamma: complex


def entry_coefficients(e1: PureState, e2: PureState, cut: Bipartition, first, second):
    """``(alpha, beta, gamma)`` for the multi-index pair ``(I, I')`` across ``cut``.

    The swapped amplitudes ``a_{TS'}`` and ``a_{T'S}`` take the T positions from
    one multi-index and the S positions from the other.
    """
    first, second = tuple(first), tuple(second)
    swapped_1 = list(first)
    swapped_2 = list(second)
    for k in cut.s_positions:
        swapped_1[k], swapped_2[k] = second[k], first[k]
    t1, t2 = e1.tensor, e2.tensor
    ts, tps = first, second
    tsp, tpss = tuple(swapped_1), tuple(swapped_2)
    alpha = t2[ts] * t2[tps] - t2[tsp] * t2[tpss]
    gamma = t1[ts] * t1[tps] - t1[tsp] * t1[tpss]
    beta = (t2[ts] * t1[tps] + t1[ts] * t2[tps]
            - t2[tsp] * t1[tpss] - t1[tsp] * t2[tpss])
    return complex(alpha), complex(beta), complex(gamma)


@dataclass(frozen=True, eq=False)
class QuadraticSystem:
    """All non-trivial equations, stored column-wise.

    Entry ``k`` comes from cut ``cuts[cut_index[k]]`` and the multi-index pair
    ``(first[k], second[k])``.  Only one representative of each 2x2 minor is
    kept: permuting the two rows or the two columns of a minor negates all
    three coefficients and leaves its roots alone.
    """

    shape: PartyShape
    cuts: tuple[Bipartition, ...]
    cut_index: np.ndarray
    first: np.ndarray
    second: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    reference: int | None

    def __len__(self):
        return self.alpha.size

    @property
    def entries(self) -> list[QuadraticEntry]:
        return [QuadraticEntry(self.cuts[c], (tuple(map(int, i)), tuple(map(int, j))),
                               complex(a), complex(b), complex(g))
                for c, i, j, a, b, g in zip(self.cut_index, self.first, self.second,
                                            self.alpha, self.beta, self.gamma)]

    @property
    def scale(self) -> float:
        if len(self) == 0:
            return 0.0
        return float(max(np.abs(self.alpha).max(), np.abs(self.beta).max(),
                         np.abs(self.gamma).max()))

    def reference_coefficients(self):
        k = self.reference
        return complex(self.alpha[k]), complex(self.beta[k]), complex(self.gamma[k])

    def evaluate(self, lam: complex) -> np.ndarray:
        return (self.alpha * lam + self.beta) * lam + self.gamma


def _multi_indices(rows, cols, cut: Bipartition, shape: PartyShape) -> np.ndarray:
    n, m = shape.local_dim, shape.num_parties
    out = np.empty((rows.size, m), dtype=np.int64)
    t_digits = np.unravel_index(rows, (n,) * len(cut.t_positions))
    s_digits = np.unravel_index(cols, (n,) * len(cut.s_positions))
    for pos, digits in zip(cut.t_positions, t_digits):
        out[:, pos] = digits
    for pos, digits in zip(cut.s_positions, s_digits):
        out[:, pos] = digits
    return out


def build_system(state: RankTwoState, tol: float = CRITERION_TOL) -> QuadraticSystem:
    """Quadratic system in ``lam`` for ``|E1> + lam |E2>`` over every canonical cut.

    Equations whose three coefficients are all below ``tol`` are dropped.
    ``reference`` is the entry with the largest ``|alpha|``, or ``None`` when no
    ``|alpha|`` reaches ``tol`` (E2 is then a product state).
    """
    shape = state.shape
    cuts = tuple(canonical_bipartitions(shape.num_parties))
    parts = {key: [] for key in ("cut", "first", "second", "alpha", "beta", "gamma")}
    for ci, cut in enumerate(cuts):
        a1, a2 = matricize(state.e1, cut), matricize(state.e2, cut)
        r, rp = np.triu_indices(a1.shape[0], 1)
        c, cp = np.triu_indices(a1.shape[1], 1)
        r, rp = r[:, None], rp[:, None]
        c, cp = c[None, :], cp[None, :]
        # a_{TS} = A[r, c], a_{T'S'} = A[r', c'], a_{TS'} = A[r, c'], a_{T'S} = A[r', c]
        alpha = a2[r, c] * a2[rp, cp] - a2[r, cp] * a2[rp, c]
        gamma = a1[r, c] * a1[rp, cp] - a1[r, cp] * a1[rp, c]
        beta = (a2[r, c] * a1[rp, cp] + a1[r, c] * a2[rp, cp]
                - a2[r, cp] * a1[rp, c] - a1[r, cp] * a2[rp, c])
        rows, cols = np.broadcast_arrays(r, c)
        rows_p, cols_p = np.broadcast_arrays(rp, cp)
        parts["cut"].append(np.full(alpha.size, ci))
        parts["first"].append(_multi_indices(rows.ravel(), cols.ravel(), cut, shape))
        parts["second"].append(_multi_indices(rows_p.ravel(), cols_p.ravel(), cut, shape))
        parts["alpha"].append(alpha.ravel())
        parts["beta"].append(beta.ravel())
        parts["gamma"].append(gamma.ravel())
    cols = {k: np.concatenate(v) for k, v in parts.items()}
    keep = np.maximum.reduce([np.abs(cols["alpha"]), np.abs(cols["beta"]),
                              np.abs(cols["gamma"])]) >= tol
    cols = {k: v[keep] for k, v in cols.items()}
    reference = None
    if cols["alpha"].size:
        k = int(np.argmax(np.abs(cols["alpha"])))
        if abs(cols["alpha"][k]) >= tol:
            reference = k
    return QuadraticSystem(shape, cuts, cols["cut"], cols["first"], cols["second"],
                           cols["alpha"], cols["beta"], cols["gamma"], reference)


def solve_quadratic(a: complex, b: complex, c: complex) -> tuple[complex, complex]:
    """Both roots of ``a x**2 + b x + c`` for complex coefficients, ``a != 0``.

    The root of larger modulus comes from ``q = -(b + sign * sqrt(disc)) / 2``
    with the sign chosen to avoid cancellation; the other is ``c / q``.
    """
    if a == 0:
        raise ZeroDivisionError("leading coefficient is zero")
    sq = np.sqrt(complex(b * b - 4 * a * c))
    sign = 1.0 if (np.conj(b) * sq).real >= 0 else -1.0
    q = -0.5 * (b + sign * sq)
    if q == 0:
        return 0j, 0j
    return complex(q / a), complex(c / q)


@dataclass(frozen=True)
class RootPair:
    mu1: complex
    mu2: complex
    theta: float

    @property
    def z(self) -> complex:
        return self.mu2 - self.mu1


def mixture_weights(roots: RootPair) -> tuple[complex, complex]:
    """``(p, p')`` implied by two product vectors ``E1 + mu1 E2`` and ``E1 + mu2 E2``.

    ``p = 1 / (1 - mu1 mu2 conj(z) / z)`` is the weight of E1 in the mixture and
    ``p' = mu2 (1 + |mu1|^2) / (z - mu1 mu2 conj(z))`` the weight of the first
    product vector, with ``z = mu2 - mu1``.
    """
    mu1, mu2, z = roots.mu1, roots.mu2, roots.z
    prod = mu1 * mu2
    p = 1.0 / (1.0 - prod * np.conj(z) / z)
    p_prime = mu2 * (1 + abs(mu1) ** 2) / (z - prod * np.conj(z))
    return complex(p), complex(p_prime)


def construct_decomposition(state: RankTwoState, roots: RootPair,
                            tol: float = CRITERION_TOL):
    """``(p', E1', E2')`` with ``rho = p' |E1'><E1'| + (1 - p') |E2'><E2'|``.

    Raises :class:`InconsistentRoots` when the roots do not reproduce the
    weight ``p`` of ``state`` or give a weight ``p'`` outside [0, 1].
    """
    if abs(roots.z) <= tol:
        raise InconsistentRoots("roots coincide")
    p, p_prime = mixture_weights(roots)
    if abs(p - state.p) > tol:
        raise InconsistentRoots(f"roots imply p={p:.12g}, state has p={state.p:.12g}")
    if abs(p_prime.imag) > tol or not -tol <= p_prime.real <= 1 + tol:
        raise InconsistentRoots(f"mixture weight p'={p_prime:.12g} is not in [0, 1]")
    e1, e2 = state.e1.amplitudes, state.e2.amplitudes
    vectors = []
    for mu in (roots.mu1, roots.mu2):
        vectors.append(PureState.from_vector((e1 + mu * e2) / math.sqrt(1 + abs(mu) ** 2),
                                             state.shape))
    return min(max(p_prime.real, 0.0), 1.0), vectors[0], vectors[1]


@dataclass(frozen=True, eq=False)
class Decomposition:
    p_prime: float
    e1_prime: PureState
    e2_prime: PureState
    factors1: ProductFactorization | None
    factors2: ProductFactorization | None
    roots: RootPair | None = None

    def density(self) -> np.ndarray:
        return (self.p_prime * self.e1_prime.projector()
                + (1 - self.p_prime) * self.e2_prime.projector())


@dataclass(frozen=True, eq=False)
class SeparabilityVerdict:
    """Decision plus, for separable states, an explicit decomposition.

    ``witness`` records the residual of every check that ran and, for entangled
    verdicts, the name of the first failed check under ``"failed"``.
    """

    decision: Decision
    decomposition: Decomposition | None = None
    witness: dict = field(default_factory=dict)

    @property
    def is_separable(self) -> bool:
        return self.decision is not Decision.ENTANGLED

    @property
    def failed(self) -> str | None:
        return self.witness.get("failed")


def _certify(p_prime, e1p, e2p, roots, witness):
    factors = []
    for name, vec in (("factors1", e1p), ("factors2", e2p)):
        try:
            f = factorize(vec, SEPARABLE_TOL)
            witness[f"{name}_residual"] = f.residual(vec)
        except NotSeparable as exc:
            f = None
            witness.setdefault("certificate_error", []).append(f"{name}: {exc}")
        factors.append(f)
    return Decomposition(p_prime, e1p, e2p, factors[0], factors[1], roots)


def _both_separable(state: RankTwoState, witness: dict) -> SeparabilityVerdict:
    decomposition = _certify(state.p, state.e1, state.e2, None, witness)
    return SeparabilityVerdict(Decision.BOTH_EIGENVECTORS_SEPARABLE, decomposition, witness)


def _entangled(witness: dict, failed: str) -> SeparabilityVerdict:
    witness["failed"] = failed
    return SeparabilityVerdict(Decision.ENTANGLED, None, witness)


def _wrap_angle(theta: float) -> float:
    return float(math.remainder(theta, 2 * math.pi))


def decide(state: RankTwoState, tol: float = CRITERION_TOL) -> SeparabilityVerdict:
    """Separability of a rank-two state with arbitrary complex amplitudes.

    Checks, in order: a single phase ``theta`` with
    ``gamma = exp(i theta) (1 - 1/p) alpha`` on every equation; ``beta``
    proportional to ``alpha`` across the system; two distinct roots of the
    reference equation that solve every equation; ``z = exp(i theta) conj(z)``
    for ``z = mu2 - mu1``; and a real mixture weight ``p'`` in [0, 1].
    Residuals are relative to the largest coefficient in the system.
    """
    system = build_system(state, tol)
    scale = system.scale
    witness: dict = {"num_equations": len(system), "tol": tol}

    if system.reference is None:
        gamma_max = float(np.abs(system.gamma).max()) if len(system) else 0.0
        witness["gamma_max"] = gamma_max
        if gamma_max < tol:
            return _both_separable(state, witness)
        return _entangled(witness, "e2_separable_e1_entangled")

    a_ref, b_ref, g_ref = system.reference_coefficients()
    kappa0 = 1.0 - 1.0 / state.p
    theta = _wrap_angle(np.angle(g_ref) - np.angle(kappa0 * a_ref)) if g_ref != 0 else 0.0
    kappa = np.exp(1j * theta) * kappa0
    witness["theta"] = theta

    phase = float(np.abs(system.gamma - kappa * system.alpha).max() / scale)
    witness["phase"] = phase
    if phase > tol:
        return _entangled(witness, "phase")

    proportionality = float(
        np.abs(system.beta * a_ref - system.alpha * b_ref).max() / scale ** 2)
    witness["proportionality"] = proportionality
    if proportionality > tol:
        return _entangled(witness, "proportionality")

    mu1, mu2 = solve_quadratic(a_ref, b_ref, g_ref)
    witness["mu1"], witness["mu2"] = mu1, mu2
    separation = abs(mu1 - mu2) / max(1.0, abs(mu1), abs(mu2))
    witness["root_separation"] = separation
    if separation <= tol:
        return _entangled(witness, "distinct_roots")

    common = max(float(np.abs(system.evaluate(mu)).max()) / (scale * (1 + abs(mu)) ** 2)
                 for mu in (mu1, mu2))
    witness["common_root"] = common
    if common > tol:
        return _entangled(witness, "common_root")

    roots = RootPair(mu1, mu2, theta)
    z = roots.z
    root_phase = abs(z - np.exp(1j * theta) * np.conj(z)) / abs(z)
    witness["root_phase"] = float(root_phase)
    if root_phase > tol:
        return _entangled(witness, "root_phase")

    p_implied, p_prime = mixture_weights(roots)
    witness["p_prime"] = p_prime
    witness["p_implied"] = p_implied.real
    if abs(p_prime.imag) > tol or not -tol <= p_prime.real <= 1 + tol:
        return _entangled(witness, "weight_range")

    try:
        p_prime_real, e1p, e2p = construct_decomposition(state, roots, tol)
    except InconsistentRoots as exc:
        witness["detail"] = str(exc)
        return _entangled(witness, "inconsistent_roots")
    decomposition = _certify(p_prime_real, e1p, e2p, roots, witness)
    return SeparabilityVerdict(Decision.SEPARABLE, decomposition, witness)


def decide_real(state: RankTwoState, tol: float = CRITERION_TOL) -> SeparabilityVerdict:
    """Separability test for real eigenvectors via two sums of squares.

    ``delta1 = sum |gamma - (1 - 1/p) alpha|^2 + sum_pairs |beta alpha' - alpha beta'|^2``
    vanishes when the common roots are real with opposite signs;
    ``delta2 = sum |gamma + (1 - 1/p) alpha|^2 + sum |beta|^2`` when they are
    purely imaginary.  The state is separable iff ``min(delta1, delta2) < tol**2``.
    """
    if not state.is_real(tol):
        raise ComplexInput("eigenvector amplitudes are not real; use decide()")
    system = build_system(state, tol)
    alpha, beta, gamma = system.alpha, system.beta, system.gamma
    kappa0 = 1.0 - 1.0 / state.p

    a2, b2 = np.sum(np.abs(alpha) ** 2), np.sum(np.abs(beta) ** 2)
    # sum over ordered pairs of |b_i a_j - a_i b_j|^2 = 2 |alpha|^2 |beta_perp|^2;
    # the projected form avoids the cancellation in |a|^2 |b|^2 - |<a, b>|^2
    pair_sum = 0.0
    if a2 > 0:
        beta_perp = beta - (np.vdot(alpha, beta) / a2) * alpha
        pair_sum = 2.0 * a2 * np.sum(np.abs(beta_perp) ** 2)
    delta1 = float(np.sum(np.abs(gamma - kappa0 * alpha) ** 2) + pair_sum)
    delta2 = float(np.sum(np.abs(gamma + kappa0 * alpha) ** 2) + b2)
    witness: dict = {"num_equations": len(system), "tol": tol,
                     "delta1": delta1, "delta2": delta2}

    threshold = tol ** 2
    if min(delta1, delta2) >= threshold:
        return _entangled(witness, "delta")
    if system.reference is None:
        return _both_separable(state, witness)

    a_ref, b_ref, g_ref = system.reference_coefficients()
    mu1, mu2 = solve_quadratic(a_ref, b_ref, g_ref)
    witness["mu1"], witness["mu2"] = mu1, mu2
    candidates = []
    for branch, delta, theta in (("delta1", delta1, 0.0), ("delta2", delta2, math.pi)):
        if delta >= threshold:
            continue
        roots = RootPair(mu1, mu2, theta)
        try:
            p_prime, e1p, e2p = construct_decomposition(state, roots, tol)
        except InconsistentRoots as exc:
            witness[f"{branch}_error"] = str(exc)
            continue
        rebuilt = p_prime * e1p.projector() + (1 - p_prime) * e2p.projector()
        residual = float(np.abs(rebuilt - state.density()).max())
        witness[f"{branch}_reconstruction"] = residual
        candidates.append((residual, branch, roots, p_prime, e1p, e2p))
    if not candidates:
        # criterion met but no valid decomposition: report, never hide
        witness["certificate_error"] = ["no decomposition from the reference roots"]
        return SeparabilityVerdict(Decision.SEPARABLE, None, witness)
    residual, branch, roots, p_prime, e1p, e2p = min(candidates, key=lambda c: c[0])
    witness["branch"] = branch
    witness["theta"] = roots.theta
    witness["p_prime"] = p_prime
    decomposition = _certify(p_prime, e1p, e2p, roots, witness)
    return SeparabilityVerdict(Decision.SEPARABLE, decomposition, witness)


def concurrence_ratio(state: RankTwoState, tol: float = SEPARABLE_TOL) -> float:
    """``C(E1) / C(E2)``; for separable states this equals ``(1 - p) / p``."""
    c2 = concurrence(state.e2)
    if c2 < tol:
        raise E2Separable(f"E2 has concurrence {c2:.3g}, ratio undefined")
    return concurrence(state.e1) / c2


def corollary_bound_check(e1: PureState, p: float, tol: float = 1e-9) -> bool:
    """Certify entanglement of ``p |E1><E1| + (1 - p) |GHZ><GHZ|`` for ``E1`` orthogonal to GHZ.

    Returns ``True`` when ``p < 1/2``; ``False`` only means the bound gives no
    certificate.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p={p!r} must lie strictly inside (0, 1)")
    overlap = abs(inner_product(ghz_state(e1.shape), e1))
    if overlap > tol:
        raise NotOrthogonalToGHZ(f"|<GHZ|E1>| = {overlap:.3g}")
    return p < 0.5
