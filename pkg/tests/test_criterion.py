import itertools

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from rank2sep import (
    Decision,
    PartyShape,
    PureState,
    RankTwoState,
    build_system,
    concurrence_ratio,
    construct_decomposition,
    corollary_bound_check,
    decide,
    decide_real,
    ghz_state,
    is_pure_separable,
    rank_two_extract,
)
from rank2sep.criterion import RootPair, entry_coefficients, mixture_weights, solve_quadratic
from rank2sep.errors import ComplexInput, E2Separable, InconsistentRoots, NotOrthogonalToGHZ
from rank2sep.multilinear import Bipartition, canonical_bipartitions
from rank2sep.samples import (
    ghz_orthogonal,
    product_mixture,
    random_orthogonal_to,
    random_product,
    random_pure,
)

S32 = PartyShape(3, 2)
TOL = 1e-8


def basis(*multi):
    return PureState.basis(PartyShape(len(multi), 2), multi)


def normalized_key(coeffs, digits=10):
    """Sign-insensitive key for a coefficient triple."""
    c = np.asarray(coeffs)
    lead = c[np.flatnonzero(np.abs(c) > 1e-12)[0]]
    c = c * (abs(lead) / lead)
    return tuple(np.round(np.concatenate([c.real, c.imag]), digits) + 0.0)


def brute_force_system(e1, e2, tol=TOL):
    """Every unordered multi-index pair on every canonical cut, identities dropped,
    duplicates (up to a joint sign) merged."""
    shape = e1.shape
    multis = list(np.ndindex(*shape.tensor_shape))
    keys = set()
    pair_count = 0
    for cut in canonical_bipartitions(shape.num_parties):
        for i, j in itertools.combinations_with_replacement(multis, 2):
            pair_count += 1
            coeffs = entry_coefficients(e1, e2, cut, i, j)
            if max(map(abs, coeffs)) >= tol:
                keys.add((cut, normalized_key(coeffs)))
    return keys, pair_count


def system_keys(system):
    return {(e.cut, normalized_key((e.alpha, e.beta, e.gamma))) for e in system.entries}


# --- quadratic system ------------------------------------------------------------------

def test_basis_pair_system_has_only_cross_terms():
    state = RankTwoState(S32, 0.6, basis(0, 0, 0), basis(1, 1, 1))
    system = build_system(state)
    assert len(system) > 0
    np.testing.assert_array_equal(system.alpha, 0)
    np.testing.assert_array_equal(system.gamma, 0)
    np.testing.assert_allclose(np.abs(system.beta), 1)
    assert system.reference is None


def test_product_e2_gives_vanishing_alpha(rng):
    shape = PartyShape(3, 3)
    for _ in range(10):
        e2 = random_product(shape, rng)
        e1 = random_orthogonal_to(e2, rng)
        system = build_system(RankTwoState(shape, 0.6, e1, e2))
        assert np.abs(system.alpha).max() < 1e-12


@pytest.mark.parametrize("m,n", [(3, 2), (2, 3), (4, 2)])
def test_system_matches_brute_force_enumeration(rng, m, n):
    shape = PartyShape(m, n)
    e1 = random_pure(shape, rng)
    e2 = random_orthogonal_to(e1, rng)
    system = build_system(RankTwoState(shape, 0.7, e1, e2))
    keys, pairs = brute_force_system(e1, e2)
    assert system_keys(system) == keys
    assert len(system) == len(keys)
    if (m, n) == (3, 2):
        assert pairs == 3 * (28 + 8)


def test_system_matches_brute_force_on_ghz_input():
    e2 = ghz_state(S32)
    e1 = PureState.from_vector(basis(0, 0, 0).amplitudes - basis(1, 1, 1).amplitudes, S32)
    system = build_system(RankTwoState(S32, 0.3, e1, e2))
    keys, _ = brute_force_system(e1, e2)
    assert system_keys(system) == keys


def test_entries_recompute_exactly(rng):
    shape = PartyShape(3, 3)
    e1 = random_pure(shape, rng)
    e2 = random_orthogonal_to(e1, rng)
    system = build_system(RankTwoState(shape, 0.7, e1, e2))
    for entry in system.entries[::7]:
        coeffs = entry_coefficients(e1, e2, entry.cut, *entry.idx_pair)
        np.testing.assert_allclose(coeffs, (entry.alpha, entry.beta, entry.gamma),
                                   rtol=1e-15, atol=1e-16)


def test_three_party_index_formula_fixture(rng):
    """The three index swaps (k<->m, j<->q, i<->p) of the three-party notation
    coincide with the cuts isolating party 2, 1 and 0."""
    shape = PartyShape(3, 2)
    e1 = random_pure(shape, rng)
    e2 = random_orthogonal_to(e1, rng)
    a1, a2 = e1.tensor, e2.tensor

    def swaps(s, i, j, k, p, q, m):
        # returns (ijk, pqm, first swapped, second swapped) per label s
        if s == 1:
            return (i, j, k), (p, q, m), (i, j, m), (p, q, k)
        if s == 2:
            return (i, j, k), (p, q, m), (i, q, k), (p, j, m)
        return (i, j, k), (p, q, m), (p, j, k), (i, q, m)

    cut_of = {1: (2,), 2: (1,), 3: (1, 2)}
    system = build_system(RankTwoState(shape, 0.7, e1, e2))
    by_cut = {}
    for entry in system.entries:
        by_cut.setdefault(entry.cut.t_positions, set()).add(
            normalized_key((entry.alpha, entry.beta, entry.gamma)))
    for s in (1, 2, 3):
        keys = set()
        for idx in itertools.product(range(2), repeat=6):
            x, y, u, v = swaps(s, *idx)
            alpha = a2[x] * a2[y] - a2[u] * a2[v]
            beta = a2[x] * a1[y] + a1[x] * a2[y] - a2[u] * a1[v] - a1[u] * a2[v]
            gamma = a1[x] * a1[y] - a1[u] * a1[v]
            if max(abs(alpha), abs(beta), abs(gamma)) >= TOL:
                keys.add(normalized_key((alpha, beta, gamma)))
        assert keys == by_cut[cut_of[s]]


def test_index_pair_symmetries(rng):
    """Exchanging the two multi-indices leaves a minor alone; exchanging only the
    S parts negates all three coefficients.  Exhaustive on three qubits."""
    e1 = random_pure(S32, rng)
    e2 = random_orthogonal_to(e1, rng)
    for cut in canonical_bipartitions(3):
        for i, j in itertools.product(np.ndindex(2, 2, 2), repeat=2):
            base = np.array(entry_coefficients(e1, e2, cut, i, j))
            np.testing.assert_allclose(entry_coefficients(e1, e2, cut, j, i), base, atol=1e-15)
            i2, j2 = list(i), list(j)
            for k in cut.s_positions:
                i2[k], j2[k] = j[k], i[k]
            swapped = np.array(entry_coefficients(e1, e2, cut, i2, j2))
            np.testing.assert_allclose(swapped, -base, atol=1e-15)


def test_roots_mark_product_vectors(rng):
    """lam solves the system iff E1 + lam E2 is a product state."""
    shape = PartyShape(3, 3)
    state = rank_two_extract(product_mixture(shape, rng))
    system = build_system(state)
    mu1, mu2 = solve_quadratic(*system.reference_coefficients())
    for mu in (mu1, mu2):
        vec = PureState.from_vector(state.e1.amplitudes + mu * state.e2.amplitudes, shape)
        assert is_pure_separable(vec)
        assert np.abs(system.evaluate(mu)).max() < 1e-12
    vec = PureState.from_vector(state.e1.amplitudes + 0.3 * state.e2.amplitudes, shape)
    assert not is_pure_separable(vec)


# --- quadratic solver ------------------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(st.complex_numbers(min_magnitude=1e-6, max_magnitude=1e6, allow_nan=False),
       st.complex_numbers(min_magnitude=1e-6, max_magnitude=1e6, allow_nan=False),
       st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False))
def test_solve_quadratic_recovers_roots(r1, r2, a):
    # near a double root any solver loses half the digits; keep the roots apart
    assume(abs(r1 - r2) >= 1e-2 * max(abs(r1), abs(r2)))
    b, c = -a * (r1 + r2), a * r1 * r2
    x1, x2 = solve_quadratic(a, b, c)
    if abs(x1 - r1) + abs(x2 - r2) > abs(x1 - r2) + abs(x2 - r1):
        x1, x2 = x2, x1
    assert abs(x1 - r1) <= 1e-10 * abs(r1)
    assert abs(x2 - r2) <= 1e-10 * abs(r2)


def test_solve_quadratic_small_root_accuracy():
    # x^2 - (1e8 + 1e-8) x + 1: naive formula loses the 1e-8 root entirely
    x1, x2 = solve_quadratic(1.0, -(1e8 + 1e-8), 1.0)
    assert abs(min(x1, x2, key=abs) - 1e-8) < 1e-20


# --- decomposition ---------------------------------------------------------------------

def test_symmetric_real_roots():
    p, p_prime = mixture_weights(RootPair(-1.0, 1.0, 0.0))
    assert p == pytest.approx(0.5)
    assert p_prime == pytest.approx(0.5)


@pytest.mark.parametrize("t", [0.3, 1.0, 2.5])
def test_imaginary_roots_weights(t):
    p, p_prime = mixture_weights(RootPair(-1j * t, 1j * t, np.pi))
    assert p == pytest.approx(1 / (1 + t ** 2))
    assert abs(p_prime.imag) < 1e-15
    assert 0 <= p_prime.real <= 1


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_weights_reconstruct_mixture(seed):
    """Oracle: with mu2 = -t mu1 (t > 0) and the implied p, the two normalized
    vectors E1 + mu E2 mix back into p |E1><E1| + (1 - p) |E2><E2|."""
    rng = np.random.default_rng(seed)
    e1 = random_pure(S32, rng)
    e2 = random_orthogonal_to(e1, rng)
    mu1 = complex(rng.normal(), rng.normal())
    mu2 = -rng.uniform(0.05, 5) * mu1
    z = mu2 - mu1
    roots = RootPair(mu1, mu2, float(np.angle(z / np.conj(z))))
    p, p_prime = mixture_weights(roots)
    assert abs(p.imag) < 1e-12 and abs(p_prime.imag) < 1e-12
    assert 0 < p.real < 1 and 0 <= p_prime.real <= 1
    state = RankTwoState(S32, p.real, e1, e2)
    weight, v1, v2 = construct_decomposition(state, roots)
    rebuilt = weight * v1.projector() + (1 - weight) * v2.projector()
    assert np.abs(rebuilt - state.density()).max() < 1e-10


def test_inconsistent_roots_rejected():
    e1, e2 = basis(0, 0, 0), basis(1, 1, 1)
    with pytest.raises(InconsistentRoots):
        construct_decomposition(RankTwoState(S32, 0.8, e1, e2), RootPair(-1.0, 1.0, 0.0))
    with pytest.raises(InconsistentRoots):
        construct_decomposition(RankTwoState(S32, 0.5, e1, e2), RootPair(1.0, 1.0, 0.0))


# --- decisions -------------------------------------------------------------------------

def assert_certificate(verdict, rho, tol=1e-8):
    dec = verdict.decomposition
    assert dec is not None
    assert np.abs(dec.density() - rho).max() < tol
    assert dec.factors1 is not None and dec.factors2 is not None
    assert is_pure_separable(dec.e1_prime) and is_pure_separable(dec.e2_prime)


def test_half_half_real_product_states():
    u = PureState.from_vector(np.kron(np.kron([1, 1], [1, 0]), [1, 2]), S32)
    v = PureState.from_vector(np.kron(np.kron([1, -1], [0, 1]), [2, -1]), S32)
    from rank2sep import assemble
    state = rank_two_extract(assemble(0.5, u, v))
    for verdict in (decide(state), decide_real(state)):
        assert verdict.is_separable
        assert_certificate(verdict, state.density())
    real = decide_real(state)
    if real.decision is Decision.SEPARABLE:
        assert real.witness["delta1"] < 1e-16 or real.witness["delta2"] < 1e-16


def test_ghz_minus_plus_mixture():
    e2 = ghz_state(S32)
    e1 = PureState.from_vector(basis(0, 0, 0).amplitudes - basis(1, 1, 1).amplitudes, S32)
    for p in (0.3, 0.45, 0.7):
        state = RankTwoState(S32, p, e1, e2)
        assert decide_real(state).decision is Decision.ENTANGLED
        assert decide(state).decision is Decision.ENTANGLED
    # at p = 1/2 the mixture is (|000><000| + |111><111|) / 2
    state = RankTwoState(S32, 0.5, e1, e2)
    for verdict in (decide(state), decide_real(state)):
        assert verdict.decision is Decision.SEPARABLE
        assert_certificate(verdict, state.density())
        assert verdict.decomposition.p_prime == pytest.approx(0.5)


def test_both_eigenvectors_product():
    state = RankTwoState(S32, 0.65, basis(0, 1, 0), basis(1, 0, 1))
    for verdict in (decide(state), decide_real(state)):
        assert verdict.decision is Decision.BOTH_EIGENVECTORS_SEPARABLE
        assert_certificate(verdict, state.density())


def test_product_e2_with_entangled_e1_is_entangled(rng):
    e2 = basis(0, 0, 0)
    e1 = random_orthogonal_to(e2, rng)
    verdict = decide(RankTwoState(S32, 0.6, e1, e2))
    assert verdict.decision is Decision.ENTANGLED
    assert verdict.failed == "e2_separable_e1_entangled"


@pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
def test_product_e1_with_entangled_e2_is_entangled(rng, p):
    e1 = basis(0, 0, 1)
    e2 = random_orthogonal_to(e1, rng)
    state = RankTwoState(S32, p, e1, e2)
    assert concurrence_ratio(state) == pytest.approx(0, abs=1e-15)
    assert decide(state).decision is Decision.ENTANGLED


def test_real_branch_rejects_complex_input(rng):
    e1 = random_pure(S32, rng)
    with pytest.raises(ComplexInput):
        decide_real(RankTwoState(S32, 0.6, e1, random_orthogonal_to(e1, rng)))


@pytest.mark.parametrize("m,n", [(3, 2), (3, 3), (4, 2)])
def test_decide_on_product_mixtures(rng, m, n):
    shape = PartyShape(m, n)
    for _ in range(15):
        rho = product_mixture(shape, rng)
        state = rank_two_extract(rho)
        verdict = decide(state)
        assert verdict.decision is Decision.SEPARABLE, verdict.witness
        assert_certificate(verdict, rho.entries)


@pytest.mark.parametrize("m,n", [(3, 2), (3, 3), (4, 2)])
def test_branches_agree_on_real_inputs(rng, m, n):
    shape = PartyShape(m, n)
    for _ in range(10):
        states = [rank_two_extract(product_mixture(shape, rng, real=True)),
                  ghz_orthogonal(shape, rng.uniform(0.05, 0.95), rng, real=True)]
        for state in states:
            assert decide(state).decision is decide_real(state).decision


def test_degenerate_weight_is_basis_independent(rng):
    """At p = 1/2 any orthonormal basis of the range is an eigenbasis; the verdict
    must not depend on which one is used."""
    shape = PartyShape(3, 2)
    u = random_product(shape, rng)
    v = random_product(shape, rng)
    v = PureState.from_vector(v.amplitudes - np.vdot(u.amplitudes, v.amplitudes) * u.amplitudes,
                              shape)
    # v is orthogonal to u but generally not a product state
    for angle in np.linspace(0, np.pi, 7):
        c, s = np.cos(angle), np.sin(angle) * np.exp(0.4j)
        e1 = PureState.from_vector(c * u.amplitudes + s * v.amplitudes, shape)
        e2 = PureState.from_vector(-np.conj(s) * u.amplitudes + c * v.amplitudes, shape)
        first = decide(RankTwoState(shape, 0.5, e1, e2))
        assert first.decision is decide(RankTwoState(shape, 0.5, e1, e2)).decision
    verdicts = set()
    w = random_product(shape, rng)
    w = PureState.from_vector(w.amplitudes - np.vdot(u.amplitudes, w.amplitudes) * u.amplitudes,
                              shape)
    for angle in np.linspace(0.1, np.pi, 5):
        c, s = np.cos(angle), np.sin(angle)
        e1 = PureState.from_vector(c * u.amplitudes + s * w.amplitudes, shape)
        e2 = PureState.from_vector(-s * u.amplitudes + c * w.amplitudes, shape)
        verdicts.add(decide(RankTwoState(shape, 0.5, e1, e2)).is_separable)
    assert len(verdicts) == 1


def test_orthogonal_products_at_half_weight_are_separable_in_any_basis(rng):
    shape = PartyShape(3, 2)
    u, v = basis(0, 0, 0), basis(1, 0, 1)
    for angle in np.linspace(0.1, 1.5, 6):
        c, s = np.cos(angle), np.sin(angle) * np.exp(1.1j)
        e1 = PureState.from_vector(c * u.amplitudes + s * v.amplitudes, shape)
        e2 = PureState.from_vector(-np.conj(s) * u.amplitudes + c * v.amplitudes, shape)
        state = RankTwoState(shape, 0.5, e1, e2)
        verdict = decide(state)
        assert verdict.is_separable
        assert_certificate(verdict, state.density())


# --- corollary and concurrence ratio ---------------------------------------------------

@pytest.mark.parametrize("n", [2, 3])
def test_corollary_bound_check(rng, n):
    shape = PartyShape(3, n)
    e1 = random_orthogonal_to(ghz_state(shape), rng)
    assert corollary_bound_check(e1, 0.3)
    assert not corollary_bound_check(e1, 0.5)
    assert not corollary_bound_check(e1, 0.7)
    with pytest.raises(NotOrthogonalToGHZ):
        corollary_bound_check(random_pure(shape, rng), 0.3)
    with pytest.raises(ValueError):
        corollary_bound_check(e1, 1.0)


def test_concurrence_ratio_ghz_pair():
    e1 = PureState.from_vector(basis(0, 0, 0).amplitudes - basis(1, 1, 1).amplitudes, S32)
    state = RankTwoState(S32, 0.3, e1, ghz_state(S32))
    assert concurrence_ratio(state) == pytest.approx(1.0, abs=1e-12)


def test_concurrence_ratio_requires_entangled_e2():
    with pytest.raises(E2Separable):
        concurrence_ratio(RankTwoState(S32, 0.6, basis(0, 0, 0), basis(1, 1, 1)))


@pytest.mark.parametrize("m,n", [(3, 2), (3, 3)])
def test_concurrence_ratio_on_separable_states(rng, m, n):
    shape = PartyShape(m, n)
    for _ in range(10):
        state = rank_two_extract(product_mixture(shape, rng))
        if decide(state).decision is Decision.SEPARABLE:
            assert concurrence_ratio(state) == pytest.approx((1 - state.p) / state.p, abs=1e-6)


@pytest.mark.parametrize("n", [2, 3])
def test_ghz_with_small_weight_is_entangled(rng, n):
    shape = PartyShape(3, n)
    for p in (0.05, 0.25, 0.49):
        for _ in range(5):
            verdict = decide(ghz_orthogonal(shape, p, rng))
            assert verdict.decision is Decision.ENTANGLED
            assert verdict.failed is not None


def test_cut_object_identity():
    system = build_system(RankTwoState(S32, 0.7, ghz_state(S32), PureState.from_vector(
        basis(0, 0, 0).amplitudes - basis(1, 1, 1).amplitudes, S32)))
    assert all(isinstance(e.cut, Bipartition) and e.cut.is_canonical for e in system.entries)
