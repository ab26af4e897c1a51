import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twinlab import (
    DiscreteObservable,
    DimensionError,
    EventProjector,
    MixedState,
    StateVector,
    UnitaryEvolution,
    ValidationError,
    coherent_decompose,
    density_matrix,
    luders_collapse,
    partial_trace,
    schmidt_decompose,
    spectral_decompose,
    states_equal,
    tensor,
)
from twinlab.sampling import (
    haar_matrix,
    haar_unitary,
    orthonormal_complement,
    random_observable,
    random_projector,
    random_state,
)

from conftest import SQ2, ket, proj

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 10)


# --- value types ---------------------------------------------------------------


def test_state_vector_validates_norm():
    StateVector([1, 0])
    with pytest.raises(ValidationError):
        StateVector([1, 1])
    with pytest.raises(ValidationError):
        StateVector([])
    with pytest.raises(ValidationError):
        StateVector([np.nan, 0])
    # within norm tolerance is accepted
    StateVector([1 + 1e-11, 0])


def test_state_vector_is_immutable():
    s = StateVector([1, 0])
    with pytest.raises(ValueError):
        s.amplitudes[0] = 0


def test_projector_invariants():
    p = EventProjector(proj(3, 0, 2))
    assert p.rank == 2 and p.dim == 3
    with pytest.raises(ValidationError):
        EventProjector(np.array([[0, 1], [0, 0]]))  # not Hermitian
    with pytest.raises(ValidationError):
        EventProjector(np.diag([0.5, 1.0]))  # not idempotent
    with pytest.raises(ValidationError):
        EventProjector(np.ones((2, 3)))


def test_projector_range_basis_spans_range(rng):
    p = random_projector(6, 3, rng)
    q = p.range_basis
    assert q.shape == (6, 3)
    assert np.allclose(q @ q.conj().T, p.matrix, atol=1e-12)
    assert np.allclose(q.conj().T @ q, np.eye(3), atol=1e-12)


def test_observable_invariants():
    up, down = EventProjector(proj(2, 0)), EventProjector(proj(2, 1))
    o = DiscreteObservable([(1.0, up), (-1.0, down)])
    assert np.allclose(o.matrix, np.diag([1, -1]))
    with pytest.raises(ValidationError, match="distinct"):
        DiscreteObservable([(1.0, up), (1.0, down)])
    with pytest.raises(ValidationError, match="orthogonal"):
        DiscreteObservable([(1.0, up), (2.0, up), (3.0, down)])
    with pytest.raises(ValidationError, match="identity"):
        DiscreteObservable([(1.0, up)])


def test_binary_observable_drops_empty_branch():
    o = DiscreteObservable.binary(EventProjector.identity(2))
    assert o.values == (1.0,)


def test_unitary_validation_and_ops(rng):
    with pytest.raises(ValidationError):
        UnitaryEvolution(np.array([[1, 1], [0, 1]]))
    u = haar_unitary(4, rng)
    assert np.allclose((u @ u.dagger).matrix, np.eye(4), atol=1e-12)
    e = random_projector(4, 2, rng)
    moved = u.conjugate(e)
    assert moved.rank == 2


def test_mixed_state_weights():
    s0, s1 = StateVector.basis(2, 0), StateVector.basis(2, 1)
    m = MixedState([(0.25, s0), (0.75, s1)])
    assert np.allclose(m.density_matrix, np.diag([0.25, 0.75]))
    with pytest.raises(ValidationError):
        MixedState([(0.5, s0), (0.4, s1)])
    with pytest.raises(ValidationError):
        MixedState([(-0.5, s0), (1.5, s1)])


# --- luders_collapse / coherent_decompose -----------------------------------------


def test_collapse_identity_and_zero(rng):
    psi = random_state(5, rng)
    p, post = luders_collapse(psi, EventProjector.identity(5))
    assert p == pytest.approx(1.0) and states_equal(post, psi)
    p, post = luders_collapse(psi, EventProjector.zero(5))
    assert p == 0.0 and post is None


def test_collapse_singlet(singlet):
    e = EventProjector(np.kron(proj(2, 0), np.eye(2)))
    p, post = luders_collapse(singlet, e)
    # hand computation: E psi = |+-> / sqrt2
    assert p == pytest.approx(0.5, abs=1e-15)
    assert np.allclose(post.amplitudes, ket(4, 1))


def test_collapse_dimension_mismatch():
    with pytest.raises(DimensionError):
        luders_collapse(StateVector.basis(2, 0), EventProjector.identity(3))


@given(seed=seeds, dim=st.integers(2, 10))
def test_collapse_probability_two_routes(seed, dim):
    rng = np.random.default_rng(seed)
    psi = random_state(dim, rng)
    e = random_projector(dim, int(rng.integers(0, dim + 1)), rng)
    p, _ = luders_collapse(psi, e)
    assert abs(p - np.linalg.norm(e.matrix @ psi.amplitudes) ** 2) <= 1e-12


def test_coherent_decompose_examples():
    psi = StateVector(ket(2, 0, 1, coeffs=[1 / SQ2, 1 / SQ2]))
    (w1, p1), (w2, p2) = coherent_decompose(psi, EventProjector(proj(2, 0)))
    assert w1 == pytest.approx(1 / SQ2) and w2 == pytest.approx(1 / SQ2)
    assert np.allclose(p1.amplitudes, ket(2, 0)) and np.allclose(p2.amplitudes, ket(2, 1))
    (w1, p1), (w2, p2) = coherent_decompose(psi, EventProjector.identity(2))
    assert w1 == pytest.approx(1.0) and p2 is None and w2 == pytest.approx(0.0)


def test_coherent_decompose_reconstructs(rng):
    for _ in range(100):
        psi = random_state(8, rng)
        e = random_projector(8, int(rng.integers(0, 9)), rng)
        (w1, p1), (w2, p2) = coherent_decompose(psi, e)
        parts = [w * p.amplitudes for w, p in ((w1, p1), (w2, p2)) if p is not None]
        assert np.linalg.norm(sum(parts) - psi.amplitudes) <= 1e-9
        assert abs(w1**2 + w2**2 - 1) <= 1e-10


# --- spectral_decompose --------------------------------------------------------


def test_spectral_identity():
    o = spectral_decompose(np.eye(3))
    assert o.values == (1.0,) and o.projectors[0].rank == 3


def test_spectral_degenerate_diagonal():
    o = spectral_decompose(np.diag([1.0, 1.0, -1.0]))
    by_value = {round(v): p for v, p in o.branches}
    assert np.allclose(by_value[1].matrix, proj(3, 0, 1))
    assert np.allclose(by_value[-1].matrix, proj(3, 2))


def test_spectral_sigma_z():
    o = spectral_decompose(np.diag([1.0, -1.0]))
    by_value = {round(v): p for v, p in o.branches}
    assert np.allclose(by_value[1].matrix, proj(2, 0))
    assert np.allclose(by_value[-1].matrix, proj(2, 1))


def test_spectral_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        spectral_decompose(np.array([[0, 1], [0, 0]]))


def test_spectral_merges_transitive_chain():
    # 0, 0.6e-8, 1.2e-8: neighbouring gaps below 1e-8, end points 1.2e-8 apart
    o = spectral_decompose(np.diag([0.0, 0.6e-8, 1.2e-8, 1.0]))
    assert len(o) == 2


@given(seed=seeds, dim=st.integers(1, 8))
def test_spectral_reconstructs_and_is_idempotent(seed, dim):
    rng = np.random.default_rng(seed)
    o = random_observable(dim, int(rng.integers(1, dim + 1)), rng)
    h = o.matrix
    o2 = spectral_decompose(h)
    assert np.linalg.norm(o2.matrix - h) <= dim * 1e-8
    pairs = sorted(zip(o.values, o.projectors), key=lambda b: b[0])
    pairs2 = sorted(zip(o2.values, o2.projectors), key=lambda b: b[0])
    assert len(pairs) == len(pairs2)
    for (v, p), (v2, p2) in zip(pairs, pairs2):
        assert abs(v - v2) <= 1e-8
        assert np.linalg.norm(p.matrix - p2.matrix) <= 1e-9


# --- tensor / partial trace / schmidt ------------------------------------------


def test_tensor_kinds():
    i2 = EventProjector.identity(2)
    assert np.allclose(tensor(i2, i2).matrix, np.eye(4))
    plus, minus = StateVector.basis(2, 0), StateVector.basis(2, 1)
    assert np.argmax(np.abs(tensor(plus, minus).amplitudes)) == 1
    with pytest.raises(ValidationError):
        tensor(plus, i2)


def test_tensor_projector_on_singlet(singlet):
    e = tensor(EventProjector(proj(2, 0)), EventProjector.identity(2))
    assert np.linalg.norm(e.matrix @ singlet.amplitudes) ** 2 == pytest.approx(0.5)


def _partial_trace_loops(rho, da, db, keep):
    """Oracle: the defining index sums, written out."""
    if keep == "A":
        out = np.zeros((da, da), dtype=complex)
        for i in range(da):
            for k in range(da):
                out[i, k] = sum(rho[i * db + j, k * db + j] for j in range(db))
    else:
        out = np.zeros((db, db), dtype=complex)
        for j in range(db):
            for l in range(db):
                out[j, l] = sum(rho[i * db + j, i * db + l] for i in range(da))
    return out


@given(seed=seeds, da=st.integers(1, 4), db=st.integers(1, 4))
def test_partial_trace_matches_index_sums(seed, da, db):
    psi = random_state(da * db, seed)
    rho = density_matrix(psi)
    for keep in "AB":
        got = partial_trace(rho, (da, db), keep)
        assert np.allclose(got, _partial_trace_loops(rho, da, db, keep), atol=1e-13)
        assert abs(np.trace(got) - 1) <= 1e-9


def test_partial_trace_product_and_singlet(singlet, rng):
    a, b = random_state(2, rng), random_state(3, rng)
    rho = density_matrix(tensor(a, b))
    assert np.allclose(partial_trace(rho, (2, 3), "A"), density_matrix(a), atol=1e-12)
    assert np.allclose(partial_trace(rho, (2, 3), "B"), density_matrix(b), atol=1e-12)
    for keep in "AB":
        assert np.allclose(partial_trace(singlet, (2, 2), keep), np.eye(2) / 2, atol=1e-15)


def test_partial_trace_rejects_bad_input():
    with pytest.raises(ValidationError):
        partial_trace(np.eye(4), (2, 2))  # trace 4
    with pytest.raises(DimensionError):
        partial_trace(np.eye(4) / 4, (2, 3))


def test_schmidt_singlet(singlet):
    s, a, b = schmidt_decompose(singlet, (2, 2))
    assert np.allclose(s, [1 / SQ2, 1 / SQ2])
    recon = sum(s[i] * np.kron(a[:, i], b[:, i]) for i in range(2))
    assert np.allclose(recon, singlet.amplitudes)


@given(seed=seeds, da=st.integers(1, 4), db=st.integers(1, 4))
def test_schmidt_squares_are_reduced_eigenvalues(seed, da, db):
    psi = random_state(da * db, seed)
    s, _, _ = schmidt_decompose(psi, (da, db))
    eig = np.sort(np.linalg.eigvalsh(partial_trace(psi, (da, db), "A")))[::-1][: len(s)]
    assert np.allclose(s**2, eig, atol=1e-12)


def test_states_equal_literal_vs_phase():
    a = StateVector([1, 0])
    b = StateVector([-1, 0])
    assert not states_equal(a, b)
    assert states_equal(a, b, up_to_phase=True)


# --- sampling ------------------------------------------------------------------


def test_haar_dim_one_and_determinism():
    u = haar_unitary(1, 5)
    assert abs(abs(u.matrix[0, 0]) - 1) <= 1e-12
    assert np.array_equal(haar_unitary(4, 9).matrix, haar_unitary(4, 9).matrix)


def test_haar_unitarity_sweep():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(1000):
        u = haar_matrix(16, rng)
        worst = max(worst, np.linalg.norm(u.conj().T @ u - np.eye(16)))
    assert worst <= 1e-10


def test_haar_second_moment():
    # Haar oracle: E|tr U|^2 = 1 for every dim; E[U_00] = 0.  Plain QR without the
    # phase fix biases the diagonal and fails the first-moment test.
    rng = np.random.default_rng(2024)
    n = 4000
    traces = np.array([np.trace(haar_matrix(3, rng)) for _ in range(n)])
    assert abs(np.mean(np.abs(traces) ** 2) - 1.0) < 0.1
    diag = np.array([haar_matrix(3, rng)[0, 0] for _ in range(n)])
    assert abs(np.mean(diag)) < 0.05


def test_random_projector_ranks(rng):
    assert np.allclose(random_projector(4, 0, rng).matrix, 0)
    assert np.allclose(random_projector(4, 4, rng).matrix, np.eye(4), atol=1e-12)
    with pytest.raises(ValidationError):
        random_projector(4, 5, rng)
    for _ in range(50):
        r = int(rng.integers(0, 9))
        assert abs(np.trace(random_projector(8, r, rng).matrix).real - r) <= 1e-10


def test_random_observable_and_complement(rng):
    o = random_observable(6, 3, rng)
    assert len(o) == 3 and sum(p.rank for p in o.projectors) == 6
    v = random_state(5, rng).amplitudes
    q = orthonormal_complement(v, 5)
    assert q.shape == (5, 4)
    assert np.allclose(q.conj().T @ v, 0, atol=1e-12)
    assert math.isclose(np.linalg.norm(q.conj().T @ q - np.eye(4)), 0, abs_tol=1e-12)
