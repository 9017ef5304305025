import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from copchan.operator_core import (
    CYCLE_X, CapExceededError, DimensionError, PermutationOperator, all_permutations, commutator,
    compose, cycles, haar_unitary, inverse, is_density_matrix, make_basis, partial_trace,
    permutation_matrix, random_density_matrix, random_hermitian, trace_product_permuted,
    transposition,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0 + 0j, -1.0])


def test_qubit_basis_is_pauli():
    b = make_basis(2)
    for got, want in zip(b.lambdas, [np.eye(2), SX, SY, SZ]):
        assert np.abs(got - want).max() == 0


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_basis_orthogonality_and_identity(d):
    b = make_basis(d)
    assert b.lambdas.shape == (d * d, d, d)
    assert np.abs(b.lambdas[0] - np.eye(d)).max() == 0
    gram = np.einsum("mij,nji->mn", b.lambdas, b.lambdas)
    assert np.abs(gram - d * np.eye(d * d)).max() < 1e-12
    for lam in b.lambdas:
        assert np.abs(lam - lam.conj().T).max() < 1e-12


def test_qubit_structure_constants_by_hand():
    # -i Tr([s1, s2] s3) / 4 with [s1, s2] = 2i s3 and Tr(s3 s3) = 2
    by_hand = (-1j * np.trace(commutator(SX, SY) @ SZ) / 4).real
    assert by_hand == pytest.approx(1.0)
    f = make_basis(2).f
    for perm in itertools.permutations([1, 2, 3]):
        sign = np.linalg.det(np.eye(3)[[p - 1 for p in perm]])
        assert f[perm] == pytest.approx(sign * by_hand)
    mask = np.ones_like(f, dtype=bool)
    for perm in itertools.permutations([1, 2, 3]):
        mask[perm] = False
    assert np.abs(f[mask]).max() == 0


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_structure_constant_identities(d):
    f = make_basis(d).f
    assert np.abs(f + f.transpose(1, 0, 2)).max() < 1e-12
    assert np.abs(f + f.transpose(0, 2, 1)).max() < 1e-12
    assert np.abs(f - f.transpose(1, 2, 0)).max() < 1e-12
    assert np.abs(f[0]).max() == 0 and np.abs(f[:, 0]).max() == 0 and np.abs(f[:, :, 0]).max() == 0
    contraction = np.einsum("mnt,mns->ts", f, f)
    expected = 2 * np.eye(d * d)
    expected[0, 0] = 0
    assert np.abs(contraction - expected).max() < 1e-10


def test_qutrit_contraction_value():
    f = make_basis(3).f
    assert np.einsum("mn,mn->", f[:, :, 1], f[:, :, 1]) == pytest.approx(2.0, abs=1e-12)


def test_qubit_completeness_relation():
    f = make_basis(2).f[1:, 1:, 1:]
    lhs = np.einsum("mnt,abt->mnab", f, f)
    eye = np.eye(3)
    rhs = np.einsum("ma,nb->mnab", eye, eye) - np.einsum("mb,na->mnab", eye, eye)
    assert np.abs(lhs - rhs).max() < 1e-12


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 5))
def test_basis_reconstructs_hermitian(seed, d):
    m = random_hermitian(d, np.random.default_rng(seed))
    b = make_basis(d)
    assert np.abs(b.reconstruct(b.coefficients(m)) - m).max() < 1e-12


def test_basis_rejects_small_dimension():
    with pytest.raises(DimensionError):
        make_basis(1)


def test_commutator_examples():
    assert np.abs(commutator(SX, SX)).max() == 0
    assert np.abs(commutator(SX, SY) - 2j * SZ).max() < 1e-15
    a = np.diag([1.0, 2.0, 3.0])
    assert np.abs(commutator(a, np.diag([4.0, -1.0, 7.0]))).max() == 0


def test_commutator_of_hermitians_is_antihermitian(rng):
    a, b = random_hermitian(4, rng), random_hermitian(4, rng)
    c = commutator(a, b)
    assert np.abs(c + c.conj().T).max() < 1e-12


def test_commutator_dimension_mismatch():
    with pytest.raises(DimensionError):
        commutator(np.eye(2), np.eye(3))


def test_permutation_matrix_examples():
    assert np.abs(permutation_matrix(PermutationOperator(2, (0, 1, 2, 3))) - np.eye(16)).max() == 0
    assert np.trace(permutation_matrix(PermutationOperator(2, transposition(1, 2)))) == 8
    assert np.trace(permutation_matrix(PermutationOperator(2, CYCLE_X))) == 2


def test_permutation_cap():
    with pytest.raises(CapExceededError, match="trace_product_permuted"):
        permutation_matrix(PermutationOperator(4, CYCLE_X))
    with pytest.raises(CapExceededError):
        permutation_matrix(PermutationOperator(3, CYCLE_X), cap_d=2)


def test_permutation_cap_from_env(monkeypatch):
    monkeypatch.setenv("COPCHAN_CAP_D", "2")
    with pytest.raises(CapExceededError):
        permutation_matrix(PermutationOperator(3, CYCLE_X))


@pytest.mark.parametrize("d", [2, 3])
def test_permutation_group_laws(d):
    perms = all_permutations()
    mats = {p: permutation_matrix(PermutationOperator(d, p)) for p in perms}
    for s in perms:
        assert np.trace(mats[s]) == d ** len(cycles(s))
        assert np.abs(mats[s].T - mats[inverse(s)]).max() == 0
        assert PermutationOperator(d, s).trace() == d ** len(cycles(s))
    for s, t in itertools.product(perms[::5], perms[::3]):
        assert np.abs(mats[s] @ mats[t] - mats[compose(s, t)]).max() == 0


def test_permutation_operator_algebra():
    a = PermutationOperator(2, transposition(1, 2))
    b = PermutationOperator(2, transposition(2, 3))
    assert (a @ b).perm == compose(a.perm, b.perm)
    assert (a @ b).dagger.perm == inverse((a @ b).perm)


def test_cycle_trace_matches_materialized_for_all_perms(rng):
    ms = [rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)) for _ in range(4)]
    big = ms[0]
    for m in ms[1:]:
        big = np.kron(big, m)
    for p in all_permutations():
        expected = np.trace(permutation_matrix(PermutationOperator(2, p)) @ big)
        assert abs(trace_product_permuted(ms, p) - expected) < 1e-12


def test_cycle_trace_examples(rng):
    rho = random_density_matrix(3, rng)
    want = np.trace(np.linalg.matrix_power(rho, 4))
    assert abs(trace_product_permuted([rho] * 4, CYCLE_X) - want) < 1e-14
    for p in all_permutations():
        got = trace_product_permuted([np.eye(3) / 3] * 4, p)
        assert abs(got - 3.0 ** (len(cycles(p)) - 4)) < 1e-14
    hs = [random_hermitian(2, rng) for _ in range(4)]
    p = compose(transposition(1, 2), transposition(3, 4))
    want = np.trace(hs[0] @ hs[1]) * np.trace(hs[2] @ hs[3])
    assert abs(trace_product_permuted(hs, p) - want) < 1e-12


def test_cycle_x_orders_the_product(rng):
    # With V_s|i_k> placed in slot s(k), X = V12 V23 V34 reverses the order;
    # X^dagger gives Tr(m1 m2 m3 m4).
    ms = [rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)) for _ in range(4)]
    forward = np.trace(ms[0] @ ms[1] @ ms[2] @ ms[3])
    assert abs(trace_product_permuted(ms, inverse(CYCLE_X)) - forward) < 1e-12
    assert abs(trace_product_permuted(ms, CYCLE_X) - np.trace(ms[0] @ ms[3] @ ms[2] @ ms[1])) < 1e-12


def test_trace_product_dimension_mismatch():
    with pytest.raises(DimensionError):
        trace_product_permuted([np.eye(2)] * 3 + [np.eye(3)], CYCLE_X)


def test_haar_unitary_is_unitary(rng):
    u = haar_unitary(5, rng)
    assert np.abs(u @ u.conj().T - np.eye(5)).max() < 1e-12


def test_partial_trace_of_product(rng):
    a, b = random_density_matrix(2, rng), random_density_matrix(3, rng)
    ab = np.kron(a, b)
    assert np.abs(partial_trace(ab, (2, 3), [0]) - a).max() < 1e-14
    assert np.abs(partial_trace(ab, (2, 3), [1]) - b).max() < 1e-14


def test_density_matrix_validity(rng):
    assert is_density_matrix(random_density_matrix(3, rng))
    assert not is_density_matrix(np.diag([1.2, -0.2]))
    assert not is_density_matrix(np.array([[0.5, 1], [0, 0.5]]))
