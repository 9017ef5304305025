import numpy as np
import pytest

from copchan import channels as chn
from copchan.discord import BipartiteState, zero_a_discord
from copchan.operator_core import DimensionError, haar_unitary, random_density_matrix, random_hermitian

SZ = np.diag([1.0, -1.0])


def test_hamiltonian_example_by_hand():
    # H = sz/2, rho = |+><+|: -i[H, rho] = sy/2, so the output is (I + sy/2)/2
    plus = np.full((2, 2), 0.5)
    ch = chn.hamiltonian(SZ / 2)
    want = np.array([[0.5, -0.25j], [0.25j, 0.5]])
    assert np.abs(ch.apply_choi(plus) - want).max() < 1e-15
    # cross-route: Kraus operators recovered from the Choi eigendecomposition
    assert ch.kraus is None
    assert np.abs(ch.apply_kraus(plus) - want).max() < 1e-12


@pytest.mark.parametrize("d", [2, 3, 4])
def test_kraus_choi_round_trip(d, rng):
    ch = chn.random_channel(d, rng)
    again = chn.from_choi(chn.kraus_to_choi(chn.choi_to_kraus(ch.choi, d)))
    assert np.abs(again.choi - ch.choi).max() < 1e-12
    rhos = np.array([random_density_matrix(d, rng) for _ in range(20)])
    assert np.abs(ch.apply_kraus(rhos) - ch.apply_choi(rhos)).max() < 1e-12
    assert np.abs(again.apply_kraus(rhos) - ch.apply_kraus(rhos)).max() < 1e-12


@pytest.mark.parametrize("d", [2, 3, 4])
def test_random_channel_is_cptp(d, rng):
    ch = chn.random_channel(d, rng)
    assert ch.is_trace_preserving() and ch.is_completely_positive()
    out = ch(random_density_matrix(d, rng))
    assert abs(np.trace(out) - 1) < 1e-12
    assert np.linalg.eigvalsh(out)[0] > -1e-12


@pytest.mark.parametrize("d", [2, 3])
def test_choi_is_basis_images(d):
    ch = chn.cloning(d, 0.4)
    r = ch.choi.reshape(d, d, d, d)
    for n in range(d):
        for m in range(d):
            e = np.zeros((d, d))
            e[n, m] = 1
            assert np.abs(r[:, n, :, m] - ch.apply_choi(e)).max() < 1e-15
    assert abs(np.trace(ch.choi) - d) < 1e-12


def test_identity_choi_is_rank_one():
    ch = chn.identity(3)
    w = np.linalg.eigvalsh(ch.choi)
    assert abs(w[-1] - 3) < 1e-12 and np.abs(w[:-1]).max() < 1e-12


def test_cloning_maximal_example(rng):
    rho = random_density_matrix(3, rng)
    assert np.abs(chn.cloning(3, 1.0)(rho) - (np.eye(3) + rho) / 4).max() < 1e-15
    assert np.abs(chn.cloning(3, 0.0)(rho) - np.eye(3) / 3).max() < 1e-15


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("c", [-1.0, -0.3, 0.0, 0.5, 1.0])
def test_transpose_cloning_is_cptp(d, c):
    ch = chn.transpose_cloning(d, c)
    assert ch.is_trace_preserving() and ch.is_completely_positive()


@pytest.mark.parametrize("d", [2, 3, 4])
def test_hamiltonian_choi_spectrum(d, rng):
    h = random_hermitian(d, rng, traceless=True) * 0.3
    t = np.trace(h @ h).real
    w = np.linalg.eigvalsh(d * chn.hamiltonian(h).choi)
    assert abs(w[0] - (1 - np.sqrt(d * t))) < 1e-12
    assert abs(w[-1] - (1 + np.sqrt(d * t))) < 1e-12


@pytest.mark.parametrize("d", [2, 3])
def test_hamiltonian_cp_boundary(d, rng):
    h = random_hermitian(d, rng, traceless=True)
    h = h / np.sqrt(d * np.trace(h @ h).real)
    assert chn.hamiltonian(h).is_completely_positive()
    assert abs(chn.hamiltonian(h).min_choi_eigenvalue()) < 1e-12
    outside = chn.hamiltonian(1.01 * h)
    assert outside.is_trace_preserving() and not outside.is_completely_positive()


def test_mixture_endpoints_and_self_mixture(rng):
    a, b = chn.random_channel(2, rng), chn.random_channel(2, rng)
    assert chn.mixture(1.0, a, b) is a
    assert chn.mixture(0.0, a, b) is b
    rho = random_density_matrix(2, rng)
    assert np.abs(chn.mixture(0.37, a, a)(rho) - a(rho)).max() < 1e-14
    m = chn.mixture(0.25, a, b)
    assert np.abs(m(rho) - (0.25 * a(rho) + 0.75 * b(rho))).max() < 1e-14
    assert np.abs(m.apply_kraus(rho) - m.apply_choi(rho)).max() < 1e-14


def test_unital_flags(rng):
    assert chn.unitary(haar_unitary(3, rng)).is_unital()
    assert chn.random_unital_qubit_channel(rng).is_unital()
    assert not chn.amplitude_damping(0.3).is_unital()


@pytest.mark.parametrize("d", [2, 3])
def test_semi_classical_choi_state_has_zero_discord(d, rng):
    ch = chn.random_semi_classical(d, rng)
    st = BipartiteState(d, d, chn.choi_state(ch))
    assert zero_a_discord(st)[0]


def test_semi_classical_fewer_outcomes(rng):
    ch = chn.random_semi_classical(3, rng, outcomes=2)
    assert ch.is_trace_preserving() and ch.is_completely_positive()


@pytest.mark.parametrize("build", [
    lambda: chn.cloning(3, 1.5),
    lambda: chn.cloning(3, -0.1),
    lambda: chn.transpose_cloning(2, 1.2),
    lambda: chn.hamiltonian(np.diag([1.0, 0.0])),
    lambda: chn.hamiltonian(np.array([[0, 1], [0, 0]])),
    lambda: chn.unitary(np.diag([1.0, 2.0])),
    lambda: chn.amplitude_damping(1.5),
    lambda: chn.mixture(1.2, chn.identity(2), chn.identity(2)),
    lambda: chn.semi_classical([np.eye(2) / 2, np.eye(2) / 4], [[1, 0], [0, 1]]),
    lambda: chn.semi_classical([np.eye(2) / 2, np.eye(2) / 2], [[1, 0], [1, 0]]),
    lambda: chn.semi_classical([np.diag([1.5, 0.5]), np.diag([-0.5, 0.5])], [[1, 0], [0, 1]]),
])
def test_invalid_parameters(build):
    with pytest.raises(chn.ChannelError):
        build()


def test_dimension_errors():
    with pytest.raises(DimensionError):
        chn.identity(2)(np.eye(3))
    with pytest.raises(DimensionError):
        chn.mixture(0.5, chn.identity(2), chn.identity(3))


def test_non_cp_choi_has_no_kraus(rng):
    h = random_hermitian(3, rng, traceless=True)
    h = 2 * h / np.sqrt(3 * np.trace(h @ h).real)
    with pytest.raises(chn.ChannelError):
        chn.hamiltonian(h).kraus_operators()
