import numpy as np
import pytest

from copchan import channels as chn
from copchan import mixture_spectrum as mix
from copchan.cop_analysis import cop_degree
from copchan.operator_core import CapExceededError, DimensionError, haar_unitary, random_hermitian


def multiplicity(report, value):
    return sum(e["multiplicity"] for e in report["eigenvalues"] if abs(e["value"] - value) < 1e-12)


def test_qubit_spectrum():
    rep = mix.spectrum(mix.build_k(2))
    assert rep["within_expected_set"]
    assert multiplicity(rep, 2.0) == 1 and multiplicity(rep, -1.0) == 8


@pytest.mark.parametrize("d", [3, 4])
def test_spectrum_structure(d):
    k = mix.build_k(d)
    rep = mix.spectrum(k)
    D = d * d - 1
    assert rep["within_expected_set"] and rep["max_deviation"] < 1e-9
    assert multiplicity(rep, 2.0) == 1
    assert multiplicity(rep, -1.0) >= D
    assert sum(e["multiplicity"] for e in rep["eigenvalues"]) == D * D


def test_k_small_entries():
    # d = 2: f is the Levi-Civita symbol, K[(m,a),(b,n)] = d_ma d_nb - d_mb d_an
    k = mix.build_k(2).matrix.reshape(3, 3, 3, 3)
    eye = np.eye(3)
    want = np.einsum("ma,nb->mabn", eye, eye) - np.einsum("mb,an->mabn", eye, eye)
    assert np.abs(k - want).max() < 1e-12


@pytest.mark.parametrize("d", [2, 3, 4])
def test_eigenvectors(d):
    m = mix.build_k(d).matrix
    psi = mix.psi_vector(d)
    assert np.abs(m @ psi - 2 * psi).max() < 1e-12
    fv = mix.f_vectors(d)
    assert np.abs(fv @ m.T + fv).max() < 1e-12


@pytest.mark.parametrize("d", [3, 4])
def test_k_squared_decomposition(d):
    assert mix.verify_k_squared_decomposition(mix.build_k(d)) < 1e-9


def test_projector_symmetry():
    pr = mix.projectors(4)
    v = pr["V"]
    assert np.abs(v @ pr["F"] + pr["F"]).max() < 1e-12
    assert np.abs(v @ pr["P"] - pr["P"]).max() < 1e-12
    assert np.abs(pr["Psi"] @ pr["E"]).max() < 1e-12


def test_projectors_undefined_for_qubits():
    with pytest.raises(DimensionError):
        mix.projectors(2)
    with pytest.raises(DimensionError):
        mix.verify_k_squared_decomposition(mix.build_k(2))


@pytest.mark.parametrize("d", [2, 3, 4])
def test_quadratic_form_psd(d):
    q = mix.quadratic_form(mix.build_k(d))
    assert np.linalg.eigvalsh((q + q.T) / 2)[0] > -1e-9


def test_k_cap():
    with pytest.raises(CapExceededError):
        mix.build_k(5)
    with pytest.raises(CapExceededError):
        mix.build_k(3, cap_d=2)


@pytest.mark.parametrize("d", [3, 4])
def test_mixture_form_matches_direct(d, rng):
    k = mix.build_k(d)
    chans = [chn.cloning(d, 0.3), chn.transpose_cloning(d, -0.5), chn.unitary(haar_unitary(d, rng)),
             chn.random_semi_classical(d, rng)]
    for ch in chans:
        for p in (0.1, 0.5, 0.9):
            direct = cop_degree(chn.mixture(p, chn.identity(d), ch))
            assert abs(mix.mixture_cop_degree(ch, p, k) - direct) < 1e-9


def test_identity_row_vanishes_for_unital(rng):
    assert np.abs(mix.channel_vector(chn.unitary(haar_unitary(3, rng))).identity_row).max() < 1e-12
    sc = chn.semi_classical([np.diag([1.0, 0, 0]), np.diag([0, 1.0, 1.0])], [[1, 0, 0], [0, 1, 0]])
    _, extra = mix.mixture_terms(sc)
    assert extra > 0.1


def test_channel_vector_trace_row(rng):
    v = mix.channel_vector(chn.random_channel(3, rng))
    assert v.trace_preservation_error() < 1e-12
    assert v.ket.shape == (64,)


def test_mixture_requires_cop(rng):
    h = random_hermitian(3, rng, traceless=True) * 0.1
    with pytest.raises(mix.HypothesisError):
        mix.mixture_cop_degree(chn.hamiltonian(h), 0.5)
    with pytest.raises(ValueError):
        mix.mixture_cop_degree(chn.identity(3), 1.0)


@pytest.mark.parametrize("c", [0.0, 0.3, 1.0])
def test_cloning_survives_identity_mixture(c):
    res = mix.identity_mixture_check(chn.cloning(3, c), 0.5)
    assert res.verdict == "cloning" and res.residual < 1e-10
    assert all(abs(h) < 1e-12 for h in res.h)


def test_other_cop_channels_break_under_identity_mixture(rng):
    for ch in (chn.unitary(haar_unitary(3, rng)), chn.random_semi_classical(3, rng),
               chn.transpose_cloning(3, 0.8)):
        res = mix.identity_mixture_check(ch, 0.5)
        assert res.verdict == "non-cloning" and res.mixture_delta > 1e-6


def test_identity_mixture_check_needs_qutrit_or_more():
    with pytest.raises(DimensionError):
        mix.identity_mixture_check(chn.identity(2), 0.5)
