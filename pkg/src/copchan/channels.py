"""Quantum channels in Choi and Kraus form, validity checks and a small zoo.

The Choi matrix uses the unnormalized maximally entangled vector
``|Phi> = sum_n |n n>`` with the system (output) factor first::

    R = (Lambda (x) I)(|Phi><Phi|) = sum_{n,m} Lambda(|n><m|) (x) |n><m|

so ``Tr R = d`` and ``Lambda(rho) = Tr_B[R (I (x) rho^T)]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .operator_core import (
    ALGEBRA_TOL, SPECTRAL_TOL, CopchanError, DimensionError, as_square, dagger,
    haar_unitary, make_basis,
)

KRAUS_EIG_FLOOR = 1e-12


class ChannelError(CopchanError, ValueError):
    """Invalid channel parameters or an impossible conversion."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """A linear, Hermiticity-preserving map on d x d matrices.

    ``choi`` is always present.  ``kraus`` is kept when the channel was built
    from Kraus operators; otherwise it is extracted on demand for CP maps.
    """

    d: int
    choi: np.ndarray = field(repr=False)
    kraus: tuple[np.ndarray, ...] | None = field(default=None, repr=False)
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        d = self.d
        if self.choi.shape != (d * d, d * d):
            raise DimensionError(f"Choi matrix of shape {self.choi.shape} for d={d}")
        object.__setattr__(self, "choi", _frozen(self.choi))
        if self.kraus is not None:
            object.__setattr__(self, "kraus", tuple(_frozen(k) for k in self.kraus))

    # -- action -------------------------------------------------------------

    def _choi_tensor(self) -> np.ndarray:
        d = self.d
        return self.choi.reshape(d, d, d, d)

    def apply_choi(self, rho) -> np.ndarray:
        rho = self._check_input(rho)
        return np.einsum("injm,...nm->...ij", self._choi_tensor(), rho)

    def apply_kraus(self, rho) -> np.ndarray:
        rho = self._check_input(rho)
        ks = np.array(self.kraus_operators())
        return np.einsum("kij,...jl,kml->...im", ks, rho, ks.conj())

    def apply(self, rho) -> np.ndarray:
        """Channel output; uses the Kraus set when one was supplied."""
        if self.kraus is not None:
            return self.apply_kraus(rho)
        return self.apply_choi(rho)

    __call__ = apply

    def _check_input(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if rho.shape[-2:] != (self.d, self.d):
            raise DimensionError(f"input of shape {rho.shape} for a d={self.d} channel")
        return rho

    def basis_images(self) -> np.ndarray:
        """``Lambda(l_mu)`` for the standard basis, shape ``(d*d, d, d)``."""
        return self.apply_choi(make_basis(self.d).lambdas)

    # -- validity -----------------------------------------------------------

    def trace_preservation_error(self) -> float:
        t = self._choi_tensor()
        return float(np.abs(np.einsum("inim->nm", t) - np.eye(self.d)).max())

    def is_trace_preserving(self, tol: float = SPECTRAL_TOL) -> bool:
        return self.trace_preservation_error() <= tol

    def min_choi_eigenvalue(self) -> float:
        r = self.choi
        return float(np.linalg.eigvalsh((r + dagger(r)) / 2)[0])

    def is_completely_positive(self, tol: float = SPECTRAL_TOL) -> bool:
        return self.min_choi_eigenvalue() >= -tol

    def is_unital(self, tol: float = SPECTRAL_TOL) -> bool:
        return np.abs(self.apply_choi(np.eye(self.d)) - np.eye(self.d)).max() <= tol

    def kraus_operators(self) -> tuple[np.ndarray, ...]:
        if self.kraus is not None:
            return self.kraus
        return choi_to_kraus(self.choi, self.d)


# ---------------------------------------------------------------------------
# Conversions
# ---------------------------------------------------------------------------

def kraus_to_choi(kraus: Sequence[np.ndarray]) -> np.ndarray:
    ks = np.array([as_square(k, "Kraus operator") for k in kraus])
    vecs = ks.reshape(len(ks), -1)
    return vecs.T @ vecs.conj()


def choi_to_kraus(choi, d: int, floor: float = KRAUS_EIG_FLOOR) -> tuple[np.ndarray, ...]:
    """Canonical Kraus set from the Choi eigendecomposition.

    Eigenvalues below ``floor`` are dropped; a clearly negative eigenvalue
    means the map is not CP and raises.
    """
    r = np.asarray(choi, dtype=complex)
    w, v = np.linalg.eigh((r + dagger(r)) / 2)
    if w[0] < -SPECTRAL_TOL:
        raise ChannelError(f"map is not completely positive (Choi eigenvalue {w[0]:.3e})")
    keep = w > floor
    return tuple(np.sqrt(wk) * v[:, k].reshape(d, d) for k, wk in zip(np.flatnonzero(keep), w[keep]))


def choi_from_map(fn: Callable[[np.ndarray], np.ndarray], d: int) -> np.ndarray:
    r = np.zeros((d, d, d, d), dtype=complex)
    for n in range(d):
        for m in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[n, m] = 1
            r[:, n, :, m] = fn(e)
    return r.reshape(d * d, d * d)


def choi_state(ch: QuantumChannel) -> np.ndarray:
    """Unit-trace Choi state ``R / d``."""
    return np.array(ch.choi) / ch.d


def from_kraus(kraus, name: str = "kraus", params: dict | None = None) -> QuantumChannel:
    ks = [as_square(k, "Kraus operator") for k in kraus]
    if not ks:
        raise ChannelError("empty Kraus set")
    d = ks[0].shape[0]
    if any(k.shape != (d, d) for k in ks):
        raise DimensionError("Kraus operators of different shapes")
    return QuantumChannel(d, kraus_to_choi(ks), tuple(ks), name, dict(params or {}))


def from_choi(choi, name: str = "choi", params: dict | None = None) -> QuantumChannel:
    r = as_square(choi, "Choi matrix")
    d = int(round(np.sqrt(r.shape[0])))
    if d * d != r.shape[0]:
        raise DimensionError(f"Choi matrix size {r.shape[0]} is not a square number")
    return QuantumChannel(d, r, None, name, dict(params or {}))


def from_map(fn, d: int, name: str, params: dict | None = None) -> QuantumChannel:
    return QuantumChannel(d, choi_from_map(fn, d), None, name, dict(params or {}))


# ---------------------------------------------------------------------------
# Zoo
# ---------------------------------------------------------------------------

def identity(d: int) -> QuantumChannel:
    return from_kraus([np.eye(d)], name="identity", params={})


def unitary(u) -> QuantumChannel:
    u = as_square(u, "unitary")
    err = np.abs(u @ dagger(u) - np.eye(len(u))).max()
    if err > 1e-10:
        raise ChannelError(f"matrix is not unitary (max|UU^dag - I| = {err:.3e})")
    return from_kraus([u], name="unitary", params={"U": u})


def cloning(d: int, c: float) -> QuantumChannel:
    """``rho -> (I Tr rho + c rho) / (d + c)`` for ``0 <= c <= 1``."""
    if not 0 <= c <= 1:
        raise ChannelError(f"cloning parameter c must lie in [0, 1], got {c}")
    eye = np.eye(d)
    return from_map(lambda r: (eye * np.trace(r) + c * r) / (d + c), d, "cloning", {"c": c})


def transpose_cloning(d: int, c: float) -> QuantumChannel:
    """``rho -> (I Tr rho + c rho^T) / (d + c)`` for ``|c| <= 1``."""
    if not -1 <= c <= 1:
        raise ChannelError(f"transpose-cloning parameter needs |c| <= 1, got {c}")
    eye = np.eye(d)
    return from_map(lambda r: (eye * np.trace(r) + c * r.T) / (d + c), d,
                    "transpose_cloning", {"c": c})


def semi_classical(povm, states) -> QuantumChannel:
    """Measure-and-prepare map ``rho -> sum_k Tr(M_k rho) |phi_k><phi_k|``.

    ``states`` must be orthonormal vectors, one per POVM element.
    """
    ms = [as_square(m, "POVM element") for m in povm]
    phis = [np.asarray(v, dtype=complex).reshape(-1) for v in states]
    if not ms or len(ms) != len(phis):
        raise ChannelError(f"{len(ms)} POVM elements for {len(phis)} output states")
    d = ms[0].shape[0]
    if any(m.shape != (d, d) for m in ms) or any(v.shape != (d,) for v in phis):
        raise DimensionError("POVM elements and states must all be of dimension d")
    if len(phis) > d:
        raise ChannelError(f"{len(phis)} orthonormal output states do not fit in dimension {d}")
    gram = np.array([[np.vdot(a, b) for b in phis] for a in phis])
    if np.abs(gram - np.eye(len(phis))).max() > 1e-10:
        raise ChannelError("output states are not orthonormal")
    for k, m in enumerate(ms):
        if np.abs(m - dagger(m)).max() > 1e-10 or np.linalg.eigvalsh(m)[0] < -1e-10:
            raise ChannelError(f"POVM element {k} is not positive semidefinite")
    err = np.abs(sum(ms) - np.eye(d)).max()
    if err > 1e-10:
        raise ChannelError(f"POVM is incomplete (max|sum M_k - I| = {err:.3e})")
    projs = [np.outer(v, v.conj()) for v in phis]
    return from_map(lambda r: sum(np.trace(m @ r) * p for m, p in zip(ms, projs)), d,
                    "semi_classical", {"povm": ms, "states": phis})


def hamiltonian(h) -> QuantumChannel:
    """``rho -> (I Tr rho - i[H, rho]) / d`` for traceless Hermitian ``H``.

    Completely positive only when ``Tr H^2 <= 1/d``; larger ``H`` is accepted
    and yields a trace-preserving but non-CP map.
    """
    h = as_square(h, "H")
    d = len(h)
    if np.abs(h - dagger(h)).max() > ALGEBRA_TOL:
        raise ChannelError("H must be Hermitian")
    if abs(np.trace(h)) > ALGEBRA_TOL:
        raise ChannelError(f"H must be traceless, Tr H = {np.trace(h):.3e}")
    eye = np.eye(d)
    return from_map(lambda r: (eye * np.trace(r) - 1j * (h @ r - r @ h)) / d, d,
                    "hamiltonian", {"H": h})


def mixture(p: float, ch1: QuantumChannel, ch2: QuantumChannel) -> QuantumChannel:
    """``p ch1 + (1 - p) ch2``."""
    if not 0 <= p <= 1:
        raise ChannelError(f"mixing weight p must lie in [0, 1], got {p}")
    if ch1.d != ch2.d:
        raise DimensionError(f"mixing channels of dimension {ch1.d} and {ch2.d}")
    if p == 1:
        return ch1
    if p == 0:
        return ch2
    kraus = None
    if ch1.kraus is not None and ch2.kraus is not None:
        kraus = tuple(np.sqrt(p) * k for k in ch1.kraus) + tuple(np.sqrt(1 - p) * k for k in ch2.kraus)
    return QuantumChannel(ch1.d, p * ch1.choi + (1 - p) * ch2.choi, kraus, "mixture",
                          {"p": p, "ch1": ch1, "ch2": ch2})


def amplitude_damping(gamma: float) -> QuantumChannel:
    if not 0 <= gamma <= 1:
        raise ChannelError(f"damping probability must lie in [0, 1], got {gamma}")
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]])
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]])
    return from_kraus([k0, k1], name="amplitude_damping", params={"gamma": gamma})


# ---------------------------------------------------------------------------
# Random channels for property suites
# ---------------------------------------------------------------------------

def random_channel(d: int, rng: np.random.Generator, env_dim: int | None = None) -> QuantumChannel:
    """Kraus set cut from a Haar-random isometry; environment dimension d**2 by default."""
    n = env_dim or d * d
    v = haar_unitary(d * n, rng)[:, :d]
    return from_kraus(list(v.reshape(n, d, d)), name="random")


def random_unital_qubit_channel(rng: np.random.Generator, terms: int = 4) -> QuantumChannel:
    """Random mixture of qubit unitaries (every unital qubit channel has this form)."""
    w = rng.dirichlet(np.ones(terms))
    ks = [np.sqrt(wk) * haar_unitary(2, rng) for wk in w]
    return from_kraus(ks, name="random_unital")


def random_povm(d: int, outcomes: int, rng: np.random.Generator) -> list[np.ndarray]:
    v = haar_unitary(d * outcomes, rng)[:, :d].reshape(outcomes, d, d)
    return [dagger(k) @ k for k in v]


def random_semi_classical(d: int, rng: np.random.Generator, outcomes: int | None = None) -> QuantumChannel:
    k = outcomes or d
    u = haar_unitary(d, rng)
    return semi_classical(random_povm(d, k, rng), [u[:, j] for j in range(k)])
