"""Zero-discord test, A-side discord over projective measurements on a qubit,
and the two-qubit example where a local unital channel raises discord.

Entropies are in bits.  A projective measurement on the qubit A is the
basis ``|psi_0> = (cos t/2, e^{ip} sin t/2)``, ``|psi_1>`` orthogonal to it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .operator_core import (
    CopchanError, DimensionError, commutator, dagger, density_matrix_violations, make_basis,
    partial_trace,
)

ZERO_DISCORD_TOL = 1e-10
GRID = (64, 128)
PAULI = np.array([
    [[1, 0], [0, 1]],
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)

# Pauli coefficients of the two-qubit example; the matrix is not symmetric.
EXAMPLE_PAULI_R = np.array([
    [1, 1 / 4, -1 / 2, 1 / 4],
    [1 / 4, 2 / 5, 0, 0],
    [-1 / 6, 0, 1 / 5, 0],
    [-1 / 20, 0, 0, -1 / 5],
]) / 4
EXAMPLE_DISCORD = 0.0314231
EXAMPLE_TWIRLED_DISCORD = 0.0325923


class InvalidStateError(CopchanError, ValueError):
    """Matrix is not a valid density matrix."""


@dataclass(frozen=True, eq=False)
class BipartiteState:
    d_a: int
    d_b: int
    rho: np.ndarray = field(repr=False)
    pauli_r: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        n = self.d_a * self.d_b
        if rho.shape != (n, n):
            raise DimensionError(f"state of shape {rho.shape} for dA={self.d_a}, dB={self.d_b}")
        problems = density_matrix_violations(rho)
        if problems:
            raise InvalidStateError("invalid density matrix: " + "; ".join(problems))
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        if self.pauli_r is not None:
            r = np.array(self.pauli_r, dtype=float)
            if abs(r[0, 0] - 0.25) > 1e-12:
                raise InvalidStateError(f"R_00 must be 1/4, got {r[0, 0]}")
            if np.abs(pauli_to_rho(r) - rho).max() > 1e-12:
                raise InvalidStateError("Pauli coefficients do not reproduce rho")
            object.__setattr__(self, "pauli_r", r)

    @classmethod
    def from_pauli(cls, r) -> "BipartiteState":
        r = np.asarray(r, dtype=float)
        if r.shape != (4, 4):
            raise DimensionError(f"Pauli coefficient matrix must be 4x4, got {r.shape}")
        return cls(2, 2, pauli_to_rho(r), r)

    def reduced_a(self) -> np.ndarray:
        return partial_trace(self.rho, (self.d_a, self.d_b), [0])

    def reduced_b(self) -> np.ndarray:
        return partial_trace(self.rho, (self.d_a, self.d_b), [1])


def pauli_to_rho(r) -> np.ndarray:
    return np.einsum("ab,aij,bkl->ikjl", np.asarray(r), PAULI, PAULI).reshape(4, 4)


def von_neumann_entropy(rho) -> float:
    w = np.linalg.eigvalsh(rho)
    w = w[w > 0]
    return float(-(w * np.log2(w)).sum())


def _entropy_batch(eigs: np.ndarray) -> np.ndarray:
    e = np.clip(eigs, 0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(e > 0, -e * np.log2(np.where(e > 0, e, 1)), 0.0)
    return terms.sum(axis=-1)


# ---------------------------------------------------------------------------
# Zero-discord criterion
# ---------------------------------------------------------------------------

def zero_a_discord(st: BipartiteState, tol: float = ZERO_DISCORD_TOL) -> tuple[bool, float]:
    """Zero A-discord iff the operators ``Tr_B[rho (I (x) l_mu)]`` all commute.

    Returns ``(is_zero, max_{mu nu} ||[A_mu, A_nu]||_F)``.
    """
    lam_b = make_basis(st.d_b).lambdas if st.d_b > 1 else np.ones((1, 1, 1), dtype=complex)
    t = st.rho.reshape(st.d_a, st.d_b, st.d_a, st.d_b)
    a_ops = np.einsum("ibjc,mcb->mij", t, lam_b)
    worst = 0.0
    for m in range(len(a_ops)):
        for n in range(m + 1, len(a_ops)):
            worst = max(worst, float(np.linalg.norm(commutator(a_ops[m], a_ops[n]))))
    return worst <= tol, worst


# ---------------------------------------------------------------------------
# Projective measurements on a qubit
# ---------------------------------------------------------------------------

def measurement_basis(theta, phi) -> np.ndarray:
    """Array ``[..., k, i]`` of the two basis vectors for angles ``theta, phi``."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    c, s, ph = np.cos(theta / 2), np.sin(theta / 2), np.exp(1j * phi)
    psi0 = np.stack([c + 0j, ph * s], axis=-1)
    psi1 = np.stack([-np.conj(ph) * s, c + 0j], axis=-1)
    return np.stack([psi0, psi1], axis=-2)


def _conditional_blocks(st: BipartiteState, theta, phi) -> np.ndarray:
    """Unnormalized ``<psi_k| rho |psi_k>_A``, shape ``[..., 2, dB, dB]``."""
    vecs = measurement_basis(theta, phi)
    t = st.rho.reshape(2, st.d_b, 2, st.d_b)
    return np.einsum("...ki,ibjc,...kj->...kbc", vecs.conj(), t, vecs)


def conditional_entropy(st: BipartiteState, theta, phi) -> np.ndarray:
    """``sum_k p_k S(rho_B|k)`` for each measurement angle pair."""
    blocks = _conditional_blocks(st, theta, phi)
    eigs = np.linalg.eigvalsh(blocks)
    probs = np.clip(eigs.sum(axis=-1), 0, None)
    # p S(M/p) = S_raw(M) + p log p, with S_raw the unnormalized eigen-sum
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(probs > 0, probs * np.log2(np.where(probs > 0, probs, 1)), 0.0)
    return (_entropy_batch(eigs) + plogp).sum(axis=-1)


def dephasing_distance(st: BipartiteState, theta, phi) -> np.ndarray:
    """``||rho - sum_k (P_k (x) I) rho (P_k (x) I)||_2^2``."""
    blocks = _conditional_blocks(st, theta, phi)
    kept = np.einsum("...kbc,...kcb->...", blocks, blocks).real
    return float(np.trace(st.rho @ st.rho).real) - kept


@dataclass(frozen=True)
class OptimizationResult:
    value: float
    grid_min: float
    refined_min: float
    theta: float
    phi: float
    grad_norm: float
    evaluations: int


def minimize_over_bloch(objective, grid=GRID) -> OptimizationResult:
    """Grid search over ``(theta, phi)`` then Nelder-Mead refinement.

    Ties on the grid resolve to the smallest ``(theta, phi)``.  The result
    is deterministic for a fixed objective.
    """
    n_t, n_p = grid
    thetas = np.linspace(0, np.pi, n_t)
    phis = np.linspace(0, 2 * np.pi, n_p, endpoint=False)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    vals = objective(tt, pp)
    i = int(np.argmin(vals))
    x0 = np.array([tt.flat[i], pp.flat[i]])
    grid_min = float(vals.flat[i])

    def f(x):
        return float(objective(x[0], x[1]))

    res = minimize(f, x0, method="Nelder-Mead",
                   options={"xatol": 1e-11, "fatol": 1e-15, "maxiter": 4000, "maxfev": 8000})
    x, fx = (res.x, float(res.fun)) if res.fun <= grid_min else (x0, grid_min)
    h = 1e-6
    g = np.array([(f(x + h * e) - f(x - h * e)) / (2 * h) for e in np.eye(2)])
    return OptimizationResult(fx, grid_min, fx, float(x[0]), float(x[1]),
                              float(np.linalg.norm(g)), int(res.nfev) + vals.size + 4)


def _require_qubit_a(st: BipartiteState):
    if st.d_a != 2:
        raise DimensionError(f"projective optimization is implemented for a qubit A, got dA={st.d_a}")


def discord_details(st: BipartiteState, grid=GRID) -> OptimizationResult:
    """A-discord with optimizer diagnostics; ``value`` is the discord itself."""
    _require_qubit_a(st)
    opt = minimize_over_bloch(lambda t, p: conditional_entropy(st, t, p), grid)
    offset = von_neumann_entropy(st.reduced_a()) - von_neumann_entropy(st.rho)
    return OptimizationResult(offset + opt.value, offset + opt.grid_min, offset + opt.refined_min,
                              opt.theta, opt.phi, opt.grad_norm, opt.evaluations)


def a_discord_projective(st: BipartiteState, grid=GRID) -> float:
    """``S(rho_A) - S(rho_AB) + min_{P} sum_k p_k S(rho_B|k)`` over von Neumann
    measurements on A."""
    return discord_details(st, grid).value


def geometric_discord(st: BipartiteState, grid=GRID) -> float:
    """Minimum squared Hilbert-Schmidt distance to a zero A-discord state."""
    _require_qubit_a(st)
    return minimize_over_bloch(lambda t, p: dephasing_distance(st, t, p), grid).value


# ---------------------------------------------------------------------------
# The discord-increase example
# ---------------------------------------------------------------------------

def increase_example_state() -> BipartiteState:
    rho = pauli_to_rho(EXAMPLE_PAULI_R)
    problems = density_matrix_violations(rho)
    if problems:
        w = np.linalg.eigvalsh(rho)
        raise InvalidStateError(f"example state is invalid ({'; '.join(problems)}); "
                                f"eigenvalues {w}")
    return BipartiteState.from_pauli(EXAMPLE_PAULI_R)


def twirl_unitary() -> np.ndarray:
    """``u = sin(2pi/5)(1 + i sigma_3)/sqrt(2) - i sigma_2 cos(2pi/5)``."""
    a = 2 * np.pi / 5
    u = np.sin(a) / np.sqrt(2) * (PAULI[0] + 1j * PAULI[3]) - 1j * PAULI[2] * np.cos(a)
    err = np.abs(u @ dagger(u) - np.eye(2)).max()
    if err > 1e-12:
        raise CopchanError(f"example unitary is not unitary (error {err:.3e})")
    return u


def local_twirl(st: BipartiteState, u) -> BipartiteState:
    """``(rho + (u (x) I) rho (u (x) I)^dag) / 2``."""
    big = np.kron(u, np.eye(st.d_b))
    return BipartiteState(st.d_a, st.d_b, (st.rho + big @ st.rho @ dagger(big)) / 2)


@dataclass(frozen=True)
class IncreaseResult:
    d_before: float
    d_after: float
    increased: bool


def discord_increase_experiment(u=None, grid=GRID) -> IncreaseResult:
    st = increase_example_state()
    u = twirl_unitary() if u is None else u
    before = a_discord_projective(st, grid)
    after = a_discord_projective(local_twirl(st, u), grid)
    return IncreaseResult(before, after, after > before)
