"""Commutativity-preservation (CoP) degree, four-copy witness expectations and
the checks tying them together.

Notation: ``A_mu = Lambda(l_mu)`` and ``C_{mu nu} = [A_mu, A_nu]``.  The CoP
degree is

    delta = -(1/2d) sum_{mu nu} Tr G_{mu nu}^2,
    G_{mu nu} = C_{mu nu} - 1/2 f_{mu nu tau} f_{a b tau} C_{a b},

which is nonnegative and vanishes exactly on CoP channels.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .channels import QuantumChannel
from .operator_core import (
    CYCLE_X, CapExceededError, CopchanError, DimensionError, PermutationOperator, all_permutations,
    commutator, haar_unitary, make_basis, perm_product, permutation_matrix,
    transposition,
)

COP_TOL = 1e-10
ORACLE_CAP_D = 2


@dataclass(frozen=True)
class CopReport:
    delta: float
    w: float
    z: float
    max_commutator_residual: float
    verdict: str
    probe_max: float
    tolerance: float

    def to_dict(self) -> dict:
        return asdict(self)


def _pair_commutators(images: np.ndarray) -> np.ndarray:
    prod = np.einsum("mij,njk->mnik", images, images)
    return prod - prod.transpose(1, 0, 2, 3)


def _commutator_terms(ch: QuantumChannel):
    basis = make_basis(ch.d)
    comm = _pair_commutators(ch.basis_images())
    contracted = np.einsum("abt,abik->tik", basis.f, comm)
    return basis, comm, contracted


def _tr_sq(x: np.ndarray) -> np.ndarray:
    """``Tr(X^2)`` over the trailing two axes, real part."""
    return np.einsum("...ij,...ji->...", x, x).real


def commutator_residuals(ch: QuantumChannel) -> np.ndarray:
    """``G_{mu nu}`` for all index pairs, shape ``(d*d, d*d, d, d)``."""
    basis, comm, contracted = _commutator_terms(ch)
    return comm - 0.5 * np.einsum("mnt,tik->mnik", basis.f, contracted)


def cop_degree(ch: QuantumChannel) -> float:
    g = commutator_residuals(ch)
    return float(-_tr_sq(g).sum() / (2 * ch.d))


def max_commutator_residual(ch: QuantumChannel) -> float:
    """Largest Frobenius norm of ``G_{mu nu}`` over all index pairs."""
    g = commutator_residuals(ch)
    return float(np.sqrt((np.abs(g) ** 2).sum(axis=(2, 3))).max())


def witness_expectations(ch: QuantumChannel) -> tuple[float, float]:
    """``(<W>, <Z>)`` on four copies of the Choi state, from the coefficient formulas

        2 d^2 <W> = -sum Tr C_{mu nu}^2,
        -4 d <Z> = f_{mu nu tau} f_{a b tau} Tr(C_{mu nu} C_{a b}).
    """
    d = ch.d
    _, comm, contracted = _commutator_terms(ch)
    w = -_tr_sq(comm).sum() / (2 * d * d)
    z = -_tr_sq(contracted).sum() / (4 * d)
    return float(w), float(z)


def l_bound(ch: QuantumChannel) -> float:
    """``-sum_mu Tr C_{mu 0}^2 / d``, the expectation of ``L`` and a lower bound on delta."""
    comm = _pair_commutators(ch.basis_images())
    return float(-_tr_sq(comm[:, 0]).sum() / ch.d)


# ---------------------------------------------------------------------------
# Brute-force four-copy oracle
# ---------------------------------------------------------------------------

def _sym_x(d: int) -> np.ndarray:
    x = permutation_matrix(PermutationOperator(d, CYCLE_X), cap_d=d)
    return (x + x.T) / 2


def _ref_ops(d: int) -> dict[str, np.ndarray]:
    def v(*pairs):
        return permutation_matrix(
            PermutationOperator(d, perm_product(*(transposition(i, j) for i, j in pairs))), cap_d=d)
    w_ref = v((1, 2), (3, 4)) - v((1, 3), (2, 4))
    l_tilde = v((1, 2)) + v((3, 4)) - v((1, 3)) - v((2, 4))
    v1423 = v((1, 4), (2, 3))
    return {"W": w_ref, "Z": v1423 @ (-l_tilde), "V1423": v1423}


def four_copy_choi(ch: QuantumChannel) -> np.ndarray:
    """``R^{(x)4}`` reordered to ``(A1 A2 A3 A4, B1 B2 B3 B4)``."""
    d = ch.d
    r = ch.choi
    r4 = np.kron(np.kron(r, r), np.kron(r, r))
    t = r4.reshape((d,) * 16)
    order = [0, 2, 4, 6, 1, 3, 5, 7]
    t = t.transpose(order + [8 + k for k in order])
    return t.reshape(d**8, d**8)


def witness_expectations_oracle(ch: QuantumChannel, cap_d: int = ORACLE_CAP_D):
    """``(<W>, <Z>, <L>)`` by materializing ``R^{(x)4}`` and the observables.

    ``W = sym(X)_A (x) (V12 V34 - V13 V24)``,
    ``Z = sym(X)_A (x) V14 V23 (V13 + V24 - V12 - V34)``,
    ``L = -(I_A (x) V14 V23) Z``.
    """
    d = ch.d
    if d > cap_d:
        raise CapExceededError(f"four-copy oracle needs d <= {cap_d}, got d={d}")
    r4 = four_copy_choi(ch)
    sx = _sym_x(d)
    ops = _ref_ops(d)
    w_op = np.kron(sx, ops["W"])
    z_op = np.kron(sx, ops["Z"])
    l_op = -np.kron(np.eye(d**4), ops["V1423"]) @ z_op
    vals = [np.trace(r4 @ op) for op in (w_op, z_op, l_op)]
    return tuple(float(v.real) for v in vals)


# ---------------------------------------------------------------------------
# Haar average of the four-copy operator O
# ---------------------------------------------------------------------------

def _v(d, *pairs, cap_d=None):
    perm = perm_product(*(transposition(i, j) for i, j in pairs))
    return permutation_matrix(PermutationOperator(d, perm), cap_d=cap_d)


def commutator_operator(d: int) -> np.ndarray:
    """``O = sum_{k,l} k (x) (k (x) l - l (x) k) (x) l`` with ``k = |k><k|`` (diagonal)."""
    idx = np.indices((d,) * 4).reshape(4, -1)
    diag = (idx[0] == idx[1]) & (idx[2] == idx[3])
    diag = diag.astype(float) - ((idx[0] == idx[2]) & (idx[1] == idx[3]))
    return np.diag(diag)


def haar_average_formula(d: int, cap_d: int | None = None) -> np.ndarray:
    def v(*pairs):
        return _v(d, *pairs, cap_d=cap_d)
    l_tilde = v((1, 2)) + v((3, 4)) - v((1, 3)) - v((2, 4))
    num = (d + 1) * l_tilde + d * (v((1, 2), (3, 4)) - v((1, 3), (2, 4))) + v((1, 4), (2, 3)) @ l_tilde
    return num / (d * (d + 1) * (d + 2))


def permutation_traces(op: np.ndarray, d: int, cap_d: int | None = None) -> dict[tuple, float]:
    out = {}
    for perm in all_permutations():
        vs = permutation_matrix(PermutationOperator(d, perm), cap_d=cap_d)
        out[perm] = float(np.trace(op @ vs).real)
    return out


def expected_commutator_traces(d: int) -> dict[tuple, float]:
    """``Tr(O V_s)``: ``+d(d-1)`` on V12, V34, V12V34; ``-d(d-1)`` on V13, V24, V13V24; else 0."""
    plus = [transposition(1, 2), transposition(3, 4),
            perm_product(transposition(1, 2), transposition(3, 4))]
    minus = [transposition(1, 3), transposition(2, 4),
             perm_product(transposition(1, 3), transposition(2, 4))]
    out = {p: 0.0 for p in all_permutations()}
    for p in plus:
        out[p] = d * (d - 1)
    for p in minus:
        out[p] = -d * (d - 1)
    return out


def verify_haar_average(d: int, cap_d: int | None = None) -> float:
    """Max over the 24 permutations of ``|Tr(Obar V_s) - Tr(O V_s)|``.

    Raises ``CopchanError`` if ``Tr(O V_s)`` departs from the
    ``+-d(d-1) / 0`` table.
    """
    o = commutator_operator(d)
    obar = haar_average_formula(d, cap_d=cap_d)
    t_o = permutation_traces(o, d, cap_d=cap_d)
    expected = expected_commutator_traces(d)
    for perm, val in t_o.items():
        if abs(val - expected[perm]) > 1e-9:
            raise CopchanError(f"Tr(O V_{perm}) = {val}, expected {expected[perm]}")
    t_obar = permutation_traces(obar, d, cap_d=cap_d)
    return max(abs(t_obar[p] - t_o[p]) for p in t_o)


# ---------------------------------------------------------------------------
# Commuting-pair probe and the qubit criterion
# ---------------------------------------------------------------------------

def _probe_sample(ch: QuantumChannel, seed: int, index: int):
    rng = np.random.default_rng([seed, index])
    d = ch.d
    u = haar_unitary(d, rng)
    p1, p2 = rng.dirichlet(np.ones(d)), rng.dirichlet(np.ones(d))
    rho = (u * p1) @ u.conj().T
    sigma = (u * p2) @ u.conj().T
    c = commutator(ch.apply(rho), ch.apply(sigma))
    return float(np.linalg.norm(c)), rho, sigma


def commuting_pair_probe(ch: QuantumChannel, samples: int = 200, seed: int = 0,
                         return_pair: bool = False):
    """Max ``||[Lambda(rho), Lambda(sigma)]||_F`` over random commuting pairs.

    Sample ``i`` draws from a generator seeded by ``(seed, i)``, so the result
    does not depend on evaluation order.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    best = (-1.0, None, None)
    for i in range(samples):
        res = _probe_sample(ch, seed, i)
        if res[0] > best[0]:
            best = res
    if return_pair:
        return best
    return best[0]


def qubit_cop_criterion(ch: QuantumChannel, tol: float = COP_TOL) -> bool:
    """For qubits: CoP iff ``[Lambda(I), Lambda(l_nu)] = 0`` for all ``nu``."""
    if ch.d != 2:
        raise DimensionError(f"qubit criterion needs d = 2, got d={ch.d}")
    imgs = ch.basis_images()
    worst = max(np.linalg.norm(commutator(imgs[0], imgs[nu])) for nu in range(1, 4))
    return bool(worst <= tol)


# ---------------------------------------------------------------------------
# End to end: local channel on a classical-quantum state
# ---------------------------------------------------------------------------

def discord_creation_check(ch: QuantumChannel, rho, sigma, tol: float = COP_TOL):
    """Embed commuting ``rho, sigma`` as ``(rho (x) |0><0| + sigma (x) |1><1|)/2``,
    apply ``Lambda (x) I`` and test zero A-discord before and after.

    Returns ``(input_zero, output_zero, input_residual, output_residual)``.
    """
    from .discord import BipartiteState, zero_a_discord

    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if np.linalg.norm(commutator(rho, sigma)) > tol:
        raise ValueError("rho and sigma do not commute")
    st_in = classical_flag_state(rho, sigma)
    out = ch.apply(np.array([rho, sigma]))
    st_out = classical_flag_state(out[0], out[1])
    z_in, r_in = zero_a_discord(BipartiteState(ch.d, 2, st_in))
    z_out, r_out = zero_a_discord(BipartiteState(ch.d, 2, st_out))
    return z_in, z_out, r_in, r_out


def classical_flag_state(rho, sigma) -> np.ndarray:
    e0 = np.diag([1.0, 0.0])
    e1 = np.diag([0.0, 1.0])
    return (np.kron(rho, e0) + np.kron(sigma, e1)) / 2


def local_apply(ch: QuantumChannel, rho_ab, d_b: int) -> np.ndarray:
    """``(Lambda (x) I)(rho_ab)`` with the channel on the first factor."""
    d = ch.d
    t = np.asarray(rho_ab).reshape(d, d_b, d, d_b)
    out = np.einsum("injm,nbmc->ibjc", ch.choi.reshape(d, d, d, d), t)
    return out.reshape(d * d_b, d * d_b)


# ---------------------------------------------------------------------------

def analyze(ch: QuantumChannel, samples: int = 200, seed: int = 0, tol: float = COP_TOL) -> CopReport:
    delta = cop_degree(ch)
    w, z = witness_expectations(ch)
    res = max_commutator_residual(ch)
    probe = commuting_pair_probe(ch, samples=samples, seed=seed)
    verdict = "cop" if delta <= tol else "non-cop"
    return CopReport(delta=delta, w=w, z=z, max_commutator_residual=res, verdict=verdict,
                     probe_max=probe, tolerance=tol)


def hamiltonian_delta_formula(h) -> float:
    """``[(d^2 - 6)(Tr H^2)^2 + d(d^2 - 2) Tr H^4] / d^4``."""
    h = np.asarray(h)
    d = len(h)
    t2 = np.trace(h @ h).real
    t4 = np.trace(np.linalg.matrix_power(h, 4)).real
    return ((d * d - 6) * t2**2 + d * (d * d - 2) * t4) / d**4


__all__ = [
    "CopReport", "analyze", "classical_flag_state", "commuting_pair_probe", "commutator_residuals",
    "cop_degree", "max_commutator_residual", "expected_commutator_traces", "hamiltonian_delta_formula",
    "l_bound", "local_apply", "qubit_cop_criterion", "discord_creation_check", "verify_haar_average",
    "witness_expectations", "witness_expectations_oracle",
]
