"""Dense operator algebra: Hermitian operator bases, structure constants and
permutation operators on four tensor copies.

Conventions
-----------
A permutation ``perm`` of ``(0, 1, 2, 3)`` is a tuple mapping slot ``k`` to
slot ``perm[k]``.  Its operator acts on computational basis states as

    V_perm |i_0 i_1 i_2 i_3> = |j>,   j[perm[k]] = i[k],

so ``V_s V_t = V_{s o t}`` with ``(s o t)(k) = s(t(k))``.
"""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

HERMITIAN_TOL = 1e-12
ALGEBRA_TOL = 1e-12
SPECTRAL_TOL = 1e-10

# Largest local dimension for which 4-copy operators (d**4 x d**4) are built.
DEFAULT_PERMUTATION_CAP_D = 3
CAP_ENV_VAR = "COPCHAN_CAP_D"

COPIES = 4


class CopchanError(Exception):
    """Base class for library errors."""


class DimensionError(CopchanError, ValueError):
    """Operands have invalid or mismatched dimensions."""


class CapExceededError(CopchanError):
    """A materialized operator would exceed the configured memory cap."""


def cap_from_env(default: int) -> int:
    """Return the cap from ``COPCHAN_CAP_D`` if set, else ``default``."""
    raw = os.environ.get(CAP_ENV_VAR)
    if raw is None or raw == "":
        return default
    try:
        value = int(raw)
    except ValueError as exc:
        raise CopchanError(f"{CAP_ENV_VAR} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise CopchanError(f"{CAP_ENV_VAR} must be positive, got {value}")
    return value


# ---------------------------------------------------------------------------
# Matrix helpers
# ---------------------------------------------------------------------------

def as_square(m, name: str = "matrix") -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def commutator(a, b) -> np.ndarray:
    """Return ``ab - ba`` for two square matrices of equal size."""
    a = as_square(a, "a")
    b = as_square(b, "b")
    if a.shape != b.shape:
        raise DimensionError(f"commutator of {a.shape} and {b.shape} matrices")
    return a @ b - b @ a


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(m)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.abs(a - dagger(a)).max() <= tol


def density_matrix_violations(rho, trace_tol: float = SPECTRAL_TOL,
                              psd_tol: float = SPECTRAL_TOL) -> list[str]:
    """List the ways ``rho`` fails to be a density matrix (empty if valid)."""
    a = np.asarray(rho, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return [f"not square: shape {a.shape}"]
    if not np.all(np.isfinite(a)):
        return ["non-finite entries"]
    problems = []
    herm_err = np.abs(a - dagger(a)).max()
    if herm_err > HERMITIAN_TOL:
        problems.append(f"not Hermitian: max|M - M^dag| = {herm_err:.3e}")
    tr = np.trace(a)
    if abs(tr - 1) > trace_tol:
        problems.append(f"trace {tr.real:.12g}{tr.imag:+.3g}j differs from 1")
    min_eig = np.linalg.eigvalsh((a + dagger(a)) / 2)[0]
    if min_eig < -psd_tol:
        problems.append(f"minimum eigenvalue {min_eig:.12g} is negative")
    return problems


def is_density_matrix(rho) -> bool:
    return not density_matrix_violations(rho)


def kron_all(*ms) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in ms:
        out = np.kron(out, m)
    return out


def partial_trace(m: np.ndarray, dims: tuple[int, ...], keep) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``."""
    keep = sorted(keep)
    n = len(dims)
    t = np.asarray(m).reshape(tuple(dims) * 2)
    letters = "abcdefghijklmnopqrstuvwxyz"
    rows = list(letters[:n])
    cols = list(letters[n:2 * n])
    for k in range(n):
        if k not in keep:
            cols[k] = rows[k]
    out = "".join(rows[k] for k in keep) + "".join(cols[k] for k in keep)
    res = np.einsum("".join(rows) + "".join(cols) + "->" + out, t)
    size = int(np.prod([dims[k] for k in keep]))
    return res.reshape(size, size)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed d x d unitary (QR of a Ginibre matrix, phase-fixed)."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density_matrix(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    g = rng.standard_normal((d, rank or d)) + 1j * rng.standard_normal((d, rank or d))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_hermitian(d: int, rng: np.random.Generator, traceless: bool = False) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = (g + dagger(g)) / 2
    if traceless:
        h = h - np.trace(h) / d * np.eye(d)
    return h


# ---------------------------------------------------------------------------
# Hermitian operator basis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HermitianBasis:
    """Identity followed by generalized Gell-Mann matrices, with
    ``Tr(l_mu l_nu) = d delta_{mu nu}``.

    ``f[mu, nu, tau] = -i Tr([l_mu, l_nu] l_tau) / d**2`` (real).
    """

    d: int
    lambdas: np.ndarray = field(repr=False)
    f: np.ndarray = field(repr=False)

    @property
    def D(self) -> int:
        return self.d * self.d - 1

    def coefficients(self, m) -> np.ndarray:
        """Expansion coefficients ``Tr(M l_mu)``; ``M = sum c_mu l_mu / d``."""
        return np.einsum("ij,mji->m", np.asarray(m), self.lambdas)

    def reconstruct(self, coeffs) -> np.ndarray:
        return np.einsum("m,mij->ij", np.asarray(coeffs), self.lambdas) / self.d


def gell_mann_matrices(d: int) -> np.ndarray:
    """Generalized Gell-Mann matrices (symmetric, antisymmetric, diagonal),
    normalized to ``Tr(g g) = 2``, preceded by the identity."""
    mats = [np.eye(d, dtype=complex)]
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[j, k] = s[k, j] = 1
            a = np.zeros((d, d), dtype=complex)
            a[j, k] = -1j
            a[k, j] = 1j
            mats += [s, a]
    for l in range(1, d):
        g = np.zeros((d, d), dtype=complex)
        g[np.arange(l), np.arange(l)] = 1
        g[l, l] = -l
        mats.append(g * np.sqrt(2 / (l * (l + 1))))
    return np.array(mats)


def structure_constants(lambdas: np.ndarray) -> np.ndarray:
    d = lambdas.shape[1]
    prod = np.einsum("mij,njk->mnik", lambdas, lambdas)
    comm = prod - prod.transpose(1, 0, 2, 3)
    f = -1j * np.einsum("mnik,tki->mnt", comm, lambdas) / d**2
    if np.abs(f.imag).max() > ALGEBRA_TOL:
        raise CopchanError("structure constants came out complex")
    return f.real


@lru_cache(maxsize=16)
def make_basis(d: int) -> HermitianBasis:
    """Orthogonal Hermitian basis with ``l_0 = I`` and ``Tr(l_mu l_nu) = d delta``.

    For ``d = 2`` the basis is exactly ``(I, sigma_x, sigma_y, sigma_z)``.
    """
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise DimensionError(f"basis dimension must be an integer >= 2, got {d!r}")
    d = int(d)
    lambdas = gell_mann_matrices(d)
    lambdas[1:] *= np.sqrt(d / 2)
    lambdas.setflags(write=False)
    f = structure_constants(lambdas)
    f.setflags(write=False)
    return HermitianBasis(d=d, lambdas=lambdas, f=f)


# ---------------------------------------------------------------------------
# Permutation operators on four copies
# ---------------------------------------------------------------------------

def _check_perm(perm) -> tuple[int, ...]:
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(len(perm))):
        raise ValueError(f"not a permutation of 0..{len(perm) - 1}: {perm}")
    return perm


def compose(s, t) -> tuple[int, ...]:
    """``(s o t)(k) = s(t(k))``."""
    return tuple(s[t[k]] for k in range(len(t)))


def inverse(p) -> tuple[int, ...]:
    inv = [0] * len(p)
    for k, pk in enumerate(p):
        inv[pk] = k
    return tuple(inv)


def cycles(p) -> list[list[int]]:
    seen, out = set(), []
    for start in range(len(p)):
        if start in seen:
            continue
        cyc, k = [], start
        while k not in seen:
            seen.add(k)
            cyc.append(k)
            k = p[k]
        out.append(cyc)
    return out


def transposition(i: int, j: int, n: int = COPIES) -> tuple[int, ...]:
    """The swap of slots ``i`` and ``j`` (1-based, as in ``V_ij``)."""
    p = list(range(n))
    p[i - 1], p[j - 1] = p[j - 1], p[i - 1]
    return tuple(p)


def perm_product(*perms) -> tuple[int, ...]:
    """Permutation of the operator product ``V_p1 V_p2 ...``."""
    out = tuple(range(COPIES))
    for p in perms:
        out = compose(out, p)
    return out


def all_permutations(n: int = COPIES) -> list[tuple[int, ...]]:
    return list(itertools.permutations(range(n)))


# The 4-cycle X = V_12 V_23 V_34.
CYCLE_X = perm_product(transposition(1, 2), transposition(2, 3), transposition(3, 4))


@dataclass(frozen=True)
class PermutationOperator:
    d: int
    perm: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "perm", _check_perm(self.perm))

    def __matmul__(self, other: "PermutationOperator") -> "PermutationOperator":
        if self.d != other.d:
            raise DimensionError("permutation operators with different local dimension")
        return PermutationOperator(self.d, compose(self.perm, other.perm))

    @property
    def dagger(self) -> "PermutationOperator":
        return PermutationOperator(self.d, inverse(self.perm))

    def trace(self) -> int:
        return self.d ** len(cycles(self.perm))


def permutation_matrix(p: PermutationOperator, cap_d: int | None = None) -> np.ndarray:
    """Materialize ``V_perm`` as a ``d**n x d**n`` real matrix."""
    cap = cap_from_env(DEFAULT_PERMUTATION_CAP_D) if cap_d is None else cap_d
    d, perm = p.d, p.perm
    n = len(perm)
    if d > cap:
        raise CapExceededError(
            f"materializing a {n}-copy permutation at d={d} exceeds cap d<={cap}; "
            "use trace_product_permuted for contraction-based traces")
    dim = d**n
    idx = np.arange(dim)
    digits = np.array(np.unravel_index(idx, (d,) * n))
    target = np.empty_like(digits)
    target[list(perm)] = digits
    rows = np.ravel_multi_index(tuple(target), (d,) * n)
    m = np.zeros((dim, dim))
    m[rows, idx] = 1.0
    return m


def trace_product_permuted(matrices, perm) -> complex:
    """``Tr(V_perm  m_1 (x) m_2 (x) m_3 (x) m_4)`` without building the big operator.

    Each cycle of ``perm**-1`` contributes the trace of the ordered product of
    its matrices.
    """
    mats = [as_square(m, f"matrices[{k}]") for k, m in enumerate(matrices)]
    perm = _check_perm(perm)
    if len(mats) != len(perm):
        raise DimensionError(f"{len(mats)} matrices for a permutation of {len(perm)}")
    d = mats[0].shape[0]
    if any(m.shape != (d, d) for m in mats):
        raise DimensionError("all matrices must share one dimension")
    inv = inverse(perm)
    total = 1.0 + 0j
    for cyc in cycles(inv):
        prod = np.eye(d, dtype=complex)
        k = cyc[0]
        for _ in cyc:
            prod = prod @ mats[k]
            k = inv[k]
        total *= np.trace(prod)
    return complex(total)
