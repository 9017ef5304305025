"""The two-quDit operator K built from structure constants, its spectral
structure, and the CoP degree of mixtures ``p I + (1 - p) Lambda``.

Indices ``mu, alpha`` run over ``1..D`` (``D = d^2 - 1``); the pair
``(x, y)`` is flattened to ``(x - 1) * D + (y - 1)``.  Rows of K are
indexed by ``(mu, alpha)`` and columns by ``(beta, nu)``:

    K[(mu, alpha), (beta, nu)] = sum_tau f[mu, nu, tau] f[alpha, beta, tau].
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import channels as chn
from .channels import QuantumChannel
from .cop_analysis import COP_TOL, cop_degree
from .operator_core import CapExceededError, CopchanError, DimensionError, cap_from_env, make_basis

DEFAULT_K_CAP_D = 4
SPECTRUM_TOL = 1e-9
PROJECTOR_TOL = 1e-10


class HypothesisError(CopchanError, ValueError):
    """The mixture formula was asked about a channel it does not cover."""


@dataclass(frozen=True, eq=False)
class KOperator:
    d: int
    matrix: np.ndarray = field(repr=False)

    @property
    def D(self) -> int:
        return self.d * self.d - 1


def spectrum_targets(d: int) -> list[float]:
    out = []
    for t in (2.0, 1.0, -1.0, 0.0, 2.0 / d, -2.0 / d):
        if all(abs(t - s) > 1e-12 for s in out):
            out.append(t)
    return out


def psi_vector(d: int, normalized: bool = True) -> np.ndarray:
    D = d * d - 1
    v = np.eye(D).reshape(-1)
    return v / np.sqrt(D) if normalized else v


def f_vectors(d: int) -> np.ndarray:
    """Rows ``|f_tau> = sum f[mu, nu, tau] |mu, nu>`` for ``tau = 1..D``."""
    f = make_basis(d).f[1:, 1:, 1:]
    D = d * d - 1
    return f.transpose(2, 0, 1).reshape(D, D * D)


def e_vectors(d: int) -> np.ndarray:
    """Rows ``|e_tau> = sum Tr({l_mu, l_nu} l_tau) |mu, nu> / d^2``."""
    lam = make_basis(d).lambdas[1:]
    anti = np.einsum("mij,njk->mnik", lam, lam)
    anti = anti + anti.transpose(1, 0, 2, 3)
    e = np.einsum("mnik,tki->tmn", anti, lam).real / d**2
    D = d * d - 1
    return e.reshape(D, D * D)


def swap_operator(D: int) -> np.ndarray:
    return np.eye(D * D).reshape(D, D, D, D).transpose(0, 1, 3, 2).reshape(D * D, D * D)


def build_k(d: int, cap_d: int | None = None) -> KOperator:
    """Construct K and verify its eigen-relations on |Psi>, |f_tau>, |e_tau>."""
    if d < 2:
        raise DimensionError(f"K needs d >= 2, got {d}")
    cap = cap_from_env(DEFAULT_K_CAP_D) if cap_d is None else cap_d
    if d > cap:
        raise CapExceededError(f"K at d={d} exceeds the cap d<={cap}")
    f = make_basis(d).f[1:, 1:, 1:]
    D = d * d - 1
    k = np.einsum("mnt,abt->mabn", f, f).reshape(D * D, D * D)
    k.setflags(write=False)
    op = KOperator(d, k)
    problems = k_invariant_violations(op)
    if problems:
        raise CopchanError("K invariants failed: " + "; ".join(problems))
    return op


def k_invariant_violations(k: KOperator, tol: float = SPECTRUM_TOL) -> list[str]:
    m, d = k.matrix, k.d
    out = []
    if np.abs(m - m.T).max() > 1e-12:
        out.append("K is not symmetric")
    psi = psi_vector(d)
    if np.abs(m @ psi - 2 * psi).max() > tol:
        out.append("K|Psi> != 2|Psi>")
    fv = f_vectors(d)
    if np.abs(fv @ m.T + fv).max() > tol:
        out.append("K|f_tau> != -|f_tau>")
    ev = e_vectors(d)
    if np.abs(ev @ m.T - ev).max() > tol:
        out.append("K|e_tau> != |e_tau>")
    return out


def spectrum(k: KOperator, tol: float = SPECTRUM_TOL) -> dict:
    """Eigenvalues grouped onto ``{2, +-1, 0, +-2/d}`` with multiplicities."""
    w = np.linalg.eigvalsh(k.matrix)
    targets = spectrum_targets(k.d)
    counts = {t: 0 for t in targets}
    stray = []
    for x in w:
        hit = [t for t in targets if abs(x - t) <= tol]
        if hit:
            counts[hit[0]] += 1
        else:
            stray.append(float(x))
    return {
        "d": k.d,
        "eigenvalues": [{"value": t, "multiplicity": n} for t, n in counts.items() if n],
        "unexpected": stray,
        "within_expected_set": not stray,
        "max_deviation": float(np.abs(w[:, None] - np.array(targets)[None, :]).min(axis=1).max()),
    }


def projectors(d: int) -> dict[str, np.ndarray]:
    """``Psi, E, F, P`` and the quDit swap ``V``."""
    D = d * d - 1
    if d * d == 4:
        raise DimensionError("E is undefined at d = 2 (d^2 - 4 = 0)")
    psi = psi_vector(d, normalized=False)
    fv = f_vectors(d)
    ev = e_vectors(d)
    v = swap_operator(D)
    proj_psi = np.outer(psi, psi) / D
    proj_f = fv.T @ fv / 2
    proj_e = d * d * (ev.T @ ev) / (2 * (d * d - 4))
    proj_p = (np.eye(D * D) + v) / 2 - proj_psi - proj_e
    return {"Psi": proj_psi, "E": proj_e, "F": proj_f, "P": proj_p, "V": v}


def verify_k_squared_decomposition(k: KOperator) -> float:
    """``||K^2 - (4 Psi + E + F + 4 P / d^2)||_F``.

    Raises ``CopchanError`` if the four projectors are not idempotent and
    mutually orthogonal.
    """
    d = k.d
    if d < 3:
        raise DimensionError("K^2 decomposition needs d >= 3")
    pr = projectors(d)
    names = ["Psi", "E", "F", "P"]
    for i, a in enumerate(names):
        pa = pr[a]
        if np.abs(pa @ pa - pa).max() > PROJECTOR_TOL:
            raise CopchanError(f"{a} is not a projector")
        for b in names[i + 1:]:
            if np.abs(pa @ pr[b]).max() > PROJECTOR_TOL:
                raise CopchanError(f"{a} and {b} are not orthogonal")
    rhs = 4 * pr["Psi"] + pr["E"] + pr["F"] + 4 * pr["P"] / d**2
    return float(np.linalg.norm(k.matrix @ k.matrix - rhs))


# ---------------------------------------------------------------------------
# Channel coefficients and the mixture quadratic form
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ChannelVector:
    """Real coefficients ``c[mu, alpha] = Tr(Lambda(l_mu) l_alpha)``, ``mu, alpha = 0..D``."""

    d: int
    coeffs: np.ndarray = field(repr=False)

    @property
    def block(self) -> np.ndarray:
        return self.coeffs[1:, 1:]

    @property
    def ket(self) -> np.ndarray:
        return self.block.reshape(-1)

    @property
    def identity_row(self) -> np.ndarray:
        """``Tr(Lambda(I) l_alpha)`` for ``alpha = 1..D``; zero iff unital."""
        return self.coeffs[0, 1:]

    def trace_preservation_error(self) -> float:
        expected = np.zeros(self.d * self.d)
        expected[0] = self.d
        return float(np.abs(self.coeffs[:, 0] - expected).max())


def channel_vector(ch: QuantumChannel) -> ChannelVector:
    basis = make_basis(ch.d)
    c = np.einsum("mij,aji->ma", ch.basis_images(), basis.lambdas)
    return ChannelVector(ch.d, c.real)


def quadratic_form(k: KOperator) -> np.ndarray:
    """``(2 - K)(1 + K)``."""
    eye = np.eye(len(k.matrix))
    return (2 * eye - k.matrix) @ (eye + k.matrix)


def mixture_terms(ch: QuantumChannel, k: KOperator | None = None) -> tuple[float, float]:
    """``(<L|(2 - K)(1 + K)|L>, 2 |Tr(Lambda(I) l_alpha)|^2)``.

    The second term is the contribution of index pairs containing 0; it
    vanishes for unital channels.
    """
    k = k or build_k(ch.d)
    v = channel_vector(ch)
    q = float(v.ket @ quadratic_form(k) @ v.ket)
    return q, float(2 * v.identity_row @ v.identity_row)


def mixture_cop_degree(ch: QuantumChannel, p: float, k: KOperator | None = None,
                       tol: float = COP_TOL) -> float:
    """CoP degree of ``p I + (1 - p) ch`` for a CoP channel ``ch``, as a
    quadratic form in the channel coefficients."""
    if not 0 < p < 1:
        raise ValueError(f"mixing weight must satisfy 0 < p < 1, got {p}")
    delta = cop_degree(ch)
    if delta > tol:
        raise HypothesisError(f"channel is not CoP (delta = {delta:.3e}); the quadratic form does not apply")
    q, nonunital = mixture_terms(ch, k)
    return p * p * (1 - p) ** 2 * (q + nonunital)


@dataclass(frozen=True)
class IdentityMixtureResult:
    verdict: str
    mixture_delta: float
    a: float
    h: list
    residual: float


def identity_mixture_check(ch: QuantumChannel, p: float, tol: float = COP_TOL) -> IdentityMixtureResult:
    """Decide whether ``p I + (1 - p) ch`` stays CoP, and split ``|Lambda>``
    into ``a |Psi> + sum h_tau |f_tau>`` plus a residual."""
    if ch.d < 3:
        raise DimensionError("the mixture classification applies to d >= 3")
    if not 0 < p < 1:
        raise ValueError(f"mixing weight must satisfy 0 < p < 1, got {p}")
    delta_ch = cop_degree(ch)
    if delta_ch > tol:
        raise HypothesisError(f"channel is not CoP (delta = {delta_ch:.3e})")
    mixed = cop_degree(chn.mixture(p, chn.identity(ch.d), ch))
    basis = np.vstack([psi_vector(ch.d, normalized=False), f_vectors(ch.d)]).T
    ket = channel_vector(ch).ket
    coef, *_ = np.linalg.lstsq(basis, ket, rcond=None)
    resid = float(np.linalg.norm(ket - basis @ coef))
    verdict = "cloning" if mixed <= tol else "non-cloning"
    return IdentityMixtureResult(verdict, float(mixed), float(coef[0]), [float(x) for x in coef[1:]], resid)
