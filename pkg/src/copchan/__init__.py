"""Commutativity-preserving quantum channels: CoP degree, four-copy witnesses,
the structure-constant operator K for identity mixtures, and discord tools."""

from .channels import (
    QuantumChannel, amplitude_damping, choi_state, cloning, from_choi, from_kraus, hamiltonian,
    identity, mixture, semi_classical, transpose_cloning, unitary,
)
from .cop_analysis import (
    CopReport, analyze, commuting_pair_probe, cop_degree, max_commutator_residual, qubit_cop_criterion,
    discord_creation_check, verify_haar_average, witness_expectations, witness_expectations_oracle,
)
from .discord import BipartiteState, a_discord_projective, discord_increase_experiment, zero_a_discord
from .mixture_spectrum import build_k, identity_mixture_check, mixture_cop_degree, verify_k_squared_decomposition
from .operator_core import (
    HermitianBasis, PermutationOperator, commutator, make_basis, permutation_matrix,
    trace_product_permuted,
)

__version__ = "0.1.0"
