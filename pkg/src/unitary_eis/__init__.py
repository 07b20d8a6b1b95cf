"""Eisenstein series on U(n,n) through their q-expansions: exact and p-adic coefficients,
pullbacks, differential operators and the Eisenstein measure."""

from .arith import BigRational, PadicTruncated, hensel_sqrt, padic_invert, padic_pow
from .cmfield import CMField, CMFieldElement, WeightTuple, norm_kv
from .eisenstein import (
    CuspDatum,
    EquivariantFunction,
    MeasureDomain,
    eisenstein_qexp,
    hf_transform,
    integrate_measure,
    symmetrize,
    theta_integrand,
    validate_equivariance,
    verify_identity,
    weight_shift_function,
)
from .hermitian import HermitianMatrix, enumerate_offdiag, enumerate_positive
from .qexp import PulledBackQExpansion, QExpansion, deserialize, serialize, swap_blocks, theta_pullback
from .reps import HighestWeight, decompose_tau, highest_weight_vector, phi_kappa_eval, restrict_decompose

__version__ = "0.1.0"

__all__ = [
    "BigRational", "PadicTruncated", "hensel_sqrt", "padic_invert", "padic_pow",
    "CMField", "CMFieldElement", "WeightTuple", "norm_kv",
    "CuspDatum", "EquivariantFunction", "MeasureDomain", "eisenstein_qexp", "hf_transform",
    "integrate_measure", "symmetrize", "theta_integrand", "validate_equivariance", "verify_identity",
    "weight_shift_function",
    "HermitianMatrix", "enumerate_offdiag", "enumerate_positive",
    "PulledBackQExpansion", "QExpansion", "deserialize", "serialize", "swap_blocks", "theta_pullback",
    "HighestWeight", "decompose_tau", "highest_weight_vector", "phi_kappa_eval", "restrict_decompose",
]
