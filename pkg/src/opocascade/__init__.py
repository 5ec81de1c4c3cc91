"""Quantum noise and multipartite entanglement of cascaded above-threshold OPOs."""

from .covariance import (
    ChainSpec,
    CovMatrix,
    MirrorSet,
    apply_output_loss,
    chain_covariance,
    chain_transfer_map,
    partial_transpose,
    reduce,
    single_opo_covariance,
)
from .entanglement import (
    Bipartition,
    EntanglementReport,
    certify,
    enumerate_bipartitions,
    log_negativity,
    named_quantities,
    pt_min_eigenvalue,
)
from .linalg import check_physical, eig_symmetric, sqrt_psd, symplectic_spectrum
from .opo import (
    OpoParams,
    TransferMap,
    build_transfer_map,
    classical_steady_state,
    commutation_residual,
    transfer_coefficients,
)

__version__ = "0.1.0"

__all__ = [
    "Bipartition",
    "ChainSpec",
    "CovMatrix",
    "EntanglementReport",
    "MirrorSet",
    "OpoParams",
    "TransferMap",
    "apply_output_loss",
    "build_transfer_map",
    "certify",
    "chain_covariance",
    "chain_transfer_map",
    "check_physical",
    "classical_steady_state",
    "commutation_residual",
    "eig_symmetric",
    "enumerate_bipartitions",
    "log_negativity",
    "named_quantities",
    "partial_transpose",
    "pt_min_eigenvalue",
    "reduce",
    "single_opo_covariance",
    "sqrt_psd",
    "symplectic_spectrum",
    "transfer_coefficients",
]
