"""Dense kernels for small real symmetric matrices and symplectic spectra.

Quadratures are ordered ``(p1, q1, p2, q2, ...)`` throughout, so the
symplectic form is block diagonal with 2x2 blocks ``[[0, 1], [-1, 0]]``.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NotPositiveDefinite, NotPositiveSemidefinite, ValidationError

SYMMETRY_TOL = 1e-10
PSD_CLAMP = -1e-10
PHYSICAL_TOL = 1e-9


def as_symmetric(M):
    """Return ``M`` as a read-only float array with exact symmetry.

    Raises ValidationError for non-square input or for an asymmetry larger
    than rounding noise; the accepted small asymmetry is averaged away.
    """
    M = np.array(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise ValidationError(f"expected a non-empty square matrix, got shape {M.shape}")
    scale = max(1.0, float(np.abs(M).max()))
    if np.abs(M - M.T).max() > SYMMETRY_TOL * scale:
        raise ValidationError("matrix is not symmetric")
    M = 0.5 * (M + M.T)
    M.setflags(write=False)
    return M


@lru_cache(maxsize=None)
def _omega(n_modes):
    w = np.array([[0.0, 1.0], [-1.0, 0.0]])
    out = np.kron(np.eye(n_modes), w)
    out.setflags(write=False)
    return out


def symplectic_form(dim):
    """Block-diagonal symplectic form of even dimension ``dim``."""
    if dim <= 0 or dim % 2:
        raise ValidationError(f"symplectic form needs a positive even dimension, got {dim}")
    return _omega(dim // 2)


def eig_symmetric(M):
    """Eigen-decomposition of a real symmetric matrix.

    Returns ``(eigenvalues, basis)`` with eigenvalues ascending and the
    columns of ``basis`` orthonormal, so ``M = basis @ diag(w) @ basis.T``.
    """
    M = as_symmetric(M)
    w, U = np.linalg.eigh(M)
    return w, U


def sqrt_psd(M):
    """Symmetric square root of a positive semidefinite matrix."""
    w, U = eig_symmetric(M)
    if w[0] < PSD_CLAMP * max(1.0, abs(w[-1])):
        raise NotPositiveSemidefinite(f"smallest eigenvalue {w[0]:.3e} < 0")
    root = (U * np.sqrt(np.clip(w, 0.0, None))) @ U.T
    return as_symmetric(root)


def _paired_singular_values(A):
    # eigenvalues of [[0, A], [A^T, 0]] are +- the singular values of A;
    # for antisymmetric A each singular value appears twice
    dim = A.shape[0]
    block = np.zeros((2 * dim, 2 * dim))
    block[:dim, dim:] = A
    block[dim:, :dim] = A.T
    vals = np.linalg.eigvalsh(block)[dim:]
    return np.sort(0.5 * (vals[0::2] + vals[1::2]))


def symplectic_spectrum_from_factor(G):
    """Symplectic eigenvalues of ``V = G G^T`` without forming ``V``.

    With ``G^T = Q R`` the matrices ``V = R^T R`` and ``R Omega R^T`` share
    their symplectic data, and the QR step is backward stable in ``G``. This
    keeps eigenvalues near one accurate when ``V`` itself spans many orders
    of magnitude (strong squeezing at low analysis frequency).
    """
    G = np.asarray(G, dtype=float)
    dim = G.shape[0]
    if G.ndim != 2 or dim % 2 or G.shape[1] < dim:
        raise ValidationError(f"factor of shape {G.shape} cannot give a full-rank covariance")
    R = np.linalg.qr(G.T, mode="r")
    if np.abs(np.diag(R)).min() <= 1e-14 * np.abs(R).max():
        raise NotPositiveDefinite("covariance factor is rank deficient")
    A = R @ symplectic_form(dim) @ R.T
    return _paired_singular_values(0.5 * (A - A.T))


def symplectic_spectrum(V):
    """Symplectic eigenvalues of a positive definite covariance, ascending.

    ``V`` is a matrix, or an object with ``data`` and an optional ``factor``
    (``data = factor @ factor.T``); a factor is used when present.

    From the matrix, the Cholesky factor ``V = L L^T`` goes through the same
    route; it keeps the relative accuracy of the small eigenvalues of ``V``
    that an eigen-decomposition square root loses.
    """
    factor = getattr(V, "factor", None)
    if factor is not None:
        return symplectic_spectrum_from_factor(factor)
    V = as_symmetric(getattr(V, "data", V))
    if V.shape[0] % 2:
        raise ValidationError(f"covariance dimension {V.shape[0]} is not even")
    try:
        L = np.linalg.cholesky(V)
    except np.linalg.LinAlgError:
        w = np.linalg.eigvalsh(V)
        raise NotPositiveDefinite(f"covariance has eigenvalue {w[0]:.3e} <= 0") from None
    return symplectic_spectrum_from_factor(L)


@dataclass(frozen=True)
class PhysicalityVerdict:
    physical: bool
    nu_min: float

    def __bool__(self):
        return self.physical


def check_physical(V, tol=PHYSICAL_TOL):
    """Robertson-Schroedinger check: every symplectic eigenvalue >= 1 - tol."""
    nu_min = float(symplectic_spectrum(V)[0])
    return PhysicalityVerdict(nu_min >= 1.0 - tol, nu_min)
