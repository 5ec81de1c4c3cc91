import numpy as np
import pytest

from opocascade import ChainSpec, OpoParams


def brute_force_spectrum(V):
    """Symplectic eigenvalues from the nonsymmetric route: sqrt eig(-(Omega V)^2)."""
    V = np.asarray(V, dtype=float)
    n = V.shape[0] // 2
    omega = np.kron(np.eye(n), [[0.0, 1.0], [-1.0, 0.0]])
    M = omega @ V
    ev = np.linalg.eigvals(-(M @ M))
    nus = np.sort(np.sqrt(np.abs(ev.real)))
    return 0.5 * (nus[0::2] + nus[1::2])


def random_covariance(rng, n_modes):
    """Physical random covariance S S^T + vacuum-admixed noise."""
    dim = 2 * n_modes
    A = rng.normal(size=(dim, dim))
    return A @ A.T + 0.5 * np.eye(dim)


def single_mode_symplectic(theta, r):
    rot = np.array([[np.cos(theta), np.sin(theta)], [-np.sin(theta), np.cos(theta)]])
    return rot @ np.diag([np.exp(r), np.exp(-r)])


def embed(S2, mode, n_modes):
    S = np.eye(2 * n_modes)
    S[2 * mode : 2 * mode + 2, 2 * mode : 2 * mode + 2] = S2
    return S


PENTA_OPOS = ((0.05, 0.01, 1.0), (0.04, 0.0075, 0.45))


@pytest.fixture
def tripartite_params():
    return OpoParams(gamma0=0.05, gamma=0.01, sigma=1.5, omega_rel=0.5)


@pytest.fixture
def penta_spec():
    return ChainSpec(PENTA_OPOS, sigma_first=1.5, omega_rel_first=0.1)
