"""Shared numerical helpers for complex matrix work.

Everything in this package funnels rank decisions, positivity checks and
random test data through the few functions below so that tolerances are
applied consistently.
"""

from __future__ import annotations

import numpy as np

# Frobenius-norm residual tolerance used by default in all verifications.
DEFAULT_TOL = 1e-9
# Eigenvalues above this floor count as nonnegative.
EIG_FLOOR = -1e-9
# Relative threshold for rank decisions (rank-revealing pivoting).
RANK_RTOL = 1e-10


def dag(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return m.conj().T


def frob(m: np.ndarray) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(m))


def vec(m: np.ndarray) -> np.ndarray:
    """Row-major flattening of a matrix to a vector."""
    return np.asarray(m, dtype=complex).reshape(-1)


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return (m + dag(m)) / 2


def min_eig(m: np.ndarray) -> float:
    """Smallest eigenvalue of the Hermitian part of ``m``."""
    return float(np.linalg.eigvalsh(hermitian_part(m))[0])


def is_psd(m: np.ndarray, floor: float = EIG_FLOOR) -> bool:
    return min_eig(m) >= floor


def block_matrix(blocks: np.ndarray) -> np.ndarray:
    """Assemble an (n, n, d, d) array of blocks into an (n*d, n*d) matrix."""
    n = blocks.shape[0]
    d = blocks.shape[2]
    return blocks.transpose(0, 2, 1, 3).reshape(n * d, n * d)


def random_hermitian(dim: int, rng: np.random.Generator, radius: float = 2.0) -> np.ndarray:
    """Random Hermitian matrix with spectrum inside [-radius, radius]."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = hermitian_part(g)
    top = float(np.max(np.abs(np.linalg.eigvalsh(h)))) or 1.0
    return h * (radius / top)


def random_density(dim: int, rng: np.random.Generator, min_weight: float = 0.05) -> np.ndarray:
    """Random full-rank density matrix (positive definite, unit trace)."""
    w = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = w @ dag(w) + min_weight * np.eye(dim)
    return rho / np.trace(rho).real


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))
