"""Dense complex matrix kernel.

Conventions used across the package: matrices are row-major numpy arrays and
tensor products put the left factor on the major index, so that for a
bipartite operator the basis label ``(a, i)`` maps to flat index ``a * d2 + i``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

HERMITIAN_TOL = 1e-10
CLIP_TOL = 1e-10
PSD_TOL = 1e-8


class DimensionError(ValueError):
    """Raised when operand shapes are inconsistent."""


class NotHermitianError(ValueError):
    pass


class NotPSDError(ValueError):
    pass


@dataclass(frozen=True)
class HermitianSpectrum:
    """Eigenvalues in descending order and the matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_cmatrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def _check_square(m: np.ndarray) -> None:
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"matrix is not square: {m.shape}")


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    m = as_cmatrix(m)
    return m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T), initial=0.0) <= tol


def hermitian_eig(m) -> HermitianSpectrum:
    """Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.

    The input is symmetrized before the LAPACK call so that round-off in the
    lower triangle cannot leak into the result.
    """
    m = as_cmatrix(m)
    _check_square(m)
    if not is_hermitian(m):
        raise NotHermitianError("matrix is not Hermitian within 1e-10")
    h = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(h)
    return HermitianSpectrum(eigenvalues=w[::-1].copy(), eigenvectors=v[:, ::-1].copy())


def eigvalsh(m) -> np.ndarray:
    """Descending eigenvalues only; no validation (hot path)."""
    return np.linalg.eigvalsh(m)[::-1]


def tensor(*ops) -> np.ndarray:
    """Kronecker product, left operand on the major index."""
    if not ops:
        return np.ones((1, 1), dtype=complex)
    return reduce(np.kron, (np.asarray(op, dtype=complex) for op in ops))


def partial_trace(m, dims, keep) -> np.ndarray:
    """Reduced operator on the subsystems listed in ``keep``.

    ``dims`` gives the subsystem dimensions in tensor order; ``keep`` is any
    collection of subsystem indices (0-based). Kept subsystems stay in their
    original relative order.
    """
    m = as_cmatrix(m)
    dims = [int(d) for d in dims]
    n = int(np.prod(dims)) if dims else 1
    if m.shape != (n, n):
        raise DimensionError(f"dims {dims} do not match matrix shape {m.shape}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    nsys = len(dims)
    t = m.reshape(dims + dims)
    # einsum labels: row indices 0..nsys-1, column indices nsys..2nsys-1
    row = list(range(nsys))
    col = [nsys + i if i in keep else i for i in range(nsys)]
    out = keep + [nsys + k for k in keep]
    r = np.einsum(t, row + col, out)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    return np.asarray(r).reshape(dk, dk)


def clip_spectrum(w: np.ndarray, tol: float = CLIP_TOL) -> np.ndarray:
    """Zero out eigenvalues in ``[-tol, 0)``; larger negatives pass through."""
    w = np.array(w, dtype=float)
    w[(w < 0) & (w >= -tol)] = 0.0
    return w


def sqrt_psd(m) -> np.ndarray:
    """Principal square root of a positive semidefinite matrix."""
    spec = hermitian_eig(m)
    if spec.eigenvalues.size and spec.eigenvalues[-1] < -PSD_TOL:
        raise NotPSDError(f"smallest eigenvalue {spec.eigenvalues[-1]:.3e} is negative")
    w = np.sqrt(np.clip(spec.eigenvalues, 0.0, None))
    v = spec.eigenvectors
    return (v * w) @ v.conj().T


def inv_sqrt_pd(m) -> np.ndarray:
    spec = hermitian_eig(m)
    if spec.eigenvalues[-1] <= 0:
        raise NotPSDError("matrix is not positive definite")
    v = spec.eigenvectors
    return (v / np.sqrt(spec.eigenvalues)) @ v.conj().T


def is_density(rho, tol: float = PSD_TOL) -> bool:
    rho = as_cmatrix(rho)
    if rho.shape[0] != rho.shape[1] or not is_hermitian(rho, tol):
        return False
    if abs(np.trace(rho) - 1) > tol:
        return False
    return eigvalsh(0.5 * (rho + rho.conj().T))[-1] >= -tol


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def maximally_mixed(d: int) -> np.ndarray:
    return np.eye(d, dtype=complex) / d


def ebit(d: int = 2) -> np.ndarray:
    """Projector onto sum_i |ii>/sqrt(d)."""
    v = np.eye(d, dtype=complex).reshape(d * d) / np.sqrt(d)
    return np.outer(v, v.conj())


PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
