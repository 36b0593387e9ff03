"""Entropic functionals on states and channels. All logarithms are base 2."""
from __future__ import annotations

import math

import numpy as np

from .channel import QChannel, apply
from .linalg import (
    CLIP_TOL,
    DimensionError,
    as_cmatrix,
    clip_spectrum,
    eigvalsh,
    hermitian_eig,
    is_density,
    maximally_mixed,
    sqrt_psd,
)

SUPPORT_TOL = 1e-12


class NotDensityError(ValueError):
    pass


def _require_density(rho) -> np.ndarray:
    rho = as_cmatrix(rho)
    if not is_density(rho):
        raise NotDensityError("input is not a density matrix within 1e-8")
    return rho


def spectrum_entropy(w) -> float:
    """Shannon entropy in bits of a (possibly slightly negative) spectrum."""
    w = clip_spectrum(w)
    w = w[w > 0]
    return float(-np.sum(w * np.log2(w)))


def entropy(rho) -> float:
    rho = _require_density(rho)
    return spectrum_entropy(eigvalsh(0.5 * (rho + rho.conj().T)))


def relative_entropy(rho, sigma) -> float:
    """R(rho||sigma) in bits; ``math.inf`` when supp(rho) is not inside supp(sigma)."""
    rho = _require_density(rho)
    sigma = _require_density(sigma)
    if rho.shape != sigma.shape:
        raise DimensionError(f"shapes differ: {rho.shape} vs {sigma.shape}")
    sr = hermitian_eig(0.5 * (rho + rho.conj().T))
    ss = hermitian_eig(0.5 * (sigma + sigma.conj().T))
    p = clip_spectrum(sr.eigenvalues)
    q = clip_spectrum(ss.eigenvalues)
    # overlaps[k, l] = |<r_k|s_l>|^2
    overlaps = np.abs(sr.eigenvectors.conj().T @ ss.eigenvectors) ** 2
    null = q <= SUPPORT_TOL
    if np.any(p[:, None] * overlaps[:, null] > CLIP_TOL):
        return math.inf
    pos = p > 0
    tr_rho_log_rho = float(np.sum(p[pos] * np.log2(p[pos])))
    log_q = np.where(null, 0.0, np.log2(np.where(null, 1.0, q)))
    tr_rho_log_sigma = float(np.sum(p[:, None] * overlaps * log_q[None, :]))
    return tr_rho_log_rho - tr_rho_log_sigma


def complementary_output(ch: QChannel, rho: np.ndarray) -> np.ndarray:
    """Environment state with entries ``tr(K_i rho K_j^dagger)``."""
    k = ch.kraus
    return np.einsum("iab,bc,jac->ij", k, rho, k.conj())


def _ic_unchecked(rho: np.ndarray, ch: QChannel) -> float:
    out = apply(ch, rho)
    env = complementary_output(ch, rho)
    return spectrum_entropy(eigvalsh(out)) - spectrum_entropy(eigvalsh(env))


def coherent_information(rho, ch: QChannel) -> float:
    rho = _require_density(rho)
    if rho.shape != (ch.d_in, ch.d_in):
        raise DimensionError(f"state of shape {rho.shape} does not fit channel input {ch.d_in}")
    return _ic_unchecked(rho, ch)


def purification(rho) -> np.ndarray:
    """|phi_rho> = sum_k sqrt(lam_k) |v_k>|k> on system (x) reference."""
    spec = hermitian_eig(as_cmatrix(rho))
    w = np.sqrt(np.clip(spec.eigenvalues, 0.0, None))
    return (spec.eigenvectors * w).reshape(-1)


def coherent_information_purified(rho, ch: QChannel) -> float:
    """Coherent information from the joint output on a purification.

    Independent of :func:`coherent_information`; kept as a cross-check.
    """
    rho = _require_density(rho)
    d = ch.d_in
    psi = purification(rho)
    joint_in = np.outer(psi, psi.conj())
    # (Phi (x) 1) on system-major ordering
    k = ch.kraus
    t = joint_in.reshape(d, d, d, d)
    joint_out = np.einsum("kab,bicj,kdc->aidj", k, t, k.conj()).reshape(ch.d_out * d, ch.d_out * d)
    return entropy(apply(ch, rho)) - spectrum_entropy(eigvalsh(0.5 * (joint_out + joint_out.conj().T)))


def mutual_information(rho, ch: QChannel) -> float:
    rho = _require_density(rho)
    return entropy(rho) + coherent_information(rho, ch)


def i_of_channel(ch: QChannel) -> float:
    """Coherent information at the maximally mixed input."""
    return coherent_information(maximally_mixed(ch.d_in), ch)


def state_fidelity(rho, sigma) -> float:
    """(tr sqrt(sqrt(rho) sigma sqrt(rho)))**2."""
    rho = as_cmatrix(rho)
    sigma = as_cmatrix(sigma)
    if rho.shape != sigma.shape:
        raise DimensionError(f"shapes differ: {rho.shape} vs {sigma.shape}")
    s = sqrt_psd(0.5 * (rho + rho.conj().T))
    inner = s @ sigma @ s
    w = np.clip(eigvalsh(0.5 * (inner + inner.conj().T)), 0.0, None)
    f = float(np.sum(np.sqrt(w)) ** 2)
    return min(max(f, 0.0), 1.0)


def entanglement_fidelity(a: QChannel, b: QChannel) -> float:
    """Fidelity of the Choi states of ``a`` and ``b``.

    With ``choi = A A^dagger`` where the columns of ``A`` are the vectorized
    Kraus operators, the fidelity is ``||A^dagger B||_1^2``. This avoids square
    roots of rank-deficient Choi matrices.
    """
    if (a.d_in, a.d_out) != (b.d_in, b.d_out):
        raise DimensionError("channels act between different spaces")
    fa = a.kraus.reshape(a.n_kraus, -1)
    fb = b.kraus.reshape(b.n_kraus, -1)
    overlap = fa.conj() @ fb.T / a.d_in
    f = float(np.sum(np.linalg.svd(overlap, compute_uv=False)) ** 2)
    return min(max(f, 0.0), 1.0)
