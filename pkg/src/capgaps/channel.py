"""Quantum channel representations and conversions.

A channel is stored as a stack of Kraus operators of shape ``(r, d_out, d_in)``.
Choi states are trace-one and ordered (output, input): the entry
``choi[a * d_in + i, b * d_in + j]`` equals ``<a| Phi(|i><j|) |b> / d_in``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .linalg import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    DimensionError,
    as_cmatrix,
    hermitian_eig,
    inv_sqrt_pd,
    is_density,
    partial_trace,
)

COMPLETENESS_TOL = 1e-8
READ_DRIFT_TOL = 1e-6
RANK_CUTOFF = 1e-10
MAX_FACTOR_DIM = 2**7


class InvalidChannelError(ValueError):
    pass


class InvalidChoiError(ValueError):
    pass


class CapacityGuardError(ValueError):
    """Raised when a tensor power would exceed the supported dimension."""


@dataclass(frozen=True, eq=False)
class QChannel:
    kraus: np.ndarray
    d_in: int = field(init=False)
    d_out: int = field(init=False)

    def __post_init__(self):
        k = np.array(self.kraus, dtype=complex)
        if k.ndim == 2:
            k = k[None]
        if k.ndim != 3 or k.shape[0] == 0:
            raise InvalidChannelError(f"Kraus stack must have shape (r, d_out, d_in), got {k.shape}")
        k.setflags(write=False)
        object.__setattr__(self, "kraus", k)
        object.__setattr__(self, "d_out", k.shape[1])
        object.__setattr__(self, "d_in", k.shape[2])
        drift = completeness_drift(k)
        if drift > COMPLETENESS_TOL:
            raise InvalidChannelError(f"Kraus operators are not trace preserving (drift {drift:.2e})")

    @property
    def n_kraus(self) -> int:
        return self.kraus.shape[0]

    def __call__(self, rho) -> np.ndarray:
        return apply(self, rho)

    def __repr__(self):
        return f"QChannel(d_in={self.d_in}, d_out={self.d_out}, n_kraus={self.n_kraus})"


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    d_in: int
    d_out: int
    matrix: np.ndarray

    def __post_init__(self):
        m = as_cmatrix(self.matrix)
        n = self.d_in * self.d_out
        if m.shape != (n, n):
            raise InvalidChoiError(f"Choi matrix shape {m.shape} does not match d_out*d_in={n}")
        object.__setattr__(self, "matrix", m)

    def validate(self, tol: float = COMPLETENESS_TOL) -> None:
        if not is_density(self.matrix, tol):
            raise InvalidChoiError("Choi matrix is not a positive trace-one operator")
        marginal = partial_trace(self.matrix, [self.d_out, self.d_in], [1])
        if np.max(np.abs(marginal - np.eye(self.d_in) / self.d_in)) > tol:
            raise InvalidChoiError("input marginal of the Choi matrix is not maximally mixed")


@dataclass(frozen=True)
class AffineRep:
    """Bloch-vector action ``r -> T r + t`` of a qubit channel."""

    t: np.ndarray
    T: np.ndarray

    def apply(self, bloch) -> np.ndarray:
        return self.T @ np.asarray(bloch, dtype=float) + self.t

    @property
    def t_norm(self) -> float:
        return float(np.linalg.norm(self.t))

    @property
    def t_frob(self) -> float:
        return float(np.linalg.norm(self.T, "fro"))


def completeness_drift(kraus: np.ndarray) -> float:
    m = np.einsum("kai,kaj->ij", kraus.conj(), kraus)
    return float(np.max(np.abs(m - np.eye(kraus.shape[2]))))


def apply(ch: QChannel, rho) -> np.ndarray:
    rho = as_cmatrix(rho)
    if rho.shape != (ch.d_in, ch.d_in):
        raise DimensionError(f"state of shape {rho.shape} does not fit channel input {ch.d_in}")
    k = ch.kraus
    return np.einsum("kab,bc,kdc->ad", k, rho, k.conj())


def choi_from_kraus(ch: QChannel) -> ChoiMatrix:
    vecs = ch.kraus.reshape(ch.n_kraus, -1) / np.sqrt(ch.d_in)
    return ChoiMatrix(ch.d_in, ch.d_out, vecs.T @ vecs.conj())


def choi_matrix(ch: QChannel) -> np.ndarray:
    return choi_from_kraus(ch).matrix


def kraus_from_choi(c: ChoiMatrix, cutoff: float = RANK_CUTOFF) -> QChannel:
    c.validate()
    spec = hermitian_eig(c.matrix)
    keep = spec.eigenvalues > cutoff
    w = spec.eigenvalues[keep]
    v = spec.eigenvectors[:, keep]
    kraus = (np.sqrt(c.d_in * w) * v).T.reshape(-1, c.d_out, c.d_in)
    return QChannel(kraus)


def channel_rank(ch: QChannel, cutoff: float = RANK_CUTOFF) -> int:
    # nonzero spectrum of sum_k |k>><<k| equals that of the Kraus Gram matrix
    vecs = ch.kraus.reshape(ch.n_kraus, -1)
    gram = vecs.conj() @ vecs.T / ch.d_in
    w = np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))
    return int(np.sum(w > cutoff))


def complementary(ch: QChannel) -> QChannel:
    """Channel to the environment, environment basis indexed by Kraus order."""
    return QChannel(np.transpose(ch.kraus, (1, 0, 2)))


def compose(a: QChannel, b: QChannel) -> QChannel:
    """The channel ``a o b`` (apply ``b`` first)."""
    if b.d_out != a.d_in:
        raise DimensionError(f"cannot compose: b outputs {b.d_out}, a expects {a.d_in}")
    k = np.einsum("iab,jbc->ijac", a.kraus, b.kraus)
    return QChannel(k.reshape(-1, a.d_out, b.d_in))


def tensor_channels(a: QChannel, b: QChannel) -> QChannel:
    k = np.einsum("iab,jcd->ijacbd", a.kraus, b.kraus)
    return QChannel(k.reshape(-1, a.d_out * b.d_out, a.d_in * b.d_in))


def tensor_pow(ch: QChannel, n: int) -> QChannel:
    if n < 1:
        raise ValueError("tensor power needs n >= 1")
    if ch.d_in**n > MAX_FACTOR_DIM or ch.d_out**n > MAX_FACTOR_DIM:
        raise CapacityGuardError(f"{n}-fold tensor power exceeds dimension cap {MAX_FACTOR_DIM}")
    out = ch
    for _ in range(n - 1):
        out = tensor_channels(out, ch)
    return out


def choi_distance(a: QChannel, b: QChannel) -> float:
    """Frobenius distance between Choi states."""
    if (a.d_in, a.d_out) != (b.d_in, b.d_out):
        raise DimensionError("channels act between different spaces")
    return float(np.linalg.norm(choi_matrix(a) - choi_matrix(b)))


_BLOCH = (PAULI_X, PAULI_Y, PAULI_Z)


def affine_from_channel(ch: QChannel) -> AffineRep:
    if ch.d_in != 2 or ch.d_out != 2:
        raise DimensionError("affine representation is defined for qubit channels only")
    out_mixed = apply(ch, np.eye(2) / 2)
    t = np.array([np.trace(s @ out_mixed).real for s in _BLOCH])
    T = np.array([[np.trace(sk @ apply(ch, sl)).real / 2 for sl in _BLOCH] for sk in _BLOCH])
    return AffineRep(t=t, T=T)


def bloch_to_density(r) -> np.ndarray:
    x, y, z = r
    return 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]])


def density_to_bloch(rho) -> np.ndarray:
    rho = as_cmatrix(rho)
    return np.array([np.trace(s @ rho).real for s in _BLOCH])


# -- standard channels --------------------------------------------------------


def identity_channel(d: int = 2) -> QChannel:
    return QChannel(np.eye(d, dtype=complex)[None])


def unitary_channel(u) -> QChannel:
    return QChannel(as_cmatrix(u)[None])


def pauli_channel(px: float, py: float, pz: float) -> QChannel:
    p0 = 1.0 - px - py - pz
    if min(p0, px, py, pz) < 0:
        raise ValueError("Pauli probabilities must be nonnegative and sum to at most 1")
    ops = [np.sqrt(p0) * np.eye(2), np.sqrt(px) * PAULI_X, np.sqrt(py) * PAULI_Y, np.sqrt(pz) * PAULI_Z]
    return QChannel(np.array(ops))


def bitflip(p: float) -> QChannel:
    return pauli_channel(p, 0.0, 0.0)


def dephasing(p: float) -> QChannel:
    """Z-dephasing: the state is hit by Z with probability ``p``."""
    return pauli_channel(0.0, 0.0, p)


def depolarizing(p: float) -> QChannel:
    """``rho -> (1 - p) rho + p I/2``; ``p = 1`` is complete depolarization."""
    return pauli_channel(p / 4, p / 4, p / 4)


def amplitude_damping(gamma: float) -> QChannel:
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    return QChannel(np.array([k0, k1]))


def replacement_channel(sigma, d_in: int) -> QChannel:
    """Channel discarding its input and preparing ``sigma``."""
    spec = hermitian_eig(sigma)
    ops = []
    for lam, vec in zip(spec.eigenvalues, spec.eigenvectors.T):
        if lam <= RANK_CUTOFF:
            continue
        for i in range(d_in):
            k = np.zeros((len(vec), d_in), dtype=complex)
            k[:, i] = np.sqrt(lam) * vec
            ops.append(k)
    return QChannel(np.array(ops))


def completely_depolarizing(d: int = 2) -> QChannel:
    return replacement_channel(np.eye(d) / d, d)


def completely_dephasing() -> QChannel:
    return dephasing(0.5)


NOISE_FAMILIES = {
    "bitflip": bitflip,
    "dephasing": dephasing,
    "depolarizing": depolarizing,
    "amplitude_damping": amplitude_damping,
}


def noise_from_string(text: str) -> QChannel:
    """Parse ``family:param``, e.g. ``bitflip:0.1``."""
    name, _, value = text.partition(":")
    if name not in NOISE_FAMILIES or not value:
        raise ValueError(f"unknown noise {text!r}; expected one of {sorted(NOISE_FAMILIES)} as name:param")
    p = float(value)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"noise parameter {p} outside [0, 1]")
    return NOISE_FAMILIES[name](p)


# -- JSON ---------------------------------------------------------------------


def channel_to_dict(ch: QChannel) -> dict:
    kraus = [
        [[float(z.real), float(z.imag)] for z in k.reshape(-1)]
        for k in ch.kraus
    ]
    return {"d_in": ch.d_in, "d_out": ch.d_out, "kraus": kraus}


def channel_from_dict(obj: dict) -> QChannel:
    """Build a channel from its JSON form, repairing small completeness drift."""
    try:
        d_in, d_out = int(obj["d_in"]), int(obj["d_out"])
        raw = np.array(obj["kraus"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidChannelError(f"malformed channel object: {exc}") from exc
    if raw.ndim != 3 or raw.shape[1:] != (d_out * d_in, 2):
        raise InvalidChannelError(f"kraus array of shape {raw.shape} does not match {d_out}x{d_in}")
    kraus = (raw[..., 0] + 1j * raw[..., 1]).reshape(-1, d_out, d_in)
    drift = completeness_drift(kraus)
    if drift > READ_DRIFT_TOL:
        raise InvalidChannelError(f"Kraus completeness drift {drift:.2e} exceeds {READ_DRIFT_TOL}")
    if drift > 1e-12:
        m = np.einsum("kai,kaj->ij", kraus.conj(), kraus)
        kraus = kraus @ inv_sqrt_pd(m)
    return QChannel(kraus)


def dump_channels(channels, path, manifest: dict | None = None) -> None:
    doc = {"manifest": manifest or {}, "channels": [channel_to_dict(c) for c in channels]}
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_channels(path) -> tuple[list[QChannel], dict]:
    """Read a batch file, or a single channel object, returning (channels, manifest)."""
    doc = json.loads(Path(path).read_text())
    if isinstance(doc, dict) and "kraus" in doc:
        return [channel_from_dict(doc)], {}
    if not isinstance(doc, dict) or "channels" not in doc:
        raise InvalidChannelError(f"{path}: neither a channel nor a channel batch")
    return [channel_from_dict(c) for c in doc["channels"]], dict(doc.get("manifest", {}))
