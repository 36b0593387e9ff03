"""Codings as encoder/decoder channel pairs, small stabilizer codes, and error checks."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import (
    MAX_FACTOR_DIM,
    CapacityGuardError,
    ChoiMatrix,
    QChannel,
    identity_channel,
    kraus_from_choi,
    tensor_pow,
)
from .entropic import entanglement_fidelity, entropy
from .linalg import (
    HADAMARD,
    PAULI_I,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    DimensionError,
    partial_trace,
    tensor,
)

MODEL_TAGS = ("I", "II", "III", "IV")
MAX_CODING_QUBITS = 7
_PAULI = {"I": PAULI_I, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


def pauli_string(label: str) -> np.ndarray:
    """Matrix of a Pauli word such as ``"XZZXI"`` (leftmost letter = first qubit)."""
    return tensor(*(_PAULI[c] for c in label))


def single_qubit_paulis(n: int) -> list[str]:
    """Identity plus every weight-one Pauli on ``n`` qubits (3n + 1 words)."""
    words = ["I" * n]
    for q in range(n):
        for p in "XYZ":
            words.append("I" * q + p + "I" * (n - q - 1))
    return words


@dataclass(frozen=True, eq=False)
class StabCode:
    name: str
    n: int
    k: int
    isometry: np.ndarray
    stabilizers: tuple = ()

    def __post_init__(self):
        v = np.asarray(self.isometry, dtype=complex)
        if v.shape != (2**self.n, 2**self.k):
            raise DimensionError(f"isometry shape {v.shape} does not match n={self.n}, k={self.k}")
        if np.max(np.abs(v.conj().T @ v - np.eye(2**self.k))) > 1e-12:
            raise ValueError("encoding map is not an isometry")
        object.__setattr__(self, "isometry", v)

    @property
    def projector(self) -> np.ndarray:
        return self.isometry @ self.isometry.conj().T

    def encoder(self) -> QChannel:
        return QChannel(self.isometry[None])

    def decoder(self) -> QChannel:
        return QChannel(syndrome_recovery(self))


def syndrome_recovery(code: StabCode) -> np.ndarray:
    """Kraus operators ``V^dagger E_s^dagger Pi_s`` of a syndrome-decoding channel.

    ``Pi_s`` projects onto syndrome ``s`` and ``E_s`` is the lowest-weight Pauli
    (first in lexicographic order) producing that syndrome.
    """
    n = code.n
    gens = [pauli_string(g) for g in code.stabilizers]
    dim = 2**n
    nsyn = 2 ** len(gens)
    projectors = []
    for bits in itertools.product((0, 1), repeat=len(gens)):
        proj = np.eye(dim, dtype=complex)
        for g, b in zip(gens, bits):
            proj = proj @ (np.eye(dim) + (-1) ** b * g) / 2
        projectors.append(proj)
    corrections: dict[int, np.ndarray] = {}
    for weight in range(n + 1):
        for qubits in itertools.combinations(range(n), weight):
            for letters in itertools.product("XYZ", repeat=weight):
                word = ["I"] * n
                for q, c in zip(qubits, letters):
                    word[q] = c
                e = pauli_string("".join(word))
                s = _syndrome_index(e, gens)
                corrections.setdefault(s, e)
            if len(corrections) == nsyn:
                break
        if len(corrections) == nsyn:
            break
    vdag = code.isometry.conj().T
    return np.array([vdag @ corrections[s].conj().T @ projectors[s] for s in range(nsyn)])


def _syndrome_index(e: np.ndarray, gens) -> int:
    idx = 0
    for g in gens:
        anti = np.allclose(g @ e, -e @ g)
        idx = 2 * idx + int(anti)
    return idx


def _stabilizer_codeword(stabilizers, start: np.ndarray) -> np.ndarray:
    dim = start.size
    proj = np.eye(dim, dtype=complex)
    for g in stabilizers:
        proj = proj @ (np.eye(dim) + pauli_string(g)) / 2
    w = proj @ start
    return w / np.linalg.norm(w)


@lru_cache(maxsize=None)
def _builtin(name: str) -> StabCode:
    if name == "three_qubit_bitflip":
        v = np.zeros((8, 2), dtype=complex)
        v[0, 0] = v[7, 1] = 1.0
        return StabCode(name, 3, 1, v, ("ZZI", "IZZ"))
    if name == "three_qubit_phaseflip":
        v = tensor(HADAMARD, HADAMARD, HADAMARD) @ _builtin("three_qubit_bitflip").isometry
        return StabCode(name, 3, 1, v, ("XXI", "IXX"))
    if name == "five_qubit_perfect":
        gens = ("XZZXI", "IXZZX", "XIXZZ", "ZXIXZ")
        zero = np.zeros(32, dtype=complex)
        zero[0] = 1.0
        c0 = _stabilizer_codeword(gens, zero)
        c1 = pauli_string("XXXXX") @ c0
        return StabCode(name, 5, 1, np.stack([c0, c1], axis=1), gens)
    raise KeyError(f"unknown code {name!r}; available: {', '.join(BUILTIN_CODES)}")


BUILTIN_CODES = ("three_qubit_bitflip", "three_qubit_phaseflip", "five_qubit_perfect")


def builtin_code(name: str) -> StabCode:
    return _builtin(name)


@dataclass(frozen=True, eq=False)
class Coding:
    encoder: QChannel
    decoder: QChannel
    n: int
    k: int
    model_tag: str = "III"

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.model_tag not in MODEL_TAGS:
            raise ValueError(f"model tag must be one of {MODEL_TAGS}")
        if (self.encoder.d_in, self.encoder.d_out) != (2**self.k, 2**self.n):
            raise DimensionError("encoder must map k qubits to n qubits")
        if (self.decoder.d_in, self.decoder.d_out) != (2**self.n, 2**self.k):
            raise DimensionError("decoder must map n qubits to k qubits")

    @classmethod
    def from_code(cls, code: StabCode, model_tag: str = "III") -> "Coding":
        return cls(code.encoder(), code.decoder(), code.n, code.k, model_tag)

    @classmethod
    def trivial(cls, k: int = 1) -> "Coding":
        ident = identity_channel(2**k)
        return cls(ident, ident, k, k, "I")


def _check_cap(n: int, k: int) -> None:
    if n + k > MAX_CODING_QUBITS:
        raise CapacityGuardError(f"n + k = {n + k} exceeds the {MAX_CODING_QUBITS}-qubit cap")


def _apply_each_qubit(ch: QChannel, op: np.ndarray, n: int) -> np.ndarray:
    """(ch ** n)(op), one tensor factor at a time."""
    t = op.reshape((2,) * (2 * n))
    k = ch.kraus
    for q in range(n):
        # move row index q and column index n+q to the front, act, move back
        t = np.moveaxis(t, (q, n + q), (0, 1))
        shape = t.shape
        t = np.einsum("kab,bc...,kdc->ad...", k, t.reshape(2, 2, -1), k.conj()).reshape(shape)
        t = np.moveaxis(t, (0, 1), (q, n + q))
    return t.reshape(2**n, 2**n)


def coded_channel(c: Coding, ch: QChannel) -> QChannel:
    """``decoder o ch^{(x) n} o encoder`` as a channel on k qubits."""
    if ch.d_in != 2 or ch.d_out != 2:
        raise DimensionError("codings act on qubit channels")
    _check_cap(c.n, c.k)
    dk = 2**c.k
    choi = np.zeros((dk * dk, dk * dk), dtype=complex)
    for i in range(dk):
        for j in range(dk):
            unit = np.zeros((dk, dk), dtype=complex)
            unit[i, j] = 1.0
            enc = sum(e @ unit @ e.conj().T for e in c.encoder.kraus)
            noisy = _apply_each_qubit(ch, enc, c.n)
            out = sum(d @ noisy @ d.conj().T for d in c.decoder.kraus)
            # choi[(a, i), (b, j)] = <a|out|b> / dk
            choi[i::dk, j::dk] = out / dk
    return kraus_from_choi(ChoiMatrix(dk, dk, choi))


def coding_error(c: Coding, ch: QChannel) -> float:
    """epsilon = 1 - F_E(identity, coded channel)."""
    return 1.0 - entanglement_fidelity(identity_channel(2**c.k), coded_channel(c, ch))


def bare_error(ch: QChannel, k: int = 1) -> float:
    if ch.d_in**k > MAX_FACTOR_DIM:
        raise CapacityGuardError(f"k={k} copies exceed the dimension cap")
    return 1.0 - entanglement_fidelity(tensor_pow(ch, k), identity_channel(ch.d_in**k))


def coding_works(c: Coding, ch: QChannel) -> bool:
    """A coding counts only when it strictly beats the uncoded error."""
    return coding_error(c, ch) < bare_error(ch, c.k)


def kl_check(code: StabCode, errors, tol: float = 1e-10) -> tuple[bool, np.ndarray]:
    """Knill-Laflamme test ``P E_i^dagger E_j P = lambda_ij P``.

    Returns the verdict and the Hermitian matrix ``lambda``.
    """
    proj = code.projector
    dim = proj.shape[0]
    errs = [np.asarray(e, dtype=complex) for e in errors]
    for e in errs:
        if e.shape != (dim, dim):
            raise DimensionError(f"error operator of shape {e.shape} does not act on {dim} dims")
    m = len(errs)
    lam = np.zeros((m, m), dtype=complex)
    worst = 0.0
    kdim = 2**code.k
    for i, j in itertools.product(range(m), repeat=2):
        block = proj @ errs[i].conj().T @ errs[j] @ proj
        lam[i, j] = np.trace(block) / kdim
        worst = max(worst, float(np.max(np.abs(block - lam[i, j] * proj))))
    return worst <= tol, lam


def entanglement_entropy(psi, dims, subset) -> float:
    """Entropy in bits of the reduced state of ``psi`` on the subsystems in ``subset``."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.size != int(np.prod(dims)):
        raise DimensionError(f"state of length {psi.size} does not match dims {list(dims)}")
    rho = partial_trace(np.outer(psi, psi.conj()), dims, subset)
    return entropy(rho)
