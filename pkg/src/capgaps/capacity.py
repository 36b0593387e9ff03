"""Capacity formulas: Q_I, Q_II, Q_IV, the one-shot Q_V, and EA classical capacities.

Values are in bits (qubits per channel use). The optimized quantities go
through :func:`optimize_input`, a multi-start simplex search over density
matrices in an unconstrained parametrization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import QChannel, affine_from_channel, channel_rank
from .entropic import (
    _ic_unchecked,
    complementary_output,
    i_of_channel,
    spectrum_entropy,
)
from .linalg import PAULI_X, PAULI_Y, PAULI_Z
from .optimize import Diagnostics, OptimizerConfig, multistart_maximize

_QUBIT_STEP = 0.4
_GENERAL_STEP = 0.3


@dataclass(frozen=True)
class InputOptimum:
    rho: np.ndarray
    value: float
    diagnostics: Diagnostics

    def __iter__(self):
        return iter((self.rho, self.value))


def _bloch_from_params(x) -> np.ndarray:
    """Squash R^3 onto the Bloch ball: radius sin|y| along the direction of y.

    Smooth everywhere and locally linear at the origin, so a simplex around the
    maximally mixed state is not degenerate. Pure states sit at |y| = pi/2.
    """
    y = np.asarray(x, dtype=float)
    n = math.sqrt(float(y @ y))
    scale = math.sin(n) / n if n > 1e-8 else 1.0 - n * n / 6.0
    return scale * y


def _bloch_density(r) -> np.ndarray:
    x, y, z = r
    return 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]])


def _density_from_params(x, d: int) -> np.ndarray:
    a = (x[: d * d] + 1j * x[d * d :]).reshape(d, d)
    m = a @ a.conj().T
    return m / np.trace(m).real


def _starts(d: int, cfg: OptimizerConfig) -> list[np.ndarray]:
    """Restart 0 sits at the maximally mixed state, restart 1 at a pure state."""
    rng = np.random.default_rng(cfg.seed)
    if d == 2:
        fixed = [np.zeros(3), np.array([0.0, 0.0, math.pi / 2])]
        draw = lambda: rng.uniform(-math.pi / 2, math.pi / 2, size=3)
    else:
        eye = np.concatenate([np.eye(d).reshape(-1), np.zeros(d * d)])
        pure = np.zeros(2 * d * d)
        pure[0] = 1.0
        fixed = [eye, pure]
        draw = lambda: rng.normal(size=2 * d * d)
    starts = fixed[: cfg.restarts]
    while len(starts) < cfg.restarts:
        starts.append(draw())
    return starts


def _maximize_bloch(fn, cfg: OptimizerConfig):
    """Maximize a function of the Bloch vector over the unit ball."""
    x, value, diag = multistart_maximize(lambda x: fn(_bloch_from_params(x)), _starts(2, cfg), _QUBIT_STEP, cfg)
    return _bloch_density(_bloch_from_params(x)), value, diag


def optimize_input(objective, d: int, cfg: OptimizerConfig) -> InputOptimum:
    """Maximize ``objective(rho)`` over d-dimensional density matrices.

    Qubits are parametrized by the Bloch ball with radius ``sin|y|``;
    larger dimensions by ``A A^dagger / tr(A A^dagger)`` for a complex ``A``.
    Deterministic for a fixed ``cfg.seed``.
    """
    if d == 2:
        rho, value, diag = _maximize_bloch(lambda r: objective(_bloch_density(r)), cfg)
        return InputOptimum(rho, value, diag)
    x, value, diag = multistart_maximize(
        lambda x: objective(_density_from_params(x, d)), _starts(d, cfg), _GENERAL_STEP, cfg
    )
    return InputOptimum(_density_from_params(x, d), value, diag)


def _h2(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


class _QubitEvaluator:
    """Coherent information of a qubit channel as a function of the input Bloch vector."""

    def __init__(self, ch: QChannel):
        aff = affine_from_channel(ch)
        self.t, self.T = aff.t, aff.T
        self.env0 = complementary_output(ch, np.eye(2) / 2)
        self.env = [complementary_output(ch, s / 2) for s in (PAULI_X, PAULI_Y, PAULI_Z)]

    def coherent_information(self, r) -> float:
        out = self.T @ r + self.t
        h_out = _h2(0.5 * (1 + min(1.0, float(np.sqrt(out @ out)))))
        env = self.env0 + r[0] * self.env[0] + r[1] * self.env[1] + r[2] * self.env[2]
        return h_out - spectrum_entropy(np.linalg.eigvalsh(env))

    def mutual_information(self, r) -> float:
        return _h2(0.5 * (1 + min(1.0, float(np.sqrt(r @ r))))) + self.coherent_information(r)


def _is_qubit(ch: QChannel) -> bool:
    return ch.d_in == 2 and ch.d_out == 2


def q1_capacity(ch: QChannel) -> float:
    """Model-I capacity I(Phi); may be negative."""
    return i_of_channel(ch)


def q1_floored(ch: QChannel) -> float:
    return max(0.0, q1_capacity(ch))


def q2_capacity(ch: QChannel) -> float:
    return 0.5 * (math.log2(ch.d_in) + q1_capacity(ch))


def q5_optimum(ch: QChannel, cfg: OptimizerConfig) -> InputOptimum:
    if _is_qubit(ch):
        ev = _QubitEvaluator(ch)
        return InputOptimum(*_maximize_bloch(ev.coherent_information, cfg))
    return optimize_input(lambda rho: _ic_unchecked(rho, ch), ch.d_in, cfg)


def q5_one_shot(ch: QChannel, cfg: OptimizerConfig) -> float:
    """max_rho I_c(rho, Phi)."""
    return q5_optimum(ch, cfg).value


def q4_optimum(ch: QChannel, cfg: OptimizerConfig) -> InputOptimum:
    if _is_qubit(ch):
        ev = _QubitEvaluator(ch)
        return InputOptimum(*_maximize_bloch(ev.mutual_information, cfg))

    def mi(rho):
        w = np.linalg.eigvalsh(rho)
        return spectrum_entropy(w) + _ic_unchecked(rho, ch)

    return optimize_input(mi, ch.d_in, cfg)


def q4_capacity(ch: QChannel, cfg: OptimizerConfig) -> float:
    """Half the maximal quantum mutual information."""
    return 0.5 * q4_optimum(ch, cfg).value


def ea_classical(ch: QChannel, cfg: OptimizerConfig) -> tuple[float, float]:
    """Entanglement-assisted classical capacities (C_II, C_IV)."""
    return 2.0 * q2_capacity(ch), 2.0 * q4_capacity(ch, cfg)


@dataclass(frozen=True)
class CapacityReport:
    q1: float
    q2: float
    q4: float
    q5: float
    t_norm: float
    t_frob: float
    rank: int
    q3_ub: float | None = None
    residual: float | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def dq15(self) -> float:
        return self.q5 - self.q1

    @property
    def dq25(self) -> float:
        return self.q2 - self.q5

    @property
    def dq24(self) -> float:
        return self.q4 - self.q2

    @property
    def dq23(self) -> float | None:
        return None if self.q3_ub is None else self.q3_ub - self.q2

    @property
    def dq34(self) -> float | None:
        return None if self.q3_ub is None else self.q4 - self.q3_ub


def capacity_report(ch: QChannel, cfg: OptimizerConfig) -> CapacityReport:
    """All optimizer-free and optimized capacities of a qubit channel (no Q_III bound)."""
    aff = affine_from_channel(ch)
    q1 = q1_capacity(ch)
    opt5 = q5_optimum(ch, cfg)
    opt4 = q4_optimum(ch, cfg)
    return CapacityReport(
        q1=q1,
        q2=0.5 * (math.log2(ch.d_in) + q1),
        q4=0.5 * opt4.value,
        q5=opt5.value,
        t_norm=aff.t_norm,
        t_frob=aff.t_frob,
        rank=channel_rank(ch),
        diagnostics={"q5": opt5.diagnostics, "q4": opt4.diagnostics},
    )
