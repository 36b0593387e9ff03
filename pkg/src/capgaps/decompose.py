"""Generalized extreme qubit channels and the convex-decomposition bound on Q_III.

A qubit channel is split as ``p * Phi_1 + (1 - p) * Phi_2`` with both parts of
Choi rank <= 2. Such parts are degradable or anti-degradable, so their quantum
capacity is ``max(0, Q_V)`` and the mixture of capacities bounds Q_III from above.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _ge_kernel as kernel
from .capacity import q5_one_shot
from .channel import QChannel, affine_from_channel, channel_rank, choi_matrix
from .linalg import DimensionError
from .optimize import OptimizerConfig

RESIDUAL_ACCEPT = 1e-3
PENALTY_RAMP = (10.0, 100.0, 1000.0, 10000.0)
_STEP = 0.3


class DecompositionError(RuntimeError):
    """No decomposition reached the residual threshold; ``result`` holds the best attempt."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class GenExtremeParams:
    """Canonical angles ``u, v`` in [0, pi/2] plus ZYZ Euler angles of the rotations."""

    u: float
    v: float
    pre: tuple = (0.0, 0.0, 0.0)
    post: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        for name in ("u", "v"):
            val = getattr(self, name)
            if not -1e-12 <= val <= math.pi / 2 + 1e-12:
                raise ValueError(f"{name}={val} outside [0, pi/2]")
        object.__setattr__(self, "pre", tuple(float(a) for a in self.pre))
        object.__setattr__(self, "post", tuple(float(a) for a in self.post))
        if len(self.pre) != 3 or len(self.post) != 3:
            raise ValueError("pre and post need three Euler angles each")


@dataclass(frozen=True)
class DecompositionResult:
    p: float
    ge1: GenExtremeParams
    ge2: GenExtremeParams
    residual: float
    bound: float
    success: bool
    diagnostics: dict = field(default_factory=dict)


def euler_unitary(angles) -> np.ndarray:
    """SU(2) element Rz(a) Ry(b) Rz(c) with Rz(a) = exp(-i a Z / 2)."""
    a, b, c = angles

    def rz(x):
        return np.diag([np.exp(-0.5j * x), np.exp(0.5j * x)])

    ry = np.array([[math.cos(b / 2), -math.sin(b / 2)], [math.sin(b / 2), math.cos(b / 2)]], dtype=complex)
    return rz(a) @ ry @ rz(c)


def canonical_kraus(u: float, v: float) -> np.ndarray:
    k1 = np.array([[math.cos(v), 0.0], [0.0, math.cos(u)]], dtype=complex)
    k2 = np.array([[0.0, math.sin(u)], [math.sin(v), 0.0]], dtype=complex)
    return np.array([k1, k2])


def gen_extreme_channel(params: GenExtremeParams) -> QChannel:
    """``U_post o Phi_{u,v} o U_pre``."""
    pre = euler_unitary(params.pre)
    post = euler_unitary(params.post)
    return QChannel(post @ canonical_kraus(params.u, params.v) @ pre)


def canonical_capacity(u: float, v: float) -> float:
    """Quantum capacity of the canonical (u, v) channel.

    The canonical channel commutes with Z conjugation, and I_c is concave for
    degradable channels, so the optimum is a diagonal input. For the
    anti-degradable case the diagonal maximum is <= 0 and the capacity is 0.
    """
    return float(kernel.canonical_capacity(float(u), float(v)))


def q_cap_rank2(ch: QChannel, cfg: OptimizerConfig) -> float:
    if ch.d_in != 2 or ch.d_out != 2:
        raise DimensionError("q_cap_rank2 needs a qubit channel")
    r = channel_rank(ch)
    if r > 2:
        raise ValueError(f"channel has Choi rank {r}; generalized extreme channels have rank <= 2")
    return max(0.0, q5_one_shot(ch, cfg))


def _params_from_vector(x: np.ndarray, off: int) -> GenExtremeParams:
    u, v = kernel.ge_angles(x, off)
    return GenExtremeParams(
        u=min(max(u, 0.0), math.pi / 2),
        v=min(max(v, 0.0), math.pi / 2),
        pre=tuple(x[off + 2 : off + 5]),
        post=tuple(x[off + 5 : off + 8]),
    )


def mixture_residual(ch: QChannel, p: float, ge1: GenExtremeParams, ge2: GenExtremeParams) -> float:
    """Choi-state Frobenius distance of ``p Phi_1 + (1-p) Phi_2`` from ``ch``."""
    mix = p * choi_matrix(gen_extreme_channel(ge1)) + (1 - p) * choi_matrix(gen_extreme_channel(ge2))
    return float(np.linalg.norm(mix - choi_matrix(ch)))


def _search(t0, T0, x0, cfg: OptimizerConfig):
    x = x0
    iters = 0
    converged = False
    for mu in PENALTY_RAMP:
        x, _, it, converged = kernel.nelder_mead_penalized(x, _STEP, cfg.max_iters, cfg.tol, t0, T0, mu)
        iters += it
    return x, iters, converged


def decompose_channel(ch: QChannel, cfg: OptimizerConfig) -> DecompositionResult:
    """Best convex split into two generalized extreme channels.

    Each restart runs a penalized simplex search on
    ``p Q(Phi_1) + (1-p) Q(Phi_2) + mu * residual`` with ``mu`` ramped over
    ``PENALTY_RAMP``. Restarts whose final residual exceeds 1e-3 are discarded;
    if none survive, the least-infeasible attempt is returned with
    ``success=False``.
    """
    if ch.d_in != 2 or ch.d_out != 2:
        raise DimensionError("decomposition is implemented for qubit channels only")
    aff = affine_from_channel(ch)
    t0 = np.ascontiguousarray(aff.t, dtype=float)
    T0 = np.ascontiguousarray(aff.T, dtype=float)
    rng = np.random.default_rng(cfg.seed)

    best = None  # (feasible, key, x, idx, iters, converged)
    accepted = 0
    for idx in range(cfg.restarts):
        x0 = rng.uniform(0.0, math.pi, 17)
        x, iters, converged = _search(t0, T0, x0, cfg)
        res = kernel.residual(x, t0, T0)
        feasible = res <= RESIDUAL_ACCEPT
        accepted += feasible
        key = kernel.bound(x) if feasible else res
        if best is None or (feasible, -key) > (best[0], -best[1]):
            best = (feasible, key, x, idx, iters, converged)

    feasible, _, x, idx, iters, converged = best
    p = kernel.mixing_weight(x)
    ge1 = _params_from_vector(x, 1)
    ge2 = _params_from_vector(x, 9)
    bound = p * canonical_capacity(ge1.u, ge1.v) + (1 - p) * canonical_capacity(ge2.u, ge2.v)
    return DecompositionResult(
        p=float(p),
        ge1=ge1,
        ge2=ge2,
        residual=mixture_residual(ch, p, ge1, ge2),
        bound=float(bound),
        success=bool(feasible),
        diagnostics={
            "iterations": iters,
            "best_restart": idx,
            "converged": bool(converged),
            "accepted_restarts": int(accepted),
        },
    )


def q3_upper_bound(ch: QChannel, cfg: OptimizerConfig) -> float:
    result = decompose_channel(ch, cfg)
    if not result.success:
        raise DecompositionError(
            f"no decomposition with residual <= {RESIDUAL_ACCEPT} (best {result.residual:.3e})", result
        )
    return max(0.0, result.bound)
