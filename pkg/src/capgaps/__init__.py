"""Quantum capacities of qubit channels under four coding models, and coding checks."""

__version__ = "0.1.0"

from .capacity import (
    CapacityReport,
    capacity_report,
    ea_classical,
    optimize_input,
    q1_capacity,
    q1_floored,
    q2_capacity,
    q4_capacity,
    q5_one_shot,
)
from .channel import (
    AffineRep,
    ChoiMatrix,
    QChannel,
    affine_from_channel,
    apply,
    channel_rank,
    choi_from_kraus,
    complementary,
    compose,
    kraus_from_choi,
    tensor_pow,
)
from .optimize import OptimizerConfig
