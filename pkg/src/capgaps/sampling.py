"""Random qubit channels of prescribed Choi rank.

Every channel draws from its own Philox stream keyed by ``(seed, rank, index)``,
so a batch is reproducible and any single channel can be regenerated without
the others.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .channel import QChannel, affine_from_channel, channel_rank

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SampleSpec:
    rank: int
    count: int
    seed: int = 0

    def __post_init__(self):
        if self.rank not in (1, 2, 3, 4):
            raise ValueError(f"qubit channel rank must be in 1..4, got {self.rank}")
        if self.count < 1:
            raise ValueError("count must be positive")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")


def channel_rng(seed: int, rank: int, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(rank), int(index)))
    return np.random.Generator(np.random.Philox(ss))


def haar_isometry(d: int, D: int, rng: np.random.Generator) -> np.ndarray:
    """D x d isometry from the QR decomposition of a complex Gaussian matrix.

    The phases of R's diagonal are folded back into Q so that the result is
    Haar distributed rather than biased by the QR sign convention.
    """
    if D < d:
        raise ValueError(f"isometry needs D >= d, got D={D}, d={d}")
    z = (rng.standard_normal((D, d)) + 1j * rng.standard_normal((D, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def random_channel(rank: int, rng: np.random.Generator, d: int = 2) -> tuple[QChannel, int]:
    """Draw a channel of exact Choi rank; returns (channel, rejected draws)."""
    rejected = 0
    while True:
        v = haar_isometry(d, d * rank, rng)
        # environment index is the major one: V = sum_i |i> (x) K_i
        ch = QChannel(v.reshape(rank, d, d))
        if channel_rank(ch) == rank:
            return ch, rejected
        rejected += 1


def sample_channel(spec: SampleSpec) -> list[QChannel]:
    out = []
    for index in range(spec.count):
        ch, rejected = random_channel(spec.rank, channel_rng(spec.seed, spec.rank, index))
        if rejected:
            log.info("rank %d index %d: resampled %d degenerate draws", spec.rank, index, rejected)
        out.append(ch)
    return out


def descriptors(ch: QChannel) -> tuple[float, float]:
    """(|t|, ||T||_F) of a qubit channel."""
    aff = affine_from_channel(ch)
    return aff.t_norm, aff.t_frob
