"""Multi-start Nelder-Mead search, shared by the capacity and decomposition code."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 16
    max_iters: int = 2000
    tol: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")

    def with_seed(self, seed: int) -> "OptimizerConfig":
        return OptimizerConfig(self.restarts, self.max_iters, self.tol, int(seed))


@dataclass(frozen=True)
class SearchResult:
    x: np.ndarray
    value: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class Diagnostics:
    """Summary of a multi-start run: the winning restart and its statistics."""

    iterations: int
    best_restart: int
    converged: bool


def _simplex_run(f, x0, step, max_iters: int, tol: float) -> SearchResult:
    """Minimize ``f`` from the axis-aligned simplex around ``x0``.

    Stops when the spread of function values over the simplex drops to ``tol``
    or after ``max_iters`` iterations. Uses the dimension-adapted coefficients
    of Gao and Han, which behave better than the classic ones beyond a few
    dimensions.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    step = np.broadcast_to(np.asarray(step, dtype=float), (n,))
    alpha, gamma = 1.0, 1.0 + 2.0 / n
    rho, sigma = 0.75 - 1.0 / (2 * n), 1.0 - 1.0 / n
    if n == 1:
        gamma, rho, sigma = 2.0, 0.5, 0.5

    sim = np.empty((n + 1, n))
    sim[0] = x0
    for i in range(n):
        sim[i + 1] = x0
        sim[i + 1, i] += step[i]
    fs = np.array([f(x) for x in sim])

    it = 0
    converged = False
    while True:
        order = np.argsort(fs, kind="stable")
        sim, fs = sim[order], fs[order]
        if fs[-1] - fs[0] <= tol:
            converged = True
            break
        if it >= max_iters:
            break
        it += 1
        centroid = sim[:-1].mean(axis=0)
        xr = centroid + alpha * (centroid - sim[-1])
        fr = f(xr)
        if fr < fs[0]:
            xe = centroid + gamma * (xr - centroid)
            fe = f(xe)
            if fe < fr:
                sim[-1], fs[-1] = xe, fe
            else:
                sim[-1], fs[-1] = xr, fr
            continue
        if fr < fs[-2]:
            sim[-1], fs[-1] = xr, fr
            continue
        if fr < fs[-1]:
            xc = centroid + rho * (xr - centroid)
            fc = f(xc)
            if fc <= fr:
                sim[-1], fs[-1] = xc, fc
                continue
        else:
            xc = centroid + rho * (sim[-1] - centroid)
            fc = f(xc)
            if fc < fs[-1]:
                sim[-1], fs[-1] = xc, fc
                continue
        sim[1:] = sim[0] + sigma * (sim[1:] - sim[0])
        fs[1:] = [f(x) for x in sim[1:]]
    return SearchResult(sim[0].copy(), float(fs[0]), it, converged)


def nelder_mead(f, x0, step, max_iters: int = 2000, tol: float = 1e-9, max_polish: int = 5) -> SearchResult:
    """Simplex search, rebuilt around the best point until it stops improving.

    A collapsed simplex can satisfy the spread test away from a minimum, for
    instance where a squashing map has zero derivative. Rebuilding the simplex
    at the incumbent costs one extra run when the first result was genuine.
    ``max_iters`` bounds the total iteration count.
    """
    res = _simplex_run(f, x0, step, max_iters, tol)
    used = res.iterations
    for _ in range(max_polish):
        if used >= max_iters or not res.converged:
            break
        nxt = _simplex_run(f, res.x, step, max_iters - used, tol)
        used += nxt.iterations
        improved = nxt.value < res.value - tol
        if nxt.value < res.value:
            res = nxt
        if not improved:
            break
    return SearchResult(res.x, res.value, used, res.converged)


def multistart_maximize(f, starts, step, cfg: OptimizerConfig):
    """Maximize ``f`` from each start; ties keep the earliest restart."""
    best = None
    best_idx = 0
    for idx, x0 in enumerate(starts):
        res = nelder_mead(lambda x: -f(x), x0, step, cfg.max_iters, cfg.tol)
        if best is None or -res.value > -best.value:
            best, best_idx = res, idx
    diag = Diagnostics(best.iterations, best_idx, best.converged)
    return best.x, -best.value, diag
