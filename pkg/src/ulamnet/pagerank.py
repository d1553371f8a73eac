"""PageRank by power iteration or by direct simulation of the map, and the
participation ratio."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numba
import numpy as np

from .google import GoogleOperator, apply
from .maps import MapSpec, Model, find_fixed_point_attractor
from .ulam import cell_index

DEFAULT_TOL = 1e-12
ALPHA_ONE_MAX_ITER = 100_000


class AttractorWarning(UserWarning):
    """The map has a stable fixed point; the measure collapses onto it."""


@dataclass(frozen=True)
class RankVector:
    probs: np.ndarray
    order: np.ndarray
    par: float
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.probs.size

    @property
    def converged(self) -> bool:
        return bool(self.meta.get("converged", True))

    @property
    def ranked(self) -> np.ndarray:
        """Probabilities in descending order."""
        return self.probs[self.order]


def participation_ratio(v) -> float:
    """Effective number of occupied sites ``(sum |v|^2)^2 / sum |v|^4``.

    Invariant under rescaling of ``v``; works for complex eigenvectors.
    """
    w = np.abs(np.asarray(v))
    if w.size == 0 or not w.any():
        raise ValueError("participation ratio of a zero vector")
    w = w / w.max()
    w2 = w * w
    s2 = w2.sum()
    return float(s2 * s2 / (w2 * w2).sum())


def rank_order(probs: np.ndarray) -> np.ndarray:
    """Indices sorting ``probs`` descending, ties by ascending index."""
    return np.argsort(-probs, kind="stable")


def make_rank_vector(probs, **meta) -> RankVector:
    p = np.asarray(probs, dtype=np.float64)
    p = p / p.sum()
    return RankVector(p, rank_order(p), participation_ratio(p), dict(meta))


def default_max_iter(alpha: float, tol: float = DEFAULT_TOL) -> int:
    if alpha <= 0.0:
        return 10
    if alpha >= 1.0:
        return ALPHA_ONE_MAX_ITER
    return 10 * math.ceil(math.log(tol) / math.log(alpha))


def pagerank_power(op: GoogleOperator, tol: float = DEFAULT_TOL,
                   max_iter: Optional[int] = None, v0=None) -> RankVector:
    """Power iteration ``v <- G v`` from the uniform vector.

    Stops when the L1 change drops to ``tol``. Hitting ``max_iter`` is not an
    error: the result carries ``meta["converged"] = False``. Convergence at
    ``alpha = 1`` is slow for large N since the gap closes like 1/N.
    """
    n = op.n
    if max_iter is None:
        max_iter = default_max_iter(op.alpha, tol)
    v = np.full(n, 1.0 / n) if v0 is None else np.asarray(v0, dtype=float) / np.sum(v0)
    residual = math.inf
    history = []
    it = 0
    while it < max_iter:
        w = apply(op, v)
        w /= w.sum()
        residual = float(np.abs(w - v).sum())
        history.append(residual)
        v = w
        it += 1
        if residual <= tol:
            break
    return make_rank_vector(v, alpha=op.alpha, iterations=it, residual=residual,
                            converged=residual <= tol, method="power",
                            residual_history=history)


@numba.njit(cache=True, nogil=True)
def _step(model, z1, z2, c2, a, x):
    if x < 0.5:
        y = x + (2.0 * x) ** z1 / 2.0
    elif model == 0:
        y = (2.0 * x - 1.0 - (1.0 - x) ** z2 + c2) / (1.0 + c2)
    else:
        y = a * math.sin(math.pi * (x - 0.5))
    if y < 0.0:
        return 0.0
    if y > 1.0:
        return 1.0
    return y


@numba.njit(parallel=True, cache=True)
def _run_trajectories(model, z1, z2, a, starts, n_cells, t_iters, burn_in):
    c2 = 0.5 ** z2
    n_traj = starts.size
    counts = np.zeros((n_traj, n_cells), dtype=np.int64)
    for k in numba.prange(n_traj):
        x = starts[k]
        for _ in range(burn_in):
            x = _step(model, z1, z2, c2, a, x)
        for _ in range(t_iters - burn_in):
            x = _step(model, z1, z2, c2, a, x)
            i = int(x * n_cells)
            if i >= n_cells:
                i = n_cells - 1
            counts[k, i] += 1
    return counts


def _run_python(f: Callable, starts, n_cells, t_iters, burn_in):
    x = np.asarray(starts, dtype=float)
    counts = np.zeros(n_cells, dtype=np.int64)
    for t in range(t_iters):
        x = np.asarray(f(x), dtype=float)
        if t >= burn_in:
            counts += np.bincount(cell_index(x, n_cells), minlength=n_cells)
    return counts


def trajectory_starts(seed: int, n_traj: int) -> np.ndarray:
    """One uniform start in (0, 1) per trajectory, each from its own stream."""
    out = np.empty(n_traj)
    for k in range(n_traj):
        rng = np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, 1, k])
        u = 0.0
        while u == 0.0:
            u = rng.random()
        out[k] = u
    return out


def pagerank_trajectory(spec: Union[MapSpec, Callable], n_cells: int,
                        t_iters: int = 10_000_000, n_traj: int = 10,
                        burn_in: int = 10_000, seed: int = 42) -> RankVector:
    """Equilibrium cell occupation of long map trajectories (alpha = 1).

    Each of ``n_traj`` trajectories starts uniformly in (0, 1), skips
    ``burn_in`` steps and then records the visited cell at every remaining
    step. ``spec`` may also be a vectorized callable (slow path for stubs).
    """
    if n_cells < 2:
        raise ValueError("n_cells must be >= 2")
    if t_iters < 10 * burn_in or t_iters <= burn_in:
        raise ValueError("t_iters must be at least 10 * burn_in")
    starts = trajectory_starts(seed, n_traj)
    if isinstance(spec, MapSpec):
        if find_fixed_point_attractor(spec) is not None:
            warnings.warn(f"{spec} has a fixed-point attractor; PageRank "
                          "concentrates on a single cell", AttractorWarning, stacklevel=2)
        model = 0 if spec.model is Model.F1 else 1
        counts = _run_trajectories(model, float(spec.z1), float(spec.z2), float(spec.a),
                                   starts, int(n_cells), int(t_iters), int(burn_in)).sum(axis=0)
    else:
        counts = _run_python(spec, starts, n_cells, t_iters, burn_in)
    return make_rank_vector(counts.astype(np.float64), alpha=1.0, t_iters=t_iters,
                            n_traj=n_traj, burn_in=burn_in, seed=seed,
                            method="trajectory", residual=None, converged=True)
