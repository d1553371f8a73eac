"""Google matrix G = alpha S + (1 - alpha) E / N over an Ulam network."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ulam import UlamNetwork

DENSE_CAP = 4000


class DenseCapError(MemoryError):
    """Dense materialization requested above the configured size cap."""


@dataclass(frozen=True)
class GoogleOperator:
    network: UlamNetwork
    alpha: float = 0.85

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")

    @property
    def n(self) -> int:
        return self.network.n_cells

    def apply(self, v) -> np.ndarray:
        return apply(self, v)

    def __matmul__(self, v):
        return apply(self, v)


def apply(op: GoogleOperator, v) -> np.ndarray:
    """Matrix-free product ``G v``.

    The teleport term adds ``(1 - alpha) sum(v) / N`` to every entry, so the
    sum of ``v`` is preserved. Complex vectors are accepted.
    """
    v = np.asarray(v)
    n = op.n
    if v.shape[0] != n:
        raise ValueError(f"vector of length {v.shape[0]} for operator of size {n}")
    if op.alpha == 0.0:
        return np.broadcast_to(v.sum(axis=0) / n, v.shape).copy()
    out = op.alpha * (op.network.matrix @ v)
    if op.alpha != 1.0:
        out += (1.0 - op.alpha) * v.sum(axis=0) / n
    return out


def materialize_dense(op: GoogleOperator, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense ``G`` with ``G[i, j] = alpha S[i, j] + (1 - alpha)/N``."""
    n = op.n
    if n > cap:
        raise DenseCapError(f"N={n} exceeds dense cap {cap}")
    g = op.network.matrix.toarray()
    if op.alpha != 1.0:
        g *= op.alpha
        g += (1.0 - op.alpha) / n
    return g
