"""Ulam discretization of interval maps into column-stochastic networks."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from .maps import MapSpec, eval_map_array

DEFAULT_NC = 10_000
# upper bound on sampled points held in memory at once, and on stored nonzeros
MAX_NNZ = 200_000_000
EXPECTED_DEGREE = 8
CHUNK_POINTS = 4_000_000

MapLike = Union[MapSpec, Callable[[np.ndarray], np.ndarray]]


class Method(str, enum.Enum):
    MONTE_CARLO = "monte_carlo"
    QUADRATURE = "quadrature"


class Direction(str, enum.Enum):
    INGOING = "in"
    OUTGOING = "out"


class ResourceError(MemoryError):
    """Requested network exceeds the configured memory cap."""


@dataclass(frozen=True)
class BuildMeta:
    method: Method
    n_samples: int
    seed: Optional[int] = None


@dataclass(frozen=True)
class UlamNetwork:
    """Column-stochastic Ulam matrix.

    ``matrix[i, j]`` is the probability to go from cell ``j`` to cell ``i``;
    cell ``j`` covers ``[j/N, (j+1)/N)``.
    """

    n_cells: int
    matrix: sp.csc_matrix
    build_meta: BuildMeta = field(default_factory=lambda: BuildMeta(Method.QUADRATURE, 1))

    def __post_init__(self):
        if self.matrix.shape != (self.n_cells, self.n_cells):
            raise ValueError("matrix shape does not match n_cells")

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def column_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=0)).ravel()


@dataclass(frozen=True)
class DegreeHistogram:
    direction: Direction
    kappa: np.ndarray
    counts: np.ndarray

    def as_pairs(self) -> List[Tuple[int, int]]:
        return list(zip(self.kappa.tolist(), self.counts.tolist()))


def _as_callable(f: MapLike) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(f, MapSpec):
        return lambda x: eval_map_array(f, x, check=False)
    return f


def cell_index(y: np.ndarray, n_cells: int) -> np.ndarray:
    """Cell of each point; values equal to 1 go to the last cell."""
    idx = np.floor(np.asarray(y) * n_cells).astype(np.int64)
    return np.clip(idx, 0, n_cells - 1)


def _check_args(n_cells: int, n_samples: int) -> None:
    if n_cells < 2:
        raise ValueError(f"n_cells must be >= 2, got {n_cells}")
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    # interval maps spread a cell over a few cells except near singular slopes
    if n_cells * min(n_samples, n_cells, EXPECTED_DEGREE) > MAX_NNZ:
        raise ResourceError(
            f"N={n_cells} with {n_samples} samples may need more than {MAX_NNZ} nonzeros"
        )


def _assemble(n_cells: int, src: np.ndarray, dst: np.ndarray, n_samples: int) -> sp.csc_matrix:
    """Count (dst, src) pairs into a column-normalized CSC matrix."""
    key = src * n_cells + dst
    uniq, counts = np.unique(key, return_counts=True)
    cols, rows = np.divmod(uniq, n_cells)
    data = counts / float(n_samples)
    return sp.csc_matrix((data, (rows, cols)), shape=(n_cells, n_cells))


def _merge_chunks(n_cells: int, parts: list, n_samples: int) -> sp.csc_matrix:
    keys = np.concatenate([p[0] for p in parts])
    counts = np.concatenate([p[1] for p in parts])
    cols, rows = np.divmod(keys, n_cells)
    indptr = np.zeros(n_cells + 1, dtype=np.int64)
    np.cumsum(np.bincount(cols, minlength=n_cells), out=indptr[1:])
    m = sp.csc_matrix((counts / float(n_samples), rows, indptr), shape=(n_cells, n_cells))
    m.has_sorted_indices = True
    return m


def fix_dangling(matrix: sp.csc_matrix) -> sp.csc_matrix:
    """Replace all-zero columns by the uniform column 1/N."""
    n = matrix.shape[0]
    matrix = matrix.tocsc()
    matrix.eliminate_zeros()
    empty = np.flatnonzero(np.diff(matrix.indptr) == 0)
    if empty.size == 0:
        return matrix
    cols = np.repeat(empty, n)
    rows = np.tile(np.arange(n), empty.size)
    patch = sp.csc_matrix((np.full(cols.size, 1.0 / n), (rows, cols)), shape=(n, n))
    out = (matrix + patch).tocsc()
    out.sort_indices()
    return out


def cell_rng(seed: int, cell: int) -> np.random.Generator:
    """Independent stream for one source cell, keyed on (seed, cell)."""
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, int(cell)])


def build_monte_carlo(spec: MapLike, n_cells: int, n_samples: int = DEFAULT_NC,
                      seed: int = 42) -> UlamNetwork:
    """Ulam matrix from ``n_samples`` uniform random points per cell.

    Each point of cell ``j`` is mapped once; ``S[i, j]`` is the fraction of
    the points landing in cell ``i``.
    """
    _check_args(n_cells, n_samples)
    f = _as_callable(spec)
    per_chunk = max(1, CHUNK_POINTS // n_samples)
    parts = []
    for start in range(0, n_cells, per_chunk):
        stop = min(n_cells, start + per_chunk)
        u = np.empty((stop - start, n_samples))
        for row, j in enumerate(range(start, stop)):
            u[row] = cell_rng(seed, j).random(n_samples)
        x = (np.arange(start, stop)[:, None] + u) / n_cells
        dst = cell_index(f(x.ravel()), n_cells)
        src = np.repeat(np.arange(start, stop, dtype=np.int64), n_samples)
        uniq, counts = np.unique(src * n_cells + dst, return_counts=True)
        parts.append((uniq, counts))
    matrix = fix_dangling(_merge_chunks(n_cells, parts, n_samples))
    return UlamNetwork(n_cells, matrix, BuildMeta(Method.MONTE_CARLO, n_samples, int(seed)))


def build_quadrature(spec: MapLike, n_cells: int, subdivisions: int = 10_000) -> UlamNetwork:
    """Deterministic Ulam matrix from midpoints of equal subintervals of each cell."""
    if subdivisions < 10:
        raise ValueError(f"subdivisions must be >= 10, got {subdivisions}")
    _check_args(n_cells, subdivisions)
    f = _as_callable(spec)
    offsets = (np.arange(subdivisions) + 0.5) / subdivisions
    per_chunk = max(1, CHUNK_POINTS // subdivisions)
    parts = []
    for start in range(0, n_cells, per_chunk):
        stop = min(n_cells, start + per_chunk)
        x = (np.arange(start, stop)[:, None] + offsets[None, :]) / n_cells
        dst = cell_index(f(x.ravel()), n_cells)
        src = np.repeat(np.arange(start, stop, dtype=np.int64), subdivisions)
        uniq, counts = np.unique(src * n_cells + dst, return_counts=True)
        parts.append((uniq, counts))
    matrix = fix_dangling(_merge_chunks(n_cells, parts, subdivisions))
    return UlamNetwork(n_cells, matrix, BuildMeta(Method.QUADRATURE, subdivisions, None))


def from_matrix(matrix, method: Method = Method.QUADRATURE, n_samples: int = 1,
                seed: Optional[int] = None) -> UlamNetwork:
    """Wrap an arbitrary nonnegative matrix, normalizing columns and fixing dangling ones."""
    m = sp.csc_matrix(matrix, dtype=np.float64)
    if m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if m.nnz and m.data.min() < 0:
        raise ValueError("matrix entries must be nonnegative")
    sums = np.asarray(m.sum(axis=0)).ravel()
    scale = np.divide(1.0, sums, out=np.zeros_like(sums), where=sums > 0)
    m = fix_dangling(m @ sp.diags(scale))
    m.sort_indices()
    return UlamNetwork(m.shape[0], m, BuildMeta(Method(method), n_samples, seed))


def degree_histogram(network: UlamNetwork, direction: Union[Direction, str]) -> DegreeHistogram:
    """Number of nodes N_L(kappa) having kappa links in the given direction."""
    direction = Direction(direction)
    m = network.matrix
    pattern = m.copy()
    pattern.eliminate_zeros()
    if direction is Direction.OUTGOING:
        deg = np.diff(pattern.indptr)
    else:
        deg = np.bincount(pattern.indices, minlength=network.n_cells)
    counts = np.bincount(deg)
    kappa = np.flatnonzero(counts)
    return DegreeHistogram(direction, kappa, counts[kappa])
