"""Plain-text file formats for networks, rankings, spectra and fits.

CSV files may start with ``#`` comment lines (config hash, sign
conventions); readers skip them.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
import scipy.sparse as sp

from .ulam import BuildMeta, DegreeHistogram, Method, UlamNetwork

NETWORK_MAGIC = "ULAM"
NETWORK_VERSION = "v1"


def _fmt(x: float) -> str:
    return format(float(x), ".16e")


def _short(x: float) -> str:
    return repr(float(x))


def _comment_lines(comments: Iterable[str]) -> str:
    return "".join(f"# {c}\n" for c in comments)


def write_network(path, network: UlamNetwork) -> None:
    """``ULAM v1 N NNZ`` header, then ``i j value`` lines sorted by (j, i)."""
    m = network.matrix.tocsc()
    m.sort_indices()
    cols = np.repeat(np.arange(network.n_cells), np.diff(m.indptr))
    lines = [f"{NETWORK_MAGIC} {NETWORK_VERSION} {network.n_cells} {m.nnz}\n"]
    lines.extend(f"{i} {j} {_fmt(v)}\n" for i, j, v in zip(m.indices.tolist(), cols.tolist(), m.data.tolist()))
    Path(path).write_text("".join(lines))


def read_network(path, meta: Optional[BuildMeta] = None) -> UlamNetwork:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 4 or header[0] != NETWORK_MAGIC or header[1] != NETWORK_VERSION:
            raise ValueError(f"{path}: not a {NETWORK_MAGIC} {NETWORK_VERSION} file")
        n, nnz = int(header[2]), int(header[3])
        data = np.loadtxt(fh, dtype=float, ndmin=2) if nnz else np.zeros((0, 3))
    if data.shape[0] != nnz:
        raise ValueError(f"{path}: expected {nnz} entries, found {data.shape[0]}")
    rows, cols = data[:, 0].astype(np.int64), data[:, 1].astype(np.int64)
    m = sp.csc_matrix((data[:, 2], (rows, cols)), shape=(n, n))
    m.sort_indices()
    return UlamNetwork(n, m, meta or BuildMeta(Method.MONTE_CARLO, 1, None))


def write_csv(path, header, rows, comments: Iterable[str] = ()) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(_comment_lines(comments))
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_short(x) if isinstance(x, (float, np.floating)) else x for x in row])


def read_csv(path):
    """Header and rows (as strings) of a CSV written by :func:`write_csv`."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    return header, [r for r in reader]


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if hasattr(o, "value"):
        return o.value
    raise TypeError(f"not JSON serializable: {type(o)}")


def write_histogram(path, hist: DegreeHistogram, comments=()) -> None:
    write_csv(path, ["kappa", "count"], zip(hist.kappa.tolist(), hist.counts.tolist()), comments)


def write_rank(path, rank, comments=()) -> None:
    """``rank,cell,probability`` with 1-based rank and 0-based cell."""
    order = rank.order
    rows = zip(range(1, order.size + 1), order.tolist(), rank.probs[order].tolist())
    write_csv(path, ["rank", "cell", "probability"], rows, comments)


def read_rank(path) -> np.ndarray:
    """Probability vector indexed by cell."""
    _, rows = read_csv(path)
    cells = np.array([int(r[1]) for r in rows])
    p = np.empty(cells.size)
    p[cells] = [float(r[2]) for r in rows]
    return p


def write_spectrum(path, eigs, comments=()) -> None:
    pars = eigs.pars if eigs.pars is not None else np.full(len(eigs), np.nan)
    rows = ((lam.real, lam.imag, g, x) for lam, g, x in zip(eigs.eigenvalues, eigs.gammas, pars))
    write_csv(path, ["re", "im", "gamma", "par"], rows, comments)


def write_dos(path, dos, comments=()) -> None:
    e = dos.bin_edges
    rows = zip(e[:-1].tolist(), e[1:].tolist(), dos.density.tolist())
    write_csv(path, ["gamma_lo", "gamma_hi", "density"], rows, comments)


def fit_record(fit) -> dict:
    return {
        "sign_convention": "y ~ x**(-exponent)",
        "exponent": fit.exponent,
        "stderr": fit.stderr,
        "range": list(fit.fit_range),
        "r_squared": fit.r_squared,
        "binning": fit.binning.value,
    }


def write_scan(path, grid, comments=()) -> None:
    write_csv(path, ["a", "alpha", "par", "beta"], grid.rows(), comments)
