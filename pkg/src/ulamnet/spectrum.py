"""Eigenvalues and eigenvectors of the Google matrix.

The dense path hands the materialized matrix to LAPACK (balancing,
Hessenberg reduction and shifted QR). The large-N path is a restarted
Krylov-Schur Arnoldi iteration driven by the matrix-free operator.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg
from threadpoolctl import threadpool_limits

from .google import DENSE_CAP, GoogleOperator, apply, materialize_dense
from .pagerank import participation_ratio

NULL_RADIUS = 1e-12


class Method(str, enum.Enum):
    DENSE = "dense"
    ARNOLDI = "arnoldi"


class ConvergenceError(RuntimeError):
    """Eigensolver failed; ``partial`` holds whatever did converge."""

    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


@dataclass(frozen=True)
class EigenSet:
    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray]
    gammas: np.ndarray
    pars: Optional[np.ndarray]
    method: Method
    residuals: Optional[np.ndarray] = None
    converged: Optional[np.ndarray] = None
    n: int = 0

    def __len__(self):
        return self.eigenvalues.size

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.eigenvalues)


@dataclass(frozen=True)
class DosHistogram:
    """Density of states W(gamma) over uniform bins.

    ``n_null`` counts states with |lambda| below 1e-12 (gamma = inf),
    ``n_above`` finite gammas beyond the last edge.
    """

    bin_edges: np.ndarray
    density: np.ndarray
    n_null: int = 0
    n_above: int = 0

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def mode(self) -> float:
        """Center of the most populated bin."""
        i = int(np.argmax(self.density))
        return 0.5 * (self.bin_edges[i] + self.bin_edges[i + 1])


def decay_rates(eigenvalues) -> np.ndarray:
    """``gamma = -2 ln|lambda|``, +inf for |lambda| <= 1e-12."""
    mod = np.abs(np.asarray(eigenvalues))
    out = np.full(mod.shape, np.inf)
    ok = mod > NULL_RADIUS
    out[ok] = -2.0 * np.log(mod[ok])
    return out


def sort_order(eigenvalues) -> np.ndarray:
    """Descending modulus, then descending real part, then descending imaginary part."""
    lam = np.asarray(eigenvalues, dtype=complex)
    # conjugate partners may differ in modulus by rounding; compare at 1e-11
    mod = np.round(np.abs(lam), 11)
    re = np.round(lam.real, 11)
    return np.lexsort((-lam.imag, -re, -mod))


def _make_set(lam, vecs, method, n, residuals=None, converged=None) -> EigenSet:
    o = sort_order(lam)
    lam = lam[o]
    pars = None
    if vecs is not None:
        vecs = vecs[:, o]
        vecs = vecs / np.linalg.norm(vecs, axis=0)
        pars = np.array([participation_ratio(vecs[:, m]) for m in range(lam.size)])
    if residuals is not None:
        residuals = residuals[o]
    if converged is not None:
        converged = converged[o]
    return EigenSet(lam, vecs, decay_rates(lam), pars, Method(method), residuals, converged, n)


def full_spectrum(op: GoogleOperator, want_vectors: bool = False,
                  cap: int = DENSE_CAP) -> EigenSet:
    """All eigenvalues (and optionally right eigenvectors) of the dense G.

    Runs single-threaded so results do not depend on the BLAS thread count.
    """
    g = materialize_dense(op, cap)
    with threadpool_limits(limits=1):
        try:
            if want_vectors:
                lam, vecs = scipy.linalg.eig(g, right=True, check_finite=False)
            else:
                lam, vecs = scipy.linalg.eigvals(g, check_finite=False), None
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"dense QR iteration failed: {exc}") from exc
    residuals = None
    if vecs is not None:
        vecs = vecs / np.linalg.norm(vecs, axis=0)
        residuals = np.linalg.norm(g @ vecs - vecs * lam, axis=0)
    return _make_set(lam.astype(complex), vecs, Method.DENSE, op.n, residuals)


def _orthogonalize(V, w, j):
    """Two passes of classical Gram-Schmidt against ``V[:, :j]``."""
    Vj = V[:, :j]
    h = Vj.conj().T @ w
    w = w - Vj @ h
    h2 = Vj.conj().T @ w
    w = w - Vj @ h2
    return w, h + h2


def leading_eigenvalues(op: GoogleOperator, k: int = 2, tol: float = 1e-10,
                        krylov_dim: Optional[int] = None, max_restarts: int = 500,
                        want_vectors: bool = True, strict: bool = False) -> EigenSet:
    """The ``k`` eigenvalues of largest modulus by restarted Arnoldi.

    Krylov-Schur restarts keep the best half of the Ritz space. A pair counts
    as converged when its residual norm is at most ``tol``; unconverged pairs
    are returned with ``converged[m] = False`` unless ``strict``, which raises
    :class:`ConvergenceError`.
    """
    n = op.n
    if not 1 <= k <= max(1, n // 4):
        raise ValueError(f"k must lie in [1, N/4], got k={k} for N={n}")
    # BLAS reductions must not depend on the thread count
    with threadpool_limits(limits=1):
        out = _krylov_schur(op, k, tol, krylov_dim, max_restarts, want_vectors)
    if strict and not out.converged.all():
        raise ConvergenceError(f"{int((~out.converged).sum())} of {k} Ritz pairs unconverged", out)
    return out


def _krylov_schur(op, k, tol, krylov_dim, max_restarts, want_vectors) -> EigenSet:
    n = op.n
    m = krylov_dim or max(4 * k, 40)
    m = min(m, n - 1)
    keep = min(m - 1, k + (m - k) // 2)

    rng = np.random.default_rng(0)
    V = np.zeros((n, m + 1), dtype=complex)
    H = np.zeros((m + 1, m), dtype=complex)
    v0 = np.ones(n) + 0.1 * rng.random(n)
    V[:, 0] = v0 / np.linalg.norm(v0)
    p = 0
    lam = y = res = None
    for restart in range(max_restarts + 1):
        for j in range(p, m):
            w = apply(op, V[:, j])
            w, h = _orthogonalize(V, w, j + 1)
            H[: j + 1, j] = h
            beta = np.linalg.norm(w)
            if beta < 1e-14:
                # invariant subspace: continue with a fresh orthogonal direction
                w, _ = _orthogonalize(V, rng.random(n).astype(complex), j + 1)
                H[j + 1, j] = 0.0
                V[:, j + 1] = w / np.linalg.norm(w)
            else:
                H[j + 1, j] = beta
                V[:, j + 1] = w / beta
        Hm = H[:m, :m]
        theta, Y = np.linalg.eig(Hm)
        Y = Y / np.linalg.norm(Y, axis=0)
        resid = np.abs(H[m, :m] @ Y)
        order = sort_order(theta)
        lam, y, res = theta[order[:k]], Y[:, order[:k]], resid[order[:k]]
        if np.all(res <= tol) or restart == max_restarts:
            break
        # Krylov-Schur truncation onto the `keep` Ritz values of largest modulus
        T, Z, sdim = _sorted_schur(Hm, np.abs(theta[order[keep - 1]]))
        p = sdim
        b = H[m, :m] @ Z
        V[:, :p] = V[:, :m] @ Z[:, :p]
        V[:, p] = V[:, m]
        H[:] = 0.0
        H[:p, :p] = T[:p, :p]
        H[p, :p] = b[:p]
    converged = res <= tol
    vecs = None
    if want_vectors:
        vecs = V[:, :m] @ y
        for c in range(vecs.shape[1]):
            piv = vecs[np.argmax(np.abs(vecs[:, c])), c]
            vecs[:, c] *= np.conj(piv) / abs(piv)
        lam = np.where(np.abs(lam.imag) <= max(tol, 1e-12), lam.real, lam)
    return _make_set(np.asarray(lam, dtype=complex), vecs, Method.ARNOLDI, n, res, converged)


def _sorted_schur(Hm, threshold):
    """Complex Schur form with eigenvalues of modulus >= threshold leading."""
    cut = threshold * (1 - 1e-12)
    T, Z, sdim = scipy.linalg.schur(Hm, output="complex", sort=lambda z: abs(z) >= cut)
    return T, Z, max(int(sdim), 1)


def spectral_gap(op: GoogleOperator, tol: float = 1e-10, dense: bool = False) -> float:
    """``1 - |lambda_2|`` from the two leading eigenvalues."""
    if dense:
        lam = full_spectrum(op).eigenvalues
    else:
        lam = leading_eigenvalues(op, 2, tol, want_vectors=False, strict=True).eigenvalues
    return float(1.0 - abs(lam[1]))


def dos_histogram(eigs: EigenSet, bins: int = 50, gamma_max: Optional[float] = None) -> DosHistogram:
    """Density of states ``W(gamma) = dN / dgamma`` on uniform bins over [0, gamma_max].

    ``gamma_max`` defaults to the largest finite decay rate, in which case the
    histogram integrates to the number of finite-gamma states. Rounding can
    leave |lambda| a hair above 1; such gammas are counted in the first bin.
    """
    g = eigs.gammas
    finite = g[np.isfinite(g)]
    finite = np.maximum(finite, 0.0)
    if gamma_max is None:
        gamma_max = float(finite.max()) if finite.size and finite.max() > 0 else 1.0
    edges = np.linspace(0.0, gamma_max, bins + 1)
    inside = finite[finite <= gamma_max]
    counts, _ = np.histogram(inside, bins=edges)
    density = counts / np.diff(edges)
    return DosHistogram(edges, density, int((~np.isfinite(g)).sum()),
                        int((finite > gamma_max).sum()))


def count_fast_states(eigs: EigenSet, gamma_threshold: float) -> int:
    """Number of states with gamma above the threshold, null states included."""
    if math.isinf(gamma_threshold) and gamma_threshold > 0:
        return 0
    return int((eigs.gammas > gamma_threshold).sum())


def fraction_inside(eigs: EigenSet, radius: float) -> float:
    """Fraction of eigenvalues with modulus below ``radius``."""
    return float((eigs.moduli < radius).mean())


def binned_par_growth(eigs: EigenSet, gamma_range=(0.2, 2.0)):
    """Log-binned fit of mean PAR against gamma inside ``gamma_range``."""
    from .analysis import Binning, fit_power_law

    if eigs.pars is None:
        raise ValueError("eigenvectors required for PAR")
    return fit_power_law(eigs.gammas, eigs.pars, gamma_range, Binning.LOG)
