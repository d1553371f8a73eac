"""Power-law fits, predicted exponents and parameter studies."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .maps import MapSpec, Model

MIN_FIT_POINTS = 8
MIN_BINS = 3


class Binning(str, enum.Enum):
    NONE = "none"
    LOG = "log"


class InsufficientPointsError(ValueError):
    pass


@dataclass(frozen=True)
class PowerLawFit:
    """Straight-line fit of log y against log x; ``exponent`` is minus the slope."""

    exponent: float
    stderr: float
    fit_range: Tuple[float, float]
    r_squared: float
    binning: Binning
    intercept: float = 0.0
    n_points: int = 0

    def to_json(self) -> str:
        return json.dumps({
            "sign_convention": "y ~ x**(-exponent)",
            "exponent": self.exponent,
            "stderr": self.stderr,
            "range": list(self.fit_range),
            "r_squared": self.r_squared,
            "binning": self.binning.value,
        }, sort_keys=True)


def log_bin(xs, ys, factor: float = 2.0):
    """Average ``ys`` in bins of constant width in log x (edges grow by ``factor``).

    Returns bin centers (geometric mean of the x values in the bin) and bin
    means. Empty bins are dropped.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    lo = xs.min()
    k = np.floor(np.log(xs / lo) / np.log(factor) + 1e-12).astype(np.int64)
    n = np.bincount(k)
    keep = n > 0
    sx = np.bincount(k, weights=np.log(xs))[keep] / n[keep]
    sy = np.bincount(k, weights=ys)[keep] / n[keep]
    return np.exp(sx), sy


def fit_power_law(xs, ys, fit_range: Optional[Tuple[float, float]] = None,
                  binning: Binning = Binning.NONE) -> PowerLawFit:
    """Least-squares fit of ``y ~ x**(-exponent)`` in log-log coordinates.

    With ``Binning.LOG`` the points inside the range are first averaged in
    bins whose edges double; zero ``ys`` are then allowed as long as the bin
    mean is positive. Without binning every ``y`` in range must be positive.

    Raises
    ------
    InsufficientPointsError
        Fewer than 8 points fall in the range, or fewer than 3 remain after
        binning.
    """
    binning = Binning(binning)
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape:
        raise ValueError("xs and ys differ in length")
    if fit_range is None:
        fit_range = (float(xs.min()), float(xs.max()))
    lo, hi = fit_range
    if not lo < hi:
        raise ValueError("fit range must have lo < hi")
    sel = (xs >= lo) & (xs <= hi) & (xs > 0)
    x, y = xs[sel], ys[sel]
    if x.size < MIN_FIT_POINTS:
        raise InsufficientPointsError(
            f"need {MIN_FIT_POINTS} points in range {fit_range}, got {x.size}")
    if binning is Binning.LOG:
        x, y = log_bin(x, y)
    elif (y <= 0).any():
        raise InsufficientPointsError("non-positive y values inside the fit range")
    ok = y > 0
    x, y = x[ok], y[ok]
    if x.size < MIN_BINS:
        raise InsufficientPointsError(f"need {MIN_BINS} nonempty bins, got {x.size}")
    lx, ly = np.log(x), np.log(y)
    A = np.vstack([lx, np.ones_like(lx)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + icpt)
    ss_res = float(resid @ resid)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - ss_res / ss_tot)
    dof = x.size - 2
    sxx = float(((lx - lx.mean()) ** 2).sum())
    stderr = math.sqrt(ss_res / dof / sxx) if sxx > 0 else math.inf
    return PowerLawFit(float(-slope), stderr, (float(lo), float(hi)), r2, binning,
                       float(icpt), int(x.size))


def fit_degree_distribution(hist, fit_range: Optional[Tuple[float, float]] = None,
                            binning: Binning = Binning.LOG) -> PowerLawFit:
    """Fit N_L(kappa) of a :class:`~ulamnet.ulam.DegreeHistogram`.

    Missing kappa values count as zero nodes, so log-bin means are densities
    per unit kappa. The default range is ``[10, kappa_max]``.
    """
    kmax = int(hist.kappa.max())
    dense = np.zeros(kmax + 1)
    dense[hist.kappa] = hist.counts
    kappa = np.arange(1, kmax + 1)
    if fit_range is None:
        fit_range = (10.0, float(kmax))
    if kmax <= fit_range[0]:
        raise InsufficientPointsError(f"largest degree {kmax} below fit range {fit_range}")
    return fit_power_law(kappa, dense[1:], fit_range, binning)


def fit_pagerank(probs, fit_range: Optional[Tuple[float, float]] = None,
                 binning: Binning = Binning.NONE) -> PowerLawFit:
    """Fit ``p_j ~ 1/j**beta`` against the 1-based rank ``j``.

    The default range is ``[10, N/10]``.
    """
    p = np.sort(np.asarray(probs, dtype=float))[::-1]
    j = np.arange(1, p.size + 1)
    if fit_range is None:
        fit_range = (10.0, p.size / 10.0)
    if p.size <= fit_range[0] or fit_range[0] >= fit_range[1]:
        raise InsufficientPointsError(f"{p.size} cells too few for fit range {fit_range}")
    return fit_power_law(j, p, fit_range, binning)


def theoretical_exponents(spec: MapSpec, nu: float = 1.0) -> dict:
    """Predicted exponents of the PageRank and link distributions.

    ``beta = z1 - 1`` from the invariant density near 0. Model 1 has an
    out-link exponent ``(2 - z2)/(1 - z2)`` (only for ``z2 < 1``); model 2 an
    in-link exponent ``(4 nu - 1)/(2 nu - 1)``, where ``nu`` is the order of
    the tangency of the right branch at ``x = 1``.
    """
    out = {"beta": spec.z1 - 1.0, "mu_out": None, "mu_in": None}
    if spec.model is Model.F1:
        if spec.z2 < 1:
            out["mu_out"] = (2.0 - spec.z2) / (1.0 - spec.z2)
    elif nu != 0.5:
        out["mu_in"] = (4.0 * nu - 1.0) / (2.0 * nu - 1.0)
    return out


def derive_seed(master: int, *keys: int) -> int:
    """64-bit seed for one study point, derived from the master seed."""
    ss = np.random.SeedSequence([int(master) & 0xFFFFFFFFFFFFFFFF, *map(int, keys)])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class ScanGrid:
    """PageRank PAR (and fitted beta) over a grid of map amplitude ``a`` and damping ``alpha``.

    Rows follow ``a_values`` and columns ``alpha_values``; failed points are NaN.
    """

    a_values: np.ndarray
    alpha_values: np.ndarray
    par_matrix: np.ndarray
    beta_matrix: Optional[np.ndarray] = None
    errors: dict = None

    def rows(self):
        for i, a in enumerate(self.a_values):
            for j, al in enumerate(self.alpha_values):
                beta = np.nan if self.beta_matrix is None else self.beta_matrix[i, j]
                yield float(a), float(al), float(self.par_matrix[i, j]), float(beta)


@dataclass(frozen=True)
class Budget:
    """Sampling and solver settings shared by the points of a study."""

    n_samples: int = 10_000
    seed: int = 42
    tol: float = 1e-12
    max_iter: Optional[int] = None
    eig_tol: float = 1e-10


def stationary_rank(network, alpha: float, budget: Budget = Budget()):
    """PageRank of a network: power iteration for alpha < 1, leading
    eigenvector (power iteration as fallback) at alpha = 1."""
    from .google import GoogleOperator
    from .pagerank import make_rank_vector, pagerank_power
    from .spectrum import leading_eigenvalues

    op = GoogleOperator(network, alpha)
    if alpha < 1.0:
        return pagerank_power(op, budget.tol, budget.max_iter)
    eig = leading_eigenvalues(op, 1, budget.eig_tol)
    if eig.converged[0] and abs(eig.eigenvalues[0] - 1.0) < 1e-8:
        vec = np.abs(eig.eigenvectors[:, 0].real)
        return make_rank_vector(vec, alpha=1.0, method="arnoldi", converged=True,
                                residual=float(eig.residuals[0]), iterations=None)
    return pagerank_power(op, budget.tol, budget.max_iter)


def scan_par(spec_base: MapSpec, a_values: Sequence[float], alpha_values: Sequence[float],
             n_cells: int, budget: Budget = Budget(), fit_beta: bool = True) -> ScanGrid:
    """PAR of the PageRank on an (a, alpha) grid for model 2.

    One Ulam network is built per ``a`` (seed derived from the master seed
    and the row index); every grid point is an independent PageRank solve. A
    failing point is stored as NaN and its message kept in ``errors``.
    """
    from dataclasses import replace

    from .ulam import build_monte_carlo

    if spec_base.model is not Model.F2:
        raise ValueError("scan_par needs a model-2 base spec")
    a_values = np.asarray(a_values, dtype=float)
    alpha_values = np.asarray(alpha_values, dtype=float)
    if a_values.size == 0 or alpha_values.size == 0:
        raise ValueError("empty scan grid")
    if np.any(np.diff(a_values) < 0) or np.any(np.diff(alpha_values) < 0):
        raise ValueError("scan values must be sorted ascending")
    par = np.full((a_values.size, alpha_values.size), np.nan)
    beta = np.full_like(par, np.nan) if fit_beta else None
    errors = {}
    for i, a in enumerate(a_values):
        try:
            net = build_monte_carlo(replace(spec_base, a=float(a)), n_cells, budget.n_samples,
                                    derive_seed(budget.seed, i))
        except Exception as exc:  # noqa: BLE001 - recorded per point
            for j, al in enumerate(alpha_values):
                errors[(float(a), float(al))] = repr(exc)
            continue
        for j, al in enumerate(alpha_values):
            try:
                rank = stationary_rank(net, float(al), budget)
                par[i, j] = rank.par
                if fit_beta:
                    try:
                        beta[i, j] = fit_pagerank(rank.probs).exponent
                    except InsufficientPointsError:
                        pass
            except Exception as exc:  # noqa: BLE001 - recorded per point
                errors[(float(a), float(al))] = repr(exc)
    return ScanGrid(a_values, alpha_values, par, beta, errors)


@dataclass(frozen=True)
class GapStudy:
    n_values: np.ndarray
    gaps: np.ndarray
    fit: Optional[PowerLawFit]

    @property
    def slope(self) -> float:
        return -self.fit.exponent


def gap_scaling_study(spec: MapSpec, n_values: Sequence[int], n_samples: int = 10_000,
                      seed: int = 42, tol: float = 1e-10) -> GapStudy:
    """Spectral gap ``1 - |lambda_2|`` of the alpha = 1 Ulam network versus N.

    The slope of log gap against log N is fitted through all points (the
    8-point minimum of :func:`fit_power_law` does not apply to this handful
    of sizes).
    """
    from .google import GoogleOperator
    from .spectrum import spectral_gap
    from .ulam import build_monte_carlo

    ns = np.asarray(sorted(int(n) for n in n_values))
    gaps = np.empty(ns.size)
    for k, n in enumerate(ns):
        net = build_monte_carlo(spec, int(n), n_samples, derive_seed(seed, int(n)))
        gaps[k] = spectral_gap(GoogleOperator(net, 1.0), tol)
    fit = None
    if ns.size >= 2:
        fit = _loglog_line(ns, gaps)
    return GapStudy(ns, gaps, fit)


def _loglog_line(xs, ys) -> PowerLawFit:
    lx, ly = np.log(xs), np.log(ys)
    slope, icpt = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + icpt)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(resid @ resid) / ss_tot
    sxx = float(((lx - lx.mean()) ** 2).sum())
    stderr = math.sqrt(float(resid @ resid) / (xs.size - 2) / sxx) if xs.size > 2 else 0.0
    return PowerLawFit(float(-slope), stderr, (float(xs.min()), float(xs.max())), r2,
                       Binning.NONE, float(icpt), int(xs.size))
