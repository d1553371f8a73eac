import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ulamnet.analysis import (Binning, Budget, InsufficientPointsError, ScanGrid, derive_seed,
                              fit_degree_distribution, fit_pagerank, fit_power_law,
                              gap_scaling_study, log_bin, scan_par, theoretical_exponents)
from ulamnet.maps import MapSpec
from ulamnet.pagerank import participation_ratio
from ulamnet.ulam import DegreeHistogram, Direction


@given(c=st.floats(1e-6, 1e6))
def test_exact_inverse_law(c):
    xs = np.arange(1.0, 101.0)
    fit = fit_power_law(xs, c / xs)
    assert fit.exponent == pytest.approx(1.0, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("s", [0.5, 1.0, 2.25, 3.0])
def test_planted_exponent_noiseless(s):
    xs = np.arange(1.0, 2001.0)
    fit = fit_power_law(xs, 3.7 * xs ** -s, (1, 2000))
    assert fit.exponent == pytest.approx(s, abs=1e-10)


@pytest.mark.parametrize("s", [0.5, 1.0, 2.25, 3.0])
def test_planted_exponent_log_binned(s):
    # bin means of a discrete power law are only asymptotically exact
    xs = np.arange(1.0, 4097.0)
    fit = fit_power_law(xs, xs ** -s, (8, 4096), Binning.LOG)
    assert fit.exponent == pytest.approx(s, abs=0.02)


@pytest.mark.parametrize("s", [0.5, 1.0, 2.25, 3.0])
@pytest.mark.parametrize("seed", range(5))
def test_planted_exponent_with_noise(s, seed):
    rng = np.random.default_rng(seed)
    xs = np.geomspace(1, 1e4, 200)
    ys = xs ** -s * (1 + 0.05 * rng.standard_normal(xs.size))
    fit = fit_power_law(xs, ys)
    assert abs(fit.exponent - s) <= 3 * fit.stderr


def test_insufficient_points():
    with pytest.raises(InsufficientPointsError):
        fit_power_law(np.arange(1.0, 8.0), np.ones(7))
    with pytest.raises(InsufficientPointsError):
        fit_power_law(np.arange(1.0, 20.0), np.r_[np.ones(18), 0.0])
    with pytest.raises(ValueError):
        fit_power_law(np.arange(1.0, 20.0), np.ones(19), (5, 5))


def test_log_bins_double():
    x, y = log_bin(np.arange(1.0, 16.0), np.arange(1.0, 16.0))
    # bins [1,2), [2,4), [4,8), [8,16)
    assert y.tolist() == [1.0, 2.5, 5.5, 11.5]


def test_log_binning_tolerates_zero_counts():
    kappa = np.arange(1, 200)
    counts = np.where(kappa % 3 == 0, 0.0, 1e6 * kappa ** -2.0)
    fit = fit_power_law(kappa, counts, (1, 199), Binning.LOG)
    assert 1.8 < fit.exponent < 2.2


def test_degree_fit_on_synthetic_histogram():
    kappa = np.arange(1, 1025)
    counts = np.round(1e9 * kappa ** -2.25).astype(int)
    keep = counts > 0
    hist = DegreeHistogram(Direction.OUTGOING, kappa[keep], counts[keep])
    assert fit_degree_distribution(hist).exponent == pytest.approx(2.25, abs=0.05)


def test_pagerank_fit_uses_rank_order():
    p = 1.0 / np.arange(1, 1001)
    np.random.default_rng(0).shuffle(p)
    assert fit_pagerank(p).exponent == pytest.approx(1.0, abs=1e-12)
    assert fit_pagerank(p).fit_range == (10.0, 100.0)


def test_fit_json():
    fit = fit_power_law(np.arange(1.0, 30.0), np.arange(1.0, 30.0) ** -2)
    d = json.loads(fit.to_json())
    assert set(d) >= {"exponent", "stderr", "range", "r_squared", "binning"}
    assert d["exponent"] == pytest.approx(2.0)


def test_theory_model1():
    t = theoretical_exponents(MapSpec("f1", 2.0, 0.2))
    assert t["beta"] == 1.0 and t["mu_out"] == pytest.approx(9 / 4) and t["mu_in"] is None


def test_theory_model2():
    t = theoretical_exponents(MapSpec("f2", 2.0, a=0.9), nu=1.0)
    assert t["beta"] == 1.0 and t["mu_in"] == 3.0 and t["mu_out"] is None


def test_theory_flat_density_and_inapplicable_z2():
    assert theoretical_exponents(MapSpec("f1", 1.0, 0.2))["beta"] == 0.0
    assert theoretical_exponents(MapSpec("f1", 2.0, 1.5))["mu_out"] is None


@settings(max_examples=50)
@given(z1=st.floats(0.1, 5), z2=st.floats(0.01, 3), a=st.floats(0.01, 0.99),
       nu=st.floats(0.6, 5), model=st.sampled_from(["f1", "f2"]))
def test_theory_total(z1, z2, a, nu, model):
    spec = MapSpec(model, z1, z2, a)
    assert theoretical_exponents(spec, nu) == theoretical_exponents(spec, nu)


def test_derived_seeds_distinct():
    seeds = {derive_seed(42, n) for n in (500, 1000, 2000, 4000)}
    assert len(seeds) == 4 and derive_seed(42, 500) == derive_seed(42, 500)


def test_scan_small_grid():
    grid = scan_par(MapSpec("f2", 2.0, a=0.9), [0.9, 0.96], [0.85, 1.0], 600,
                    Budget(n_samples=2000))
    assert grid.par_matrix.shape == (2, 2)
    assert np.all((grid.par_matrix >= 1) & (grid.par_matrix <= 600))
    # attractor localizes the alpha = 1 PageRank
    assert grid.par_matrix[1, 1] < 2 < grid.par_matrix[0, 1]
    rows = list(grid.rows())
    assert [(a, al) for a, al, _, _ in rows] == [(0.9, 0.85), (0.9, 1.0), (0.96, 0.85), (0.96, 1.0)]


def test_scan_single_cell_and_failures():
    grid = scan_par(MapSpec("f2", 2.0, a=0.9), [0.9], [0.8], 200, Budget(n_samples=500))
    assert len(list(grid.rows())) == 1
    bad = scan_par(MapSpec("f2", 2.0, a=0.9), [0.9], [0.8], 1, Budget(n_samples=500))
    assert np.isnan(bad.par_matrix).all() and bad.errors


def test_scan_rejects_bad_input():
    with pytest.raises(ValueError):
        scan_par(MapSpec("f1"), [0.9], [0.8], 100)
    with pytest.raises(ValueError):
        scan_par(MapSpec("f2", a=0.9), [0.96, 0.9], [0.8], 100)


def test_par_is_normalization_free():
    p = 1.0 / np.arange(1, 500) ** 0.8
    assert participation_ratio(p / p.sum()) == pytest.approx(
        participation_ratio(p / np.linalg.norm(p)), rel=1e-12)


def test_gap_study_small():
    study = gap_scaling_study(MapSpec("f1", 2.0, 0.2), [250, 500, 1000])
    assert study.gaps.shape == (3,)
    assert -1.4 < study.slope < -0.6


def test_gap_tracks_z1():
    # the laminar escape time grows like N**(z1 - 1): a larger z1 closes the gap faster
    slopes = {z1: gap_scaling_study(MapSpec("f1", z1, 0.2), [250, 500, 1000, 2000]).slope
              for z1 in (1.5, 2.0, 2.5)}
    assert slopes[1.5] > slopes[2.0] > slopes[2.5]
    for z1, slope in slopes.items():
        assert abs(-slope - (z1 - 1)) <= 0.35
