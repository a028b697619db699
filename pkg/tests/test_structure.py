import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from scipy import integrate

from grfgen import (
    GeneratorConfig,
    Microstructure,
    ScalarGrid,
    double_cut_levels,
    generate,
    inverse_erf,
    measured_solid_fraction,
    single_cut_level,
    threshold_double,
    threshold_single,
)

from conftest import FIG1, checkerboard, ensemble

# erfinv(0.4) from 200 bisection steps on math.erf
ERFINV_04 = 0.37080715859355795


def _gauss_half_variance(x):
    return math.exp(-x * x) / math.sqrt(math.pi)


# --- inverse error function -------------------------------------------------

def test_inverse_erf_values():
    assert inverse_erf(0.0) == 0.0
    assert inverse_erf(0.4) == pytest.approx(ERFINV_04, abs=1e-12)
    assert inverse_erf(-0.4) == pytest.approx(-ERFINV_04, abs=1e-12)


def test_inverse_erf_round_trip_grid():
    for x in np.linspace(-0.999, 0.999, 1000):
        assert abs(math.erf(inverse_erf(x)) - x) <= 1e-10


@settings(max_examples=300)
@given(st.floats(-0.999999, 0.999999))
def test_inverse_erf_round_trip(x):
    assert abs(math.erf(inverse_erf(x)) - x) <= 1e-10


@given(st.floats(1e-6, 0.999999))
def test_inverse_erf_odd(x):
    assert inverse_erf(-x) == -inverse_erf(x)


@pytest.mark.parametrize("x", [1.0, -1.0, 1.5, float("nan")])
def test_inverse_erf_domain(x):
    with pytest.raises(ValueError):
        inverse_erf(x)


# --- levels -----------------------------------------------------------------

def test_single_cut_level_values():
    assert single_cut_level(0.5) == 0.0
    assert single_cut_level(0.7) == pytest.approx(-ERFINV_04, abs=1e-10)
    assert single_cut_level(0.3) == pytest.approx(-single_cut_level(0.7), abs=1e-15)


@pytest.mark.parametrize("phi", np.round(np.arange(0.01, 1.0, 0.01), 2))
def test_single_cut_level_accuracy(phi):
    assert abs(math.erf(single_cut_level(phi)) - (1 - 2 * phi)) <= 1e-10


def test_single_cut_level_tail_probability():
    # P(X > c) for X ~ Normal(0, 1/2)
    mass, _ = integrate.quad(_gauss_half_variance, single_cut_level(0.7), np.inf, epsabs=1e-14)
    assert mass == pytest.approx(0.7, abs=1e-9)


def test_double_cut_levels():
    lo, hi = double_cut_levels(0.4)
    assert hi == pytest.approx(ERFINV_04, abs=1e-10)
    assert lo == -hi
    mass, _ = integrate.quad(_gauss_half_variance, lo, hi, epsabs=1e-14)
    assert mass == pytest.approx(0.4, abs=1e-9)


def test_double_cut_levels_vanish_for_small_phi():
    lo, hi = double_cut_levels(1e-12)
    assert abs(lo) < 1e-11 and abs(hi) < 1e-11


@pytest.mark.parametrize("phi", [0.0, 1.0, -0.1, 1.1])
def test_levels_domain(phi):
    with pytest.raises(ValueError):
        single_cut_level(phi)
    with pytest.raises(ValueError):
        double_cut_levels(phi)


# --- thresholding -----------------------------------------------------------

def test_constant_grid_single_cut():
    ms = threshold_single(ScalarGrid(np.ones((6, 6))), 0.5)
    assert ms.measured_solid_fraction == 1.0
    assert ms.occupancy.dtype == np.uint8
    assert ms.cut == "single" and ms.target_solid_fraction == 0.5


def test_constant_zero_grid_double_cut_is_solid():
    for phi in (0.05, 0.4, 0.9):
        assert threshold_double(ScalarGrid(np.zeros((5, 4, 3))), phi).measured_solid_fraction == 1.0


def test_half_fraction_is_sign_split(rng):
    values = rng.standard_normal((20, 30))
    values[0, 0] = 0.0
    ms = threshold_single(ScalarGrid(values), 0.5)
    assert np.array_equal(ms.occupancy == 1, ~(values <= 0))


def test_strict_inequalities_at_levels():
    c = single_cut_level(0.3)
    assert threshold_single(ScalarGrid(np.full((2, 2), c)), 0.3).measured_solid_fraction == 0.0
    lo, hi = double_cut_levels(0.4)
    edge = np.array([[lo, hi], [0.0, 0.0]])
    np.testing.assert_array_equal(threshold_double(ScalarGrid(edge), 0.4).occupancy, [[0, 0], [1, 1]])


_fields = arrays(np.float64, (12, 9), elements=st.floats(-3, 3, allow_nan=False))
_phi = st.floats(0.01, 0.99)


@settings(max_examples=60, deadline=None)
@given(values=_fields, p1=_phi, p2=_phi)
def test_monotone_nesting(values, p1, p2):
    lo, hi = sorted((p1, p2))
    grid = ScalarGrid(values)
    for threshold in (threshold_single, threshold_double):
        small = threshold(grid, lo).occupancy.astype(bool)
        large = threshold(grid, hi).occupancy.astype(bool)
        assert np.all(large[small])


@settings(max_examples=60, deadline=None)
@given(values=_fields, phi=_phi)
def test_single_cut_complement_duality(values, phi):
    # skip grids with a value on either level; ties have measure zero
    c = single_cut_level(phi)
    if np.any(values == c) or np.any(-values == single_cut_level(1 - phi)):
        return
    solid = threshold_single(ScalarGrid(values), phi).occupancy
    void_dual = 1 - threshold_single(ScalarGrid(-values), 1 - phi).occupancy
    assert np.array_equal(solid, void_dual)


def test_measured_fraction_examples():
    assert measured_solid_fraction(Microstructure.from_array(np.ones((3, 3)))) == 1.0
    assert measured_solid_fraction(Microstructure.from_array(np.zeros((3, 3)))) == 0.0
    assert measured_solid_fraction(checkerboard((4, 4))) == 0.5


@settings(max_examples=30)
@given(arrays(np.uint8, st.tuples(st.integers(2, 8), st.integers(2, 8)), elements=st.integers(0, 1)))
def test_stored_fraction_matches_recount(occ):
    ms = threshold_single(ScalarGrid(occ.astype(float) - 0.5), 0.5)
    assert ms.recompute_solid_fraction() == ms.measured_solid_fraction
    assert set(np.unique(ms.occupancy)) <= {0, 1}


def test_microstructure_rejects_non_binary():
    with pytest.raises(ValueError):
        Microstructure.from_array(np.array([[0, 2], [1, 1]]))


@pytest.mark.parametrize("cut,phi", [("single", 0.3), ("single", 0.7), ("double", 0.2), ("double", 0.4)])
def test_ensemble_mean_fraction(cut, phi):
    threshold = threshold_single if cut == "single" else threshold_double
    fractions = [
        threshold(ScalarGrid(v), phi).measured_solid_fraction
        for v in ensemble(2, 128, range(10), **FIG1)
    ]
    assert abs(np.mean(fractions) - phi) <= 0.01


def test_single_cut_3d_fraction():
    cfg = GeneratorConfig(0.3, 13, 1.8, dimension=3, grid=128, seed=5)
    ms = generate(cfg)
    assert abs(ms.measured_solid_fraction - 0.3) <= 0.03
    assert ms.config is cfg


def test_double_cut_fraction_fig2():
    cfg = GeneratorConfig(0.4, dimension=2, grid=256, cut="double", seed=11, **FIG1)
    assert abs(generate(cfg).measured_solid_fraction - 0.4) <= 0.03
