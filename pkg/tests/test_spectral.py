import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from grfgen import ConfigError, GeneratorConfig, SpectralField, build_spectral_field, evaluate
from grfgen.spectral import cell_centers, gamma_parameters, sample_directions, sample_magnitudes

from conftest import FIG1, ensemble


# --- magnitudes -------------------------------------------------------------

def test_gamma_moment_matching_parameters():
    shape, scale = gamma_parameters(13.0, 1.8)
    assert shape == pytest.approx(52.16, abs=0.01)
    assert scale == pytest.approx(0.2492, abs=1e-4)
    # mean and variance of the gamma law recover the inputs
    assert shape * scale == pytest.approx(13.0)
    assert np.sqrt(shape) * scale == pytest.approx(1.8)


def test_gamma_sample_mean(rng):
    k = sample_magnitudes("gamma", 13.0, 1.8, 100_000, rng)
    m = k / (2 * np.pi)
    assert np.all(k > 0)
    assert abs(m.mean() - 13.0) <= 0.01 * 13.0
    assert m.std() == pytest.approx(1.8, rel=0.02)


def test_normal_sample_moments(rng):
    m = sample_magnitudes("normal", 9.0, 1.3, 100_000, rng) / (2 * np.pi)
    assert np.all(m > 0)
    assert m.mean() == pytest.approx(9.0, abs=0.02)
    assert m.std() == pytest.approx(1.3, abs=0.02)


def test_vanishing_spread(rng):
    m = sample_magnitudes("gamma", 13.0, 1e-6, 10_000, rng) / (2 * np.pi)
    assert np.all(np.abs(m - 13.0) <= 1e-4)


@pytest.mark.parametrize("mean,std", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (1.0, -2.0)])
def test_magnitudes_reject_bad_parameters(rng, mean, std):
    with pytest.raises(ConfigError):
        sample_magnitudes("gamma", mean, std, 10, rng)


def test_normal_rejection_warning(rng):
    with pytest.warns(RuntimeWarning, match="biased upward"):
        m = sample_magnitudes("normal", 0.1, 5.0, 10_000, rng)
    assert np.all(m > 0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        sample_magnitudes("normal", 9.0, 1.3, 10_000, rng)


# --- directions -------------------------------------------------------------

def test_isotropic_sphere_symmetry(rng):
    u = sample_directions(3, 1.0, None, 100_000, rng)
    assert np.all(np.abs(u.mean(axis=0)) <= 0.01)
    assert abs((u[:, 2] > 0).mean() - 0.5) <= 0.01


@pytest.mark.parametrize("dimension", [2, 3])
def test_isotropic_second_moment(rng, dimension):
    u = sample_directions(dimension, 1.0, None, 100_000, rng)
    second = u.T @ u / len(u)
    assert np.abs(second - np.eye(dimension) / dimension).max() <= 0.01


def test_circle_angle_histogram(rng):
    n, bins = 100_000, 36
    u = sample_directions(2, 1.0, None, n, rng)
    counts, _ = np.histogram(np.arctan2(u[:, 1], u[:, 0]), bins=bins, range=(-np.pi, np.pi))
    p = 1.0 / bins
    sigma = np.sqrt(n * p * (1 - p))
    assert np.all(np.abs(counts - n * p) <= 3 * sigma)


def test_vertical_preference_suppresses_vertical_component(rng):
    u = sample_directions(3, 0.6, "vertical", 100_000, rng)
    assert np.mean(u[:, 2] ** 2) < np.mean(u[:, 0] ** 2)
    h = sample_directions(3, 0.6, "horizontal", 100_000, rng)
    assert np.mean(h[:, 0] ** 2) < np.mean(h[:, 2] ** 2)


@pytest.mark.parametrize("dimension", [2, 3])
def test_anisotropy_monotone(dimension):
    last = [
        np.mean(sample_directions(dimension, a, "vertical", 100_000, np.random.default_rng(7))[:, -1] ** 2)
        for a in (0.2, 0.4, 0.6, 0.8, 1.0)
    ]
    assert np.all(np.diff(last) > 0)


@pytest.mark.parametrize("a", [0.0, -0.5, 1.5])
def test_directions_reject_bad_anisotropy(rng, a):
    with pytest.raises(ConfigError):
        sample_directions(3, a, "vertical", 10, rng)


@settings(max_examples=50, deadline=None)
@given(
    dimension=st.sampled_from([2, 3]),
    a=st.floats(0.01, 1.0),
    axis=st.sampled_from(["horizontal", "vertical"]),
    seed=st.integers(0, 2**32),
)
def test_directions_are_unit_vectors(dimension, a, axis, seed):
    u = sample_directions(dimension, a, axis, 200, np.random.default_rng(seed))
    assert u.shape == (200, dimension)
    np.testing.assert_allclose(np.linalg.norm(u, axis=1), 1.0, rtol=0, atol=1e-12)


# --- spectral field ---------------------------------------------------------

def _config(**kw):
    params = dict(solid_fraction=0.5, dimension=3, grid=16, seed=42, **FIG1)
    params.update(kw)
    return GeneratorConfig(**params)


def test_build_is_deterministic():
    a = build_spectral_field(_config())
    b = build_spectral_field(_config())
    assert np.array_equal(a.wavevectors, b.wavevectors)
    assert np.array_equal(a.phases, b.phases)
    c = build_spectral_field(_config(seed=43))
    assert not np.array_equal(a.phases, c.phases)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**64 - 1), n=st.integers(1, 300), dist=st.sampled_from(["gamma", "normal"]))
def test_field_invariants(seed, n, dist):
    f = build_spectral_field(_config(seed=seed, num_waves=n, distribution=dist))
    assert f.num_waves == n == len(f.wavevectors)
    assert np.all(np.linalg.norm(f.wavevectors, axis=1) > 0)
    assert np.all((f.phases >= 0) & (f.phases < 2 * np.pi))


def test_single_wave_is_pure_cosine():
    cfg = _config(num_waves=1, dimension=2, grid=64)
    grid = evaluate(build_spectral_field(cfg), cfg.extents)
    assert grid.values.max() <= 1 + 1e-12
    assert grid.values.min() >= -1 - 1e-12
    assert grid.values.max() - grid.values.min() > 1.5


def test_single_wave_closed_form():
    field = SpectralField(wavevectors=[[2 * np.pi, 0.0]], phases=[0.0])
    values = evaluate(field, (8, 8)).values
    x = cell_centers(8)
    for i in range(8):
        assert values[i, 3] == pytest.approx(np.cos(2 * np.pi * x[i]), abs=1e-12)
    # no dependence on y
    assert np.ptp(values, axis=1).max() <= 1e-12


def test_evaluate_matches_direct_cosine_sum():
    cfg = _config(grid=(10, 7, 5), num_waves=40)
    f = build_spectral_field(cfg)
    values = evaluate(f, cfg.extents).values
    x, y, z = np.meshgrid(*(cell_centers(n) for n in cfg.extents), indexing="ij")
    direct = sum(
        np.cos(q[0] * x + q[1] * y + q[2] * z + p) for q, p in zip(f.wavevectors, f.phases)
    ) / np.sqrt(f.num_waves)
    np.testing.assert_allclose(values, direct, rtol=0, atol=1e-12)


@pytest.mark.parametrize("extents", [(16, 16), (33, 20), (19, 16, 12)])
def test_evaluate_independent_of_workers(extents):
    f = build_spectral_field(_config(dimension=len(extents), grid=extents))
    one = evaluate(f, extents, workers=1).values
    four = evaluate(f, extents, workers=4).values
    assert one.tobytes() == four.tobytes()


def test_evaluate_rejects_tiny_extents():
    f = build_spectral_field(_config(dimension=2))
    with pytest.raises(ValueError):
        evaluate(f, (1, 16))
    with pytest.raises(ValueError):
        evaluate(f, (16, 16, 16))


def test_isotropic_field_moments_3d():
    cfg = _config(grid=64, seed=0)
    values = evaluate(build_spectral_field(cfg), cfg.extents).values
    assert abs(values.mean()) <= 0.02
    assert values.var() == pytest.approx(0.5, rel=0.10)


@pytest.mark.parametrize("seed", range(20))
def test_field_histogram_is_normal(seed):
    (values,) = ensemble(2, 128, [seed], **FIG1)
    v = values.ravel()
    assert abs(stats.skew(v)) < 0.1
    assert abs(stats.kurtosis(v)) < 0.2


def test_pointwise_variance_over_seeds():
    samples = np.array([
        evaluate(build_spectral_field(_config(dimension=2, grid=8, seed=s)), (8, 8)).values
        for s in range(400)
    ])
    assert samples.var(axis=0).mean() == pytest.approx(0.5, rel=0.10)
    assert np.abs(samples.mean(axis=0)).max() <= 0.15
