import functools

import numpy as np
import pytest

from grfgen import GeneratorConfig, Microstructure, build_spectral_field, evaluate

# parameters of the 2D gamma samples (grains per length 13, spread 1.8)
FIG1 = dict(mean_grains=13.0, heterogeneity=1.8, distribution="gamma")
# parameters of the 3D normal samples (grains per length 9, spread 1.3)
FIG3 = dict(mean_grains=9.0, heterogeneity=1.3, distribution="normal")


@functools.lru_cache(maxsize=None)
def field_values(dimension, grid, seed, mean_grains, heterogeneity, distribution,
                 anisotropy=1.0, preferred_axis=None, num_waves=1000):
    """Evaluated field for one seed; cached because ensembles are reused across tests."""
    cfg = GeneratorConfig(
        solid_fraction=0.5, mean_grains=mean_grains, heterogeneity=heterogeneity,
        dimension=dimension, grid=grid, distribution=distribution, seed=seed,
        anisotropy=anisotropy, preferred_axis=preferred_axis, num_waves=num_waves,
    )
    values = evaluate(build_spectral_field(cfg), cfg.extents).values
    values.setflags(write=False)
    return values


def ensemble(dimension, grid, seeds, **params):
    return [field_values(dimension, grid, s, **params) for s in seeds]


def checkerboard(shape):
    return Microstructure.from_array(np.indices(shape).sum(axis=0) % 2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
