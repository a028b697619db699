"""Wavevector sampling and evaluation of the standing-wave Gaussian random field.

The field is

    GRF(r) = N**-0.5 * sum_n cos(q_n . r + phase_n)

with phases uniform on [0, 2 pi) and |q_n| = 2 pi m_n / L, where m_n (grains
per unit length) is drawn from a normal or gamma distribution. Every term has
variance 1/2, hence so does the field.
"""
from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .config import DOMAIN_LENGTH, ConfigError, GeneratorConfig

__all__ = [
    "SpectralField",
    "ScalarGrid",
    "sample_magnitudes",
    "sample_directions",
    "build_spectral_field",
    "evaluate",
    "cell_centers",
    "default_workers",
]

# Planes along axis 0 per evaluation task. Fixed so that the arithmetic done for
# each output cell does not depend on the number of workers.
_CHUNK = 8


@dataclass(frozen=True)
class SpectralField:
    """Wavevectors (N, d) and phases (N,) of the superposed waves."""

    wavevectors: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        q = np.array(self.wavevectors, dtype=np.float64, ndmin=2)
        p = np.array(self.phases, dtype=np.float64).ravel()
        if q.shape[0] != p.shape[0]:
            raise ValueError(f"{q.shape[0]} wavevectors but {p.shape[0]} phases")
        q.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "wavevectors", q)
        object.__setattr__(self, "phases", p)

    @property
    def num_waves(self) -> int:
        return self.phases.shape[0]

    @property
    def dimension(self) -> int:
        return self.wavevectors.shape[1]


@dataclass(frozen=True)
class ScalarGrid:
    """Real values sampled at the cell centers of a regular grid on [0, L)^d.

    ``values`` is indexed ``[ix, iy(, iz)]``.
    """

    values: np.ndarray

    @property
    def extents(self) -> Tuple[int, ...]:
        return self.values.shape

    @property
    def dimension(self) -> int:
        return self.values.ndim


def cell_centers(n: int, length: float = DOMAIN_LENGTH) -> np.ndarray:
    """Cell-centered coordinates ``(i + 0.5) / n * length`` for ``i < n``."""
    return (np.arange(n) + 0.5) / n * length


def default_workers() -> int:
    """Worker count from ``GRFGEN_THREADS`` (default 1)."""
    raw = os.environ.get("GRFGEN_THREADS")
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def sample_magnitudes(distribution, mean, std, n, rng, length=DOMAIN_LENGTH):
    """Draw ``n`` wavenumbers ``2 pi m / length``.

    ``m`` has mean ``mean`` and standard deviation ``std``. The gamma law is
    moment matched (shape ``(mean/std)**2``, scale ``std**2/mean``). Normal
    draws that are not strictly positive are redrawn; if the redraws exceed
    half of ``n`` a warning is issued because the realized mean is then
    noticeably biased upward.
    """
    if not mean > 0:
        raise ConfigError(f"mean_grains must be > 0, got {mean}", "mean_grains")
    if not std > 0:
        raise ConfigError(f"heterogeneity must be > 0, got {std}", "heterogeneity")

    if distribution == "gamma":
        shape, scale = gamma_parameters(mean, std)
        m = rng.gamma(shape, scale, size=n)
        # underflow guard for extreme shapes; gamma draws are > 0 in exact arithmetic
        m = np.where(m > 0, m, np.finfo(float).tiny)
    elif distribution == "normal":
        m = rng.normal(mean, std, size=n)
        bad = m <= 0
        rejected = int(bad.sum())
        while bad.any():
            m[bad] = rng.normal(mean, std, size=int(bad.sum()))
            bad = m <= 0
            rejected += int(bad.sum())
        if rejected > 0.5 * n:
            warnings.warn(
                f"{rejected} non-positive normal draws redrawn for {n} wavenumbers; "
                "the sampled mean is biased upward",
                RuntimeWarning,
                stacklevel=2,
            )
    else:
        raise ConfigError(f"unknown distribution {distribution!r}", "distribution")
    return 2.0 * np.pi * m / length


def gamma_parameters(mean: float, std: float) -> Tuple[float, float]:
    """(shape, scale) of the gamma law with the given mean and standard deviation."""
    return (mean / std) ** 2, std**2 / mean


def _elongation_axis(dimension: int, preferred_axis: Optional[str]) -> int:
    if preferred_axis == "vertical":
        return dimension - 1
    if preferred_axis == "horizontal":
        return 0
    raise ConfigError(
        f"preferred_axis must be 'horizontal' or 'vertical', got {preferred_axis!r}",
        "preferred_axis",
    )


def sample_directions(dimension, anisotropy, preferred_axis, n, rng):
    """Draw ``n`` unit vectors, shape ``(n, dimension)``.

    Directions are uniform on the unit circle/sphere. For ``anisotropy < 1``
    the component along the elongation axis (last axis for ``"vertical"``,
    first for ``"horizontal"``) is multiplied by ``anisotropy`` and the vector
    renormalized, which suppresses variation along that axis.
    """
    if not 0.0 < anisotropy <= 1.0:
        raise ConfigError(f"anisotropy must lie in (0, 1], got {anisotropy}", "anisotropy")
    if dimension not in (2, 3):
        raise ConfigError(f"dimension must be 2 or 3, got {dimension}", "dimension")

    u = rng.standard_normal(size=(n, dimension))
    norm = np.linalg.norm(u, axis=1)
    # a zero Gaussian vector has probability zero, but would divide by zero
    while np.any(norm == 0):
        zero = norm == 0
        u[zero] = rng.standard_normal(size=(int(zero.sum()), dimension))
        norm = np.linalg.norm(u, axis=1)
    u /= norm[:, None]

    if anisotropy < 1.0:
        u[:, _elongation_axis(dimension, preferred_axis)] *= anisotropy
        u /= np.linalg.norm(u, axis=1)[:, None]
    return u


def build_spectral_field(config: GeneratorConfig, rng=None) -> SpectralField:
    """Sample the waves of one realization.

    Draw order is fixed (magnitudes, directions, phases) so that a seed
    reproduces the field exactly. ``rng`` defaults to a PCG64 generator seeded
    with ``config.seed``.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    n = config.num_waves
    k = sample_magnitudes(
        config.distribution, config.mean_grains, config.heterogeneity, n, rng, config.length
    )
    u = sample_directions(config.dimension, config.anisotropy, config.preferred_axis, n, rng)
    phases = np.mod(rng.uniform(0.0, 2.0 * np.pi, size=n), 2.0 * np.pi)
    return SpectralField(wavevectors=k[:, None] * u, phases=phases)


def evaluate(
    field: SpectralField,
    extents: Sequence[int],
    workers: Optional[int] = None,
    length: float = DOMAIN_LENGTH,
) -> ScalarGrid:
    """Evaluate the field at the cell centers of a grid with the given extents.

    Uses the separable form cos(q.r + p) = Re(prod_axis exp(i q_a r_a) e^{ip}),
    so the wave sum becomes a dense matrix product per slab of planes. Slabs
    have a fixed size, making the result independent of ``workers``.
    """
    extents = tuple(int(e) for e in extents)
    if len(extents) != field.dimension:
        raise ValueError(
            f"field is {field.dimension}-D but {len(extents)} extents were given"
        )
    if any(e < 2 for e in extents):
        raise ValueError(f"grid extents must be >= 2, got {extents}")
    if workers is None:
        workers = default_workers()

    q = field.wavevectors
    # per-axis factors, shape (n_axis, N)
    factors = [
        np.exp(1j * np.outer(cell_centers(n, length), q[:, a])) for a, n in enumerate(extents)
    ]
    factors[0] = factors[0] * np.exp(1j * field.phases)[None, :]
    scale = 1.0 / np.sqrt(field.num_waves)
    out = np.empty(extents, dtype=np.float64)

    if len(extents) == 2:
        second = factors[1].T
        second_re = np.ascontiguousarray(second.real)
        second_im = np.ascontiguousarray(second.imag)

        first_re = np.ascontiguousarray(factors[0].real)
        first_im = np.ascontiguousarray(factors[0].imag)

        def task(start):
            stop = min(start + _CHUNK, extents[0])
            block = first_re[start:stop] @ second_re - first_im[start:stop] @ second_im
            out[start:stop] = block * scale

    else:
        nx, ny, nz = extents
        third = factors[2].T
        third_re = np.ascontiguousarray(third.real)
        third_im = np.ascontiguousarray(third.imag)
        y_re = factors[1].real[None, :, :]
        y_im = factors[1].imag[None, :, :]

        def task(start):
            stop = min(start + _CHUNK, nx)
            x_re = factors[0].real[start:stop, None, :]
            x_im = factors[0].imag[start:stop, None, :]
            # real and imaginary parts kept as separate contiguous arrays for BLAS
            plane_re = (x_re * y_re - x_im * y_im).reshape(-1, field.num_waves)
            plane_im = (x_re * y_im + x_im * y_re).reshape(-1, field.num_waves)
            block = plane_re @ third_re - plane_im @ third_im
            out[start:stop] = block.reshape(stop - start, ny, nz) * scale

    starts = range(0, extents[0], _CHUNK)
    if workers <= 1:
        for s in starts:
            task(s)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(task, starts))
    return ScalarGrid(out)
