"""Binary microstructures from thresholded random fields."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .config import GeneratorConfig
from .spectral import ScalarGrid, build_spectral_field, evaluate

__all__ = [
    "Microstructure",
    "inverse_erf",
    "single_cut_level",
    "double_cut_levels",
    "threshold_single",
    "threshold_double",
    "measured_solid_fraction",
    "generate",
]

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)


def _initial_guess(x: float) -> float:
    # M. Giles' single-precision approximation of erfinv
    w = -math.log((1.0 - x) * (1.0 + x))
    if w < 5.0:
        w -= 2.5
        p = 2.81022636e-08
        p = 3.43273939e-07 + p * w
        p = -3.5233877e-06 + p * w
        p = -4.39150654e-06 + p * w
        p = 0.00021858087 + p * w
        p = -0.00125372503 + p * w
        p = -0.00417768164 + p * w
        p = 0.246640727 + p * w
        p = 1.50140941 + p * w
    else:
        w = math.sqrt(w) - 3.0
        p = -0.000200214257
        p = 0.000100950558 + p * w
        p = 0.00134934322 + p * w
        p = -0.00367342844 + p * w
        p = 0.00573950773 + p * w
        p = -0.0076224613 + p * w
        p = 0.00943887047 + p * w
        p = 1.00167406 + p * w
        p = 2.83297682 + p * w
    return p * x


def inverse_erf(x: float) -> float:
    """Inverse error function on (-1, 1).

    A polynomial starting guess is polished with Newton steps against
    ``math.erf``; the result satisfies ``|erf(y) - x| <= 1e-10``.
    """
    x = float(x)
    if not -1.0 < x < 1.0:
        raise ValueError(f"inverse_erf is defined on (-1, 1), got {x}")
    if x == 0.0:
        return 0.0
    y = _initial_guess(x)
    for _ in range(8):
        step = (math.erf(y) - x) / (_TWO_OVER_SQRT_PI * math.exp(-y * y))
        y -= step
        if abs(step) <= 1e-15 * max(1.0, abs(y)):
            break
    return y


def _check_fraction(phi: float) -> None:
    if not 0.0 < phi < 1.0:
        raise ValueError(f"solid fraction must lie in (0, 1), got {phi}")


def single_cut_level(phi: float) -> float:
    """Level c with P(X > c) = phi for X ~ Normal(0, 1/2): erfinv(1 - 2 phi)."""
    _check_fraction(phi)
    return inverse_erf(1.0 - 2.0 * phi)


def double_cut_levels(phi: float) -> Tuple[float, float]:
    """Symmetric band (-c, c) with P(-c < X < c) = phi, c = erfinv(phi)."""
    _check_fraction(phi)
    c = inverse_erf(phi)
    return -c, c


@dataclass(frozen=True)
class Microstructure:
    """Binary occupancy grid: 1 is solid, 0 is void."""

    occupancy: np.ndarray
    target_solid_fraction: float
    measured_solid_fraction: float
    cut: str
    config: Optional[GeneratorConfig] = None

    def __post_init__(self):
        occ = np.asarray(self.occupancy)
        if occ.size == 0:
            raise ValueError("empty occupancy grid")
        if occ.dtype != np.uint8:
            if not np.isin(occ, (0, 1)).all():
                raise ValueError("occupancy values must be 0 or 1")
            occ = occ.astype(np.uint8)
        occ.setflags(write=False)
        object.__setattr__(self, "occupancy", occ)

    @classmethod
    def from_array(cls, occupancy, cut="single", target=None, config=None):
        """Wrap a 0/1 array, measuring its solid fraction."""
        occ = np.asarray(occupancy)
        if not np.isin(occ, (0, 1)).all():
            raise ValueError("occupancy values must be 0 or 1")
        occ = occ.astype(np.uint8)
        phi_hat = _solid_fraction(occ)
        return cls(occ, phi_hat if target is None else target, phi_hat, cut, config)

    @property
    def extents(self) -> Tuple[int, ...]:
        return self.occupancy.shape

    @property
    def dimension(self) -> int:
        return self.occupancy.ndim

    def recompute_solid_fraction(self) -> float:
        return _solid_fraction(self.occupancy)


def _solid_fraction(occ: np.ndarray) -> float:
    return int(np.count_nonzero(occ)) / occ.size


def measured_solid_fraction(ms: Microstructure) -> float:
    """Exact ratio of solid cells to all cells."""
    return _solid_fraction(ms.occupancy)


def _values(grid) -> np.ndarray:
    values = grid.values if isinstance(grid, ScalarGrid) else np.asarray(grid, dtype=float)
    if values.size == 0:
        raise ValueError("empty grid")
    return values


def threshold_single(grid, phi: float, config: Optional[GeneratorConfig] = None) -> Microstructure:
    """Solid where the field is strictly above ``single_cut_level(phi)``."""
    c = single_cut_level(phi)
    occ = (_values(grid) > c).astype(np.uint8)
    return Microstructure(occ, phi, _solid_fraction(occ), "single", config)


def threshold_double(grid, phi: float, config: Optional[GeneratorConfig] = None) -> Microstructure:
    """Solid where the field lies strictly inside ``double_cut_levels(phi)``."""
    lo, hi = double_cut_levels(phi)
    values = _values(grid)
    occ = ((values > lo) & (values < hi)).astype(np.uint8)
    return Microstructure(occ, phi, _solid_fraction(occ), "double", config)


def generate(config: GeneratorConfig, workers: Optional[int] = None) -> Microstructure:
    """Sample, evaluate and threshold one realization of ``config``."""
    grid = evaluate(build_spectral_field(config), config.extents, workers, config.length)
    threshold = threshold_single if config.cut == "single" else threshold_double
    return threshold(grid, config.solid_fraction, config)
