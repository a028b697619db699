"""Two-point correlation, its radial and axial profiles, and specific surface area.

Correlations are circular: lags wrap around the grid, as implied by computing
them with FFTs. The generated fields are not periodic on the grid, so large
lags carry a wraparound bias; profiles therefore stop at half the domain.
Lags are reported in units of the domain side length L.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .config import DOMAIN_LENGTH, DegenerateStructureError
from .structure import Microstructure

__all__ = [
    "CorrelationMap",
    "CorrelationProfile",
    "two_point_correlation",
    "angular_average",
    "normalize_profile",
    "directional_correlation",
    "specific_surface_area",
    "AXIS_NAMES",
]

AXIS_NAMES = ("x", "y", "z")


@dataclass(frozen=True)
class CorrelationMap:
    """R at every circular lag vector; ``values[0, ..., 0]`` is the zero lag."""

    values: np.ndarray
    solid_fraction: float

    @property
    def extents(self):
        return self.values.shape


@dataclass(frozen=True)
class CorrelationProfile:
    lags: np.ndarray
    values: np.ndarray
    kind: str
    counts: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.lags)


def two_point_correlation(ms: Microstructure) -> CorrelationMap:
    """Circular autocorrelation of the occupancy divided by the cell count.

    Computed as ``ifft(|fft(Z)|**2) / V``.
    """
    z = ms.occupancy.astype(np.float64)
    spectrum = np.fft.rfftn(z)
    power = spectrum.real**2 + spectrum.imag**2
    r = np.fft.irfftn(power, s=z.shape, axes=tuple(range(z.ndim))) / z.size
    return CorrelationMap(r, ms.measured_solid_fraction)


def _min_image_lags(n: int, length: float) -> np.ndarray:
    i = np.arange(n)
    return np.minimum(i, n - i) * (length / n)


def angular_average(cmap: CorrelationMap, length: float = DOMAIN_LENGTH) -> CorrelationProfile:
    """Average R over lag vectors of equal magnitude.

    Bins are one grid spacing wide and centered on multiples of it, so the
    first bin holds only the zero lag. Lag vectors use the minimum-image
    convention; bins beyond half the domain are dropped.
    """
    shape = cmap.values.shape
    spacing = length / max(shape)
    r2 = np.zeros(shape)
    for axis, n in enumerate(shape):
        d = _min_image_lags(n, length)
        bshape = [1] * len(shape)
        bshape[axis] = n
        r2 = r2 + (d**2).reshape(bshape)
    bins = np.floor(np.sqrt(r2) / spacing + 0.5).astype(np.int64).ravel()
    n_bins = int(np.floor(0.5 * length / spacing + 1e-9)) + 1
    counts = np.bincount(bins, minlength=n_bins)[:n_bins]
    sums = np.bincount(bins, weights=cmap.values.ravel(), minlength=n_bins)[:n_bins]
    keep = counts > 0
    k = np.arange(n_bins)[keep]
    return CorrelationProfile(
        lags=k * spacing,
        values=sums[keep] / counts[keep],
        kind="angular_average",
        counts=counts[keep],
    )


def normalize_profile(profile: CorrelationProfile, phi: float) -> CorrelationProfile:
    """Map g to (g - phi**2) / (phi - phi**2): 1 at zero lag, 0 when uncorrelated."""
    if not 0.0 < phi < 1.0:
        raise DegenerateStructureError(
            f"cannot normalize a correlation with solid fraction {phi}"
        )
    values = (profile.values - phi**2) / (phi - phi**2)
    return CorrelationProfile(profile.lags, values, "normalized_" + profile.kind, profile.counts)


def directional_correlation(
    source: Union[Microstructure, CorrelationMap], axis: int, length: float = DOMAIN_LENGTH
) -> CorrelationProfile:
    """R along lags parallel to ``axis``, from 0 to half the extent."""
    cmap = source if isinstance(source, CorrelationMap) else two_point_correlation(source)
    ndim = cmap.values.ndim
    if not 0 <= axis < ndim:
        raise ValueError(f"axis must be in [0, {ndim}), got {axis}")
    n = cmap.values.shape[axis]
    index = [0] * ndim
    index[axis] = slice(0, n // 2 + 1)
    values = np.array(cmap.values[tuple(index)])
    lags = np.arange(n // 2 + 1) * (length / n)
    return CorrelationProfile(lags, values, "axis_" + AXIS_NAMES[axis])


def specific_surface_area(profile: CorrelationProfile, phi: float) -> float:
    """Interface area per unit solid volume from the initial slope of g.

    ``SSA = -(4 / phi) * g'(0)``, the slope taken by least squares over the
    zero-lag point and the next three bins. Units are 1/L.
    """
    if len(profile) < 4:
        raise ValueError(f"need at least 4 bins, got {len(profile)}")
    if not 0.0 < phi <= 1.0:
        raise DegenerateStructureError(f"specific surface area undefined for phi={phi}")
    if phi == 1.0:
        return 0.0
    x = profile.lags[:4] - profile.lags[:4].mean()
    y = profile.values[:4] - profile.values[:4].mean()
    slope = float(x @ y / (x @ x))
    if slope >= 0:
        warnings.warn(
            "correlation does not decrease over the first bins; "
            "structure is below grid resolution",
            RuntimeWarning,
            stacklevel=2,
        )
    return float(-4.0 / phi * slope)
