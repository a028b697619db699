"""Generator parameters and the error hierarchy shared by all modules."""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Optional, Tuple, Union

__all__ = [
    "GRFError",
    "ConfigError",
    "DegenerateStructureError",
    "NoPercolationError",
    "GeneratorConfig",
    "DOMAIN_LENGTH",
]

# Side length of the sample along every axis; all lengths are in units of it.
DOMAIN_LENGTH = 1.0

CUTS = ("single", "double")
DISTRIBUTIONS = ("normal", "gamma")
PREFERRED_AXES = ("horizontal", "vertical")


class GRFError(Exception):
    """Base class for all package errors."""


class ConfigError(GRFError, ValueError):
    """Invalid generator or CLI configuration."""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.key = key


class DegenerateStructureError(GRFError, ValueError):
    """Structure has no interface (solid fraction of 0 or 1) where one is needed."""


class NoPercolationError(GRFError):
    """No spanning path exists through the requested phase and axis."""

    def __init__(self, phase: str, axis: int):
        super().__init__(f"{phase} phase does not percolate along axis {axis}")
        self.phase = phase
        self.axis = axis


@dataclass(frozen=True)
class GeneratorConfig:
    """All user-facing parameters of a microstructure realization.

    Parameters
    ----------
    solid_fraction : float
        Target solid volume fraction, in (0, 1).
    mean_grains : float
        Mean number of grains per unit length.
    heterogeneity : float
        Standard deviation of the number of grains per unit length.
    dimension : int
        2 or 3.
    grid : int or tuple of int
        Grid points per axis. A single int is broadcast to every axis.
    num_waves : int
        Number of superposed standing waves.
    anisotropy : float
        In (0, 1]; 1 is isotropic.
    preferred_axis : {"horizontal", "vertical"} or None
        Direction of grain elongation. Required when ``anisotropy < 1``.
    cut : {"single", "double"}
    distribution : {"normal", "gamma"}
        Distribution of grains per unit length.
    seed : int
        Unsigned 64-bit seed of the random stream.
    """

    solid_fraction: float
    mean_grains: float
    heterogeneity: float
    dimension: int = 3
    grid: Union[int, Tuple[int, ...]] = 128
    num_waves: int = 1000
    anisotropy: float = 1.0
    preferred_axis: Optional[str] = None
    cut: str = "single"
    distribution: str = "gamma"
    seed: int = 0
    length: float = field(default=DOMAIN_LENGTH, init=False)

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise ConfigError(f"dimension must be 2 or 3, got {self.dimension!r}", "dimension")
        grid = self.grid
        if isinstance(grid, int):
            grid = (grid,) * self.dimension
        grid = tuple(int(g) for g in grid)
        if len(grid) != self.dimension:
            raise ConfigError(
                f"grid must have {self.dimension} extents, got {len(grid)}", "grid"
            )
        if any(g < 2 for g in grid):
            raise ConfigError(f"grid extents must be >= 2, got {grid}", "grid")
        object.__setattr__(self, "grid", grid)

        if not 0.0 < self.solid_fraction < 1.0:
            raise ConfigError(
                f"solid_fraction (phi) must lie in (0, 1), got {self.solid_fraction}",
                "solid_fraction",
            )
        if not self.mean_grains > 0:
            raise ConfigError(
                f"mean_grains must be > 0, got {self.mean_grains}", "mean_grains"
            )
        if not self.heterogeneity > 0:
            raise ConfigError(
                f"heterogeneity must be > 0, got {self.heterogeneity}", "heterogeneity"
            )
        if not 0.0 < self.anisotropy <= 1.0:
            raise ConfigError(
                f"anisotropy must lie in (0, 1], got {self.anisotropy}", "anisotropy"
            )
        if self.anisotropy < 1.0 and self.preferred_axis is None:
            raise ConfigError(
                "anisotropy < 1 requires preferred_axis (horizontal or vertical)",
                "preferred_axis",
            )
        if self.preferred_axis is not None and self.preferred_axis not in PREFERRED_AXES:
            raise ConfigError(
                f"preferred_axis must be one of {PREFERRED_AXES}, got {self.preferred_axis!r}",
                "preferred_axis",
            )
        if self.num_waves < 1:
            raise ConfigError(f"num_waves must be >= 1, got {self.num_waves}", "num_waves")
        if self.cut not in CUTS:
            raise ConfigError(f"cut must be one of {CUTS}, got {self.cut!r}", "cut")
        if self.distribution not in DISTRIBUTIONS:
            raise ConfigError(
                f"distribution must be one of {DISTRIBUTIONS}, got {self.distribution!r}",
                "distribution",
            )
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}", "seed")

    @property
    def extents(self) -> Tuple[int, ...]:
        return self.grid  # type: ignore[return-value]

    def with_seed(self, seed: int) -> "GeneratorConfig":
        return replace(self, seed=seed)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.init}
