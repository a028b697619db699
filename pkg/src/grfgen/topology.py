"""Burning-method distances, percolation, tortuosity and trimming.

Connectivity is face adjacency (4 neighbours in 2D, 6 in 3D) with
non-periodic boundaries. The burn spreads one cell per step from every cell
of the chosen phase on the lower face of an axis.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from .config import NoPercolationError
from .structure import Microstructure

__all__ = [
    "BurnResult",
    "CONNECTIVITY",
    "UNBURNED",
    "burn",
    "tortuosity",
    "percolates",
    "trim_to_percolating",
]

CONNECTIVITY = "face"
UNBURNED = -1
PHASES = {"solid": 1, "void": 0}


@dataclass(frozen=True)
class BurnResult:
    """Geodesic step counts from the lower face; ``UNBURNED`` where unreached."""

    distances: np.ndarray
    phase: str
    axis: int
    percolates: bool
    min_exit_distance: Optional[int]
    connectivity: str = CONNECTIVITY


def _phase_mask(ms: Microstructure, phase: str) -> np.ndarray:
    if phase not in PHASES:
        raise ValueError(f"phase must be 'solid' or 'void', got {phase!r}")
    return ms.occupancy == PHASES[phase]


def _check_axis(ndim: int, axis: int) -> None:
    if not 0 <= axis < ndim:
        raise ValueError(f"axis must be in [0, {ndim}), got {axis}")


def _face(shape, axis, last=False):
    index = [slice(None)] * len(shape)
    index[axis] = shape[axis] - 1 if last else 0
    return tuple(index)


def _bfs(mask: np.ndarray, seeds: np.ndarray) -> np.ndarray:
    """Level-synchronous breadth-first distances through ``mask`` from ``seeds``.

    Both arguments are boolean arrays of the same shape. Frontiers are held
    as flat C-order indices; neighbours that would cross the outer boundary
    are discarded rather than wrapped.
    """
    shape = mask.shape
    flat_mask = mask.ravel()
    dist = np.full(mask.size, UNBURNED, dtype=np.int64)
    strides = [int(np.prod(shape[a + 1:], dtype=np.int64)) for a in range(len(shape))]

    frontier = np.flatnonzero((seeds & mask).ravel())
    dist[frontier] = 0
    step = 0
    while frontier.size:
        step += 1
        candidates = []
        for axis, (n, stride) in enumerate(zip(shape, strides)):
            coord = (frontier // stride) % n
            candidates.append(frontier[coord > 0] - stride)
            candidates.append(frontier[coord < n - 1] + stride)
        nxt = np.concatenate(candidates)
        nxt = nxt[flat_mask[nxt] & (dist[nxt] == UNBURNED)]
        nxt = np.unique(nxt)
        dist[nxt] = step
        frontier = nxt
    return dist.reshape(shape)


def burn(ms: Microstructure, phase: str = "solid", axis: int = 0) -> BurnResult:
    """Burn ``phase`` from the lower face of ``axis`` towards the upper face."""
    _check_axis(ms.dimension, axis)
    mask = _phase_mask(ms, phase)
    seeds = np.zeros_like(mask)
    seeds[_face(mask.shape, axis)] = True
    dist = _bfs(mask, seeds)

    exit_face = dist[_face(mask.shape, axis, last=True)]
    reached = exit_face[exit_face != UNBURNED]
    if reached.size:
        return BurnResult(dist, phase, axis, True, int(reached.min()))
    return BurnResult(dist, phase, axis, False, None)


def percolates(ms: Microstructure, phase: str = "solid", axis: int = 0) -> bool:
    return burn(ms, phase, axis).percolates


def tortuosity(result: BurnResult, extents: Tuple[int, ...], axis: Optional[int] = None) -> float:
    """Cells on the shortest path divided by cells along the axis.

    The path of ``min_exit_distance`` steps visits one more cell than it has
    steps, so a straight column gives exactly 1.
    """
    if axis is None:
        axis = result.axis
    if not result.percolates:
        raise NoPercolationError(result.phase, result.axis)
    return (result.min_exit_distance + 1) / extents[axis]


def trim_to_percolating(ms: Microstructure, phase: str = "solid", axis: int = 0) -> Microstructure:
    """Reassign ``phase`` cells outside every spanning cluster to the other phase.

    A cell lies in a spanning cluster exactly when it can be burned from
    both the lower and the upper face, so two burns replace labelling.
    """
    _check_axis(ms.dimension, axis)
    mask = _phase_mask(ms, phase)
    lower = np.zeros_like(mask)
    lower[_face(mask.shape, axis)] = True
    upper = np.zeros_like(mask)
    upper[_face(mask.shape, axis, last=True)] = True

    from_lower = _bfs(mask, lower) != UNBURNED
    if not from_lower[_face(mask.shape, axis, last=True)].any():
        raise NoPercolationError(phase, axis)
    spanning = from_lower & (_bfs(mask, upper) != UNBURNED)

    occ = ms.occupancy.copy()
    occ[mask & ~spanning] = 1 - PHASES[phase]
    phi_hat = int(np.count_nonzero(occ)) / occ.size
    return replace(ms, occupancy=occ, measured_solid_fraction=phi_hat)
