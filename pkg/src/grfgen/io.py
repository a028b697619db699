"""Grid file formats and the key=value run manifest.

Three grid formats are supported, all storing values x-fastest:

``vtk_legacy_structured_points``
    ASCII legacy VTK (readable by ParaView, VisIt, pyvista).
``raw_with_header``
    One text line ``dims=<nx,ny[,nz]> type=<u8|f64> order=x-fastest``
    followed by the little-endian binary payload.
``csv_sparse``
    ``i,j[,k]`` rows listing the solid cells of a binary grid.
"""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Dict, Iterable, Mapping, Tuple, Union

import numpy as np

from .spectral import ScalarGrid
from .structure import Microstructure

__all__ = [
    "FORMATS",
    "EXTENSIONS",
    "canonical_format",
    "write_grid",
    "read_grid",
    "read_csv_sparse",
    "write_key_values",
    "read_key_values",
]

FORMATS = ("vtk_legacy_structured_points", "raw_with_header", "csv_sparse")
_ALIASES = {"vtk": FORMATS[0], "raw": FORMATS[1], "csv": FORMATS[2]}
EXTENSIONS = {FORMATS[0]: ".vtk", FORMATS[1]: ".raw", FORMATS[2]: ".csv"}

_VTK_TYPES = {"u8": "unsigned_char", "i64": "int", "f64": "double"}


def canonical_format(name: str) -> str:
    fmt = _ALIASES.get(name, name)
    if fmt not in FORMATS:
        raise ValueError(f"unknown grid format {name!r}; expected one of {FORMATS}")
    return fmt


def _as_array(data) -> Tuple[np.ndarray, str]:
    if isinstance(data, Microstructure):
        return data.occupancy, "u8"
    if isinstance(data, ScalarGrid):
        return data.values.astype(np.float64, copy=False), "f64"
    arr = np.asarray(data)
    if arr.dtype == np.uint8 or arr.dtype == bool:
        return arr.astype(np.uint8), "u8"
    if np.issubdtype(arr.dtype, np.integer):
        return arr.astype(np.int64), "i64"
    return arr.astype(np.float64), "f64"


def write_grid(data, fmt: str, path, name: str = "occupancy") -> Path:
    """Write a Microstructure, ScalarGrid or array to ``path``.

    Integer arrays (burn distances) are stored as f64 in the raw format.
    """
    fmt = canonical_format(fmt)
    arr, kind = _as_array(data)
    if arr.ndim not in (2, 3):
        raise ValueError(f"grids must be 2-D or 3-D, got {arr.ndim}-D")
    path = Path(path)
    if fmt == "vtk_legacy_structured_points":
        _write_vtk(arr, kind, path, name)
    elif fmt == "raw_with_header":
        _write_raw(arr, kind, path)
    else:
        if kind != "u8":
            raise ValueError("csv_sparse stores binary grids only")
        _write_csv_sparse(arr, path)
    return path


def _write_vtk(arr, kind, path, name):
    dims = list(arr.shape) + [1] * (3 - arr.ndim)
    spacing = [1.0 / n for n in arr.shape]
    spacing += [spacing[0]] * (3 - arr.ndim)
    flat = arr.ravel(order="F")
    header = (
        "# vtk DataFile Version 3.0\n"
        f"{name}\n"
        "ASCII\n"
        "DATASET STRUCTURED_POINTS\n"
        f"DIMENSIONS {dims[0]} {dims[1]} {dims[2]}\n"
        "ORIGIN 0 0 0\n"
        f"SPACING {' '.join(repr(s) for s in spacing)}\n"
        f"POINT_DATA {flat.size}\n"
        f"SCALARS {name} {_VTK_TYPES[kind]} 1\n"
        "LOOKUP_TABLE default\n"
    )
    values = flat.reshape(-1, arr.shape[0])
    fmt = "%.17g" if kind == "f64" else "%d"
    with open(path, "w", newline="\n") as fh:
        fh.write(header)
        np.savetxt(fh, values, fmt=fmt, delimiter=" ")


def _write_raw(arr, kind, path):
    dtype = "<u1" if kind == "u8" else "<f8"
    type_name = "u8" if kind == "u8" else "f64"
    dims = ",".join(str(n) for n in arr.shape)
    with open(path, "wb") as fh:
        fh.write(f"dims={dims} type={type_name} order=x-fastest\n".encode("ascii"))
        fh.write(arr.astype(dtype).ravel(order="F").tobytes())


def _write_csv_sparse(arr, path):
    labels = ["i", "j", "k"][: arr.ndim]
    # x-fastest ordering of the solid cells
    idx = np.argwhere(arr.transpose() != 0)[:, ::-1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(labels)
        writer.writerows(idx.tolist())


def read_grid(path) -> np.ndarray:
    """Read a vtk or raw grid written by :func:`write_grid`, indexed ``[ix, iy(, iz)]``."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(5)
    if head.startswith(b"# vtk"):
        return _read_vtk(path)
    if head.startswith(b"dims="):
        return _read_raw(path)
    raise ValueError(f"{path}: not a vtk or raw grid file (csv_sparse needs read_csv_sparse)")


def _read_raw(path):
    data = Path(path).read_bytes()
    newline = data.index(b"\n")
    fields = dict(item.split("=", 1) for item in data[:newline].decode("ascii").split())
    dims = tuple(int(n) for n in fields["dims"].split(","))
    if fields.get("order", "x-fastest") != "x-fastest":
        raise ValueError(f"{path}: unsupported order {fields['order']!r}")
    dtype = {"u8": "<u1", "f64": "<f8"}[fields["type"]]
    flat = np.frombuffer(data[newline + 1:], dtype=dtype)
    if flat.size != int(np.prod(dims)):
        raise ValueError(f"{path}: payload has {flat.size} values, header says {dims}")
    arr = flat.reshape(dims, order="F")
    return arr.astype(np.uint8) if dtype == "<u1" else arr.astype(np.float64)


def _read_vtk(path):
    with open(path) as fh:
        lines = [fh.readline() for _ in range(10)]
        body = fh.read()
    dims = [int(v) for v in lines[4].split()[1:4]]
    vtk_type = lines[8].split()[2]
    dtype = {"unsigned_char": np.uint8, "int": np.int64, "double": np.float64}[vtk_type]
    flat = np.array(body.split(), dtype=np.float64).astype(dtype)
    arr = flat.reshape(dims, order="F")
    if dims[2] == 1:
        arr = arr[:, :, 0]
    return arr


def read_csv_sparse(path, extents: Iterable[int]) -> np.ndarray:
    """Rebuild a binary grid of the given extents from a csv_sparse file."""
    arr = np.zeros(tuple(extents), dtype=np.uint8)
    idx = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
    if idx.size:
        arr[tuple(idx.T)] = 1
    return arr


def write_key_values(items: Mapping[str, object], path) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        for key, value in items.items():
            if isinstance(value, (list, tuple)):
                value = ",".join(str(v) for v in value)
            elif value is None:
                value = ""
            fh.write(f"{key}={value}\n")
    return path


def read_key_values(path) -> Dict[str, str]:
    """Parse ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    out: Dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out
