"""Command line interface: ``grfgen generate`` and ``grfgen analyze``.

Exit codes: 0 success, 2 configuration error, 3 generation error,
4 analysis error, 5 no percolation (for tortuosity or trimming).
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence

from . import __version__
from .analysis import (
    angular_average,
    directional_correlation,
    normalize_profile,
    specific_surface_area,
    two_point_correlation,
)
from .config import ConfigError, GeneratorConfig, GRFError, NoPercolationError
from .io import (
    EXTENSIONS,
    canonical_format,
    read_csv_sparse,
    read_grid,
    read_key_values,
    write_grid,
    write_key_values,
)
from .spectral import build_spectral_field, default_workers, evaluate
from .structure import Microstructure, threshold_double, threshold_single
from .topology import CONNECTIVITY, burn, tortuosity, trim_to_percolating

log = logging.getLogger("grfgen")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GENERATION = 3
EXIT_ANALYSIS = 4
EXIT_NO_PERCOLATION = 5

ANALYSES = ("correlation", "ssa", "tortuosity", "percolation", "trim")


def _parse_grid(value):
    if isinstance(value, int):
        return value
    if isinstance(value, (tuple, list)):
        return tuple(int(v) for v in value)
    parts = tuple(int(v) for v in str(value).split(","))
    # a single extent applies to every axis
    return parts[0] if len(parts) == 1 else parts


# config-file key -> (GeneratorConfig field, parser)
_KEYS = {
    "phi": ("solid_fraction", float),
    "mean_grains": ("mean_grains", float),
    "heterogeneity": ("heterogeneity", float),
    "anisotropy": ("anisotropy", float),
    "preferred": ("preferred_axis", str),
    "dim": ("dimension", int),
    "grid": ("grid", _parse_grid),
    "num_waves": ("num_waves", int),
    "cut": ("cut", str),
    "dist": ("distribution", str),
    "seed": ("seed", int),
}
_ALIASES = {
    "solid_fraction": "phi",
    "preferred_axis": "preferred",
    "dimension": "dim",
    "distribution": "dist",
    "N": "num_waves",
}
_REQUIRED = ("phi", "mean_grains", "heterogeneity")


def _canonical_key(key: str) -> str:
    key = key.strip().replace("-", "_")
    return _ALIASES.get(key, key)


def parse_config(path=None, overrides: Optional[Mapping[str, object]] = None) -> GeneratorConfig:
    """Build a validated config from a key=value file and/or overrides.

    Values in ``overrides`` win over the file. Unset optional keys fall back
    to the GeneratorConfig defaults (3-D, 1000 waves, gamma, single cut,
    isotropic, seed 0).
    """
    raw: Dict[str, object] = {}
    if path is not None:
        try:
            items = read_key_values(path)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        for key, value in items.items():
            raw[_canonical_key(key)] = value
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[_canonical_key(key)] = value

    unknown = sorted(set(raw) - set(_KEYS))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}", unknown[0])

    kwargs = {}
    for key, value in raw.items():
        name, parse = _KEYS[key]
        if isinstance(value, str) and value == "":
            continue
        try:
            kwargs[name] = parse(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key}: cannot parse {value!r}", key) from exc

    if kwargs.get("anisotropy", 1.0) < 1.0 and "preferred_axis" not in kwargs:
        raise ConfigError(
            "anisotropy < 1 requires preferred (horizontal or vertical)", "preferred"
        )
    missing = [k for k in _REQUIRED if _KEYS[k][0] not in kwargs]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}", missing[0])
    return GeneratorConfig(**kwargs)


def config_to_items(config: GeneratorConfig) -> Dict[str, object]:
    """Inverse of :func:`parse_config`, using config-file key names."""
    out = {}
    for key, (name, _) in _KEYS.items():
        out[key] = getattr(config, name)
    return out


def config_from_manifest(path) -> GeneratorConfig:
    """Recover the generator config recorded in a run manifest."""
    items = read_key_values(path)
    prefix = "config."
    return parse_config(
        overrides={k[len(prefix):]: v for k, v in items.items() if k.startswith(prefix)}
    )


class StageError(GRFError):
    def __init__(self, stage: str, exit_code: int, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.exit_code = exit_code
        self.cause = cause


@dataclass
class RunManifest:
    config: Optional[GeneratorConfig]
    solid_fraction: float
    analyses: List[str]
    outputs: Dict[str, str] = field(default_factory=dict)
    results: Dict[str, object] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)
    version: str = __version__
    path: Optional[Path] = None

    def items(self) -> Dict[str, object]:
        out: Dict[str, object] = {"tool_version": self.version}
        if self.config is not None:
            out["seed"] = self.config.seed
            for key, value in config_to_items(self.config).items():
                out[f"config.{key}"] = value
        out["phi_measured"] = repr(self.solid_fraction)
        out["analyses"] = self.analyses
        out["connectivity"] = CONNECTIVITY
        for key, value in self.results.items():
            out[f"result.{key}"] = value
        for key, value in self.outputs.items():
            out[f"output.{key}"] = value
        for key, value in self.timings.items():
            out[f"timing.{key}"] = f"{value:.6f}"
        return out

    def write(self, path) -> Path:
        self.path = write_key_values(self.items(), path)
        return self.path


class _Run:
    """Tracks written files so a failed run can remove them."""

    def __init__(self, out_dir: Path, fmt: str, suffix: str):
        self.out_dir = out_dir
        self.fmt = fmt
        self.suffix = suffix
        self.written: List[Path] = []
        self.timings: Dict[str, float] = {}

    def path(self, stem: str, ext: str) -> Path:
        return self.out_dir / f"{stem}{self.suffix}{ext}"

    def grid(self, stem: str, data, name: str, fmt: Optional[str] = None) -> Path:
        fmt = fmt or self.fmt
        p = write_grid(data, fmt, self.path(stem, EXTENSIONS[fmt]), name=name)
        self.written.append(p)
        return p

    def profile(self, stem: str, profile) -> Path:
        p = self.path(stem, ".csv")
        counts = profile.counts
        with open(p, "w") as fh:
            fh.write("lag,value,count\n")
            for i, (lag, value) in enumerate(zip(profile.lags, profile.values)):
                count = "" if counts is None else str(int(counts[i]))
                fh.write(f"{float(lag)!r},{float(value)!r},{count}\n")
        self.written.append(p)
        return p

    def stage(self, name: str, exit_code: int, fn):
        start = time.perf_counter()
        try:
            return fn()
        except NoPercolationError as exc:
            raise StageError(name, EXIT_NO_PERCOLATION, exc) from exc
        except Exception as exc:
            raise StageError(name, exit_code, exc) from exc
        finally:
            self.timings[name] = time.perf_counter() - start

    def cleanup(self):
        for p in self.written:
            try:
                p.unlink()
            except FileNotFoundError:
                pass
        self.written.clear()


def _check_analyses(analyses) -> None:
    unknown = set(analyses) - set(ANALYSES)
    if unknown:
        raise ConfigError(f"unknown analyses: {', '.join(sorted(unknown))}", "analyses")


def _analyze(run: _Run, ms: Microstructure, analyses, phase, axis, manifest: RunManifest):
    requested = set(analyses)
    phi = ms.measured_solid_fraction

    if requested & {"correlation", "ssa"}:
        def correlation():
            cmap = two_point_correlation(ms)
            angular = angular_average(cmap)
            manifest.outputs["profile_angular"] = str(run.profile("profile_angular_average", angular))
            if "correlation" in requested:
                profiles = [angular] + [
                    directional_correlation(cmap, a) for a in range(ms.dimension)
                ]
                for prof in profiles[1:]:
                    manifest.outputs[f"profile_{prof.kind}"] = str(
                        run.profile(f"profile_{prof.kind}", prof)
                    )
                if 0.0 < phi < 1.0:
                    for prof in profiles:
                        norm = normalize_profile(prof, phi)
                        manifest.outputs[f"profile_{norm.kind}"] = str(
                            run.profile(f"profile_{norm.kind}", norm)
                        )
            return angular

        angular = run.stage("correlation", EXIT_ANALYSIS, correlation)
        if "ssa" in requested:
            manifest.results["ssa"] = repr(
                run.stage("ssa", EXIT_ANALYSIS, lambda: specific_surface_area(angular, phi))
            )

    if requested & {"percolation", "tortuosity"}:
        result = run.stage("burn", EXIT_ANALYSIS, lambda: burn(ms, phase, axis))
        manifest.results[f"percolates.{phase}.axis{axis}"] = str(result.percolates).lower()
        if "tortuosity" in requested:
            tau = run.stage("tortuosity", EXIT_ANALYSIS, lambda: tortuosity(result, ms.extents))
            manifest.results[f"tortuosity.{phase}.axis{axis}"] = repr(tau)
            fmt = "raw_with_header" if run.fmt == "csv_sparse" else run.fmt
            manifest.outputs["burn_distance"] = str(
                run.grid(f"burn_{phase}_axis{axis}", result.distances, "burn_distance", fmt)
            )

    if "trim" in requested:
        trimmed = run.stage("trim", EXIT_ANALYSIS, lambda: trim_to_percolating(ms, phase, axis))
        manifest.results["phi_trimmed"] = repr(trimmed.measured_solid_fraction)
        manifest.outputs["trimmed"] = str(run.grid("trimmed", trimmed, "occupancy"))


def run_pipeline(
    config: GeneratorConfig,
    analyses: Sequence[str] = (),
    out_dir=".",
    fmt: str = "vtk",
    workers: Optional[int] = None,
    phase: str = "solid",
    axis: int = 0,
    suffix: str = "",
    save_field: bool = False,
) -> RunManifest:
    """Generate one structure, run the requested analyses, write outputs and manifest.

    On failure every file written by this run is removed and a
    :class:`StageError` naming the stage is raised.
    """
    _check_analyses(analyses)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    run = _Run(out_dir, canonical_format(fmt), suffix)
    try:
        def generate():
            grid = evaluate(build_spectral_field(config), config.extents, workers, config.length)
            threshold = threshold_single if config.cut == "single" else threshold_double
            return grid, threshold(grid, config.solid_fraction, config)

        grid, ms = run.stage("generate", EXIT_GENERATION, generate)
        manifest = RunManifest(config, ms.measured_solid_fraction, list(analyses))
        manifest.outputs["structure"] = str(run.grid("structure", ms, "occupancy"))
        if save_field:
            fmt_field = "raw_with_header" if run.fmt == "csv_sparse" else run.fmt
            manifest.outputs["field"] = str(run.grid("field", grid, "grf", fmt_field))
        del grid
        _analyze(run, ms, analyses, phase, axis, manifest)
        manifest.timings = run.timings
        manifest_path = run.path("manifest", ".txt")
        manifest.write(manifest_path)
        run.written.append(manifest_path)
        return manifest
    except BaseException:
        run.cleanup()
        raise


def analyze_file(
    path,
    analyses: Sequence[str],
    out_dir=".",
    fmt: str = "vtk",
    phase: str = "solid",
    axis: int = 0,
    extents: Optional[Sequence[int]] = None,
) -> RunManifest:
    """Run analyses on a structure stored in a grid file."""
    _check_analyses(analyses)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    run = _Run(out_dir, canonical_format(fmt), "")
    try:
        def load():
            if str(path).endswith(".csv"):
                if extents is None:
                    raise ConfigError("csv_sparse input needs --grid extents", "grid")
                arr = read_csv_sparse(path, extents)
            else:
                arr = read_grid(path)
            return Microstructure.from_array(arr)

        ms = run.stage("load", EXIT_ANALYSIS, load)
        manifest = RunManifest(None, ms.measured_solid_fraction, list(analyses))
        manifest.outputs["input"] = str(path)
        _analyze(run, ms, analyses, phase, axis, manifest)
        manifest.timings = run.timings
        manifest_path = run.path("manifest", ".txt")
        manifest.write(manifest_path)
        run.written.append(manifest_path)
        return manifest
    except BaseException:
        run.cleanup()
        raise


def _resolve_workers(requested: Optional[int]) -> int:
    cap = os.environ.get("GRFGEN_THREADS")
    workers = requested if requested is not None else default_workers()
    if cap:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError:
            pass
    return max(1, workers)


def _split(value: Optional[str]) -> List[str]:
    if not value:
        return []
    return [v.strip() for v in value.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grfgen", description="Two-phase microstructures from thresholded Gaussian random fields."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", default="vtk", help="vtk, raw or csv (default vtk)")
        p.add_argument("--out-dir", default=".", type=Path)
        p.add_argument("--analyses", default="", help="comma list of " + ", ".join(ANALYSES))
        p.add_argument("--phase", default="solid", choices=("solid", "void"))
        p.add_argument("--axis", default=0, type=int)

    gen = sub.add_parser("generate", help="generate structures")
    gen.add_argument("--config", type=Path, help="key=value config file")
    gen.add_argument("--from-manifest", type=Path, help="reuse the config of a previous run")
    gen.add_argument("--phi", type=float)
    gen.add_argument("--mean-grains", type=float)
    gen.add_argument("--heterogeneity", type=float)
    gen.add_argument("--anisotropy", type=float)
    gen.add_argument("--preferred", choices=("horizontal", "vertical"))
    gen.add_argument("--dim", type=int)
    gen.add_argument("--grid", help="points per axis, e.g. 256 or 128,128,64")
    gen.add_argument("--num-waves", type=int)
    gen.add_argument("--cut", choices=("single", "double"))
    gen.add_argument("--dist", choices=("normal", "gamma"))
    gen.add_argument("--seed", type=int)
    gen.add_argument("--count", type=int, default=1, help="ensemble size (seeds seed..seed+K-1)")
    gen.add_argument("--workers", type=int, help="evaluation threads (capped by GRFGEN_THREADS)")
    gen.add_argument("--save-field", action="store_true", help="also write the raw GRF")
    common(gen)

    ana = sub.add_parser("analyze", help="analyze a structure file")
    ana.add_argument("input", type=Path)
    ana.add_argument("--grid", help="extents, required for csv input")
    common(ana)
    return parser


def _cmd_generate(args) -> int:
    overrides = {
        key: getattr(args, key)
        for key in (
            "phi", "mean_grains", "heterogeneity", "anisotropy", "preferred",
            "dim", "grid", "num_waves", "cut", "dist", "seed",
        )
    }
    if args.from_manifest is not None:
        base = config_to_items(config_from_manifest(args.from_manifest))
        base.update({k: v for k, v in overrides.items() if v is not None})
        overrides = base
    config = parse_config(args.config, overrides)
    if args.count < 1:
        raise ConfigError(f"count must be >= 1, got {args.count}", "count")
    workers = _resolve_workers(args.workers)
    analyses = _split(args.analyses)
    for member in range(args.count):
        cfg = config.with_seed(config.seed + member)
        suffix = f"_seed{cfg.seed}" if args.count > 1 else ""
        manifest = run_pipeline(
            cfg, analyses, args.out_dir, args.format, workers, args.phase, args.axis,
            suffix, args.save_field,
        )
        log.info("seed %d: phi=%.4f -> %s", cfg.seed, manifest.solid_fraction, manifest.path)
    return EXIT_OK


def _cmd_analyze(args) -> int:
    extents = [int(v) for v in args.grid.split(",")] if args.grid else None
    manifest = analyze_file(
        args.input, _split(args.analyses), args.out_dir, args.format, args.phase, args.axis, extents
    )
    log.info("phi=%.4f -> %s", manifest.solid_fraction, manifest.path)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        canonical_format(args.format)
        if args.command == "generate":
            return _cmd_generate(args)
        return _cmd_analyze(args)
    except StageError as exc:
        if isinstance(exc.cause, ConfigError):
            print(f"grfgen: config error: {exc.cause}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"grfgen: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ConfigError, ValueError) as exc:
        print(f"grfgen: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
