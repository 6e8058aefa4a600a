"""Run configuration: a TOML file describing the optics, the target and the method matrix.

Lengths are numbers in millimetres or strings with a unit suffix
(``"532 nm"``, ``"3.74 um"``, ``"1.5 mm"``). See ``configs/`` for examples.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .field import OpticalConfig
from .fth import FTHSetup, fov_check
from .optim.spec import OptimizerSpec, method_matrix
from .volume import LightingParams

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["ConfigError", "RunConfig", "InputSpec", "parse_length", "load_config", "validate_config",
           "EMIT_CHOICES"]

EMIT_CHOICES = ("slices", "slice-previews", "rmse-curve-csv", "metrics-csv", "hologram-dump")
INPUT_KINDS = ("synthetic", "image", "slice-stack", "ply")

_UNITS = {"nm": 1e-6, "um": 1e-3, "µm": 1e-3, "mm": 1.0, "cm": 10.0, "m": 1e3}
_LENGTH = re.compile(r"^\s*([-+0-9.eE]+)\s*([a-zµ]*)\s*$")

_SECTIONS = {
    "optical": {"wavelength", "pixel_pitch", "nx", "ny", "pad_factor", "focal_length"},
    "input": {"kind", "path", "planes", "first_depth", "spacing", "voxel_dims", "depth_slices"},
    "lighting": {"source_intensity", "lambert_ratio", "light_direction"},
    "run": {"seed", "iterations", "learning_rate", "lbfgs_memory", "median_kernel", "filtering",
            "threads", "output_dir", "emit"},
    "fth": {"object_diameter", "reference_separation", "detector_pixel", "object_pixel", "distance",
            "samples"},
}


class ConfigError(ValueError):
    pass


def parse_length(value: Any, name: str = "length") -> float:
    """Length in mm from a bare number (mm) or a string with an nm/um/mm/cm/m suffix."""
    if isinstance(value, bool):
        raise ConfigError(f"{name}: expected a length, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _LENGTH.match(value)
        if m:
            unit = m.group(2) or "mm"
            if unit in _UNITS:
                try:
                    return float(m.group(1)) * _UNITS[unit]
                except ValueError:
                    pass
    raise ConfigError(f"{name}: cannot parse length {value!r} (use a number in mm or e.g. '532 nm')")


@dataclass(frozen=True)
class InputSpec:
    kind: str = "synthetic"
    path: Optional[Path] = None
    planes: int = 4
    first_depth: float = 1.0
    spacing: float = 0.5
    depth_slices: int = 16


@dataclass(frozen=True)
class RunConfig:
    optical: OpticalConfig
    input: InputSpec
    methods: tuple[OptimizerSpec, ...]
    output_dir: Path
    emit: tuple[str, ...] = ("slices", "rmse-curve-csv", "metrics-csv", "hologram-dump")
    filtering: tuple[bool, ...] = (False, True)
    median_kernel: int = 3
    lighting: LightingParams = field(default_factory=LightingParams)
    fth: Optional[FTHSetup] = None
    threads: int = 1
    source: Optional[Path] = None

    def cells(self) -> list[OptimizerSpec]:
        """Every method crossed with every filtering setting, in run order."""
        return [m.with_filter(self.median_kernel if on else None) for m in self.methods for on in self.filtering]


def _read(path: Path) -> dict:
    try:
        return tomllib.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror or exc})") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML ({exc})") from exc


def _methods(raw, common: dict, problems: list[str]) -> list[OptimizerSpec]:
    if raw in (None, "all"):
        return method_matrix(**common)
    if not isinstance(raw, list) or not raw:
        problems.append("methods: must be \"all\" or a non-empty array of {family, scheme, encoding} tables")
        return []
    specs = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict):
            problems.append(f"methods[{i}]: must be a table")
            continue
        unknown = set(entry) - {"family", "scheme", "encoding", "iterations", "learning_rate", "lbfgs_memory"}
        if unknown:
            problems.append(f"methods[{i}]: unknown keys {sorted(unknown)}")
        try:
            opts = dict(common)
            opts.update({k: entry[k] for k in ("iterations", "learning_rate", "lbfgs_memory") if k in entry})
            specs.append(OptimizerSpec(entry.get("family"), entry.get("scheme"), entry.get("encoding"), **opts))
        except (ValueError, TypeError) as exc:
            problems.append(f"methods[{i}]: {exc}")
    return specs


def _build(raw: dict, source: Optional[Path], problems: list[str], warnings: list[str]) -> Optional[RunConfig]:
    for section, value in raw.items():
        if section == "methods":
            continue
        if section not in _SECTIONS:
            problems.append(f"unknown section [{section}]")
        elif not isinstance(value, dict):
            problems.append(f"[{section}] must be a table")
        else:
            unknown = set(value) - _SECTIONS[section]
            if unknown:
                problems.append(f"[{section}]: unknown keys {sorted(unknown)}")

    base = source.parent if source else Path.cwd()
    opt = raw.get("optical", {}) if isinstance(raw.get("optical", {}), dict) else {}
    optical = None
    try:
        optical = OpticalConfig(
            parse_length(opt.get("wavelength", 532e-6), "optical.wavelength"),
            parse_length(opt.get("pixel_pitch", 3.74e-3), "optical.pixel_pitch"),
            int(opt.get("nx", 64)),
            int(opt.get("ny", opt.get("nx", 64))),
            int(opt.get("pad_factor", 2)),
        )
    except (ValueError, TypeError) as exc:
        problems.append(f"[optical]: {exc}")

    inp = raw.get("input", {}) if isinstance(raw.get("input", {}), dict) else {}
    input_spec = None
    try:
        kind = inp.get("kind", "synthetic")
        if kind not in INPUT_KINDS:
            raise ConfigError(f"kind must be one of {INPUT_KINDS}, got {kind!r}")
        path = inp.get("path")
        if kind != "synthetic" and not path:
            raise ConfigError(f"kind {kind!r} needs a path")
        resolved = (base / path) if path else None
        if resolved is not None and not resolved.exists():
            raise ConfigError(f"input path {resolved} does not exist")
        input_spec = InputSpec(
            kind,
            resolved,
            int(inp.get("planes", 4)),
            parse_length(inp.get("first_depth", 1.0), "input.first_depth"),
            parse_length(inp.get("spacing", 0.5), "input.spacing"),
            int(inp.get("depth_slices", 16)),
        )
        if input_spec.planes < 1:
            raise ConfigError("planes must be >= 1")
    except (ValueError, TypeError) as exc:
        problems.append(f"[input]: {exc}")

    lighting = LightingParams()
    light = raw.get("lighting", {}) if isinstance(raw.get("lighting", {}), dict) else {}
    try:
        lighting = LightingParams(
            float(light.get("source_intensity", 1.0)),
            float(light.get("lambert_ratio", 1.0)),
            tuple(light.get("light_direction", (0.0, 0.0, -1.0))),
        )
    except (ValueError, TypeError) as exc:
        problems.append(f"[lighting]: {exc}")

    run = raw.get("run", {}) if isinstance(raw.get("run", {}), dict) else {}
    kernel = run.get("median_kernel", 3)
    if not isinstance(kernel, int) or kernel < 3 or kernel % 2 == 0:
        problems.append(f"[run]: median_kernel must be an odd integer >= 3, got {kernel!r}")
        kernel = 3
    filtering_raw = run.get("filtering", "both")
    filtering = {"both": (False, True), "on": (True,), "off": (False,)}.get(filtering_raw)
    if filtering is None:
        problems.append(f"[run]: filtering must be 'both', 'on' or 'off', got {filtering_raw!r}")
        filtering = (False, True)
    emit = run.get("emit", ["slices", "rmse-curve-csv", "metrics-csv", "hologram-dump"])
    bad_emit = [e for e in emit if e not in EMIT_CHOICES] if isinstance(emit, list) else [emit]
    if bad_emit:
        problems.append(f"[run]: unknown emit entries {bad_emit}; choose from {list(EMIT_CHOICES)}")
    common = {}
    for key, cast in (("iterations", int), ("learning_rate", float), ("lbfgs_memory", int), ("seed", int)):
        if key in run:
            try:
                common[key] = cast(run[key])
            except (TypeError, ValueError):
                problems.append(f"[run]: {key} has invalid value {run[key]!r}")
    before = len(problems)
    methods = _methods(raw.get("methods"), common, problems)
    if not methods and len(problems) == before:
        problems.append("at least one method is required")

    fth = None
    if "fth" in raw and isinstance(raw["fth"], dict):
        f = raw["fth"]
        try:
            fth = FTHSetup(
                parse_length(f["object_diameter"], "fth.object_diameter"),
                parse_length(f["reference_separation"], "fth.reference_separation"),
                parse_length(f["detector_pixel"], "fth.detector_pixel"),
                parse_length(f.get("object_pixel", opt.get("pixel_pitch", 3.74e-3)), "fth.object_pixel"),
                parse_length(f["distance"], "fth.distance"),
                int(f.get("samples", opt.get("nx", 64))),
            )
        except KeyError as exc:
            problems.append(f"[fth]: missing key {exc.args[0]!r}")
        except (ValueError, TypeError) as exc:
            problems.append(f"[fth]: {exc}")
    if fth is not None and optical is not None:
        report = fov_check(fth, optical.wavelength_mm)
        if not report.sampling_ok:
            warnings.append(
                f"FOV: s0 = lambda*Z/Delta_X = {report.fov_s0:.6g} mm is not > 4D = {4 * fth.object_diameter:.6g} mm"
            )
        if not report.separation_ok:
            warnings.append(
                f"FOV: reference separation L = {fth.reference_separation:.6g} mm is not > 1.5D = "
                f"{1.5 * fth.object_diameter:.6g} mm"
            )

    if input_spec is not None and optical is not None and input_spec.kind == "synthetic" and optical.nx != optical.ny:
        problems.append("[input]: the synthetic target needs a square grid (nx == ny)")

    if problems or optical is None or input_spec is None:
        return None
    return RunConfig(
        optical=optical,
        input=input_spec,
        methods=tuple(methods),
        output_dir=base / run.get("output_dir", "output"),
        emit=tuple(emit),
        filtering=filtering,
        median_kernel=kernel,
        lighting=lighting,
        fth=fth,
        threads=int(run.get("threads", 1)),
        source=source,
    )


def load_config(path, overrides: Optional[dict] = None) -> RunConfig:
    """Parse and validate a config file; raise :class:`ConfigError` listing every problem."""
    path = Path(path)
    raw = _read(path)
    _apply_overrides(raw, overrides or {})
    problems: list[str] = []
    cfg = _build(raw, path, problems, [])
    if cfg is None:
        raise ConfigError(f"{path}: invalid config:\n  " + "\n  ".join(problems))
    return cfg


def _apply_overrides(raw: dict, overrides: dict) -> None:
    run = raw.setdefault("run", {})
    for key, value in overrides.items():
        if value is not None:
            run[key] = value


def validate_config(path) -> tuple[list[str], list[str]]:
    """Return ``(problems, warnings)`` for a config file without running anything."""
    path = Path(path)
    raw = _read(path)
    problems: list[str] = []
    warnings: list[str] = []
    _build(raw, path, problems, warnings)
    return problems, warnings
