"""Command-line driver: ``holosynth run|validate|reconstruct|metrics``."""

from __future__ import annotations

import argparse
import csv
import io
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config, parse_length, validate_config
from .field import LayerStack, OpticalConfig
from .formats import (
    atomic_write,
    dump_hologram,
    load_hologram,
    load_ply,
    load_slice_stack,
    read_image,
    write_pgm16,
    write_png8,
)
from .metrics import evaluate, mse, psnr_from_mse
from .optim import OptimizerSpec, optimize, reconstruct
from .synthetic import benchmark_target
from .volume import render_layers, voxelize

METRICS_HEADER = "# holosynth metrics v1"
COMPARISON_HEADER = "# holosynth comparison v1"
RMSE_HEADER = "# holosynth rmse-curve v1"
METRICS_COLUMNS = ["method", "family", "scheme", "encoding", "depth_count", "filtered", "mse", "rmse", "psnr"]


class StageError(Exception):
    def __init__(self, stage: str, path, message: str):
        self.stage, self.path = stage, path
        where = "" if path is None or message.startswith(f"{path}:") else f"{path}: "
        super().__init__(f"[{stage}] {where}{message}")


def _num(x: float) -> str:
    return repr(float(x))


def _csv(header: str, columns: Sequence[str], rows) -> bytes:
    buf = io.StringIO()
    buf.write(header + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue().encode()


def load_target(cfg: RunConfig) -> LayerStack:
    inp, optical = cfg.input, cfg.optical
    if inp.kind == "synthetic":
        return benchmark_target(optical.nx, inp.planes, inp.first_depth, inp.spacing)
    if inp.kind == "image":
        img = read_image(inp.path)
        if img.shape != optical.shape:
            raise ValueError(f"image is {img.shape[1]}x{img.shape[0]} but the SLM grid is {optical.nx}x{optical.ny}")
        return LayerStack(img[None], (inp.first_depth,))
    if inp.kind == "slice-stack":
        grid = load_slice_stack(inp.path)
    else:
        cloud = load_ply(inp.path)
        lo, hi = cloud.points.min(axis=0), cloud.points.max(axis=0)
        hi = np.where(hi > lo, hi, lo + 1.0)
        grid = voxelize(cloud, (optical.nx, optical.ny, inp.depth_slices), list(zip(lo, hi)))
    return render_layers(grid, cfg.lighting, inp.planes, optical, z_offset=inp.first_depth)


@dataclass
class CellResult:
    spec: OptimizerSpec
    stem: str
    mse: float
    rmse: float
    psnr: float
    seconds: float


def _cell_stem(spec: OptimizerSpec) -> str:
    return f"{spec.name}_{'filt' if spec.filtering else 'nofilt'}"


def _run_cell(cfg: RunConfig, target: LayerStack, spec: OptimizerSpec, out: Path) -> CellResult:
    stem = _cell_stem(spec)
    try:
        result = optimize(target, cfg.optical, spec)
    except Exception as exc:
        raise StageError("optimize", stem, str(exc)) from exc
    recon = np.stack(reconstruct(result.hologram, cfg.optical, target.depths, target))
    report = evaluate(recon, target.intensities, filtered=spec.filtering)
    path = out
    try:
        if "hologram-dump" in cfg.emit:
            path = out / f"{stem}.holo"
            dump_hologram(path, result.hologram)
        for j, plane in enumerate(recon):
            if "slices" in cfg.emit:
                path = out / f"{stem}_plane{j}.pgm"
                write_pgm16(path, plane)
            if "slice-previews" in cfg.emit:
                path = out / f"{stem}_plane{j}.png"
                write_png8(path, plane)
        if "rmse-curve-csv" in cfg.emit:
            path = out / f"{stem}_rmse.csv"
            rows = [(i + 1, _num(l), _num(r)) for i, (l, r) in enumerate(zip(result.trace.loss, result.trace.rmse))]
            atomic_write(path, _csv(RMSE_HEADER, ["iteration", "loss", "rmse"], rows))
    except OSError as exc:
        raise StageError("write", path, exc.strerror or str(exc)) from exc
    return CellResult(spec, stem, report.mse, report.rmse, report.psnr, float(sum(result.trace.seconds)))


def _check_writable(out: Path) -> None:
    try:
        out.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=out):
            pass
    except OSError as exc:
        raise StageError("setup", out, f"output directory is not writable ({exc.strerror or exc})") from exc


def run(cfg: RunConfig, log=print) -> list[CellResult]:
    """Run every method x filtering cell of ``cfg`` and write the artifacts."""
    out = Path(cfg.output_dir)
    _check_writable(out)
    try:
        target = load_target(cfg)
    except Exception as exc:
        raise StageError("load-target", cfg.input.path or "synthetic", str(exc)) from exc
    cells = cfg.cells()
    log(f"running {len(cells)} cells on {target.num_planes} planes, {cfg.optical.nx}x{cfg.optical.ny}")
    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            results = list(pool.map(lambda s: _run_cell(cfg, target, s, out), cells))
    else:
        results = [_run_cell(cfg, target, s, out) for s in cells]
    for r in results:
        log(f"  {r.stem:<22} PSNR {r.psnr:8.3f} dB  RMSE {r.rmse:.6f}  {r.seconds:.2f} s")

    def row(r: CellResult):
        s = r.spec
        return [s.name, s.family.value, s.scheme.value, s.encoding.value, target.num_planes,
                int(s.filtering), _num(r.mse), _num(r.rmse), _num(r.psnr)]

    stage_path = out
    try:
        if "metrics-csv" in cfg.emit:
            stage_path = out / "metrics.csv"
            atomic_write(stage_path, _csv(METRICS_HEADER, METRICS_COLUMNS, [row(r) for r in results]))
        ranked = sorted(results, key=lambda r: -r.psnr)
        stage_path = out / "comparison.csv"
        atomic_write(stage_path, _csv(COMPARISON_HEADER, ["rank", *METRICS_COLUMNS, "best"],
                                      [[i + 1, *row(r), int(i == 0)] for i, r in enumerate(ranked)]))
        # wall time is kept apart so the metrics file stays reproducible byte for byte
        stage_path = out / "timings.csv"
        atomic_write(stage_path, _csv("# holosynth timings v1", ["method", "filtered", "wall_time_s"],
                                      [[r.spec.name, int(r.spec.filtering), f"{r.seconds:.6f}"] for r in results]))
    except OSError as exc:
        raise StageError("write", stage_path, exc.strerror or str(exc)) from exc
    return results


def _cmd_run(args) -> int:
    overrides = {"seed": args.seed, "threads": args.threads}
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        raise StageError("config", args.config, str(exc)) from exc
    if args.output_dir is not None:
        cfg = replace(cfg, output_dir=Path(args.output_dir))
    results = run(cfg)
    best = max(results, key=lambda r: r.psnr)
    print(f"best: {best.stem} ({best.psnr:.3f} dB); outputs in {cfg.output_dir}")
    return 0


def _cmd_validate(args) -> int:
    try:
        problems, warnings = validate_config(args.config)
    except ConfigError as exc:
        raise StageError("validate", args.config, str(exc)) from exc
    for p in problems:
        print(f"problem: {p}")
    for w in warnings:
        print(f"warning: {w}")
    if not problems:
        print(f"{args.config}: ok" + (f" ({len(warnings)} warning(s))" if warnings else ""))
    return 1 if problems else 0


def _cmd_reconstruct(args) -> int:
    try:
        holo = load_hologram(args.dump)
    except (OSError, ValueError) as exc:
        raise StageError("load-hologram", args.dump, str(exc)) from exc
    h, w = holo.shape
    if args.config:
        try:
            optical = load_config(args.config).optical
        except ConfigError as exc:
            raise StageError("config", args.config, str(exc)) from exc
        optical = optical.replace(nx=w, ny=h)
    else:
        optical = OpticalConfig(parse_length(args.wavelength), parse_length(args.pitch), w, h, args.pad_factor)
    depths = [parse_length(d, "depth") for d in args.depths]
    try:
        planes = reconstruct(holo, optical, depths)
    except ValueError as exc:
        raise StageError("reconstruct", args.dump, str(exc)) from exc
    out = Path(args.output_dir or ".")
    _check_writable(out)
    stem = Path(args.dump).stem
    for j, plane in enumerate(planes):
        path = out / f"{stem}_z{j}.pgm"
        try:
            write_pgm16(path, plane)
        except OSError as exc:
            raise StageError("write", path, exc.strerror or str(exc)) from exc
        print(path)
    return 0


def _cmd_metrics(args) -> int:
    images = []
    for p in (args.a, args.b):
        try:
            images.append(read_image(p))
        except (OSError, ValueError) as exc:
            raise StageError("load-image", p, str(exc)) from exc
    a, b = images
    if a.shape != b.shape:
        raise StageError("metrics", args.b, f"shape {b.shape} differs from {args.a} {a.shape}")
    m = mse(a, b)
    print(f"mse,rmse,psnr\n{_num(m)},{_num(np.sqrt(m))},{_num(psnr_from_mse(m))}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="holosynth", description="Multi-plane hologram synthesis benchmark")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the method matrix described by a config file")
    p.add_argument("config")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--output-dir")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("validate", help="report config problems without running")
    p.add_argument("config")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("reconstruct", help="reconstruct a hologram dump at the given depths")
    p.add_argument("dump")
    p.add_argument("--depths", nargs="+", required=True, help="depths in mm or with units, e.g. '1.5 mm'")
    p.add_argument("--config", help="take wavelength, pitch and padding from this config")
    p.add_argument("--wavelength", default="532 nm")
    p.add_argument("--pitch", default="3.74 um")
    p.add_argument("--pad-factor", type=int, default=2)
    p.add_argument("--output-dir")
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("metrics", help="MSE, RMSE and PSNR between two grayscale images")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=_cmd_metrics)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"holosynth: error {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"holosynth: error [config] {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
