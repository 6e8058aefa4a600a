"""File formats: PLY point clouds, PGM/PNG images, slice-stack manifests, hologram dumps."""

from __future__ import annotations

import os
import struct
import sys
import tempfile
from pathlib import Path
from typing import Union

import numpy as np

from .field import Hologram, HologramKind
from .volume import PointCloud, VoxelGrid

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

PathLike = Union[str, os.PathLike]

__all__ = [
    "FormatError",
    "load_ply",
    "write_ply",
    "read_image",
    "write_pgm16",
    "write_png8",
    "load_slice_stack",
    "dump_hologram",
    "load_hologram",
    "atomic_write",
    "HOLOGRAM_MAGIC",
    "HOLOGRAM_VERSION",
]


class FormatError(ValueError):
    """A malformed input file."""


def atomic_write(path: PathLike, data: bytes) -> None:
    """Write ``data`` to a temporary file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- PLY -------------------------------------------------------------------

_PLY_TYPES = {
    "char": "i1", "int8": "i1", "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2", "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4", "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4", "double": "f8", "float64": "f8",
}


def _parse_ply_header(raw: bytes):
    end = raw.find(b"end_header")
    if not raw.startswith(b"ply") or end < 0:
        raise FormatError("not a PLY file: missing 'ply' magic or 'end_header' at byte 0")
    nl = raw.find(b"\n", end)
    body_start = len(raw) if nl < 0 else nl + 1
    fmt = None
    elements = []
    offset = 0
    for line in raw[:end].split(b"\n"):
        words = line.decode("ascii", errors="replace").split()
        if not words or words[0] in ("ply", "comment", "obj_info"):
            pass
        elif words[0] == "format":
            if len(words) < 2 or words[1] not in ("ascii", "binary_little_endian"):
                raise FormatError(f"unsupported PLY format {' '.join(words[1:])!r} at byte {offset}")
            fmt = words[1]
        elif words[0] == "element":
            if len(words) != 3 or not words[2].isdigit():
                raise FormatError(f"malformed element line at byte {offset}")
            elements.append((words[1], int(words[2]), []))
        elif words[0] == "property":
            if not elements:
                raise FormatError(f"property before any element at byte {offset}")
            if len(words) == 5 and words[1] == "list":
                if words[2] not in _PLY_TYPES or words[3] not in _PLY_TYPES:
                    raise FormatError(f"unknown list property type at byte {offset}")
                elements[-1][2].append((words[4], ("list", _PLY_TYPES[words[2]], _PLY_TYPES[words[3]])))
            elif len(words) == 3 and words[1] in _PLY_TYPES:
                elements[-1][2].append((words[2], _PLY_TYPES[words[1]]))
            else:
                raise FormatError(f"malformed property line at byte {offset}")
        else:
            raise FormatError(f"unexpected header keyword {words[0]!r} at byte {offset}")
        offset += len(line) + 1
    if fmt is None:
        raise FormatError("PLY header has no format line")
    return fmt, elements, body_start


def _vertex_columns(props, table: dict[str, np.ndarray]) -> PointCloud:
    names = [p[0] for p in props]
    for axis in ("x", "y", "z"):
        if axis not in names:
            raise FormatError(f"vertex element lacks property {axis!r}")
    pts = np.stack([table["x"], table["y"], table["z"]], axis=1).astype(np.float64)
    kinds = dict(props)
    intensity = None
    if "intensity" in table:
        intensity = _unit_scale(table["intensity"], kinds["intensity"])
    elif "gray" in table or "grey" in table:
        key = "gray" if "gray" in table else "grey"
        intensity = _unit_scale(table[key], kinds[key])
    elif all(c in table for c in ("red", "green", "blue")):
        intensity = np.mean([_unit_scale(table[c], kinds[c]) for c in ("red", "green", "blue")], axis=0)
    return PointCloud(pts, intensity)


def _unit_scale(col: np.ndarray, kind: str) -> np.ndarray:
    if kind in ("u1", "i1"):
        return col.astype(np.float64) / 255.0
    if kind in ("u2", "i2"):
        return col.astype(np.float64) / 65535.0
    return col.astype(np.float64)


def load_ply(path: PathLike) -> PointCloud:
    """Read the vertex element of an ASCII or little-endian binary PLY file.

    Intensity comes from an ``intensity`` property, a ``gray`` property or the
    mean of ``red/green/blue``; integer channels are scaled to ``[0, 1]``.
    Without any of these every point has intensity 1.
    """
    raw = Path(path).read_bytes()
    fmt, elements, pos = _parse_ply_header(raw)
    for name, count, props in elements:
        if fmt == "ascii":
            table, pos = _read_ascii_element(raw, pos, count, props)
        else:
            table, pos = _read_binary_element(raw, pos, count, props)
        if name == "vertex":
            if count == 0:
                raise FormatError("PLY vertex element is empty")
            return _vertex_columns(props, table)
    raise FormatError("PLY file has no vertex element")


def _read_ascii_element(raw: bytes, pos: int, count: int, props):
    scalars = [name for name, kind in props if not isinstance(kind, tuple)]
    rows = []
    for _ in range(count):
        if pos >= len(raw):
            raise FormatError(f"truncated PLY body at byte {pos}")
        nl = raw.find(b"\n", pos)
        line_end = len(raw) if nl < 0 else nl
        words = raw[pos:line_end].split()
        row, w = [], 0
        try:
            for _, kind in props:
                if isinstance(kind, tuple):
                    w += 1 + int(words[w])
                else:
                    row.append(float(words[w]))
                    w += 1
        except IndexError:
            raise FormatError(f"too few values on PLY line at byte {pos}") from None
        except ValueError:
            raise FormatError(f"non-numeric PLY value at byte {pos}") from None
        if w > len(words):
            raise FormatError(f"too few values on PLY line at byte {pos}")
        rows.append(row)
        pos = line_end + 1
    arr = np.array(rows, dtype=np.float64).reshape(count, len(scalars))
    return {name: arr[:, i] for i, name in enumerate(scalars)}, pos


def _read_binary_element(raw: bytes, pos: int, count: int, props):
    if all(not isinstance(p[1], tuple) for p in props):
        dtype = np.dtype([(name, "<" + kind) for name, kind in props])
        need = dtype.itemsize * count
        if pos + need > len(raw):
            raise FormatError(f"truncated PLY body at byte {len(raw)}: need {need} bytes from byte {pos}")
        data = np.frombuffer(raw, dtype=dtype, count=count, offset=pos)
        return {name: data[name] for name, _ in props}, pos + need
    columns = {name: np.empty(count) for name, kind in props if not isinstance(kind, tuple)}
    for i in range(count):
        for name, kind in props:
            head = kind[1] if isinstance(kind, tuple) else kind
            size = np.dtype(head).itemsize
            if pos + size > len(raw):
                raise FormatError(f"truncated PLY body at byte {pos}")
            value = np.frombuffer(raw, dtype="<" + head, count=1, offset=pos)[0]
            pos += size
            if isinstance(kind, tuple):
                pos += int(value) * np.dtype(kind[2]).itemsize
            else:
                columns[name][i] = value
    if pos > len(raw):
        raise FormatError(f"truncated PLY body at byte {len(raw)}")
    return columns, pos


def write_ply(path: PathLike, cloud: PointCloud, binary: bool = False) -> None:
    """Write ``x y z intensity`` as double-precision vertex properties."""
    header = [
        "ply",
        f"format {'binary_little_endian' if binary else 'ascii'} 1.0",
        f"element vertex {len(cloud)}",
        "property double x",
        "property double y",
        "property double z",
        "property double intensity",
        "end_header",
    ]
    table = np.column_stack([cloud.points, cloud.intensities])
    head = ("\n".join(header) + "\n").encode("ascii")
    if binary:
        body = table.astype("<f8").tobytes()
    else:
        body = "".join(" ".join(repr(float(v)) for v in row) + "\n" for row in table).encode("ascii")
    atomic_write(path, head + body)


# --- images ----------------------------------------------------------------

def _read_pgm(raw: bytes, name: str) -> np.ndarray:
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":
            pos = raw.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError(f"{name}: truncated PGM header at byte {pos}")
        tokens.append(int(raw[start:pos]))
    width, height, maxval = tokens
    if raw[:2] == b"P2":
        values = np.array(raw[pos:].split(), dtype=np.int64)
        if values.size < width * height:
            raise FormatError(f"{name}: truncated PGM body")
        img = values[: width * height].reshape(height, width)
    else:
        pos += 1
        dtype = ">u2" if maxval > 255 else "u1"
        need = width * height * np.dtype(dtype).itemsize
        if pos + need > len(raw):
            raise FormatError(f"{name}: truncated PGM body at byte {len(raw)}")
        img = np.frombuffer(raw, dtype=dtype, count=width * height, offset=pos).reshape(height, width)
    return img.astype(np.float64) / (65535.0 if maxval > 255 else 255.0)


def read_image(path: PathLike) -> np.ndarray:
    """Grayscale image scaled to ``[0, 1]``: 8-bit by 1/255, 16-bit by 1/65535."""
    path = Path(path)
    raw = path.read_bytes()
    if raw[:2] in (b"P2", b"P5"):
        return _read_pgm(raw, str(path))
    from PIL import Image

    with Image.open(path) as im:
        if im.mode in ("I;16", "I;16B", "I"):
            return np.asarray(im, dtype=np.float64) / 65535.0
        return np.asarray(im.convert("L"), dtype=np.float64) / 255.0


def _quantize(image, levels: int) -> np.ndarray:
    img = np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0)
    return np.rint(img * levels)


def write_pgm16(path: PathLike, image) -> None:
    """Binary 16-bit PGM of an image in ``[0, 1]`` (values clipped)."""
    img = _quantize(image, 65535).astype(">u2")
    h, w = img.shape
    atomic_write(path, f"P5\n{w} {h}\n65535\n".encode("ascii") + img.tobytes())


def write_png8(path: PathLike, image) -> None:
    from io import BytesIO

    from PIL import Image

    buf = BytesIO()
    Image.fromarray(_quantize(image, 255).astype(np.uint8), mode="L").save(buf, format="PNG")
    atomic_write(path, buf.getvalue())


def load_slice_stack(path: PathLike) -> VoxelGrid:
    """Load a grayscale slice stack described by a TOML manifest.

    ``path`` is the manifest or a directory containing ``manifest.toml``::

        voxel_size_mm = 0.05        # or [dx, dy, dz]
        slices = ["s000.pgm", "s001.pgm"]   # in depth order, relative paths

    Voxel values are the scaled grayscale levels and opacity equals value.
    """
    path = Path(path)
    manifest = path / "manifest.toml" if path.is_dir() else path
    try:
        spec = tomllib.loads(manifest.read_text())
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise FormatError(f"{manifest}: cannot read manifest ({exc})") from exc
    names = spec.get("slices")
    if not isinstance(names, list) or not names:
        raise FormatError(f"{manifest}: 'slices' must be a non-empty list of file names")
    images = [read_image(manifest.parent / n) for n in names]
    shapes = [im.shape for im in images]
    bad = [f"{n} ({s[1]}x{s[0]})" for n, s in zip(names, shapes) if s != shapes[0]]
    if bad:
        raise FormatError(
            f"{manifest}: slice dimensions differ from {names[0]} ({shapes[0][1]}x{shapes[0][0]}): {', '.join(bad)}"
        )
    return VoxelGrid(np.stack(images), voxel_size=spec.get("voxel_size_mm", 1.0))


# --- hologram dump -----------------------------------------------------------

HOLOGRAM_MAGIC = b"HOLO"
HOLOGRAM_VERSION = 1
_HEADER = struct.Struct("<4sHIIB")
_KIND_CODES = {HologramKind.POH: 0, HologramKind.CH: 1}


def dump_hologram(path: PathLike, hologram: Hologram) -> None:
    """Header ``magic, version(u16), width(u32), height(u32), kind(u8: 0 POH, 1 CH)``,
    then row-major little-endian float64 ``(re, im)`` pairs."""
    h, w = hologram.shape
    header = _HEADER.pack(HOLOGRAM_MAGIC, HOLOGRAM_VERSION, w, h, _KIND_CODES[hologram.kind])
    body = np.ascontiguousarray(hologram.field, dtype="<c16").tobytes()
    atomic_write(path, header + body)


def load_hologram(path: PathLike) -> Hologram:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated hologram header ({len(raw)} bytes)")
    magic, version, w, h, kind = _HEADER.unpack_from(raw)
    if magic != HOLOGRAM_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != HOLOGRAM_VERSION:
        raise FormatError(f"{path}: unsupported hologram dump version {version}")
    codes = {v: k for k, v in _KIND_CODES.items()}
    if kind not in codes:
        raise FormatError(f"{path}: unknown hologram kind code {kind}")
    need = _HEADER.size + 16 * w * h
    if len(raw) != need:
        raise FormatError(f"{path}: expected {need} bytes, found {len(raw)}")
    data = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size).reshape(h, w)
    return Hologram(codes[kind], data.astype(np.complex128))
