"""File formats: 16-bit PGM/PNG images, raw complex field dumps, JSON/CSV.

Images carry their grid geometry in-band (PGM comment line) or in a JSON
sidecar (PNG, raw fields) so an image file round-trips to an analyzable
IntensityImage without extra flags. All writers are deterministic: fixed
float formatting, sorted keys, no timestamps.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .fields import ComplexField, GridSpec, IntensityImage

PGM_MAXVAL = 65535
_PGM_TAG = "oam-tomo"


def _grid_comment(grid: GridSpec | None) -> str:
    if grid is None:
        return ""
    return f"# {_PGM_TAG} {json.dumps(grid.to_json_dict(), sort_keys=True, separators=(',', ':'))}\n"


def write_pgm(path, img: IntensityImage) -> None:
    """Binary 16-bit PGM, intensity scaled to the full range; the grid rides
    in a comment line."""
    pix = img.pixels
    peak = float(pix.max())
    scale = PGM_MAXVAL / peak if peak > 0 else 0.0
    data = np.clip(pix * scale + 0.5, 0, PGM_MAXVAL).astype(">u2")
    h, w = pix.shape
    header = f"P5\n{_grid_comment(img.grid)}{w} {h}\n{PGM_MAXVAL}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(data.tobytes())


def read_pgm(path) -> IntensityImage:
    raw = Path(path).read_bytes()
    if not raw.startswith(b"P5"):
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    grid = None
    tokens: list[int] = []
    pos = 2
    while len(tokens) < 3:
        if pos >= len(raw):
            raise ValueError(f"{path}: truncated PGM header")
        ch = raw[pos : pos + 1]
        if ch == b"#":
            end = raw.index(b"\n", pos)
            comment = raw[pos + 1 : end].decode("ascii", "replace").strip()
            if comment.startswith(_PGM_TAG):
                grid = GridSpec.from_json_dict(json.loads(comment[len(_PGM_TAG) :]))
            pos = end + 1
        elif ch.isspace():
            pos += 1
        else:
            end = pos
            while end < len(raw) and not raw[end : end + 1].isspace():
                end += 1
            tokens.append(int(raw[pos:end]))
            pos = end
    pos += 1  # single whitespace after maxval
    w, h, maxval = tokens
    dtype = ">u2" if maxval > 255 else "u1"
    count = w * h
    pixels = np.frombuffer(raw, dtype=dtype, count=count, offset=pos).reshape(h, w)
    return IntensityImage(grid, pixels.astype(float))


def write_png(path, img: IntensityImage) -> None:
    """16-bit grayscale PNG plus a <path>.json sidecar holding the grid."""
    from PIL import Image

    pix = img.pixels
    peak = float(pix.max())
    scale = PGM_MAXVAL / peak if peak > 0 else 0.0
    data = np.clip(pix * scale + 0.5, 0, PGM_MAXVAL).astype(np.uint16)
    Image.fromarray(data).save(path)
    if img.grid is not None:
        write_json(str(path) + ".json", img.grid.to_json_dict())


def read_png(path) -> IntensityImage:
    from PIL import Image

    with Image.open(path) as im:
        pixels = np.asarray(im, dtype=float)
    sidecar = Path(str(path) + ".json")
    grid = GridSpec.from_json_dict(read_json(sidecar)) if sidecar.exists() else None
    return IntensityImage(grid, pixels)


def read_image(path) -> IntensityImage:
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        return read_pgm(path)
    if path.suffix.lower() == ".png":
        return read_png(path)
    raise ValueError(f"{path}: unsupported image format (use .pgm or .png)")


def write_field(path, field: ComplexField) -> None:
    """Raw little-endian interleaved float64 (re, im) pairs, row-major, with
    a <path>.json sidecar describing grid and layout."""
    Path(path).write_bytes(np.ascontiguousarray(field.values, dtype="<c16").tobytes())
    write_json(
        str(path) + ".json",
        {
            "grid": field.grid.to_json_dict(),
            "dtype": "complex128-le",
            "shape": list(field.values.shape),
        },
    )


def read_field(path) -> ComplexField:
    meta = read_json(str(path) + ".json")
    grid = GridSpec.from_json_dict(meta["grid"])
    shape = tuple(meta["shape"])
    values = np.frombuffer(Path(path).read_bytes(), dtype="<c16").reshape(shape)
    return ComplexField(grid, values.copy())


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def _fmt_cell(column: str, value) -> str:
    if value is None:
        return "degenerate" if column.startswith("d_phi") else ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def round_floats(obj, ndigits: int = 6):
    """Recursively round floats for stable, readable serialized results."""
    if isinstance(obj, float):
        return round(obj, ndigits)
    if isinstance(obj, dict):
        return {k: round_floats(v, ndigits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, ndigits) for v in obj]
    return obj


def write_rows_csv(path, rows, columns=None) -> None:
    rows = list(rows)
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt_cell(c, row.get(c)) for c in columns])
    Path(path).write_text(buf.getvalue())


def write_rows_json(path, rows) -> None:
    write_json(path, [round_floats(dict(r)) for r in rows])


TRIPLET_SUFFIXES = ("direct", "mc00", "mc45")


def triplet_paths(directory, stem: str = "state", ext: str = "pgm") -> dict[str, Path]:
    """Standard three-image file names; mcNN is the converter mount angle in
    degrees, half the sphere-rotation angle (mc45 = 90-degree converter)."""
    directory = Path(directory)
    return {s: directory / f"{stem}_{s}.{ext}" for s in TRIPLET_SUFFIXES}


def find_triplet(directory) -> dict[str, Path]:
    """Locate a *_direct/*_mc00/*_mc45 image triplet with a shared stem.

    A frame present as both PGM and PNG counts once (PGM preferred)."""
    directory = Path(directory)
    found: dict[str, Path] = {}
    for suffix in TRIPLET_SUFFIXES:
        matches = sorted(
            p for ext in ("pgm", "png") for p in directory.glob(f"*_{suffix}.{ext}")
        )
        stems = sorted({p.stem for p in matches})
        if not matches:
            raise FileNotFoundError(f"{directory}: no *_{suffix}.pgm or .png image found")
        if len(stems) > 1:
            raise ValueError(f"{directory}: multiple *_{suffix} images: {stems}")
        found[suffix] = matches[0]
    stems = {p.name.rsplit("_", 1)[0] for p in found.values()}
    if len(stems) > 1:
        raise ValueError(f"{directory}: triplet stems do not match: {sorted(stems)}")
    return found
