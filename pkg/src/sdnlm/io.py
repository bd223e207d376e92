"""PHF raster files, PPM export, and the JSON phantom / region formats.

A PHF image is two files: ``name.phf`` holds little-endian float64 values,
row-major, nine per pixel in ``LAYOUT`` order; ``name.phf.json`` holds the
header (width, height, nominal_looks, dtype, layout).
"""
import json
import math
from pathlib import Path

import numpy as np

from .errors import CorruptHeader, DomainError, NonFiniteValue, SizeMismatch
from .image import LAYOUT, PolSARImage
from .metrics import RegionOfInterest
from .phantom import PhantomSpec, bundled_covariances, stock_layout

DTYPE = "f64le"
LAYOUT_STR = ",".join(LAYOUT)


def header_path(path):
    return Path(str(path) + ".json")


def write_phf(image, path):
    path = Path(path)
    if not np.all(np.isfinite(image.data)):
        raise NonFiniteValue("image contains NaN or Inf")
    header = {
        "width": image.width,
        "height": image.height,
        "nominal_looks": float(image.nominal_looks),
        "dtype": DTYPE,
        "layout": LAYOUT_STR,
    }
    path.write_bytes(image.data.astype("<f8").tobytes())
    header_path(path).write_text(json.dumps(header, indent=2) + "\n")


def _read_header(path):
    try:
        header = json.loads(header_path(path).read_text())
    except FileNotFoundError:
        raise CorruptHeader(f"missing header {header_path(path)}") from None
    except json.JSONDecodeError as exc:
        raise CorruptHeader(f"unparseable header: {exc}") from None
    if not isinstance(header, dict):
        raise CorruptHeader("header must be a JSON object")
    for key in ("width", "height"):
        v = header.get(key)
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise CorruptHeader(f"{key} must be a positive integer, got {v!r}")
    looks = header.get("nominal_looks")
    if not isinstance(looks, (int, float)) or not math.isfinite(looks) or looks <= 0:
        raise CorruptHeader(f"nominal_looks must be a positive number, got {looks!r}")
    if header.get("dtype") != DTYPE:
        raise CorruptHeader(f"dtype must be {DTYPE!r}")
    if header.get("layout") != LAYOUT_STR:
        raise CorruptHeader(f"layout must be {LAYOUT_STR!r}")
    return header


def read_phf(path):
    path = Path(path)
    header = _read_header(path)
    w, h = header["width"], header["height"]
    payload = path.read_bytes()
    expected = w * h * 9 * 8
    if len(payload) != expected:
        raise SizeMismatch(f"payload has {len(payload)} bytes, header implies {expected}")
    data = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(h, w, 9)
    if not np.all(np.isfinite(data)):
        raise NonFiniteValue("payload contains NaN or Inf")
    return PolSARImage(data, float(header["nominal_looks"]))


def write_ppm(rgb, path):
    """Binary P6 PPM from an (height, width, 3) uint8 array."""
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    h, w = rgb.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())


def read_ppm(path):
    raw = Path(path).read_bytes()
    parts = raw.split(maxsplit=4)
    if parts[0] != b"P6" or int(parts[3]) != 255:
        raise DomainError("not an 8-bit P6 PPM")
    w, h = int(parts[1]), int(parts[2])
    return np.frombuffer(parts[4][: w * h * 3], dtype=np.uint8).reshape(h, w, 3)


def _matrix_from_json(entry):
    m = np.zeros((3, 3), dtype=np.complex128)
    m[0, 0], m[1, 1], m[2, 2] = entry["c11"], entry["c22"], entry["c33"]
    for (i, j), key in (((0, 1), "c12"), ((0, 2), "c13"), ((1, 2), "c23")):
        re, im = entry.get(key, (0.0, 0.0))
        m[i, j] = complex(re, im)
        m[j, i] = np.conj(m[i, j])
    return m * float(entry.get("scale", 1.0))


def phantom_from_json(obj):
    """Build a PhantomSpec from its JSON form.

    ``{"layout": "stock", "size": 496, "looks": 1}`` selects the procedural
    layout with the bundled class matrices. Otherwise ``class_map`` is a nested
    list of 1-based class indices and ``classes`` is either ``"bundled"`` or a
    list of ``{"c11", "c22", "c33", "c12": [re, im], ..., "looks", "scale"}``.
    """
    try:
        looks = obj.get("looks", 1)
        if obj.get("layout") == "stock":
            cmap = stock_layout(int(obj.get("size", 496)))
        else:
            cmap = np.asarray(obj["class_map"], dtype=np.int64)
        classes = obj.get("classes", "bundled")
        if classes == "bundled":
            pairs = [(s, looks) for s in bundled_covariances()]
        else:
            pairs = [(_matrix_from_json(c), c.get("looks", looks)) for c in classes]
        return PhantomSpec(cmap, pairs)
    except (KeyError, TypeError, ValueError, DomainError) as exc:
        raise CorruptHeader(f"invalid phantom spec: {exc}") from None


def load_phantom(path):
    if str(path) == "stock":
        return phantom_from_json({"layout": "stock"})
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise CorruptHeader(f"unparseable phantom spec: {exc}") from None
    return phantom_from_json(obj)


def load_regions(path):
    """Labelled regions from ``{"regions": [{"label", "x", "y", "w", "h"}, ...]}`` or a bare list."""
    try:
        obj = json.loads(Path(path).read_text())
        items = obj["regions"] if isinstance(obj, dict) else obj
        return [(str(r.get("label", i)), RegionOfInterest(int(r["x"]), int(r["y"]), int(r["w"]), int(r["h"])))
                for i, r in enumerate(items)]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError, DomainError) as exc:
        raise CorruptHeader(f"invalid region file: {exc}") from None
