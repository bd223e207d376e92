import json
import tempfile
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sdnlm import PolSARImage
from sdnlm.errors import CorruptHeader, NonFiniteValue, SizeMismatch
from sdnlm.io import (
    header_path,
    load_phantom,
    load_regions,
    phantom_from_json,
    read_phf,
    read_ppm,
    write_phf,
    write_ppm,
)
from sdnlm.phantom import bundled_covariances, simulate_phantom, stock_layout, stock_phantom
from sdnlm.wishart import ml_estimate

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)
rasters = st.tuples(st.integers(1, 6), st.integers(1, 6)).flatmap(
    lambda hw: arrays(np.float64, (hw[0], hw[1], 9), elements=finite))


@settings(max_examples=1000, deadline=None)
@given(data=rasters, looks=st.floats(0.5, 64.0))
def test_phf_roundtrip_fuzz(data, looks):
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "x.phf"
        write_phf(PolSARImage(data, looks), path)
        back = read_phf(path)
    assert back.data.tobytes() == data.tobytes()
    assert back.nominal_looks == looks


def test_phf_layout_on_disk(tmp_path):
    data = np.arange(2 * 3 * 9, dtype=float).reshape(2, 3, 9)
    path = tmp_path / "a.phf"
    write_phf(PolSARImage(data, 4.0), path)
    raw = path.read_bytes()
    assert len(raw) == 2 * 3 * 9 * 8
    assert np.array_equal(np.frombuffer(raw, "<f8"), data.ravel())
    header = json.loads(header_path(path).read_text())
    assert header == {
        "width": 3, "height": 2, "nominal_looks": 4.0, "dtype": "f64le",
        "layout": "c11,c22,c33,reC12,imC12,reC13,imC13,reC23,imC23",
    }
    assert header_path(path).name == "a.phf.json"


@pytest.fixture
def phf(tmp_path):
    path = tmp_path / "img.phf"
    write_phf(simulate_phantom(stock_phantom(8), seed=1), path)
    return path


def test_truncated_payload(phf):
    phf.write_bytes(phf.read_bytes()[:-8])
    with pytest.raises(SizeMismatch):
        read_phf(phf)


def test_extra_payload(phf):
    phf.write_bytes(phf.read_bytes() + b"\0" * 8)
    with pytest.raises(SizeMismatch):
        read_phf(phf)


@pytest.mark.parametrize("edit", [
    {"width": 0}, {"height": -1}, {"width": 2.5}, {"width": True}, {"nominal_looks": 0},
    {"dtype": "f32le"}, {"layout": "c11,c22"},
])
def test_bad_header(phf, edit):
    h = header_path(phf)
    header = json.loads(h.read_text())
    header.update(edit)
    h.write_text(json.dumps(header))
    with pytest.raises(CorruptHeader):
        read_phf(phf)


def test_missing_or_garbled_header(phf):
    header_path(phf).write_text("{not json")
    with pytest.raises(CorruptHeader):
        read_phf(phf)
    header_path(phf).unlink()
    with pytest.raises(CorruptHeader):
        read_phf(phf)


def test_non_finite(tmp_path, phf):
    img = read_phf(phf)
    img.data[1, 2, 3] = np.nan
    with pytest.raises(NonFiniteValue):
        write_phf(img, tmp_path / "bad.phf")
    raw = bytearray(phf.read_bytes())
    raw[:8] = np.array([np.inf], "<f8").tobytes()
    phf.write_bytes(bytes(raw))
    with pytest.raises(NonFiniteValue):
        read_phf(phf)


def test_ppm_roundtrip(tmp_path, rng):
    rgb = rng.integers(0, 256, size=(7, 11, 3), dtype=np.uint8)
    path = tmp_path / "a.ppm"
    write_ppm(rgb, path)
    assert path.read_bytes().startswith(b"P6\n11 7\n255\n")
    assert np.array_equal(read_ppm(path), rgb)


def test_stock_phantom_spec():
    spec = load_phantom("stock")
    assert spec.class_map.shape == (496, 496)
    assert set(np.unique(spec.class_map)) == set(range(1, 7))
    small = phantom_from_json({"layout": "stock", "size": 64, "looks": 4})
    assert np.array_equal(small.class_map, stock_layout(64))
    assert all(lk == 4 for _, lk in small.classes)


def test_custom_phantom_spec(tmp_path):
    obj = {
        "class_map": [[1, 1, 2], [2, 2, 1]],
        "classes": [
            {"c11": 2.0, "c22": 1.0, "c33": 3.0, "c13": [0.5, -0.25], "looks": 3},
            {"c11": 1.0, "c22": 1.0, "c33": 1.0, "scale": 1e-3},
        ],
    }
    path = tmp_path / "p.json"
    path.write_text(json.dumps(obj))
    spec = load_phantom(path)
    assert spec.classes[0][1] == 3 and spec.classes[1][1] == 1
    assert spec.classes[0][0][2, 0] == complex(0.5, 0.25)
    np.testing.assert_allclose(spec.classes[1][0], 1e-3 * np.eye(3))


@pytest.mark.parametrize("obj", [
    {"class_map": [[1, 3]], "classes": [{"c11": 1, "c22": 1, "c33": 1}]},
    {"class_map": [[1]], "classes": [{"c11": -1, "c22": 1, "c33": 1}]},
    {"classes": "bundled"},
])
def test_invalid_phantom_spec(obj):
    with pytest.raises(CorruptHeader):
        phantom_from_json(obj)


def test_bundled_matrices_are_hermitian_pd():
    mats = bundled_covariances()
    assert len(mats) == 6
    for m in mats:
        assert np.allclose(m, m.conj().T)
        assert np.linalg.eigvalsh(m).min() > 0


def test_simulation_deterministic_and_unbiased(classes):
    spec = phantom_from_json({"class_map": np.full((317, 317), 6).tolist(), "classes": "bundled"})
    a = simulate_phantom(spec, seed=5)
    assert a.data.tobytes() == simulate_phantom(spec, seed=5).data.tobytes()
    assert a.data.tobytes() != simulate_phantom(spec, seed=6).data.tobytes()
    mean = a.matrices().mean(axis=(0, 1))
    err = np.linalg.norm(mean - classes[5]) / np.linalg.norm(classes[5])
    assert err < 0.02
    assert a.nominal_looks == 1


def test_four_look_phantom_recovers_looks():
    spec = phantom_from_json({"class_map": np.full((100, 100), 2).tolist(), "looks": 4})
    img = simulate_phantom(spec, seed=3)
    assert img.nominal_looks == 4
    assert 3.8 <= ml_estimate(img.matrices().reshape(-1, 3, 3)).looks <= 4.2


def test_regions(tmp_path):
    path = tmp_path / "r.json"
    path.write_text(json.dumps({"regions": [{"label": "sea", "x": 1, "y": 2, "w": 3, "h": 4}]}))
    [(label, roi)] = load_regions(path)
    assert label == "sea" and (roi.x, roi.y, roi.w, roi.h) == (1, 2, 3, 4)
    path.write_text(json.dumps([{"x": 0, "y": 0, "w": 2, "h": 2}, {"x": 1, "y": 1, "w": 1, "h": 2}]))
    assert [lab for lab, _ in load_regions(path)] == ["0", "1"]
    path.write_text(json.dumps([{"x": 0, "y": 0, "w": 1}]))
    with pytest.raises(CorruptHeader):
        load_regions(path)
