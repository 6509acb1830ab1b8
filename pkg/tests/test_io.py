"""Image, field, config, and table serialization."""

import json
import math

import numpy as np
import pytest

from oam_tomo.config import ConfigError, RunConfig, config_from_dict, load_config, override
from oam_tomo.fields import default_grid, lg_field, render_state
from oam_tomo.imageio import (
    find_triplet,
    read_image,
    read_json,
    read_field,
    read_pgm,
    read_png,
    round_floats,
    triplet_paths,
    write_field,
    write_json,
    write_pgm,
    write_png,
    write_rows_csv,
    write_rows_json,
)
from oam_tomo.states import PoincareState


@pytest.fixture(scope="module")
def sample(grid256):
    grid = default_grid(n=128)
    return render_state(grid, PoincareState.from_degrees(70.0, 30.0))


def test_pgm_roundtrip(tmp_path, sample):
    path = tmp_path / "img.pgm"
    write_pgm(path, sample)
    back = read_pgm(path)
    assert back.grid == sample.grid
    # 16-bit quantization relative to peak
    scale = sample.pixels.max()
    np.testing.assert_allclose(back.pixels / back.pixels.max(), sample.pixels / scale, atol=1e-4)


def test_pgm_without_grid_comment(tmp_path):
    raw = b"P5\n4 4\n255\n" + bytes(range(16))
    path = tmp_path / "plain.pgm"
    path.write_bytes(raw)
    img = read_pgm(path)
    assert img.grid is None
    assert img.pixels.shape == (4, 4)
    assert img.pixels[0, 1] == 1


def test_png_roundtrip(tmp_path, sample):
    path = tmp_path / "img.png"
    write_png(path, sample)
    back = read_png(path)
    assert back.grid == sample.grid
    np.testing.assert_allclose(
        back.pixels / back.pixels.max(), sample.pixels / sample.pixels.max(), atol=1e-4
    )


def test_read_image_dispatch(tmp_path, sample):
    write_pgm(tmp_path / "a.pgm", sample)
    write_png(tmp_path / "a.png", sample)
    assert read_image(tmp_path / "a.pgm").pixels.shape == sample.pixels.shape
    assert read_image(tmp_path / "a.png").pixels.shape == sample.pixels.shape
    with pytest.raises(ValueError):
        read_image(tmp_path / "a.bmp")


def test_field_roundtrip(tmp_path):
    grid = default_grid(n=128)
    f = lg_field(grid, -1)
    path = tmp_path / "field.npy"
    write_field(path, f)
    back = read_field(path)
    assert back.grid == grid
    np.testing.assert_array_equal(back.values, f.values)


def test_write_json_deterministic(tmp_path):
    path_a = tmp_path / "a.json"
    path_b = tmp_path / "b.json"
    write_json(path_a, {"b": 1, "a": [1.0, 2.0]})
    write_json(path_b, {"a": [1.0, 2.0], "b": 1})
    assert path_a.read_bytes() == path_b.read_bytes()
    assert read_json(path_a) == {"a": [1.0, 2.0], "b": 1}


def test_round_floats():
    obj = {"x": 1.23456789, "y": [0.1000000004, {"z": 2.0}]}
    out = round_floats(obj)
    assert out == {"x": 1.234568, "y": [0.1, {"z": 2.0}]}


def test_rows_csv_degenerate_cell(tmp_path):
    rows = [
        {"point": "1", "d_phi_deg": None, "fidelity": 0.9999994},
        {"point": "2", "d_phi_deg": 0.25, "fidelity": 1.0},
    ]
    path = tmp_path / "t.csv"
    write_rows_csv(path, rows)
    text = path.read_text()
    lines = text.strip().split("\n")
    assert lines[0] == "point,d_phi_deg,fidelity"
    assert lines[1] == "1,degenerate,0.999999"
    assert lines[2] == "2,0.250000,1.000000"


def test_rows_json(tmp_path):
    rows = [{"a": 0.123456789}]
    path = tmp_path / "t.json"
    write_rows_json(path, rows)
    assert json.loads(path.read_text()) == [{"a": 0.123457}]


def test_triplet_paths_and_find(tmp_path, sample):
    paths = triplet_paths(tmp_path)
    assert [p.name for p in paths.values()] == [
        "state_direct.pgm",
        "state_mc00.pgm",
        "state_mc45.pgm",
    ]
    for p in paths.values():
        write_pgm(p, sample)
    # a PNG duplicate of one frame must not confuse discovery
    write_png(tmp_path / "state_direct.png", sample)
    found = find_triplet(tmp_path)
    assert [p.suffix for p in found.values()] == [".pgm", ".pgm", ".pgm"]

    with pytest.raises(FileNotFoundError):
        find_triplet(tmp_path / "nowhere")


def test_find_triplet_rejects_ambiguity(tmp_path, sample):
    for stem in ("runa", "runb"):
        for kind in ("direct", "mc00", "mc45"):
            write_pgm(tmp_path / f"{stem}_{kind}.pgm", sample)
    with pytest.raises(ValueError):
        find_triplet(tmp_path)


def test_config_defaults():
    cfg = RunConfig()
    assert cfg.pipeline == "abstract"
    assert not cfg.noisy
    assert cfg.membership_tol == pytest.approx(1e-6)
    noisy = override(cfg, noise_sigma_rel=0.05)
    assert noisy.noisy
    assert noisy.membership_tol == pytest.approx(math.radians(2.0))


def test_config_roundtrip_and_overrides():
    cfg = RunConfig()
    d = cfg.to_json_dict()
    back = config_from_dict(d)
    assert back == cfg
    assert override(cfg, seed=7).seed == 7
    # None overrides are ignored
    assert override(cfg, seed=None).seed == cfg.seed


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        config_from_dict({"typo_key": 1})
    with pytest.raises(ConfigError):
        config_from_dict({"grid": {"n": 128, "zoom": 2}})


def test_config_rejects_bad_values():
    with pytest.raises(ConfigError):
        config_from_dict({"pipeline": "quantum"})
    with pytest.raises(ConfigError):
        config_from_dict({"noise_sigma_rel": -0.1})
    with pytest.raises(ConfigError):
        config_from_dict({"seeds": 0})


def test_load_config(tmp_path):
    path = tmp_path / "cfg.json"
    write_json(path, {"grid": {"n": 128}, "seed": 3, "beta_step_deg": 2.0})
    cfg = load_config(path)
    assert cfg.grid.n == 128
    assert cfg.seed == 3
    assert cfg.beta_step == pytest.approx(math.radians(2.0))
    assert load_config(None) == RunConfig()
