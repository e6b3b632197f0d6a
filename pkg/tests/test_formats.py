"""Round trips of the raw binary blobs, PGM images, and CSV tables."""

import numpy as np
import pytest

from darkring import gaussian_beam, ring_phase_mask
from darkring.errors import ParameterError
from darkring.fields import default_grid
from darkring.formats import (read_csv, read_field, read_pgm16, read_volume,
                              write_csv, write_field, write_keyvalue,
                              write_pgm16, write_volume)
from darkring.propagation import IntensityVolume


def test_field_round_trip(tmp_path):
    grid = default_grid(n=128, extent=4e-3)
    beam = gaussian_beam(grid, 0.8e-3, 0.1, 779.24e-9)
    path = tmp_path / "beam.drf"
    write_field(path, beam)
    back = read_field(path)
    assert back.grid == beam.grid
    assert back.wavelength == beam.wavelength
    assert np.array_equal(back.amplitude, beam.amplitude)
    # header is exactly 32 bytes + payload
    assert path.stat().st_size == 32 + 128 * 128 * 16


def test_phase_round_trip(tmp_path):
    grid = default_grid(n=128, extent=4e-3)
    mask = ring_phase_mask(grid, 2, 0.6e-3)
    path = tmp_path / "mask.drf"
    write_field(path, mask, wavelength=779.24e-9)
    back = read_field(path)
    assert np.array_equal(back.phase, mask.phase)
    assert path.stat().st_size == 32 + 128 * 128 * 8


def test_field_magic_rejected(tmp_path):
    path = tmp_path / "bogus.drf"
    path.write_bytes(b"NOPE" + b"\0" * 60)
    with pytest.raises(ParameterError):
        read_field(path)


def test_volume_round_trip(tmp_path):
    rho = np.linspace(0, 3e-4, 40)
    z = np.linspace(-5e-3, 5e-3, 21)
    I = np.outer(np.exp(-rho / 1e-4), np.cos(z * 100) ** 2) * 1e5
    vol = IntensityVolume(rho=rho, z=z, intensity=I,
                          meta={"wavelength": 779e-9, "power": 0.15,
                                "azimuthal_order": 1})
    path = tmp_path / "vol.drv"
    write_volume(path, vol)
    back = read_volume(path)
    assert np.array_equal(back.rho, rho)
    assert np.array_equal(back.z, z)
    assert np.array_equal(back.intensity, I)
    assert back.meta["wavelength"] == pytest.approx(779e-9)


def test_pgm16_round_trip(tmp_path):
    img = np.arange(48, dtype=float).reshape(6, 8)
    path = tmp_path / "img.pgm"
    write_pgm16(path, img)
    back = read_pgm16(path)
    assert back.shape == (6, 8)
    assert back[0, 0] == 0
    assert back[-1, -1] == 65535
    # linear scaling in between
    assert back[0, 1] == pytest.approx(65535 / 47, abs=1.0)


def test_csv_round_trip_and_stability(tmp_path):
    hdr = ["a", "b", "label"]
    rows = [[1, 0.1234567890123, "x"], [2, 3.0, "y"]]
    p1 = tmp_path / "t1.csv"
    p2 = tmp_path / "t2.csv"
    write_csv(p1, hdr, rows)
    write_csv(p2, hdr, rows)
    assert p1.read_bytes() == p2.read_bytes()
    back_hdr, back_rows = read_csv(p1)
    assert back_hdr == hdr
    assert back_rows[0][1] == pytest.approx(0.1234567890123, rel=1e-12)
    assert back_rows[1][2] == "y"
    # RFC-4180 line endings
    assert b"\r\n" in p1.read_bytes()


def test_keyvalue_format(tmp_path):
    path = tmp_path / "report.txt"
    write_keyvalue(path, [("alpha", 1.5), ("n", 3), ("flag", True)])
    text = path.read_text()
    assert "alpha = 1.5" in text
    assert "n = 3" in text
    assert "flag = 1" in text
