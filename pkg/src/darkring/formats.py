"""On-disk formats: raw field/volume blobs, 16-bit PGM images, CSV tables.

Field files ("DRF1") carry a 32-byte little-endian header:
magic(4) | n int64 | pitch float64 | wavelength float64 | kind uint32
followed by row-major float64 data: (re, im) pairs for kind 0, a single
phase value per sample for kind 1.

Volume files ("DRV1") carry: magic(4) | n_rho uint32 | n_z uint32 |
wavelength float64 | power float64 | pad(4), then the rho axis, the z axis,
and the row-major intensity block, all float64.
"""

import struct

import numpy as np

from .errors import ParameterError
from .fields import ComplexField, GridSpec, PhaseMask
from .propagation import IntensityVolume

FIELD_MAGIC = b"DRF1"
VOLUME_MAGIC = b"DRV1"
KIND_COMPLEX = 0
KIND_PHASE = 1


def write_field(path, obj, wavelength: float | None = None):
    """Serialize a ComplexField or PhaseMask to the raw DRF1 format."""
    if isinstance(obj, ComplexField):
        kind, lam = KIND_COMPLEX, obj.wavelength
        data = np.empty((obj.grid.n, obj.grid.n, 2))
        data[:, :, 0] = obj.amplitude.real
        data[:, :, 1] = obj.amplitude.imag
    elif isinstance(obj, PhaseMask):
        kind, lam = KIND_PHASE, (wavelength or 0.0)
        data = obj.phase
    else:
        raise ParameterError(f"cannot serialize {type(obj).__name__}")
    header = struct.pack("<4sqddI", FIELD_MAGIC, obj.grid.n, obj.grid.pitch,
                         lam, kind)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.astype("<f8").tobytes())


def read_field(path):
    """Load a DRF1 file back into a ComplexField or PhaseMask."""
    with open(path, "rb") as fh:
        header = fh.read(32)
        magic, n, pitch, lam, kind = struct.unpack("<4sqddI", header)
        if magic != FIELD_MAGIC:
            raise ParameterError(f"{path}: not a DRF1 field file")
        grid = GridSpec(n=n, pitch=pitch)
        if kind == KIND_COMPLEX:
            raw = np.frombuffer(fh.read(), dtype="<f8").reshape(n, n, 2)
            return ComplexField(grid, raw[:, :, 0] + 1j * raw[:, :, 1], lam)
        if kind == KIND_PHASE:
            raw = np.frombuffer(fh.read(), dtype="<f8").reshape(n, n)
            return PhaseMask(grid, raw.copy())
    raise ParameterError(f"{path}: unknown field kind {kind}")


def write_volume(path, volume: IntensityVolume):
    header = struct.pack("<4sIIdd4x", VOLUME_MAGIC, len(volume.rho),
                         len(volume.z), float(volume.meta.get("wavelength", 0.0)),
                         float(volume.meta.get("power", 0.0)))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(volume.rho.astype("<f8").tobytes())
        fh.write(volume.z.astype("<f8").tobytes())
        fh.write(volume.intensity.astype("<f8").tobytes())


def read_volume(path) -> IntensityVolume:
    with open(path, "rb") as fh:
        magic, n_rho, n_z, lam, power = struct.unpack("<4sIIdd4x", fh.read(32))
        if magic != VOLUME_MAGIC:
            raise ParameterError(f"{path}: not a DRV1 volume file")
        rho = np.frombuffer(fh.read(8 * n_rho), dtype="<f8").copy()
        z = np.frombuffer(fh.read(8 * n_z), dtype="<f8").copy()
        I = np.frombuffer(fh.read(8 * n_rho * n_z), dtype="<f8").reshape(n_rho, n_z).copy()
    return IntensityVolume(rho=rho, z=z, intensity=I,
                           meta={"wavelength": lam, "power": power,
                                 "azimuthal_order": 0})


def write_pgm16(path, array: np.ndarray, vmin: float | None = None,
                vmax: float | None = None):
    """Write a 2D array as binary 16-bit PGM (P5), linearly scaled."""
    a = np.asarray(array, dtype=float)
    if a.ndim != 2:
        raise ParameterError("PGM export needs a 2D array")
    lo = float(a.min()) if vmin is None else vmin
    hi = float(a.max()) if vmax is None else vmax
    span = hi - lo if hi > lo else 1.0
    scaled = np.clip((a - lo) / span, 0.0, 1.0)
    pixels = (scaled * 65535.0 + 0.5).astype(">u2")
    with open(path, "wb") as fh:
        fh.write(f"P5\n{a.shape[1]} {a.shape[0]}\n65535\n".encode("ascii"))
        fh.write(pixels.tobytes())


def read_pgm16(path) -> np.ndarray:
    with open(path, "rb") as fh:
        if fh.readline().strip() != b"P5":
            raise ParameterError(f"{path}: not a binary PGM")
        dims = fh.readline().split()
        width, height = int(dims[0]), int(dims[1])
        maxval = int(fh.readline())
        dtype = ">u2" if maxval > 255 else "u1"
        return np.frombuffer(fh.read(), dtype=dtype).reshape(height, width).copy()


def format_value(v) -> str:
    """Stable, locale-free cell formatting ('.' decimal separator)."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    return str(v)


def write_csv(path, header, rows):
    """RFC-4180-style CSV with CRLF endings and deterministic formatting."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\r\n")
        for row in rows:
            fh.write(",".join(format_value(v) for v in row) + "\r\n")


def read_csv(path):
    """Header list and float-coerced rows (strings kept where not numeric)."""
    with open(path, "r", newline="") as fh:
        lines = [ln.rstrip("\r\n") for ln in fh if ln.strip()]
    if not lines:
        raise ParameterError(f"{path}: empty CSV")
    header = lines[0].split(",")
    rows = []
    for ln in lines[1:]:
        cells = []
        for cell in ln.split(","):
            try:
                cells.append(float(cell))
            except ValueError:
                cells.append(cell)
        rows.append(cells)
    return header, rows


def write_keyvalue(path, rows):
    """Flat key = value text block."""
    with open(path, "w") as fh:
        for key, value in rows:
            fh.write(f"{key} = {format_value(value)}\n")
