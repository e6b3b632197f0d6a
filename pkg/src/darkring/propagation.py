"""Scalar free-space propagation and focal-volume construction.

Free space uses the exact angular-spectrum transfer function (band-limited
per Matsushima's rule to suppress wraparound at long throws). The jump from
the millimeter-scale modulator plane to the micron-scale focus is a single
scaled Fourier transform on a zero-padded grid, which sets the focal pitch
to lambda*f/(N*pitch_in) without ever holding both scales at one pitch.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import ParameterError, SamplingError
from .fields import ComplexField, GridSpec

TWO_PI = 2.0 * np.pi


@dataclass
class IntensityVolume:
    """Azimuthally reduced intensity map I(rho, z) around the focus."""

    rho: np.ndarray            # m, uniform from 0
    z: np.ndarray              # m, uniform, centered on the focal plane
    intensity: np.ndarray      # W/m^2, shape (n_rho, n_z)
    meta: dict = dc_field(default_factory=dict)

    @property
    def symmetric_source(self) -> bool:
        return bool(self.meta.get("azimuthal_order") is not None)

    def plane(self, z_value: float) -> np.ndarray:
        j = int(np.argmin(np.abs(self.z - z_value)))
        return self.intensity[:, j]


def _transfer_function(n: int, pitch: float, wavelength: float,
                       dz: float) -> np.ndarray:
    fx = np.fft.fftfreq(n, d=pitch)
    fx2 = fx ** 2
    fsq = fx2[None, :] + fx2[:, None]
    arg = 1.0 / wavelength ** 2 - fsq
    kz = TWO_PI * np.sqrt(np.maximum(arg, 0.0))
    H = np.exp(1j * kz * dz)
    H[arg < 0] = 0.0          # evanescent components do not reach the far plane
    if dz != 0.0:
        # band limit against wraparound of steep plane waves (finite grid)
        L = n * pitch
        f_max = 1.0 / (wavelength * np.sqrt(1.0 + (2.0 * dz / L) ** 2))
        H[fsq > f_max ** 2] = 0.0
    return H


def _nyquist_ring_energy(spectrum: np.ndarray) -> float:
    """Fraction of spectral energy in the outermost 2% frequency annulus."""
    n = spectrum.shape[0]
    fx = np.fft.fftfreq(n)
    fsq = fx[None, :] ** 2 + fx[:, None] ** 2
    ring = fsq >= (0.49 ** 2)
    total = float(np.sum(np.abs(spectrum) ** 2))
    if total == 0:
        return 0.0
    return float(np.sum(np.abs(spectrum[ring]) ** 2)) / total


def angular_spectrum(field: ComplexField, dz: float) -> ComplexField:
    """Propagate a field by dz (either sign) through free space.

    Raises SamplingError when the field carries significant energy at the
    Nyquist ring, which would alias under the transfer function.
    """
    if dz == 0.0:
        return ComplexField(field.grid, field.amplitude.copy(), field.wavelength,
                            azimuthal_order=field.azimuthal_order)
    spec = np.fft.fft2(field.amplitude)
    ring = _nyquist_ring_energy(spec)
    if ring > 1e-6:
        raise SamplingError(
            f"field is not band-limited on its grid: Nyquist-ring energy "
            f"fraction {ring:.2e} > 1e-6")
    H = _transfer_function(field.grid.n, field.grid.pitch, field.wavelength, dz)
    out = np.fft.ifft2(spec * H)
    return ComplexField(field.grid, out, field.wavelength,
                        azimuthal_order=field.azimuthal_order)


def to_focal_region(field: ComplexField, f: float, pad_factor: int = 8,
                    crop: int | None = None) -> ComplexField:
    """Field in the back focal plane of an ideal lens of focal length f.

    One scaled transform: the input is zero-padded to N = pad_factor*n and
    Fourier transformed, giving output pitch lambda*f/(N*pitch_in). The
    result can be cropped to its central ``crop`` samples; the discarded
    frame carries only the far diffraction tails.
    """
    if f <= 0:
        raise ParameterError(f"focal length must be positive, got {f}")
    if pad_factor < 1 or (pad_factor & (pad_factor - 1)) != 0:
        raise ParameterError("pad_factor must be a power of two >= 1")
    n = field.grid.n
    N = n * pad_factor
    lam = field.wavelength
    padded = np.zeros((N, N), dtype=np.complex128)
    lo = (N - n) // 2
    padded[lo:lo + n, lo:lo + n] = field.amplitude
    F = np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(padded)))
    F *= field.grid.pitch ** 2 / (lam * f)   # scaled-transform amplitude
    pitch_out = lam * f / (N * field.grid.pitch)
    if crop is not None:
        if crop > N:
            raise ParameterError(f"crop {crop} exceeds transform size {N}")
        lo = (N - crop) // 2
        F = F[lo:lo + crop, lo:lo + crop].copy()
        N = crop
    out_grid = GridSpec(n=N, pitch=pitch_out)
    return ComplexField(out_grid, F, lam, azimuthal_order=field.azimuthal_order)


def azimuthal_average(intensity: np.ndarray, pitch: float, n_rho: int,
                      rho_max: float, n_theta: int = 256) -> tuple:
    """Reduce a centered 2D intensity map to I(rho) by bilinear ring sampling."""
    n = intensity.shape[0]
    rho = np.linspace(0.0, rho_max, n_rho)
    theta = np.linspace(0.0, TWO_PI, n_theta, endpoint=False)
    xq = rho[:, None] * np.cos(theta)[None, :] / pitch + n // 2
    yq = rho[:, None] * np.sin(theta)[None, :] / pitch + n // 2
    if rho_max / pitch + n // 2 >= n - 1:
        raise ParameterError(
            f"rho_max {rho_max * 1e3:.2f} mm reaches outside the grid")
    x0 = np.floor(xq).astype(np.intp)
    y0 = np.floor(yq).astype(np.intp)
    wx = xq - x0
    wy = yq - y0
    v = (intensity[y0, x0] * (1 - wx) * (1 - wy)
         + intensity[y0, x0 + 1] * wx * (1 - wy)
         + intensity[y0 + 1, x0] * (1 - wx) * wy
         + intensity[y0 + 1, x0 + 1] * wx * wy)
    return rho, v.mean(axis=1)


def ring_intensity_stats(field: ComplexField, r: float, n_theta: int = 256):
    """(mean, variance) of |E|^2 sampled on the circle of radius r."""
    n = field.grid.n
    theta = np.linspace(0.0, TWO_PI, n_theta, endpoint=False)
    xq = r * np.cos(theta) / field.grid.pitch + n // 2
    yq = r * np.sin(theta) / field.grid.pitch + n // 2
    x0 = np.floor(xq).astype(np.intp)
    y0 = np.floor(yq).astype(np.intp)
    wx = xq - x0
    wy = yq - y0
    I = field.intensity()
    v = (I[y0, x0] * (1 - wx) * (1 - wy) + I[y0, x0 + 1] * wx * (1 - wy)
         + I[y0 + 1, x0] * (1 - wx) * wy + I[y0 + 1, x0 + 1] * wx * wy)
    return float(v.mean()), float(v.var())


def focus_scan(field: ComplexField, f: float, z_span: float = 20e-3,
               n_planes: int = 201, pad_factor: int = 8, crop: int = 512,
               n_rho: int = 512, rho_max: float = 0.32e-3,
               n_theta: int = 256, meta: dict | None = None) -> IntensityVolume:
    """Propagate through the lens focus and reduce each plane to I(rho, z).

    The focal field is computed once by the scaled transform, cropped to the
    physically occupied center, then stepped to each z plane with the
    angular-spectrum kernel.
    """
    if n_planes < 11 or n_planes % 2 == 0:
        raise ParameterError(
            f"n_planes must be odd and >= 11 so z=0 is sampled, got {n_planes}")
    focal = to_focal_region(field, f, pad_factor=pad_factor, crop=crop)
    nc = focal.grid.n
    pitch_f = focal.grid.pitch
    z = np.linspace(-z_span / 2, z_span / 2, n_planes)
    lam = field.wavelength
    spec = np.fft.fft2(np.fft.ifftshift(focal.amplitude))
    fx = np.fft.fftfreq(nc, d=pitch_f)
    fsq = fx[None, :] ** 2 + fx[:, None] ** 2
    arg = 1.0 / lam ** 2 - fsq
    kz = TWO_PI * np.sqrt(np.maximum(arg, 0.0))
    prop_mask = arg >= 0
    intensity = np.empty((n_rho, n_planes))
    for j, zj in enumerate(z):
        plane = np.fft.fftshift(np.fft.ifft2(spec * np.exp(1j * kz * zj) * prop_mask))
        I2d = np.abs(plane) ** 2
        # wraparound guard: the beam must not press against the crop border
        border = float(I2d[0, :].mean() + I2d[-1, :].mean()
                       + I2d[:, 0].mean() + I2d[:, -1].mean()) / 4.0
        if border > 1e-2 * float(I2d.max()):
            raise SamplingError(
                f"propagation aliasing at plane {j} (z = {zj * 1e3:.2f} mm): "
                f"field reached the cropped-grid border")
        _, intensity[:, j] = azimuthal_average(I2d, pitch_f, n_rho, rho_max,
                                               n_theta=n_theta)
    rho = np.linspace(0.0, rho_max, n_rho)
    meta = dict(meta or {})
    meta.setdefault("azimuthal_order", field.azimuthal_order)
    meta.setdefault("wavelength", lam)
    meta.setdefault("focal_length", f)
    meta.setdefault("power", field.power)
    return IntensityVolume(rho=rho, z=z, intensity=intensity, meta=meta)
