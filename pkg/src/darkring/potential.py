"""Dipole potentials, scattering rates, barrier structure, and Rc optimization.

The light shift follows the two-line (D1/D2) form for linear polarization:

    U = (hbar*Gamma*I / 24*Is) * (Gamma/(Delta+Delta_LS) + 2*Gamma/Delta)

with Delta the angular detuning from the D2 line, positive for blue. The
photon-scattering rates use the matching per-line forms; the Raman
(hyperfine-changing) rate carries the interference difference of the two
line amplitudes, which dies off as Delta^-4 far above the fine-structure
splitting.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .constants import AtomicParams, RECOIL_ENERGY, TWO_PI, g_earth, hbar, k_B
from .errors import BracketError, DomainError, ParameterError, TopologyError
from .propagation import IntensityVolume, focus_scan
from .fields import apply_mask, default_grid, gaussian_beam, ring_phase_mask


def _check_detuning(params: AtomicParams):
    if params.detuning == 0:
        raise ParameterError("detuning must be nonzero (resonant singularity)")
    if params.detuning == -params.fine_structure_splitting:
        raise ParameterError("detuning sits on the far fine-structure line")


def dipole_coefficient(params: AtomicParams) -> float:
    """U per unit intensity, J/(W/m^2). Positive for blue detuning."""
    _check_detuning(params)
    G = params.linewidth
    d = params.detuning
    dls = params.fine_structure_splitting
    return (hbar * G / (24.0 * params.saturation_intensity)) * (
        G / (d + dls) + 2.0 * G / d)


def dipole_potential(intensity, params: AtomicParams):
    """Optical potential energy in J for the given intensity in W/m^2."""
    return dipole_coefficient(params) * np.asarray(intensity)


def total_scattering_coefficient(params: AtomicParams) -> float:
    """Total photon-scattering rate per unit intensity, s^-1/(W/m^2)."""
    _check_detuning(params)
    G = params.linewidth
    d = params.detuning
    dls = params.fine_structure_splitting
    return (G ** 3 / (24.0 * params.saturation_intensity)) * (
        2.0 / d ** 2 + 1.0 / (d + dls) ** 2)


def raman_scattering_coefficient(params: AtomicParams) -> float:
    """Hyperfine-changing (Raman) rate per unit intensity, s^-1/(W/m^2).

    Amplitude-level interference of the two fine-structure lines:
    rate ~ (1/Delta - 1/(Delta+Delta_LS))^2, i.e. ~ Delta_LS^2/Delta^4 far
    out. The branching factor is configurable on AtomicParams.
    """
    _check_detuning(params)
    G = params.linewidth
    d = params.detuning
    dls = params.fine_structure_splitting
    inv = 1.0 / d - 1.0 / (d + dls)
    return params.raman_branching * (G ** 3 / (24.0 * params.saturation_intensity)) * inv ** 2


def scattering_rates(intensity, params: AtomicParams) -> dict:
    """Total and Raman scattering rates (s^-1) at the given intensity."""
    I = np.asarray(intensity)
    return {
        "total": total_scattering_coefficient(params) * I,
        "raman": raman_scattering_coefficient(params) * I,
    }


def recoil_heating_rate(scatter_rate, params: AtomicParams | None = None):
    """Temperature-equivalent heating rate, K/s, for a scattering rate in s^-1.

    Convention: each scattering event deposits two recoil energies
    (absorption plus emission), quoted directly as energy/k_B. For the D2
    recoil this gives ~370 nK/s per scattering per second.
    """
    if params is None:
        e_rec = RECOIL_ENERGY
    else:
        k = TWO_PI / params.resonance_wavelength
        e_rec = (hbar * k) ** 2 / (2.0 * params.mass)
    rate = np.asarray(scatter_rate)
    if np.any(rate < 0):
        raise ParameterError("scattering rate must be >= 0")
    return rate * 2.0 * e_rec / k_B


def red_trap_scattering_time(depth: float, params: AtomicParams) -> float:
    """Mean photon-scattering interval (s) at the bottom of a red trap of the
    given depth (J), detuned |Delta| below the reference line.

    Follows the published comparison convention: the trap intensity is set by
    the two-line potential, while the rate at that intensity is taken at the
    single-resonance (full line strength) value Gamma^3 I / (8 Is Delta^2).
    The two-line total rate would run ~1.5x slower; see the package notes.
    """
    if depth <= 0:
        raise ParameterError("depth must be positive")
    red = AtomicParams(detuning=-abs(params.detuning),
                       linewidth=params.linewidth,
                       saturation_intensity=params.saturation_intensity,
                       fine_structure_splitting=params.fine_structure_splitting,
                       mass=params.mass,
                       resonance_wavelength=params.resonance_wavelength)
    intensity = depth / abs(dipole_coefficient(red))
    G = params.linewidth
    rate = (G ** 3 / (8.0 * params.saturation_intensity)) * intensity / params.detuning ** 2
    return 1.0 / rate


@dataclass
class BarrierReport:
    """Ring-trap geometry and barrier structure of one intensity volume.

    Frequencies come in two flavors. ``omega_perp`` and ``omega_par`` follow
    the profile-plot convention: the transverse value is the parabola through
    the ring minimum and the inner-barrier top, the longitudinal one a
    vertex-pinned least-squares parabola over the confined span. The
    ``*_local`` values are small-window curvature fits (quartic correction
    below ~10%), which is what a cold atom at the well bottom oscillates at.
    """

    ring_radius: float          # m
    u_min: float                # J
    barrier_inner: float        # J, above u_min
    barrier_outer: float        # J
    barrier_z: float            # J
    z_saddle: float             # m
    omega_perp: float           # rad/s
    omega_par: float            # rad/s
    omega_perp_local: float     # rad/s
    omega_par_local: float      # rad/s
    depth: float                # J, min barrier above the ring minimum
    detuning_nm: float

    @property
    def aspect_ratio(self) -> float:
        """omega_par / omega_perp (the long-trap number, ~1/300)."""
        return self.omega_par / self.omega_perp if self.omega_perp else np.nan

    def in_linewidths(self, value: float, params: AtomicParams) -> float:
        return value / (hbar * params.linewidth)

    def rows(self, params: AtomicParams):
        hg = hbar * params.linewidth
        return [
            ("ring_radius_um", self.ring_radius * 1e6),
            ("depth_hbar_gamma", self.depth / hg),
            ("barrier_inner_hbar_gamma", self.barrier_inner / hg),
            ("barrier_outer_hbar_gamma", self.barrier_outer / hg),
            ("barrier_z_hbar_gamma", self.barrier_z / hg),
            ("barrier_ratio_in_out", self.barrier_inner / self.barrier_outer),
            ("z_saddle_mm", self.z_saddle * 1e3),
            ("omega_perp_hz", self.omega_perp / TWO_PI),
            ("omega_par_hz", self.omega_par / TWO_PI),
            ("omega_perp_local_hz", self.omega_perp_local / TWO_PI),
            ("omega_par_local_hz", self.omega_par_local / TWO_PI),
            ("aspect_ratio", self.aspect_ratio),
            ("detuning_nm", self.detuning_nm),
        ]


def _ring_structure(rho: np.ndarray, profile: np.ndarray):
    """Locate (inner peak, ring minimum, outer peak) indices of a z=0 profile.

    The dark ring is the deepest local minimum adjacent to the global
    maximum that is bounded by higher intensity on both sides. Either ring
    can carry the global maximum (the shaped beams peak on the outer ring,
    a pure dual-node mode on the inner one), so both descents are tried.
    """
    from scipy.signal import argrelmax
    peaks = list(argrelmax(profile, order=2)[0])
    if profile[0] > profile[1]:
        peaks.insert(0, 0)      # an on-axis spot counts as the inner structure
    if len(peaks) < 2:
        raise TopologyError(
            "fewer than two radial maxima: no bounded dark ring")
    a, b = sorted(sorted(peaks, key=lambda i: profile[i])[-2:])
    if profile[a] < 0.05 * profile[b] or profile[b] < 0.05 * profile[a]:
        raise TopologyError(
            "no second principal ring: the step radius is outside the "
            "dual-ring band")
    i_min = a + int(np.argmin(profile[a:b + 1]))
    if i_min in (a, b):
        raise TopologyError("no minimum between the two principal rings")
    i_in = int(np.argmax(profile[:i_min]))
    i_out = i_min + int(np.argmax(profile[i_min:]))
    if profile[i_min] > 0.5 * min(profile[i_in], profile[i_out]):
        # a shallow undulation, not a dark ring
        raise TopologyError(
            "no dark ring: the minimum between the principal rings is "
            "shallow")
    return i_in, i_min, i_out


def _minimum_path(volume: IntensityVolume, i_start: int, window: int = 8):
    """Track the ring-minimum radius across z, starting from the focal plane."""
    n_z = len(volume.z)
    j0 = int(np.argmin(np.abs(volume.z)))
    idx = np.empty(n_z, dtype=int)
    val = np.empty(n_z)

    def step(j, anchor):
        lo = max(anchor - window, 1)
        hi = min(anchor + window + 1, len(volume.rho))
        k = lo + int(np.argmin(volume.intensity[lo:hi, j]))
        return k

    idx[j0] = step(j0, i_start)
    val[j0] = volume.intensity[idx[j0], j0]
    for j in range(j0 + 1, n_z):
        idx[j] = step(j, idx[j - 1])
        val[j] = volume.intensity[idx[j], j]
    for j in range(j0 - 1, -1, -1):
        idx[j] = step(j, idx[j + 1])
        val[j] = volume.intensity[idx[j], j]
    return j0, idx, val


def _local_quadratic(x: np.ndarray, y: np.ndarray, i_center: int, half_width: int):
    sl = slice(max(i_center - half_width, 0), i_center + half_width + 1)
    c = np.polyfit(x[sl] - x[i_center], y[sl], 2)
    return float(c[0])


def barrier_report(volume: IntensityVolume, params: AtomicParams) -> BarrierReport:
    """Characterize the dark ring of an intensity volume.

    Requires an azimuthally symmetric source; raises TopologyError when the
    focal profile has no bounded ring (step radius far from the working
    band, or a pure mode with no closed null).
    """
    if not volume.symmetric_source:
        raise ParameterError("volume metadata lacks a pure azimuthal order")
    coeff = dipole_coefficient(params)
    j0 = int(np.argmin(np.abs(volume.z)))
    prof0 = volume.intensity[:, j0]
    i_in, i_min, i_out = _ring_structure(volume.rho, prof0)
    rho = volume.rho
    u0 = coeff * prof0
    u_min = float(u0[i_min])
    barrier_inner = float(u0[i_in] - u_min)
    barrier_outer = float(u0[i_out] - u_min)

    _, path_idx, path_val = _minimum_path(volume, i_min)
    u_path = coeff * path_val
    right = slice(j0, None)
    left = slice(0, j0 + 1)
    jr = j0 + int(np.argmax(u_path[right]))
    jl = int(np.argmax(u_path[left]))
    barrier_z = float(min(u_path[jr], u_path[jl]) - u_min)
    z_saddle = float(min(abs(volume.z[jr]), abs(volume.z[jl])))

    # transverse: secant parabola through the minimum and the inner-barrier top
    d_in = float(rho[i_min] - rho[i_in])
    omega_perp = np.sqrt(2.0 * barrier_inner / (params.mass * d_in ** 2))
    # transverse local curvature over +-25% of the distance to the nearest barrier
    hw = max(int(0.25 * min(i_min - i_in, i_out - i_min)), 2)
    a_loc = _local_quadratic(rho, u0, i_min, hw)
    omega_perp_local = np.sqrt(max(2.0 * a_loc, 0.0) / params.mass)

    # longitudinal: vertex-pinned least-squares parabola over the confined span
    sl = slice(min(jl, j0), max(jr, j0) + 1)
    dz = volume.z[sl] - volume.z[j0]
    du = u_path[sl] - u_min
    denom = float(np.sum(dz ** 4))
    a_par = float(np.sum(du * dz ** 2) / denom) if denom > 0 else 0.0
    omega_par = np.sqrt(max(2.0 * a_par, 0.0) / params.mass)
    # longitudinal local curvature near z = 0
    hwz = max(int(0.25 * max(jr - j0, j0 - jl)), 2)
    a_parl = _local_quadratic(volume.z, u_path, j0, hwz)
    omega_par_local = np.sqrt(max(2.0 * a_parl, 0.0) / params.mass)

    depth = float(min(barrier_inner, barrier_outer, barrier_z))
    return BarrierReport(
        ring_radius=float(rho[i_min]), u_min=u_min,
        barrier_inner=barrier_inner, barrier_outer=barrier_outer,
        barrier_z=barrier_z, z_saddle=z_saddle,
        omega_perp=float(omega_perp), omega_par=float(omega_par),
        omega_perp_local=float(omega_perp_local),
        omega_par_local=float(omega_par_local),
        depth=depth, detuning_nm=params.detuning_nm)


def masked_beam_volume(ell: int, rc_over_w0: float, params_or_wavelength,
                       w0: float = 1.7e-3, f: float = 215e-3,
                       power: float = 0.150, grid_n: int = 512,
                       grid_extent: float = 16e-3, fast: bool = False,
                       **scan_kwargs) -> IntensityVolume:
    """Build the masked-Gaussian focal volume for one (ell, Rc/w0) setting.

    ``fast`` trades focal resolution for speed (used inside optimization
    loops); the default settings resolve the dark-ring null below 1e-3 of
    the peak.
    """
    if hasattr(params_or_wavelength, "trap_wavelength"):
        wavelength = params_or_wavelength.trap_wavelength
    else:
        wavelength = float(params_or_wavelength)
    grid = default_grid(n=grid_n, extent=grid_extent)
    beam = gaussian_beam(grid, w0, power, wavelength)
    mask = ring_phase_mask(grid, ell, rc_over_w0 * w0)
    shaped = apply_mask(beam, mask)
    kw = dict(pad_factor=8, crop=512, n_planes=201, z_span=20e-3,
              n_rho=512, rho_max=0.32e-3)
    if fast:
        kw.update(pad_factor=4, crop=512, n_planes=49, n_rho=400,
                  rho_max=0.3e-3)
    kw.update(scan_kwargs)
    meta = {"ell": ell, "rc_over_w0": rc_over_w0, "w0": w0, "f": f,
            "power": power}
    return focus_scan(shaped, f, meta=meta, **kw)


def equal_barrier_rc(ell: int, w0: float = 1.7e-3, f: float = 215e-3,
                     wavelength: float = 779.24e-9, power: float = 0.150,
                     bracket: tuple = (0.5, 1.0), xtol: float = 2e-3,
                     coarse_steps: int = 11) -> float:
    """Rc/w0 at which the longitudinal barrier equals the inner radial one.

    Scans the bracket coarsely first (skipping settings with no bounded
    ring), verifies a monotone sign change, then refines with Brent. Raises
    BracketError with the scan attached when no crossing exists.
    """
    if ell not in (0, 1, 2, 3):
        raise ParameterError(f"azimuthal index must be in 0..3, got {ell}")
    params = AtomicParams(detuning=TWO_PI * 493e9)  # 1 nm; geometry-independent

    def imbalance(rcw: float) -> float:
        vol = masked_beam_volume(ell, rcw, wavelength, w0=w0, f=f,
                                 power=power, fast=True)
        rep = barrier_report(vol, params)
        return rep.barrier_z / rep.barrier_inner - 1.0

    scan = []
    for rcw in np.linspace(bracket[0], bracket[1], coarse_steps):
        try:
            scan.append((float(rcw), imbalance(rcw)))
        except TopologyError:
            scan.append((float(rcw), None))
    valid = [(r, v) for r, v in scan if v is not None]
    crossing = None
    for (r1, v1), (r2, v2) in zip(valid, valid[1:]):
        if v1 < 0 <= v2 or v1 <= 0 < v2:
            crossing = (r1, r2)
            break
    if crossing is None:
        lines = ", ".join(f"{r:.2f}:{'-' if v is None else f'{v:+.2f}'}"
                          for r, v in scan)
        raise BracketError(
            f"no equal-barrier crossing for ell={ell} in "
            f"[{bracket[0]}, {bracket[1]}]; scan (rc/w0:imbalance): {lines}")
    return float(brentq(imbalance, crossing[0], crossing[1], xtol=xtol))


class PotentialField:
    """Total potential U(x, y, z) = U_dipole(rho, z) + m g y (gravity optional).

    Gradients come from centered differences of the gridded dipole term,
    sampled bilinearly; queries outside the gridded volume raise DomainError
    unless ``clip`` is requested (the Monte Carlo treats outside as dark).
    """

    def __init__(self, volume: IntensityVolume, params: AtomicParams,
                 gravity: bool = True):
        self.volume = volume
        self.params = params
        self.gravity = bool(gravity)
        self.coeff = dipole_coefficient(params)
        self.raman_coeff = raman_scattering_coefficient(params)
        self.total_coeff = total_scattering_coefficient(params)
        self.rho = volume.rho
        self.z = volume.z
        self.drho = float(self.rho[1] - self.rho[0])
        self.dz = float(self.z[1] - self.z[0])
        I = volume.intensity
        dIdr = np.gradient(I, self.drho, axis=0)
        dIdz = np.gradient(I, self.dz, axis=1)
        # stacked for a single fancy-index gather per corner
        self._tables = np.stack([I, dIdr, dIdz])
        self.z_offset = 0.0

    def translated(self, offset: float) -> "PotentialField":
        """Same potential with the trap center moved by ``offset`` along z."""
        other = PotentialField.__new__(PotentialField)
        other.__dict__.update(self.__dict__)
        other.z_offset = self.z_offset + float(offset)
        return other

    def _bilinear(self, r, z):
        fr = r / self.drho
        fz = (z - self.z_offset - self.z[0]) / self.dz
        inside = ((fr < len(self.rho) - 1.001) & (fz > 0.0)
                  & (fz < len(self.z) - 1.001))
        fr = np.clip(fr, 0.0, len(self.rho) - 1.001)
        fz = np.clip(fz, 0.0, len(self.z) - 1.001)
        i0 = fr.astype(np.intp)
        j0 = fz.astype(np.intp)
        wr = fr - i0
        wz = fz - j0
        T = self._tables
        v = (T[:, i0, j0] * (1 - wr) * (1 - wz)
             + T[:, i0 + 1, j0] * wr * (1 - wz)
             + T[:, i0, j0 + 1] * (1 - wr) * wz
             + T[:, i0 + 1, j0 + 1] * wr * wz)
        return v[0], v[1], v[2], inside

    def intensity_at(self, points: np.ndarray, strict: bool = True):
        pts = np.atleast_2d(points)
        r = np.hypot(pts[:, 0], pts[:, 1])
        I, _, _, inside = self._bilinear(r, pts[:, 2])
        if strict and not np.all(inside):
            raise DomainError("query outside the gridded volume")
        return np.where(inside, I, 0.0)

    def energy(self, points: np.ndarray, strict: bool = True):
        pts = np.atleast_2d(points)
        I = self.intensity_at(pts, strict=strict)
        u = self.coeff * I
        if self.gravity:
            u = u + self.params.mass * g_earth * pts[:, 1]
        return u if points.ndim > 1 else float(u[0])

    def gradient(self, points: np.ndarray, strict: bool = True):
        pts = np.atleast_2d(points)
        r = np.hypot(pts[:, 0], pts[:, 1])
        I, dIdr, dIdz, inside = self._bilinear(r, pts[:, 2])
        dIdr = np.where(inside, dIdr, 0.0)
        dIdz = np.where(inside, dIdz, 0.0)
        if strict and not np.all(inside):
            raise DomainError("query outside the gridded volume")
        with np.errstate(invalid="ignore", divide="ignore"):
            ux = np.where(r > 0, pts[:, 0] / r, 0.0)
            uy = np.where(r > 0, pts[:, 1] / r, 0.0)
        g = np.empty_like(pts, dtype=float)
        g[:, 0] = self.coeff * dIdr * ux
        g[:, 1] = self.coeff * dIdr * uy
        g[:, 2] = self.coeff * dIdz
        if self.gravity:
            g[:, 1] += self.params.mass * g_earth
        return g if points.ndim > 1 else g[0]

    def raman_rate_at(self, points: np.ndarray):
        return self.raman_coeff * self.intensity_at(points, strict=False)


def build_potential(volume: IntensityVolume, params: AtomicParams,
                    gravity: bool = True) -> PotentialField:
    """Wrap an intensity volume as an interpolating potential field."""
    return PotentialField(volume, params, gravity=gravity)
