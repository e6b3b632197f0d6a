"""Monte Carlo dynamics of trapped atoms with stochastic hyperfine flips.

Atoms move under the interpolated dipole force plus gravity with a
velocity-Verlet step while the trap ramps on linearly. Each step every atom
may change hyperfine level with probability rate*dt, where the Raman rate
is evaluated at the atom's local intensity and split 7:5 between the
F=2->F=3 and F=3->F=2 directions, making 7/12 the stationary F=3 fraction.

Atoms that wander off the gridded volume coast under gravity alone and drop
out of the recorded statistics once they pass twice the volume radius,
mimicking atoms drifting out of the imaged region.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np

from .constants import AtomicParams, g_earth, hbar, k_B
from .errors import ParameterError, StabilityError
from .potential import PotentialField
from .rng import (counter_uniform, counter_unit_vectors, philox,
                  EVENT_STREAM, FLIP_STREAM)

F3_EQUILIBRIUM = 7.0 / 12.0
FLIP_UP_WEIGHT = 7.0 / 12.0     # F=2 -> F=3 share of the Raman rate
FLIP_DOWN_WEIGHT = 5.0 / 12.0   # F=3 -> F=2 share
MAX_FLIP_PROBABILITY = 0.1


@dataclass
class AtomEnsemble:
    """Positions (m), velocities (m/s), and hyperfine labels of n atoms."""

    positions: np.ndarray        # (n, 3)
    velocities: np.ndarray       # (n, 3)
    in_f3: np.ndarray            # (n,) bool; False = F=2
    seed: int

    def __post_init__(self):
        n = len(self.positions)
        if self.velocities.shape != (n, 3) or self.in_f3.shape != (n,):
            raise ParameterError("ensemble arrays have mismatched lengths")

    @property
    def n(self) -> int:
        return len(self.positions)

    def copy(self) -> "AtomEnsemble":
        return AtomEnsemble(self.positions.copy(), self.velocities.copy(),
                            self.in_f3.copy(), self.seed)


@dataclass
class SimulationSchedule:
    """Timing and drive parameters of one run."""

    duration: float              # s
    dt: float = 10e-6            # s
    ramp: float = 5e-3           # s, linear intensity turn-on
    displacement: float = 0.0    # m, trap translation along z
    record_interval: float = 10e-3   # s
    snapshot_interval: float | None = None   # s, decimated position dumps
    recoil_kicks: bool = False   # two hbar*k kicks per scattering event
    strip_half_width: float | None = 40e-6   # m, imaged |y| half-height

    def __post_init__(self):
        if self.duration <= 0 or self.dt <= 0:
            raise ParameterError("duration and dt must be positive")
        if self.record_interval < self.dt:
            raise ParameterError("record interval shorter than a step")

    def validate_against(self, omega_max: float):
        """Enforce dt <= (shortest oscillation period)/20."""
        if omega_max > 0 and self.dt > (2.0 * np.pi / omega_max) / 20.0:
            raise StabilityError(
                f"dt = {self.dt * 1e6:.1f} us exceeds a twentieth of the "
                f"{omega_max / 2 / np.pi:.0f} Hz oscillation period")


@dataclass
class TrajectoryRecord:
    """Sampled observables of one Monte Carlo run."""

    times: np.ndarray            # s
    f3_fraction: np.ndarray      # among counted atoms
    centroid: np.ndarray         # (n_rec, 3) m, counted atoms
    n_counted: np.ndarray        # atoms still inside the counting region
    n_escaped: np.ndarray        # atoms beyond the counting region
    flips: np.ndarray            # flip events per record window
    snapshots: list = dc_field(default_factory=list)   # (t, positions) tuples
    final_state: AtomEnsemble | None = None
    schedule: SimulationSchedule | None = None

    def csv_rows(self):
        hdr = ["time_s", "f3_fraction", "centroid_x_m", "centroid_y_m",
               "centroid_z_m", "n_counted", "n_escaped", "flips"]
        rows = []
        for i, t in enumerate(self.times):
            rows.append([t, self.f3_fraction[i], self.centroid[i, 0],
                         self.centroid[i, 1], self.centroid[i, 2],
                         int(self.n_counted[i]), int(self.n_escaped[i]),
                         int(self.flips[i])])
        return hdr, rows


def sample_ensemble(n: int, sigma: float, temperature: float,
                    params: AtomicParams, seed: int,
                    center: tuple = (0.0, 0.0, 0.0)) -> AtomEnsemble:
    """Gaussian cloud of n atoms, all starting in F=2.

    Positions are isotropic normal with standard deviation ``sigma`` about
    ``center``; velocity components are thermal at ``temperature``.
    """
    if n < 1:
        raise ParameterError(f"need at least one atom, got {n}")
    if sigma <= 0 or temperature <= 0:
        raise ParameterError("sigma and temperature must be positive")
    gen = philox(seed)
    pos = gen.normal(0.0, sigma, size=(n, 3)) + np.asarray(center)
    v_std = np.sqrt(k_B * temperature / params.mass)
    vel = gen.normal(0.0, v_std, size=(n, 3))
    return AtomEnsemble(pos, vel, np.zeros(n, dtype=bool), seed)


def measure_f3_fraction(ensemble: AtomEnsemble) -> float:
    """Fraction of atoms in F=3."""
    if ensemble.n < 1:
        raise ParameterError("empty ensemble has no defined fraction")
    return float(ensemble.in_f3.mean())


def evolve(ensemble: AtomEnsemble, potential: PotentialField,
           schedule: SimulationSchedule, seed: int | None = None,
           omega_max: float | None = None,
           chunk_size: int | None = None) -> TrajectoryRecord:
    """Integrate the ensemble through the schedule and record observables.

    ``seed`` defaults to the ensemble's own. ``chunk_size`` splits the atom
    arrays into blocks processed sequentially; the counter-based flip
    streams make the result bit-identical for any chunking.
    """
    if omega_max is not None:
        schedule.validate_against(omega_max)
    seed = ensemble.seed if seed is None else seed
    n = ensemble.n
    state = ensemble.copy()
    if schedule.displacement != 0.0:
        potential = potential.translated(schedule.displacement)

    n_steps = int(round(schedule.duration / schedule.dt))
    rec_every = max(int(round(schedule.record_interval / schedule.dt)), 1)
    snap_every = (None if schedule.snapshot_interval is None
                  else max(int(round(schedule.snapshot_interval / schedule.dt)), 1))

    rho_count = 2.0 * (potential.rho[-1])
    z_count = 2.0 * max(abs(potential.z[0]), abs(potential.z[-1]))

    chunks = [slice(0, n)]
    if chunk_size is not None and chunk_size < n:
        chunks = [slice(i, min(i + chunk_size, n)) for i in range(0, n, chunk_size)]

    times, f3s, cents, n_cnt, n_esc, flips_out = [], [], [], [], [], []
    snapshots = []
    flip_tally = 0
    mass = potential.params.mass
    dt = schedule.dt
    g_y = g_earth if potential.gravity else 0.0
    kick_speed = (2.0 * np.pi * hbar
                  / (potential.params.resonance_wavelength * mass))
    idx_all = np.arange(n)
    accel = np.empty((n, 3))

    def eval_forces_and_flips(sl, scale, k, do_flips):
        nonlocal flip_tally
        pts = state.positions[sl]
        r = np.hypot(pts[:, 0], pts[:, 1])
        I, dIdr, dIdz, inside = potential._bilinear(r, pts[:, 2])
        I = np.where(inside, I, 0.0)
        dIdr = np.where(inside, dIdr, 0.0)
        dIdz = np.where(inside, dIdz, 0.0)
        with np.errstate(invalid="ignore"):
            ux = np.where(r > 0, pts[:, 0] / r, 0.0)
            uy = np.where(r > 0, pts[:, 1] / r, 0.0)
        cg = scale * potential.coeff / mass
        accel[sl, 0] = -cg * dIdr * ux
        accel[sl, 1] = -cg * dIdr * uy - g_y
        accel[sl, 2] = -cg * dIdz
        if not np.all(np.isfinite(accel[sl])):
            bad = int(idx_all[sl][~np.isfinite(accel[sl]).all(axis=1)][0])
            raise StabilityError(f"non-finite force on atom {bad} at step {k}")
        if not do_flips:
            return
        raman = scale * potential.raman_coeff * I
        p = np.where(state.in_f3[sl], FLIP_DOWN_WEIGHT, FLIP_UP_WEIGHT) * raman * dt
        pmax = float(p.max()) if p.size else 0.0
        if pmax >= MAX_FLIP_PROBABILITY:
            raise StabilityError(
                f"flip probability {pmax:.3f} >= {MAX_FLIP_PROBABILITY} at "
                f"step {k}; reduce dt")
        u = counter_uniform(seed, k, idx_all[sl], stream=FLIP_STREAM)
        flip = u < p
        state.in_f3[sl] ^= flip
        flip_tally += int(flip.sum())
        if schedule.recoil_kicks:
            total = scale * potential.total_coeff * I
            ev = counter_uniform(seed, k, idx_all[sl], stream=EVENT_STREAM) < total * dt
            if np.any(ev):
                kicks = counter_unit_vectors(seed, k, idx_all[sl][ev])
                vel_view = state.velocities[sl]
                vel_view[ev] += 2.0 * kick_speed * kicks

    scale0 = 0.0 if schedule.ramp > 0 else 1.0
    for sl in chunks:
        eval_forces_and_flips(sl, scale0, -1, do_flips=False)

    for k in range(n_steps):
        t_next = (k + 1) * dt
        scale_next = (min(t_next / schedule.ramp, 1.0)
                      if schedule.ramp > 0 else 1.0)
        state.velocities += 0.5 * dt * accel
        state.positions += dt * state.velocities
        for sl in chunks:
            eval_forces_and_flips(sl, scale_next, k, do_flips=True)
        state.velocities += 0.5 * dt * accel

        if (k + 1) % rec_every == 0:
            r_now = np.hypot(state.positions[:, 0], state.positions[:, 1])
            retained = ((r_now < rho_count)
                        & (np.abs(state.positions[:, 2] - potential.z_offset) < z_count))
            counted = retained
            if schedule.strip_half_width is not None:
                # statistics mimic the imaged strip around the trap axis
                counted = retained & (np.abs(state.positions[:, 1])
                                      < schedule.strip_half_width)
            nc = int(counted.sum())
            times.append((k + 1) * dt)
            f3s.append(float(state.in_f3[counted].mean()) if nc else np.nan)
            cents.append(state.positions[counted].mean(axis=0) if nc else np.full(3, np.nan))
            n_cnt.append(nc)
            n_esc.append(n - int(retained.sum()))
            flips_out.append(flip_tally)
            flip_tally = 0
            if snap_every is not None and ((k + 1) % snap_every == 0):
                snapshots.append(((k + 1) * dt, state.positions.copy()))

    return TrajectoryRecord(
        times=np.asarray(times), f3_fraction=np.asarray(f3s),
        centroid=np.asarray(cents), n_counted=np.asarray(n_cnt, dtype=int),
        n_escaped=np.asarray(n_esc, dtype=int),
        flips=np.asarray(flips_out, dtype=int),
        snapshots=snapshots, final_state=state, schedule=schedule)


def displaced_run(offset: float, ensemble: AtomEnsemble,
                  potential: PotentialField, schedule: SimulationSchedule,
                  seed: int | None = None, **kwargs) -> TrajectoryRecord:
    """Evolve with the trap minimum displaced by ``offset`` along z.

    Equivalent to translating the potential; the centroid trace in the
    returned record is the oscillation observable.
    """
    z_max = max(abs(potential.z[0]), abs(potential.z[-1]))
    if abs(offset) >= z_max:
        raise ParameterError(
            f"offset {offset * 1e3:.1f} mm outside the volume z-range "
            f"+-{z_max * 1e3:.1f} mm")
    sched = SimulationSchedule(
        duration=schedule.duration, dt=schedule.dt, ramp=schedule.ramp,
        displacement=offset, record_interval=schedule.record_interval,
        snapshot_interval=schedule.snapshot_interval,
        recoil_kicks=schedule.recoil_kicks,
        strip_half_width=schedule.strip_half_width)
    return evolve(ensemble, potential, sched, seed=seed, **kwargs)


def synthetic_image(positions: np.ndarray, axis: str, pixel: float,
                    extent: float | None = None):
    """2D position histogram as seen along the chosen camera axis.

    axis='z' images the transverse (x, y) plane (the toroid head-on);
    axis='x' images (z, y), showing the longitudinal extent. Returns
    (counts, (horizontal_edges, vertical_edges)).
    """
    if pixel <= 0:
        raise ParameterError("pixel size must be positive")
    pts = np.atleast_2d(positions)
    if axis == "z":
        h, v = pts[:, 0], pts[:, 1]
    elif axis == "x":
        h, v = pts[:, 2], pts[:, 1]
    else:
        raise ParameterError(f"axis must be 'x' or 'z', got {axis!r}")
    if extent is None:
        span = max(np.abs(h).max(), np.abs(v).max(), pixel)
        extent = 2.0 * span
    nbins = max(int(np.ceil(extent / pixel)), 1)
    edges = -extent / 2 + pixel * np.arange(nbins + 1)
    counts, he, ve = np.histogram2d(h, v, bins=(edges, edges))
    return counts, (he, ve)
