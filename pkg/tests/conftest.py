"""Shared fixtures. The focal volumes are expensive, so they are built once
per session and reused across the unit and acceptance tests."""

import numpy as np
import pytest

from darkring import AtomicParams, lg_mode, masked_beam_volume
from darkring.fields import default_grid


@pytest.fixture(scope="session")
def volume_cache():
    """Factory for fine-grid masked-beam focal volumes, cached by key."""
    cache = {}

    def get(ell=1, rc_over_w0=0.79, delta_nm=1.0, fast=False, **kw):
        key = (ell, round(rc_over_w0, 4), delta_nm, fast, tuple(sorted(kw.items())))
        if key not in cache:
            params = AtomicParams.rb85(delta_nm)
            cache[key] = masked_beam_volume(ell, rc_over_w0, params, fast=fast, **kw)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def l1_volume(volume_cache):
    """The workhorse: ell=1 beam at the published step radius, 1 nm detuning."""
    return volume_cache(ell=1, rc_over_w0=0.79, delta_nm=1.0)


@pytest.fixture(scope="session")
def lg11_volume():
    """Focal volume of a pure LG_1^1 input mode."""
    from darkring import focus_scan
    grid = default_grid(n=512, extent=16e-3)
    params = AtomicParams.rb85(1.0)
    mode = lg_mode(grid, 1, 1, 1.7e-3, wavelength=params.trap_wavelength)
    return focus_scan(mode, 215e-3, meta={"ell": 1, "w0": 1.7e-3, "f": 215e-3,
                                          "power": mode.power})


@pytest.fixture(scope="session")
def equal_barrier_roots():
    """Equal-barrier Rc/w0 for ell = 0, 1, 2 (the criterion-1 optimization)."""
    import time
    from darkring import equal_barrier_rc
    t0 = time.time()
    roots = {ell: equal_barrier_rc(ell) for ell in (0, 1, 2)}
    roots["elapsed_s"] = time.time() - t0
    return roots


def mc_preset_run(delta_nm, duration, seed=20, n=4000, displacement=0.0,
                  volume=None):
    """One fig-3/fig-4 style Monte Carlo run with the preset parameters."""
    from darkring import (SimulationSchedule, build_potential, evolve,
                          sample_ensemble)
    params = AtomicParams.rb85(delta_nm)
    if volume is None:
        volume = masked_beam_volume(1, 0.79, params, z_span=24e-3)
    potential = build_potential(volume, params, gravity=True)
    ensemble = sample_ensemble(n, 250e-6, 5e-6, params, seed)
    schedule = SimulationSchedule(duration=duration, dt=10e-6, ramp=5e-3,
                                  displacement=displacement,
                                  record_interval=10e-3)
    return evolve(ensemble, potential, schedule)


@pytest.fixture(scope="session")
def mc_run_05nm(volume_cache):
    """The 0.5 nm spin-relaxation preset (n=4000, 1.5 s)."""
    return mc_preset_run(0.5, 1.5,
                         volume=volume_cache(delta_nm=0.5, z_span=24e-3))


@pytest.fixture(scope="session")
def mc_run_4nm(volume_cache):
    """The 4.0 nm preset, run long enough to pin the slow relaxation."""
    return mc_preset_run(4.0, 3.0,
                         volume=volume_cache(delta_nm=4.0, z_span=24e-3))
