"""Command-line front end.

    darkring beam        --config PATH   mask, focal image, mode spectrum
    darkring scan        --config PATH   focal volume, profiles, barrier report
    darkring optimize-rc --config PATH   equal-barrier Rc/w0 per azimuthal index
    darkring mc          --config PATH   Monte Carlo run, trajectory, images
    darkring fit         --config PATH   relaxation-curve fits on a CSV

Exit codes: 0 success, 2 bad configuration or input, 3 physics/topology
failure, 4 numerical non-convergence. Runs are deterministic: a config plus
seed always produces byte-identical delimited output.
"""

import argparse
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import analysis, formats, montecarlo, plots
from .config import ConfigError, load_config
from .constants import AtomicParams, TWO_PI, hbar
from .errors import (BracketError, DarkRingError, DomainError, FitError,
                     ParameterError, SamplingError, StabilityError,
                     TopologyError)
from .fields import (apply_mask, decompose, decomposition_grid, default_grid,
                     gaussian_beam, ring_phase_mask, scan_basis_waist)
from .potential import (barrier_report, build_potential, dipole_coefficient,
                        equal_barrier_rc, masked_beam_volume, _minimum_path)

EXIT_CONFIG = 2
EXIT_PHYSICS = 3
EXIT_NUMERIC = 4


def preset_path(name: str) -> Path:
    """Path of a shipped preset config (name without the .ini suffix)."""
    base = resources.files("darkring").joinpath("presets")
    candidate = base.joinpath(f"{name}.ini")
    if not candidate.is_file():
        known = sorted(p.name[:-4] for p in base.iterdir() if p.name.endswith(".ini"))
        raise ConfigError(f"unknown preset {name!r}; shipped presets: {', '.join(known)}")
    return Path(str(candidate))


def _resolve_config(args):
    if args.preset:
        cfg = load_config(preset_path(args.preset))
    elif args.config:
        cfg = load_config(args.config)
    else:
        raise ConfigError("either --config PATH or --preset NAME is required")
    if args.seed is not None:
        cfg.values["atoms"]["seed"] = args.seed
    if args.out is not None:
        cfg.values["output"]["directory"] = args.out
    return cfg


def _outdir(cfg) -> Path:
    out = Path(cfg.get("output", "directory"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _params(cfg) -> AtomicParams:
    return AtomicParams.rb85(cfg.get("beam", "detuning") * 1e9)


def _formats(cfg):
    return {f.strip() for f in cfg.get("output", "formats").split(",") if f.strip()}


def _emit_manifest(cfg, out: Path, wanted: bool):
    if wanted:
        (out / "manifest.ini").write_text(cfg.manifest())


def _shaped_beam(cfg):
    params = _params(cfg)
    grid = default_grid(n=cfg.get("optics", "grid_n"),
                        extent=cfg.get("optics", "grid_extent"))
    beam = gaussian_beam(grid, cfg.get("beam", "w0"), cfg.get("beam", "power"),
                         params.trap_wavelength)
    rc = cfg.get("beam", "rc_over_w0") * cfg.get("beam", "w0")
    mask = ring_phase_mask(grid, cfg.get("beam", "ell"), rc)
    return params, beam, mask, apply_mask(beam, mask)


def cmd_beam(cfg, manifest=False):
    cfg.require("beam.w0", "beam.power", "beam.ell", "beam.rc_over_w0")
    out = _outdir(cfg)
    fmts = _formats(cfg)
    params, beam, mask, shaped = _shaped_beam(cfg)
    focal = None
    from .propagation import to_focal_region
    focal = to_focal_region(shaped, cfg.get("optics", "f"),
                            pad_factor=cfg.get("optics", "pad_factor"),
                            crop=cfg.get("optics", "crop"))
    if "pgm" in fmts:
        formats.write_pgm16(out / "mask_phase.pgm", mask.phase,
                            vmin=0.0, vmax=2 * np.pi)
        formats.write_pgm16(out / "focal_intensity.pgm", focal.intensity())
    if "raw" in fmts:
        formats.write_field(out / "mask_phase.drf", mask,
                            wavelength=params.trap_wavelength)
        formats.write_field(out / "focal_field.drf", focal)
    spectrum = None
    if cfg.get("beam", "decompose"):
        w0 = cfg.get("beam", "w0")
        ell = cfg.get("beam", "ell")
        p_max = cfg.get("beam", "p_max")
        waists = np.linspace(0.5, 1.5, 51) * w0
        # the basis needs more room than the shaping grid guarantees
        dgrid = decomposition_grid(w0, waists.max(), ell, p_max)
        dbeam = gaussian_beam(dgrid, w0, cfg.get("beam", "power"),
                              params.trap_wavelength)
        dshaped = apply_mask(dbeam, ring_phase_mask(
            dgrid, ell, cfg.get("beam", "rc_over_w0") * w0))
        spectrum = decompose(dshaped, w0, ell, p_max)
        hdr = ["p", "fraction"]
        rows = spectrum.as_rows() + [["residual", spectrum.residual]]
        formats.write_csv(out / "mode_spectrum.csv", hdr, rows)
        _, spectra = scan_basis_waist(dshaped, ell, p_max, waists)
        scan_hdr = ["basis_waist_over_w0"] + [f"p{p}" for p in range(p_max + 1)]
        scan_rows = [[w / w0] + [s.fractions[p] for p in range(p_max + 1)]
                     for w, s in zip(waists, spectra)]
        formats.write_csv(out / "mode_spectrum_waist_scan.csv", scan_hdr, scan_rows)
        best = max(spectra, key=lambda s: s.fractions[1])
        formats.write_keyvalue(out / "mode_spectrum_best.txt",
                               [("basis_waist_over_w0", best.basis_waist / w0)]
                               + [(f"p{p}", best.fractions[p])
                                  for p in range(p_max + 1)]
                               + [("residual", best.residual)])
        spectrum = best
    if "png" in fmts:
        plots.save_beam_figure(out / "beam.png", mask, focal, spectrum)
    _emit_manifest(cfg, out, manifest)
    return 0


def cmd_scan(cfg, manifest=False):
    cfg.require("beam.ell", "beam.rc_over_w0")
    out = _outdir(cfg)
    fmts = _formats(cfg)
    params = _params(cfg)
    volume = masked_beam_volume(
        cfg.get("beam", "ell"), cfg.get("beam", "rc_over_w0"), params,
        w0=cfg.get("beam", "w0"), f=cfg.get("optics", "f"),
        power=cfg.get("beam", "power"), grid_n=cfg.get("optics", "grid_n"),
        grid_extent=cfg.get("optics", "grid_extent"),
        fast=bool(cfg.get("optics", "fast")),
        z_span=cfg.get("optics", "z_span"),
        n_planes=cfg.get("optics", "n_planes"))
    report = barrier_report(volume, params)
    if "raw" in fmts:
        formats.write_volume(out / "volume.drv", volume)
    coeff = dipole_coefficient(params)
    hg = hbar * params.linewidth
    j0 = int(np.argmin(np.abs(volume.z)))
    dr = volume.rho - report.ring_radius
    quad_r = (report.u_min + 0.5 * params.mass * report.omega_perp ** 2 * dr ** 2)
    formats.write_csv(out / "profile_rho.csv",
                      ["rho_m", "intensity_w_m2", "u_hbar_gamma", "quad_fit_hbar_gamma"],
                      [[volume.rho[i], volume.intensity[i, j0],
                        coeff * volume.intensity[i, j0] / hg, quad_r[i] / hg]
                       for i in range(len(volume.rho))])
    i_min = int(np.argmin(np.abs(volume.rho - report.ring_radius)))
    _, _, path_val = _minimum_path(volume, i_min)
    quad_z = (report.u_min + 0.5 * params.mass * report.omega_par ** 2 * volume.z ** 2)
    formats.write_csv(out / "profile_z.csv",
                      ["z_m", "intensity_w_m2", "u_hbar_gamma", "quad_fit_hbar_gamma"],
                      [[volume.z[j], path_val[j], coeff * path_val[j] / hg,
                        quad_z[j] / hg] for j in range(len(volume.z))])
    formats.write_keyvalue(out / "barrier_report.txt", report.rows(params))
    formats.write_csv(out / "barrier_report.csv",
                      [k for k, _ in report.rows(params)],
                      [[v for _, v in report.rows(params)]])
    if "png" in fmts:
        plots.save_scan_figure(out / "scan.png", volume, report, params)
    _emit_manifest(cfg, out, manifest)
    return 0


def cmd_optimize_rc(cfg, manifest=False):
    out = _outdir(cfg)
    fmts = _formats(cfg)
    ells = [int(e) for e in cfg.get("optimize", "ells").split(",")]
    results = {}
    for ell in ells:
        results[ell] = equal_barrier_rc(
            ell, w0=cfg.get("beam", "w0"), f=cfg.get("optics", "f"),
            wavelength=_params(cfg).trap_wavelength,
            power=cfg.get("beam", "power"),
            bracket=(cfg.get("optimize", "bracket_lo"),
                     cfg.get("optimize", "bracket_hi")),
            xtol=cfg.get("optimize", "xtol"))
    formats.write_csv(out / "equal_barrier_rc.csv", ["ell", "rc_over_w0"],
                      [[e, results[e]] for e in ells])
    if "png" in fmts:
        plots.save_rc_figure(out / "equal_barrier_rc.png", results)
    _emit_manifest(cfg, out, manifest)
    return 0


def cmd_mc(cfg, manifest=False):
    cfg.require("beam.ell", "beam.rc_over_w0", "beam.detuning",
                "atoms.n", "schedule.duration")
    out = _outdir(cfg)
    fmts = _formats(cfg)
    params = _params(cfg)
    volume = masked_beam_volume(
        cfg.get("beam", "ell"), cfg.get("beam", "rc_over_w0"), params,
        w0=cfg.get("beam", "w0"), f=cfg.get("optics", "f"),
        power=cfg.get("beam", "power"), grid_n=cfg.get("optics", "grid_n"),
        grid_extent=cfg.get("optics", "grid_extent"),
        fast=bool(cfg.get("optics", "fast")),
        z_span=cfg.get("optics", "z_span"),
        n_planes=cfg.get("optics", "n_planes"))
    report = barrier_report(volume, params)
    potential = build_potential(volume, params,
                                gravity=bool(cfg.get("schedule", "gravity")))
    ensemble = montecarlo.sample_ensemble(
        cfg.get("atoms", "n"), cfg.get("atoms", "sigma"),
        cfg.get("atoms", "temperature"), params, cfg.get("atoms", "seed"))
    schedule = montecarlo.SimulationSchedule(
        duration=cfg.get("schedule", "duration"),
        dt=cfg.get("schedule", "dt"),
        ramp=cfg.get("schedule", "ramp"),
        displacement=cfg.get("schedule", "displacement"),
        record_interval=cfg.get("schedule", "record_interval"),
        strip_half_width=cfg.get("schedule", "strip_half_width"),
        recoil_kicks=bool(cfg.get("schedule", "recoil_kicks")))
    record = montecarlo.evolve(ensemble, potential, schedule,
                               omega_max=report.omega_perp_local)
    hdr, rows = record.csv_rows()
    formats.write_csv(out / "trajectory.csv", hdr, rows)
    final = record.final_state
    if "pgm" in fmts:
        for axis in ("z", "x"):
            counts, _ = montecarlo.synthetic_image(
                final.positions, axis, pixel=5e-6, extent=0.4e-3)
            formats.write_pgm16(out / f"image_{axis}.pgm", counts.T)
    if "png" in fmts:
        plots.save_mc_figure(out / "mc.png", record)
    _emit_manifest(cfg, out, manifest)
    return 0


def cmd_fit(cfg, manifest=False, input_override=None):
    out = _outdir(cfg)
    fmts = _formats(cfg)
    source = input_override or cfg.get("fit", "input")
    if not source:
        raise ConfigError("fit.input (a trajectory/curve CSV) is required")
    header, rows = formats.read_csv(source)
    cols = {name: i for i, name in enumerate(header)}
    if "time_s" not in cols or not {"f3", "f3_fraction"} & set(cols):
        raise ConfigError(
            f"{source}: need columns time_s and f3 (or f3_fraction), got {header}")
    f3_col = cols.get("f3", cols.get("f3_fraction"))
    times = np.array([r[cols["time_s"]] for r in rows], dtype=float)
    f3 = np.array([r[f3_col] for r in rows], dtype=float)
    keep = np.isfinite(f3)
    sigma = None
    if "sigma" in cols:
        sigma = np.array([r[cols["sigma"]] for r in rows], dtype=float)[keep]
    counts = None
    if "n_counted" in cols:
        counts = np.array([r[cols["n_counted"]] for r in rows], dtype=float)[keep]
    curve = analysis.RelaxationCurve(times[keep], f3[keep], sigma=sigma,
                                     n_samples=counts)
    comparison = analysis.model_comparison(curve)
    single, chirped = comparison["single"], comparison["chirped"]
    eval_time = cfg.get("fit", "eval_time")
    formats.write_keyvalue(
        out / "fit.txt",
        single.rows() + chirped.rows()
        + [("f_statistic", comparison["f_statistic"]),
           ("p_value", comparison["p_value"]),
           ("preferred", comparison["preferred"]),
           ("tau_eval_s", chirped.tau_at(eval_time))])
    hdr, table = analysis.lifetime_table(
        {_params(cfg).detuning_nm: chirped}, eval_time=eval_time)
    formats.write_csv(out / "lifetimes.csv", hdr, table)
    if "png" in fmts:
        plots.save_fit_figure(out / "fit.png", curve, comparison)
    _emit_manifest(cfg, out, manifest)
    return 0


_COMMANDS = {
    "beam": cmd_beam,
    "scan": cmd_scan,
    "optimize-rc": cmd_optimize_rc,
    "mc": cmd_mc,
    "fit": cmd_fit,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="darkring",
        description="Dark toroidal trap workbench: beam shaping, focal scans, "
                    "Monte Carlo runs, and relaxation fits.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="INI run configuration")
        p.add_argument("--preset", help="name of a shipped preset config")
        p.add_argument("--out", help="output directory override")
        p.add_argument("--seed", type=int, help="RNG seed override")
        p.add_argument("--manifest", action="store_true",
                       help="write the resolved configuration next to outputs")
        if name == "fit":
            p.add_argument("--input", help="curve CSV (overrides fit.input)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve_config(args)
        kwargs = {"manifest": args.manifest}
        if args.command == "fit":
            kwargs["input_override"] = args.input
        return _COMMANDS[args.command](cfg, **kwargs)
    except (ConfigError, ParameterError) as exc:
        print(f"darkring: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TopologyError, DomainError, SamplingError) as exc:
        print(f"darkring: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except (BracketError, StabilityError, FitError) as exc:
        print(f"darkring: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"darkring: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DarkRingError as exc:
        print(f"darkring: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
