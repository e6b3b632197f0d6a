"""Figure rendering for the command-line reports.

Every report path drops a PNG next to its delimited output. Figures are
rendered off-screen; nothing here opens a window.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .constants import TWO_PI, hbar


def save_beam_figure(path, mask, focal, spectrum=None):
    """Phase mask next to the focal-plane intensity (and mode fractions)."""
    ncols = 3 if spectrum is not None else 2
    fig, axes = plt.subplots(1, ncols, figsize=(4 * ncols, 3.6))
    ext_mm = mask.grid.extent / 2 * 1e3
    im0 = axes[0].imshow(mask.phase, cmap="twilight", origin="lower",
                         extent=[-ext_mm, ext_mm, -ext_mm, ext_mm])
    axes[0].set_title("phase mask")
    axes[0].set_xlabel("x (mm)")
    axes[0].set_ylabel("y (mm)")
    fig.colorbar(im0, ax=axes[0], label="rad")
    fext = focal.grid.extent / 2 * 1e6
    show = min(fext, 200.0)
    im1 = axes[1].imshow(focal.intensity(), cmap="inferno", origin="lower",
                         extent=[-fext, fext, -fext, fext])
    axes[1].set_xlim(-show, show)
    axes[1].set_ylim(-show, show)
    axes[1].set_title("focal intensity")
    axes[1].set_xlabel("x (um)")
    axes[1].set_ylabel("y (um)")
    fig.colorbar(im1, ax=axes[1], label="W/m^2")
    if spectrum is not None:
        ps = sorted(spectrum.fractions)
        axes[2].bar(ps, [spectrum.fractions[p] for p in ps], color="#225588")
        axes[2].set_xlabel("radial index p")
        axes[2].set_ylabel("power fraction")
        axes[2].set_title(f"LG content, waist {spectrum.basis_waist * 1e3:.2f} mm")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_scan_figure(path, volume, report, params):
    """r-z cross-section with transverse and longitudinal profile panels."""
    hg = hbar * params.linewidth
    fig = plt.figure(figsize=(9, 7))
    gs = fig.add_gridspec(2, 2, width_ratios=(3, 1.3), height_ratios=(2, 1.1))
    ax_map = fig.add_subplot(gs[0, 0])
    ax_r = fig.add_subplot(gs[0, 1])
    ax_z = fig.add_subplot(gs[1, 0])

    zmm = volume.z * 1e3
    rum = volume.rho * 1e6
    im = ax_map.pcolormesh(zmm, rum, volume.intensity, cmap="inferno",
                           shading="auto")
    ax_map.set_xlabel("z (mm)")
    ax_map.set_ylabel("rho (um)")
    ax_map.set_title("intensity I(rho, z)")
    fig.colorbar(im, ax=ax_map, label="W/m^2")

    j0 = int(np.argmin(np.abs(volume.z)))
    from .potential import dipole_coefficient
    coeff = dipole_coefficient(params)
    prof_r = coeff * volume.intensity[:, j0] / hg
    ax_r.plot(prof_r, rum, "k-", lw=1)
    i_min = int(np.argmin(np.abs(volume.rho - report.ring_radius)))
    dr = volume.rho - report.ring_radius
    par = (report.u_min + 0.5 * params.mass * report.omega_perp ** 2 * dr ** 2) / hg
    band = np.abs(dr) < 1.3 * (report.barrier_inner / (0.5 * params.mass * report.omega_perp ** 2)) ** 0.5
    ax_r.plot(par[band], rum[band], "b--", lw=1)
    ax_r.set_xlabel("U (hbar*Gamma)")
    ax_r.set_title("transverse cut")
    ax_r.set_ylim(rum[0], rum[-1])

    from .potential import _minimum_path
    _, _, path_val = _minimum_path(volume, i_min)
    prof_z = coeff * path_val / hg
    ax_z.plot(zmm, prof_z, "k-", lw=1)
    parz = (report.u_min + 0.5 * params.mass * report.omega_par ** 2 * volume.z ** 2) / hg
    bandz = parz <= 1.2 * max(prof_z)
    ax_z.plot(zmm[bandz], parz[bandz], "b--", lw=1)
    ax_z.set_xlabel("z (mm)")
    ax_z.set_ylabel("U (hbar*Gamma)")
    ax_z.set_title("minimum-intensity path")
    fig.suptitle(
        f"ring {report.ring_radius * 1e6:.1f} um, depth "
        f"{report.depth / hg:.3f} hG, f_perp {report.omega_perp / TWO_PI:.0f} Hz, "
        f"f_par {report.omega_par / TWO_PI:.2f} Hz")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_rc_figure(path, results):
    """Equal-barrier Rc/w0 per azimuthal index."""
    fig, ax = plt.subplots(figsize=(4.5, 3.4))
    ells = sorted(results)
    ax.plot(ells, [results[e] for e in ells], "o-", color="#225588")
    ax.set_xlabel("azimuthal index")
    ax.set_ylabel("equal-barrier Rc/w0")
    ax.set_xticks(ells)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_mc_figure(path, record, fit_curves=None):
    """F=3 fraction and centroid-z trace of one run."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.5, 6), sharex=True)
    t_ms = record.times * 1e3
    ax1.plot(t_ms, record.f3_fraction, "k.", ms=3, label="simulated")
    if fit_curves:
        for label, times, values in fit_curves:
            ax1.plot(times * 1e3, values, lw=1.2, label=label)
    ax1.axhline(7 / 12, color="gray", lw=0.7, ls=":")
    ax1.set_ylabel("F=3 fraction")
    ax1.legend(loc="lower right", fontsize=8)
    ax2.plot(t_ms, record.centroid[:, 2] * 1e3, "k-", lw=0.9)
    ax2.set_xlabel("time (ms)")
    ax2.set_ylabel("centroid z (mm)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_fit_figure(path, curve, comparison):
    """Data with both fitted models overlaid."""
    fig, ax = plt.subplots(figsize=(6, 4))
    tt = np.linspace(curve.times[0], curve.times[-1], 400)
    ax.plot(curve.times * 1e3, curve.f3, "k.", ms=4, label="data")
    single, chirped = comparison["single"], comparison["chirped"]
    ax.plot(tt * 1e3, single.evaluate(tt), "b-", lw=1,
            label=f"single, tau {single.tau0 * 1e3:.0f} ms")
    ax.plot(tt * 1e3, chirped.evaluate(tt), "r--", lw=1,
            label=f"chirped, tau0 {chirped.tau0 * 1e3:.0f} ms")
    ax.set_xlabel("time (ms)")
    ax.set_ylabel("F=3 fraction")
    ax.legend(fontsize=8, title=f"preferred: {comparison['preferred']}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
