"""Relaxation-curve fitting and oscillation analysis.

Two models for the F=3 fraction: a single exponential C(1 - exp(-t/tau))
and the chirped variant where tau(t) = tau0 + beta*sqrt(t) grows as the
fast-scattering atoms finish first. Fits are multi-start trust-region least
squares on time axes normalized to the data span, so second-vs-millisecond
inputs land on identical dimensionless optimizations.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares
from scipy.stats import f as f_distribution

from .errors import FitError, ParameterError


@dataclass
class RelaxationCurve:
    """(time, F=3 fraction) samples with optional per-point errors."""

    times: np.ndarray            # s, strictly increasing
    f3: np.ndarray               # fraction in [0, 1]
    sigma: np.ndarray | None = None
    n_samples: np.ndarray | None = None   # counted atoms per point

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.f3 = np.asarray(self.f3, dtype=float)
        if np.any(np.diff(self.times) <= 0):
            raise ParameterError("times must be strictly increasing")
        if np.any((self.f3 < -1e-9) | (self.f3 > 1 + 1e-9)):
            raise ParameterError("f3 values outside [0, 1]")

    def weights(self) -> np.ndarray:
        """1/sigma per point; binomial errors when counts are available."""
        if self.sigma is not None:
            s = np.asarray(self.sigma, dtype=float)
        elif self.n_samples is not None:
            nc = np.maximum(np.asarray(self.n_samples, dtype=float), 1.0)
            s = np.sqrt(np.maximum(self.f3 * (1 - self.f3), 0.25 / nc) / nc)
        else:
            s = np.ones_like(self.f3)
        return 1.0 / np.maximum(s, 1e-4)

    @classmethod
    def from_record(cls, record) -> "RelaxationCurve":
        keep = np.isfinite(record.f3_fraction)
        return cls(times=record.times[keep], f3=record.f3_fraction[keep],
                   n_samples=record.n_counted[keep])


@dataclass
class FitResult:
    """Fitted parameters of one relaxation model."""

    model: str                   # "single" | "chirped"
    amplitude: float             # C
    tau0: float                  # s (tau for the single model)
    beta: float                  # s^(1/2) chirp slope, 0 for single
    uncertainties: tuple
    ssr: float                   # sum of squared (unweighted) residuals
    converged: bool
    beta_pinned: bool = False    # chirp hit the beta >= 0 boundary
    chi2: float = 0.0            # weighted residual sum

    def tau_at(self, t: float) -> float:
        return self.tau0 + self.beta * np.sqrt(t)

    def evaluate(self, times: np.ndarray) -> np.ndarray:
        tau = self.tau0 + self.beta * np.sqrt(np.asarray(times))
        return self.amplitude * (1.0 - np.exp(-np.asarray(times) / tau))

    def rows(self):
        return [("model", self.model), ("amplitude", self.amplitude),
                ("tau0_s", self.tau0), ("beta_sqrt_s", self.beta),
                ("ssr", self.ssr), ("converged", int(self.converged))]


def _prepare(curve: RelaxationCurve, min_points: int):
    if len(curve.times) < min_points:
        raise FitError(f"need at least {min_points} points, got {len(curve.times)}")
    if np.ptp(curve.f3) < 1e-9:
        raise FitError("degenerate fit: the curve is constant")
    t_scale = curve.times[-1]
    return curve.times / t_scale, curve.f3, curve.weights(), t_scale


def fit_single_exp(curve: RelaxationCurve) -> FitResult:
    """Least-squares C(1 - exp(-t/tau)) with multi-start tau."""
    ts, y, w, t_scale = _prepare(curve, 4)

    def residuals(p):
        C, tau = p
        return (C * (1.0 - np.exp(-ts / tau)) - y) * w

    c0 = float(np.clip(y[-max(len(y) // 5, 1):].mean(), 0.05, 1.0))
    best = None
    for tau_start in (0.1, 1.0 / 3.0, 1.0):
        sol = least_squares(residuals, [c0, tau_start],
                            bounds=([1e-9, 1e-6], [1.0, 1e3]),
                            xtol=1e-12, ftol=1e-12, gtol=1e-10)
        if best is None or sol.cost < best.cost:
            best = sol
    C, tau = best.x
    resid = C * (1.0 - np.exp(-ts / tau)) - y
    ssr = float(np.sum(resid ** 2))
    chi2 = float(np.sum((resid * w) ** 2))
    unc = _parameter_uncertainties(best, scale=(1.0, t_scale))
    # a rise faster than the first sample carries no decay information
    degenerate = tau < ts[0] or tau > 1e2 or C < 1e-6
    return FitResult(model="single", amplitude=float(C),
                     tau0=float(tau * t_scale), beta=0.0,
                     uncertainties=unc, ssr=ssr, chi2=chi2,
                     converged=bool(best.status > 0) and not degenerate)


def fit_chirped(curve: RelaxationCurve) -> FitResult:
    """Least-squares C(1 - exp(-t/(tau0 + beta sqrt(t)))).

    Starts include the single-exponential solution at beta = 0, so the
    chirped residual can never exceed the single one beyond solver
    tolerance. A fit pinned at beta = 0 is flagged.
    """
    ts, y, w, t_scale = _prepare(curve, 6)

    def residuals(p):
        C, tau0, beta = p
        tau = tau0 + beta * np.sqrt(ts)
        return (C * (1.0 - np.exp(-ts / tau)) - y) * w

    single = fit_single_exp(curve)
    starts = [
        [single.amplitude, single.tau0 / t_scale, 1e-9],
        [max(single.amplitude, 0.3), 0.02, 0.3],
        [max(single.amplitude, 0.3), 0.2, 0.05],
    ]
    best = None
    for st in starts:
        sol = least_squares(residuals, st,
                            bounds=([1e-9, 1e-6, 0.0], [1.0, 1e3, 1e3]),
                            xtol=1e-12, ftol=1e-12, gtol=1e-10)
        if best is None or sol.cost < best.cost:
            best = sol
    C, tau0, beta = best.x
    tau = tau0 + beta * np.sqrt(ts)
    resid = C * (1.0 - np.exp(-ts / tau)) - y
    ssr = float(np.sum(resid ** 2))
    chi2 = float(np.sum((resid * w) ** 2))
    unc = _parameter_uncertainties(best, scale=(1.0, t_scale, np.sqrt(t_scale)))
    degenerate = (tau[0] < ts[0]) or tau0 > 1e2 or C < 1e-6
    return FitResult(model="chirped", amplitude=float(C),
                     tau0=float(tau0 * t_scale),
                     beta=float(beta * np.sqrt(t_scale)),
                     uncertainties=unc, ssr=ssr, chi2=chi2,
                     converged=bool(best.status > 0) and not degenerate,
                     beta_pinned=bool(beta < 1e-8))


def _parameter_uncertainties(sol, scale) -> tuple:
    """1-sigma estimates from the weighted Jacobian, rescaled to lab units."""
    try:
        J = sol.jac
        dof = max(J.shape[0] - J.shape[1], 1)
        cov = np.linalg.inv(J.T @ J) * 2.0 * sol.cost / dof
        err = np.sqrt(np.maximum(np.diag(cov), 0.0))
        return tuple(float(e * s) for e, s in zip(err, scale))
    except np.linalg.LinAlgError:
        return tuple(np.nan for _ in scale)


def model_comparison(curve: RelaxationCurve,
                     single: FitResult | None = None,
                     chirped: FitResult | None = None) -> dict:
    """F-test of the chirped model against the nested single exponential.

    The chirped model is preferred when its extra parameter reduces the
    residual sum enough to clear the 95% point of F(1, n-3).
    """
    single = single or fit_single_exp(curve)
    chirped = chirped or fit_chirped(curve)
    if not (single.converged and chirped.converged):
        raise FitError("model comparison requires both fits to converge")
    n = len(curve.times)
    # weighted residual sums so heteroscedastic (binomial) errors count
    ssr_s, ssr_c = single.chi2, max(chirped.chi2, 1e-300)
    f_stat = (ssr_s - ssr_c) / (ssr_c / (n - 3))
    p_value = float(f_distribution.sf(max(f_stat, 0.0), 1, n - 3))
    return {
        "single": single, "chirped": chirped,
        "f_statistic": float(f_stat), "p_value": p_value,
        "preferred": "chirped" if (p_value < 0.05 and not chirped.beta_pinned)
                     else "single",
    }


def oscillation_frequency(times: np.ndarray, trace: np.ndarray) -> dict:
    """Frequency and amplitude of a (damped) oscillating centroid trace.

    Seeds a damped-cosine least-squares fit from the discrete-spectrum peak;
    raises FitError when no peak rises above the noise floor.
    """
    times = np.asarray(times, dtype=float)
    trace = np.asarray(trace, dtype=float)
    keep = np.isfinite(trace)
    times, trace = times[keep], trace[keep]
    if len(times) < 8:
        raise FitError("trace too short for spectral analysis")
    dt = float(np.median(np.diff(times)))
    y0 = trace - trace.mean()
    spectrum = np.abs(np.fft.rfft(y0 * np.hanning(len(y0))))
    freqs = np.fft.rfftfreq(len(y0), d=dt)
    pk = 1 + int(np.argmax(spectrum[1:]))
    floor = np.median(spectrum[1:])
    if spectrum[pk] < 4.0 * floor:
        raise FitError("no spectral peak above the noise floor")
    f_seed = freqs[pk]

    def residuals(p):
        amp, f, phase, damp, offset = p
        return (amp * np.exp(-damp * times) * np.cos(2 * np.pi * f * times + phase)
                + offset - trace)

    a_seed = float(y0.std() * np.sqrt(2.0))
    best = None
    for phase0 in (0.0, np.pi / 2, np.pi):
        sol = least_squares(
            residuals, [a_seed, f_seed, phase0, 0.5, trace.mean()],
            bounds=([0.0, f_seed * 0.5, -2 * np.pi, 0.0, -np.inf],
                    [np.inf, f_seed * 2.0, 2 * np.pi, 50.0, np.inf]))
        if best is None or sol.cost < best.cost:
            best = sol
    amp, f_fit, phase, damp, offset = best.x
    span_periods = (times[-1] - times[0]) * f_fit
    if span_periods < 2.0:
        raise FitError(f"trace spans only {span_periods:.1f} oscillation periods")
    return {"frequency": float(f_fit), "amplitude": float(abs(amp)),
            "damping": float(damp), "seed_frequency": float(f_seed)}


def lifetime_table(fits_by_detuning: dict, eval_time: float = 0.5):
    """CSV-ready rows (detuning_nm, tau0, tau(eval_time), C, beta)."""
    hdr = ["detuning_nm", "tau0_s", f"tau_{int(eval_time * 1e3)}ms_s",
           "amplitude", "beta_sqrt_s"]
    rows = []
    for dnm in sorted(fits_by_detuning):
        fit = fits_by_detuning[dnm]
        rows.append([dnm, fit.tau0, fit.tau_at(eval_time), fit.amplitude,
                     fit.beta])
    return hdr, rows
