"""Dark toroidal optical trap workbench.

Pipeline: shape a Gaussian beam with a spiral-plus-ring phase mask, focus
it, map the focal intensity volume, convert to dipole potentials, run
Monte Carlo atom dynamics with stochastic spin relaxation, and fit the
resulting relaxation curves.
"""

from .constants import AtomicParams, detuning_from_nm
from .fields import (ComplexField, GridSpec, ModeSpectrum, PhaseMask,
                     apply_mask, decompose, default_grid, gaussian_beam,
                     lens_phase, lg_mode, ring_phase_mask, scan_basis_waist)
from .propagation import (IntensityVolume, angular_spectrum, focus_scan,
                          to_focal_region)
from .potential import (BarrierReport, PotentialField, barrier_report,
                        build_potential, dipole_potential, equal_barrier_rc,
                        masked_beam_volume, recoil_heating_rate,
                        red_trap_scattering_time, scattering_rates)
from .montecarlo import (AtomEnsemble, SimulationSchedule, TrajectoryRecord,
                         displaced_run, evolve, measure_f3_fraction,
                         sample_ensemble, synthetic_image)
from .analysis import (FitResult, RelaxationCurve, fit_chirped,
                       fit_single_exp, lifetime_table, model_comparison,
                       oscillation_frequency)

__version__ = "0.1.0"
