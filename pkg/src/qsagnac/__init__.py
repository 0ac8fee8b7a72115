"""Quantum white-light interferometry in a nonlinear Sagnac loop: simulate and fit."""
from .acquisition import (Interferogram, ScanPlan, SourceModel, mc_ensemble, poisson_counts,
                          run_scan)
from .errors import (DegenerateStateError, DomainError, InsufficientDataError,
                     PumpMismatchError, RankDeficiencyError)
from .estimator import (EnsembleStats, FitResult, NormalizedFringe, TodResult, ensemble_stats,
                        fit_cd, fit_ensemble, fit_interferogram, fit_tod, normalize,
                        subtract_reference)
from .io import RunConfig, load_config, read_interferogram, save_config, write_interferogram
from .optics import (C, DispersionParameter, FringeWidth, SpectralPoint, TaylorDispersion,
                     beta2_to_d, branch_phase, d_to_beta2, detuning, fringe_width, pair_phase)
from .rangemap import RangeMapGrid, classify, grid_axis, range_map
from .rates import (FilterPair, NoiseSpec, PhaseMatchingEnvelope, coincidence_rate,
                    envelope_value, idler_partner, singles_rate)
from .state import (DirectionalPhase, PumpState, TwoPhotonState, coincidence_probability,
                    diagonal_fringe, propagate, state_visibility)
from .workflows import precision_run, pump_grid, sweep

__version__ = "0.1.0"
