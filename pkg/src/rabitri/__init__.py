"""Three quantum Rabi cavities on a ring threaded by an artificial gauge
phase: exact photon-transfer dynamics, mean-field phases, quadratic
fluctuations, and critical-exponent extraction."""

from .errors import (ConvergenceError, CriticalPointError, DegeneracyWarning,
                     DomainError, FitRejected, InstabilityError,
                     ResourceError, TruncationWarning)
from .model import (MOMENTA, ModelParams, PhaseLabel, bare_coupling,
                    classify_phase, critical_coupling, critical_coupling_min,
                    critical_flux, softest_mode)
from .np_analytics import (MomentumMode, NpObservables, excitation_energies,
                           ground_energy_np, local_photon_np, mode,
                           observables_np, variance_p_np, variance_x_np)
from .meanfield import (Displacement, MeanFieldSolution, fsp_closed_form,
                        ground_energy_mf, residual_jacobian, residuals,
                        solve_displacements)
from .bogoliubov import (ParaunitarySolution, QuadraticForm, SrObservables,
                         build_m_matrix, diagonalize_paraunitary,
                         ground_energy_fluct, local_photon_sr, observables_sr,
                         variance_p_sr, variance_x_sr)
from .dynamics import (FockBasis, Trajectory, build_full_hamiltonian,
                       chirality_metric, evolve, exact_ground_energy,
                       initial_state, number_operators, write_trajectory_csv)
from .scaling import (ExponentReport, PowerLawFit, ReportEntry, SweepSpec,
                      ZPair, exponent_report, fit_power_law, format_report,
                      sweep, write_report_csv)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError", "CriticalPointError", "DegeneracyWarning",
    "DomainError", "FitRejected", "InstabilityError", "ResourceError",
    "TruncationWarning",
    "MOMENTA", "ModelParams", "PhaseLabel", "bare_coupling", "classify_phase",
    "critical_coupling", "critical_coupling_min", "critical_flux",
    "softest_mode",
    "MomentumMode", "NpObservables", "excitation_energies",
    "ground_energy_np", "local_photon_np", "mode", "observables_np",
    "variance_p_np", "variance_x_np",
    "Displacement", "MeanFieldSolution", "fsp_closed_form",
    "ground_energy_mf", "residual_jacobian", "residuals",
    "solve_displacements",
    "ParaunitarySolution", "QuadraticForm", "SrObservables", "build_m_matrix",
    "diagonalize_paraunitary", "ground_energy_fluct", "local_photon_sr",
    "observables_sr", "variance_p_sr", "variance_x_sr",
    "FockBasis", "Trajectory", "build_full_hamiltonian", "chirality_metric",
    "evolve", "exact_ground_energy", "initial_state", "number_operators",
    "write_trajectory_csv",
    "ExponentReport", "PowerLawFit", "ReportEntry", "SweepSpec", "ZPair",
    "exponent_report", "fit_power_law", "format_report", "sweep",
    "write_report_csv",
    "__version__",
]
