"""Quantum resonances of the atomic kicked rotor.

Exact Floquet propagation of quasimomentum fibers plus the closed-form
comb-shaped Bloch-wave theory of the resonant dynamics, cross-validated
against each other on the standard experimental scenarios.
"""

from .core import (
    Coherence,
    CSBWDistribution,
    Ensemble,
    Fiber,
    ObservableSeries,
    SimParams,
    min_ladder_half_width,
    reduced_from_physical,
    validate_params,
)
from .ensembles import (
    QuadratureSpec,
    Scheme,
    csbw_weights,
    default_xi_grid,
    make_bragg_superposition,
    make_gaussian,
    make_plane_wave,
    make_square,
    matched_sigma,
)
from .observables import fit_rate, mean_energy, mean_momentum, series_from_snapshots
from .propagator import (
    KickPlan,
    evolve,
    evolve_observables,
    free_step,
    kick_step,
    make_kick_plan,
    recursion_step_csbw,
)

__version__ = "0.1.0"

__all__ = [
    "Coherence", "CSBWDistribution", "Ensemble", "Fiber", "ObservableSeries",
    "SimParams", "min_ladder_half_width", "reduced_from_physical",
    "validate_params", "QuadratureSpec", "Scheme", "csbw_weights",
    "default_xi_grid", "make_bragg_superposition", "make_gaussian",
    "make_plane_wave", "make_square", "matched_sigma", "fit_rate",
    "mean_energy", "mean_momentum", "series_from_snapshots", "KickPlan",
    "evolve", "evolve_observables", "free_step", "kick_step",
    "make_kick_plan", "recursion_step_csbw",
]
