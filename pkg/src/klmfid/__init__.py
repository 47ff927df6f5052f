"""Optimal channel fidelities and ancilla states for high-fidelity KLM teleportation."""

from .ancilla import AncillaCoefficients, custom, optimal_u, plus_optimal_v, uniform_klm
from .estimators import ChannelFidelityTransformer, OptimalAncilla
from .fidelity import (
    FidelityReport,
    QubitState,
    asymptotics,
    channel_fidelity,
    channel_fidelity_quadrature,
    fidelity_bounds,
    fidelity_report,
    lambda_n,
    outcome_probability,
    p_u_plus,
    quasi_state,
    success_probability,
)
from .spectral import SymTridiagonal, build_a, build_a_tilde, largest_eigenpair, solve_theta

__version__ = "0.1.0"

__all__ = [
    "AncillaCoefficients",
    "ChannelFidelityTransformer",
    "FidelityReport",
    "OptimalAncilla",
    "QubitState",
    "SymTridiagonal",
    "asymptotics",
    "build_a",
    "build_a_tilde",
    "channel_fidelity",
    "channel_fidelity_quadrature",
    "custom",
    "fidelity_bounds",
    "fidelity_report",
    "lambda_n",
    "largest_eigenpair",
    "optimal_u",
    "outcome_probability",
    "p_u_plus",
    "plus_optimal_v",
    "quasi_state",
    "solve_theta",
    "success_probability",
    "uniform_klm",
]
