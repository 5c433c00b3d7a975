"""
hamlift: Hamiltonian flows on phase space and their quantum lifts.

Submodules
----------
phase_space       symplectic algebra and quadratic generating functions
hamiltonian_flow  flows, variational Jacobians, Banyaga reconstruction, extended phase space
metaplectic       quadratic Fourier transforms on a grid
weyl              tau-quantization, Heisenberg-Weyl operators, symplectic covariance
correspondence    Schrodinger propagation and the classical/quantum round trip
cli               the ``hamlift`` command
"""

from .correspondence import CorrespondenceReport, Propagator, correspondence_roundtrip, propagate_schrodinger
from .grid import Grid, WaveFunction, coherent_state, gaussian_state
from .hamiltonian_flow import (
    FlowDivergenceError,
    FlowMap,
    Hamiltonian,
    QuadraticHamiltonian,
    banyaga_reconstruct,
    flow,
    integrate_flow,
    integrate_variational,
)
from .metaplectic import AliasingError, apply_quadratic_fourier, metaplectic_matrix
from .phase_space import (
    PhaseSpacePoint,
    QuadraticGeneratingFunction,
    generating_to_symplectic,
    is_symplectic,
    symplectic_form,
    symplectic_to_generating,
)
from .weyl import Symbol, covariance_residual, kernel_to_symbol, symbol_to_kernel

__version__ = "0.1.0"

__all__ = [
    "AliasingError",
    "CorrespondenceReport",
    "FlowDivergenceError",
    "FlowMap",
    "Grid",
    "Hamiltonian",
    "PhaseSpacePoint",
    "Propagator",
    "QuadraticGeneratingFunction",
    "QuadraticHamiltonian",
    "Symbol",
    "WaveFunction",
    "apply_quadratic_fourier",
    "banyaga_reconstruct",
    "coherent_state",
    "correspondence_roundtrip",
    "covariance_residual",
    "flow",
    "gaussian_state",
    "generating_to_symplectic",
    "integrate_flow",
    "integrate_variational",
    "is_symplectic",
    "kernel_to_symbol",
    "metaplectic_matrix",
    "propagate_schrodinger",
    "symbol_to_kernel",
    "symplectic_form",
    "symplectic_to_generating",
]
