"""
Quadratic Fourier transforms on a 1-D grid.

For a generating function ``W = (P, L, Q, m)`` the operator

    S^W psi(x) = (2 pi i hbar)^(-1/2) i^m sqrt|L| int exp(i W(x, x') / hbar) psi(x') dx'

is evaluated as chirp * scaled-DFT * chirp. The scaled DFT between the
input and output lattices is a chirp-z transform, so the discrete sum is
exact (no periodic wrap). A dense O(N^2) quadrature is kept as a
cross-check.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import czt

from .grid import Grid, GridOperator, WaveFunction
from .phase_space import QuadraticGeneratingFunction, dual_generating, generating_to_symplectic

__all__ = [
    "AliasingError",
    "apply_quadratic_fourier",
    "quadratic_fourier_operator",
    "project_metaplectic",
    "compose_metaplectic",
    "metaplectic_matrix",
    "inverse_operator",
    "required_frequency",
]

SUPPORT_TOL = 1e-10


class AliasingError(ValueError):
    """The grid cannot resolve the chirps of a quadratic Fourier transform."""


def _scalar(W: QuadraticGeneratingFunction):
    if W.n != 1:
        raise ValueError("grid operators support n = 1 only")
    return float(W.P[0, 0]), float(W.L[0, 0]), float(W.Q[0, 0])


def _prefactor(W: QuadraticGeneratingFunction, hbar: float) -> complex:
    L = W.L[0, 0]
    return (2 * np.pi * hbar) ** -0.5 * np.exp(-0.25j * np.pi) * (1j ** W.m) * np.sqrt(abs(L))


def _support_and_band(grid: Grid, v: np.ndarray):
    a = np.abs(v)
    if not np.any(a):
        return 0.0, 0.0
    xs = grid.x[a > SUPPORT_TOL * a.max()]
    spec = np.abs(np.fft.fft(v))
    ps = grid.p_fft[spec > SUPPORT_TOL * spec.max()]
    return float(np.max(np.abs(xs))), float(np.max(np.abs(ps)))


def required_frequency(W: QuadraticGeneratingFunction, grid: Grid, support: float, band: float) -> float:
    """
    Highest frequency of ``exp(i(Q x'^2/2 - L x x')/hbar) psi(x')`` over the
    grid's outputs ``x``, for ``psi`` supported in ``|x'| <= support`` with
    momenta ``|p| <= band``. Resolution needs it below ``2 pi / dx``.
    """
    P, L, Q = _scalar(W)
    x_out = max(abs(grid.x_min), abs(grid.x_max))
    return (abs(Q) * support + abs(L) * x_out + band) / grid.hbar


def _check_resolution(W, grid: Grid, v: np.ndarray):
    P, L, Q = _scalar(W)
    freq = required_frequency(W, grid, *_support_and_band(grid, v))
    limit = 2 * np.pi / grid.dx
    if freq >= limit:
        raise AliasingError(
            f"quadratic transform (P={P:g}, L={L:g}, Q={Q:g}) needs frequency {freq:.4g} "
            f"but the grid resolves < {limit:.4g}; refine dx or shrink the state"
        )


def _apply_values(W: QuadraticGeneratingFunction, grid: Grid, v: np.ndarray, method: str = "chirp",
                  check: bool = True) -> np.ndarray:
    P, L, Q = _scalar(W)
    h = grid.hbar
    x = grid.x
    dx = grid.dx
    if check:
        _check_resolution(W, grid, v)
    f = np.exp(0.5j * Q * x * x / h) * v
    if method == "chirp":
        x0 = grid.x_min
        j = np.arange(grid.N)
        pre = np.exp(-1j * L * x0 * dx * j / h)
        g = np.exp(-1j * L * x0 * x0 / h) * pre * czt(pre * f, grid.N, np.exp(-1j * L * dx * dx / h), 1.0)
    elif method == "direct":
        g = np.exp(-1j * L * np.outer(x, x) / h) @ f
    else:
        raise ValueError(f"unknown method {method!r}")
    return _prefactor(W, h) * np.exp(0.5j * P * x * x / h) * g * dx


def apply_quadratic_fourier(W: QuadraticGeneratingFunction, psi: WaveFunction, method: str = "chirp",
                            check: bool = True) -> WaveFunction:
    """
    Apply ``S^W`` to a wavefunction.

    Parameters
    ----------
    method : {"chirp", "direct"}
        Chirp-z evaluation or the dense quadrature oracle.
    check : bool
        Raise :class:`AliasingError` if the integrand is under-resolved.
    """
    return WaveFunction(psi.grid, _apply_values(W, psi.grid, psi.values, method, check))


def quadratic_fourier_operator(W: QuadraticGeneratingFunction, grid: Grid, check: bool = True) -> GridOperator:
    _scalar(W)
    return GridOperator(grid, factors=[lambda v: _apply_values(W, grid, v, check=check)], label="S^W")


def metaplectic_matrix(W: QuadraticGeneratingFunction, grid: Grid) -> np.ndarray:
    """Dense matrix of ``S^W`` on sample vectors (the quadrature oracle)."""
    _scalar(W)
    x = grid.x
    P, L, Q = _scalar(W)
    h = grid.hbar
    kernel = np.exp(1j * (0.5 * P * x[:, None] ** 2 - L * np.outer(x, x) + 0.5 * Q * x[None, :] ** 2) / h)
    return _prefactor(W, h) * kernel * grid.dx


def project_metaplectic(W: QuadraticGeneratingFunction) -> np.ndarray:
    """Symplectic matrix covered by ``S^W``."""
    return generating_to_symplectic(W)


def compose_metaplectic(ops, grid: Grid, check: bool = True) -> GridOperator:
    """
    Product ``S^{W_1} S^{W_2} ... S^{W_k}`` (``W_k`` acts first).

    ``ops`` may mix generating functions and :class:`GridOperator` instances
    on the same grid.
    """
    factors = []
    for op in ops:
        if isinstance(op, GridOperator):
            if op.grid != grid:
                raise ValueError("grid mismatch in metaplectic composition")
            factors.append(op.apply_values)
        else:
            _scalar(op)
            factors.append(lambda v, W=op: _apply_values(W, grid, v, check=check))
    return GridOperator(grid, factors=factors, label="prod S^W")


def inverse_operator(W: QuadraticGeneratingFunction, grid: Grid) -> GridOperator:
    return quadratic_fourier_operator(dual_generating(W), grid)
