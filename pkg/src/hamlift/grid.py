"""
Uniform periodic 1-D grids, sampled wavefunctions and dense grid operators.

Positions are ``x_j = x_min + j dx`` for ``j = 0..N-1`` and momenta form the
dual lattice ``p_k = (k - N/2) dp`` with ``dp = 2 pi hbar / (N dx)``. Inner
products carry the weight ``dx``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "Grid",
    "WaveFunction",
    "GridOperator",
    "coherent_state",
    "gaussian_state",
    "phase_space_moments",
    "momentum_multiply",
    "momentum_matrix",
]


@dataclass(frozen=True)
class Grid:
    N: int
    x_min: float
    x_max: float
    hbar: float = 1.0

    def __post_init__(self):
        N = int(self.N)
        if N != self.N or N < 16 or N & (N - 1):
            raise ValueError(f"N must be a power of two >= 16, got {self.N!r}")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        object.__setattr__(self, "N", N)

    @classmethod
    def self_dual(cls, N: int, hbar: float = 1.0) -> "Grid":
        """Symmetric grid with equal position and momentum extents (``dx = dp``)."""
        half = 0.5 * np.sqrt(2 * np.pi * hbar * N)
        return cls(N, -half, half, hbar)

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        return self.length / self.N

    @property
    def dp(self) -> float:
        return 2 * np.pi * self.hbar / self.length

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.N)

    @property
    def p(self) -> np.ndarray:
        return self.dp * (np.arange(self.N) - self.N // 2)

    @property
    def p_fft(self) -> np.ndarray:
        """Momentum lattice in FFT order."""
        return 2 * np.pi * self.hbar * np.fft.fftfreq(self.N, self.dx)

    def to_dict(self) -> dict:
        return {"N": self.N, "x_min": self.x_min, "x_max": self.x_max, "hbar": self.hbar}


def momentum_multiply(grid: Grid, values, func: Callable) -> np.ndarray:
    """Apply the Fourier multiplier ``func(p)`` to sampled values."""
    values = np.asarray(values)
    mult = func(grid.p_fft).reshape((-1,) + (1,) * (values.ndim - 1))
    return np.fft.ifft(mult * np.fft.fft(values, axis=0), axis=0)


def momentum_matrix(grid: Grid, func: Callable = lambda p: p) -> np.ndarray:
    """Dense matrix of the Fourier multiplier ``func(p)`` acting on samples."""
    return momentum_multiply(grid, np.eye(grid.N, dtype=complex), func)


@dataclass
class WaveFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.N,):
            raise ValueError(f"expected {self.grid.N} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("wavefunction has non-finite amplitudes")
        self.values = v

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.dx))

    def inner(self, other: "WaveFunction") -> complex:
        """``<self, other>`` (antilinear in ``self``)."""
        self._same_grid(other)
        return complex(np.vdot(self.values, other.values) * self.grid.dx)

    def normalized(self) -> "WaveFunction":
        return WaveFunction(self.grid, self.values / self.norm())

    def distance(self, other: "WaveFunction") -> float:
        return (self - other).norm()

    def fidelity(self, other: "WaveFunction") -> float:
        """``|<a, b>| / (|a| |b|)``: overlap insensitive to global phase."""
        return abs(self.inner(other)) / (self.norm() * other.norm())

    def _same_grid(self, other):
        if other.grid != self.grid:
            raise ValueError("wavefunctions live on different grids")

    def __add__(self, other):
        self._same_grid(other)
        return WaveFunction(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._same_grid(other)
        return WaveFunction(self.grid, self.values - other.values)

    def __mul__(self, c):
        return WaveFunction(self.grid, self.values * c)

    __rmul__ = __mul__

    def __neg__(self):
        return WaveFunction(self.grid, -self.values)


def gaussian_state(grid: Grid, x0: float = 0.0, p0: float = 0.0, width: float | None = None) -> WaveFunction:
    """
    Normalized Gaussian ``exp(-(x - x0)^2 / (2 w^2)) exp(i p0 (x - x0/2) / hbar)``.

    The default width ``sqrt(hbar)`` gives the coherent state, whose
    position and momentum variances both equal ``hbar / 2``.
    """
    h = grid.hbar
    w = np.sqrt(h) if width is None else width
    x = grid.x
    vals = (np.pi * w * w) ** -0.25 * np.exp(-((x - x0) ** 2) / (2 * w * w)) * np.exp(1j * p0 * (x - 0.5 * x0) / h)
    return WaveFunction(grid, vals)


def coherent_state(grid: Grid, z0) -> WaveFunction:
    x0, p0 = np.asarray(z0, dtype=float)
    return gaussian_state(grid, x0, p0)


def phase_space_moments(psi: WaveFunction):
    """
    Means ``(<x>, <p>)`` and the symmetrized covariance matrix.

    The off-diagonal entry is ``Re <x p> - <x><p>``, i.e. the expectation of
    ``(xp + px)/2``. Moments are normalized by ``|psi|^2``.
    """
    g = psi.grid
    v = psi.values
    nrm = np.sum(np.abs(v) ** 2) * g.dx
    x = g.x
    pv = momentum_multiply(g, v, lambda p: p)
    ex = np.sum(x * np.abs(v) ** 2) * g.dx / nrm
    ep = np.real(np.vdot(v, pv)) * g.dx / nrm
    exx = np.sum(x * x * np.abs(v) ** 2) * g.dx / nrm
    epp = np.real(np.vdot(pv, pv)) * g.dx / nrm
    exp_ = np.real(np.vdot(x * v, pv)) * g.dx / nrm
    mean = np.array([ex, ep])
    cov = np.array([[exx - ex * ex, exp_ - ex * ep], [exp_ - ex * ep, epp - ep * ep]])
    return mean, cov


@dataclass
class GridOperator:
    """
    Linear operator on sampled wavefunctions.

    Either a dense ``matrix`` acting on sample vectors, or an ordered list of
    ``factors`` (callables on sample arrays) applied right to left.
    """

    grid: Grid
    matrix: np.ndarray | None = None
    factors: list = field(default_factory=list)
    label: str = ""

    def apply_values(self, v: np.ndarray) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix @ v
        for f in reversed(self.factors):
            v = f(v)
        return v

    def apply(self, psi: WaveFunction) -> WaveFunction:
        if psi.grid != self.grid:
            raise ValueError("operator and wavefunction live on different grids")
        return WaveFunction(self.grid, self.apply_values(psi.values))

    __call__ = apply

    def to_matrix(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        return np.stack([self.apply_values(e) for e in np.eye(self.grid.N, dtype=complex)], axis=1)

    def __matmul__(self, other: "GridOperator") -> "GridOperator":
        if other.grid != self.grid:
            raise ValueError("grid mismatch")
        if self.matrix is not None and other.matrix is not None:
            return GridOperator(self.grid, self.matrix @ other.matrix, label=f"{self.label}*{other.label}")
        left = [self.matrix.__matmul__] if self.matrix is not None else list(self.factors)
        right = [other.matrix.__matmul__] if other.matrix is not None else list(other.factors)
        return GridOperator(self.grid, factors=left + right, label=f"{self.label}*{other.label}")

    def hermiticity_residual(self) -> float:
        M = self.to_matrix()
        return float(np.max(np.abs(M - M.conj().T)))
