"""
tau-ordered quantization of phase-space symbols on a 1-D grid.

The operator of a symbol ``a`` at ordering ``tau`` has kernel

    K(x, y) = (2 pi hbar)^-1 sum_p exp(i p (x - y) / hbar) a((1 - tau) x + tau y, p) dp

over the grid's momentum lattice; ``tau = 1/2`` is the Weyl rule. Operators
are returned as matrices acting on sample vectors, ``(A psi)_j = sum_l
K_jl psi_l dx``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import Grid, GridOperator, WaveFunction, coherent_state, momentum_matrix
from .hamiltonian_flow import QuadraticHamiltonian
from .metaplectic import apply_quadratic_fourier, project_metaplectic
from .phase_space import QuadraticGeneratingFunction, dual_generating

__all__ = [
    "Symbol",
    "KernelMatrix",
    "symbol_to_kernel",
    "kernel_to_symbol",
    "tau_operator",
    "apply_tau_operator",
    "weyl_quantize_quadratic",
    "heisenberg_weyl",
    "symplectic_fourier",
    "apply_weyl_via_hw",
    "covariance_residual",
    "covariance_probes",
    "SYMBOLS",
]

_CHUNK = 1 << 22


@dataclass
class Symbol:
    """
    Phase-space function ``a(x, p)``.

    ``func`` must broadcast over array arguments. ``depends`` narrows the
    variables the symbol actually uses ("x", "p" or "xp") and enables fast
    paths; ``table`` holds lattice samples for symbols produced numerically.
    """

    func: Callable | None = None
    label: str = ""
    depends: str = "xp"
    table: np.ndarray | None = None
    grid: Grid | None = None
    kinetic: Callable | None = None
    potential: Callable | None = None

    @classmethod
    def separable(cls, kinetic: Callable, potential: Callable, label: str = "") -> "Symbol":
        """``a(x, p) = T(p) + V(x)``; the parts are kept for split-step propagation."""
        return cls(lambda x, p: kinetic(p) + potential(x), label, "xp", kinetic=kinetic, potential=potential)

    @property
    def is_separable(self) -> bool:
        return self.kinetic is not None and self.potential is not None

    def __call__(self, x, p):
        if self.func is None:
            return self._from_table(x, p)
        return np.asarray(self.func(x, p))

    def sample(self, grid: Grid) -> np.ndarray:
        """Values on the lattice, shape ``(N_x, N_p)``."""
        if self.table is not None and grid == self.grid:
            return self.table
        x, p = grid.x[:, None], grid.p[None, :]
        return np.broadcast_to(self(x, p), (grid.N, grid.N)).astype(complex)

    def is_real(self, grid: Grid, tol: float = 0.0) -> bool:
        return bool(np.max(np.abs(np.imag(self.sample(grid)))) <= tol)

    def compose_linear(self, m: np.ndarray, label: str = "") -> "Symbol":
        """``z -> a(m z)`` for a 2x2 matrix ``m``."""
        m = np.asarray(m, dtype=float)
        return Symbol(lambda x, p: self(m[0, 0] * x + m[0, 1] * p, m[1, 0] * x + m[1, 1] * p),
                      label or f"{self.label} o m")

    def _from_table(self, x, p):
        # trigonometric interpolation in x, exact lookup on the momentum lattice
        g = self.grid
        x, p = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(p, dtype=float))
        k = np.rint((p - g.p[0]) / g.dp).astype(int)
        if np.any(np.abs(p - g.p[0] - k * g.dp) > 1e-9 * g.dp) or np.any((k < 0) | (k >= g.N)):
            raise ValueError("sampled symbols can only be evaluated on the momentum lattice")
        coef = np.fft.fft(self.table, axis=0) / g.N
        freq = np.fft.fftfreq(g.N) * g.N
        phase = np.exp(2j * np.pi * freq[None, :] * ((x.ravel() - g.x_min) / g.length)[:, None])
        vals = np.einsum("mf,fm->m", phase, coef[:, k.ravel()])
        return vals.reshape(x.shape)


SYMBOLS = {
    "1": lambda: Symbol(lambda x, p: np.ones(np.broadcast(x, p).shape), "1", "x"),
    "x": lambda: Symbol(lambda x, p: x + 0 * p, "x", "x"),
    "p": lambda: Symbol(lambda x, p: p + 0 * x, "p", "p"),
    "x2": lambda: Symbol(lambda x, p: x * x + 0 * p, "x2", "x"),
    "p2": lambda: Symbol(lambda x, p: p * p + 0 * x, "p2", "p"),
    "xp": lambda: Symbol(lambda x, p: x * p, "xp"),
    "gauss": lambda: Symbol(lambda x, p: np.exp(-0.5 * (x * x + p * p)), "gauss"),
    "oscillator": lambda: Symbol.separable(lambda p: 0.5 * p * p, lambda x: 0.5 * x * x, "oscillator"),
    "quartic": lambda: Symbol.separable(lambda p: 0.5 * p * p, lambda x: 0.25 * x ** 4, "quartic"),
}


@dataclass
class KernelMatrix:
    K: np.ndarray
    grid: Grid
    tau: float

    def operator(self) -> GridOperator:
        return GridOperator(self.grid, self.K * self.grid.dx, label=f"Op_{self.tau:g}")


def _check_tau(tau):
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")


def _edge_warning(a: Symbol, grid: Grid, tau: float):
    if a.depends == "x":
        return
    xs = grid.x[:: max(1, grid.N // 32)]
    vals = np.abs(np.broadcast_to(a(xs[:, None], grid.p[None, :]), (xs.size, grid.N)))
    peak = vals.max()
    if peak > 0 and max(vals[:, 0].max(), vals[:, -1].max()) > 1e-8 * peak:
        warnings.warn(f"symbol {a.label!r} does not decay at the momentum lattice edge; kernel may alias",
                      stacklevel=3)


def symbol_to_kernel(a: Symbol, tau: float, grid: Grid, warn: bool = True) -> KernelMatrix:
    """
    Kernel of the ``tau``-operator of ``a`` on ``grid``.

    The intermediate point ``(1 - tau) x + tau y`` uses the unwrapped grid
    coordinates; the phase ``exp(i p (x - y))`` is periodic by construction.
    """
    _check_tau(tau)
    h, N, dx, dp = grid.hbar, grid.N, grid.dx, grid.dp
    x, p = grid.x, grid.p
    c = dp / (2 * np.pi * h)
    if warn:
        _edge_warning(a, grid, tau)
    if a.depends == "x":
        return KernelMatrix(np.diag(np.asarray(a(x, 0.0 * x), dtype=complex)) / dx, grid, tau)
    if a.depends == "p":
        mult = np.asarray(a(0.0 * p, p), dtype=complex)
        return KernelMatrix(momentum_matrix(grid, lambda q: mult[np.rint(q / dp).astype(int) + N // 2]) / dx,
                            grid, tau)
    if a.is_separable:
        # T(p) + V(x): both parts are tau-independent
        T = np.asarray(a.kinetic(p), dtype=complex)
        Km = momentum_matrix(grid, lambda q: T[np.rint(q / dp).astype(int) + N // 2])
        return KernelMatrix((Km + np.diag(np.asarray(a.potential(x), dtype=complex))) / dx, grid, tau)
    E = np.exp(1j * np.outer(x, p) / h)
    Ec = E.conj()
    K = np.empty((N, N), dtype=complex)
    rows = max(1, _CHUNK // (N * N))
    for j0 in range(0, N, rows):
        j = slice(j0, min(N, j0 + rows))
        m = (1 - tau) * x[j, None] + tau * x[None, :]
        A = np.broadcast_to(a(m[:, :, None], p[None, None, :]), m.shape + (N,))
        # K[j, l] = sum_k A[j, l, k] E[j, k] conj(E[l, k]) as batched matrix-vector products
        K[j] = c * np.matmul(A * Ec, E[j, :, None])[..., 0]
    return KernelMatrix(K, grid, tau)


def _fourier_shift(cols: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    """Band-limited shift of each column ``c`` of ``cols`` by ``shifts[c]`` samples."""
    N = cols.shape[0]
    C = np.fft.fft(cols, axis=0)
    k = np.fft.fftfreq(N) * N
    ph = np.exp(-2j * np.pi * np.outer(k, shifts) / N)
    ph[N // 2] = np.cos(np.pi * shifts)
    return np.fft.ifft(C * ph, axis=0)


def kernel_to_symbol(kernel: KernelMatrix, tau: float | None = None) -> Symbol:
    """
    Recover the ``tau``-symbol ``a(x, p) = int exp(-i p y / hbar) K(x + tau y, x - (1 - tau) y) dy``.

    Off-lattice kernel values along the sheared lines are obtained by
    band-limited (Fourier) interpolation along the diagonals of ``K``. The
    kernel is taken to vanish outside the grid box, so the round trip is
    accurate for symbols that decay inside it.
    """
    tau = kernel.tau if tau is None else tau
    _check_tau(tau)
    g = kernel.grid
    N, dx, h = g.N, g.dx, g.hbar
    r = np.arange(N) - N // 2
    idx = np.arange(N)
    # diag[l, r] = K(x_l + y_r, x_l); pairs leaving the box are zero because
    # the kernel was built with unwrapped intermediate points
    rows = idx[:, None] + r[None, :]
    diag = np.where((rows >= 0) & (rows < N), kernel.K[rows % N, idx[:, None]], 0.0)
    # need v = x_j - (1 - tau) y_r, i.e. column r shifted by (1 - tau) r
    D = _fourier_shift(diag, (1 - tau) * r)
    F = np.exp(-1j * np.outer(r * dx, g.p) / h) * dx
    table = D @ F
    return Symbol(None, f"symbol(tau={tau:g})", table=table, grid=g)


def tau_operator(a: Symbol, tau: float, grid: Grid) -> GridOperator:
    return symbol_to_kernel(a, tau, grid).operator()


def apply_tau_operator(a: Symbol, tau: float, psi: WaveFunction) -> WaveFunction:
    return tau_operator(a, tau, psi.grid).apply(psi)


def weyl_quantize_quadratic(H: QuadraticHamiltonian, grid: Grid, t: float = 0.0) -> GridOperator:
    """
    Weyl operator of ``1/2 A x^2 + B x p + 1/2 C p^2``:
    ``1/2 A x^2 + B (x p + p x)/2 + 1/2 C p^2`` with spectral ``p = -i hbar d/dx``.
    """
    if H.n != 1:
        raise ValueError("grid quantization supports n = 1 only")
    A, B, C = (float(v[0, 0]) for v in H.blocks(t))
    X = np.diag(grid.x).astype(complex)
    Pm = momentum_matrix(grid)
    Hm = 0.5 * A * X @ X + 0.5 * B * (X @ Pm + Pm @ X) + 0.5 * C * Pm @ Pm
    return GridOperator(grid, 0.5 * (Hm + Hm.conj().T), label=f"Weyl({H.label})")


def _snap(value, step, what):
    k = np.rint(value / step)
    if abs(value - k * step) > 1e-9 * max(step, abs(value)):
        warnings.warn(f"{what}={value:g} is off the lattice; snapped to {k * step:g}", stacklevel=3)
    return int(k)


def heisenberg_weyl(z, psi: WaveFunction) -> WaveFunction:
    """``T(z') psi(x) = exp(i (p' x - p' x' / 2) / hbar) psi(x - x')`` on the periodic lattice."""
    g = psi.grid
    x0, p0 = np.asarray(getattr(z, "z", z), dtype=float)
    k = _snap(x0, g.dx, "x'")
    m = _snap(p0, g.dp, "p'")
    xs, ps = k * g.dx, m * g.dp
    vals = np.exp(1j * (ps * g.x - 0.5 * ps * xs) / g.hbar) * np.roll(psi.values, k)
    return WaveFunction(g, vals)


def symplectic_fourier(a: Symbol, grid: Grid) -> Symbol:
    """
    ``a_sigma(z) = (2 pi hbar)^-1 int exp(-i sigma(z, z'') / hbar) a(z'') dz''``.

    The position and momentum lattices are mutually dual, so the result is
    again tabulated on the grid's phase lattice.
    """
    h = grid.hbar
    x, p = grid.x, grid.p
    A = a.sample(grid)
    Ex = np.exp(-1j * np.outer(p, x) / h)
    Ep = np.exp(1j * np.outer(x, p) / h)
    table = (grid.dx * grid.dp / (2 * np.pi * h)) * (Ep @ A.T @ Ex.T)
    return Symbol(None, f"sigmaF({a.label})", table=table, grid=grid)


def apply_weyl_via_hw(a: Symbol, psi: WaveFunction) -> WaveFunction:
    """
    Weyl operator as a superposition of Heisenberg-Weyl displacements,
    ``(2 pi hbar)^-1 int a_sigma(z') T(z') psi dz'``.
    """
    g = psi.grid
    h = g.hbar
    shift = g.x_min / g.dx
    if abs(shift - round(shift)) > 1e-9:
        raise ValueError("x_min must be a multiple of dx for lattice displacements")
    s = np.arange(g.N) + int(round(shift))
    xs = s * g.dx
    asig = symplectic_fourier(a, g).table
    V = np.exp(1j * np.outer(g.x, g.p) / h) @ (asig * np.exp(-0.5j * np.outer(xs, g.p) / h)).T
    idx = (np.arange(g.N)[:, None] - s[None, :]) % g.N
    out = (g.dx * g.dp / (2 * np.pi * h)) * np.sum(V * psi.values[idx], axis=1)
    return WaveFunction(g, out)


def covariance_probes(grid: Grid, count: int = 10):
    """Fixed set of coherent states used to measure covariance residuals."""
    ang = 2 * np.pi * np.arange(count) / count
    rad = 0.5 + 0.15 * np.arange(count)
    return [coherent_state(grid, (r * np.cos(t), r * np.sin(t))) for r, t in zip(rad, ang)]


def covariance_residual(a: Symbol, W: QuadraticGeneratingFunction | None, tau: float, grid: Grid,
                        probes=None) -> float:
    """
    ``max || Op(a o s^-1) psi - S Op(a) S^-1 psi ||`` over the probe states,
    where ``S = S^W`` and ``s`` its projection.
    """
    probes = covariance_probes(grid) if probes is None else probes
    if W is None:
        return 0.0
    s = project_metaplectic(W)
    b = a.compose_linear(np.linalg.inv(s), label=f"{a.label} o s^-1")
    b.depends = "xp"
    Ob = tau_operator(b, tau, grid)
    Oa = tau_operator(a, tau, grid)
    Ws = dual_generating(W)
    worst = 0.0
    for psi in probes:
        lhs = Ob.apply(psi)
        rhs = apply_quadratic_fourier(W, Oa.apply(apply_quadratic_fourier(Ws, psi)))
        worst = max(worst, lhs.distance(rhs))
    return worst
