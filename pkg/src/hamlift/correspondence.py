"""
Schrodinger propagation and the classical/quantum dictionary for it.

A quantum Hamiltonian is either a :class:`QuadraticHamiltonian` (quantized
by the Weyl rule) or a :class:`Symbol`. The unitary group is
``F_t = exp(-i t H / hbar)``, computed in one of three ways:

``eigensolve``
    dense Hermitian eigendecomposition of the Weyl operator;
``split_step``
    Strang splitting ``exp(-i V h/2) exp(-i T h) exp(-i V h/2)`` for
    ``H = T(p) + V(x)``;
``metaplectic``
    quadratic ``H`` only: the classical flow ``S_t = exp(t J M)`` is split
    into two free factors, each applied as a quadratic Fourier transform.
    The overall sign (the metaplectic group covers ``Sp`` twice) is fixed by
    continuity in ``t``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .grid import Grid, GridOperator, WaveFunction, coherent_state, momentum_multiply, phase_space_moments
from .hamiltonian_flow import FlowMap, QuadraticHamiltonian, integrate_flow, integrate_variational
from .metaplectic import AliasingError, _apply_values, _support_and_band, project_metaplectic, required_frequency
from .phase_space import (QuadraticGeneratingFunction, dual_generating, free_factorization_candidates,
                          generating_to_symplectic, standard_symplectic, symplectic_to_generating)
from .weyl import Symbol, symbol_to_kernel, weyl_quantize_quadratic

__all__ = [
    "METHODS",
    "Propagator",
    "UnitaryFamily",
    "CorrespondenceReport",
    "propagate_schrodinger",
    "stone_generator_estimate",
    "correspondence_roundtrip",
    "extended_schrodinger_check",
    "extended_phase_residual",
    "schrodinger_residual",
    "quantum_hamiltonian",
    "CONJUGATORS",
]

METHODS = ("eigensolve", "split_step", "metaplectic")

# rotation angles tried when splitting S_t into two free factors
FACTOR_ANGLES = 24

# conjugators for the covariance leg: a quarter turn and a shear
CONJUGATORS = {
    "fourier": QuadraticGeneratingFunction(0.0, 1.0, 0.0),
    "shear": QuadraticGeneratingFunction(1.0, 1.0, 1.0),
}


def quantum_hamiltonian(H, grid: Grid, t: float = 0.0) -> GridOperator:
    """Weyl operator of a quadratic Hamiltonian or a symbol, as a Hermitian matrix."""
    if isinstance(H, QuadraticHamiltonian):
        return weyl_quantize_quadratic(H, grid, t)
    if isinstance(H, Symbol):
        M = symbol_to_kernel(H, 0.5, grid, warn=False).operator().matrix
        return GridOperator(grid, 0.5 * (M + M.conj().T), label=f"Weyl({H.label})")
    raise TypeError(f"expected a QuadraticHamiltonian or a Symbol, got {type(H).__name__}")


def _quadratic_apply(M: np.ndarray, grid: Grid, v: np.ndarray) -> np.ndarray:
    """Matrix-free Weyl operator of ``1/2 z.M z`` on sample vectors."""
    A, B, C = M[0, 0], M[0, 1], M[1, 1]
    x = grid.x
    pv = momentum_multiply(grid, v, lambda p: p)
    out = 0.5 * A * x * x * v + 0.5 * C * momentum_multiply(grid, v, lambda p: p * p)
    if B:
        out = out + 0.5 * B * (x * pv + momentum_multiply(grid, x * v, lambda p: p))
    return out


class Propagator:
    """
    ``F_t = exp(-i t H / hbar)`` on a grid.

    Parameters
    ----------
    H : QuadraticHamiltonian or Symbol
    grid : Grid
    method : {"eigensolve", "split_step", "metaplectic"}
    dt : float
        Split-step time step (the step count is ``ceil(|t| / dt)``).
    substep : float
        Largest time increment between sign-tracking samples of the
        metaplectic method.
    """

    def __init__(self, H, grid: Grid, method: str = "eigensolve", dt: float = 1e-3, substep: float = 0.25):
        if method not in METHODS:
            raise ValueError(f"unknown propagation method {method!r}; choose from {METHODS}")
        if not dt > 0 or not substep > 0:
            raise ValueError("dt and substep must be positive")
        self.H = H
        self.grid = grid
        self.method = method
        self.dt = dt
        self.substep = substep
        self.label = getattr(H, "label", "") or "H"
        quad = isinstance(H, QuadraticHamiltonian)
        if quad and H.n != 1:
            raise ValueError("grid propagation supports n = 1 only")
        if not quad and not isinstance(H, Symbol):
            raise TypeError(f"expected a QuadraticHamiltonian or a Symbol, got {type(H).__name__}")
        time_dependent = quad and H.time_dependent
        self._time_dependent = time_dependent
        if method == "eigensolve" and time_dependent:
            raise ValueError("eigensolve needs a time-independent Hamiltonian")
        if method == "metaplectic" and (not quad or time_dependent):
            raise ValueError("the metaplectic method needs a time-independent quadratic Hamiltonian")
        if method == "split_step":
            if quad:
                if any(np.any(H.M(s)[0, 1]) for s in (0.0, 0.37, 1.0)):
                    raise ValueError("split_step needs H = T(p) + V(x); this quadratic Hamiltonian has a B block")
            elif not H.is_separable:
                raise ValueError("split_step needs a separable symbol (see Symbol.separable)")
        self._eig = None

    # eigensolve

    def generator(self, t: float = 0.0) -> GridOperator:
        """The Hermitian operator ``H`` (at time ``t``)."""
        return quantum_hamiltonian(self.H, self.grid, t)

    def _eigensystem(self):
        if self._eig is None:
            self._eig = np.linalg.eigh(self.generator().matrix)
        return self._eig

    def _apply_eigensolve(self, t, v):
        w, U = self._eigensystem()
        return U @ (np.exp(-1j * t * w / self.grid.hbar) * (U.conj().T @ v))

    # split step

    def _parts(self, s):
        if isinstance(self.H, QuadraticHamiltonian):
            A, _, C = (float(b[0, 0]) for b in self.H.blocks(s))
            return (lambda p: 0.5 * C * p * p), (lambda x: 0.5 * A * x * x)
        return self.H.kinetic, self.H.potential

    def _apply_split(self, t, v, t0=0.0):
        g = self.grid
        hb = g.hbar
        steps = max(1, int(np.ceil(abs(t) / self.dt)))
        h = t / steps
        x = g.x
        if not self._time_dependent:
            # constant phases; the half kicks of neighbouring steps merge into full kicks
            T, V = self._parts(0.0)
            shape = (-1,) + (1,) * (np.ndim(v) - 1)
            half = np.exp(-0.5j * h * V(x) / hb).reshape(shape)
            drift = np.exp(-1j * h * T(g.p_fft) / hb).reshape(shape)
            full = half * half
            v = half * v
            for _ in range(steps - 1):
                v = full * np.fft.ifft(drift * np.fft.fft(v, axis=0), axis=0)
            return half * np.fft.ifft(drift * np.fft.fft(v, axis=0), axis=0)
        for k in range(steps):
            s = t0 + k * h
            T, V = self._parts(s)
            v = np.exp(-0.5j * h * V(x) / hb) * v
            T_mid = self._parts(s + 0.5 * h)[0]
            v = momentum_multiply(g, v, lambda p: np.exp(-1j * h * T_mid(p) / hb))
            V_end = self._parts(s + h)[1]
            v = np.exp(-0.5j * h * V_end(x) / hb) * v
        return v

    # metaplectic

    def classical_matrix(self, t: float) -> np.ndarray:
        """``S_t = exp(t J M)`` for quadratic ``H``."""
        J = standard_symplectic(1).J
        return expm(t * J @ self.H.M())

    def _mp_raw(self, t, v, extent):
        """
        ``+- F_t v`` as one or two quadratic Fourier transforms. Candidate
        splittings are ranked by the chirp frequency they need, estimated by
        pushing the support/band box of ``v`` through the first factor.
        """
        xs, band = extent
        S = self.classical_matrix(t)
        ranked = []
        try:
            W = symplectic_to_generating(S)
            ranked.append((required_frequency(W, self.grid, xs, band), W, None))
        except ValueError:
            pass
        for W1, W2 in free_factorization_candidates(S, angles=FACTOR_ANGLES):
            s2 = np.abs(generating_to_symplectic(W2))
            xs2, band2 = s2 @ np.array([xs, band])
            need = max(required_frequency(W2, self.grid, xs, band), required_frequency(W1, self.grid, xs2, band2))
            ranked.append((need, W1, W2))
        ranked.sort(key=lambda c: c[0])
        err = None
        for _, W1, W2 in ranked[:4]:
            try:
                if W2 is None:
                    return _apply_values(W1, self.grid, v)
                return _apply_values(W1, self.grid, _apply_values(W2, self.grid, v))
            except AliasingError as exc:
                err = exc
        raise err

    def _apply_metaplectic(self, t, v):
        if t == 0:
            return v.copy()
        g = self.grid
        M = self.H.M()
        Hv = _quadratic_apply(M, g, v)
        nrm = np.vdot(v, v).real
        mean = np.vdot(v, Hv).real / nrm
        spread = np.sqrt(max(np.vdot(Hv, Hv).real / nrm - mean ** 2, 0.0))
        # keep the energy spread per increment well below a quarter turn
        step = min(self.substep, 0.25 * g.hbar / max(spread, 1e-12))
        K = max(1, int(np.ceil(abs(t) / step)))
        extent = _support_and_band(g, v)
        prev = v
        for k in range(1, K + 1):
            tk = t * k / K
            phi = self._mp_raw(tk, v, extent)
            ref = np.exp(-1j * mean * (t / K) / g.hbar) * prev
            if np.vdot(ref, phi).real < 0:
                phi = -phi
            prev = phi
        return prev

    # public

    def apply_values(self, t: float, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=complex)
        if self.method == "eigensolve":
            return self._apply_eigensolve(t, v)
        if self.method == "split_step":
            return self._apply_split(t, v)
        return self._apply_metaplectic(t, v)

    def __call__(self, t: float, psi: WaveFunction) -> WaveFunction:
        if psi.grid != self.grid:
            raise ValueError("state and propagator live on different grids")
        return WaveFunction(self.grid, self.apply_values(t, psi.values))

    def family(self) -> "UnitaryFamily":
        return UnitaryFamily(self, self.grid, f"{self.method}({self.label})")


@dataclass
class UnitaryFamily:
    """One-parameter family ``t -> F(t)``; ``F`` maps ``(t, psi)`` to a state."""

    F: Callable
    grid: Grid
    label: str = ""

    def __call__(self, t: float, psi: WaveFunction) -> WaveFunction:
        return self.F(t, psi)

    @classmethod
    def identity(cls, grid: Grid) -> "UnitaryFamily":
        return cls(lambda t, psi: WaveFunction(psi.grid, psi.values.copy()), grid, "identity")

    def continuity_profile(self, psi: WaveFunction, t0: float, dts) -> np.ndarray:
        """``||F(t0 + dt) psi - F(t0) psi||`` for each ``dt``; tends to 0 for a strongly continuous group."""
        base = self(t0, psi)
        return np.array([self(t0 + d, psi).distance(base) for d in dts])

    def group_residual(self, psi: WaveFunction, t: float, s: float) -> float:
        """``||F(t) F(s) psi - F(t + s) psi||``."""
        return self(t, self(s, psi)).distance(self(t + s, psi))


def propagate_schrodinger(H, psi0: WaveFunction, t: float, steps: int | None = None,
                          method: str = "eigensolve") -> WaveFunction:
    """
    ``psi_t = exp(-i t H / hbar) psi0``.

    ``steps`` sets the split-step count (default: time step 1e-3); the other
    methods ignore it.
    """
    dt = 1e-3 if steps is None else abs(t) / max(int(steps), 1) or 1e-3
    return Propagator(H, psi0.grid, method, dt=dt)(t, psi0)


def stone_generator_estimate(F: UnitaryFamily, psi: WaveFunction, dt: float, variant: str = "forward") -> WaveFunction:
    """
    Difference quotient for the generator of ``F``.

    ``forward``: ``i hbar (F(dt) psi - psi) / dt`` (first order);
    ``central``: ``i hbar (F(dt) psi - F(-dt) psi) / (2 dt)`` (second order).
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    hb = psi.grid.hbar
    if variant == "forward":
        return (F(dt, psi) - psi) * (1j * hb / dt)
    if variant == "central":
        return (F(dt, psi) - F(-dt, psi)) * (0.5j * hb / dt)
    raise ValueError(f"unknown variant {variant!r}")


def _as_operator(H_op, t):
    op = H_op(t) if callable(H_op) and not isinstance(H_op, GridOperator) else H_op
    return op.matrix if isinstance(op, GridOperator) else np.asarray(op)


def _path(times, states):
    times = np.asarray(times, dtype=float)
    V = np.stack([getattr(s, "values", s) for s in states]).astype(complex)
    if times.ndim != 1 or times.size < 3 or V.shape[0] != times.size:
        raise ValueError("need at least 3 time samples with one state each")
    dts = np.diff(times)
    if np.max(np.abs(dts - dts[0])) > 1e-9 * abs(dts[0]):
        raise ValueError("time samples must be uniformly spaced")
    return times, V, dts[0]


def schrodinger_residual(times, states, H_op, grid: Grid) -> float:
    """``max_k ||i hbar d_t psi - H psi||`` at interior samples (central differences)."""
    times, V, h = _path(times, states)
    hb = grid.hbar
    worst = 0.0
    for k in range(1, len(times) - 1):
        r = 1j * hb * (V[k + 1] - V[k - 1]) / (2 * h) - _as_operator(H_op, times[k]) @ V[k]
        worst = max(worst, float(np.sqrt(np.sum(np.abs(r) ** 2) * grid.dx)))
    return worst


def extended_schrodinger_check(times, states, H_op, E: float, t_prime_samples, grid: Grid,
                               dt_prime: float = 1e-4) -> float:
    """
    Residual of the extended Schrodinger equation.

    With ``Psi(x, t; t') = psi(x, t) exp(i E (t - t') / hbar)`` returns
    ``max || i hbar d_t' Psi - (H(t) - i hbar d_t) Psi ||`` over interior
    time samples and the given ``t'`` values. Both derivatives are central
    differences; ``d_t`` uses the spacing of ``times``.
    """
    times, V, h = _path(times, states)
    hb = grid.hbar

    def phase(t, tp):
        return np.exp(1j * E * (t - tp) / hb)

    worst = 0.0
    for tp in np.atleast_1d(t_prime_samples):
        for k in range(1, len(times) - 1):
            t = times[k]
            P = V[k] * phase(t, tp)
            d_tp = (V[k] * phase(t, tp + dt_prime) - V[k] * phase(t, tp - dt_prime)) / (2 * dt_prime)
            d_t = (V[k + 1] * phase(times[k + 1], tp) - V[k - 1] * phase(times[k - 1], tp)) / (2 * h)
            r = 1j * hb * d_tp - (_as_operator(H_op, t) @ P - 1j * hb * d_t)
            worst = max(worst, float(np.sqrt(np.sum(np.abs(r) ** 2) * grid.dx)))
    return worst


def extended_phase_residual(psi: WaveFunction, E: float, t: float, t_prime_samples, dt_prime: float = 1e-4) -> float:
    """``max || i hbar d_t' Psi - E Psi ||`` for ``Psi = psi exp(i E (t - t') / hbar)`` (central difference)."""
    g = psi.grid
    hb = g.hbar
    worst = 0.0
    for tp in np.atleast_1d(t_prime_samples):
        def Psi(s):
            return psi.values * np.exp(1j * E * (t - s) / hb)

        r = 1j * hb * (Psi(tp + dt_prime) - Psi(tp - dt_prime)) / (2 * dt_prime) - E * Psi(tp)
        worst = max(worst, float(np.sqrt(np.sum(np.abs(r) ** 2) * g.dx)))
    return worst


@dataclass
class CorrespondenceReport:
    """Residuals of the flow/propagator dictionary for one Hamiltonian."""

    hamiltonian_label: str
    classical_residuals: dict = field(default_factory=dict)
    quantum_residuals: dict = field(default_factory=dict)
    roundtrip_residual: float = 0.0
    parameters: dict = field(default_factory=dict)

    def residuals(self) -> dict:
        out = {f"classical.{k}": v for k, v in self.classical_residuals.items()}
        out.update({f"quantum.{k}": v for k, v in self.quantum_residuals.items()})
        out["roundtrip"] = self.roundtrip_residual
        return out

    def to_dict(self) -> dict:
        return {
            "hamiltonian_label": self.hamiltonian_label,
            "classical_residuals": dict(sorted(self.classical_residuals.items())),
            "quantum_residuals": dict(sorted(self.quantum_residuals.items())),
            "roundtrip_residual": self.roundtrip_residual,
            "parameters": self.parameters,
        }


DEFAULT_PROBES = ((1.0, 0.0), (0.0, 1.0), (0.7, -0.4))


def _linear_fit(zin, zout):
    """Least-squares ``S`` with ``zout = S zin`` column-wise."""
    sol, *_ = np.linalg.lstsq(np.asarray(zin), np.asarray(zout), rcond=None)
    return sol.T


def correspondence_roundtrip(H: QuadraticHamiltonian, grid: Grid, t: float, probes=DEFAULT_PROBES,
                             methods=METHODS, dt: float = 1e-3, flow_steps: int = 4000,
                             conjugators=None) -> CorrespondenceReport:
    """
    Check the flow/propagator dictionary for a quadratic Hamiltonian.

    Legs
    ----
    classical
        RK4 orbit and variational Jacobian against ``S_t = exp(t J M)``.
    quantum
        norm drift of each method and their pairwise L2 distances.
    Ehrenfest
        centers of propagated coherent states against ``f_t(z0)`` and
        covariances against ``S_t Sigma_0 S_t^T``, for every method.
    covariance
        ``exp(-i t K) psi`` with ``K = H o s^-1`` against
        ``S exp(-i t H) S^-1 psi`` for each conjugator ``S = S^W``.

    ``roundtrip_residual`` compares ``S_t`` with the matrix recovered from the
    quantum centers by least squares (needs two independent probes).
    """
    if not isinstance(H, QuadraticHamiltonian) or H.n != 1 or H.time_dependent:
        raise ValueError("correspondence_roundtrip needs a time-independent quadratic Hamiltonian with n = 1")
    conjugators = CONJUGATORS if conjugators is None else conjugators
    J = standard_symplectic(1).J
    S_exact = expm(t * J @ H.M())
    z0s = np.array(probes, dtype=float)

    classical = {}
    traj = integrate_flow(FlowMap(H, 0.0, t, flow_steps), z0s, keep=False).final
    classical["flow"] = float(np.max(np.abs(traj - z0s @ S_exact.T)))
    jt = integrate_variational(H, z0s[0], 0.0, t, flow_steps, keep=False)
    classical["jacobian"] = float(np.max(np.abs(jt.S[-1] - S_exact)))
    classical["symplectic_defect"] = jt.symplectic_defect()

    quantum = {}
    states = [coherent_state(grid, z) for z in z0s]
    props = {m: Propagator(H, grid, m, dt=dt) for m in methods}
    finals = {m: [P(t, psi) for psi in states] for m, P in props.items()}
    centers = None
    for m, outs in finals.items():
        quantum[f"norm.{m}"] = max(abs(o.norm() - s.norm()) for o, s in zip(outs, states))
        mean_err, cov_err = 0.0, 0.0
        got = []
        for z0, psi, out in zip(z0s, states, outs):
            _, cov0 = phase_space_moments(psi)
            mean, cov = phase_space_moments(out)
            got.append(mean)
            mean_err = max(mean_err, float(np.max(np.abs(mean - S_exact @ z0))))
            cov_err = max(cov_err, float(np.max(np.abs(cov - S_exact @ cov0 @ S_exact.T))))
        quantum[f"ehrenfest_mean.{m}"] = mean_err
        quantum[f"ehrenfest_cov.{m}"] = cov_err
        if centers is None:
            centers = np.array(got)
    ms = list(finals)
    for i, a in enumerate(ms):
        for b in ms[i + 1:]:
            quantum[f"agreement.{a}~{b}"] = max(x.distance(y) for x, y in zip(finals[a], finals[b]))

    base = "eigensolve" if "eigensolve" in props else ms[0]
    Fh = props[base] if base == "eigensolve" else Propagator(H, grid, "eigensolve")
    for name, W in sorted(conjugators.items()):
        s = project_metaplectic(W)
        si = np.linalg.inv(s)
        K = QuadraticHamiltonian(si.T @ H.M() @ si, label=f"{H.label} o s^-1")
        Fk = Propagator(K, grid, "eigensolve")
        Ws = dual_generating(W)
        worst = 0.0
        for psi in states:
            lhs = Fk(t, psi)
            mid = Fh(t, WaveFunction(grid, _apply_values(Ws, grid, psi.values)))
            rhs = WaveFunction(grid, _apply_values(W, grid, mid.values))
            worst = max(worst, lhs.distance(rhs))
        quantum[f"covariance.{name}"] = worst

    roundtrip = float("nan")
    if len(z0s) >= 2 and np.linalg.matrix_rank(z0s) == 2:
        roundtrip = float(np.max(np.abs(_linear_fit(z0s, centers) - S_exact)))
    params = {"grid": grid.to_dict(), "t": t, "dt": dt, "flow_steps": flow_steps, "methods": list(methods),
              "probes": [list(map(float, z)) for z in z0s]}
    return CorrespondenceReport(H.label or "H", classical, quantum, roundtrip, params)
