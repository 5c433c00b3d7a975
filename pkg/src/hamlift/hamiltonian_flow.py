"""
Hamiltonian flows on R^{2n} and the group operations on them.

All callables work on phase vectors of shape ``(..., 2n)`` so that many
initial points can be pushed through one integration. Energies have shape
``(...)``, gradients ``(..., 2n)`` and Hessians ``(..., 2n, 2n)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .phase_space import as_phase_vector, is_symplectic, standard_symplectic

__all__ = [
    "Hamiltonian",
    "QuadraticHamiltonian",
    "FlowMap",
    "Trajectory",
    "JacobianTrajectory",
    "ExtendedPoint",
    "BumpTruncation",
    "FlowDivergenceError",
    "hamilton_vector_field",
    "integrate_flow",
    "flow",
    "integrate_variational",
    "compose_hamiltonians",
    "invert_hamiltonian",
    "conjugate_hamiltonian",
    "banyaga_reconstruct",
    "rescale_time",
    "extend_hamiltonian",
    "extended_flow",
    "truncate_support",
    "smooth_step",
]

log = logging.getLogger(__name__)

DIVERGENCE_THRESHOLD = 1e12


class FlowDivergenceError(RuntimeError):
    """Integration left the finite region; ``time`` is where it was detected."""

    def __init__(self, time: float, norm: float):
        super().__init__(f"flow diverged at t={time:.6g} (|z|={norm:.3g})")
        self.time = time
        self.norm = norm


def _fd_grad(func, z, t, h):
    z = np.asarray(z, dtype=float)
    g = np.empty(z.shape)
    for i in range(z.shape[-1]):
        e = np.zeros(z.shape[-1])
        e[i] = h
        g[..., i] = (func(z + e, t) - func(z - e, t)) / (2 * h)
    return g


def _fd_jac(func, z, t, h):
    """Jacobian of a vector field ``func`` by central differences, last axis = column."""
    z = np.asarray(z, dtype=float)
    d = z.shape[-1]
    cols = []
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        cols.append((func(z + e, t) - func(z - e, t)) / (2 * h))
    return np.stack(cols, axis=-1)


@dataclass
class Hamiltonian:
    """
    Energy function ``H(z, t)`` with gradient and Hessian.

    ``grad`` and ``hess`` fall back to central differences of ``func`` (step
    ``fd_step``) when no analytic form is supplied. Hessians are always
    returned symmetrized.

    Parameters
    ----------
    func : callable
        ``func(z, t)`` with ``z`` of shape ``(..., 2n)``.
    n : int
        Degrees of freedom.
    grad_func, hess_func, dt_func : callable, optional
        Analytic ``grad_z H``, ``H''`` and ``dH/dt``.
    jet_func : callable, optional
        ``jet_func(z, t) -> (grad, hess)`` sharing work between the two;
        used by the variational integrator. The Hessian must be symmetric.
    time_dependent : bool
    separable : bool
        True when ``H = T(p) + V(x)``; required by the leapfrog stepper.
    label : str
    """

    func: Callable
    n: int
    grad_func: Callable | None = None
    hess_func: Callable | None = None
    dt_func: Callable | None = None
    time_dependent: bool = False
    separable: bool = False
    label: str = ""
    fd_step: float = 1e-5
    jet_func: Callable | None = None

    def __call__(self, z, t=0.0):
        return self.func(np.asarray(z, dtype=float), t)

    def grad(self, z, t=0.0):
        z = np.asarray(z, dtype=float)
        if self.grad_func is not None:
            return np.asarray(self.grad_func(z, t), dtype=float)
        return _fd_grad(self.func, z, t, self.fd_step)

    def hess(self, z, t=0.0):
        z = np.asarray(z, dtype=float)
        if self.hess_func is not None:
            Hs = np.asarray(self.hess_func(z, t), dtype=float)
        else:
            Hs = _fd_jac(self.grad, z, t, self.fd_step)
        return 0.5 * (Hs + np.swapaxes(Hs, -1, -2))

    def jet(self, z, t=0.0):
        """``(grad, hess)`` in one call; uses ``jet_func`` when it is supplied."""
        if self.jet_func is not None:
            g, Hs = self.jet_func(np.asarray(z, dtype=float), t)
            return np.asarray(g, dtype=float), np.asarray(Hs, dtype=float)
        return self.grad(z, t), self.hess(z, t)

    def dt(self, z, t=0.0):
        if self.dt_func is not None:
            return self.dt_func(np.asarray(z, dtype=float), t)
        if not self.time_dependent:
            return np.zeros(np.shape(z)[:-1])
        h = self.fd_step
        return (self.func(z, t + h) - self.func(z, t - h)) / (2 * h)


class QuadraticHamiltonian(Hamiltonian):
    """
    ``H(z, t) = 1/2 z.M(t) z`` with ``M = [[A, B], [B^T, C]]`` symmetric.

    ``M`` may be a constant array or a callable of ``t``.
    """

    def __init__(self, M, label: str = ""):
        if callable(M):
            self._M = M
            time_dependent = True
            M0 = np.asarray(M(0.0), dtype=float)
        else:
            M0 = np.atleast_2d(np.asarray(M, dtype=float))
            self._M = lambda t, _M=M0: _M
            time_dependent = False
        if M0.ndim != 2 or M0.shape[0] != M0.shape[1] or M0.shape[0] % 2:
            raise ValueError(f"M must be 2n x 2n, got {M0.shape}")
        if np.max(np.abs(M0 - M0.T)) > 1e-12 * max(1.0, np.max(np.abs(M0))):
            raise ValueError("M must be symmetric")
        n = M0.shape[0] // 2
        super().__init__(
            func=lambda z, t: 0.5 * np.einsum("...i,ij,...j->...", z, self.M(t), z),
            n=n,
            grad_func=lambda z, t: z @ self.M(t).T,
            hess_func=lambda z, t: np.broadcast_to(self.M(t), z.shape[:-1] + (2 * n, 2 * n)),
            jet_func=self._jet,
            time_dependent=time_dependent,
            separable=not time_dependent and not np.any(M0[:n, n:]),
            label=label,
        )

    def _jet(self, z, t):
        M = self.M(t)
        return z @ M.T, np.broadcast_to(M, z.shape[:-1] + M.shape)

    def M(self, t=0.0) -> np.ndarray:
        return np.asarray(self._M(t), dtype=float)

    def blocks(self, t=0.0):
        """Return ``(A, B, C)`` at time ``t``."""
        M = self.M(t)
        n = self.n
        return M[:n, :n], M[:n, n:], M[n:, n:]

    @classmethod
    def from_blocks(cls, A, B, C, label: str = "") -> "QuadraticHamiltonian":
        A, B, C = (np.atleast_2d(np.asarray(v, dtype=float)) for v in (A, B, C))
        return cls(np.block([[A, B], [B.T, C]]), label=label)


def hamilton_vector_field(H: Hamiltonian, z, t=0.0) -> np.ndarray:
    """``X_H = J grad H = (grad_p H, -grad_x H)``."""
    g = H.grad(z, t)
    if not np.all(np.isfinite(g)):
        raise ValueError(f"non-finite gradient of {H.label or 'H'} at t={t}")
    n = g.shape[-1] // 2
    return np.concatenate([g[..., n:], -g[..., :n]], axis=-1)


@dataclass
class Trajectory:
    """Sampled solution; ``z[k]`` is the state at ``t[k]``."""

    t: np.ndarray
    z: np.ndarray
    E: np.ndarray | None = None

    @property
    def final(self) -> np.ndarray:
        return self.z[-1]


@dataclass
class FlowMap:
    """
    Time-dependent flow ``f_{t_to, t_from}``: the solution at ``t_to`` of
    Hamilton's equations started at ``t_from``.
    """

    H: Hamiltonian
    t_from: float = 0.0
    t_to: float = 1.0
    steps: int = 1000
    method: str = "rk4"

    def __post_init__(self):
        if self.method not in ("rk4", "symplectic_leapfrog"):
            raise ValueError(f"unknown method {self.method!r}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(f"steps must be a positive integer, got {self.steps!r}")
        if self.method == "symplectic_leapfrog" and (self.H.time_dependent or not self.H.separable):
            raise ValueError("leapfrog requires a separable time-independent Hamiltonian")

    def __call__(self, z0) -> np.ndarray:
        return integrate_flow(self, z0, keep=False).final


def flow(H: Hamiltonian, t: float, t_from: float = 0.0, steps: int | None = None, dt: float = 1e-3,
         method: str = "rk4") -> FlowMap:
    """Flow map from ``t_from`` to ``t``; ``steps`` defaults to ``|t - t_from| / dt``."""
    if steps is None:
        steps = max(1, int(np.ceil(abs(t - t_from) / dt)))
    return FlowMap(H, t_from, t, steps, method)


def _check(z, t):
    norm = float(np.max(np.abs(z))) if np.all(np.isfinite(z)) else np.inf
    if norm > DIVERGENCE_THRESHOLD:
        raise FlowDivergenceError(t, norm)


def _rk4(rhs, y, t0, t1, steps, keep):
    h = (t1 - t0) / steps
    ts = t0 + h * np.arange(steps + 1)
    y0 = y
    ys = [y] if keep else None
    for k in range(steps):
        t = ts[k]
        k1 = rhs(y, t)
        k2 = rhs(y + 0.5 * h * k1, t + 0.5 * h)
        k3 = rhs(y + 0.5 * h * k2, t + 0.5 * h)
        k4 = rhs(y + h * k3, t + h)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        _check(y, ts[k + 1])
        if keep:
            ys.append(y)
    if not keep:
        return ts[[0, -1]], [y0, y]
    return ts, ys


def integrate_flow(fm: FlowMap, z0, keep: bool = True) -> Trajectory:
    """
    Integrate ``dz/dt = X_H(z, t)`` from ``fm.t_from`` to ``fm.t_to``.

    ``z0`` may be a single phase vector or a batch of shape ``(m, 2n)``.
    With ``keep=False`` only the end points are stored.

    Raises
    ------
    FlowDivergenceError
        When ``|z|`` exceeds 1e12 or becomes non-finite.
    """
    z0 = np.asarray(z0.z if hasattr(z0, "z") else z0, dtype=float)
    if z0.shape[-1] != 2 * fm.H.n:
        raise ValueError(f"expected phase vectors of length {2 * fm.H.n}, got {z0.shape}")
    H = fm.H
    if fm.t_to == fm.t_from:
        return Trajectory(np.array([fm.t_from]), z0[None].copy())
    if fm.method == "rk4":
        ts, zs = _rk4(lambda z, t: hamilton_vector_field(H, z, t), z0, fm.t_from, fm.t_to, fm.steps, keep)
    else:
        ts, zs = _leapfrog(H, z0, fm.t_from, fm.t_to, fm.steps, keep)
    return Trajectory(np.asarray(ts), np.stack(zs))


def _leapfrog(H, z, t0, t1, steps, keep):
    n = H.n
    h = (t1 - t0) / steps
    ts = t0 + h * np.arange(steps + 1)
    z0 = z
    zs = [z] if keep else None
    x, p = z[..., :n], z[..., n:]
    for k in range(steps):
        p = p - 0.5 * h * H.grad(np.concatenate([x, p], axis=-1))[..., :n]
        x = x + h * H.grad(np.concatenate([x, p], axis=-1))[..., n:]
        p = p - 0.5 * h * H.grad(np.concatenate([x, p], axis=-1))[..., :n]
        z = np.concatenate([x, p], axis=-1)
        _check(z, ts[k + 1])
        if keep:
            zs.append(z)
    if not keep:
        return ts[[0, -1]], [z0, z]
    return ts, zs


@dataclass
class JacobianTrajectory:
    """Jacobians ``S[k] = Df_{t[k], t[0]}(base_point)`` along the orbit ``z[k]``."""

    t: np.ndarray
    S: np.ndarray
    z: np.ndarray
    base_point: np.ndarray

    def symplectic_defect(self) -> float:
        d = self.S.shape[-1]
        J = standard_symplectic(d // 2).J
        St = np.swapaxes(self.S, -1, -2)
        return float(np.max(np.abs(St @ J @ self.S - J)))


def integrate_variational(H: Hamiltonian, z0, t_from: float, t_to: float, steps: int,
                          keep: bool = True) -> JacobianTrajectory:
    """
    Co-integrate the orbit and ``dS/dt = J H''(z_t, t) S`` with ``S(t_from) = I``.

    Batches of base points are supported: ``z0`` of shape ``(m, 2n)`` gives
    ``S`` of shape ``(k, m, 2n, 2n)``.
    """
    z0 = np.asarray(z0.z if hasattr(z0, "z") else z0, dtype=float)
    d = z0.shape[-1]
    J = standard_symplectic(d // 2).J
    S0 = np.broadcast_to(np.eye(d), z0.shape[:-1] + (d, d)).copy()
    if t_to == t_from:
        return JacobianTrajectory(np.array([t_from]), S0[None], z0[None], z0)

    def rhs(y, t):
        z, S = y
        g, Hs = H.jet(z, t)
        n = d // 2
        return np.concatenate([g[..., n:], -g[..., :n]], axis=-1), J @ Hs @ S

    h = (t_to - t_from) / steps
    ts = t_from + h * np.arange(steps + 1)
    z, S = z0, S0
    zs, Ss = [z], [S]
    for k in range(steps):
        t = ts[k]
        k1 = rhs((z, S), t)
        k2 = rhs((z + 0.5 * h * k1[0], S + 0.5 * h * k1[1]), t + 0.5 * h)
        k3 = rhs((z + 0.5 * h * k2[0], S + 0.5 * h * k2[1]), t + 0.5 * h)
        k4 = rhs((z + h * k3[0], S + h * k3[1]), t + h)
        z = z + (h / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        S = S + (h / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        _check(z, ts[k + 1])
        if keep or k == steps - 1:
            zs.append(z)
            Ss.append(S)
    if not keep:
        ts = ts[[0, -1]]
    return JacobianTrajectory(ts, np.stack(Ss), np.stack(zs), z0)


def _inner_steps(t, dt):
    return max(8, int(np.ceil(abs(t) / dt)))


def compose_hamiltonians(H: Hamiltonian, K: Hamiltonian, dt: float = 0.01) -> Hamiltonian:
    """
    ``H#K(z, t) = H(z, t) + K((f_t^H)^-1 (z), t)``, generating ``f_t^H o f_t^K``.

    The inverse flow is obtained by integrating ``H`` backward from ``t`` to 0
    with step ``dt``; its Jacobian (for the gradient) comes from the same
    backward variational integration.
    """
    if H.n != K.n:
        raise ValueError("Hamiltonians act on different phase spaces")

    def pullback(z, t):
        return integrate_flow(FlowMap(H, t, 0.0, _inner_steps(t, dt)), z, keep=False).final

    def func(z, t):
        return H(z, t) + K(pullback(z, t), t)

    def grad(z, t):
        jt = integrate_variational(H, z, t, 0.0, _inner_steps(t, dt), keep=False)
        w, D = jt.z[-1], jt.S[-1]
        return H.grad(z, t) + np.einsum("...ji,...j->...i", D, K.grad(w, t))

    return Hamiltonian(func, H.n, grad_func=grad, time_dependent=True,
                       label=f"({H.label or 'H'})#({K.label or 'K'})")


def invert_hamiltonian(H: Hamiltonian, dt: float = 0.01) -> Hamiltonian:
    """``K(z, t) = -H(f_t^H(z), t)``; its flow is ``(f_t^H)^-1``."""

    def func(z, t):
        return -H(integrate_flow(FlowMap(H, 0.0, t, _inner_steps(t, dt)), z, keep=False).final, t)

    def grad(z, t):
        jt = integrate_variational(H, z, 0.0, t, _inner_steps(t, dt), keep=False)
        w, D = jt.z[-1], jt.S[-1]
        return -np.einsum("...ji,...j->...i", D, H.grad(w, t))

    return Hamiltonian(func, H.n, grad_func=grad, time_dependent=True, label=f"inv({H.label or 'H'})")


def conjugate_hamiltonian(H: Hamiltonian, s, tol: float = 1e-10) -> Hamiltonian:
    """``K = H o s^-1`` so that ``s f_t^H s^-1 = f_t^K``."""
    s = np.asarray(s, dtype=float)
    if s.shape != (2 * H.n, 2 * H.n):
        raise ValueError(f"conjugator must be {2 * H.n}x{2 * H.n}")
    if not is_symplectic(s, tol):
        raise ValueError("conjugator is not symplectic")
    si = np.linalg.inv(s)
    return Hamiltonian(
        lambda z, t: H(z @ si.T, t),
        H.n,
        grad_func=lambda z, t: H.grad(z @ si.T, t) @ si,
        hess_func=lambda z, t: si.T @ H.hess(z @ si.T, t) @ si,
        dt_func=(lambda z, t: H.dt(z @ si.T, t)),
        time_dependent=H.time_dependent,
        label=f"{H.label or 'H'} o s^-1",
    )


def rescale_time(H: Hamiltonian, t0: float) -> Hamiltonian:
    """``K(z, t) = t0 H(z, t0 t)``; the time-1 flow of ``K`` is the time-``t0`` flow of ``H``."""
    if t0 == 0:
        raise ValueError("t0 must be nonzero")
    hess = None if H.hess_func is None else (lambda z, t: t0 * H.hess(z, t0 * t))
    return Hamiltonian(
        lambda z, t: t0 * H(z, t0 * t),
        H.n,
        grad_func=lambda z, t: t0 * H.grad(z, t0 * t),
        hess_func=hess,
        dt_func=lambda z, t: t0 * t0 * H.dt(z, t0 * t),
        time_dependent=H.time_dependent,
        separable=H.separable,
        label=f"{t0:g}*{H.label or 'H'}",
    )


@dataclass(frozen=True)
class ExtendedPoint:
    """Point ``(z, t, E)`` of the extended phase space R^{2n+2}."""

    z: np.ndarray
    t: float
    E: float

    def to_vector(self) -> np.ndarray:
        """Canonical layout ``(x, E, p, t)``: ``E`` is a position and ``t`` its momentum."""
        z = as_phase_vector(self.z)
        n = z.size // 2
        return np.concatenate([z[:n], [self.E], z[n:], [self.t]])

    @classmethod
    def from_vector(cls, v) -> "ExtendedPoint":
        v = np.asarray(v, dtype=float)
        n = v.size // 2 - 1
        return cls(np.concatenate([v[:n], v[n + 1:2 * n + 1]]), float(v[-1]), float(v[n]))


def extend_hamiltonian(H: Hamiltonian) -> Hamiltonian:
    """
    Autonomous Hamiltonian ``H~(x, p, t, E) = H(x, p, t) - E`` on R^{2n+2}.

    Coordinates are laid out as ``(x, E, p, t)`` (see :class:`ExtendedPoint`),
    which makes the extended Hamilton equations read ``dt/dt' = 1`` and
    ``dE/dt' = dH/dt``.
    """
    n = H.n

    def split(v):
        z = np.concatenate([v[..., :n], v[..., n + 1:2 * n + 1]], axis=-1)
        return z, v[..., n], v[..., -1]

    def func(v, _s):
        z, E, t = split(v)
        return H(z, t) - E

    def grad(v, _s):
        z, E, t = split(v)
        g = H.grad(z, t)
        return np.concatenate([g[..., :n], -np.ones(v.shape[:-1] + (1,)),
                               g[..., n:], np.asarray(H.dt(z, t))[..., None]], axis=-1)

    return Hamiltonian(func, n + 1, grad_func=grad, time_dependent=False, label=f"ext({H.label or 'H'})")


def extended_flow(H: Hamiltonian, point: ExtendedPoint, s: float, steps: int = 1000) -> ExtendedPoint:
    """Advance an extended point by the flow of :func:`extend_hamiltonian` for time ``s``."""
    Ht = extend_hamiltonian(H)
    out = integrate_flow(FlowMap(Ht, 0.0, s, steps), point.to_vector(), keep=False).final
    return ExtendedPoint.from_vector(out)


def _bump_raw(u):
    """``f = exp(-1/u)`` for ``u > 0`` (else 0) with ``f'`` and ``f''``."""
    pos = u > 0
    v = np.where(pos, u, 1.0)
    e = np.where(pos, np.exp(-1.0 / v), 0.0)
    d1 = e / (v * v)
    return e, d1, d1 * (1.0 - 2.0 * v) / (v * v)


def smooth_step(s, second: bool = False):
    """
    C-infinity step: 1 for ``s <= 0``, 0 for ``s >= 1``.

    Returns ``(value, derivative)``, plus the second derivative when
    ``second`` is set.
    """
    s = np.asarray(s, dtype=float)
    a, da, dda = _bump_raw(1.0 - s)
    b, db, ddb = _bump_raw(s)
    da = -da
    den = a + b
    dden = da + db
    num = da * den - a * dden
    val = a / den
    dval = num / den ** 2
    if not second:
        return val, dval
    ddval = (dda * den - a * (dda + ddb)) / den ** 2 - 2 * dden * num / den ** 3
    return val, dval, ddval


@dataclass(frozen=True)
class BumpTruncation:
    """Cutoff equal to 1 on the inner ball and 0 outside the outer ball."""

    center: np.ndarray
    inner_radius: float
    outer_radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_phase_vector(self.center))
        if not 0 < self.inner_radius < self.outer_radius:
            raise ValueError("need 0 < inner_radius < outer_radius")

    def flat_side(self, z):
        """1 if every point is inside the inner ball, 0 if all are outside the outer one, else None."""
        d = np.asarray(z, dtype=float) - self.center
        r2 = np.einsum("...i,...i->...", d, d)
        if r2.max() <= self.inner_radius ** 2:
            return 1
        if r2.min() >= self.outer_radius ** 2:
            return 0
        return None

    def jet(self, z, order: int = 1):
        """Value, gradient and (``order=2``) Hessian of the cutoff at ``z``."""
        d = np.asarray(z, dtype=float) - self.center
        r = np.sqrt(np.einsum("...i,...i->...", d, d))
        w = self.outer_radius - self.inner_radius
        s = (r - self.inner_radius) / w
        dim = d.shape[-1]
        if np.all(s <= 0) or np.all(s >= 1):
            # flat on the whole batch: skip the transcendental part
            val = np.full(r.shape, 1.0 if np.all(s <= 0) else 0.0)
            out = (val, np.zeros(d.shape))
            return out + (np.zeros(d.shape + (dim,)),) if order == 2 else out
        safe = np.where(r > 0, r, 1.0)
        unit = np.where(r[..., None] > 0, d / safe[..., None], 0.0)
        if order < 2:
            val, d1 = smooth_step(s)
            return val, (d1 / w)[..., None] * unit
        val, d1, d2 = smooth_step(s, second=True)
        d1, d2 = d1 / w, d2 / w ** 2
        uu = unit[..., :, None] * unit[..., None, :]
        tang = np.where(r > 0, d1 / safe, 0.0)
        hess = d2[..., None, None] * uu + tang[..., None, None] * (np.eye(dim) - uu)
        return val, d1[..., None] * unit, hess

    def value_and_grad(self, z):
        return self.jet(z)

    def hess(self, z):
        """``phi'' u u^T + phi'/r (I - u u^T)`` for the radial profile ``phi``."""
        return self.jet(z, 2)[2]

    def __call__(self, z):
        return self.jet(z)[0]


def truncate_support(H: Hamiltonian, bump: BumpTruncation) -> Hamiltonian:
    """Compactly supported ``H * Theta``; its flow exists for all times."""
    if bump.center.size != 2 * H.n:
        raise ValueError("bump center has the wrong dimension")

    def func(z, t):
        return H(z, t) * bump(z)

    def grad(z, t):
        th, dth = bump.jet(z)
        return th[..., None] * H.grad(z, t) + np.asarray(H(z, t))[..., None] * dth

    def jet(z, t):
        side = bump.flat_side(z)
        if side == 1:
            return H.jet(z, t)
        if side == 0:
            return np.zeros(z.shape), np.zeros(z.shape + (z.shape[-1],))
        th, dth, ddth = bump.jet(z, 2)
        g0, h0 = H.jet(z, t)
        e0 = np.asarray(H(z, t))
        cross = g0[..., :, None] * dth[..., None, :]
        g = th[..., None] * g0 + e0[..., None] * dth
        return g, th[..., None, None] * h0 + cross + np.swapaxes(cross, -1, -2) + e0[..., None, None] * ddth

    analytic = H.hess_func is not None or H.jet_func is not None
    return Hamiltonian(func, H.n, grad_func=grad,
                       hess_func=(lambda z, t: jet(z, t)[1]) if analytic else None,
                       jet_func=jet if analytic else None,
                       dt_func=lambda z, t: H.dt(z, t) * bump(z),
                       time_dependent=H.time_dependent, separable=False,
                       label=f"{H.label or 'H'}*Theta")


def _newton_inverse(f, w, tol=1e-13, max_iter=60, h=1e-6):
    """Solve ``f(y) = w`` for a batch of targets ``w`` of shape ``(m, 2n)``."""
    y = w.copy()
    d = w.shape[-1]
    eye = np.eye(d)
    for _ in range(max_iter):
        r = f(y) - w
        if np.max(np.abs(r)) <= tol * (1 + np.max(np.abs(w))):
            break
        D = np.stack([(f(y + h * eye[i]) - f(y - h * eye[i])) / (2 * h) for i in range(d)], axis=-1)
        y = y - np.linalg.solve(D, r[..., None])[..., 0]
    return y


def banyaga_reconstruct(family: Callable, H0: Callable | None = None, window: float = 1.0,
                        quad_nodes: int = 16, inverse: Callable | None = None,
                        roundtrip_tol: float = 1e-8, n: int | None = None) -> Hamiltonian:
    """
    Recover a Hamiltonian generating a smooth family ``f_t`` with ``f_0 = id``.

    ``H(z, t) = H0(z) - int_0^1 sigma(X(u z, t), z) du`` with
    ``X = (d/dt f_t) o f_t^-1``. The time derivative is a central difference
    of step ``window / 1024``; the ``u`` integral uses Gauss-Legendre nodes.

    Parameters
    ----------
    family : callable
        ``family(z, t)`` for ``z`` of shape ``(..., 2n)``.
    H0 : callable, optional
        Additive reference ``H0(z)``; defaults to 0.
    inverse : callable, optional
        ``inverse(w, t)`` returning ``f_t^-1(w)``. When omitted the inverse
        is found by Newton iteration on ``family``.
    roundtrip_tol : float
        Maximum ``|f_t(f_t^-1(w)) - w|`` accepted before the samples are
        declared inconsistent.

    Returns
    -------
    Hamiltonian
        Time-dependent, gradient by finite differences.
    """
    if quad_nodes < 8:
        raise ValueError("quad_nodes must be at least 8")
    nodes, weights = np.polynomial.legendre.leggauss(quad_nodes)
    u = 0.5 * (nodes + 1.0)
    wts = 0.5 * weights
    h = window / 1024.0

    def velocity(w, t):
        if inverse is not None:
            y = inverse(w, t)
        else:
            y = _newton_inverse(lambda v: family(v, t), w)
        resid = np.max(np.abs(family(y, t) - w))
        if not np.isfinite(resid) or resid > roundtrip_tol * (1 + np.max(np.abs(w))):
            raise ValueError(f"flow family is not invertible at t={t} (round-trip residual {resid:.3g})")
        return (family(y, t + h) - family(y, t - h)) / (2 * h)

    def func(z, t):
        z = np.asarray(z, dtype=float)
        d = z.shape[-1]
        pts = u.reshape((-1,) + (1,) * (z.ndim - 1) + (1,)) * z[None]
        X = velocity(pts.reshape(-1, d), t).reshape(pts.shape)
        J = standard_symplectic(d // 2).J
        sig = np.einsum("ij,...j,...i->...", J, X, np.broadcast_to(z, X.shape))
        val = -np.tensordot(wts, sig, axes=(0, 0))
        if H0 is not None:
            val = val + H0(z)
        return val

    if n is None:
        n = 1
    return Hamiltonian(func, n, time_dependent=True, label="banyaga", fd_step=1e-5)
