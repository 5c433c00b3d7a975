"""
Symplectic linear algebra on R^{2n}.

Phase-space vectors are ordered ``z = (x1..xn, p1..pn)`` and the standard
structure matrix is ``J = [[0, I], [-I, 0]]``, so Hamilton's equations read
``dz/dt = J grad H``.

Quadratic generating functions

    W(x, x') = 1/2 P x.x - L x.x' + 1/2 Q x'.x'

are stored as :class:`QuadraticGeneratingFunction` and map to free symplectic
matrices through :func:`generating_to_symplectic`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "PhaseSpacePoint",
    "SymplecticStructure",
    "QuadraticGeneratingFunction",
    "standard_symplectic",
    "symplectic_form",
    "is_symplectic",
    "symplectic_residual",
    "generating_to_symplectic",
    "symplectic_to_generating",
    "dual_generating",
    "free_factorization",
    "free_factorization_candidates",
    "rotation_generating",
    "as_phase_vector",
]

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class PhaseSpacePoint:
    """A point ``z = (x, p)`` of R^{2n}."""

    x: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        p = np.atleast_1d(np.asarray(self.p, dtype=float))
        if x.ndim != 1 or x.shape != p.shape or x.size == 0:
            raise ValueError(f"x and p must be equal-length vectors, got {x.shape} and {p.shape}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(p))):
            raise ValueError("phase-space point has non-finite entries")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def z(self) -> np.ndarray:
        return np.concatenate([self.x, self.p])

    @classmethod
    def from_vector(cls, z) -> "PhaseSpacePoint":
        z = np.asarray(z, dtype=float)
        if z.ndim != 1 or z.size % 2:
            raise ValueError(f"phase vector must have even length, got shape {z.shape}")
        n = z.size // 2
        return cls(z[:n], z[n:])


def as_phase_vector(z) -> np.ndarray:
    """Return ``z`` as a flat float array of even length."""
    if isinstance(z, PhaseSpacePoint):
        return z.z
    z = np.asarray(z, dtype=float)
    if z.ndim != 1 or z.size == 0 or z.size % 2:
        raise ValueError(f"phase vector must be 1-D with even length, got shape {z.shape}")
    return z


@dataclass(frozen=True)
class SymplecticStructure:
    n: int
    J: np.ndarray = field(repr=False)

    def form(self, z, zp) -> float:
        return float(self.J @ as_phase_vector(z) @ as_phase_vector(zp))


def standard_symplectic(n: int) -> SymplecticStructure:
    """Standard structure ``J = [[0, I], [-I, 0]]`` in dimension ``2n``."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    eye = np.eye(n)
    zero = np.zeros((n, n))
    J = np.block([[zero, eye], [-eye, zero]])
    J.setflags(write=False)
    return SymplecticStructure(n, J)


def _J(dim2n: int) -> np.ndarray:
    if dim2n % 2:
        raise ValueError(f"phase-space dimension must be even, got {dim2n}")
    return standard_symplectic(dim2n // 2).J


def symplectic_form(z, zp) -> float:
    """``sigma(z, z') = Jz . z'``; equals ``p.x' - x.p'``."""
    z = as_phase_vector(z)
    zp = as_phase_vector(zp)
    if z.shape != zp.shape:
        raise ValueError(f"dimension mismatch: {z.shape} vs {zp.shape}")
    return float(_J(z.size) @ z @ zp)


def symplectic_residual(S) -> float:
    """``max |S^T J S - J|`` for a square matrix of even size."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    J = _J(S.shape[0])
    return float(np.max(np.abs(S.T @ J @ S - J)))


def is_symplectic(S, tol: float = DEFAULT_TOL) -> bool:
    return symplectic_residual(S) <= tol


@dataclass(frozen=True)
class QuadraticGeneratingFunction:
    """
    Free generating function ``W(x, x') = 1/2 Px.x - Lx.x' + 1/2 Qx'.x'``.

    Parameters
    ----------
    P, Q : array_like
        Symmetric ``n x n`` matrices.
    L : array_like
        Invertible ``n x n`` matrix.
    m : int, optional
        Maslov index mod 4. Defaults to the branch with ``arg det L = m pi``
        in ``[0, 2 pi)``, i.e. 0 if ``det L > 0`` and 1 otherwise.
    """

    P: np.ndarray
    L: np.ndarray
    Q: np.ndarray
    m: int | None = None

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.P, dtype=float))
        L = np.atleast_2d(np.asarray(self.L, dtype=float))
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        n = L.shape[0]
        for name, M in (("P", P), ("L", L), ("Q", Q)):
            if M.shape != (n, n):
                raise ValueError(f"{name} must be {n}x{n}, got {M.shape}")
            if not np.all(np.isfinite(M)):
                raise ValueError(f"{name} has non-finite entries")
        scale = max(1.0, np.max(np.abs(P)), np.max(np.abs(Q)))
        if np.max(np.abs(P - P.T)) > 1e-12 * scale or np.max(np.abs(Q - Q.T)) > 1e-12 * scale:
            raise ValueError("P and Q must be symmetric")
        det = np.linalg.det(L)
        if not np.isfinite(det) or abs(det) < 1e-300 or np.linalg.cond(L) > 1e14:
            raise ValueError("L must be invertible")
        m = (0 if det > 0 else 1) if self.m is None else int(self.m) % 4
        for name, M in (("P", P), ("L", L), ("Q", Q)):
            M.setflags(write=False)
            object.__setattr__(self, name, M)
        object.__setattr__(self, "m", m)

    @property
    def n(self) -> int:
        return self.L.shape[0]

    def __call__(self, x, xp):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        xp = np.atleast_1d(np.asarray(xp, dtype=float))
        return 0.5 * x @ self.P @ x - x @ self.L.T @ xp + 0.5 * xp @ self.Q @ xp

    def to_dict(self) -> dict:
        return {"P": self.P.tolist(), "L": self.L.tolist(), "Q": self.Q.tolist(), "m": self.m}


def generating_to_symplectic(W: QuadraticGeneratingFunction) -> np.ndarray:
    """
    Free symplectic matrix ``[[L^-1 Q, L^-1], [P L^-1 Q - L^T, P L^-1]]``.

    Obtained by solving ``p = dW/dx``, ``p' = -dW/dx'`` for ``(x, p)``. The
    lower-right block is ``P L^-1``; it agrees with ``L^-1 P`` when ``n = 1``
    and is the ordering that keeps the result symplectic for ``n > 1``.
    """
    Linv = np.linalg.inv(W.L)
    return np.block([
        [Linv @ W.Q, Linv],
        [W.P @ Linv @ W.Q - W.L.T, W.P @ Linv],
    ])


def symplectic_to_generating(S, max_cond: float = 1e8) -> QuadraticGeneratingFunction:
    """
    Invert :func:`generating_to_symplectic` for a free symplectic matrix.

    Raises
    ------
    ValueError
        If the upper-right block of ``S`` is singular (``S`` is not free).
    """
    S = np.asarray(S, dtype=float)
    n = S.shape[0] // 2
    A, B, D = S[:n, :n], S[:n, n:], S[n:, n:]
    if np.linalg.cond(B) > max_cond:
        raise ValueError("matrix is not free: upper-right block is singular")
    L = np.linalg.inv(B)
    P = D @ L
    Q = L @ A
    return QuadraticGeneratingFunction(0.5 * (P + P.T), L, 0.5 * (Q + Q.T))


def dual_generating(W: QuadraticGeneratingFunction) -> QuadraticGeneratingFunction:
    """
    Generating function of the inverse, ``W*(x, x') = -W(x', x)``.

    The triple ``(P, L, Q)`` becomes ``(-Q, -L^T, -P)``. The Maslov index is
    set to ``n - m`` mod 4 so that the two quadratic Fourier transforms
    multiply to the identity, phase included.
    """
    return QuadraticGeneratingFunction(-W.Q, -W.L.T, -W.P, m=(W.n - W.m) % 4)


def rotation_generating(theta: float, n: int = 1) -> QuadraticGeneratingFunction:
    """Generating function of ``[[cos, sin], [-sin, cos]]`` (block-scalar)."""
    s = np.sin(theta)
    if abs(s) < 1e-12:
        raise ValueError("rotation by a multiple of pi is not free")
    eye = np.eye(n)
    cot = np.cos(theta) / s
    return QuadraticGeneratingFunction(cot * eye, eye / s, cot * eye)


def _size(W: QuadraticGeneratingFunction) -> float:
    Linv = np.linalg.inv(W.L)
    return max(float(np.max(np.abs(M))) for M in (W.P, W.Q, W.L, Linv))


@lru_cache(maxsize=256)
def _rotation_factor(theta: float, n: int):
    """Rotation generating function, its inverse matrix and its size (cached: the angle set is fixed)."""
    W = rotation_generating(theta, n)
    c, s = np.cos(theta) * np.eye(n), np.sin(theta) * np.eye(n)
    return W, np.block([[c, -s], [s, c]]), _size(W)


def free_factorization_candidates(S, tol: float = DEFAULT_TOL, angles: int | None = None) -> list:
    """
    All factorizations ``S = s(W1) s(W2)`` with ``W2`` a block rotation from
    a fixed angle set (``angles`` of them, default ``4n + 3``, plus the
    quarter turn), best conditioned first.
    """
    S = np.asarray(S, dtype=float)
    if not is_symplectic(S, max(tol, 1e-8 * max(1.0, np.max(np.abs(S)) ** 2))):
        raise ValueError("input is not symplectic")
    n = S.shape[0] // 2
    count = 4 * n + 3 if angles is None else int(angles)
    thetas = [np.pi / 2] + [np.pi * (k + 0.5) / count for k in range(count)]
    found = []
    for i, theta in enumerate(thetas):
        W2, inv2, size2 = _rotation_factor(theta, n)
        try:
            W1 = symplectic_to_generating(S @ inv2)
        except (ValueError, np.linalg.LinAlgError):
            continue
        found.append((max(_size(W1), size2), i, W1, W2))
    if not found:
        raise ValueError("no free factorization found among candidate rotations")
    # stable order: ties keep the quarter turn first
    found.sort(key=lambda c: (round(c[0], 12), c[1]))
    return [(W1, W2) for _, _, W1, W2 in found]


def free_factorization(S, tol: float = DEFAULT_TOL):
    """
    Split a symplectic matrix into two free factors.

    Returns ``(W1, W2)`` with ``s(W1) @ s(W2) == S``. The right factor is a
    block rotation; the angle is chosen among a fixed candidate set (the
    quarter turn ``J`` first) to keep both generating functions well
    conditioned. Works for non-free ``S`` such as the identity.
    """
    return free_factorization_candidates(S, tol)[0]
