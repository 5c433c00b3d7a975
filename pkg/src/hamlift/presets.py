"""Named Hamiltonians used by the demos, the tests and the command line."""

from __future__ import annotations

import numpy as np

from .hamiltonian_flow import BumpTruncation, Hamiltonian, QuadraticHamiltonian, truncate_support

__all__ = [
    "oscillator",
    "free_particle",
    "driven_oscillator",
    "pendulum",
    "truncated_pendulum",
    "xxpp",
    "zero",
    "linear_momentum",
    "PRESETS",
    "get_preset",
]


def oscillator(omega: float = 1.0) -> QuadraticHamiltonian:
    """``H = 1/2 (p^2 + omega^2 x^2)``."""
    return QuadraticHamiltonian(np.diag([omega ** 2, 1.0]), label="oscillator")


def free_particle() -> QuadraticHamiltonian:
    """``H = p^2 / 2``; its flow is the shear ``(x, p) -> (x + t p, p)``."""
    return QuadraticHamiltonian(np.diag([0.0, 1.0]), label="free")


def zero(n: int = 1) -> QuadraticHamiltonian:
    return QuadraticHamiltonian(np.zeros((2 * n, 2 * n)), label="zero")


def linear_momentum() -> Hamiltonian:
    """``H = p``: uniform translation in ``x``."""
    return Hamiltonian(
        lambda z, t: z[..., 1],
        1,
        grad_func=lambda z, t: np.broadcast_to(np.array([0.0, 1.0]), z.shape).copy(),
        hess_func=lambda z, t: np.zeros(z.shape[:-1] + (2, 2)),
        separable=True,
        label="p",
    )


def driven_oscillator(amplitude: float = 0.1) -> Hamiltonian:
    """``H = 1/2 (p^2 + x^2) + amplitude * x * sin t``."""
    a = amplitude

    def func(z, t):
        x, p = z[..., 0], z[..., 1]
        return 0.5 * (p * p + x * x) + a * x * np.sin(t)

    def grad(z, t):
        x, p = z[..., 0], z[..., 1]
        return np.stack([x + a * np.sin(t), p], axis=-1)

    return Hamiltonian(
        func, 1, grad_func=grad,
        hess_func=lambda z, t: np.broadcast_to(np.eye(2), z.shape[:-1] + (2, 2)),
        dt_func=lambda z, t: a * z[..., 0] * np.cos(t),
        time_dependent=True, label="driven_oscillator",
    )


def pendulum() -> Hamiltonian:
    """``H = p^2 / 2 + 1 - cos x``."""

    def hess(z, t):
        out = np.zeros(z.shape[:-1] + (2, 2))
        out[..., 0, 0] = np.cos(z[..., 0])
        out[..., 1, 1] = 1.0
        return out

    return Hamiltonian(
        lambda z, t: 0.5 * z[..., 1] ** 2 + 1.0 - np.cos(z[..., 0]),
        1,
        grad_func=lambda z, t: np.stack([np.sin(z[..., 0]), z[..., 1]], axis=-1),
        hess_func=hess,
        separable=True,
        label="pendulum",
    )


def truncated_pendulum(inner_radius: float = 3.0, outer_radius: float = 5.0) -> Hamiltonian:
    return truncate_support(pendulum(), BumpTruncation(np.zeros(2), inner_radius, outer_radius))


def xxpp() -> Hamiltonian:
    """``H = x^2 p^2``. Orbits on ``xp = c`` grow like ``exp(2 c t)``."""

    def hess(z, t):
        x, p = z[..., 0], z[..., 1]
        out = np.empty(z.shape[:-1] + (2, 2))
        out[..., 0, 0] = 2 * p * p
        out[..., 1, 1] = 2 * x * x
        out[..., 0, 1] = out[..., 1, 0] = 4 * x * p
        return out

    return Hamiltonian(
        lambda z, t: (z[..., 0] * z[..., 1]) ** 2,
        1,
        grad_func=lambda z, t: np.stack([2 * z[..., 0] * z[..., 1] ** 2, 2 * z[..., 0] ** 2 * z[..., 1]], axis=-1),
        hess_func=hess,
        label="xxpp",
    )


PRESETS = {
    "oscillator": oscillator,
    "free": free_particle,
    "shear": free_particle,
    "driven_oscillator": driven_oscillator,
    "pendulum": pendulum,
    "truncated_pendulum": truncated_pendulum,
    "xxpp": xxpp,
    "zero": zero,
}


def get_preset(name: str) -> Hamiltonian:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValueError(f"unknown Hamiltonian preset {name!r}; choose from {sorted(PRESETS)}") from None
