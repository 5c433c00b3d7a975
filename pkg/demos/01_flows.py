"""
Classical side: flows, their Jacobians, and recovering H from a flow.

Run with ``python3 demos/01_flows.py``.
"""

import numpy as np

from hamlift.hamiltonian_flow import (
    FlowDivergenceError,
    FlowMap,
    banyaga_reconstruct,
    compose_hamiltonians,
    integrate_flow,
    integrate_variational,
)
from hamlift.presets import driven_oscillator, free_particle, oscillator, truncated_pendulum, xxpp

# one period of the oscillator brings every point back
z = integrate_flow(FlowMap(oscillator(), 0.0, 2 * np.pi, 4000), np.array([1.0, 0.0]), keep=False).final
print(f"oscillator after 2 pi: {z}")

# the Jacobian of any Hamiltonian flow is symplectic, time-dependent or not
for H in (oscillator(), driven_oscillator(), truncated_pendulum()):
    jt = integrate_variational(H, np.array([1.0, 0.0]), 0.0, 2 * np.pi, 4000)
    print(f"{H.label:22s} max |S^T J S - J| = {jt.symplectic_defect():.1e}")

# H#K generates the composed flow f^H o f^K
HK = compose_hamiltonians(oscillator(), free_particle())
z0 = np.array([0.5, 0.5])
t = 0.7
direct = integrate_flow(FlowMap(HK, 0.0, t, 70), z0, keep=False).final
shear_then_rotate = np.array([[np.cos(t), np.sin(t)], [-np.sin(t), np.cos(t)]]) @ np.array([[1, t], [0, 1]]) @ z0
print(f"H#K flow {direct} vs rotation after shear {shear_then_rotate}")

# x^2 p^2 runs off to infinity; a smooth cutoff tames it
try:
    integrate_flow(FlowMap(xxpp(), 0.0, 10.0, 4000), np.array([2.0, 2.0]))
except FlowDivergenceError as exc:
    print(f"untruncated x^2 p^2: {exc}")

# a family of rotations determines its Hamiltonian up to a constant
Hr = banyaga_reconstruct(lambda z, t: np.stack([np.cos(t) * z[..., 0] + np.sin(t) * z[..., 1],
                                                 -np.sin(t) * z[..., 0] + np.cos(t) * z[..., 1]], axis=-1))
pts = np.array([[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]])
print("reconstructed H:", Hr(pts, 0.3), " expected:", 0.5 * np.sum(pts ** 2, axis=1))
