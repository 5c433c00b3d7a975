"""
Flows and propagators side by side for the harmonic oscillator.

Run with ``python3 demos/03_correspondence.py``.
"""

import numpy as np

from hamlift.correspondence import (
    METHODS,
    Propagator,
    correspondence_roundtrip,
    extended_schrodinger_check,
    stone_generator_estimate,
)
from hamlift.grid import Grid, coherent_state, phase_space_moments
from hamlift.io import to_json
from hamlift.presets import oscillator

grid = Grid.self_dual(512)
H = oscillator()
psi = coherent_state(grid, (1.0, 0.0))

# three independent propagators; the centers follow the classical orbit
for m in METHODS:
    out = Propagator(H, grid, m)(1.0, psi)
    mean, _ = phase_space_moments(out)
    print(f"{m:11s} <z>(1) = {mean}  (classical {np.cos(1.0):.6f}, {-np.sin(1.0):.6f})")

# after a full period the state comes back with a sign flip
back = Propagator(H, grid)(2 * np.pi, psi)
print(f"|<psi(2 pi), psi>| = {back.fidelity(psi):.12f},  <psi(2 pi), psi> = {psi.inner(back):.6f}")

# the generator from difference quotients converges at first and second order
P = Propagator(H, grid)
Hpsi = P.generator().apply(psi)
for variant in ("forward", "central"):
    errs = [stone_generator_estimate(P.family(), psi, d, variant).distance(Hpsi) for d in (1e-2, 5e-3, 2.5e-3)]
    print(f"{variant:8s} errors {np.array(errs)}  ratios {errs[0] / errs[1]:.3f}, {errs[1] / errs[2]:.3f}")

# a solution times exp(iE(t - t')) solves the extended equation for any E
times = 1e-3 * np.arange(21)
states = [P(t, psi) for t in times]
print(f"extended residual, E = 3.7: {extended_schrodinger_check(times, states, P.generator(), 3.7, (0.0, 1.3), grid):.1e}")

report = correspondence_roundtrip(H, grid, 2 * np.pi)
print(to_json(report.to_dict()))
