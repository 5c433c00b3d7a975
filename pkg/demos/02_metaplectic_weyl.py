"""
Quadratic Fourier transforms and tau-ordered quantization.

Run with ``python3 demos/02_metaplectic_weyl.py``.
"""

import warnings

import numpy as np

from hamlift.grid import Grid, gaussian_state, phase_space_moments
from hamlift.metaplectic import apply_quadratic_fourier, project_metaplectic
from hamlift.phase_space import QuadraticGeneratingFunction, dual_generating
from hamlift.weyl import SYMBOLS, covariance_residual, tau_operator

grid = Grid.self_dual(1024)
psi = gaussian_state(grid, 0.0, 0.0, 0.8)
sigma = np.diag([0.8 ** 2 / 2, 1 / (2 * 0.8 ** 2)])

# S^W moves a Gaussian's covariance by the symplectic matrix it projects to
W = QuadraticGeneratingFunction(0.3, -0.7, 0.5)
s = project_metaplectic(W)
out = apply_quadratic_fourier(W, psi)
_, cov = phase_space_moments(out)
print("transported covariance:\n", cov, "\npredicted s Sigma s^T:\n", s @ sigma @ s.T)
print(f"norm {out.norm():.12f}, undo with W*: {apply_quadratic_fourier(dual_generating(W), out).distance(psi):.1e}")

# only the Weyl rule (tau = 1/2) makes x p Hermitian
g = Grid(256, -12.0, 12.0)
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    for tau in (0.0, 0.5, 1.0):
        r = tau_operator(SYMBOLS["xp"](), tau, g).hermiticity_residual()
        print(f"x p at tau={tau}: max |A - A^dagger| = {r:.2e}")

    # and only the Weyl rule commutes with metaplectic conjugation
    F = QuadraticGeneratingFunction(0.0, 1.0, 0.0)
    for tau in (0.0, 0.5):
        print(f"covariance residual, x p, tau={tau}: {covariance_residual(SYMBOLS['xp'](), F, tau, g):.2e}")
print(f"covariance residual, Gaussian symbol, tau=0.5: {covariance_residual(SYMBOLS['gauss'](), F, 0.5, g):.2e}")
