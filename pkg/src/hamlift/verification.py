"""
Acceptance checks shared by ``hamlift verify`` and the test suite.

Each ``criterion_*`` function returns a list of :class:`Check` records.
Inputs are fixed (seeded) so that reports are reproducible bit for bit.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .correspondence import (
    Propagator,
    correspondence_roundtrip,
    extended_phase_residual,
    extended_schrodinger_check,
    stone_generator_estimate,
)
from .grid import Grid, WaveFunction, coherent_state, gaussian_state, phase_space_moments
from .hamiltonian_flow import (
    ExtendedPoint,
    FlowMap,
    banyaga_reconstruct,
    compose_hamiltonians,
    conjugate_hamiltonian,
    extended_flow,
    integrate_flow,
    integrate_variational,
    invert_hamiltonian,
)
from .metaplectic import apply_quadratic_fourier, project_metaplectic
from .phase_space import QuadraticGeneratingFunction, dual_generating, generating_to_symplectic
from .presets import driven_oscillator, free_particle, oscillator, truncated_pendulum
from .weyl import SYMBOLS, KernelMatrix, Symbol, covariance_residual, kernel_to_symbol, symbol_to_kernel

__all__ = ["Check", "VerifyConfig", "CRITERIA", "run_criteria", "report_dict"]

log = logging.getLogger(__name__)


@dataclass
class Check:
    """``residual < tolerance`` (or ``>`` for lower bounds such as negative controls)."""

    name: str
    residual: float
    tolerance: float
    relation: str = "<"

    @property
    def passed(self) -> bool:
        r = float(self.residual)
        if not np.isfinite(r):
            return False
        return r < self.tolerance if self.relation == "<" else r > self.tolerance

    def to_dict(self) -> dict:
        return {"name": self.name, "residual": float(self.residual), "tolerance": float(self.tolerance),
                "relation": self.relation, "pass": self.passed}


@dataclass
class VerifyConfig:
    """Knobs of the acceptance run. Defaults reproduce the documented criteria."""

    hbar: float = 1.0
    seed: int = 0
    rk4_steps: int = 4000
    weyl_N: int = 256
    weyl_L: float = 12.0
    metaplectic_N: int = 1024
    propagation_N: int = 512
    covariance_tau: float = 0.5
    split_dt: float = 1e-3
    random_states: int = 100
    extra: dict = field(default_factory=dict)


RATE_TOL = 0.2

# the three generating functions used for metaplectic checks
GENERATORS = {
    "fourier": QuadraticGeneratingFunction(0.0, 1.0, 0.0),
    "shear": QuadraticGeneratingFunction(1.0, 1.0, 1.0),
    "generic": QuadraticGeneratingFunction(0.3, -0.7, 0.5),
}


def _flow(H, z, t, steps):
    return integrate_flow(FlowMap(H, 0.0, t, steps), z, keep=False).final


def criterion_symplecticity(cfg: VerifyConfig) -> list:
    checks = []
    for H in (oscillator(), driven_oscillator(), truncated_pendulum()):
        jt = integrate_variational(H, np.array([1.0, 0.0]), 0.0, 2 * np.pi, cfg.rk4_steps)
        checks.append(Check(f"c01.symplectic_defect.{H.label}", jt.symplectic_defect(), 1e-8))
    return checks


def criterion_flow_algebra(cfg: VerifyConfig) -> list:
    rng = np.random.default_rng(cfg.seed)
    Z = rng.uniform(-1.5, 1.5, (10, 2))
    H, K, t = oscillator(), free_particle(), 0.7
    fine = 700
    HK = compose_hamiltonians(H, K)
    comp = np.max(np.abs(_flow(HK, Z, t, 70) - _flow(H, _flow(K, Z, t, fine), t, fine)))
    Hi = invert_hamiltonian(H)
    inv = np.max(np.abs(_flow(H, _flow(Hi, Z, t, 70), t, fine) - Z))
    s = generating_to_symplectic(GENERATORS["generic"])
    Hc = conjugate_hamiltonian(H, s)
    conj = np.max(np.abs(_flow(H, Z @ np.linalg.inv(s).T, t, fine) @ s.T - _flow(Hc, Z, t, fine)))
    return [Check("c02.composition", comp, 1e-6), Check("c02.inverse", inv, 1e-6), Check("c02.conjugation", conj, 1e-6)]


def rotation_family(z, t):
    c, s = np.cos(t), np.sin(t)
    return np.stack([c * z[..., 0] + s * z[..., 1], -s * z[..., 0] + c * z[..., 1]], axis=-1)


def shear_family(z, t):
    return np.stack([z[..., 0] + t * z[..., 1], z[..., 1]], axis=-1)


def criterion_banyaga(cfg: VerifyConfig) -> list:
    rng = np.random.default_rng(cfg.seed + 1)
    r = 2.0 * np.sqrt(rng.uniform(0, 1, 200))
    th = rng.uniform(0, 2 * np.pi, 200)
    Z = np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)
    checks = []
    cases = (("rotation", rotation_family, lambda z: 0.5 * np.sum(z * z, axis=-1)),
             ("shear", shear_family, lambda z: 0.5 * z[..., 1] ** 2))
    for name, fam, exact in cases:
        Hr = banyaga_reconstruct(fam)
        ref = exact(Z)
        rel = max(np.max(np.abs(Hr(Z, t) - ref)) / np.max(np.abs(ref)) for t in (0.0, 0.5, 1.0))
        checks.append(Check(f"c03.hamiltonian.{name}", rel, 1e-4))
        pts = Z[:10]
        dev = np.max(np.abs(_flow(Hr, pts, 1.0, 50) - fam(pts, 1.0)))
        checks.append(Check(f"c03.flow.{name}", dev, 1e-4))
    return checks


def criterion_extended(cfg: VerifyConfig) -> list:
    H = driven_oscillator()
    z0, E0, t = np.array([0.8, -0.3]), 0.25, 1.0
    end = extended_flow(H, ExtendedPoint(z0, 0.0, E0), t, steps=1000)
    zt = _flow(H, z0, t, 1000)
    energy = abs(end.E - (E0 + H(zt, t) - H(z0, 0.0)))
    return [Check("c04.energy_bookkeeping", energy, 1e-6),
            Check("c04.position_part", float(np.max(np.abs(end.z - zt))), 1e-6),
            Check("c04.time_part", abs(end.t - t), 1e-12)]


def random_states(grid: Grid, count: int, seed: int) -> list:
    """Normalized superpositions of four coherent states with random centers and weights."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        v = np.zeros(grid.N, dtype=complex)
        for _ in range(4):
            z = rng.uniform(-2.5, 2.5, 2)
            c = rng.normal() + 1j * rng.normal()
            v += c * coherent_state(grid, z).values
        out.append(WaveFunction(grid, v).normalized())
    return out


def criterion_metaplectic_unitarity(cfg: VerifyConfig) -> list:
    g = Grid.self_dual(cfg.metaplectic_N, cfg.hbar)
    states = random_states(g, cfg.random_states, cfg.seed + 2)
    checks = []
    for name, W in GENERATORS.items():
        Ws = dual_generating(W)
        nrm, inv = 0.0, 0.0
        for psi in states:
            phi = apply_quadratic_fourier(W, psi)
            nrm = max(nrm, abs(phi.norm() - 1.0))
            inv = max(inv, apply_quadratic_fourier(Ws, phi).distance(psi))
        checks.append(Check(f"c05.norm.{name}", nrm, 1e-6))
        checks.append(Check(f"c05.inverse.{name}", inv, 1e-6))
    return checks


def criterion_metaplectic_covariance(cfg: VerifyConfig) -> list:
    g = Grid.self_dual(cfg.metaplectic_N, cfg.hbar)
    # squeezed, displaced Gaussian so that all covariance entries matter
    psi = gaussian_state(g, 0.6, -0.4, width=0.8 * np.sqrt(cfg.hbar))
    mean0, cov0 = phase_space_moments(psi)
    checks = []
    for name, W in GENERATORS.items():
        s = project_metaplectic(W)
        mean, cov = phase_space_moments(apply_quadratic_fourier(W, psi))
        checks.append(Check(f"c06.covariance.{name}", float(np.max(np.abs(cov - s @ cov0 @ s.T))), 1e-5))
        checks.append(Check(f"c06.mean.{name}", float(np.max(np.abs(mean - s @ mean0))), 1e-5))
    return checks


def _weyl_grid(cfg):
    return Grid(cfg.weyl_N, -cfg.weyl_L, cfg.weyl_L, cfg.hbar)


def criterion_tau_calculus(cfg: VerifyConfig) -> list:
    g = _weyl_grid(cfg)
    taus = (0.0, 0.25, 0.5, 1.0)
    checks = []
    # x-only symbol routed through the general (x, p) kernel builder
    ax = Symbol(lambda x, p: np.cos(x) * np.exp(-x * x / 8) + 0 * p, "cos_gauss_x", "xp")
    diag = np.diag(ax(g.x, 0.0)).astype(complex)
    mult = max(np.max(np.abs(symbol_to_kernel(ax, tau, g, warn=False).operator().matrix - diag)) for tau in taus)
    checks.append(Check("c07.multiplication", mult, 1e-12))
    gauss = SYMBOLS["gauss"]()
    ref = gauss.sample(g)
    rt = max(np.max(np.abs(kernel_to_symbol(symbol_to_kernel(gauss, tau, g)).table - ref)) for tau in taus)
    checks.append(Check("c07.roundtrip", rt, 1e-6))
    delta = max(np.max(np.abs(kernel_to_symbol(KernelMatrix(np.eye(g.N) / g.dx, g, tau)).table - 1.0))
                for tau in taus)
    checks.append(Check("c07.delta_kernel", delta, 1e-8))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        herm = max(symbol_to_kernel(SYMBOLS[k](), 0.5, g).operator().hermiticity_residual()
                   for k in ("gauss", "xp", "x2", "p2", "oscillator"))
        xp0 = symbol_to_kernel(SYMBOLS["xp"](), 0.0, g).operator().hermiticity_residual()
    checks.append(Check("c07.hermitian_weyl", herm, 1e-10))
    checks.append(Check("c07.non_hermitian_xp_tau0", xp0, 1e-3, ">"))
    return checks


def criterion_symplectic_covariance(cfg: VerifyConfig) -> list:
    g = _weyl_grid(cfg)
    tau = cfg.covariance_tau
    checks = []
    gauss = SYMBOLS["gauss"]()
    for name in ("fourier", "shear"):
        res = covariance_residual(gauss, GENERATORS[name], tau, g)
        checks.append(Check(f"c08.covariance.{name}", res, 1e-5))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        control = covariance_residual(SYMBOLS["xp"](), GENERATORS["fourier"], 0.0, g)
    checks.append(Check("c08.negative_control_tau0", control, 1e-2, ">"))
    return checks


def criterion_correspondence(cfg: VerifyConfig) -> list:
    g = Grid.self_dual(cfg.propagation_N, cfg.hbar)
    rep = correspondence_roundtrip(oscillator(), g, 2 * np.pi, dt=cfg.split_dt, flow_steps=cfg.rk4_steps)
    checks = []
    for key, val in sorted(rep.quantum_residuals.items()):
        kind = key.split(".")[0]
        tol = {"ehrenfest_mean": 1e-6, "ehrenfest_cov": 1e-5, "agreement": 1e-5, "norm": 1e-6,
               "covariance": 1e-5}[kind]
        checks.append(Check(f"c09.{key}", val, tol))
    for key, val in sorted(rep.classical_residuals.items()):
        checks.append(Check(f"c09.classical.{key}", val, 1e-8))
    checks.append(Check("c09.roundtrip_matrix", rep.roundtrip_residual, 1e-6))
    return checks


def criterion_stone(cfg: VerifyConfig) -> list:
    g = Grid.self_dual(cfg.propagation_N, cfg.hbar)
    P = Propagator(oscillator(), g)
    F = P.family()
    psi = coherent_state(g, (1.0, 0.0))
    Hpsi = P.generator().apply(psi)
    dts = (1e-2, 5e-3, 2.5e-3)
    checks = []
    for variant, order in (("forward", 1), ("central", 2)):
        errs = [stone_generator_estimate(F, psi, d, variant).distance(Hpsi) for d in dts]
        for i in range(len(dts) - 1):
            ratio = errs[i] / errs[i + 1]
            nominal = 2.0 ** order
            checks.append(Check(f"c10.{variant}.ratio{i + 1}", abs(ratio - nominal) / nominal, RATE_TOL))
    return checks


def criterion_extended_lemma(cfg: VerifyConfig) -> list:
    g = Grid.self_dual(cfg.propagation_N, cfg.hbar)
    P = Propagator(oscillator(), g)
    psi = coherent_state(g, (1.0, 0.0))
    dt = 1e-3
    times = dt * np.arange(41)
    states = [P(t, psi) for t in times]
    Hop = P.generator()
    res = extended_schrodinger_check(times, states, Hop, 3.7, (0.0, 0.5, 1.3), g, dt_prime=1e-4)
    base = extended_schrodinger_check(times, states, Hop, 0.0, (0.0,), g)
    phase = extended_phase_residual(psi, 1.0, 0.3, (0.0, 0.5, 1.0), dt_prime=1e-4)
    return [Check("c11.extended_residual_E3.7", res, 1e-4),
            Check("c11.base_residual_E0", base, 1e-4),
            Check("c11.phase_identity_E1", phase, 1e-8)]


CRITERIA = {
    "c01": criterion_symplecticity,
    "c02": criterion_flow_algebra,
    "c03": criterion_banyaga,
    "c04": criterion_extended,
    "c05": criterion_metaplectic_unitarity,
    "c06": criterion_metaplectic_covariance,
    "c07": criterion_tau_calculus,
    "c08": criterion_symplectic_covariance,
    "c09": criterion_correspondence,
    "c10": criterion_stone,
    "c11": criterion_extended_lemma,
}


def run_criteria(cfg: VerifyConfig | None = None, only=None) -> list:
    """Run the selected criteria (all by default); checks come back sorted by name."""
    cfg = VerifyConfig() if cfg is None else cfg
    keys = sorted(CRITERIA) if not only else sorted(only)
    checks = []
    for key in keys:
        if key not in CRITERIA:
            raise KeyError(f"unknown criterion {key!r}; choose from {sorted(CRITERIA)}")
        log.info("running %s", key)
        checks.extend(CRITERIA[key](cfg))
    return sorted(checks, key=lambda c: c.name)


def report_dict(checks, label: str = "acceptance", parameters: dict | None = None) -> dict:
    return {
        "hamiltonian_label": label,
        "checks": [c.to_dict() for c in checks],
        "parameters": parameters or {},
        "pass": all(c.passed for c in checks),
    }

