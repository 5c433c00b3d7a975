"""
Acceptance criteria, each at its stated tolerance and runtime budget.

Criteria 1-11 run the same check functions as ``hamlift verify``;
criterion 12 runs the command itself in fresh interpreters.
"""

import os
import subprocess
import sys
import time
import warnings

import pytest

from conftest import ACCEPTANCE_LINES
from hamlift.verification import CRITERIA, VerifyConfig

# (criterion, title, runtime budget in seconds)
BUDGETS = [
    ("c01", "symplecticity of variational Jacobians", 3.0),  # 1 s for each of three Hamiltonians
    ("c02", "flow algebra: composition, inverse, conjugation", 5.0),
    ("c03", "Banyaga reconstruction", 10.0),
    ("c04", "extended phase space energy bookkeeping", 1.0),
    ("c05", "metaplectic unitarity and inverse", 5.0),
    ("c06", "metaplectic covariance transport", 5.0),
    ("c07", "tau-calculus", 10.0),
    ("c08", "symplectic covariance of Weyl quantization", 10.0),
    ("c09", "classical/quantum correspondence", 20.0),
    ("c10", "Stone generator convergence rates", 5.0),
    ("c11", "extended Schrodinger lemma", 5.0),
]


def record(key, title, ok, detail):
    line = f"{key} {'PASS' if ok else 'FAIL'}  {title}  ({detail})"
    ACCEPTANCE_LINES[key] = line
    print(line)


@pytest.mark.parametrize("key,title,budget", BUDGETS, ids=[b[0] for b in BUDGETS])
def test_criterion(key, title, budget):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        start = time.perf_counter()
        checks = CRITERIA[key](VerifyConfig())
        elapsed = time.perf_counter() - start
    failed = [f"{c.name}: {c.residual:.3g} !{c.relation} {c.tolerance:g}" for c in checks if not c.passed]
    worst = max(checks, key=lambda c: c.residual / c.tolerance if c.relation == "<" else 0.0)
    ok = not failed and elapsed < budget
    record(key, title, ok, f"{len(checks)} checks, worst {worst.name}={worst.residual:.2e}, "
                           f"{elapsed:.2f}s of {budget:g}s")
    assert not failed, failed
    assert elapsed < budget, f"{key} took {elapsed:.2f}s, budget {budget}s"


def test_criterion_1_budget_per_hamiltonian():
    import numpy as np

    from hamlift.hamiltonian_flow import integrate_variational
    from hamlift.presets import driven_oscillator, oscillator, truncated_pendulum

    for H in (oscillator(), driven_oscillator(), truncated_pendulum()):
        start = time.perf_counter()
        jt = integrate_variational(H, np.array([1.0, 0.0]), 0.0, 2 * np.pi, 4000)
        elapsed = time.perf_counter() - start
        assert jt.symplectic_defect() < 1e-8
        assert elapsed < 1.0, f"{H.label}: {elapsed:.2f}s"


def _verify(*args, cwd):
    env = {k: v for k, v in os.environ.items() if k != "HAMLIFT_HBAR"}
    return subprocess.run([sys.executable, "-m", "hamlift", "verify", *args], capture_output=True, cwd=cwd,
                          env=env, timeout=120)


def test_criterion_12_cli_determinism(tmp_path):
    first = _verify(cwd=tmp_path)
    second = _verify(cwd=tmp_path)
    identical = first.stdout == second.stdout and len(first.stdout) > 0
    bad = tmp_path / "tau0.ini"
    bad.write_text("[verify]\ncovariance_tau = 0\ncriteria = c08\n")
    neg = _verify("--config", str(bad), cwd=tmp_path)
    broken = tmp_path / "broken.ini"
    broken.write_text("[grid]\nN = many\n")
    malformed = _verify("--config", str(broken), cwd=tmp_path)
    codes = (first.returncode, second.returncode, neg.returncode, malformed.returncode)
    ok = identical and codes == (0, 0, 1, 2)
    record("c12", "CLI determinism and exit codes", ok,
           f"byte-identical={identical}, exit codes pass/pass/fail/config = {codes}")
    assert identical, first.stderr.decode()
    assert codes == (0, 0, 1, 2), (first.stderr.decode(), neg.stderr.decode(), malformed.stderr.decode())
    assert b"N" in malformed.stderr
