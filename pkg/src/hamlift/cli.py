"""
Command-line harness: ``hamlift <command> [options]``.

Commands
--------
flow        trajectory CSV of a preset Hamiltonian
jacobian    JSON with the variational Jacobian ``S_t`` and its symplectic defect
banyaga     JSON with a Hamiltonian reconstructed from a flow family
quantize    JSON summary of a tau-quantized symbol
propagate   wavefunction CSV after Schrodinger propagation of a coherent state
covariance  JSON record of a symplectic covariance residual
verify      JSON acceptance report; exit status 1 if any check fails

Settings come from an INI file (``--config``), then the ``HAMLIFT_HBAR``
environment variable, then command-line flags. Exit codes: 0 success,
1 verification failure or numerical error, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import io as hio
from .correspondence import METHODS, Propagator
from .grid import Grid, coherent_state
from .hamiltonian_flow import (
    FlowDivergenceError,
    FlowMap,
    QuadraticHamiltonian,
    banyaga_reconstruct,
    integrate_flow,
    integrate_variational,
)
from .metaplectic import AliasingError
from .presets import PRESETS, get_preset
from .weyl import SYMBOLS, covariance_residual, symbol_to_kernel

__all__ = ["RunConfig", "ConfigError", "load_config", "main", "build_parser"]

log = logging.getLogger("hamlift")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULT_CONFIG = """\
# hamlift run configuration (all keys optional)
[run]
hbar = 1.0
seed = 0

[grid]
N = 256
x_min = -12.0
x_max = 12.0

[integrator]
method = rk4
steps = 4000

[hamiltonian]
# a preset name, or inline blocks A, B, C of H = A x^2/2 + B x p + C p^2/2
preset = oscillator

[quantize]
symbol = xp
tau = 0.5

[verify]
covariance_tau = 0.5
criteria = all
"""


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


@dataclass
class RunConfig:
    hbar: float = 1.0
    seed: int = 0
    N: int = 256
    x_min: float = -12.0
    x_max: float = 12.0
    method: str = "rk4"
    steps: int = 4000
    preset: str | None = "oscillator"
    blocks: tuple | None = None
    symbol: str = "xp"
    tau: float = 0.5
    covariance_tau: float = 0.5
    criteria: list = field(default_factory=list)

    def grid(self) -> Grid:
        return Grid(self.N, self.x_min, self.x_max, self.hbar)

    def hamiltonian(self):
        if self.blocks is not None:
            return QuadraticHamiltonian.from_blocks(*self.blocks, label="inline")
        return get_preset(self.preset)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["blocks"] = None if self.blocks is None else list(self.blocks)
        return d


def _get(cp, section, key, conv, default):
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key)
    try:
        val = conv(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a valid {conv.__name__}") from None
    if isinstance(val, float) and not math.isfinite(val):
        raise ConfigError(f"[{section}] {key} must be finite")
    return val


def _validate(cfg: RunConfig):
    if not cfg.hbar > 0:
        raise ConfigError(f"hbar must be positive, got {cfg.hbar}")
    if cfg.N < 16 or cfg.N & (cfg.N - 1):
        raise ConfigError(f"[grid] N must be a power of two >= 16, got {cfg.N}")
    if not cfg.x_max > cfg.x_min:
        raise ConfigError("[grid] x_max must exceed x_min")
    if cfg.steps < 1:
        raise ConfigError(f"[integrator] steps must be >= 1, got {cfg.steps}")
    if cfg.method not in ("rk4", "symplectic_leapfrog") + METHODS:
        raise ConfigError(f"[integrator] method {cfg.method!r} is not known")
    if cfg.blocks is None and cfg.preset not in PRESETS:
        raise ConfigError(f"[hamiltonian] preset {cfg.preset!r} is not known; choose from {sorted(PRESETS)}")
    if cfg.symbol not in SYMBOLS:
        raise ConfigError(f"[quantize] symbol {cfg.symbol!r} is not known; choose from {sorted(SYMBOLS)}")
    for key in ("tau", "covariance_tau"):
        if not 0.0 <= getattr(cfg, key) <= 1.0:
            raise ConfigError(f"{key} must lie in [0, 1]")
    from .verification import CRITERIA

    bad = [c for c in cfg.criteria if c not in CRITERIA]
    if bad:
        raise ConfigError(f"[verify] criteria: unknown {bad}; choose from {sorted(CRITERIA)}")


def load_config(path=None, text: str | None = None, env=None) -> RunConfig:
    """Read an INI configuration (file or text) and apply ``HAMLIFT_HBAR``."""
    env = os.environ if env is None else env
    cp = configparser.ConfigParser()
    try:
        if text is not None:
            cp.read_string(text)
        elif path is not None:
            with open(path, encoding="utf-8") as fh:
                cp.read_file(fh)
    except (configparser.Error, OSError) as exc:
        raise ConfigError(f"cannot read configuration: {exc}") from None
    known = {
        "run": {"hbar", "seed"},
        "grid": {"n", "x_min", "x_max"},
        "integrator": {"method", "steps"},
        "hamiltonian": {"preset", "a", "b", "c"},
        "quantize": {"symbol", "tau"},
        "verify": {"covariance_tau", "criteria"},
    }
    for sec in cp.sections():
        if sec not in known:
            raise ConfigError(f"unknown section [{sec}]")
        for key in cp.options(sec):
            if key not in known[sec]:
                raise ConfigError(f"[{sec}] {key}: unknown key")
    d = RunConfig()
    cfg = RunConfig(
        hbar=_get(cp, "run", "hbar", float, d.hbar),
        seed=_get(cp, "run", "seed", int, d.seed),
        N=_get(cp, "grid", "N", int, d.N),
        x_min=_get(cp, "grid", "x_min", float, d.x_min),
        x_max=_get(cp, "grid", "x_max", float, d.x_max),
        method=_get(cp, "integrator", "method", str, d.method),
        steps=_get(cp, "integrator", "steps", int, d.steps),
        preset=_get(cp, "hamiltonian", "preset", str, d.preset),
        symbol=_get(cp, "quantize", "symbol", str, d.symbol),
        tau=_get(cp, "quantize", "tau", float, d.tau),
        covariance_tau=_get(cp, "verify", "covariance_tau", float, d.covariance_tau),
    )
    if any(cp.has_option("hamiltonian", k) for k in "ABC"):
        cfg.blocks = tuple(_get(cp, "hamiltonian", k, float, 0.0) for k in "ABC")
    crit = _get(cp, "verify", "criteria", str, "all").strip()
    cfg.criteria = [] if crit in ("", "all") else [c.strip() for c in crit.split(",") if c.strip()]
    if "HAMLIFT_HBAR" in env:
        try:
            cfg.hbar = float(env["HAMLIFT_HBAR"])
        except ValueError:
            raise ConfigError(f"HAMLIFT_HBAR={env['HAMLIFT_HBAR']!r} is not a number") from None
    _validate(cfg)
    return cfg


def _vector(text: str, what: str):
    try:
        v = np.array([float(s) for s in text.split(",")])
    except ValueError:
        raise ConfigError(f"{what} must be comma-separated numbers, got {text!r}") from None
    if not np.all(np.isfinite(v)):
        raise ConfigError(f"{what} must be finite")
    return v


def _emit(args, text: str):
    hio.write_text(text, args.out, sys.stdout)


# commands


def cmd_flow(cfg: RunConfig, args) -> int:
    H = cfg.hamiltonian()
    z0 = _vector(args.z0, "--z0")
    if z0.size != 2 * H.n:
        raise ConfigError(f"--z0 needs {2 * H.n} components")
    method = cfg.method if cfg.method in ("rk4", "symplectic_leapfrog") else "rk4"
    traj = integrate_flow(FlowMap(H, 0.0, args.t, cfg.steps, method), z0)
    E = H(traj.z, traj.t) if args.energy else None
    _emit(args, hio.trajectory_csv(traj.t, traj.z, E))
    return EXIT_OK


def cmd_jacobian(cfg: RunConfig, args) -> int:
    H = cfg.hamiltonian()
    z0 = _vector(args.z0, "--z0")
    jt = integrate_variational(H, z0, 0.0, args.t, cfg.steps, keep=False)
    out = {"hamiltonian_label": H.label, "t": args.t, "steps": cfg.steps, "z0": z0, "z_t": jt.z[-1],
           "S": jt.S[-1], "symplectic_defect": jt.symplectic_defect()}
    _emit(args, hio.to_json(out))
    return EXIT_OK


def _families():
    from .verification import rotation_family, shear_family

    return {"rotation": (rotation_family, lambda z: 0.5 * np.sum(z * z, axis=-1)),
            "shear": (shear_family, lambda z: 0.5 * z[..., 1] ** 2)}


def cmd_banyaga(cfg: RunConfig, args) -> int:
    fam, exact = _families()[args.family]
    Hr = banyaga_reconstruct(fam)
    r = np.linspace(-2.0, 2.0, args.points)
    Z = np.stack(np.meshgrid(r, r, indexing="ij"), axis=-1).reshape(-1, 2)
    Z = Z[np.sum(Z * Z, axis=-1) <= 4.0 + 1e-12]
    vals = Hr(Z, args.t)
    ref = exact(Z)
    rel = float(np.max(np.abs(vals - ref)) / np.max(np.abs(ref)))
    out = {"family": args.family, "t": args.t, "relative_error": rel,
           "samples": np.column_stack([Z, vals])}
    _emit(args, hio.to_json(out))
    return EXIT_OK


def cmd_quantize(cfg: RunConfig, args) -> int:
    g = cfg.grid()
    a = SYMBOLS[cfg.symbol]()
    op = symbol_to_kernel(a, cfg.tau, g, warn=False).operator()
    M = op.matrix
    c = g.N // 2
    out = {"symbol": cfg.symbol, "tau": cfg.tau, "grid": g.to_dict(),
           "hermiticity_residual": op.hermiticity_residual(),
           "diagonal_only": bool(np.count_nonzero(M - np.diag(np.diag(M))) == 0),
           "center_block": hio.operator_json(M[c - 2:c + 2, c - 2:c + 2])}
    _emit(args, hio.to_json(out))
    return EXIT_OK


def cmd_propagate(cfg: RunConfig, args) -> int:
    g = cfg.grid()
    H = cfg.hamiltonian()
    method = cfg.method if cfg.method in METHODS else "eigensolve"
    psi = coherent_state(g, _vector(args.z0, "--z0"))
    out = Propagator(H, g, method, dt=args.dt)(args.t, psi)
    log.info("norm drift %.3g", abs(out.norm() - psi.norm()))
    _emit(args, hio.wavefunction_csv(out))
    return EXIT_OK


def cmd_covariance(cfg: RunConfig, args) -> int:
    from .verification import GENERATORS

    g = cfg.grid()
    W = GENERATORS[args.W]
    res = covariance_residual(SYMBOLS[cfg.symbol](), W, cfg.tau, g)
    _emit(args, hio.to_json({"tau": cfg.tau, "W": W.to_dict(), "symbol": cfg.symbol, "residual": res}))
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> int:
    from .verification import VerifyConfig, report_dict, run_criteria

    vc = VerifyConfig(hbar=cfg.hbar, seed=cfg.seed, covariance_tau=cfg.covariance_tau)
    checks = run_criteria(vc, cfg.criteria or None)
    rep = report_dict(checks, "acceptance", {"config": cfg.to_dict(), "verify": asdict(vc)})
    for c in rep["checks"]:
        # six significant digits keep the report byte-stable across runs
        c["residual"] = float(f"{c['residual']:.6e}")
    _emit(args, hio.to_json(rep))
    failed = [c.name for c in checks if not c.passed]
    for name in failed:
        print(f"FAIL {name}", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


COMMANDS = {
    "flow": cmd_flow,
    "jacobian": cmd_jacobian,
    "banyaga": cmd_banyaga,
    "quantize": cmd_quantize,
    "propagate": cmd_propagate,
    "covariance": cmd_covariance,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI configuration file")
    common.add_argument("--hbar", type=float, help="Planck constant (overrides config and HAMLIFT_HBAR)")
    common.add_argument("--grid-n", type=int, dest="grid_n", help="grid size N (power of two)")
    common.add_argument("--steps", type=int, help="integrator steps")
    common.add_argument("--method", help="integrator (rk4, symplectic_leapfrog) or propagation method")
    common.add_argument("--tau", type=float, help="ordering parameter in [0, 1]")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    p = argparse.ArgumentParser(prog="hamlift", description="Hamiltonian flows and their quantum lifts.")
    p.add_argument("--print-config", action="store_true", help="print the default configuration and exit")
    sub = p.add_subparsers(dest="command")

    s = sub.add_parser("flow", parents=[common], help="integrate Hamilton's equations")
    s.add_argument("--z0", default="1,0")
    s.add_argument("--t", type=float, default=2 * math.pi)
    s.add_argument("--energy", action="store_true", help="append the energy column E")

    s = sub.add_parser("jacobian", parents=[common], help="variational Jacobian along an orbit")
    s.add_argument("--z0", default="1,0")
    s.add_argument("--t", type=float, default=2 * math.pi)

    s = sub.add_parser("banyaga", parents=[common], help="reconstruct H from a flow family")
    s.add_argument("--family", choices=("rotation", "shear"), default="rotation")
    s.add_argument("--t", type=float, default=0.5)
    s.add_argument("--points", type=int, default=9)

    s = sub.add_parser("quantize", parents=[common], help="tau-quantize a symbol")
    s.add_argument("--symbol", choices=sorted(SYMBOLS))

    s = sub.add_parser("propagate", parents=[common], help="propagate a coherent state")
    s.add_argument("--z0", default="1,0")
    s.add_argument("--t", type=float, default=2 * math.pi)
    s.add_argument("--dt", type=float, default=1e-3, help="split-step time step")

    s = sub.add_parser("covariance", parents=[common], help="symplectic covariance residual")
    s.add_argument("--symbol", choices=sorted(SYMBOLS), default="gauss")
    s.add_argument("--W", choices=("fourier", "shear", "generic"), default="fourier")

    s = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    s.add_argument("--criteria", help="comma-separated subset, e.g. c01,c05 (default: all)")
    return p


def _apply_flags(cfg: RunConfig, args):
    if args.hbar is not None:
        cfg.hbar = args.hbar
    if args.grid_n is not None:
        cfg.N = args.grid_n
    if args.steps is not None:
        cfg.steps = args.steps
    if args.method is not None:
        cfg.method = args.method
    if args.tau is not None:
        cfg.tau = args.tau
        cfg.covariance_tau = args.tau
    if getattr(args, "symbol", None):
        cfg.symbol = args.symbol
    if getattr(args, "criteria", None):
        cfg.criteria = [c.strip() for c in args.criteria.split(",") if c.strip()]
    _validate(cfg)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_config:
        sys.stdout.write(DEFAULT_CONFIG)
        return EXIT_OK
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        _apply_flags(cfg, args)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"hamlift: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FlowDivergenceError, AliasingError, ValueError) as exc:
        print(f"hamlift: {args.command} failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
