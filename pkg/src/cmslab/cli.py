"""Command-line front end.

    cmslab verify --suite hecke --n 3
    cmslab flow --n 3 --hams 2,3 --t 5 --step 1e-3 --out runs/flow
    cmslab transport --n 3 --N 2 --freezing --t 2
    cmslab wkb --case free-gaussian --hbars 0.2,0.1,0.05
    cmslab rmatrix --N 3
    cmslab freeze --n 4 --N 2

Exit codes: 0 pass, 1 usage error, 2 assertion failure, 3 numerical guard.
A JSON ``--config`` file may hold any of the flag names (``hams`` and
``hbars`` as lists); flags given on the command line win.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np
from scipy.linalg import expm

from . import classical as cl
from . import heckerep as hr
from . import hybrid as hy
from . import rmatrix as rm
from . import suites
from . import wkb
from .reports import _clean, bundle, dumps
from .spinspace import SpinVector

EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_GUARD = 0, 1, 2, 3
MAX_SPIN_DIM = 4096
GUARDS = (cl.CollisionError, cl.StepUnderflowError, cl.NonRealValueError, wkb.CausticError,
          hy.NotHermitianError, hy.OrbitNotClosedError)


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    suite: str = "all"
    n: int = 3
    N: int = 2
    hams: tuple = (2,)
    t: float = 1.0
    step: float = 1e-3
    tol: float | None = None
    hbars: tuple = (0.2, 0.1, 0.05, 0.025)
    seed: int = 0
    out: str | None = None
    case: str = "free-gaussian"
    freezing: bool = False
    init: str | None = None

    def validate(self, command: str) -> None:
        if self.tol is not None and not self.tol > 0:
            raise UsageError("tolerances must be positive")
        if not self.step > 0 or not self.t >= 0:
            raise UsageError("need step > 0 and t >= 0")
        if any(not h > 0 for h in self.hbars):
            raise UsageError("hbar values must be positive")
        if self.n < 2 or self.N < 2:
            raise UsageError("need n >= 2 and N >= 2")
        if command in ("transport", "freeze") and self.N ** self.n > MAX_SPIN_DIM:
            raise UsageError(f"spin space N^n = {self.N ** self.n} exceeds {MAX_SPIN_DIM}")
        if any(k < 1 for k in self.hams):
            raise UsageError("Hamiltonian orders start at 1")


def _csv_floats(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _csv_ints(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cmslab", description="spin CMS verification and simulation")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    # defaults are None so that only explicit flags override the config file
    common.add_argument("--config", type=str)
    common.add_argument("--n", type=int)
    common.add_argument("--N", type=int)
    common.add_argument("--hams", type=_csv_ints)
    common.add_argument("--t", type=float)
    common.add_argument("--step", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--hbars", type=_csv_floats)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", type=str)
    common.add_argument("--init", type=str, help="JSON file with initial p and q lists")
    v = sub.add_parser("verify", parents=[common], help="run verification suites")
    v.add_argument("--suite", type=str, help="comma list of: " + ", ".join(suites.NAMES) + " or all")
    fl = sub.add_parser("flow", parents=[common], help="classical multi-time flow")
    fl.add_argument("--freezing", action="store_true", default=None)
    tr = sub.add_parser("transport", parents=[common], help="hybrid spin transport")
    tr.add_argument("--freezing", action="store_true", default=None)
    w = sub.add_parser("wkb", parents=[common], help="WKB convergence study")
    w.add_argument("--case", type=str)
    sub.add_parser("rmatrix", parents=[common], help="R-matrix identities")
    sub.add_parser("freeze", parents=[common], help="Haldane-Shastry operators at the freezing point")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("config must be a JSON object")
    names = {f.name for f in fields(RunConfig)}
    unknown = set(data) - names
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for name in names:
        val = getattr(args, name, None)
        if val is not None:
            data[name] = val
    for key in ("hams", "hbars"):
        if key in data:
            data[key] = tuple(data[key])
    try:
        return RunConfig(**data)
    except TypeError as exc:
        raise UsageError(str(exc)) from None


def _emit(cfg: RunConfig, name: str, text: str) -> None:
    if cfg.out:
        d = Path(cfg.out)
        d.mkdir(parents=True, exist_ok=True)
        (d / name).write_text(text)


def _finish(cfg: RunConfig, name: str, payload: dict, passed: bool) -> int:
    text = dumps(payload) + "\n"
    _emit(cfg, name, text)
    sys.stdout.write(text)
    return EXIT_OK if passed else EXIT_FAIL


def _params(cfg: RunConfig) -> suites.SuiteParams:
    return suites.SuiteParams(n=cfg.n, N=cfg.N, seed=cfg.seed, tol=cfg.tol, step=cfg.step, t=cfg.t,
                              hbars=cfg.hbars)


def cmd_verify(cfg: RunConfig) -> int:
    names = list(suites.NAMES) if cfg.suite == "all" else [s.strip() for s in cfg.suite.split(",")]
    bad = [s for s in names if s not in suites.RUNNERS]
    if bad:
        raise UsageError(f"unknown suite(s) {bad}")
    P = _params(cfg)
    if any(s in ("hecke", "goldens", "unity") for s in names):
        try:
            hr._check_cost(cfg.n)
        except hr.CostGuardError as exc:
            raise UsageError(str(exc)) from None
    reports = []
    for s in names:
        for r in suites.run(s, P):
            r.parameters.setdefault("suite", s)
            reports.append(r)
    payload = bundle(reports, command="verify", suites=names, n=cfg.n, N=cfg.N, seed=cfg.seed)
    return _finish(cfg, "verify.json", payload, payload["passed"])


def _initial_point(cfg: RunConfig) -> cl.PhasePoint:
    if cfg.init:
        try:
            data = json.loads(Path(cfg.init).read_text())
            x = cl.PhasePoint(data["p"], data["q"])
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"bad initial data: {exc}") from None
        if x.n != cfg.n:
            raise UsageError(f"initial data has {x.n} particles, --n is {cfg.n}")
        return x
    if cfg.freezing:
        return cl.freezing_point(cfg.n)
    return cl.PhasePoint.random(cfg.n, np.random.default_rng(cfg.seed), min_gap=0.5)


def _flow_weights(cfg: RunConfig) -> dict:
    return {k: 1.0 for k in cfg.hams}


def cmd_flow(cfg: RunConfig) -> int:
    x0 = _initial_point(cfg)
    orders = tuple(range(1, max(cfg.n, max(cfg.hams)) + 1))
    try:
        traj = cl.flow(x0, [(_flow_weights(cfg), cfg.t)], step=cfg.step, ham_orders=orders)
    except cl.CollisionError as exc:
        if exc.trajectory is not None:
            _emit(cfg, "trajectory.csv", exc.trajectory.to_csv())
        _emit(cfg, "summary.json", dumps({"partial": True, "error": str(exc)}) + "\n")
        raise
    _emit(cfg, "trajectory.csv", traj.to_csv())
    drift = {f"H_{k}": float(d) for k, d in zip(orders, traj.drift())}
    min_gap = min(cl.min_pair_distance(traj.point(i).z) for i in range(len(traj.times)))
    tol = cfg.tol or 1e-6
    passed = max(drift.values()) <= tol
    payload = {"command": "flow", "n": cfg.n, "hams": list(cfg.hams), "t": cfg.t, "step": cfg.step,
               "seed": cfg.seed, "freezing": cfg.freezing, "partial": False, "passed": passed,
               "max_drift": drift, "min_pair_distance": min_gap,
               "isospectral_drift": cl.isospectral_drift(traj), "steps": len(traj.times) - 1}
    return _finish(cfg, "summary.json", {"summary": _clean(payload), "passed": passed}, passed)


def cmd_transport(cfg: RunConfig) -> int:
    x0 = _initial_point(cfg)
    rng = np.random.default_rng(cfg.seed + 1)
    psi0 = SpinVector.random(cfg.n, cfg.N, rng)
    weights = _flow_weights(cfg)
    traj = cl.flow(x0, [(weights, cfg.t)], step=cfg.step, ham_orders=(2,))
    state = hy.transport(traj, psi0)
    _emit(cfg, "transport.csv", state.to_csv())
    summary = {"command": "transport", "n": cfg.n, "N": cfg.N, "hams": list(cfg.hams), "t": cfg.t,
               "step": cfg.step, "seed": cfg.seed, "freezing": cfg.freezing,
               "norm_drift": state.norm_drift()}
    tol = cfg.tol or 1e-8
    passed = summary["norm_drift"] <= tol
    if cfg.freezing:
        # at x_* the orbit is stationary and the exact propagator is exp(-i t M)
        M = hy.weighted_hamiltonian(weights, x0, cfg.N).dense()
        rows, worst = [], 0.0
        for t, v in zip(state.times, state.history):
            exact = expm(-1j * t * M) @ psi0.amplitudes
            fid = abs(np.vdot(exact, v)) ** 2
            err = float(np.linalg.norm(exact - v))
            worst = max(worst, err)
            rows.append(f"{t:.12e},{fid:.12e},{err:.12e}")
        _emit(cfg, "fidelity.csv", "t,fidelity,error\n" + "\n".join(rows) + "\n")
        summary["max_error_vs_exact"] = worst
        summary["final_fidelity"] = float(abs(np.vdot(expm(-1j * cfg.t * M) @ psi0.amplitudes,
                                                      state.psi.amplitudes)) ** 2)
        passed = passed and worst <= max(tol, 1e-8)
    return _finish(cfg, "summary.json", {"summary": _clean(summary), "passed": passed}, passed)


WKB_CASES = {"free-gaussian": wkb.free_problem, "cosine": wkb.cosine_problem,
             "focusing": wkb.focusing_problem}


def cmd_wkb(cfg: RunConfig) -> int:
    if cfg.case not in WKB_CASES:
        raise UsageError(f"unknown case {cfg.case!r}; choose from {sorted(WKB_CASES)}")
    if len(cfg.hbars) < 2:
        raise UsageError("need at least two hbar values")
    prob = WKB_CASES[cfg.case]()
    margin = 0.2 if cfg.case == "focusing" else 0.0
    st = wkb.convergence_study(prob, cfg.t, hbars=cfg.hbars, margin=margin)
    rows = ["hbar,L2_error"] + [f"{h:.6e},{e:.12e}" for h, e in zip(st["hbar"], st["L2_error"])]
    _emit(cfg, "convergence.csv", "\n".join(rows) + "\n")
    passed = st["order"] >= (cfg.tol if cfg.tol else 0.8)
    payload = {"command": "wkb", "case": cfg.case, "t": cfg.t, **st}
    return _finish(cfg, "convergence.json", {"summary": _clean(payload), "passed": passed}, passed)


def cmd_rmatrix(cfg: RunConfig) -> int:
    fam = rm.yang_r(cfg.N)
    grid = (-1.7, -0.6, 0.45, 1.3, 2.2)
    rows = ["hbar,u,v,qybe_residual"]
    for hb in cfg.hbars[:2] if len(cfg.hbars) >= 2 else cfg.hbars:
        for u in grid:
            for v in grid:
                if abs(u + v) > 1e-9:
                    rows.append(f"{hb:.6e},{u:.6e},{v:.6e},{rm.qybe_residual(fam, u, v, hb):.6e}")
    _emit(cfg, "qybe_grid.csv", "\n".join(rows) + "\n")
    reports = rm.suite(cfg.N, seed=cfg.seed)
    payload = bundle(reports, command="rmatrix", N=cfg.N, seed=cfg.seed)
    return _finish(cfg, "rmatrix.json", payload, payload["passed"])


def cmd_freeze(cfg: RunConfig) -> int:
    reports = cl.verify_fixed_point(cfg.n) + hy.haldane_shastry_report(cfg.n, cfg.N)
    orders = [k for k in (2, 3) if k <= max(3, cfg.n)]
    spectra = {}
    for k in orders:
        ev = np.linalg.eigvalsh(hy.haldane_shastry(k, cfg.n, cfg.N).dense())
        spectra[f"M_{k}"] = [float(x) for x in np.round(ev, 10)]
    rows = ["index," + ",".join(spectra)] + [
        f"{i}," + ",".join(f"{spectra[k][i]:.10e}" for k in spectra) for i in range(len(spectra["M_2"]))]
    _emit(cfg, "spectra.csv", "\n".join(rows) + "\n")
    payload = bundle(reports, command="freeze", n=cfg.n, N=cfg.N)
    return _finish(cfg, "freeze.json", payload, payload["passed"])


COMMANDS = {"verify": cmd_verify, "flow": cmd_flow, "transport": cmd_transport, "wkb": cmd_wkb,
            "rmatrix": cmd_rmatrix, "freeze": cmd_freeze}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = load_config(args)
        cfg.validate(args.command)
        return COMMANDS[args.command](cfg)
    except (UsageError, hr.CostGuardError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GUARDS as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())
