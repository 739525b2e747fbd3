"""Verification suites: each returns a list of ``Report`` objects in a fixed order."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import classical as cl
from . import heckerep as hr
from . import hybrid as hy
from . import rmatrix as rm
from . import wkb
from .reports import Report
from .spinspace import SpinOperator, SpinVector

NAMES = ("hecke", "goldens", "unity", "freezing", "hs", "hybrid", "gauge", "wkb", "rmatrix")


@dataclass
class SuiteParams:
    n: int = 3
    N: int = 2
    seed: int = 0
    tol: float | None = None
    step: float = 1e-3
    t: float = 1.0
    hbars: Sequence[float] = (0.2, 0.1, 0.05, 0.025)
    points: int = 5
    extra: dict = field(default_factory=dict)


def hecke(P: SuiteParams) -> list[Report]:
    hr._check_cost(P.n)
    out = []
    for kind in (hr.QUANTUM, hr.SEMICLASSICAL):
        out += hr.hecke_relations(P.n, kind)
        out += hr.coordinate_relations(P.n, kind)
    if P.n >= 3:
        out += hr.kcancel(P.n)
    return out


def goldens(P: SuiteParams) -> list[Report]:
    hr._check_cost(P.n)
    out = [hr.hamiltonian_golden(2, P.n)]
    if P.n >= 3:
        out.append(hr.hamiltonian_golden(3, P.n))
    return out


def unity(P: SuiteParams) -> list[Report]:
    hr._check_cost(P.n)
    out = [hr.unity_lemma(k, P.n) for k in range(1, min(P.n, 3) + 1)]
    out += hr.classical_generating_check(P.n, samples=P.points, seed=P.seed)
    return out


def freezing(P: SuiteParams) -> list[Report]:
    tol = P.tol or 1e-11
    out = cl.verify_fixed_point(P.n, tol=tol)
    d = cl.stationarity(P.n, t_end=10.0, step=1e-2)
    out.append(Report("t_2 flow launched at x_* stays at x_*",
                      "freezing point of the multi-time CMS flow (roots of unity, zero momenta)",
                      {"n": P.n, "t": 10.0}, passed=d <= 1e-10, metrics={"max_distance": d}))
    return out


def hs(P: SuiteParams) -> list[Report]:
    return hy.haldane_shastry_report(P.n, P.N)


def _points(n: int, count: int, seed: int) -> list[cl.PhasePoint]:
    rng = np.random.default_rng(seed)
    return [cl.PhasePoint.random(n, rng, min_gap=0.6) for _ in range(count)]


def hybrid(P: SuiteParams) -> list[Report]:
    anchor = "zero curvature of the hybrid CMS flows"
    tol = P.tol or 1e-7
    out = []
    for i, x in enumerate(_points(P.n, P.points, P.seed)):
        st = hy.zero_curvature_study(x, 2, 3, P.N)
        out.append(Report("d_2 H1_3 - d_3 H1_2 + i[H1_2, H1_3] plateau under step halving", anchor,
                          {"n": P.n, "N": P.N, "point": i, "seed": P.seed},
                          passed=st["plateau"] <= tol,
                          metrics={"plateau": st["plateau"], "coarsest": st["residuals"][0]}))
    if P.n <= 3:
        out.append(hy.zero_curvature_exact(2, 3, P.n))
    rng = np.random.default_rng(P.seed + 1)
    x = _points(P.n, 1, P.seed + 2)[0]
    psi = SpinVector.random(P.n, P.N, rng)
    gap = hy.order_of_flows(x, psi, 2, 3, 0.4, 0.3, step=P.step)
    out.append(Report("t_2 and t_3 transports commute", anchor,
                      {"n": P.n, "N": P.N, "step": P.step, "t2": 0.4, "t3": 0.3},
                      passed=gap <= 1e-6, metrics={"discrepancy": gap}))
    return out


def _observable(n: int, N: int, rng: np.random.Generator) -> Callable[[cl.PhasePoint], SpinOperator]:
    dim = N ** n
    A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    A = A + A.conj().T
    B = rng.normal(size=(dim, dim))
    B = B + B.T
    return lambda x: SpinOperator(n, N, matrix=A + np.sin(x.q[0]) * B + x.p[-1] * np.eye(dim))


def gauge(P: SuiteParams) -> list[Report]:
    n, N = P.n, P.N
    rng = np.random.default_rng(P.seed)
    out = []
    x_star = cl.freezing_point(n)
    x1, x2 = _points(n, 2, P.seed + 3)
    scenarios = [
        ("stationary, constant shift", cl.flow(x_star, [(2, 1.0)], step=1e-2, ham_orders=(2,)),
         lambda x: 0.7),
        ("t_2 orbit, shift H_2", cl.flow(x1, [(2, 1.0)], step=P.step, ham_orders=(2,)),
         lambda x: cl.hamiltonian(2, x)),
        ("t_2 then t_3 orbit, shift cos q_1 + p_2", cl.flow(x2, [(2, 0.5), (3, 0.5)], step=P.step,
                                                            ham_orders=(2,)),
         lambda x: np.cos(x.q[0]) + x.p[1]),
    ]
    for label, traj, shift in scenarios:
        r = hy.gauge_shift_check(traj, SpinVector.random(n, N, rng), shift)
        r.parameters["scenario"] = label
        out.append(r)
    worst = 0.0
    xs = _points(n, 10, P.seed + 4)
    for x in xs:
        # the duality is exact for any discretisation, a coarse orbit suffices
        traj = cl.flow(x, [({2: 1.0, 3: 0.5}, 0.5)], step=1e-2, ham_orders=(2,))
        rho = hy.HybridDensity.random(n, N, x, rng)
        worst = max(worst, hy.duality_gap(rho, _observable(n, N, rng), traj, N))
    out.append(Report("E_rho(s(t)) = E_rho(t)(s)", "hybrid density and Heisenberg evolution",
                      {"n": n, "N": N, "pairs": len(xs)}, passed=worst <= 1e-9,
                      metrics={"max_gap": worst}))
    anchor = "monodromy of a closed classical orbit"
    m = hy.monodromy(cl.flow(x_star, [(2, 2.0)], step=1e-2, ham_orders=(2,)), N)
    d = hy.unitarity_defect(m)
    out.append(Report("monodromy unitary (stationary orbit)", anchor, {"n": n, "N": N},
                      passed=d <= 1e-8, metrics={"defect": d}))
    orbit = hy.two_body_orbit()
    m = hy.monodromy(orbit, N)
    d = hy.unitarity_defect(m)
    out.append(Report("monodromy unitary (two-body periodic orbit)", anchor, {"n": 2, "N": N},
                      passed=d <= 1e-8,
                      metrics={"defect": d, "closure": orbit.point(0).distance(orbit.final),
                               "period": float(orbit.times[-1])}))
    return out


def wkb_suite(P: SuiteParams) -> list[Report]:
    anchor = "semiclassical asymptotics of the hybrid wavefunction"
    out = []
    cases = {"free-gaussian": wkb.free_problem(), "cosine": wkb.cosine_problem()}
    for name, prob in cases.items():
        st = wkb.convergence_study(prob, 1.0, hbars=tuple(P.hbars))
        out.append(Report("L2 error of the WKB ansatz is O(hbar)", anchor,
                          {"case": name, "t": 1.0, "hbars": list(P.hbars)},
                          passed=st["order"] >= 0.8,
                          metrics={"order": st["order"], "finest_error": st["L2_error"][-1]}))
        res = wkb.hj_residual(prob, np.linspace(2.0, 4.0, 10), 1.0)
        out.append(Report("S solves the Hamilton-Jacobi equation", anchor, {"case": name, "t": 1.0},
                          passed=res <= 1e-5, metrics={"residual": res}))
    x0 = _points(3, 1, P.seed + 5)[0]
    out.append(wkb.path_independence(x0, [0.5, 0.3], step=2e-3))
    return out


def rmatrix(P: SuiteParams) -> list[Report]:
    return rm.suite(P.N, seed=P.seed)


RUNNERS: dict[str, Callable[[SuiteParams], list[Report]]] = {
    "hecke": hecke, "goldens": goldens, "unity": unity, "freezing": freezing, "hs": hs,
    "hybrid": hybrid, "gauge": gauge, "wkb": wkb_suite, "rmatrix": rmatrix,
}


def run(name: str, params: SuiteParams) -> list[Report]:
    if name not in RUNNERS:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(NAMES)}")
    return RUNNERS[name](params)
