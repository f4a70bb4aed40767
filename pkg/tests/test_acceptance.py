"""End-to-end acceptance checks, one test per criterion.

Each test records a ``PASS``/``FAIL`` line that the session summary prints, so
``pytest tests/test_acceptance.py`` gives a criterion-by-criterion verdict.
"""

import math
import time

import numpy as np
import pytest

from osclogic.dynamics import CYCLE_AMPLITUDE, NetworkSpec, OscillatorSpec
from osclogic.gates import GateInstance, build_register, evaluate_circuit, simulate_settled
from osclogic.integrator import integrate, integrate_network, wrap_phase
from osclogic.phase_model import averaged_example_jacobian, averaged_register_coupling
from osclogic.stability import (THEOREM_EQUILIBRIA, liapunov_descent_check, numeric_jacobian,
                                or_char_poly, phase_rhs_for)

PI = math.pi
RESULTS = []


def record(number, title, ok, detail):
    RESULTS.append(f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
    assert ok, detail


def _dist(a, b):
    return abs(wrap_phase(a - b))


def _timed_register(rho, gamma):
    net = build_register(GateInstance.register(rho, gamma))
    start = time.perf_counter()
    report, _ = simulate_settled(net, engine="full", tau_end=3000.0, h=0.01)
    return report, time.perf_counter() - start


def test_criterion_01_register_locking():
    # compile the integrator loop first; the time limit applies to the simulation itself
    simulate_settled(build_register(GateInstance.register(0.05, 0.1)), tau_end=70.0)
    inphase, t_in = _timed_register(0.05, 0.1)
    anti, t_anti = _timed_register(0.1, 0.05)
    err_in = abs(inphase.phase_diffs["k"])
    err_anti = abs(abs(anti.phase_diffs["k"]) - PI)
    ok = (inphase.locked and anti.locked and err_in < 0.05 and err_anti < 0.05
          and t_in < 5 and t_anti < 5)
    record(1, "register locking", ok,
           f"in-phase |psi|={err_in:.4f} ({t_in:.2f}s), anti-phase ||psi|-pi|={err_anti:.4f} "
           f"({t_anti:.2f}s), tol 0.05 rad / 5 s")


def test_criterion_02_not_gate(truth_tables):
    targets = {(0,): (0.0, PI), (1,): (PI, 0.0)}
    worst = {}
    ok = True
    for engine, tol in (("phase", 1e-3), ("full", 0.05)):
        rows = truth_tables["not", engine][1]
        errs = [max(_dist(r.psi["j"], targets[r.inputs][0]), _dist(r.psi["k"], targets[r.inputs][1]))
                for r in rows]
        worst[engine] = max(errs)
        ok &= all(r.ok and r.observed == 1 - r.inputs[0] for r in rows) and worst[engine] < tol
    record(2, "NOT gate", ok,
           f"phase-model error {worst['phase']:.2e} (tol 1e-3), full-state {worst['full']:.4f} "
           "(tol 0.05)")


def test_criterion_03_majority_table(truth_tables):
    rows = [r for name in ("and", "or") for engine in ("full", "phase")
            for r in truth_tables[name, engine][1]]
    correct = sum(r.ok for r in rows)
    ambiguous = sum(r.error is not None for r in rows)
    record(3, "MAJORITY table", correct == 16 and ambiguous == 0,
           f"{correct}/16 rows correct over both engines, {ambiguous} ambiguous")


def test_criterion_04_cycle_amplitude():
    net = NetworkSpec([OscillatorSpec("a", 0.1)])
    traj = integrate_network(net, [0.5, 0.0], 3000.0, 0.01, sample_every=10)
    radius = traj.amplitudes()[-1000:, 0]
    rel = np.abs(radius / CYCLE_AMPLITUDE - 1).max()
    record(4, "cycle amplitude", rel < 0.05, f"max relative deviation {rel:.4f} (tol 0.05)")


def test_criterion_05_floquet_exponents():
    alpha = 0.1
    eig = np.sort(np.linalg.eigvals(averaged_example_jacobian(0.0, CYCLE_AMPLITUDE, alpha)).real)
    err = np.abs(eig - [-alpha, 0.0]).max()
    record(5, "Floquet exponents", err < 1e-12, f"eigenvalues {eig}, error {err:.1e}")


def test_criterion_06_rk4_order():
    def harmonic(s, _t):
        return np.array([s[1], -s[0]])

    def error(h):
        traj = integrate(harmonic, [1.0, 0.0], 2 * PI, h)
        t = traj.times[-1]
        return np.linalg.norm(traj.states[-1] - [math.cos(t), -math.sin(t)])

    errs = [error(h) for h in (0.02, 0.01, 0.005)]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    record(6, "RK4 order", all(3.8 <= p <= 4.2 for p in orders),
           "orders " + ", ".join(f"{p:.3f}" for p in orders))


def _register_gain(rho, gamma):
    return averaged_register_coupling(PI / 2, rho, gamma)


def test_criterion_07_averaging_oracle():
    grid = np.linspace(-PI, PI, 33)
    residuals = []
    for rho, gamma in ((0.05, 0.1), (0.1, 0.05), (0.02, 0.09)):
        values = np.array([averaged_register_coupling(p, rho, gamma) for p in grid])
        k = values @ np.sin(grid) / (np.sin(grid) @ np.sin(grid))
        residuals.append(np.linalg.norm(values - k * np.sin(grid)) / np.linalg.norm(values))
    gamma = 0.05
    lo, hi = 0.01, 0.1
    assert _register_gain(lo, gamma) < 0 < _register_gain(hi, gamma)
    while hi - lo > 1e-7:
        mid = 0.5 * (lo + hi)
        if _register_gain(mid, gamma) < 0:
            lo = mid
        else:
            hi = mid
    crossing = 0.5 * (lo + hi)
    ok = max(residuals) < 1e-3 and abs(crossing - gamma) < 1e-6
    record(7, "averaging oracle", ok,
           f"max relative fit residual {max(residuals):.1e}, sign change at rho={crossing:.8f} "
           f"for gamma={gamma}")


def test_criterion_08_liapunov_certificates():
    cases = [("not", (0.05, 0.05), (0.0,), (0.0, PI))]
    cases += [("majority", (0.09, 0.09, 0.015), drives, target)
              for target, drives in THEOREM_EQUILIBRIA["majority"] if drives[2] == 0.0]
    assert len(cases) == 5
    failed = []
    for kind, gains, drives, target in cases:
        cert = liapunov_descent_check(kind, gains, drives, target, n_trajectories=100,
                                      ball_radius=0.3, grid_spacing=1e-2)
        ok = (abs(cert.value_at_eq) < 1e-15 and cert.min_over_punctured_ball > 0
              and cert.max_descent_violation <= cert.budget and not cert.escaped_seeds
              and cert.n_trajectories == 100)
        if not ok:
            failed.append((kind, target, cert))
    record(8, "Liapunov certificates", not failed,
           f"{len(cases) - len(failed)}/{len(cases)} certificates hold" +
           (f"; failing {failed}" if failed else ""))


def test_criterion_09_or_mechanics():
    rhs = phase_rhs_for("majority", (0.0, 0.0, PI), (0.3, 0.3, 0.1))
    J = numeric_jacobian(rhs, np.zeros(3))
    asym = np.linalg.norm(J - J.T)
    poly_err = np.abs(np.poly(J) - np.array(or_char_poly(0.3, 0.1))).max()
    coeffs_err = np.abs(np.array(or_char_poly(0.3, 0.1)) - [1, 0.9, 0.21, 0.005]).max()
    eig = np.linalg.eigvals(J).real
    ok = asym < 1e-8 and poly_err < 1e-10 and coeffs_err < 1e-10 and np.all(eig < 0)
    record(9, "OR Jacobian", ok,
           f"asymmetry {asym:.1e}, char poly error {poly_err:.1e}, max eigenvalue {eig.max():.4f}")


def test_criterion_10_isochron():
    net = NetworkSpec([OscillatorSpec("a", 0.1)])
    theta = 0.7
    starts = [r * np.array([math.cos(theta), -math.sin(theta)]) for r in (1.0, 1.3)]
    ends = [integrate_network(net, s, 100.0, 0.01).states[-1] for s in starts]
    sep = np.linalg.norm(ends[0] - ends[1])
    record(10, "isochron convergence", sep < 1e-3, f"separation at tau=100 is {sep:.2e} (tol 1e-3)")


def test_criterion_11_composition():
    not_not = []
    for bit in (0, 1):
        out, report = evaluate_circuit([GateInstance.not_gate(), GateInstance.not_gate()],
                                       {(1, "j"): 0}, {(0, "j"): bit}, 1)
        not_not.append(report.locked and out == bit)
    nand = []
    for a in (0, 1):
        for b in (0, 1):
            out, report = evaluate_circuit([GateInstance.majority("and"), GateInstance.not_gate()],
                                           {(1, "j"): 0}, {(0, "i"): a, (0, "j"): b}, 1)
            nand.append(report.locked and out == 1 - (a & b))
    record(11, "composition", all(not_not) and all(nand),
           f"NOT-NOT {sum(not_not)}/2, NAND {sum(nand)}/4")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
