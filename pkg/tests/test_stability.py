import math

import numpy as np
import pytest

from osclogic.errors import DomainError
from osclogic.phase_model import majority_phase_rhs, not_phase_rhs, register_phase_rhs
from osclogic.stability import (THEOREM_EQUILIBRIA, analyze, check_claim, classify,
                                find_equilibria, liapunov_descent_check, liapunov_value,
                                numeric_jacobian, or_char_poly, phase_rhs_for, theorem_claim)

PI = math.pi
AND_GAINS = (0.09, 0.09, 0.015)


def test_numeric_jacobian_examples():
    J = numeric_jacobian(lambda p: register_phase_rhs(p, 0.05, 0.1), [0.0])
    assert J.shape == (1, 1) and J[0, 0] == pytest.approx(-0.05, abs=1e-10)
    rhs = lambda p: majority_phase_rhs(p, (0, 0, PI), (0.3, 0.3, 0.1))  # noqa: E731
    J = numeric_jacobian(rhs, np.zeros(3))
    expected = [[-0.4, 0.1, 0.1], [0.1, -0.4, 0.1], [0.1, 0.1, -0.1]]
    assert J == pytest.approx(np.array(expected), abs=1e-9)
    assert np.abs(J - J.T).max() < 1e-8
    assert np.all(numeric_jacobian(lambda p: np.zeros(2), [0.3, 0.1]) == 0)


@pytest.mark.parametrize("step", [1e-8, 1e-3])
def test_numeric_jacobian_step_range(step):
    with pytest.raises(DomainError):
        numeric_jacobian(lambda p: p, [0.0], step)


def test_find_equilibria_register():
    roots = find_equilibria(lambda p: register_phase_rhs(p, 0.05, 0.1), 1)
    assert len(roots) == 2
    assert roots[0][0] == pytest.approx(0.0, abs=1e-9)
    assert roots[1][0] == pytest.approx(PI, abs=1e-9)


def _contains(roots, point):
    return any(np.all(np.abs(np.remainder(r - np.asarray(point) + PI, 2 * PI) - PI) < 1e-6)
               for r in roots)


def test_find_equilibria_not_and_majority():
    roots = find_equilibria(lambda p: not_phase_rhs(p[0], p[1], 0.0, 0.05, 0.05), 2)
    assert _contains(roots, (0, PI)) and _contains(roots, (PI, 0))
    roots = find_equilibria(lambda p: majority_phase_rhs(p, (0, 0, 0), AND_GAINS), 3)
    assert _contains(roots, (0, 0, 0))
    with pytest.raises(DomainError):
        find_equilibria(lambda p: p, 1, grid_per_axis=3)


def test_classify():
    assert classify([-1.0, -0.5]) == "stable"
    assert classify([-1.0, 0.1]) == "unstable"
    assert classify([-1.0, -1e-12]) == "non-hyperbolic"
    assert classify([-1.0 + 2j, -1.0 - 2j]) == "stable"


def test_or_char_poly():
    assert or_char_poly(0.3, 0.1) == pytest.approx((1.0, 0.9, 0.21, 0.005), abs=1e-15)
    J = numeric_jacobian(lambda p: majority_phase_rhs(p, (0, 0, PI), (0.3, 0.3, 0.1)), np.zeros(3))
    assert np.abs(np.poly(J) - np.array(or_char_poly(0.3, 0.1))).max() < 1e-10
    with pytest.raises(DomainError):
        or_char_poly(0.2, 0.1)
    with pytest.raises(DomainError):
        or_char_poly(0.3, 0.0)


def test_theorem_equilibria_classify_stable():
    for target, (d,) in THEOREM_EQUILIBRIA["not"]:
        rhs = phase_rhs_for("not", (d,), (0.05, 0.05))
        assert analyze(rhs, target).classification == "stable"
    for target, drives in THEOREM_EQUILIBRIA["majority"]:
        rhs = phase_rhs_for("majority", drives, AND_GAINS)
        assert analyze(rhs, target).classification == "stable", (target, drives)


def test_register_classification_both_regimes():
    for rho, gamma, stable_at in ((0.05, 0.1, 0.0), (0.1, 0.05, PI)):
        rhs = phase_rhs_for("register", (), (rho, gamma))
        for point in (0.0, PI):
            cls = analyze(rhs, [point]).classification
            assert cls == ("stable" if point == stable_at else "unstable")


def test_liapunov_value_examples():
    assert liapunov_value("not", [0.0, PI], (0.0,), (0.05, 0.05), (0.0, PI)) == 0.0
    assert liapunov_value("not", [0.1, PI - 0.1], (0.0,), (0.05, 0.05), (0.0, PI)) > 0
    assert liapunov_value("majority", [0, 0, 0], (0, 0, 0), AND_GAINS, (0, 0, 0)) == 0.0
    for target, drives in THEOREM_EQUILIBRIA["majority"]:
        assert abs(liapunov_value("majority", target, drives, AND_GAINS, target)) < 1e-15
    with pytest.raises(DomainError):
        liapunov_value("not", [0, 0], (0.0,), (0.05, 0.05), (0.0, 0.0))
    with pytest.raises(DomainError):
        liapunov_value("majority", [0, 0, 0], (PI, 0, 0), AND_GAINS, (0, 0, 0))


@pytest.mark.parametrize("kind, drives, gains, target", [
    ("not", (0.0,), (0.05, 0.05), (0.0, PI)),
    ("not", (PI,), (0.03, 0.08), (PI, 0.0)),
    ("majority", (PI, 0.0, 0.0), AND_GAINS, (PI, 0.0, 0.0)),
    ("majority", (0.0, 0.0, PI), (0.3, 0.3, 0.1), (0.0, 0.0, 0.0)),
])
def test_liapunov_is_gradient_potential(kind, drives, gains, target):
    rng = np.random.default_rng(11)
    rhs = phase_rhs_for(kind, drives, gains)
    for _ in range(10):
        psi = np.asarray(target) + rng.uniform(-1, 1, len(target))
        grad = np.array([(liapunov_value(kind, psi + e, drives, gains, target)
                          - liapunov_value(kind, psi - e, drives, gains, target)) / 2e-6
                         for e in np.eye(len(psi)) * 1e-6])
        assert grad == pytest.approx(-rhs(psi), abs=1e-9)


def test_descent_check_passes_for_theorem_cases():
    cert = liapunov_descent_check("not", (0.05, 0.05), (0.0,), (0.0, PI), n_trajectories=100)
    assert cert.passed and cert.n_trajectories == 100
    cert = liapunov_descent_check("majority", AND_GAINS, (PI, 0.0, 0.0), (PI, 0.0, 0.0),
                                  n_trajectories=20)
    assert cert.passed


def test_descent_check_reports_failure_when_saddle():
    # inputs gain only twice the mutual gain: (pi, 0, 0) is a saddle of the AND model
    gains = (0.03, 0.03, 0.015)
    rhs = phase_rhs_for("majority", (PI, 0.0, 0.0), gains)
    assert analyze(rhs, (PI, 0.0, 0.0)).classification == "unstable"
    cert = liapunov_descent_check("majority", gains, (PI, 0.0, 0.0), (PI, 0.0, 0.0),
                                  n_trajectories=10)
    assert not cert.passed
    assert cert.min_over_punctured_ball < 0


def test_descent_check_radius_bound():
    with pytest.raises(DomainError):
        liapunov_descent_check("not", (0.05, 0.05), (0.0,), (0.0, PI), ball_radius=0.6)


def test_claims_and_reports():
    report, ok = check_claim(theorem_claim("or", (0, 0, 0)), n_trajectories=10)
    assert ok and report.classification == "stable" and np.all(report.eigenvalues.real < 0)
    report, ok = check_claim(theorem_claim("register", (0.0,), rho=0.1, gamma=0.05))
    assert ok and report.classification == "unstable" and report.liapunov is None
    text = report.text()
    assert "classification: unstable" in text and "liapunov: not available" in text
    lines = report.csv().splitlines()
    assert lines[0] == "psi_0,eig_real_0,class,liapunov_pass"
    assert lines[1].endswith(",unstable,")
    with pytest.raises(DomainError):
        theorem_claim("and", (0, PI, PI))
    with pytest.raises(DomainError):
        theorem_claim("register", (1.0,))
