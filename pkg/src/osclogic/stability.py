"""Equilibria, Jacobians and Liapunov certificates of the averaged phase models."""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .integrator import rk4_step, wrap_phase
from .phase_model import majority_phase_rhs, not_phase_rhs, register_phase_rhs

JACOBIAN_STEP = 1e-6
HYPERBOLIC_MARGIN = 1e-9
DEDUP_TOL = 1e-6
GRID_PER_AXIS = 8
POSITIVITY_GRID = 1e-2
DESCENT_STEP = 0.01
ESCAPE_FACTOR = 2.0
PI = math.pi

# (target, drives) pairs for which a strict Liapunov function is available.
# NOT: drives = (psi_Dj,), target = (psi_j, psi_k).
# MAJORITY: drives = (psi_Di, psi_Dj, psi_D), target = (psi_i, psi_j, psi_k).
THEOREM_EQUILIBRIA = {
    "not": (
        ((0.0, PI), (0.0,)),
        ((PI, 0.0), (PI,)),
    ),
    "majority": (
        ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0)),
        ((PI, 0.0, 0.0), (PI, 0.0, 0.0)),
        ((0.0, PI, 0.0), (0.0, PI, 0.0)),
        ((PI, PI, PI), (PI, PI, 0.0)),
        ((0.0, 0.0, 0.0), (0.0, 0.0, PI)),
        ((0.0, PI, PI), (0.0, PI, PI)),
        ((PI, 0.0, PI), (PI, 0.0, PI)),
        ((PI, PI, PI), (PI, PI, PI)),
    ),
}


def numeric_jacobian(rhs, psi_star, step=JACOBIAN_STEP):
    """Central-difference Jacobian of ``rhs`` at ``psi_star``."""
    if not 1e-7 <= step <= 1e-4:
        raise DomainError(f"step must lie in [1e-7, 1e-4], got {step}")
    x0 = np.atleast_1d(np.asarray(psi_star, dtype=float))
    n = x0.size
    jac = np.empty((n, n))
    for col in range(n):
        dx = np.zeros(n)
        dx[col] = step
        jac[:, col] = (np.atleast_1d(rhs(x0 + dx)) - np.atleast_1d(rhs(x0 - dx))) / (2.0 * step)
    return jac


def _newton(rhs, x0, max_iter=60, tol=1e-12):
    x = x0.copy()
    f = np.atleast_1d(rhs(x))
    for _ in range(max_iter):
        norm = np.linalg.norm(f)
        if norm < tol:
            return x
        try:
            delta = np.linalg.solve(numeric_jacobian(rhs, x), -f)
        except np.linalg.LinAlgError:
            delta = np.linalg.lstsq(numeric_jacobian(rhs, x), -f, rcond=None)[0]
        t = 1.0
        while t > 1e-6:
            trial = x + t * delta
            f_trial = np.atleast_1d(rhs(trial))
            if np.linalg.norm(f_trial) < (1.0 - 1e-4 * t) * norm:
                break
            t *= 0.5
        else:
            return None
        x, f = trial, f_trial
    return x if np.linalg.norm(f) < 1e-10 else None


def _same_mod_2pi(a, b, tol=DEDUP_TOL):
    return bool(np.all(np.abs(wrap_phase(np.asarray(a) - np.asarray(b))) < tol))


def find_equilibria(rhs, dim, grid_per_axis=GRID_PER_AXIS):
    """Zeros of a 2*pi-periodic ``rhs`` found by damped Newton from a uniform seed grid.

    Points are returned wrapped to (-pi, pi] and sorted; seeds that fail to
    converge are skipped.
    """
    if grid_per_axis < 4:
        raise DomainError(f"grid_per_axis must be >= 4, got {grid_per_axis}")
    axis = 2 * PI * np.arange(grid_per_axis) / grid_per_axis
    found = []
    for seed in itertools.product(axis, repeat=dim):
        root = _newton(rhs, np.array(seed, dtype=float))
        if root is None:
            continue
        root = np.atleast_1d(wrap_phase(root))
        # snap values that wrapped to just above -pi onto +pi
        root = np.where(np.abs(root + PI) < DEDUP_TOL, PI, root)
        if not any(_same_mod_2pi(root, r) for r in found):
            found.append(root)
    return sorted(found, key=tuple)


def classify(eigenvalues, margin=HYPERBOLIC_MARGIN):
    real = np.real(np.asarray(eigenvalues))
    if np.all(real < -margin):
        return "stable"
    if np.any(real > margin):
        return "unstable"
    return "non-hyperbolic"


@dataclass(frozen=True)
class LiapunovCertificate:
    value_at_eq: float
    min_over_punctured_ball: float
    max_descent_violation: float
    budget: float
    escaped_seeds: tuple = ()
    n_trajectories: int = 0

    @property
    def passed(self):
        return (abs(self.value_at_eq) < 1e-12 and self.min_over_punctured_ball > 0
                and self.max_descent_violation <= self.budget and not self.escaped_seeds)


@dataclass(frozen=True)
class EquilibriumReport:
    point: np.ndarray
    jacobian: np.ndarray
    eigenvalues: np.ndarray
    classification: str
    liapunov: LiapunovCertificate | None = field(default=None)

    def text(self):
        pt = ", ".join(f"{v:+.6f}" for v in self.point)
        eig = ", ".join(f"{complex(e).real:+.6g}{complex(e).imag:+.3g}j" for e in self.eigenvalues)
        lines = [f"equilibrium: ({pt})", f"classification: {self.classification}",
                 f"eigenvalues: {eig}", "jacobian:"]
        lines += ["  " + " ".join(f"{v:+.6f}" for v in row) for row in self.jacobian]
        if self.liapunov is None:
            lines.append("liapunov: not available")
        else:
            c = self.liapunov
            lines.append(f"liapunov: {'pass' if c.passed else 'FAIL'} (V(eq)={c.value_at_eq:.3e}, "
                         f"min V on punctured ball={c.min_over_punctured_ball:.3e}, "
                         f"worst descent violation={c.max_descent_violation:.3e} "
                         f"vs budget {c.budget:.1e}, escaped seeds={list(c.escaped_seeds)})")
        return "\n".join(lines) + "\n"

    def csv(self):
        n = len(self.point)
        sink = io.StringIO()
        writer = csv.writer(sink, lineterminator="\n")
        writer.writerow([*(f"psi_{i}" for i in range(n)), *(f"eig_real_{i}" for i in range(n)),
                         "class", "liapunov_pass"])
        passed = "" if self.liapunov is None else int(self.liapunov.passed)
        writer.writerow([*(repr(float(v)) for v in self.point),
                         *(repr(float(np.real(e))) for e in self.eigenvalues),
                         self.classification, passed])
        return sink.getvalue()


def analyze(rhs, point, certificate=None, step=JACOBIAN_STEP):
    jac = numeric_jacobian(rhs, point, step)
    eig = np.linalg.eigvals(jac)
    order = np.argsort(-np.real(eig), kind="stable")
    return EquilibriumReport(np.atleast_1d(np.asarray(point, dtype=float)), jac, eig[order],
                             classify(eig), certificate)


def or_char_poly(gamma_i, gamma):
    """Monic characteristic polynomial of the OR Jacobian at the origin, highest power first."""
    if not (gamma > 0 and gamma_i > 2 * gamma):
        raise DomainError(f"need gamma_i > 2*gamma > 0, got gamma_i={gamma_i}, gamma={gamma}")
    return (1.0, 2 * gamma_i + 3 * gamma, gamma_i**2 + 4 * gamma_i * gamma,
            gamma_i**2 * gamma - 4 * gamma**3)


# --- Liapunov functions -------------------------------------------------------


def _match_theorem(kind, drives, target_eq):
    if kind not in THEOREM_EQUILIBRIA:
        raise DomainError(f"unknown Liapunov kind {kind!r}")
    for target, drv in THEOREM_EQUILIBRIA[kind]:
        if _same_mod_2pi(target, target_eq, 1e-9) and _same_mod_2pi(drv, drives, 1e-9):
            return np.asarray(target)
    raise DomainError(f"{target_eq} with drives {drives} is not a listed {kind} equilibrium")


def _offset(theta_bar):
    """``N = -cos(theta_bar)``: -1 at 0, +1 at pi, making each bracket vanish at the target."""
    return -np.cos(theta_bar)


def liapunov_value(kind, psi, drives, gains, target_eq):
    """Strict Liapunov function of the NOT or MAJORITY phase model, zero at ``target_eq``.

    ``gains`` is ``(rho, gamma)`` for NOT and ``(gamma_i, gamma_j, gamma)`` for MAJORITY.
    Both models are gradient flows of this function, so ``dV/dtau = -|dpsi/dtau|^2``.
    """
    target = _match_theorem(kind, drives, target_eq)
    psi = np.asarray(psi, dtype=float)
    c = np.cos
    if kind == "not":
        rho, gamma = gains
        pj, pk = psi[..., 0], psi[..., 1]
        n_j = _offset(target[0])
        n_jk = _offset(target[0] - target[1])
        return (-gamma * c(drives[0]) * (c(pj) + n_j)
                + rho * (c(pj - pk) + n_jk))
    g_i, g_j, g = gains
    d_i, d_j, d = drives
    pi_, pj, pk = psi[..., 0], psi[..., 1], psi[..., 2]
    n = [_offset(t) for t in target]
    n_ij, n_ik, n_jk = (_offset(target[0] - target[1]), _offset(target[0] - target[2]),
                        _offset(target[1] - target[2]))
    return (-(g_i * c(d_i) + g * c(d)) * (c(pi_) + n[0])
            - (g_j * c(d_j) + g * c(d)) * (c(pj) + n[1])
            - g * c(d) * (c(pk) + n[2])
            - g * (c(pi_ - pj) + c(pi_ - pk) + c(pj - pk) + n_ij + n_ik + n_jk))


def phase_rhs_for(kind, drives, gains):
    """Autonomous averaged field ``psi -> dpsi/dtau`` matching :func:`liapunov_value`."""
    if kind == "not":
        rho, gamma = gains
        return lambda psi: not_phase_rhs(psi[..., 0], psi[..., 1], drives[0], rho, gamma)
    if kind == "majority":
        return lambda psi: majority_phase_rhs(psi, drives, gains)
    if kind == "register":
        rho, gamma = gains
        return lambda psi: register_phase_rhs(np.asarray(psi), rho, gamma)
    raise DomainError(f"unknown model kind {kind!r}")


def _ball_grid(center, radius, spacing):
    dim = center.size
    ticks = np.arange(-round(radius / spacing), round(radius / spacing) + 1) * spacing
    mesh = np.stack(np.meshgrid(*([ticks] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    dist = np.linalg.norm(mesh, axis=1)
    keep = (dist <= radius + 1e-12) & (dist > 0)
    return center + mesh[keep]


def _sample_ball(rng, center, radius, n):
    dim = center.size
    direction = rng.standard_normal((n, dim))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    r = radius * rng.uniform(0.0, 1.0, n) ** (1.0 / dim)
    return center + direction * r[:, None]


def liapunov_descent_check(kind, gains, drives, target_eq, n_trajectories=100, ball_radius=0.3,
                           seed=42, h=DESCENT_STEP, tau_end=50.0, grid_spacing=POSITIVITY_GRID):
    """Check positivity and monotone decrease of :func:`liapunov_value` near ``target_eq``.

    Positivity is checked on a grid over the punctured ball. Descent is checked
    along ``n_trajectories`` RK4 trajectories started at seeded points in the ball;
    a step may raise V by at most ``10*h**5``. A seed counts as escaped if its
    trajectory leaves the ball of radius ``ESCAPE_FACTOR*ball_radius`` or ends
    with V not below its starting value.
    """
    if not 0 < ball_radius <= 0.5:
        raise DomainError(f"ball_radius must be in (0, 0.5], got {ball_radius}")
    target = _match_theorem(kind, drives, target_eq)
    V = lambda p: liapunov_value(kind, p, drives, gains, target)  # noqa: E731
    rhs = phase_rhs_for(kind, drives, gains)
    budget = 10.0 * h**5

    value_at_eq = float(V(target))
    grid = _ball_grid(target, ball_radius, grid_spacing)
    min_v = float(np.min(V(grid)))

    rng = np.random.default_rng(seed)
    state = _sample_ball(rng, target, ball_radius, n_trajectories)
    v_start = V(state)
    v_prev = v_start
    worst = -np.inf
    escaped = np.zeros(n_trajectories, dtype=bool)
    for k in range(int(round(tau_end / h))):
        state = rk4_step(lambda s, _t: rhs(s), state, k * h, h)
        v_now = V(state)
        worst = max(worst, float(np.max(v_now - v_prev)))
        v_prev = v_now
        escaped |= np.linalg.norm(state - target, axis=1) > ESCAPE_FACTOR * ball_radius
    escaped |= ~(v_prev < v_start)
    bad = tuple(int(i) for i in np.flatnonzero(escaped))
    return LiapunovCertificate(value_at_eq, min_v, max(worst, 0.0), budget, bad, n_trajectories)


# --- theorem claims for the CLI ------------------------------------------------


@dataclass(frozen=True)
class StabilityClaim:
    kind: str
    drives: tuple
    gains: tuple
    target: tuple
    expected: str
    has_liapunov: bool


def theorem_claim(gate, target_eq, rho=None, gamma=None, gamma_in=None):
    """Expected classification of ``target_eq`` for a gate, with drives implied by the target."""
    from .gates import DEFAULT_MAJORITY_GAINS, DEFAULT_NOT_GAINS

    target = tuple(float(v) for v in np.atleast_1d(target_eq))
    if gate == "register":
        rho = 0.1 if rho is None else rho
        gamma = 0.05 if gamma is None else gamma
        if len(target) != 1:
            raise DomainError("register target is a single phase")
        is_zero = _same_mod_2pi(target, (0.0,), 1e-9)
        if not (is_zero or _same_mod_2pi(target, (PI,), 1e-9)):
            raise DomainError("register equilibria are 0 and pi")
        stable = (gamma > rho) if is_zero else (rho > gamma)
        return StabilityClaim("register", (), (rho, gamma), target,
                              "stable" if stable else "unstable", False)
    if gate == "not":
        rho = DEFAULT_NOT_GAINS[0] if rho is None else rho
        gamma = DEFAULT_NOT_GAINS[1] if gamma is None else gamma
        for tgt, drv in THEOREM_EQUILIBRIA["not"]:
            if _same_mod_2pi(tgt, target, 1e-9):
                return StabilityClaim("not", drv, (rho, gamma), tgt, "stable", True)
        raise DomainError(f"{target} is not a listed NOT equilibrium")
    if gate in ("and", "or"):
        g_in = DEFAULT_MAJORITY_GAINS[0] if gamma_in is None else gamma_in
        g = DEFAULT_MAJORITY_GAINS[1] if gamma is None else gamma
        select = 0.0 if gate == "and" else PI
        for tgt, drv in THEOREM_EQUILIBRIA["majority"]:
            if _same_mod_2pi(drv[2:], (select,), 1e-9) and _same_mod_2pi(tgt, target, 1e-9):
                return StabilityClaim("majority", drv, (g_in, g_in, g), tgt, "stable", True)
        raise DomainError(f"{target} is not a listed {gate.upper()} equilibrium")
    raise DomainError(f"unknown gate {gate!r}")


def check_claim(claim, n_trajectories=100, seed=42):
    """Classify the claimed equilibrium and, where available, certify it.

    Returns ``(report, matches_claim)``.
    """
    rhs = phase_rhs_for(claim.kind, claim.drives, claim.gains)
    cert = None
    if claim.has_liapunov:
        cert = liapunov_descent_check(claim.kind, claim.gains, claim.drives, claim.target,
                                      n_trajectories=n_trajectories, seed=seed)
    report = analyze(rhs, claim.target, cert)
    ok = report.classification == claim.expected and (cert is None or cert.passed)
    return report, ok
