"""Phase-amplitude reduction of weakly coupled oscillators.

Two layers live here:

* an exact phase/amplitude evaluator for a user supplied limit cycle and
  Floquet frame (basis ``U``, reciprocal basis ``V = U^-1``), together with the
  averaging operator that turns it into autonomous phase-deviation equations;
* the closed-form averaged equations of the register, NOT and MAJORITY gates.

The only frame shipped with the library is the constant orthonormal frame of the
weakly nonlinear oscillator written in averaged polar coordinates ``(theta, A)``.
Cartesian couplings are brought into that frame with :func:`polar_coupling`,
using ``x = A cos(theta)``, ``y = -A sin(theta)`` so that ``theta`` advances with tau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numba
import numpy as np

from .dynamics import CYCLE_AMPLITUDE
from .errors import DomainError, FrameError

TWO_PI = 2.0 * math.pi
FRAME_GUARD = 1e-9
DEFAULT_QUAD_POINTS = 256
# the on-cycle projection does not depend on alpha; any positive value works
DEFAULT_ALPHA_FIT = 0.1


@dataclass(frozen=True)
class LimitCycle:
    field: Callable
    xs: Callable
    period: float = TWO_PI

    def a_on_cycle(self, theta):
        return np.asarray(self.field(self.xs(theta)), dtype=float)

    def r(self, theta):
        return float(np.linalg.norm(self.a_on_cycle(theta)))


@dataclass(frozen=True)
class FloquetFrame:
    """Periodic basis ``U(theta) = [u_1 ... u_n]`` with ``u_1`` the unit tangent.

    ``basis_derivative`` returns dU/dtheta; the reciprocal basis defaults to
    the matrix inverse.
    """

    basis: Callable
    basis_derivative: Callable
    cobasis: Callable | None = None

    def U(self, theta):
        return np.asarray(self.basis(theta), dtype=float)

    def V(self, theta):
        if self.cobasis is not None:
            return np.asarray(self.cobasis(theta), dtype=float)
        return np.linalg.inv(self.U(theta))

    def Y(self, theta):
        return self.U(theta)[:, 1:]

    def Z(self, theta):
        return self.V(theta)[1:, :].T

    def dY(self, theta):
        return np.asarray(self.basis_derivative(theta), dtype=float)[:, 1:]

    dY_dtheta = dY

    def v1(self, theta):
        return self.V(theta)[0]


@dataclass(frozen=True)
class PhaseState:
    """Per-node phase deviations ``psi_i = theta_i - tau``, stored wrapped to (-pi, pi]."""

    psi: tuple

    def __post_init__(self):
        arr = np.atleast_1d(np.asarray(self.psi, dtype=float))
        if not np.all(np.isfinite(arr)):
            raise DomainError("phase deviations must be finite")
        object.__setattr__(self, "psi", tuple(float(v) for v in np.pi - np.mod(np.pi - arr, TWO_PI)))

    def theta(self, tau):
        return np.asarray(self.psi) + tau


@dataclass(frozen=True)
class AmplitudeState:
    R: tuple

    def __post_init__(self):
        arr = np.atleast_1d(np.asarray(self.R, dtype=float))
        if not np.all(np.isfinite(arr)):
            raise DomainError("amplitude deviations must be finite")
        object.__setattr__(self, "R", tuple(float(v) for v in arr))


def averaged_example(alpha):
    """Averaged cycle of ``x' = y, y' = -x + alpha(1-y^2)y`` in coordinates (theta, A)."""

    def field(state):
        _, amp = state
        return np.array([1.0, 0.5 * alpha * amp * (1.0 - 0.75 * amp * amp)])

    cycle = LimitCycle(field, lambda theta: np.array([theta, CYCLE_AMPLITUDE]))
    frame = FloquetFrame(lambda theta: np.eye(2), lambda theta: np.zeros((2, 2)),
                         lambda theta: np.eye(2))
    return cycle, frame


def averaged_example_rhs(theta, A, alpha):
    if A < 0:
        raise DomainError(f"amplitude must be >= 0, got {A}")
    return np.array([1.0, 0.5 * alpha * A * (1.0 - 0.75 * A * A)])


def averaged_example_jacobian(theta, A, alpha):
    """Analytic Jacobian; at ``A = 2/sqrt(3)`` its eigenvalues are the Floquet exponents."""
    return np.array([[0.0, 0.0], [0.0, 0.5 * alpha * (1.0 - 2.25 * A * A)]])


def _embed(cycle, frame, theta, R):
    R = np.atleast_1d(np.asarray(R, dtype=float))
    return np.asarray(cycle.xs(theta), dtype=float) + frame.Y(theta) @ R


def k_factor(cycle, frame, theta, R):
    R = np.atleast_1d(np.asarray(R, dtype=float))
    denom = cycle.r(theta) + frame.v1(theta) @ frame.dY(theta) @ R
    if abs(denom) < FRAME_GUARD:
        raise FrameError(f"outside tubular neighbourhood: K denominator {denom:.3e} at theta={theta}")
    return 1.0 / denom


def _node_states(cycle, frame, network):
    thetas, Rs = network
    return [_embed(cycle, frame, th, R) for th, R in zip(thetas, Rs)]


def _phase_terms(cycle, frame, theta, R, detune, coupling, network):
    R = np.atleast_1d(np.asarray(R, dtype=float))
    K = k_factor(cycle, frame, theta, R)
    v1 = frame.v1(theta)
    dYR = frame.dY(theta) @ R
    x = _embed(cycle, frame, theta, R)
    a_theta = K * v1 @ (np.asarray(cycle.field(x)) - cycle.a_on_cycle(theta) - dYR)
    da_theta = 0.0 if detune is None else K * v1 @ np.asarray(detune(x), dtype=float)
    c_vec = None
    if coupling is not None and network is not None:
        c_vec = np.asarray(coupling(_node_states(cycle, frame, network)), dtype=float)
    c_theta = 0.0 if c_vec is None else K * v1 @ c_vec
    return x, dYR, a_theta, da_theta, c_theta, c_vec


def phase_rhs_full(cycle, frame, theta, R, detune=None, coupling=None, network=None, eps=1.0):
    """Exact phase velocity ``1 + a_theta + eps*da_theta + eps*C_theta`` of one node.

    ``coupling`` maps the list of all node states ``x_s(theta_m) + Y(theta_m) R_m``
    to this node's coupling vector; ``network = (thetas, Rs)`` supplies them.
    """
    _, _, a_theta, da_theta, c_theta, _ = _phase_terms(cycle, frame, theta, R, detune,
                                                       coupling, network)
    return 1.0 + a_theta + eps * da_theta + eps * c_theta


def amplitude_rhs_full(cycle, frame, theta, R, detune=None, coupling=None, network=None, eps=1.0):
    """Exact amplitude velocity ``L R + a_R + eps*da_R + eps*C_R`` of one node.

    The coupling part carries ``-Z^T (dY/dtheta) R C_theta`` alongside ``Z^T c`` so
    that the pair (phase, amplitude) reproduces the full-state flow exactly.
    """
    R = np.atleast_1d(np.asarray(R, dtype=float))
    x, dYR, a_theta, da_theta, c_theta, c_vec = _phase_terms(cycle, frame, theta, R, detune,
                                                             coupling, network)
    Zt = frame.Z(theta).T
    L = -Zt @ frame.dY(theta)
    a_R = -Zt @ (dYR * a_theta - np.asarray(cycle.field(x)))
    out = L @ R + a_R
    if detune is not None:
        out = out + eps * (-Zt @ (dYR * da_theta - np.asarray(detune(x), dtype=float)))
    if c_vec is not None:
        out = out + eps * (Zt @ (c_vec - dYR * c_theta))
    return out


def reduced_phase_rhs(cycle, frame, psi, tau, detune_fns=None, coupling_fns=None, eps=1.0):
    """Phase-deviation velocities on the cycle (R = 0) before averaging."""
    psi = np.asarray(psi, dtype=float)
    n = psi.size
    thetas = psi + tau
    states = [np.asarray(cycle.xs(th), dtype=float) for th in thetas]
    out = np.zeros(n)
    for i in range(n):
        scale = eps / cycle.r(thetas[i])
        v1 = frame.v1(thetas[i])
        if detune_fns is not None and detune_fns[i] is not None:
            out[i] += scale * v1 @ np.asarray(detune_fns[i](states[i]), dtype=float)
        if coupling_fns is not None and coupling_fns[i] is not None:
            out[i] += scale * v1 @ np.asarray(coupling_fns[i](states), dtype=float)
    return out


def average_coupling(c_fn, psi, quad_points=DEFAULT_QUAD_POINTS):
    """Mean of ``c_fn(psi + tau)`` over one period on a uniform grid (rectangle rule)."""
    if quad_points < 64:
        raise DomainError(f"quad_points must be >= 64, got {quad_points}")
    psi = np.asarray(psi, dtype=float)
    taus = TWO_PI * np.arange(quad_points) / quad_points
    return float(np.mean([c_fn(psi + t) for t in taus]))


def polar_to_cartesian(state):
    theta, amp = state[0], state[1]
    return np.array([amp * math.cos(theta), -amp * math.sin(theta)])


def polar_coupling(cartesian_fn, node=0):
    """Wrap a Cartesian coupling ``f(list of (x, y)) -> (cx, cy)`` acting on ``node``
    so that it accepts and returns vectors of the (theta, A) frame."""

    def wrapped(polar_states):
        xy = [polar_to_cartesian(s) for s in polar_states]
        cx, cy = np.asarray(cartesian_fn(xy), dtype=float)
        own_x, own_y = xy[node]
        amp2 = own_x * own_x + own_y * own_y
        return np.array([(own_y * cx - own_x * cy) / amp2, (own_x * cx + own_y * cy) / math.sqrt(amp2)])

    return wrapped


def register_coupling(rho, gamma):
    """Coupling felt by register node 1 from reference node 0 (Cartesian)."""

    def c(states):
        (x_r, y_r), (x_k, y_k) = states[0], states[1]
        return np.array([-2.0 * rho * (x_k + x_r), -2.0 * gamma * (y_k - y_r)])

    return c


def averaged_register_coupling(psi_k, rho, gamma, alpha=0.1, quad_points=DEFAULT_QUAD_POINTS):
    """Average over tau of the register's on-cycle phase coupling at deviation ``psi_k``."""
    cycle, frame = averaged_example(alpha)
    coupling = [None, polar_coupling(register_coupling(rho, gamma), 1)]

    def c_theta(thetas):
        return reduced_phase_rhs(cycle, frame, thetas, 0.0, coupling_fns=coupling)[1]

    return average_coupling(c_theta, np.array([0.0, psi_k]), quad_points)


def register_phase_rhs(psi_k, rho, gamma):
    return (rho - gamma) * np.sin(psi_k)


def not_phase_rhs(psi_j, psi_k, psi_Dj, rho, gamma):
    """Averaged NOT gate: input ``j`` driven at ``psi_Dj``, resistively tied to output ``k``."""
    d_j = rho * np.sin(psi_j - psi_k) - gamma * np.sin(psi_j - psi_Dj)
    d_k = rho * np.sin(psi_k - psi_j)
    return np.stack(np.broadcast_arrays(d_j, d_k), axis=-1)


def majority_phase_rhs(psi, drives, gains):
    """Averaged MAJORITY gate. ``psi[..., :] = (i, j, k)``, ``drives = (D_i, D_j, D)``,
    ``gains = (gamma_i, gamma_j, gamma)``; all arguments broadcast over leading axes."""
    psi = np.asarray(psi, dtype=float)
    drives = np.asarray(drives, dtype=float)
    p_i, p_j, p_k = psi[..., 0], psi[..., 1], psi[..., 2]
    d_i, d_j, d = drives[..., 0], drives[..., 1], drives[..., 2]
    g_i, g_j, g = gains
    s = np.sin
    dot_i = -g_i * s(p_i - d_i) - g * s(p_i - d) - g * (s(p_i - p_j) + s(p_i - p_k))
    dot_j = -g_j * s(p_j - d_j) - g * s(p_j - d) - g * (s(p_j - p_i) + s(p_j - p_k))
    dot_k = -g * s(p_k - d) - g * (s(p_k - p_i) + s(p_k - p_j))
    return np.stack(np.broadcast_arrays(dot_i, dot_j, dot_k), axis=-1)


# --- averaged model of an arbitrary netlist ------------------------------------


@dataclass(frozen=True)
class PhaseTerm:
    """``dpsi_node += bias + s*sin(delta) + c*cos(delta)``, ``delta = psi_node - psi_other - offset``.

    ``other is None`` means an absolute drive (no reference node).
    """

    node: str
    other: str | None
    offset: float
    bias: float
    sin_coef: float
    cos_coef: float
    label: str = ""


@dataclass(frozen=True)
class ReducedNetwork:
    node_ids: tuple
    terms: tuple
    reference: str | None = None

    def arrays(self):
        idx = {n: i for i, n in enumerate(self.node_ids)}
        return (
            np.array([idx[t.node] for t in self.terms], dtype=np.int64),
            np.array([-1 if t.other is None else idx[t.other] for t in self.terms], dtype=np.int64),
            np.array([t.offset for t in self.terms], dtype=float),
            np.array([t.bias for t in self.terms], dtype=float),
            np.array([t.sin_coef for t in self.terms], dtype=float),
            np.array([t.cos_coef for t in self.terms], dtype=float),
        )

    def field(self, psi, tau=0.0):
        psi = np.ascontiguousarray(psi, dtype=float)
        return _reduced_kernel(psi, *self.arrays())

    def describe(self, tol=1e-12):
        lines = ["# averaged phase-deviation model, psi_i = theta_i - tau"]
        if self.reference is not None:
            lines.append(f"# reference node: {self.reference} (free running, dpsi/dtau = 0)")
        for node in self.node_ids:
            parts = []
            for t in self.terms:
                if t.node != node:
                    continue
                other = "0" if t.other is None else f"psi_{t.other}"
                arg = f"psi_{node} - {other}"
                if t.offset:
                    arg += f" - {t.offset:.6g}"
                if abs(t.sin_coef) > tol:
                    parts.append(f"{t.sin_coef:+.6g}*sin({arg})")
                if abs(t.cos_coef) > tol:
                    parts.append(f"{t.cos_coef:+.6g}*cos({arg})")
                if abs(t.bias) > tol:
                    parts.append(f"{t.bias:+.6g}")
            rhs = " ".join(parts) if parts else "0"
            lines.append(f"dpsi_{node}/dtau = {rhs}")
        return "\n".join(lines) + "\n"


@numba.njit(cache=True, nogil=True)
def _reduced_kernel(psi, node, other, offset, bias, sin_coef, cos_coef):
    out = np.zeros(psi.size)
    for t in range(node.size):
        base = 0.0 if other[t] < 0 else psi[other[t]]
        delta = psi[node[t]] - base - offset[t]
        out[node[t]] += bias[t] + sin_coef[t] * math.sin(delta) + cos_coef[t] * math.cos(delta)
    return out


def _fit_first_harmonic(cartesian_fn, amplitude, quad_points, n_shifts=8):
    """Average the on-cycle phase coupling of node 0 against partner 1, fit in the shift."""
    cycle = LimitCycle(averaged_example(DEFAULT_ALPHA_FIT)[0].field,
                       lambda theta: np.array([theta, amplitude]))
    frame = averaged_example(DEFAULT_ALPHA_FIT)[1]
    coupling = [polar_coupling(cartesian_fn, 0), None]

    def c_theta(thetas):
        return reduced_phase_rhs(cycle, frame, thetas, 0.0, coupling_fns=coupling)[0]

    deltas = TWO_PI * np.arange(n_shifts) / n_shifts
    values = np.array([average_coupling(c_theta, np.array([d, 0.0]), quad_points) for d in deltas])
    design = np.column_stack([np.ones_like(deltas), np.sin(deltas), np.cos(deltas)])
    coef, *_ = np.linalg.lstsq(design, values, rcond=None)
    return coef


def _edge_fn(rho, gamma):
    def c(states):
        (x_h, y_h), (x_o, y_o) = states
        return np.array([-2.0 * rho * (x_h + x_o), -2.0 * gamma * (y_h - y_o)])

    return c


def _drive_fn(gain):
    def c(states):
        (_, y_h), (_, y_d) = states
        return np.array([0.0, -2.0 * gain * (y_h - y_d)])

    return c


@lru_cache(maxsize=256)
def _edge_coefficients(rho, gamma, amplitude, quad_points):
    return tuple(_fit_first_harmonic(_edge_fn(rho, gamma), amplitude, quad_points))


@lru_cache(maxsize=256)
def _drive_coefficients(gain, amplitude, quad_points):
    return tuple(_fit_first_harmonic(_drive_fn(gain), amplitude, quad_points))


def reduce_network(net, quad_points=DEFAULT_QUAD_POINTS):
    """Average every coupling of ``net`` into sinusoidal phase-deviation terms."""
    amp = net.drive_amplitude
    terms = []
    for e in net.edges:
        coef = _edge_coefficients(e.rho, e.gamma, amp, quad_points)
        heads = [(e.target, e.source)] if e.directed else [(e.target, e.source), (e.source, e.target)]
        for head, other in heads:
            terms.append(PhaseTerm(head, other, 0.0, *coef, f"edge {e.source}->{e.target}"))
    for src in net.sources:
        coef = _drive_coefficients(src.gamma_d, amp, quad_points)
        terms.append(PhaseTerm(src.target, net.reference, src.psi_d, *coef, f"drive {src.target}"))
    return ReducedNetwork(tuple(net.node_ids), tuple(terms), net.reference)
