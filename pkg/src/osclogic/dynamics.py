"""Vector fields of normalized negative-resistance LC oscillators and their networks.

State convention: each node carries ``(x, y)`` where ``x`` is the scaled inductor
current and ``y`` the scaled capacitor voltage. A free unit obeys

    dx/dtau = y,    dy/dtau = -x - g(y),    g(y) = -alpha*y + alpha*y**3

and on its limit cycle ``x ~ A cos(phi)``, ``y ~ -A sin(phi)`` with ``phi``
advancing at unit rate, ``A = 2/sqrt(3)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numba
import numpy as np

from .errors import ConfigurationError, DomainError

logger = logging.getLogger(__name__)

CYCLE_AMPLITUDE = 2.0 / math.sqrt(3.0)
DEFAULT_ALPHA = 0.1
WEAK_NONLINEARITY_BOUND = 0.3


def conductance(y, alpha):
    """Normalized cubic conductance g(y) = -alpha*y + alpha*y**3."""
    return -alpha * y + alpha * y**3


def _finite_pair(state, name="state"):
    arr = np.asarray(state, dtype=float)
    if arr.shape != (2,):
        raise DomainError(f"{name} must be an (x, y) pair, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values: {arr}")
    return arr


def single_oscillator_field(state, alpha):
    x, y = _finite_pair(state)
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    return np.array([y, -x + alpha * (1.0 - y * y) * y])


def normalize_circuit(L, C, g1, g3):
    """Map circuit values to the dimensionless (G1, G3) and the time scale sqrt(LC).

    Physical time is ``t = time_scale * tau``.
    """
    for name, value in (("L", L), ("C", C), ("g1", g1), ("g3", g3)):
        if not (math.isfinite(value) and value > 0):
            raise DomainError(f"{name} must be positive and finite, got {value}")
    ratio = L / C
    return g1 * math.sqrt(ratio), g3 * ratio**1.5, math.sqrt(L * C)


@dataclass(frozen=True)
class OscillatorSpec:
    id: str
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id or any(c.isspace() for c in self.id):
            raise ConfigurationError(f"invalid oscillator id {self.id!r}")
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ConfigurationError(f"oscillator {self.id}: alpha must be > 0, got {self.alpha}")
        if self.alpha > WEAK_NONLINEARITY_BOUND:
            logger.warning("oscillator %s: alpha=%g leaves the weakly nonlinear regime",
                           self.id, self.alpha)


@dataclass(frozen=True)
class CouplingEdge:
    """Resistive (rho, on x) plus conductive (gamma, on y) link between two units.

    A directed edge only acts on ``target``; this is the master-slave link.
    """

    source: str
    target: str
    rho: float = 0.0
    gamma: float = 0.0
    directed: bool = False

    def __post_init__(self):
        for name in ("rho", "gamma"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ConfigurationError(
                    f"edge {self.source}->{self.target}: {name} must be >= 0, got {value}")
        if self.source == self.target:
            raise ConfigurationError(f"edge {self.source}->{self.target} is a self-loop")


@dataclass(frozen=True)
class DrivenSource:
    """Controlled voltage source pulling ``target`` towards phase ``psi_d``."""

    target: str
    psi_d: float = 0.0
    gamma_d: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.psi_d):
            raise ConfigurationError(f"drive on {self.target}: psi_d must be finite")
        if not (math.isfinite(self.gamma_d) and self.gamma_d >= 0):
            raise ConfigurationError(
                f"drive on {self.target}: gamma_d must be >= 0, got {self.gamma_d}")


class FieldArrays(NamedTuple):
    alpha: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    rho: np.ndarray
    gamma: np.ndarray
    directed: np.ndarray
    drive_target: np.ndarray
    drive_psi: np.ndarray
    drive_gain: np.ndarray
    reference: int
    amplitude: float


@dataclass(frozen=True)
class NetworkSpec:
    """Directed weighted oscillator graph with optional reference node and drives.

    When ``reference`` is set, every drive is a phase-shifted copy of the
    reference node's waveform, ``y_D = cos(psi_d) y_ref - sin(psi_d) x_ref``.
    Without a reference, drives are ideal sinusoids ``y_D = -A sin(tau + psi_d)``
    on the averaged cycle amplitude ``A = 2/sqrt(3)``.
    """

    oscillators: tuple = ()
    edges: tuple = ()
    sources: tuple = ()
    reference: str | None = None
    drive_amplitude: float = field(default=CYCLE_AMPLITUDE, compare=True)

    def __post_init__(self):
        object.__setattr__(self, "oscillators", tuple(self.oscillators))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "sources", tuple(self.sources))
        ids = [osc.id for osc in self.oscillators]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ConfigurationError(f"duplicate oscillator ids: {dupes}")
        known = set(ids)
        for edge in self.edges:
            for end in (edge.source, edge.target):
                if end not in known:
                    raise ConfigurationError(
                        f"edge {edge.source}->{edge.target} references unknown node {end!r}")
        for src in self.sources:
            if src.target not in known:
                raise ConfigurationError(f"drive references unknown node {src.target!r}")
        if self.reference is not None:
            if self.reference not in known:
                raise ConfigurationError(f"reference node {self.reference!r} is not declared")
            for edge in self.edges:
                touches = self.reference in (edge.source, edge.target)
                if touches and not (edge.directed and edge.source == self.reference):
                    raise ConfigurationError(
                        f"reference {self.reference!r} may only have outgoing directed edges")
            if any(s.target == self.reference for s in self.sources):
                raise ConfigurationError(f"reference {self.reference!r} cannot be driven")

    @property
    def node_ids(self):
        return [osc.id for osc in self.oscillators]

    @property
    def n_nodes(self):
        return len(self.oscillators)

    def index(self, node_id):
        try:
            return self.node_ids.index(node_id)
        except ValueError:
            raise ConfigurationError(f"unknown node {node_id!r}") from None

    def with_reference(self, node_id="ref", alpha=None):
        """Return a copy with a free-running reference unit that clocks all drives."""
        if self.reference is not None:
            return self
        if alpha is None:
            alpha = self.oscillators[0].alpha if self.oscillators else DEFAULT_ALPHA
        ref = OscillatorSpec(node_id, alpha)
        return NetworkSpec((ref, *self.oscillators), self.edges, self.sources,
                           reference=node_id, drive_amplitude=self.drive_amplitude)

    @cached_property
    def arrays(self):
        idx = {node: i for i, node in enumerate(self.node_ids)}
        return FieldArrays(
            alpha=np.array([o.alpha for o in self.oscillators], dtype=float),
            src=np.array([idx[e.source] for e in self.edges], dtype=np.int64),
            dst=np.array([idx[e.target] for e in self.edges], dtype=np.int64),
            rho=np.array([e.rho for e in self.edges], dtype=float),
            gamma=np.array([e.gamma for e in self.edges], dtype=float),
            directed=np.array([e.directed for e in self.edges], dtype=np.bool_),
            drive_target=np.array([idx[s.target] for s in self.sources], dtype=np.int64),
            drive_psi=np.array([s.psi_d for s in self.sources], dtype=float),
            drive_gain=np.array([s.gamma_d for s in self.sources], dtype=float),
            reference=-1 if self.reference is None else idx[self.reference],
            amplitude=float(self.drive_amplitude),
        )


@numba.njit(cache=True, nogil=True)
def _network_kernel(state, tau, alpha, src, dst, rho, gamma, directed,
                    drive_target, drive_psi, drive_gain, reference, amplitude):
    n = alpha.size
    out = np.empty(2 * n)
    for i in range(n):
        x = state[2 * i]
        y = state[2 * i + 1]
        out[2 * i] = y
        out[2 * i + 1] = -x + alpha[i] * (1.0 - y * y) * y
    for e in range(src.size):
        a = src[e]
        b = dst[e]
        two_rho = 2.0 * rho[e]
        two_gamma = 2.0 * gamma[e]
        out[2 * b] -= two_rho * (state[2 * b] + state[2 * a])
        out[2 * b + 1] -= two_gamma * (state[2 * b + 1] - state[2 * a + 1])
        if not directed[e]:
            out[2 * a] -= two_rho * (state[2 * a] + state[2 * b])
            out[2 * a + 1] -= two_gamma * (state[2 * a + 1] - state[2 * b + 1])
    for s in range(drive_target.size):
        i = drive_target[s]
        if reference >= 0:
            y_drive = (math.cos(drive_psi[s]) * state[2 * reference + 1]
                       - math.sin(drive_psi[s]) * state[2 * reference])
        else:
            y_drive = -amplitude * math.sin(tau + drive_psi[s])
        out[2 * i + 1] -= 2.0 * drive_gain[s] * (state[2 * i + 1] - y_drive)
    return out


def network_field(net, state, tau=0.0):
    """Full-state derivative of ``net`` at ``state`` (flat ``[x0, y0, x1, y1, ...]``)."""
    arr = np.ascontiguousarray(state, dtype=float)
    if arr.shape != (2 * net.n_nodes,):
        raise DomainError(f"state must have length {2 * net.n_nodes}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("state contains non-finite values")
    return _network_kernel(arr, float(tau), *net.arrays)


def register_field(state_ref, state_k, edge, alpha):
    """Derivative of register ``k`` slaved to reference ``R`` through ``edge``."""
    x_r, y_r = _finite_pair(state_ref, "state_ref")
    x_k, y_k = _finite_pair(state_k, "state_k")
    return np.array([
        y_k - 2.0 * edge.rho * (x_k + x_r),
        -x_k - conductance(y_k, alpha) - 2.0 * edge.gamma * (y_k - y_r),
    ])


def cycle_state(phases, amplitude=CYCLE_AMPLITUDE):
    """Flat state with every node on the circle of radius ``amplitude`` at ``phases``."""
    phases = np.asarray(phases, dtype=float)
    out = np.empty(2 * phases.size)
    out[0::2] = amplitude * np.cos(phases)
    out[1::2] = -amplitude * np.sin(phases)
    return out
