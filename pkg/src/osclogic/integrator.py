"""Fixed-step RK4 integration, trajectories and phase-lock detection."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .dynamics import _network_kernel
from .phase_model import _reduced_kernel
from .errors import DomainError, IntegrationError, NotOscillatingError

TWO_PI = 2.0 * math.pi
DEFAULT_STEP = 0.01
DEFAULT_LOCK_TOL = 1e-3
DEFAULT_LOCK_WINDOW = 10 * TWO_PI
MIN_AMPLITUDE = 0.1


def wrap_phase(psi):
    """Wrap angles to (-pi, pi]."""
    psi = np.asarray(psi, dtype=float)
    out = np.pi - np.mod(np.pi - psi, TWO_PI)
    return float(out) if out.ndim == 0 else out


def circular_mean(angles, axis=None):
    return np.angle(np.mean(np.exp(1j * np.asarray(angles)), axis=axis))


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled solution.

    ``states`` has shape ``(len(times), dim)``. For ``kind == "full"`` the columns
    are ``x0, y0, x1, y1, ...``; for ``kind == "phase"`` they are ``psi_0, psi_1, ...``.
    """

    times: np.ndarray
    states: np.ndarray
    kind: str = "full"
    node_ids: tuple = ()
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in ("full", "phase"):
            raise DomainError(f"unknown trajectory kind {self.kind!r}")
        if self.states.ndim != 2 or self.states.shape[0] != self.times.shape[0]:
            raise DomainError("states must be (n_samples, dim) matching times")

    @property
    def n_nodes(self):
        return self.states.shape[1] // 2 if self.kind == "full" else self.states.shape[1]

    def node_index(self, node):
        if isinstance(node, (int, np.integer)):
            return int(node)
        return list(self.node_ids).index(node)

    def phases(self):
        """Per-node phase, ``atan2(-y, x)`` for full states (advances with tau)."""
        if self.kind == "phase":
            return self.states
        return np.arctan2(-self.states[:, 1::2], self.states[:, 0::2])

    def amplitudes(self):
        if self.kind == "phase":
            raise DomainError("phase trajectories carry no amplitude")
        return np.hypot(self.states[:, 0::2], self.states[:, 1::2])

    def header(self):
        if self.kind == "full":
            cols = [f"node{i}_{c}" for i in range(self.n_nodes) for c in ("x", "y")]
        else:
            cols = [f"psi_{i}" for i in range(self.n_nodes)]
        return ["tau", *cols]

    def to_csv(self, fh=None):
        """Write CSV with a ``#`` metadata line. Returns the text if ``fh`` is None."""
        sink = io.StringIO() if fh is None else fh
        meta = [f"kind={self.kind}"]
        if self.seed is not None:
            meta.append(f"seed={self.seed}")
        if self.node_ids:
            meta.append("nodes=" + ",".join(self.node_ids))
        sink.write("# " + " ".join(meta) + "\n")
        writer = csv.writer(sink, lineterminator="\n")
        writer.writerow(self.header())
        for t, row in zip(self.times, self.states):
            writer.writerow([repr(float(t)), *(repr(float(v)) for v in row)])
        return sink.getvalue() if fh is None else None

    @classmethod
    def from_csv(cls, fh):
        if isinstance(fh, str):
            fh = io.StringIO(fh)
        meta = {}
        lines = []
        for line in fh:
            if line.startswith("#"):
                for token in line[1:].split():
                    key, _, value = token.partition("=")
                    meta[key] = value
            elif line.strip():
                lines.append(line)
        rows = list(csv.reader(lines))
        data = np.array([[float(v) for v in row] for row in rows[1:]], dtype=float)
        if data.size == 0:
            data = np.empty((0, len(rows[0])))
        nodes = tuple(meta["nodes"].split(",")) if meta.get("nodes") else ()
        seed = int(meta["seed"]) if "seed" in meta else None
        return cls(data[:, 0].copy(), data[:, 1:].copy(), meta.get("kind", "full"), nodes, seed)


@dataclass(frozen=True)
class LockReport:
    locked: bool
    phase_diffs: dict
    residual: float
    tol: float = DEFAULT_LOCK_TOL
    window: float = DEFAULT_LOCK_WINDOW
    amplitudes: dict = field(default_factory=dict)

    def summary(self):
        state = "locked" if self.locked else "NOT locked"
        parts = ", ".join(f"{k}={v:+.4f}" for k, v in self.phase_diffs.items())
        return f"{state} (residual {self.residual:.2e} rad/tau, tol {self.tol:g}): {parts}"


def rk4_step(field, state, tau, h):
    """One classical fourth-order Runge-Kutta step of ``dstate/dtau = field(state, tau)``."""
    if not h > 0:
        raise DomainError(f"step must be positive, got {h}")
    k1 = np.asarray(field(state, tau), dtype=float)
    _check_stage(k1, tau)
    k2 = np.asarray(field(state + 0.5 * h * k1, tau + 0.5 * h), dtype=float)
    _check_stage(k2, tau)
    k3 = np.asarray(field(state + 0.5 * h * k2, tau + 0.5 * h), dtype=float)
    _check_stage(k3, tau)
    k4 = np.asarray(field(state + h * k3, tau + h), dtype=float)
    _check_stage(k4, tau)
    return state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _check_stage(k, tau):
    if not np.all(np.isfinite(k)):
        raise IntegrationError("non-finite Runge-Kutta stage", tau)


def _grid(tau_end, h, sample_every):
    if not (tau_end > 0 and h > 0):
        raise DomainError("tau_end and h must be positive")
    if int(sample_every) != sample_every or sample_every < 1:
        raise DomainError(f"sample_every must be a positive integer, got {sample_every}")
    # guard against 1/0.1 style rounding just below an integer
    n_steps = int(math.floor(tau_end / h * (1.0 + 1e-12)))
    return n_steps, n_steps // int(sample_every) + 1


def integrate(field, state0, tau_end, h=DEFAULT_STEP, sample_every=1, kind="full",
              node_ids=(), seed=None):
    """Integrate an arbitrary Python vector field on the uniform grid ``k*h``.

    The state may have any shape; it is flattened into the trajectory rows.
    """
    n_steps, n_samples = _grid(tau_end, h, sample_every)
    state = np.array(state0, dtype=float)
    out = np.empty((n_samples, state.size))
    out[0] = state.ravel()
    j = 1
    for k in range(1, n_steps + 1):
        state = rk4_step(field, state, (k - 1) * h, h)
        if k % sample_every == 0:
            out[j] = state.ravel()
            j += 1
    times = np.arange(n_samples) * (h * sample_every)
    return Trajectory(times, out, kind, tuple(node_ids), seed)


@numba.njit(cache=True, nogil=True)
def _rk4_network_loop(state0, n_steps, h, sample_every, alpha, src, dst, rho, gamma,
                      directed, drive_target, drive_psi, drive_gain, reference, amplitude):
    n_samples = n_steps // sample_every + 1
    out = np.empty((n_samples, state0.size))
    s = state0.copy()
    out[0] = s
    j = 1
    for k in range(1, n_steps + 1):
        tau = (k - 1) * h
        args = (alpha, src, dst, rho, gamma, directed, drive_target, drive_psi,
                drive_gain, reference, amplitude)
        k1 = _network_kernel(s, tau, *args)
        k2 = _network_kernel(s + 0.5 * h * k1, tau + 0.5 * h, *args)
        k3 = _network_kernel(s + 0.5 * h * k2, tau + 0.5 * h, *args)
        k4 = _network_kernel(s + h * k3, tau + h, *args)
        s = s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        for v in s:
            if not np.isfinite(v):
                return out[:j], k
        if k % sample_every == 0:
            out[j] = s
            j += 1
    return out, -1


def integrate_network(net, state0, tau_end, h=DEFAULT_STEP, sample_every=1, seed=None):
    """Compiled RK4 integration of a :class:`~osclogic.dynamics.NetworkSpec`."""
    n_steps, _ = _grid(tau_end, h, sample_every)
    state0 = np.ascontiguousarray(state0, dtype=float)
    if state0.shape != (2 * net.n_nodes,):
        raise DomainError(f"state0 must have length {2 * net.n_nodes}")
    if not np.all(np.isfinite(state0)):
        raise DomainError("state0 contains non-finite values")
    out, failed_at = _rk4_network_loop(state0, n_steps, float(h), int(sample_every),
                                       *net.arrays)
    if failed_at >= 0:
        raise IntegrationError("full-state integration diverged", failed_at * h)
    times = np.arange(out.shape[0]) * (h * sample_every)
    return Trajectory(times, out, "full", tuple(net.node_ids), seed)


@numba.njit(cache=True, nogil=True)
def _rk4_phase_loop(psi0, n_steps, h, sample_every, node, other, offset, bias, sin_coef, cos_coef):
    n_samples = n_steps // sample_every + 1
    out = np.empty((n_samples, psi0.size))
    s = psi0.copy()
    out[0] = s
    j = 1
    for k in range(1, n_steps + 1):
        k1 = _reduced_kernel(s, node, other, offset, bias, sin_coef, cos_coef)
        k2 = _reduced_kernel(s + 0.5 * h * k1, node, other, offset, bias, sin_coef, cos_coef)
        k3 = _reduced_kernel(s + 0.5 * h * k2, node, other, offset, bias, sin_coef, cos_coef)
        k4 = _reduced_kernel(s + h * k3, node, other, offset, bias, sin_coef, cos_coef)
        s = s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        for v in s:
            if not np.isfinite(v):
                return out[:j], k
        if k % sample_every == 0:
            out[j] = s
            j += 1
    return out, -1


def integrate_phase_network(reduced, psi0, tau_end, h=DEFAULT_STEP, sample_every=1, seed=None):
    """Compiled RK4 integration of an averaged :class:`~osclogic.phase_model.ReducedNetwork`.

    Samples are unwrapped phase deviations; the trajectory kind is ``"phase"``.
    """
    n_steps, _ = _grid(tau_end, h, sample_every)
    psi0 = np.ascontiguousarray(psi0, dtype=float)
    if psi0.shape != (len(reduced.node_ids),):
        raise DomainError(f"psi0 must have length {len(reduced.node_ids)}")
    if not np.all(np.isfinite(psi0)):
        raise DomainError("psi0 contains non-finite values")
    out, failed_at = _rk4_phase_loop(psi0, n_steps, float(h), int(sample_every), *reduced.arrays())
    if failed_at >= 0:
        raise IntegrationError("phase integration diverged", failed_at * h)
    times = np.arange(out.shape[0]) * (h * sample_every)
    return Trajectory(times, out, "phase", tuple(reduced.node_ids), seed)


def detect_lock(traj, reference=None, window=DEFAULT_LOCK_WINDOW, tol=DEFAULT_LOCK_TOL):
    """Decide whether every node is phase locked to ``reference`` at the tail of ``traj``.

    ``reference`` is a node id/index, or None for the ideal unit-frequency clock
    ``theta_ref = tau``. The window is cut into whole periods; the residual is the
    largest drift of the per-period circular mean of ``psi_i`` divided by 2*pi.
    """
    times = traj.times
    if times.size < 2 or times[-1] - times[0] < window:
        raise DomainError(f"trajectory spans {times[-1] - times[0]:.3g}, shorter than window {window:.3g}")
    mask = times >= times[-1] - window
    t = times[mask]
    phases = traj.phases()[mask]
    amps = {}
    if traj.kind == "full":
        mean_amp = traj.amplitudes()[mask].mean(axis=0)
        names = traj.node_ids or tuple(str(i) for i in range(traj.n_nodes))
        amps = {names[i]: float(a) for i, a in enumerate(mean_amp)}
        low = [n for n, a in amps.items() if a < MIN_AMPLITUDE]
        if low:
            raise NotOscillatingError(f"amplitude collapsed below {MIN_AMPLITUDE} at nodes {low}")
    if reference is None:
        ref_phase = t if traj.kind == "full" else np.zeros_like(t)
        ref_idx = None
    else:
        ref_idx = traj.node_index(reference)
        ref_phase = phases[:, ref_idx]
    psi = phases - ref_phase[:, None]

    n_periods = int((t[-1] - t[0]) // TWO_PI)
    if n_periods >= 2:
        bins = np.minimum(((t - t[0]) // TWO_PI).astype(int), n_periods - 1)
        means = np.array([circular_mean(psi[bins == b], axis=0) for b in range(n_periods)])
        drift = np.diff(np.unwrap(means, axis=0), axis=0) / TWO_PI
    else:
        drift = np.diff(np.unwrap(psi, axis=0), axis=0) / np.diff(t)[:, None]
    keep = [i for i in range(psi.shape[1]) if i != ref_idx]
    residual = float(np.max(np.abs(drift[:, keep]))) if keep and drift.size else 0.0
    final = circular_mean(psi, axis=0)
    names = traj.node_ids or tuple(str(i) for i in range(psi.shape[1]))
    diffs = {names[i]: float(wrap_phase(final[i])) for i in keep}
    return LockReport(residual < tol, diffs, residual, tol, window, amps)
