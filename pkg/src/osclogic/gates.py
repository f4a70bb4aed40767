"""Phase-encoded logic gates: netlist builders, bit coding, truth tables and composition.

Bit 0 is in-phase with the reference (psi = 0) and bit 1 is anti-phase (psi = pi).
All gate simulations carry a free-running reference unit ``ref`` that clocks the
drive sources, so a drive at ``psi_d`` is an exact phase-shifted copy of ``ref``.
"""

from __future__ import annotations

import csv
import graphlib
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import (DEFAULT_ALPHA, CouplingEdge, DrivenSource, NetworkSpec, OscillatorSpec,
                       cycle_state)
from .errors import (AmbiguousPhaseError, ConfigurationError, DomainError, OscLogicError)
from .integrator import (DEFAULT_STEP, detect_lock, integrate_network, integrate_phase_network,
                         wrap_phase)
from .phase_model import reduce_network

AMBIGUITY_BAND = 0.2
DEFAULT_SEED = 42
DEFAULT_TAU_END = 3000.0
INITIAL_SPREAD = 0.1
REFERENCE_ID = "ref"

# gains chosen well inside the stability region of every listed equilibrium,
# see README "Gate parameters"
DEFAULT_MAJORITY_GAINS = (0.09, 0.015)
DEFAULT_NOT_GAINS = (0.05, 0.05)


def encode_bit(b):
    if b not in (0, 1):
        raise DomainError(f"bit must be 0 or 1, got {b!r}")
    return math.pi if b == 1 else 0.0


def decode_bit(psi):
    """Threshold decoder: ``|psi| < pi/2`` is 0, otherwise 1, with a guard band around pi/2."""
    if not math.isfinite(psi):
        raise DomainError(f"phase must be finite, got {psi}")
    mag = abs(wrap_phase(psi))
    if abs(mag - math.pi / 2) < AMBIGUITY_BAND:
        raise AmbiguousPhaseError(f"phase {psi:.4f} rad is within {AMBIGUITY_BAND} rad of pi/2")
    return 0 if mag < math.pi / 2 else 1


def _is_select(value, target):
    return abs(wrap_phase(value - target)) < 1e-12


@dataclass(frozen=True)
class GateInstance:
    """One gate with its gains.

    ``kind`` is ``"register"``, ``"not"`` or ``"majority"``. Majority gates use
    ``gamma_i = gamma_j`` for the input drives, ``gamma`` for the mutual links and
    the global drive, and ``psi_select`` (0 for AND, pi for OR) for that drive.
    """

    kind: str
    input_nodes: tuple
    output_node: str
    rho: float = 0.0
    gamma: float = 0.0
    gamma_i: float = 0.0
    gamma_j: float = 0.0
    psi_select: float = 0.0
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        object.__setattr__(self, "input_nodes", tuple(self.input_nodes))
        gains = (self.rho, self.gamma, self.gamma_i, self.gamma_j, self.alpha)
        if not all(math.isfinite(g) and g >= 0 for g in gains):
            raise ConfigurationError(f"{self.kind}: gains must be finite and >= 0")
        if self.output_node in self.input_nodes:
            raise ConfigurationError(f"{self.kind}: output node is also an input")
        if self.kind == "register":
            if len(self.input_nodes) != 1:
                raise ConfigurationError("register takes exactly one reference input")
            if self.rho == self.gamma:
                raise ConfigurationError("register needs rho != gamma to store a bit")
        elif self.kind == "not":
            if len(self.input_nodes) != 1:
                raise ConfigurationError("NOT takes exactly one input node")
            if not (self.rho > 0 and self.gamma > 0):
                raise ConfigurationError("NOT needs rho > 0 and gamma > 0")
        elif self.kind == "majority":
            if len(self.input_nodes) != 2:
                raise ConfigurationError("MAJORITY takes exactly two input nodes")
            if self.gamma_i != self.gamma_j:
                raise ConfigurationError("MAJORITY needs gamma_i == gamma_j")
            if not self.gamma > 0:
                raise ConfigurationError("MAJORITY needs gamma > 0")
            if _is_select(self.psi_select, 0.0):
                if not self.gamma_i > self.gamma:
                    raise ConfigurationError("AND mode needs gamma_i > gamma")
            elif _is_select(self.psi_select, math.pi):
                if not self.gamma_i > 2 * self.gamma:
                    raise ConfigurationError("OR mode needs gamma_i > 2*gamma")
            else:
                raise ConfigurationError("psi_select must be 0 (AND) or pi (OR)")
        else:
            raise ConfigurationError(f"unknown gate kind {self.kind!r}")

    @property
    def mode(self):
        if self.kind != "majority":
            return self.kind
        return "and" if _is_select(self.psi_select, 0.0) else "or"

    @property
    def nodes(self):
        return (*self.input_nodes, self.output_node)

    @classmethod
    def register(cls, rho, gamma, output_node="k", alpha=DEFAULT_ALPHA):
        return cls("register", (REFERENCE_ID,), output_node, rho=rho, gamma=gamma, alpha=alpha)

    @classmethod
    def not_gate(cls, rho=DEFAULT_NOT_GAINS[0], gamma=DEFAULT_NOT_GAINS[1], input_node="j",
                 output_node="k", alpha=DEFAULT_ALPHA):
        return cls("not", (input_node,), output_node, rho=rho, gamma=gamma, alpha=alpha)

    @classmethod
    def majority(cls, mode, gamma_in=DEFAULT_MAJORITY_GAINS[0], gamma=DEFAULT_MAJORITY_GAINS[1],
                 input_nodes=("i", "j"), output_node="k", alpha=DEFAULT_ALPHA):
        if mode not in ("and", "or"):
            raise ConfigurationError(f"majority mode must be 'and' or 'or', got {mode!r}")
        select = 0.0 if mode == "and" else math.pi
        return cls("majority", input_nodes, output_node, gamma=gamma, gamma_i=gamma_in,
                   gamma_j=gamma_in, psi_select=select, alpha=alpha)

    def input_gain(self, index):
        if self.kind == "not":
            return self.gamma
        if self.kind == "majority":
            return self.gamma_i if index == 0 else self.gamma_j
        raise ConfigurationError("a register has no driven input")

    def expected(self, bits):
        if self.kind == "not":
            return 1 - bits[0]
        if self.kind == "majority":
            ref = 0 if self.mode == "and" else 1
            return int(ref + bits[0] + bits[1] >= 2)
        raise ConfigurationError("a register has no logic input")

    def input_combinations(self):
        if self.kind == "not":
            return [(0,), (1,)]
        if self.kind == "majority":
            return [(a, b) for a in (0, 1) for b in (0, 1)]
        return [()]


def _require(gate, kind):
    if gate.kind != kind:
        raise ConfigurationError(f"expected a {kind} gate, got {gate.kind}")


def build_register(gate):
    """Reference unit plus one slave node on a directed resistive/conductive link."""
    _require(gate, "register")
    ref, out = gate.input_nodes[0], gate.output_node
    oscs = (OscillatorSpec(ref, gate.alpha), OscillatorSpec(out, gate.alpha))
    edge = CouplingEdge(ref, out, gate.rho, gate.gamma, directed=True)
    return NetworkSpec(oscs, (edge,), (), reference=ref)


def build_not(gate, input_bit=0):
    """Input node driven at ``encode_bit(input_bit)``, tied to the output by a resistive link."""
    _require(gate, "not")
    j, k = gate.input_nodes[0], gate.output_node
    oscs = (OscillatorSpec(j, gate.alpha), OscillatorSpec(k, gate.alpha))
    edge = CouplingEdge(j, k, rho=gate.rho)
    drive = DrivenSource(j, encode_bit(input_bit), gate.gamma)
    return NetworkSpec(oscs, (edge,), (drive,))


def build_majority(gate, input_bits=(0, 0)):
    """All-to-all conductive triple; inputs driven by their bits, every node by the select drive."""
    _require(gate, "majority")
    (i, j), k = gate.input_nodes, gate.output_node
    oscs = tuple(OscillatorSpec(n, gate.alpha) for n in (i, j, k))
    edges = (CouplingEdge(i, j, gamma=gate.gamma), CouplingEdge(i, k, gamma=gate.gamma),
             CouplingEdge(j, k, gamma=gate.gamma))
    drives = (DrivenSource(i, encode_bit(input_bits[0]), gate.gamma_i),
              DrivenSource(j, encode_bit(input_bits[1]), gate.gamma_j),
              *(DrivenSource(n, gate.psi_select, gate.gamma) for n in (i, j, k)))
    return NetworkSpec(oscs, edges, drives)


def build_gate(gate, input_bits=()):
    if gate.kind == "register":
        return build_register(gate)
    if gate.kind == "not":
        return build_not(gate, *input_bits)
    return build_majority(gate, tuple(input_bits))


@dataclass(frozen=True)
class TruthTableRow:
    reference_bit: int | None
    inputs: tuple
    expected: int
    observed: int | None
    psi: dict
    locked: bool
    error: str | None = None
    lock_report: object = field(default=None, compare=False, repr=False)

    @property
    def ok(self):
        return self.locked and self.error is None and self.observed == self.expected


def simulate_settled(net, seed=DEFAULT_SEED, engine="full", tau_end=DEFAULT_TAU_END,
                     h=DEFAULT_STEP, rng=None, add_reference=True):
    """Simulate ``net`` and return ``(lock_report, trajectory)``.

    Every node starts on the cycle with a phase drawn uniformly from +-0.1 rad;
    the reference starts at phase 0. With ``add_reference`` a reference unit is
    inserted when the network has none; otherwise drives stay ideal sinusoids and
    locking is measured against the unit-frequency clock.
    """
    if add_reference:
        net = net.with_reference(REFERENCE_ID)
    rng = np.random.default_rng(seed) if rng is None else rng
    phases = np.zeros(net.n_nodes)
    others = [n for n, nid in enumerate(net.node_ids) if nid != net.reference]
    phases[others] = rng.uniform(-INITIAL_SPREAD, INITIAL_SPREAD, len(others))
    if engine == "full":
        traj = integrate_network(net, cycle_state(phases), tau_end, h, sample_every=10, seed=seed)
    elif engine == "phase":
        traj = integrate_phase_network(reduce_network(net), phases, tau_end, h, sample_every=10,
                                       seed=seed)
    else:
        raise ConfigurationError(f"unknown engine {engine!r}")
    return detect_lock(traj, net.reference), traj


def _run_row(gate, bits, engine, seed_rng, tau_end, h):
    net = build_gate(gate, bits)
    ref_bit = {"and": 0, "or": 1}.get(gate.mode)
    expected = gate.expected(bits)
    try:
        report, _ = simulate_settled(net, engine=engine, tau_end=tau_end, h=h, rng=seed_rng)
    except OscLogicError as exc:
        return TruthTableRow(ref_bit, bits, expected, None, {}, False, str(exc))
    observed, error = None, None
    try:
        observed = decode_bit(report.phase_diffs[gate.output_node])
    except AmbiguousPhaseError as exc:
        error = str(exc)
    if not report.locked:
        error = error or "not locked: " + report.summary()
    return TruthTableRow(ref_bit, bits, expected, observed, dict(report.phase_diffs),
                         report.locked, error, report)


def run_truth_table(gate, engine="full", seed=DEFAULT_SEED, tau_end=DEFAULT_TAU_END,
                    h=DEFAULT_STEP, workers=None):
    """Simulate every input combination of ``gate`` and decode its output.

    Each row gets an independent child generator spawned from ``seed``, so the
    result does not depend on scheduling.
    """
    if gate.kind == "register":
        raise ConfigurationError("a register has no truth table")
    combos = gate.input_combinations()
    children = np.random.SeedSequence(seed).spawn(len(combos))
    rngs = [np.random.default_rng(c) for c in children]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_row, gate, bits, engine, rng, tau_end, h)
                   for bits, rng in zip(combos, rngs)]
        return [f.result() for f in futures]


_CSV_COLUMNS = ("ref", "in1", "in2", "expected", "observed", "psi_i", "psi_j", "psi_k", "locked")


def _row_fields(gate, row):
    ins = list(row.inputs) + [""] * (2 - len(row.inputs))
    if gate.kind == "majority":
        names = gate.nodes
    else:
        names = (None, *gate.nodes)
    psis = ["" if n is None or n not in row.psi else repr(row.psi[n]) for n in names]
    return ["" if row.reference_bit is None else row.reference_bit, *ins, row.expected,
            "" if row.observed is None else row.observed, *psis, int(row.locked)]


def truth_table_csv(gate, rows, seed=None):
    sink = io.StringIO()
    if seed is not None:
        sink.write(f"# seed={seed}\n")
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(_CSV_COLUMNS)
    for row in rows:
        writer.writerow(_row_fields(gate, row))
    return sink.getvalue()


def truth_table_text(gate, rows):
    header = ["ref", "in1", "in2", "expected", "observed", "psi_out", "locked", "status"]
    lines = []
    for row in rows:
        fields = _row_fields(gate, row)
        psi_out = row.psi.get(gate.output_node)
        status = "ok" if row.ok else (row.error or "MISMATCH")
        lines.append([str(v) for v in fields[:5]]
                     + ["" if psi_out is None else f"{psi_out:+.4f}", "yes" if row.locked else "no",
                        status])
    widths = [max(len(h), *(len(r[c]) for r in lines)) for c, h in enumerate(header)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    title = f"{gate.mode.upper()} gate, {sum(r.ok for r in rows)}/{len(rows)} rows correct"
    return "\n".join([title, fmt.format(*header), *(fmt.format(*r) for r in lines)]) + "\n"


# --- composition ---------------------------------------------------------------


def _prefixed(gate_index, node):
    return f"g{gate_index}.{node}"


def compose(gates, wiring=None, inputs=None):
    """Merge gates into one network.

    ``wiring`` maps ``(downstream_gate, input_node) -> upstream_gate``; each wired
    input loses its drive and instead listens to the upstream output through a
    directed conductive link of the same gain. Unwired inputs are driven at the
    bits given in ``inputs`` (``(gate, input_node) -> bit``, default 0). Node ids
    become ``g<index>.<node>``.
    """
    gates = list(gates)
    wiring = dict(wiring or {})
    inputs = dict(inputs or {})
    if any(g.kind == "register" for g in gates):
        raise ConfigurationError("registers cannot be composed; they have no logic input")
    graph = {n: set() for n in range(len(gates))}
    for (dst, node), src in wiring.items():
        for idx in (dst, src):
            if not 0 <= idx < len(gates):
                raise ConfigurationError(f"wiring refers to gate {idx}, which does not exist")
        if node not in gates[dst].input_nodes:
            raise ConfigurationError(f"gate {dst} has no input {node!r}")
        graph[dst].add(src)
    try:
        tuple(graphlib.TopologicalSorter(graph).static_order())
    except graphlib.CycleError as exc:
        raise ConfigurationError(f"cyclic wiring: {exc.args[1]}") from None

    oscs, edges, drives = [], [], []
    for n, gate in enumerate(gates):
        bits = tuple(inputs.get((n, node), 0) for node in gate.input_nodes)
        part = build_gate(gate, bits)
        rename = {nid: _prefixed(n, nid) for nid in part.node_ids}
        oscs += [replace(o, id=rename[o.id]) for o in part.oscillators]
        edges += [replace(e, source=rename[e.source], target=rename[e.target]) for e in part.edges]
        for pos, node in enumerate(gate.input_nodes):
            if (n, node) in wiring:
                upstream = wiring[(n, node)]
                edges.append(CouplingEdge(_prefixed(upstream, gates[upstream].output_node),
                                          rename[node], gamma=gate.input_gain(pos), directed=True))
        # builders emit the input drives first, in input order
        n_inputs = len(gate.input_nodes)
        for pos, d in enumerate(part.sources):
            if pos < n_inputs and (n, gate.input_nodes[pos]) in wiring:
                continue
            drives.append(replace(d, target=rename[d.target]))
    return NetworkSpec(oscs, edges, drives)


def evaluate_circuit(gates, wiring, inputs, output_gate, engine="full", seed=DEFAULT_SEED,
                     tau_end=DEFAULT_TAU_END, h=DEFAULT_STEP):
    """Compose, simulate and decode the output node of ``output_gate``."""
    net = compose(gates, wiring, inputs)
    report, _ = simulate_settled(net, seed=seed, engine=engine, tau_end=tau_end, h=h)
    node = _prefixed(output_gate, gates[output_gate].output_node)
    return decode_bit(report.phase_diffs[node]), report
