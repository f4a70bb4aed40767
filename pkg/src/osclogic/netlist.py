"""Plain-text netlist format.

    # comment
    [osc ref]
    alpha = 0.1
    [osc k]
    [edge ref k]
    rho = 0.05
    gamma = 0.1
    directed = true
    [drive k]
    psi_d = pi
    gamma_d = 0.05
    [sim]
    tau_end = 3000
    h = 0.01
    seed = 42
    reference = ref

Numbers are finite decimals; ``pi`` and ``-pi`` are accepted for angles.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .dynamics import (DEFAULT_ALPHA, CouplingEdge, DrivenSource, NetworkSpec, OscillatorSpec)
from .errors import ConfigurationError, NetlistParseError

_SECTION = re.compile(r"^\[\s*(osc|edge|drive|sim)((?:\s+\S+)*)\s*\]$")
_KEYS = {
    "osc": {"alpha"},
    "edge": {"rho", "gamma", "directed"},
    "drive": {"psi_d", "gamma_d"},
    "sim": {"tau_end", "h", "seed", "reference"},
}
_ARITY = {"osc": 1, "edge": 2, "drive": 1, "sim": 0}
_ANGLE_TOKENS = {"pi": math.pi, "+pi": math.pi, "-pi": -math.pi}


@dataclass(frozen=True)
class SimConfig:
    tau_end: float = 3000.0
    h: float = 0.01
    seed: int = 42


def _number(text, key, line, allow_pi=False):
    token = text.strip().lower()
    if allow_pi and token in _ANGLE_TOKENS:
        return _ANGLE_TOKENS[token]
    try:
        value = float(token)
    except ValueError:
        raise NetlistParseError(f"{key}: {text.strip()!r} is not a number", line) from None
    if not math.isfinite(value):
        raise NetlistParseError(f"{key}: value must be finite", line)
    return value


def _boolean(text, line):
    token = text.strip().lower()
    if token in ("true", "yes", "1"):
        return True
    if token in ("false", "no", "0"):
        return False
    raise NetlistParseError(f"directed: {text.strip()!r} is not a boolean", line)


def parse_netlist(text):
    """Parse a netlist document into ``(NetworkSpec, SimConfig)``."""
    sections = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            match = _SECTION.match(line)
            if not match:
                raise NetlistParseError(f"malformed section header {line!r}", lineno)
            kind, args = match.group(1), match.group(2).split()
            if len(args) != _ARITY[kind]:
                raise NetlistParseError(
                    f"[{kind}] takes {_ARITY[kind]} argument(s), got {len(args)}", lineno)
            current = {"kind": kind, "args": args, "values": {}, "line": lineno,
                       "label": line}
            sections.append(current)
            continue
        if current is None:
            raise NetlistParseError("key/value line outside any section", lineno)
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise NetlistParseError(f"expected 'key = value', got {line!r}", lineno)
        if key not in _KEYS[current["kind"]]:
            raise NetlistParseError(f"unknown key {key!r}", lineno, current["label"])
        if key in current["values"]:
            raise NetlistParseError(f"duplicate key {key!r}", lineno, current["label"])
        current["values"][key] = (value.strip(), lineno)
    return _build(sections)


def _build(sections):
    oscs, edges, drives = [], [], []
    sim = {}
    reference = None
    seen_sim = False
    for sec in sections:
        kind, vals, label = sec["kind"], sec["values"], sec["label"]

        def num(key, default, allow_pi=False):
            if key not in vals:
                return default
            text, line = vals[key]
            return _number(text, key, line, allow_pi)

        try:
            if kind == "osc":
                oscs.append(OscillatorSpec(sec["args"][0], num("alpha", DEFAULT_ALPHA)))
            elif kind == "edge":
                directed = _boolean(*vals["directed"]) if "directed" in vals else False
                edges.append(CouplingEdge(sec["args"][0], sec["args"][1], num("rho", 0.0),
                                          num("gamma", 0.0), directed))
            elif kind == "drive":
                drives.append(DrivenSource(sec["args"][0], num("psi_d", 0.0, allow_pi=True),
                                           num("gamma_d", 0.0)))
            else:
                if seen_sim:
                    raise NetlistParseError("duplicate [sim] section", sec["line"])
                seen_sim = True
                for key in ("tau_end", "h"):
                    if key in vals:
                        sim[key] = num(key, None)
                        if sim[key] <= 0:
                            raise NetlistParseError(f"{key} must be positive", vals[key][1], label)
                if "seed" in vals:
                    seed = num("seed", None)
                    if not seed.is_integer() or seed < 0:
                        raise NetlistParseError("seed must be a non-negative integer",
                                                vals["seed"][1], label)
                    sim["seed"] = int(seed)
                if "reference" in vals:
                    reference = vals["reference"][0]
        except NetlistParseError:
            raise
        except ConfigurationError as exc:
            raise NetlistParseError(str(exc), sec["line"], label) from None
    try:
        net = NetworkSpec(oscs, edges, drives, reference=reference)
    except ConfigurationError as exc:
        where = _offending_section(sections, str(exc))
        raise NetlistParseError(str(exc), where["line"] if where else None,
                                where["label"] if where else None) from None
    return net, SimConfig(**sim)


def _offending_section(sections, message):
    for sec in sections:
        if sec["kind"] == "edge":
            tag = f"edge {sec['args'][0]}->{sec['args'][1]}"
            if tag in message:
                return sec
        if sec["kind"] == "drive" and f"{sec['args'][0]!r}" in message:
            return sec
        if sec["kind"] == "sim" and "reference" in message:
            return sec
    return None


def emit_netlist(net, sim=None):
    """Serialize ``net`` (and optional ``sim``) so that parsing the text gives an equal spec."""
    lines = []
    for osc in net.oscillators:
        lines += [f"[osc {osc.id}]", f"alpha = {osc.alpha!r}"]
    for e in net.edges:
        lines += [f"[edge {e.source} {e.target}]", f"rho = {e.rho!r}", f"gamma = {e.gamma!r}",
                  f"directed = {'true' if e.directed else 'false'}"]
    for d in net.sources:
        lines += [f"[drive {d.target}]", f"psi_d = {d.psi_d!r}", f"gamma_d = {d.gamma_d!r}"]
    sim = sim or SimConfig()
    lines += ["[sim]", f"tau_end = {sim.tau_end!r}", f"h = {sim.h!r}", f"seed = {sim.seed}"]
    if net.reference is not None:
        lines.append(f"reference = {net.reference}")
    return "\n".join(lines) + "\n"
