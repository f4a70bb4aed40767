"""Command-line entry point: ``osclogic {simulate,truth-table,stability,reduce}``.

Exit codes: 0 success, 1 not locked / wrong truth table / claim not confirmed,
2 unreadable or malformed input, 3 simulation failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys

from .errors import ConfigurationError, DomainError, NetlistParseError, SimulationError
from .gates import (GateInstance, run_truth_table, simulate_settled,
                    truth_table_csv, truth_table_text)
from .netlist import parse_netlist
from .phase_model import reduce_network
from .stability import check_claim, theorem_claim

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_SIM = 0, 1, 2, 3
SEED_ENV = "OSC_LOGIC_SEED"


def _seed(default):
    value = os.environ.get(SEED_ENV)
    if value is None:
        return default
    try:
        return int(value)
    except ValueError:
        raise ConfigurationError(f"{SEED_ENV} must be an integer, got {value!r}") from None


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path, text):
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _parse_target(text):
    values = []
    for token in text.split(","):
        token = token.strip().lower()
        sign = -1.0 if token.startswith("-") else 1.0
        bare = token.lstrip("+-")
        if bare == "pi":
            values.append(sign * math.pi)
        else:
            try:
                values.append(float(token))
            except ValueError:
                raise DomainError(f"cannot read target component {token!r}") from None
    return tuple(values)


def cmd_simulate(args):
    try:
        net, sim = parse_netlist(_read(args.netlist))
    except (OSError, NetlistParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    seed = _seed(sim.seed)
    try:
        report, traj = simulate_settled(net, seed=seed, engine=args.engine, tau_end=sim.tau_end,
                                        h=sim.h, add_reference=False)
    except (SimulationError, DomainError) as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIM
    if args.csv:
        _write(args.csv, traj.to_csv())
    print(report.summary())
    return EXIT_OK if report.locked else EXIT_FAIL


def _gate_from_args(args):
    if args.gate == "not":
        kwargs = {k: v for k, v in (("rho", args.rho), ("gamma", args.gamma)) if v is not None}
        return GateInstance.not_gate(**kwargs)
    kwargs = {k: v for k, v in (("gamma_in", args.gamma_in), ("gamma", args.gamma))
              if v is not None}
    return GateInstance.majority(args.gate, **kwargs)


def cmd_truth_table(args):
    seed = _seed(args.seed)
    gate = _gate_from_args(args)
    rows = run_truth_table(gate, engine=args.engine, seed=seed, tau_end=args.tau_end)
    print(truth_table_text(gate, rows), end="")
    if args.csv:
        _write(args.csv, truth_table_csv(gate, rows, seed))
    return EXIT_OK if all(r.ok for r in rows) else EXIT_FAIL


def cmd_stability(args):
    seed = _seed(args.seed)
    claim = theorem_claim(args.gate, _parse_target(args.target_eq), rho=args.rho,
                          gamma=args.gamma, gamma_in=args.gamma_in)
    report, ok = check_claim(claim, n_trajectories=args.trajectories, seed=seed)
    print(f"gate: {args.gate}  gains: {claim.gains}  drives: {claim.drives}")
    print(f"claimed: {claim.expected}")
    print(report.text(), end="")
    print("verdict: " + ("matches claim" if ok else "DOES NOT match claim"))
    if args.csv:
        _write(args.csv, report.csv())
    return EXIT_OK if ok else EXIT_FAIL


def cmd_reduce(args):
    try:
        net, _ = parse_netlist(_read(args.netlist))
    except (OSError, NetlistParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = reduce_network(net).describe()
    if args.output:
        _write(args.output, text)
    else:
        print(text, end="")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="osclogic", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate a netlist and report phase locking")
    p.add_argument("netlist")
    p.add_argument("--engine", choices=("full", "phase"), default="full")
    p.add_argument("--csv", help="trajectory CSV output path, '-' for stdout")
    p.set_defaults(func=cmd_simulate)

    def gains(p, gates):
        p.add_argument("--gate", choices=gates, required=True)
        p.add_argument("--rho", type=float, help="NOT/register resistive gain")
        p.add_argument("--gamma", type=float, help="conductive gain")
        p.add_argument("--gamma-in", type=float, help="MAJORITY input drive gain")
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--csv", help="CSV output path, '-' for stdout")

    p = sub.add_parser("truth-table", help="simulate every input combination of a gate")
    gains(p, ("not", "and", "or"))
    p.add_argument("--engine", choices=("full", "phase"), default="full")
    p.add_argument("--tau-end", type=float, default=3000.0)
    p.set_defaults(func=cmd_truth_table)

    p = sub.add_parser("stability", help="classify and certify a gate equilibrium")
    gains(p, ("not", "and", "or", "register"))
    p.add_argument("--target-eq", required=True, help="comma separated phases, e.g. 0,pi")
    p.add_argument("--trajectories", type=int, default=100)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("reduce", help="print the averaged phase model of a netlist")
    p.add_argument("netlist")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_reduce)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigurationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SimulationError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIM


if __name__ == "__main__":
    sys.exit(main())
