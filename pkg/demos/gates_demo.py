"""Phase-encoded logic: NOT, AND, OR and a composed NAND.

Bits live in the phase of each oscillator relative to a reference: 0 rad is bit 0 and
pi rad is bit 1. Run with ``python3 demos/gates_demo.py``.
"""

from osclogic.gates import GateInstance, evaluate_circuit, run_truth_table, truth_table_text


def main():
    for gate in (GateInstance.not_gate(), GateInstance.majority("and"),
                 GateInstance.majority("or")):
        rows = run_truth_table(gate, engine="full")
        print(truth_table_text(gate, rows))

    # The same three-node network is AND or OR depending only on the selector drive phase.
    print("NAND from an AND gate wired into a NOT gate (full-state simulation):")
    gates = [GateInstance.majority("and"), GateInstance.not_gate()]
    for a in (0, 1):
        for b in (0, 1):
            out, report = evaluate_circuit(gates, {(1, "j"): 0}, {(0, "i"): a, (0, "j"): b}, 1)
            print(f"  {a} {b} -> {out}   (locked={report.locked})")


if __name__ == "__main__":
    main()
