"""Why the gates work: linear stability plus an energy-like function that only decreases.

Run with ``python3 demos/stability_demo.py``.
"""

import math

from osclogic.stability import (THEOREM_EQUILIBRIA, check_claim, find_equilibria,
                                or_char_poly, phase_rhs_for, theorem_claim)

PI = math.pi


def main():
    print("Every equilibrium of the AND phase model with both inputs at 0:")
    rhs = phase_rhs_for("majority", (0.0, 0.0, 0.0), (0.09, 0.09, 0.015))
    for point in find_equilibria(rhs, 3):
        print("  (" + ", ".join(f"{p:+.3f}" for p in point) + ")")
    print("Only the decoded answer (0, 0, 0) should be stable; the others are saddles or sources.\n")

    for target, drives in THEOREM_EQUILIBRIA["majority"]:
        gate = "and" if drives[2] == 0.0 else "or"
        report, ok = check_claim(theorem_claim(gate, target), n_trajectories=20)
        cert = report.liapunov
        print(f"{gate.upper():3} target {tuple(round(t, 2) for t in target)}: "
              f"{report.classification}, certificate {'holds' if cert.passed else 'fails'}, "
              f"claim {'confirmed' if ok else 'NOT confirmed'}")

    print("\nOR gate at (0,0,0) with gamma_in = 0.3, gamma = 0.1: characteristic polynomial")
    print("  ", or_char_poly(0.3, 0.1), "(all coefficients positive, so no positive real root)")

    print("\nInput gain only twice the mutual gain: the AND answer (pi, 0, 0) loses stability.")
    claim = theorem_claim("and", (PI, 0.0, 0.0), gamma=0.015, gamma_in=0.03)
    report, _ = check_claim(claim, n_trajectories=10)
    print(report.text())


if __name__ == "__main__":
    main()
