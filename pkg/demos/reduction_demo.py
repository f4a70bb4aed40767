"""From circuit equations to a phase model by averaging over one cycle.

Run with ``python3 demos/reduction_demo.py``.
"""

import numpy as np

from osclogic.gates import GateInstance, build_majority
from osclogic.phase_model import averaged_register_coupling, reduce_network


def main():
    print("Averaged register coupling H(psi) for rho=0.05, gamma=0.1:")
    for psi in np.linspace(-np.pi, np.pi, 9):
        h = averaged_register_coupling(psi, 0.05, 0.1)
        print(f"  psi={psi:+.3f}  H={h:+.6f}  (rho-gamma)*sin(psi)={(0.05 - 0.1) * np.sin(psi):+.6f}")

    print("\nReduced model of an AND gate with inputs (1, 0), reference added:")
    net = build_majority(GateInstance.majority("and"), (1, 0)).with_reference("ref")
    print(reduce_network(net).describe())


if __name__ == "__main__":
    main()
