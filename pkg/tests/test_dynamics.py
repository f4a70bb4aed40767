import logging
import math

import numpy as np
import pytest

from osclogic.dynamics import (CYCLE_AMPLITUDE, CouplingEdge, DrivenSource, NetworkSpec,
                               OscillatorSpec, conductance, cycle_state, network_field,
                               normalize_circuit, register_field, single_oscillator_field)
from osclogic.errors import ConfigurationError, DomainError
from osclogic.gates import GateInstance, build_majority, build_not


@pytest.mark.parametrize("state, expected", [
    ((0.0, 0.0), (0.0, 0.0)),
    ((1.0, 0.0), (0.0, -1.0)),
    ((0.0, 1.0), (1.0, 0.0)),
])
def test_single_oscillator_field_values(state, expected):
    assert np.allclose(single_oscillator_field(state, 0.1), expected, atol=1e-15)


def test_single_oscillator_field_general_point():
    # y' = -x + alpha (1 - y^2) y evaluated by hand at (0.3, 0.5), alpha 0.2
    out = single_oscillator_field((0.3, 0.5), 0.2)
    assert out == pytest.approx([0.5, -0.3 + 0.2 * 0.75 * 0.5])


@pytest.mark.parametrize("bad", [(np.nan, 0.0), (0.0, np.inf)])
def test_single_oscillator_field_rejects_non_finite(bad):
    with pytest.raises(DomainError):
        single_oscillator_field(bad, 0.1)


def test_single_oscillator_field_rejects_bad_alpha():
    with pytest.raises(DomainError):
        single_oscillator_field((1.0, 0.0), 0.0)


@pytest.mark.parametrize("args, expected", [
    ((1, 1, 0.1, 0.1), (0.1, 0.1, 1.0)),
    ((4, 1, 0.1, 0.1), (0.2, 0.8, 2.0)),
    ((1, 4, 0.2, 0.8), (0.1, 0.1, 2.0)),
])
def test_normalize_circuit(args, expected):
    assert normalize_circuit(*args) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("args", [(0, 1, 0.1, 0.1), (1, -1, 0.1, 0.1), (1, 1, 0.0, 0.1)])
def test_normalize_circuit_rejects_non_positive(args):
    with pytest.raises(DomainError):
        normalize_circuit(*args)


def test_register_field_zero_coupling_is_single_oscillator():
    edge = CouplingEdge("ref", "k")
    out = register_field((0.4, -0.7), (0.9, 0.2), edge, 0.1)
    assert np.array_equal(out, single_oscillator_field((0.9, 0.2), 0.1))


def test_register_field_hand_values():
    edge = CouplingEdge("ref", "k", rho=0.05, gamma=0.1, directed=True)
    assert register_field((1, 0), (1, 0), edge, 0.1) == pytest.approx([-0.2, -1.0])
    # x' = y_k - 2 rho (x_k + x_R) = 1 - 0 ; y' = -0 - g(1) - 0 = 0
    assert register_field((0, 1), (0, 1), edge, 0.1) == pytest.approx([1.0, 0.0])


def test_conductance_energy_sign():
    ys = np.linspace(-3, 3, 601)
    ys = ys[(np.abs(ys) > 1e-9) & (np.abs(np.abs(ys) - 1) > 1e-9)]
    injected = ys * conductance(ys, 0.1)
    assert np.all(injected[np.abs(ys) < 1] < 0)
    assert np.all(injected[np.abs(ys) > 1] > 0)


def test_oscillator_spec_validation(caplog):
    with pytest.raises(ConfigurationError):
        OscillatorSpec("a", 0.0)
    with pytest.raises(ConfigurationError):
        OscillatorSpec("has space", 0.1)
    with caplog.at_level(logging.WARNING):
        OscillatorSpec("a", 0.5)
    assert "weakly nonlinear" in caplog.text


def test_edge_and_source_validation():
    with pytest.raises(ConfigurationError):
        CouplingEdge("a", "b", rho=-0.1)
    with pytest.raises(ConfigurationError):
        CouplingEdge("a", "a", gamma=0.1)
    with pytest.raises(ConfigurationError):
        DrivenSource("a", 0.0, -1.0)


def test_network_validation():
    a, b = OscillatorSpec("a"), OscillatorSpec("b")
    with pytest.raises(ConfigurationError, match="duplicate"):
        NetworkSpec([a, a])
    with pytest.raises(ConfigurationError, match="unknown node"):
        NetworkSpec([a], [CouplingEdge("a", "c", gamma=0.1)])
    with pytest.raises(ConfigurationError, match="unknown node"):
        NetworkSpec([a], [], [DrivenSource("c")])
    with pytest.raises(ConfigurationError, match="outgoing directed"):
        NetworkSpec([a, b], [CouplingEdge("a", "b", gamma=0.1)], reference="a")
    with pytest.raises(ConfigurationError, match="cannot be driven"):
        NetworkSpec([a, b], [], [DrivenSource("a")], reference="a")


def test_network_field_decoupled_equals_direct_sum(rng):
    net = NetworkSpec([OscillatorSpec("a", 0.1), OscillatorSpec("b", 0.2)])
    state = rng.normal(size=4)
    out = network_field(net, state)
    assert np.array_equal(out[:2], single_oscillator_field(state[:2], 0.1))
    assert np.array_equal(out[2:], single_oscillator_field(state[2:], 0.2))


def test_network_field_rejects_bad_state():
    net = NetworkSpec([OscillatorSpec("a")])
    with pytest.raises(DomainError):
        network_field(net, [0.0])
    with pytest.raises(DomainError):
        network_field(net, [np.nan, 0.0])


def test_not_netlist_symmetric_state_resistive_term():
    gate = GateInstance.not_gate(rho=0.07, gamma=0.05)
    net = NetworkSpec(build_not(gate).oscillators, build_not(gate).edges)  # drop the drive
    x, y = 0.6, -0.4
    out = network_field(net, [x, y, x, y])
    intrinsic = single_oscillator_field((x, y), 0.1)
    assert out[0] == pytest.approx(intrinsic[0] - 4 * 0.07 * x, abs=1e-15)
    assert out[2] == pytest.approx(intrinsic[0] - 4 * 0.07 * x, abs=1e-15)
    assert out[1] == pytest.approx(intrinsic[1], abs=1e-15)


def test_majority_synchronized_manifold_without_reference():
    # all drives in phase with the nodes: with psi_d = 0 the ideal drive equals the
    # on-cycle y at tau, so every coupling term cancels
    gate = GateInstance.majority("and")
    net = build_majority(gate, (0, 0))
    tau = 0.37
    state = cycle_state([tau] * 3)
    out = network_field(net, state, tau)
    intrinsic = single_oscillator_field(state[:2], 0.1)
    for n in range(3):
        assert out[2 * n:2 * n + 2] == pytest.approx(intrinsic, abs=1e-15)


def test_reference_drive_matches_ideal_drive_on_cycle():
    a = OscillatorSpec("a")
    ideal = NetworkSpec([a], [], [DrivenSource("a", 1.1, 0.2)])
    referenced = ideal.with_reference("ref")
    tau = 0.8
    node = cycle_state([0.3])
    ref = cycle_state([tau])
    assert network_field(referenced, np.concatenate([ref, node]), tau)[2:] == pytest.approx(
        network_field(ideal, node, tau), abs=1e-14)


def test_master_slave_one_way(rng):
    gate = GateInstance.register(0.05, 0.1)
    from osclogic.gates import build_register
    net = build_register(gate)
    state = rng.normal(size=4)
    perturbed = state.copy()
    perturbed[2:] += rng.normal(size=2)
    assert np.array_equal(network_field(net, state)[:2], network_field(net, perturbed)[:2])


def test_cycle_state_layout():
    s = cycle_state([0.0, math.pi / 2])
    assert s == pytest.approx([CYCLE_AMPLITUDE, 0.0, 0.0, -CYCLE_AMPLITUDE], abs=1e-15)
