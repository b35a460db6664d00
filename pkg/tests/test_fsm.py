"""Tests ``fsm`` module."""

import networkx as nx
import numpy as np
import pytest

from fsm_watermark.errors import FsmSemanticError
from fsm_watermark.fsm import (BitMatrix, ConnGraph, Fsm, adjacency, connectivity_graph,
                               graph_of_adjacency, reachable_states, relabel_states, run,
                               standard_cg_machine, step)

from . import machine_factory


## Fsm
def test_host_properties(host):
    """Test the bundled host"""

    assert (
        host.n_states == 8 and
        host.inputs == ("0", "1") and
        host.reset == 0 and
        host.input_width == 1 and
        host.state_width == 3 and
        host.tick == "0" and
        len(host.table) == 16
    )


def test_fsm_views(host):
    """Test transition and output views"""

    assert (
        host.transitions[(3, "0")] == 7 and
        host.output_map[(3, "0")] == "1" and
        host.table[(4, "1")] == (5, "1") and
        host.successors(3) == (0, 7)
    )

    with pytest.raises(TypeError):
        host.transitions[(0, "0")] = 5  # pylint: disable=unsupported-assignment-operation


@pytest.mark.parametrize("states, reset, message", [
    ([0, -1], 0, "state id -1 is not a non-negative integer."),
    ([0, True], 0, "state id True is not a non-negative integer."),
    ([0, 0], 0, "duplicate state id in the state set."),
    ([0, 1], 9, "reset state 9 is not a state."),
])
def test_fsm_bad_states(states, reset, message):
    """Test state set checks"""

    with pytest.raises(FsmSemanticError) as error:
        Fsm(states, ["a"], ["x"], reset, {})
    assert message in str(error.value)


@pytest.mark.parametrize("inputs, transitions, message", [
    (["a", "a"], {}, "duplicate input symbol in the input alphabet."),
    (["a", ""], {}, "input symbol '' is not a nonempty string."),
    (["a"], {(0, "a"): (5, "x")}, "unknown state 5 used as transition target."),
    (["a"], {(7, "a"): (0, "x")}, "unknown state 7 used as transition source."),
    (["a"], {(0, "b"): (1, "x")}, "unknown input symbol 'b' on state 0."),
    (["a"], {(0, "a"): (1, "y")}, "unknown output symbol 'y' on state 0."),
])
def test_fsm_bad_transitions(inputs, transitions, message):
    """Test alphabet and transition checks"""

    with pytest.raises(FsmSemanticError) as error:
        Fsm([0, 1], inputs, ["x"], 0, transitions)
    assert message in str(error.value)


def test_fsm_equality(host):
    """Test equality ignores the name"""

    copy = Fsm(host.states, host.inputs, host.outputs, host.reset, host.table, name="other")

    assert (
        copy == host and
        hash(copy) == hash(host) and
        copy != host.replace_transition(0, "0", 7)
    )


def test_replace_transition(host):
    """Test single transition redirection"""

    tampered = host.replace_transition(0, "0", 7)

    assert (
        tampered.step(0, "0") == (7, "0") and
        tampered.step(0, "1") == host.step(0, "1") and
        host.step(0, "0") == (1, "0")
    )

    with pytest.raises(FsmSemanticError) as error:
        host.replace_transition(0, "x", 1)
    assert "no transition from state 0 on 'x'." in str(error.value)


def test_encode_decode_input():
    """Test input codes"""

    machine = machine_factory.random_machine(4, 3, seed=1)

    assert (
        machine.input_width == 2 and
        machine.encode_input(machine.inputs[2]) == "10" and
        machine.decode_input("10") == machine.inputs[2] and
        machine.decode_input("11") is None and
        machine.encode_state(3) == "11"
    )


## simulation
def test_run(host):
    """Test a run of the host"""

    result = run(host, "0110")

    assert (
        result.outputs == ("0", "0", "1", "0") and
        result.states == (0, 1, 4, 5, 6) and
        result.consumed == 4 and
        result.halted is False and
        step(host, 3, "0") == (7, "1")
    )


def test_run_halts():
    """Test a run stops at the first undefined transition"""

    machine = Fsm([0, 1], ["a", "b"], ["x"], 0, {(0, "a"): (1, "x")})

    halted = run(machine, ["a", "a", "a"])
    unknown = run(machine, ["z"])
    from_state = run(machine, ["a"], start=1)

    assert (
        halted.outputs == ("x",) and
        halted.states == (0, 1) and
        halted.consumed == 1 and
        halted.halted and
        unknown.consumed == 0 and unknown.halted and
        from_state.halted and from_state.states == (1,)
    )


def test_run_is_deterministic():
    """Test simulation never modifies the machine"""

    machine = machine_factory.random_machine(6, 2, seed=5, density=0.7)
    symbols = ["0", "1", "1", "0", "1", "0", "0"]

    assert run(machine, symbols) == run(machine, symbols)


def test_reachable_states(host):
    """Test reachability"""

    machine = Fsm([0, 1, 2], ["a"], ["x"], 0, {(0, "a"): (1, "x"), (2, "a"): (0, "x")})

    assert (
        reachable_states(host) == frozenset(range(8)) and
        reachable_states(machine) == frozenset({0, 1})
    )


## connectivity graph
def test_connectivity_graph(host_graph):
    """Test the graph of the host"""

    assert (
        host_graph.vertices == tuple(range(8)) and
        len(host_graph.edges) == 16 and
        host_graph.root == 0 and
        host_graph.successors(7) == (1, 4) and
        not host_graph.is_linear()
    )


def test_connectivity_graph_collapses_parallel_edges():
    """Test two inputs with the same target give one edge"""

    machine = Fsm([0, 1], ["a", "b"], ["x"], 0, {(0, "a"): (1, "x"), (0, "b"): (1, "x")})

    assert connectivity_graph(machine).edges == ((0, 1),)


def test_conn_graph_raise():
    """Test graph checks"""

    with pytest.raises(ValueError) as error:
        ConnGraph([0, 1], [], 5)
    assert "root 5 is not a vertex." in str(error.value)

    with pytest.raises(ValueError) as error:
        ConnGraph([0, 1], [(0, 9)], 0)
    assert "edge (0, 9) has an endpoint outside the vertices." in str(error.value)


def test_is_linear():
    """Test linear graph detection"""

    assert (
        machine_factory.chain_graph(5).is_linear() and
        machine_factory.chain_graph(1).is_linear() and
        not ConnGraph([0, 1, 2], [(0, 1)], 0).is_linear() and
        not ConnGraph([0, 1], [(0, 1), (1, 0)], 0).is_linear()
    )


def test_to_networkx(host_graph):
    """Test the networkx view"""

    graph = host_graph.to_networkx()

    assert (
        isinstance(graph, nx.DiGraph) and
        graph.graph["root"] == 0 and
        sorted(graph.edges) == list(host_graph.edges)
    )


## matrix view
def test_adjacency_round_trip(host_graph):
    """Test adjacency and its inverse"""

    matrix = adjacency(host_graph)

    assert (
        matrix.dimension == 8 and
        int(matrix.matrix.sum()) == 16 and
        bool(matrix.matrix[3, 7]) and
        graph_of_adjacency(matrix, 0) == host_graph
    )


def test_adjacency_sparse_labels():
    """Test matrix indices follow ascending vertex ids"""

    graph = ConnGraph([10, 3, 7], [(3, 10), (10, 7)], 3)
    matrix = adjacency(graph)

    assert (
        matrix.vertices == (3, 7, 10) and
        matrix.index_of(10) == 2 and
        np.array_equal(matrix.matrix, np.array([[0, 0, 1], [0, 0, 0], [0, 1, 0]], dtype=bool))
    )


def test_graph_of_adjacency_raise(host_graph):
    """Test inverse with a wrong root"""

    with pytest.raises(ValueError) as error:
        graph_of_adjacency(adjacency(host_graph), 9)
    assert "root 9 does not index a row of the 8x8 matrix." in str(error.value)


def test_bit_matrix_raise():
    """Test bit matrix checks"""

    with pytest.raises(ValueError) as error:
        BitMatrix(np.zeros((2, 3)), [0, 1])
    assert "is not square." in str(error.value)

    with pytest.raises(ValueError) as error:
        BitMatrix(np.zeros((2, 2)), [0, 1, 2])
    assert "does not match 3 vertex labels." in str(error.value)

    with pytest.raises(ValueError) as error:
        BitMatrix(np.zeros((2, 2)), [1, 0])
    assert "vertex labels must be strictly ascending." in str(error.value)


def test_bit_matrix_is_read_only(host_graph):
    """Test matrix immutability"""

    matrix = adjacency(host_graph)

    with pytest.raises(ValueError):
        matrix.matrix[0, 0] = True


## standard CG machine
def test_standard_cg_machine(host_graph):
    """Test the machine walking the host graph"""

    phi = standard_cg_machine(host_graph)
    result = run(phi, ["1", "0"])

    assert (
        phi.inputs == ("0", "1") and
        phi.state_width == 3 and
        result.outputs == ("000", "010") and
        result.states == (0, 2, 5) and
        connectivity_graph(phi) == host_graph
    )


def test_standard_cg_machine_of_a_chain():
    """Test a chain gets the single tick symbol"""

    phi = standard_cg_machine(machine_factory.chain_graph(4, first=1))
    result = run(phi, ["0"] * 5)

    assert (
        phi.inputs == ("0",) and
        result.outputs == ("001", "010", "011") and
        result.consumed == 3 and
        result.halted
    )


def test_standard_cg_machine_round_trip():
    """Test the connectivity graph of phi(G) is G"""

    for seed in range(20):
        graph = machine_factory.random_graph(7, seed)
        assert connectivity_graph(standard_cg_machine(graph)) == graph


## relabelling
def test_relabel_states():
    """Test renaming the states of a standard CG machine"""

    phi = standard_cg_machine(machine_factory.chain_graph(3))
    renamed = relabel_states(phi, {0: 2, 1: 0, 2: 1}, name="renamed")

    assert (
        renamed.reset == 2 and
        renamed.step(2, "0") == (0, "10") and
        renamed.step(0, "0") == (1, "00") and
        renamed.name == "renamed"
    )


def test_relabel_states_raise(host):
    """Test relabelling checks"""

    phi = standard_cg_machine(machine_factory.chain_graph(3))

    with pytest.raises(ValueError) as error:
        relabel_states(phi, {0: 1, 1: 1, 2: 0})
    assert "mapping must be a bijection over the states." in str(error.value)

    with pytest.raises(ValueError) as error:
        relabel_states(host, {s: s for s in host.states})
    assert "does not encode the state." in str(error.value)
