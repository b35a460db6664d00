"""Mealy machines, rooted connectivity graphs and their matrix view.

Machines and graphs are immutable once built, simulation never modifies them. State ids are
non-negative integers and every matrix view indexes vertices by ascending id.
"""
from dataclasses import dataclass
from types import MappingProxyType
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from fsm_watermark import utils
from fsm_watermark.errors import FsmSemanticError


class Fsm:
    """Deterministic, possibly partial, Mealy machine ``(S, T, I, P, O, s)``.

    Parameters
    ----------
    states : Iterable[int]
        State ids.
    inputs : Iterable[str]
        Input alphabet, in encoding order: symbol ``inputs[i]`` is encoded as ``i``.
    outputs : Iterable[str]
        Output alphabet.
    reset : int
        Reset state.
    transitions : Mapping[Tuple[int, str], Tuple[int, str]]
        ``(state, input) -> (next state, output)``, undefined pairs are holes.
    name : str, optional
        Free label kept by the interchange format, by default "".

    Raises
    ------
    FsmSemanticError
        An invariant of the machine is violated.
    """

    def __init__(self, states: Iterable[int], inputs: Iterable[str], outputs: Iterable[str],
                 reset: int, transitions: Mapping[Tuple[int, str], Tuple[int, str]],
                 name: str = "") -> None:
        states = list(states)
        for state in states:
            if isinstance(state, bool) or not isinstance(state, int) or state < 0:
                raise FsmSemanticError(f"state id {state!r} is not a non-negative integer.")
        if len(set(states)) != len(states):
            raise FsmSemanticError("duplicate state id in the state set.")
        self._states: Tuple[int, ...] = tuple(sorted(states))
        self._inputs: Tuple[str, ...] = _alphabet(inputs, "input")
        self._outputs: Tuple[str, ...] = _alphabet(outputs, "output")
        if reset not in self._states:
            raise FsmSemanticError(f"reset state {reset!r} is not a state.")
        self._reset = reset
        self._name = name

        known_states = set(self._states)
        known_inputs = set(self._inputs)
        known_outputs = set(self._outputs)
        table: Dict[Tuple[int, str], Tuple[int, str]] = {}
        for (state, symbol), (target, output) in sorted(transitions.items()):
            if state not in known_states:
                raise FsmSemanticError(f"unknown state {state} used as transition source.")
            if target not in known_states:
                raise FsmSemanticError(f"unknown state {target} used as transition target.")
            if symbol not in known_inputs:
                raise FsmSemanticError(f"unknown input symbol '{symbol}' on state {state}.")
            if output not in known_outputs:
                raise FsmSemanticError(f"unknown output symbol '{output}' on state {state}.")
            table[(state, symbol)] = (target, output)
        self._table = table

    @property
    def name(self) -> str:
        """Free label of the machine."""
        return self._name

    @property
    def states(self) -> Tuple[int, ...]:
        """State ids in ascending order."""
        return self._states

    @property
    def inputs(self) -> Tuple[str, ...]:
        """Input alphabet in encoding order."""
        return self._inputs

    @property
    def outputs(self) -> Tuple[str, ...]:
        """Output alphabet."""
        return self._outputs

    @property
    def reset(self) -> int:
        """Reset state."""
        return self._reset

    @property
    def transitions(self) -> Mapping[Tuple[int, str], int]:
        """Read-only map ``(state, input) -> next state``."""
        return MappingProxyType({key: value[0] for key, value in self._table.items()})

    @property
    def output_map(self) -> Mapping[Tuple[int, str], str]:
        """Read-only map ``(state, input) -> output``."""
        return MappingProxyType({key: value[1] for key, value in self._table.items()})

    @property
    def table(self) -> Mapping[Tuple[int, str], Tuple[int, str]]:
        """Read-only map ``(state, input) -> (next state, output)``."""
        return MappingProxyType(self._table)

    @property
    def n_states(self) -> int:
        """Number of states."""
        return len(self._states)

    @property
    def input_width(self) -> int:
        """Bits needed to encode an input symbol by its index."""
        return utils.bit_width(len(self._inputs))

    @property
    def state_width(self) -> int:
        """Bits needed to encode any state id, ``ceil(log2(max id + 1))`` and at least 1."""
        return max(1, self._states[-1].bit_length())

    @property
    def tick(self) -> str:
        """Symbol encoded as 0, used to step linear branches."""
        return self._inputs[0]

    def step(self, state: int, symbol: str) -> Optional[Tuple[int, str]]:
        """Next state and output, ``None`` when the transition is undefined (halt)."""
        return self._table.get((state, symbol))

    def successors(self, state: int) -> Tuple[int, ...]:
        """Distinct targets reachable from ``state`` in one step, ascending."""
        return tuple(sorted({target for (source, _), (target, _) in self._table.items()
                             if source == state}))

    def encode_state(self, state: int) -> str:
        """Encode a state id on ``state_width`` bits."""
        return utils.to_bits(state, self.state_width)

    def encode_input(self, symbol: str) -> str:
        """Encode an input symbol by its index on ``input_width`` bits."""
        return utils.to_bits(self._inputs.index(symbol), self.input_width)

    def decode_input(self, bits: str) -> Optional[str]:
        """Input symbol with the given index bits, ``None`` if the index is unused."""
        index = utils.from_bits(bits)
        return self._inputs[index] if index < len(self._inputs) else None

    def replace_transition(self, state: int, symbol: str, target: int) -> 'Fsm':
        """Copy of the machine with one transition redirected, its output kept.

        Raises
        ------
        FsmSemanticError
            The transition is undefined.
        """
        if (state, symbol) not in self._table:
            raise FsmSemanticError(f"no transition from state {state} on '{symbol}'.")
        table = dict(self._table)
        table[(state, symbol)] = (target, self._table[(state, symbol)][1])
        return Fsm(self._states, self._inputs, self._outputs, self._reset, table, self._name)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Fsm):
            return NotImplemented
        return (self._states == other.states and self._inputs == other.inputs and
                set(self._outputs) == set(other.outputs) and self._reset == other.reset and
                self._table == dict(other.table))

    def __hash__(self) -> int:
        return hash((self._states, self._inputs, self._reset, len(self._table)))

    def __repr__(self) -> str:
        return (f"Fsm(name={self._name!r}, states={len(self._states)}, "
                f"inputs={len(self._inputs)}, transitions={len(self._table)})")


def _alphabet(symbols: Iterable[str], kind: str) -> Tuple[str, ...]:
    symbols = tuple(symbols)
    for symbol in symbols:
        if not isinstance(symbol, str) or not symbol:
            raise FsmSemanticError(f"{kind} symbol {symbol!r} is not a nonempty string.")
    if len(set(symbols)) != len(symbols):
        raise FsmSemanticError(f"duplicate {kind} symbol in the {kind} alphabet.")
    return symbols


class ConnGraph:
    """Rooted directed graph ``G = (V, E, s)``.

    Parameters
    ----------
    vertices : Iterable[int]
        Vertex ids.
    edges : Iterable[Tuple[int, int]]
        Ordered pairs, duplicates collapse.
    root : int
        Root vertex.

    Raises
    ------
    ValueError
        The root or an edge endpoint is not a vertex.
    """

    def __init__(self, vertices: Iterable[int], edges: Iterable[Tuple[int, int]],
                 root: int) -> None:
        self._vertices: Tuple[int, ...] = tuple(sorted(set(vertices)))
        known = set(self._vertices)
        if root not in known:
            raise ValueError(f"root {root} is not a vertex.")
        edge_set = {(int(u), int(v)) for u, v in edges}
        for u, v in edge_set:
            if u not in known or v not in known:
                raise ValueError(f"edge ({u}, {v}) has an endpoint outside the vertices.")
        self._edges: Tuple[Tuple[int, int], ...] = tuple(sorted(edge_set))
        self._root = root
        self._successors: Dict[int, Tuple[int, ...]] = {v: () for v in self._vertices}
        for u, v in self._edges:
            self._successors[u] += (v,)

    @property
    def vertices(self) -> Tuple[int, ...]:
        """Vertex ids, ascending."""
        return self._vertices

    @property
    def edges(self) -> Tuple[Tuple[int, int], ...]:
        """Edges, sorted."""
        return self._edges

    @property
    def root(self) -> int:
        """Root vertex."""
        return self._root

    def successors(self, vertex: int) -> Tuple[int, ...]:
        """Targets of the out-edges of ``vertex``, ascending."""
        return self._successors[vertex]

    def out_degree(self, vertex: int) -> int:
        """Number of out-edges of ``vertex``."""
        return len(self._successors[vertex])

    def is_linear(self) -> bool:
        """A single chain from the root: out-degree 1 everywhere except one terminal vertex."""
        degrees = [self.out_degree(v) for v in self._vertices]
        if max(degrees) > 1 or degrees.count(0) != 1:
            return False
        return len(nx.descendants(self.to_networkx(), self._root)) == len(self._vertices) - 1

    def to_networkx(self) -> nx.DiGraph:
        """Copy of the graph as a ``networkx.DiGraph`` (root stored as a graph attribute)."""
        graph = nx.DiGraph(root=self._root)
        graph.add_nodes_from(self._vertices)
        graph.add_edges_from(self._edges)
        return graph

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConnGraph):
            return NotImplemented
        return (self._vertices == other.vertices and self._edges == other.edges and
                self._root == other.root)

    def __hash__(self) -> int:
        return hash((self._vertices, self._edges, self._root))

    def __repr__(self) -> str:
        return f"ConnGraph(vertices={len(self._vertices)}, edges={len(self._edges)}, " \
               f"root={self._root})"


class BitMatrix:
    """Square boolean matrix whose rows and columns are labelled by vertex ids.

    Parameters
    ----------
    matrix : array_like
        ``m x m`` entries, cast to booleans.
    vertices : Sequence[int]
        Label of each index, strictly ascending.
    """

    def __init__(self, matrix, vertices: Sequence[int]) -> None:
        matrix = np.asarray(matrix).astype(bool)
        vertices = tuple(vertices)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"matrix of shape {matrix.shape} is not square.")
        if matrix.shape[0] != len(vertices):
            raise ValueError(f"matrix dimension {matrix.shape[0]} does not match "
                             f"{len(vertices)} vertex labels.")
        if list(vertices) != sorted(set(vertices)):
            raise ValueError("vertex labels must be strictly ascending.")
        matrix.setflags(write=False)
        self._matrix = matrix
        self._vertices = vertices

    @property
    def dimension(self) -> int:
        """Number of rows."""
        return len(self._vertices)

    @property
    def vertices(self) -> Tuple[int, ...]:
        """Label of each index."""
        return self._vertices

    @property
    def matrix(self) -> np.ndarray:
        """Read-only boolean array."""
        return self._matrix

    def index_of(self, vertex: int) -> int:
        """Index of a vertex label."""
        return self._vertices.index(vertex)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self._vertices == other.vertices and np.array_equal(self._matrix, other.matrix)

    def __hash__(self) -> int:
        return hash((self._vertices, self._matrix.tobytes()))


@dataclass(frozen=True)
class RunResult:
    """Outcome of a simulation from a start state.

    ``states`` holds the start state followed by the state reached after each consumed symbol.
    """
    outputs: Tuple[str, ...]
    states: Tuple[int, ...]
    consumed: int
    halted: bool


def connectivity_graph(m: Fsm) -> ConnGraph:
    """Graph of the machine with inputs and outputs erased.

    Parameters
    ----------
    m : Fsm
        Host machine.

    Returns
    -------
    ConnGraph
        Same vertex set as the machine's states, rooted at its reset state.
    """
    return ConnGraph(m.states, ((s, t) for (s, _), t in m.transitions.items()), m.reset)


def adjacency(g: ConnGraph) -> BitMatrix:
    """Adjacency matrix ``rho(G)`` under the ascending index mapping."""
    index = {v: i for i, v in enumerate(g.vertices)}
    matrix = np.zeros((len(g.vertices), len(g.vertices)), dtype=bool)
    for u, v in g.edges:
        matrix[index[u], index[v]] = True
    return BitMatrix(matrix, g.vertices)


def graph_of_adjacency(a: BitMatrix, root: int) -> ConnGraph:
    """Inverse of ``adjacency``.

    Raises
    ------
    ValueError
        ``root`` does not label a row of ``a``.
    """
    if root not in a.vertices:
        raise ValueError(f"root {root} does not index a row of the {a.dimension}x{a.dimension} "
                         f"matrix.")
    edges = [(a.vertices[i], a.vertices[j]) for i, j in np.argwhere(a.matrix)]
    return ConnGraph(a.vertices, edges, root)


def standard_cg_machine(g: ConnGraph) -> Fsm:
    """Machine ``phi(G)`` walking the graph and emitting its current vertex.

    The input alphabet is made of edge-choice codes ``0..d-1`` on ``max(1, ceil(log2 d))``
    bits, ``d`` being the largest out-degree; code ``i`` follows the ``i``-th successor by
    ascending id. A graph without branching gets the single tick symbol.
    """
    degree = max((g.out_degree(v) for v in g.vertices), default=0)
    width = utils.bit_width(max(degree, 1))
    inputs = tuple(utils.to_bits(i, width) for i in range(max(degree, 1)))
    state_width = max(1, g.vertices[-1].bit_length())
    outputs = tuple(utils.to_bits(v, state_width) for v in g.vertices)
    transitions = {
        (u, inputs[i]): (w, utils.to_bits(u, state_width))
        for u in g.vertices for i, w in enumerate(g.successors(u))}
    return Fsm(g.vertices, inputs, outputs, g.root, transitions, name="phi")


def step(m: Fsm, state: int, symbol: str) -> Optional[Tuple[int, str]]:
    """One deterministic step, ``None`` stands for the halt signal."""
    return m.step(state, symbol)


def run(m: Fsm, symbols: Iterable[str], start: Optional[int] = None) -> RunResult:
    """Left fold of ``step`` from the reset state (or ``start``).

    The run stops at the first undefined transition; symbols outside the alphabet are
    undefined transitions as well.
    """
    state = m.reset if start is None else start
    outputs = []
    states = [state]
    consumed = 0
    for symbol in symbols:
        moved = m.step(state, symbol)
        if moved is None:
            return RunResult(tuple(outputs), tuple(states), consumed, True)
        state, output = moved
        outputs.append(output)
        states.append(state)
        consumed += 1
    return RunResult(tuple(outputs), tuple(states), consumed, False)


def reachable_states(m: Fsm) -> FrozenSet[int]:
    """States reachable from reset."""
    graph = connectivity_graph(m).to_networkx()
    return frozenset(nx.descendants(graph, m.reset) | {m.reset})


def relabel_states(m: Fsm, mapping: Mapping[int, int], name: str = "") -> Fsm:
    """Rename the states of a machine that emits its current state, inputs kept.

    Parameters
    ----------
    m : Fsm
        Machine following the standard CG output convention.
    mapping : Mapping[int, int]
        Bijection of the state set onto new ids.
    name : str, optional
        Name of the result, by default the name of ``m``.

    Raises
    ------
    ValueError
        ``mapping`` is not a bijection of the state set, or ``m`` emits something else than
        its current state.
    """
    if set(mapping) != set(m.states) or len(set(mapping.values())) != len(mapping):
        raise ValueError("mapping must be a bijection over the states.")
    for (state, symbol), output in m.output_map.items():
        if output != m.encode_state(state):
            raise ValueError(f"output '{output}' of state {state} on '{symbol}' does not "
                             f"encode the state.")
    width = max(1, max(mapping.values()).bit_length())
    table = {(mapping[s], x): (mapping[t], utils.to_bits(mapping[s], width))
             for (s, x), (t, _) in m.table.items()}
    outputs = [utils.to_bits(v, width) for v in sorted(mapping.values())]
    return Fsm(mapping.values(), m.inputs, outputs, mapping[m.reset], table, name or m.name)
