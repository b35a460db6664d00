"""Encryption of a REDUX by permutation matrices.

The key ``K`` is an identity matrix with permuted rows, ``K[i, image[i]] = 1``. Graphs are
encrypted by right multiplication of their adjacency matrix, the shipped watermark machine is
the REDUX relabelled by the key, and the verifier keeps a decryption machine that turns the
watermark machine's emissions back into the REDUX's.
"""
from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterable, Tuple, Union

import numpy as np

from fsm_watermark import utils
from fsm_watermark.errors import AlphabetMismatchError
from fsm_watermark.fsm import (BitMatrix, ConnGraph, Fsm, adjacency, connectivity_graph,
                               graph_of_adjacency, relabel_states, standard_cg_machine)


class PermKey:
    """Permutation key over matrix indices.

    Parameters
    ----------
    image : Iterable[int]
        ``image[i]`` is the column of the 1 on row ``i``.

    Raises
    ------
    ValueError
        ``image`` is not a permutation of ``0..m-1``.
    """

    def __init__(self, image: Iterable[int]) -> None:
        self._image: Tuple[int, ...] = tuple(int(i) for i in image)
        if sorted(self._image) != list(range(len(self._image))) or not self._image:
            raise ValueError(f"{list(self._image)} is not a permutation of 0..m-1.")

    @property
    def dimension(self) -> int:
        """Matrix dimension ``m``."""
        return len(self._image)

    @property
    def image(self) -> Tuple[int, ...]:
        """Permutation image array."""
        return self._image

    @property
    def matrix(self) -> np.ndarray:
        """Integer matrix form ``K``."""
        matrix = np.zeros((self.dimension, self.dimension), dtype=np.int64)
        matrix[np.arange(self.dimension), self._image] = 1
        return matrix

    def inverse(self) -> 'PermKey':
        """Key of ``K^T``."""
        inverse = [0] * self.dimension
        for i, j in enumerate(self._image):
            inverse[j] = i
        return PermKey(inverse)

    def is_orthogonal(self) -> bool:
        """``K K^T = I`` holds on the matrix form."""
        matrix = self.matrix
        return bool(np.array_equal(matrix @ matrix.T, np.eye(self.dimension, dtype=np.int64)))

    def vertex_map(self, vertices: Iterable[int]) -> Dict[int, int]:
        """Vertex relabelling ``pi_K`` induced on ascending ``vertices``."""
        vertices = sorted(vertices)
        self._check_dimension(len(vertices))
        return {v: vertices[self._image[i]] for i, v in enumerate(vertices)}

    def _check_dimension(self, dimension: int):
        if dimension != self.dimension:
            raise ValueError(f"key dimension {self.dimension} does not match "
                             f"{dimension} vertices.")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PermKey):
            return NotImplemented
        return self._image == other.image

    def __hash__(self) -> int:
        return hash(self._image)

    def __repr__(self) -> str:
        return f"PermKey({list(self._image)})"


@dataclass(frozen=True)
class TracePair:
    """Time-indexed pairs ``(u_k, v_k)``: REDUX state and watermark-machine state."""
    pairs: Tuple[Tuple[int, int], ...]


def random_perm_key(m: int, seed: int) -> PermKey:
    """Uniform permutation key drawn by a seeded Fisher-Yates shuffle."""
    if m < 1:
        raise ValueError(f"'m' ({m}) must be >= 1.")
    return PermKey(np.random.default_rng(seed).permutation(m))


def _multiply(key: PermKey, g: ConnGraph, key_matrix: np.ndarray) -> ConnGraph:
    key._check_dimension(len(g.vertices))  # pylint: disable=protected-access
    product = adjacency(g).matrix.astype(np.int64) @ key_matrix
    return graph_of_adjacency(BitMatrix(product > 0, g.vertices), g.root)


def encrypt_graph(key: PermKey, g: ConnGraph) -> ConnGraph:
    """``rho^-1(rho(G) K)``, generally a disconnected, non-linear graph."""
    return _multiply(key, g, key.matrix)


def decrypt_graph(key: PermKey, g: ConnGraph) -> ConnGraph:
    """``rho^-1(rho(G) K^T)``, inverse of ``encrypt_graph``."""
    return _multiply(key, g, key.matrix.T)


def conjugate_graph(key: PermKey, g: ConnGraph) -> ConnGraph:
    """``rho^-1(K^T rho(G) K)``: the graph with every vertex renamed by ``pi_K``."""
    key._check_dimension(len(g.vertices))  # pylint: disable=protected-access
    matrix = key.matrix
    product = matrix.T @ adjacency(g).matrix.astype(np.int64) @ matrix
    return graph_of_adjacency(BitMatrix(product > 0, g.vertices),
                              key.vertex_map(g.vertices)[g.root])


def _as_machine(redux: Union[ConnGraph, Fsm]) -> Fsm:
    return standard_cg_machine(redux) if isinstance(redux, ConnGraph) else redux


def build_watermark_machine(key: PermKey, lpr: Union[ConnGraph, Fsm]) -> Fsm:
    """Runnable encrypted REDUX: states renamed by ``pi_K``, input labels kept.

    Parameters
    ----------
    key : PermKey
        Key of the REDUX's dimension.
    lpr : ConnGraph or Fsm
        Linear REDUX graph (turned into its standard CG machine) or an LPR(k) machine.

    Returns
    -------
    Fsm
        Machine whose connectivity graph is ``conjugate_graph(key, CG(lpr))``.
    """
    machine = _as_machine(lpr)
    watermark = relabel_states(machine, key.vertex_map(machine.states), name="watermark")
    utils.debug(f"watermark machine: {watermark!r}")
    return watermark


def trace_pair(lpr: ConnGraph, key: PermKey) -> TracePair:
    """Walk the linear REDUX and the watermark machine side by side."""
    mapping = key.vertex_map(lpr.vertices)
    pairs = []
    state = lpr.root
    for _ in range(len(lpr.vertices)):
        pairs.append((state, mapping[state]))
        successors = lpr.successors(state)
        if not successors:
            break
        state = successors[0]
    return TracePair(tuple(pairs))


def build_decryption_machine(key: PermKey, lpr: Union[ConnGraph, Fsm]) -> Fsm:
    """Machine mimicking the REDUX when fed with the watermark machine's emissions.

    In state ``u`` the emission of ``pi_K(w)`` for an edge ``(u, w)`` moves to ``w`` and
    outputs ``w``; any other emission keeps ``u`` and outputs ``u``.
    """
    graph = lpr if isinstance(lpr, ConnGraph) else connectivity_graph(lpr)
    mapping = key.vertex_map(graph.vertices)
    width = max(1, graph.vertices[-1].bit_length())
    symbols = {v: utils.to_bits(mapping[v], width) for v in graph.vertices}
    inputs = [symbols[v] for v in sorted(graph.vertices, key=lambda v: mapping[v])]
    transitions = {}
    for u in graph.vertices:
        for symbol in inputs:
            transitions[(u, symbol)] = (u, utils.to_bits(u, width))
        for w in graph.successors(u):
            transitions[(u, symbols[w])] = (w, utils.to_bits(w, width))
    outputs = [utils.to_bits(v, width) for v in graph.vertices]
    return Fsm(graph.vertices, inputs, outputs, graph.root, transitions, name="decryption")


def cascade_pairs(front: Fsm, back: Fsm) -> Dict[int, Tuple[int, int]]:
    """Reachable product states of a cascade, numbered in breadth-first discovery order.

    Raises
    ------
    AlphabetMismatchError
        ``back`` does not accept every output of ``front``.
    """
    missing = set(front.outputs) - set(back.inputs)
    if missing:
        raise AlphabetMismatchError(
            f"back machine does not accept {len(missing)} output(s) of the front machine, "
            f"e.g. '{sorted(missing)[0]}'.")
    start = (front.reset, back.reset)
    numbering = {start: 0}
    queue = deque([start])
    while queue:
        f_state, b_state = queue.popleft()
        for symbol in front.inputs:
            moved = _cascade_step(front, back, f_state, b_state, symbol)
            if moved is not None and moved[0] not in numbering:
                numbering[moved[0]] = len(numbering)
                queue.append(moved[0])
    return {number: pair for pair, number in numbering.items()}


def _cascade_step(front: Fsm, back: Fsm, f_state: int, b_state: int, symbol: str):
    moved_front = front.step(f_state, symbol)
    if moved_front is None:
        return None
    moved_back = back.step(b_state, moved_front[1])
    if moved_back is None:
        return None
    return (moved_front[0], moved_back[0]), moved_back[1]


def compose_cascade(front: Fsm, back: Fsm) -> Fsm:
    """Product machine feeding each output of ``front`` to ``back`` within the same step.

    States are the reachable pairs numbered as in ``cascade_pairs``, inputs are those of
    ``front`` and outputs those of ``back``. The product halts as soon as either part does.
    """
    pairs = cascade_pairs(front, back)
    numbers = {pair: number for number, pair in pairs.items()}
    transitions = {}
    for number, (f_state, b_state) in pairs.items():
        for symbol in front.inputs:
            moved = _cascade_step(front, back, f_state, b_state, symbol)
            if moved is not None:
                transitions[(number, symbol)] = (numbers[moved[0]], moved[1])
    return Fsm(pairs, front.inputs, back.outputs, 0, transitions, name="cascade")
