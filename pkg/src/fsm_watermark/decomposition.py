"""Cascade decomposition of a machine into an independent and a dependent machine.

A partition is input-preserving (SP) when, for every input, the images of the members of any
block lie in one block. An undefined transition counts as the state holding in place, so a
block may mix states with and without a transition as long as the defined images stay in the
block itself.
"""
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from fsm_watermark import utils
from fsm_watermark.errors import (DecompositionError, IncompatibleBlocksError,
                                  LatticeCapError)
from fsm_watermark.fsm import Fsm

LATTICE_CAP = 12
"""Default largest machine handed to the exhaustive lattice search."""

PAIR_SEPARATOR = "|"


class Partition:
    """Set of disjoint nonempty blocks covering a state set.

    Blocks are numbered densely by ascending minimum element.

    Parameters
    ----------
    blocks : Iterable[Iterable[int]]
        Blocks of state ids.

    Raises
    ------
    ValueError
        A block is empty or two blocks overlap.
    """

    def __init__(self, blocks: Iterable[Iterable[int]]) -> None:
        normalized = []
        for block in blocks:
            block = tuple(sorted(set(block)))
            if not block:
                raise ValueError("a partition block cannot be empty.")
            normalized.append(block)
        normalized.sort()
        self._blocks: Tuple[Tuple[int, ...], ...] = tuple(normalized)
        self._number: Dict[int, int] = {}
        for number, block in enumerate(self._blocks):
            for state in block:
                if state in self._number:
                    raise ValueError(f"state {state} belongs to two blocks.")
                self._number[state] = number

    @classmethod
    def zero(cls, states: Iterable[int]) -> 'Partition':
        """Singleton partition ``0``."""
        return cls([state] for state in states)

    @classmethod
    def one(cls, states: Iterable[int]) -> 'Partition':
        """One-block partition ``{S}``."""
        return cls([states])

    @property
    def blocks(self) -> Tuple[Tuple[int, ...], ...]:
        """Blocks, each sorted, ordered by their number."""
        return self._blocks

    @property
    def elements(self) -> FrozenSet[int]:
        """Union of the blocks."""
        return frozenset(self._number)

    @property
    def signature(self) -> Tuple[Tuple[int, ...], ...]:
        """Canonical comparable form."""
        return self._blocks

    def number_of(self, state: int) -> int:
        """Number ``e(B)`` of the block holding ``state``."""
        return self._number[state]

    def block(self, number: int) -> Tuple[int, ...]:
        """Block with number ``number``."""
        return self._blocks[number]

    def labels(self, states: Sequence[int]) -> Tuple[int, ...]:
        """Block number of each state of ``states``."""
        return tuple(self._number[state] for state in states)

    def is_zero(self) -> bool:
        """Every block is a singleton."""
        return all(len(block) == 1 for block in self._blocks)

    def is_one(self) -> bool:
        """A single block."""
        return len(self._blocks) == 1

    def __len__(self) -> int:
        return len(self._blocks)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return self._blocks == other.blocks

    def __hash__(self) -> int:
        return hash(self._blocks)

    def __repr__(self) -> str:
        return f"Partition({[list(block) for block in self._blocks]})"


class PartitionPair:
    """Partitions ``(pi_I, pi_D)`` of a cascade decomposition."""

    def __init__(self, pi_i: Partition, pi_d: Partition) -> None:
        if pi_i.elements != pi_d.elements:
            raise ValueError("both partitions must cover the same states.")
        self._pi_i = pi_i
        self._pi_d = pi_d

    @property
    def pi_i(self) -> Partition:
        """Partition of the independent machine."""
        return self._pi_i

    @property
    def pi_d(self) -> Partition:
        """Partition of the dependent machine."""
        return self._pi_d

    @property
    def total(self) -> int:
        """Block-count total ``|pi_I| + |pi_D|``."""
        return len(self._pi_i) + len(self._pi_d)

    def is_trivial(self) -> bool:
        """One of the partitions is ``0`` or ``{S}``."""
        return any(p.is_zero() or p.is_one() for p in (self._pi_i, self._pi_d))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PartitionPair):
            return NotImplemented
        return self._pi_i == other.pi_i and self._pi_d == other.pi_d

    def __hash__(self) -> int:
        return hash((self._pi_i, self._pi_d))

    def __repr__(self) -> str:
        return f"PartitionPair(pi_i={self._pi_i!r}, pi_d={self._pi_d!r})"


def _image(m: Fsm, state: int, symbol: str) -> int:
    moved = m.step(state, symbol)
    return state if moved is None else moved[0]


def _check_cover(m: Fsm, pi: Partition):
    if pi.elements != frozenset(m.states):
        raise ValueError("the partition does not cover exactly the machine states.")


## partition algebra
def is_input_preserving(m: Fsm, pi: Partition) -> bool:
    """Every block is mapped into a single block by every input."""
    _check_cover(m, pi)
    for symbol in m.inputs:
        for block in pi.blocks:
            if len({pi.number_of(_image(m, state, symbol)) for state in block}) > 1:
                return False
    return True


def partition_dot(p1: Partition, p2: Partition) -> Partition:
    """Nonempty pairwise intersections of the blocks."""
    if p1.elements != p2.elements:
        raise ValueError("partitions of different sets cannot be multiplied.")
    blocks: Dict[Tuple[int, int], List[int]] = {}
    for state in sorted(p1.elements):
        blocks.setdefault((p1.number_of(state), p2.number_of(state)), []).append(state)
    return Partition(blocks.values())


def is_orthogonal(p1: Partition, p2: Partition) -> bool:
    """``p1 . p2 = 0``: a block of each jointly identifies a state."""
    return partition_dot(p1, p2).is_zero()


def partition_join(p1: Partition, p2: Partition) -> Partition:
    """Finest partition coarser than both."""
    if p1.elements != p2.elements:
        raise ValueError("partitions of different sets cannot be joined.")
    parent = {state: state for state in p1.elements}
    for partition in (p1, p2):
        for block in partition.blocks:
            for state in block[1:]:
                _union(parent, block[0], state)
    return _from_parent(parent)


def _find(parent: Dict[int, int], state: int) -> int:
    while parent[state] != state:
        parent[state] = parent[parent[state]]
        state = parent[state]
    return state


def _union(parent: Dict[int, int], a: int, b: int) -> bool:
    root_a, root_b = _find(parent, a), _find(parent, b)
    if root_a == root_b:
        return False
    parent[max(root_a, root_b)] = min(root_a, root_b)
    return True


def _from_parent(parent: Dict[int, int]) -> Partition:
    blocks: Dict[int, List[int]] = {}
    for state in parent:
        blocks.setdefault(_find(parent, state), []).append(state)
    return Partition(blocks.values())


def _smallest_sp(m: Fsm, a: int, b: int) -> Partition:
    """Finest SP partition putting ``a`` and ``b`` together (congruence closure)."""
    parent = {state: state for state in m.states}
    pending = [(a, b)]
    while pending:
        u, v = pending.pop()
        if _union(parent, u, v):
            pending.extend((_image(m, u, x), _image(m, v, x)) for x in m.inputs)
    return _from_parent(parent)


def enumerate_sp_partitions(m: Fsm, max_states: int = LATTICE_CAP) -> List[Partition]:
    """Every input-preserving partition of the states, ``0`` and ``{S}`` included.

    Every SP partition is a join of the smallest SP partitions merging one pair of states,
    so the lattice is closed from ``0`` by joining with those generators.

    Raises
    ------
    LatticeCapError
        The machine has more than ``max_states`` states.
    """
    if m.n_states > max_states:
        raise LatticeCapError(f"{m.n_states} states exceed the lattice cap of {max_states}.")
    generators = sorted({_smallest_sp(m, a, b) for a, b in combinations(m.states, 2)},
                        key=lambda p: p.signature)
    found: Set[Partition] = {Partition.zero(m.states)}
    frontier = list(found)
    while frontier:
        following = []
        for partition in frontier:
            for generator in generators:
                joined = partition_join(partition, generator)
                if joined not in found:
                    found.add(joined)
                    following.append(joined)
        frontier = following
    utils.debug(f"{len(found)} SP partitions over {m.n_states} states")
    return sorted(found, key=lambda p: (-len(p), p.signature))


def _orthogonal_labels(labels_i: Tuple[int, ...], labels_d: Tuple[int, ...]) -> bool:
    return len(set(zip(labels_i, labels_d))) == len(labels_i)


def orthogonal_pairs(m: Fsm, partitions: Sequence[Partition],
                     nontrivial: bool = True) -> List[PartitionPair]:
    """Every ordered orthogonal pair drawn from ``partitions``."""
    if nontrivial:
        partitions = [p for p in partitions if not (p.is_zero() or p.is_one())]
    labels = {p: p.labels(m.states) for p in partitions}
    return [PartitionPair(a, b) for a in partitions for b in partitions
            if _orthogonal_labels(labels[a], labels[b])]


def minimal_decomposition(m: Fsm, cap: int = LATTICE_CAP) -> PartitionPair:
    """Nontrivial orthogonal SP pair with the fewest blocks in total.

    Ties are broken on the block signatures of ``pi_I`` then ``pi_D``.

    Raises
    ------
    LatticeCapError
        The machine is above ``cap``.
    DecompositionError
        Only the trivial pairs exist.
    """
    candidates = [p for p in enumerate_sp_partitions(m, cap) if not (p.is_zero() or p.is_one())]
    by_size: Dict[int, List[Partition]] = {}
    for partition in candidates:
        by_size.setdefault(len(partition), []).append(partition)
    labels = {p: p.labels(m.states) for p in candidates}
    sizes = sorted(by_size)
    for total in range(2 * min(sizes, default=0), 2 * max(sizes, default=0) + 1):
        found = []
        for size in sizes:
            other = total - size
            if other not in by_size:
                continue
            found.extend(PartitionPair(a, b) for a in by_size[size] for b in by_size[other]
                         if _orthogonal_labels(labels[a], labels[b]))
        if found:
            best = min(found, key=lambda pair: (pair.pi_i.signature, pair.pi_d.signature))
            utils.info(f"minimal decomposition: {len(best.pi_i)} + {len(best.pi_d)} blocks "
                       f"for {m.n_states} states")
            return best
    raise DecompositionError(f"machine '{m.name}' with {m.n_states} states only has the "
                             f"trivial decomposition.")


## LPR(k)
def fixed_partitions_lprk(lprk: Fsm, n: int, k: int) -> PartitionPair:
    """Known-form decomposition of an LPR(k): columns for ``pi_I``, rows for ``pi_D``.

    Both partitions keep the start state in a block of its own.

    Raises
    ------
    DecompositionError
        ``lprk`` does not have the LPR(k) shape or the pair fails verification.
    """
    if lprk.n_states != n * k + 1:
        raise DecompositionError(f"an LPR(k) with n={n}, k={k} has {n * k + 1} states, "
                                 f"got {lprk.n_states}.")
    start = lprk.reset
    columns = []
    for c in range(k):
        column = []
        moved = lprk.step(start, lprk.inputs[c])
        while moved is not None and len(column) < n:
            column.append(moved[0])
            moved = lprk.step(moved[0], lprk.tick)
        if len(column) != n:
            raise DecompositionError(f"branch {c} has {len(column)} rows instead of {n}.")
        columns.append(column)
    try:
        pi_i = Partition([[start]] + columns)
        pi_d = Partition([[start]] + [list(row) for row in zip(*columns)])
        pair = PartitionPair(pi_i, pi_d)
    except ValueError as error:
        raise DecompositionError(f"branches of the LPR(k) overlap: {error}") from error
    if not (is_input_preserving(lprk, pi_i) and is_input_preserving(lprk, pi_d) and
            is_orthogonal(pi_i, pi_d)):
        raise DecompositionError("fixed LPR(k) partitions failed verification.")
    return pair


def size_report(pair: PartitionPair, n: int, k: int) -> Dict[str, int]:
    """Sizes of a decomposition of an LPR(k) next to the bounds they are compared with.

    ``product`` is checked against ``n * k + 1``; the additive count ``n + k + 1`` and the
    count ``n + k + 2`` of machines owning their start states are only reported.
    """
    report = {
        "states": n * k + 1,
        "pi_i": len(pair.pi_i),
        "pi_d": len(pair.pi_d),
        "product": len(pair.pi_i) * len(pair.pi_d),
        "total": pair.total,
        "additive_count": n + k + 1,
        "own_start_count": n + k + 2,
    }
    utils.debug(f"decomposition sizes for n={n}, k={k}: {report}")
    return report


## machines
def pair_symbol(symbol: str, block_bits: str) -> str:
    """Symbol of an ``(input, block)`` pair."""
    return f"{symbol}{PAIR_SEPARATOR}{block_bits}"


def split_pair_symbol(symbol: str) -> Tuple[str, str]:
    """Inverse of ``pair_symbol``."""
    head, separator, block_bits = symbol.rpartition(PAIR_SEPARATOR)
    if not separator:
        raise ValueError(f"'{symbol}' is not an (input, block) pair symbol.")
    return head, block_bits


def _block_bits(pi: Partition, number: int) -> str:
    return utils.to_bits(number, utils.bit_width(len(pi)))


def build_independent(m: Fsm, pi_i: Partition) -> Fsm:
    """Machine on the blocks of ``pi_I``, emitting ``(input, current block)``.

    Raises
    ------
    DecompositionError
        ``pi_I`` is not input-preserving for ``m``.
    """
    _check_cover(m, pi_i)
    numbers = range(len(pi_i))
    outputs = [pair_symbol(x, _block_bits(pi_i, b)) for x in m.inputs for b in numbers]
    transitions = {}
    for number, block in enumerate(pi_i.blocks):
        for symbol in m.inputs:
            images = {pi_i.number_of(_image(m, state, symbol)) for state in block}
            if len(images) > 1:
                raise DecompositionError(f"block {number} is split by input '{symbol}'.")
            if any(m.step(state, symbol) is not None for state in block):
                transitions[(number, symbol)] = (images.pop(),
                                                 pair_symbol(symbol, _block_bits(pi_i, number)))
    return Fsm(numbers, m.inputs, outputs, pi_i.number_of(m.reset), transitions,
               name="independent")


def chi(block_i: Iterable[int], block_d: Iterable[int]) -> int:
    """Single state shared by two blocks.

    Raises
    ------
    IncompatibleBlocksError
        The blocks do not intersect in exactly one state.
    """
    common = set(block_i) & set(block_d)
    if len(common) != 1:
        raise IncompatibleBlocksError(f"blocks {sorted(block_i)} and {sorted(block_d)} share "
                                      f"{len(common)} states.")
    return common.pop()


def build_dependent(m: Fsm, pair: PartitionPair) -> Fsm:
    """Machine on the blocks of ``pi_D`` that recovers the state of ``m``.

    On ``(x, b)`` from block ``d`` it emits ``chi(b, d)`` encoded like ``m``'s states and moves
    to the block of ``T(chi(b, d), x)``; no transition exists when either is undefined.

    Raises
    ------
    DecompositionError
        The pair is not orthogonal or not input-preserving.
    """
    pi_i, pi_d = pair.pi_i, pair.pi_d
    if not (is_orthogonal(pi_i, pi_d) and is_input_preserving(m, pi_i) and
            is_input_preserving(m, pi_d)):
        raise DecompositionError("the dependent machine needs an orthogonal SP pair.")
    inputs = [pair_symbol(x, _block_bits(pi_i, b)) for x in m.inputs for b in range(len(pi_i))]
    transitions = {}
    for d_number, block_d in enumerate(pi_d.blocks):
        for i_number, block_i in enumerate(pi_i.blocks):
            try:
                state = chi(block_i, block_d)
            except IncompatibleBlocksError:
                continue
            for symbol in m.inputs:
                moved = m.step(state, symbol)
                if moved is not None:
                    transitions[(d_number, pair_symbol(symbol, _block_bits(pi_i, i_number)))] = (
                        pi_d.number_of(moved[0]), m.encode_state(state))
    outputs = [m.encode_state(state) for state in m.states]
    return Fsm(range(len(pi_d)), inputs, outputs, pi_d.number_of(m.reset), transitions,
               name="dependent")


def block_number(symbol: str) -> Optional[int]:
    """Block number carried by a pair symbol, ``None`` for other symbols."""
    if PAIR_SEPARATOR not in symbol:
        return None
    return utils.from_bits(split_pair_symbol(symbol)[1])
