"""Characteristic machine of a host: longest simple path, path sizing and LPR / LPR(k).
"""
import math
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import networkx as nx

from fsm_watermark import utils
from fsm_watermark.errors import HashCollisionError, ReduxError
from fsm_watermark.fsm import ConnGraph, Fsm

SEARCH_BUDGET = 200_000
"""Default number of path extensions tried by ``longest_simple_path``."""

MAX_HASH_WIDTH = 64


class Path:
    """Ordered vertex string with the ``v*`` used by renumbering.

    Parameters
    ----------
    vertices : Iterable[int]
        Vertex ids, at least one.
    base_max : int, optional
        Value ``v*`` of the period the path was renumbered with, by default 0 (unset).
    """

    def __init__(self, vertices: Iterable[int], base_max: int = 0) -> None:
        self._vertices: Tuple[int, ...] = tuple(vertices)
        if not self._vertices:
            raise ReduxError("a path holds at least one vertex.")
        self._base_max = base_max

    @property
    def vertices(self) -> Tuple[int, ...]:
        """Vertex ids in path order."""
        return self._vertices

    @property
    def base_max(self) -> int:
        """``v*`` used by renumbering, 0 when unset."""
        return self._base_max

    def is_simple(self) -> bool:
        """No vertex appears twice."""
        return len(set(self._vertices)) == len(self._vertices)

    def __len__(self) -> int:
        return len(self._vertices)

    def __iter__(self) -> Iterator[int]:
        return iter(self._vertices)

    def __getitem__(self, index: int) -> int:
        return self._vertices[index]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Path):
            return NotImplemented
        return self._vertices == other.vertices and self._base_max == other.base_max

    def __hash__(self) -> int:
        return hash((self._vertices, self._base_max))

    def __repr__(self) -> str:
        return f"Path({list(self._vertices)}, base_max={self._base_max})"


class LprkSpec:
    """Shape of an LPR(k): ``k`` branches of ``n`` rows renumbered by a hash family.

    Parameters
    ----------
    n : int
        Branch length (rows).
    k : int
        Branch count (columns).
    z : int, optional
        State bit-width of the hash, chosen automatically when ``None``.
    hash_kind : str, optional
        Renumbering family, only ``"add-shift"`` is known.

    Raises
    ------
    ValueError
        A field is out of range.
    """

    HASH_KINDS = ("add-shift",)

    def __init__(self, n: int, k: int, z: Optional[int] = None,
                 hash_kind: str = "add-shift") -> None:
        if n < 1:
            raise ValueError(f"'n' ({n}) must be >= 1.")
        if k < 1:
            raise ValueError(f"'k' ({k}) must be >= 1.")
        if z is not None and not 1 <= z <= MAX_HASH_WIDTH:
            raise ValueError(f"'z' ({z}) must be in [1;{MAX_HASH_WIDTH}].")
        if hash_kind not in self.HASH_KINDS:
            raise ValueError(f"unknown hash kind '{hash_kind}', expected one of "
                             f"{self.HASH_KINDS}.")
        self._n = n
        self._k = k
        self._z = z
        self._hash_kind = hash_kind

    @property
    def n(self) -> int:
        """Branch length."""
        return self._n

    @property
    def k(self) -> int:
        """Branch count."""
        return self._k

    @property
    def z(self) -> Optional[int]:
        """Hash bit-width, ``None`` for automatic."""
        return self._z

    @property
    def hash_kind(self) -> str:
        """Renumbering family."""
        return self._hash_kind

    @property
    def chi(self) -> int:
        """Bit-width of the branch-select input."""
        return utils.bit_width(self._k)


## longest simple path
def longest_simple_path(g: ConnGraph, budget: int = SEARCH_BUDGET) -> Path:
    """Longest simple path from the root, lexically largest among the longest.

    The search backtracks over simple paths and explores successors by descending id, so the
    first path that visits every reachable vertex is the answer. Past ``budget`` extensions
    the best path seen is returned.

    Parameters
    ----------
    g : ConnGraph
        Graph to search.
    budget : int, optional
        Maximal number of path extensions, by default ``SEARCH_BUDGET``.

    Returns
    -------
    Path
        Raw path, pairwise-distinct vertices.
    """
    reachable = len(nx.descendants(g.to_networkx(), g.root)) + 1
    successors = {v: tuple(reversed(g.successors(v))) for v in g.vertices}
    best: Tuple[int, ...] = (g.root,)
    path: List[int] = [g.root]
    on_path = {g.root}
    stack = [iter(successors[g.root])]
    extensions = 0
    while stack and len(best) < reachable:
        following = next((w for w in stack[-1] if w not in on_path), None)
        if following is None:
            stack.pop()
            on_path.discard(path.pop())
            continue
        if extensions >= budget:
            utils.debug(f"longest path search stopped after {budget} extensions, "
                        f"keeping a path of {len(best)} vertices.")
            break
        extensions += 1
        path.append(following)
        on_path.add(following)
        stack.append(iter(successors[following]))
        if (len(path), tuple(path)) > (len(best), best):
            best = tuple(path)
    return Path(best)


## path operators
def repeat_path(p: Path, j: int) -> Path:
    """Concatenate ``j`` copies of ``p``, ``v*`` set to the largest vertex of ``p``."""
    if j < 1:
        raise ReduxError(f"'j' ({j}) must be >= 1.")
    return Path(p.vertices * j, base_max=max(p.vertices))


def _period(p_rep: Path) -> Tuple[int, ...]:
    length = len(set(p_rep.vertices))
    period = p_rep.vertices[:length]
    if len(p_rep) % length or period * (len(p_rep) // length) != p_rep.vertices:
        raise ReduxError(f"{p_rep!r} is not a repetition of a simple path.")
    return period


def renumber(p_rep: Path, v_star: int) -> Path:
    """Give every vertex of a repeated path a distinct id.

    Row ``r`` (1-based) column ``c`` becomes ``radix * (r - 1) + idx(v_c)`` with
    ``idx`` the 1-based rank of ``v_c`` among the period values and
    ``radix = max(v*, period length)``.

    Raises
    ------
    ReduxError
        ``v_star`` is smaller than a vertex, or ``p_rep`` is not a repetition.
    """
    period = _period(p_rep)
    if v_star < max(period):
        raise ReduxError(f"'v_star' ({v_star}) is smaller than vertex {max(period)}.")
    rank = {v: i + 1 for i, v in enumerate(sorted(period))}
    radix = max(v_star, len(period))
    return Path((radix * (i // len(period)) + rank[v] for i, v in enumerate(p_rep.vertices)),
                base_max=v_star)


def renumber_inverse(q: Path, v_star: int, base: Path) -> Path:
    """Undo ``renumber`` given the period ``base`` it was computed from."""
    values = sorted(set(base.vertices))
    radix = max(v_star, len(values))
    vertices = []
    for w in q.vertices:
        column = (w - 1) % radix
        if w < 1 or column >= len(values):
            raise ReduxError(f"{w} is not produced by renumbering with v*={v_star}.")
        vertices.append(values[column])
    return Path(vertices, base_max=v_star)


def truncate(p: Path, j: int) -> Path:
    """First ``j`` vertices of ``p``, ``1 <= j <= |p|``."""
    if not 1 <= j <= len(p):
        raise ReduxError(f"'j' ({j}) must be in [1;{len(p)}].")
    return Path(p.vertices[:j], base_max=p.base_max)


def sized_path(p: Path, m: int) -> Path:
    """Repeat, renumber and truncate ``p`` to exactly ``m`` distinct vertices."""
    if m < 1:
        raise ReduxError(f"'m' ({m}) must be >= 1.")
    repeated = repeat_path(p, math.ceil(m / len(p)))
    return truncate(renumber(repeated, max(p.vertices)), m)


def lpr(g: ConnGraph, m: int) -> ConnGraph:
    """Longest path reduction: the sized longest simple path as a linear graph."""
    chain = sized_path(longest_simple_path(g), m).vertices
    utils.debug(f"LPR of length {m}: {list(chain)}")
    return ConnGraph(chain, zip(chain, chain[1:]), chain[0])


## LPR(k)
def add_shift_hash(x: int, r: int, c: int, z: int) -> int:
    """Rotate ``x`` left by ``c mod z`` within ``z`` bits, then add ``r`` modulo ``2**z``.

    Raises
    ------
    ReduxError
        ``x`` is outside ``[0, 2**z)`` or ``z < 1``.
    """
    if z < 1:
        raise ReduxError(f"'z' ({z}) must be >= 1.")
    if not 0 <= x < 1 << z:
        raise ReduxError(f"state id {x} does not fit in {z} bits.")
    mask = (1 << z) - 1
    shift = c % z
    rotated = ((x << shift) | (x >> (z - shift))) & mask
    return (rotated + r) & mask


def row_field_width(chain: Sequence[int]) -> int:
    """Bits ``w`` holding both the largest chain id and the largest row offset."""
    return max(max(chain), len(chain)).bit_length()


def _branch_ids(chain: Sequence[int], k: int, z: int) -> Dict[Tuple[int, int], int]:
    w = row_field_width(chain)
    return {(r, c): add_shift_hash(chain[r - 1], r, (c + 1) * w, z)
            for c in range(k) for r in range(1, len(chain) + 1)}


def _collisions(ids: Dict[Tuple[int, int], int]) -> List[Tuple[Tuple[int, int], Tuple[int, int]]]:
    seen: Dict[int, Tuple[int, int]] = {}
    clashes = []
    for cell, state in ids.items():
        if state in seen:
            clashes.append((seen[state], cell))
        seen.setdefault(state, cell)
    return clashes


def auto_hash_width(chain: Sequence[int], k: int) -> int:
    """Smallest ``z`` holding every chain id without branch-state collision.

    Column ``c`` is rotated by ``(c + 1) * w`` bits, so ``z = (k + 1) * w`` always separates the
    columns; narrower widths are tried first.

    Raises
    ------
    HashCollisionError
        No width up to 64 bits works.
    """
    z = max(1, max(chain).bit_length())
    while z <= MAX_HASH_WIDTH:
        if not _collisions(_branch_ids(chain, k, z)):
            return z
        z += 1
    raise HashCollisionError(f"no hash width up to {MAX_HASH_WIDTH} separates the "
                             f"{len(chain) * k} branch states.")


def lpr_k(g: ConnGraph, spec: LprkSpec) -> Fsm:
    """Join ``k`` renumbered copies of the length-``n`` LPR at a fresh start state.

    Row ``r`` of branch ``c`` is state ``h(q_r)`` where ``q`` is the LPR vertex string and ``h``
    the add-shift hash with offset ``r`` and rotation ``(c + 1) * w``, ``w`` being
    ``row_field_width(q)``; the start state is ``2**z``. From the start, code ``c`` on ``chi``
    bits enters branch ``c mod k``; inside a branch the tick (code 0) moves one row down.
    Outputs are the current state ids.

    Raises
    ------
    HashCollisionError
        Two branch states share an id for the requested ``z``.
    """
    chain = sized_path(longest_simple_path(g), spec.n).vertices
    z = spec.z if spec.z is not None else auto_hash_width(chain, spec.k)
    if max(chain) >= 1 << z:
        raise HashCollisionError(f"'z' ({z}) cannot hold LPR state {max(chain)}.")
    ids = _branch_ids(chain, spec.k, z)
    clashes = _collisions(ids)
    if clashes:
        (r1, c1), (r2, c2) = clashes[0]
        raise HashCollisionError(
            f"{len(clashes)} branch state collision(s) with z={z}, e.g. row {r1} column {c1} "
            f"and row {r2} column {c2} both map to {ids[(r1, c1)]}.")

    start = 1 << z
    state_width = start.bit_length()
    codes = [utils.to_bits(i, spec.chi) for i in range(1 << spec.chi)]
    tick = codes[0]
    transitions = {(start, code): (ids[(1, i % spec.k)], utils.to_bits(start, state_width))
                   for i, code in enumerate(codes)}
    for (r, c), state in ids.items():
        if r < spec.n:
            transitions[(state, tick)] = (ids[(r + 1, c)], utils.to_bits(state, state_width))
    states = sorted(set(ids.values()) | {start})
    utils.debug(f"LPR({spec.k}) with n={spec.n}, z={z}: {len(states)} states")
    return Fsm(states, codes, [utils.to_bits(s, state_width) for s in states], start,
               transitions, name=f"lpr{spec.k}")


def branch_schedule(m: Fsm, branch: int, length: int) -> List[str]:
    """Inputs driving branch ``branch``: its select code followed by ticks.

    Raises
    ------
    ValueError
        ``branch`` is not an input index or ``length`` is negative.
    """
    if not 0 <= branch < len(m.inputs):
        raise ValueError(f"branch {branch} is out of range [0;{len(m.inputs) - 1}].")
    if length < 0:
        raise ValueError(f"'length' ({length}) must be >= 0.")
    return ([m.inputs[branch]] + [m.tick] * (length - 1))[:length]
