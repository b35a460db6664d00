"""Attacker's side: black-box oracles, the informed reconstruction of a fixed-decomposition
independent machine, witnesses that output counts cannot be identified from finite
observation, and a heuristic output-count estimator.
"""
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from fsm_watermark import utils
from fsm_watermark.decomposition import (LATTICE_CAP, Partition, PartitionPair, block_number,
                                         build_dependent, enumerate_sp_partitions, is_orthogonal)
from fsm_watermark.errors import TranscriptError, UnsupportedOracleError
from fsm_watermark.fsm import Fsm

DEFAULT_MAX_STEPS = 4096
"""Longest walk followed along one branch by ``informed_attack``."""


@dataclass(frozen=True)
class OracleBudget:
    """Probe budget of a black-box experiment.

    Raises
    ------
    ValueError
        A field is not positive.
    """
    max_probes: int = 256
    max_steps: int = 64
    patience: int = 64

    def __post_init__(self):
        for field in ("max_probes", "max_steps", "patience"):
            if getattr(self, field) < 1:
                raise ValueError(f"'{field}' ({getattr(self, field)}) must be >= 1.")


class MachineOracle:
    """Black box around a machine: only its input alphabet, reset and steps are visible.

    Parameters
    ----------
    machine : Fsm
        Machine hidden behind the oracle.
    resettable : bool, optional
        Whether ``reset`` is available, by default True.
    """

    def __init__(self, machine: Fsm, resettable: bool = True) -> None:
        self._machine = machine
        self._resettable = resettable
        self._state: Optional[int] = machine.reset
        self._probes = 0
        self._steps = 0

    @property
    def inputs(self) -> Tuple[str, ...]:
        """Input alphabet."""
        return self._machine.inputs

    @property
    def resettable(self) -> bool:
        """Whether the oracle can be reset."""
        return self._resettable

    @property
    def probes(self) -> int:
        """Number of resets so far."""
        return self._probes

    @property
    def steps(self) -> int:
        """Number of steps so far."""
        return self._steps

    def reset(self):
        """Back to the reset state, one probe spent.

        Raises
        ------
        UnsupportedOracleError
            The oracle is not resettable.
        """
        if not self._resettable:
            raise UnsupportedOracleError("the oracle cannot be reset.")
        self._probes += 1
        self._state = self._machine.reset

    def step(self, symbol: str) -> Optional[str]:
        """Output of one step, ``None`` once the machine has halted."""
        self._steps += 1
        if self._state is None:
            return None
        moved = self._machine.step(self._state, symbol)
        if moved is None:
            self._state = None
            return None
        self._state, output = moved
        return output


def observed_state(symbol: str) -> int:
    """State id read off an output: block of a pair symbol, value of a state encoding."""
    number = block_number(symbol)
    return utils.from_bits(symbol) if number is None else number


## informed attack
def informed_attack(oracle: MachineOracle, chi: int,
                    max_steps: int = DEFAULT_MAX_STEPS) -> Fsm:
    """Rebuild the machine behind ``oracle`` knowing its form.

    Every one of the ``2**chi`` start codes is probed from reset, then the branch is followed
    with ticks. The current state is read off each output; a step that halts leaves the state
    reached before it as a fresh terminal state.

    Parameters
    ----------
    oracle : MachineOracle
        Resettable oracle over an independent machine of an LPR(k).
    chi : int
        Input bit-width.
    max_steps : int, optional
        Longest walk followed along one branch, by default ``DEFAULT_MAX_STEPS``.

    Returns
    -------
    Fsm
        Reconstructed machine, ``2**chi`` probes spent.

    Raises
    ------
    UnsupportedOracleError
        The oracle is not resettable.
    """
    if not oracle.resettable:
        raise UnsupportedOracleError("the informed attack resets the oracle once per code.")
    codes = [utils.to_bits(i, chi) for i in range(1 << chi)]
    tick = codes[0]
    table: Dict[Tuple[int, str], Tuple[Optional[int], str]] = {}
    start = None
    for code in codes:
        oracle.reset()
        output = oracle.step(code)
        if output is None:
            continue
        start = observed_state(output)
        current, symbol = start, code
        for _ in range(max_steps):
            following = oracle.step(tick)
            reached = None if following is None else observed_state(following)
            table[(current, symbol)] = (reached, output)
            if following is None or (reached, tick) in table:
                break
            current, symbol, output = reached, tick, following
    if start is None:
        return Fsm([0], codes, [], 0, {}, name="informed")

    known = {state for state, _ in table} | {t for t, _ in table.values() if t is not None}
    fresh = max(known) + 1
    transitions = {}
    for key, (target, output) in sorted(table.items(), key=lambda item: item[0]):
        if target is None:
            target, fresh = fresh, fresh + 1
            known.add(target)
        transitions[key] = (target, output)
    utils.info(f"informed attack: {len(known)} states after {oracle.probes} probes")
    return Fsm(known, codes, sorted({o for _, o in transitions.values()}), start, transitions,
               name="informed")


## output count
def _fresh_output(outputs: Sequence[str]) -> str:
    width = max((len(o) for o in outputs if utils.is_bit_string(o)), default=1)
    used = set(outputs)
    for value in range(1 << width):
        if utils.to_bits(value, width) not in used:
            return utils.to_bits(value, width)
    return utils.to_bits(1 << width, width + 1)


def adversarial_extension(transcript: Iterable[Sequence[Tuple[str, str]]],
                          j: Optional[int] = None,
                          inputs: Sequence[str] = ("0",)) -> Fsm:
    """Machine replaying every observed run and holding exactly one more output.

    The runs are folded into a prefix tree; from the end of the longest run one more step on
    the first input emits an output never observed.

    Parameters
    ----------
    transcript : Iterable[Sequence[Tuple[str, str]]]
        Runs from reset, each a sequence of ``(input, output)`` pairs.
    j : int, optional
        Number of distinct outputs observed, checked when given.
    inputs : Sequence[str], optional
        Input alphabet known besides the observed symbols, by default ``("0",)``.

    Raises
    ------
    TranscriptError
        Two runs share a prefix and input but disagree on the output, or ``j`` is wrong.
    """
    transitions: Dict[Tuple[int, str], Tuple[int, str]] = {}
    alphabet: List[str] = list(inputs)
    outputs: List[str] = []
    depth = {0: 0}
    for index, observed_run in enumerate(transcript):
        node = 0
        for symbol, output in observed_run:
            if symbol not in alphabet:
                alphabet.append(symbol)
            if output not in outputs:
                outputs.append(output)
            if (node, symbol) in transitions:
                child, known = transitions[(node, symbol)]
                if known != output:
                    raise TranscriptError(f"run {index} emits '{output}' where another run "
                                          f"emitted '{known}' after the same inputs.")
            else:
                child = len(depth)
                depth[child] = depth[node] + 1
                transitions[(node, symbol)] = (child, output)
            node = child
    if j is not None and j != len(outputs):
        raise TranscriptError(f"'j' ({j}) does not match the {len(outputs)} observed outputs.")
    if not alphabet:
        raise ValueError("an input alphabet is required.")

    leaves = [node for node in depth if not any(source == node for source, _ in transitions)]
    horizon = max(leaves, key=lambda node: (depth[node], -node))
    fresh = _fresh_output(outputs)
    transitions[(horizon, alphabet[0])] = (horizon, fresh)
    utils.debug(f"adversarial extension: {len(depth)} states, fresh output '{fresh}' after "
                f"{depth[horizon]} steps")
    return Fsm(depth, alphabet, outputs + [fresh], 0, transitions, name="extension")


@dataclass(frozen=True)
class OutputCountEstimate:
    """Distinct outputs seen by random probing, a lower bound without guarantee."""
    count: int
    probes: int
    steps: int
    note: str = "heuristic lower bound: no finite probing certifies the output count"


def estimate_output_count(oracle: MachineOracle, budget: OracleBudget, seed: int,
                          projection: Optional[Callable[[str], object]] = None
                          ) -> OutputCountEstimate:
    """Count distinct outputs by random walks from reset.

    A probe resets the oracle and feeds uniform random inputs until it halts or
    ``budget.max_steps`` inputs are spent. Probing stops after ``budget.max_probes`` probes or
    ``budget.patience`` consecutive probes without a new output.

    Parameters
    ----------
    oracle : MachineOracle
        Resettable black box.
    budget : OracleBudget
        Stopping rule.
    seed : int
        Seed of the input generator.
    projection : Callable[[str], object], optional
        Applied to each output before counting, identity by default.
    """
    rng = np.random.default_rng(seed)
    project = projection or (lambda output: output)
    inputs = oracle.inputs
    seen = set()
    stale = probes = steps = 0
    while probes < budget.max_probes and stale < budget.patience:
        oracle.reset()
        probes += 1
        before = len(seen)
        for _ in range(budget.max_steps):
            output = oracle.step(inputs[int(rng.integers(len(inputs)))])
            steps += 1
            if output is None:
                break
            seen.add(project(output))
        stale = 0 if len(seen) > before else stale + 1
    utils.debug(f"output count estimate: {len(seen)} after {probes} probes")
    return OutputCountEstimate(len(seen), probes, steps)


## dependent machine
def candidate_dependent_machines(m: Fsm, pi_i: Partition,
                                 cap: int = LATTICE_CAP) -> List[Tuple[PartitionPair, Fsm]]:
    """Every dependent machine completing the independent machine of ``pi_i`` on ``m``.

    Each SP partition orthogonal to ``pi_i`` gives a dependent machine whose cascade with the
    independent machine reproduces ``m``; the partner cannot be read off the independent
    machine.

    Raises
    ------
    LatticeCapError
        ``m`` is above ``cap``.
    """
    pairs = [PartitionPair(pi_i, pi_d) for pi_d in enumerate_sp_partitions(m, cap)
             if is_orthogonal(pi_i, pi_d)]
    return [(pair, build_dependent(m, pair)) for pair in pairs]
