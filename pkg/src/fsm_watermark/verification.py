"""Watermark verification protocol and the machine comparisons it relies on.

A watermark test drives the shipped machine on one branch schedule, feeds its emissions to the
secret decoder and compares the result with the REDUX run on the same schedule.
"""
from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from fsm_watermark import redux, scan_chain, utils
from fsm_watermark.errors import AlphabetMismatchError
from fsm_watermark.fsm import Fsm, run


@dataclass(frozen=True)
class Verdict:
    """Outcome of one watermark test.

    ``divergence`` is the first index where the sequences differ (``None`` on pass); a sequence
    that is a strict prefix of the other diverges at its length.
    """
    passed: bool
    divergence: Optional[int]
    expected: Tuple[str, ...]
    observed: Tuple[str, ...]

    @classmethod
    def compare(cls, expected: Sequence[str], observed: Sequence[str]) -> 'Verdict':
        """Verdict of two output sequences."""
        expected, observed = tuple(expected), tuple(observed)
        if expected == observed:
            return cls(True, None, expected, observed)
        divergence = next((i for i, (a, b) in enumerate(zip(expected, observed)) if a != b),
                          min(len(expected), len(observed)))
        return cls(False, divergence, expected, observed)

    def report(self) -> str:
        """Text report: verdict, divergence index and both sequences."""
        return "\n".join([
            f"verdict: {'pass' if self.passed else 'fail'}",
            f"divergence: {'-' if self.divergence is None else self.divergence}",
            f"expected: {' '.join(self.expected)}",
            f"observed: {' '.join(self.observed)}",
        ]) + "\n"


def _check_alphabets(watermark: Fsm, secret):
    if tuple(watermark.inputs) != tuple(secret.redux.inputs):
        raise AlphabetMismatchError(
            f"package machine reads {len(watermark.inputs)} symbols, the secret REDUX "
            f"{len(secret.redux.inputs)}: wrong secret for this package.")
    missing = set(watermark.outputs) - set(secret.decoder.inputs)
    if missing:
        raise AlphabetMismatchError(
            f"decoder does not accept {len(missing)} output(s) of the package machine, e.g. "
            f"'{sorted(missing)[0]}': wrong secret for this package.")


def _scanned_outputs(package, secret, branch: int, length: int, seed: int) -> List[str]:
    machine = package.watermark
    transcript = scan_chain.scan_watermark_test(package, branch, seed, scheme=secret.scheme,
                                                length=length)
    _, frames = scan_chain.decode_transcript(transcript, secret.scheme)
    outputs = []
    for (_, state), (lines, _) in zip(frames, frames[1:length + 1]):
        symbol = machine.decode_input(lines)
        moved = None if symbol is None else machine.step(state, symbol)
        if moved is None:
            break
        outputs.append(moved[1])
    return outputs


def watermark_test(package, secret, branch: int, length: Optional[int] = None,
                   scan_seed: Optional[int] = None) -> Verdict:
    """Run the verification protocol on one branch.

    Parameters
    ----------
    package : bundle.Package
        Shipped artifact holding the watermark machine.
    secret : bundle.Secret
        Verifier material: REDUX, decoder and permutation scheme.
    branch : int
        Start input code, ``0 <= branch < 2**chi``.
    length : int, optional
        Number of inputs, by default ``n + 1``.
    scan_seed : int, optional
        When given, the watermark machine is read serially through its TAP with this setting
        seed, otherwise its pins are read in parallel.

    Returns
    -------
    Verdict
        Comparison of the decoded emissions with the REDUX outputs.

    Raises
    ------
    ValueError
        ``branch`` is out of range.
    AlphabetMismatchError
        The secret does not belong to the package.
    """
    length = secret.n + 1 if length is None else length
    schedule = redux.branch_schedule(secret.redux, branch, length)
    _check_alphabets(package.watermark, secret)
    expected = run(secret.redux, schedule).outputs
    if scan_seed is None:
        emitted = run(package.watermark, schedule).outputs
    else:
        emitted = _scanned_outputs(package, secret, branch, length, scan_seed)
    observed = run(secret.decoder, emitted).outputs
    verdict = Verdict.compare(expected, observed)
    utils.debug(f"branch {branch}: {'pass' if verdict.passed else 'fail'}")
    return verdict


def verify_all_branches(package, secret, length: Optional[int] = None,
                        scan_seed: Optional[int] = None) -> Dict[int, Verdict]:
    """Verdict of every start input code."""
    return {branch: watermark_test(package, secret, branch, length, scan_seed)
            for branch in range(len(secret.redux.inputs))}


def verify_foreign(package, secret, length: Optional[int] = None) -> bool:
    """Counterfeit check: ``True`` when ``package`` does not carry the watermark of ``secret``.

    A claim that a foreign artifact is ours is denied exactly when some branch fails or the
    secret cannot even be applied to it.
    """
    try:
        verdicts = verify_all_branches(package, secret, length)
    except AlphabetMismatchError:
        return True
    return not all(verdict.passed for verdict in verdicts.values())


## machine comparisons
def _same_inputs(m1: Fsm, m2: Fsm):
    if set(m1.inputs) != set(m2.inputs):
        raise AlphabetMismatchError("machines compared on different input alphabets.")


def _split(m1: Fsm, m2: Fsm, pair: Tuple[int, int], symbol: str):
    """Next pair, ``None`` when both halt, ``False`` when the machines disagree."""
    a, b = m1.step(pair[0], symbol), m2.step(pair[1], symbol)
    if a is None and b is None:
        return None
    if a is None or b is None or a[1] != b[1]:
        return False
    return a[0], b[0]


def bounded_equiv(m1: Fsm, m2: Fsm, depth: int) -> bool:
    """Same output strings for every input string of length at most ``depth`` from reset.

    Raises
    ------
    AlphabetMismatchError
        The machines do not share their input alphabet.
    """
    _same_inputs(m1, m2)
    frontier = {(m1.reset, m2.reset)}
    for _ in range(depth):
        following = set()
        for pair in frontier:
            for symbol in m1.inputs:
                moved = _split(m1, m2, pair, symbol)
                if moved is False:
                    return False
                if moved is not None:
                    following.add(moved)
        frontier = following
    return True


def equivalent(m1: Fsm, m2: Fsm) -> bool:
    """Same output strings for every input string, checked on the reachable product."""
    _same_inputs(m1, m2)
    start = (m1.reset, m2.reset)
    seen = {start}
    queue = deque([start])
    while queue:
        pair = queue.popleft()
        for symbol in m1.inputs:
            moved = _split(m1, m2, pair, symbol)
            if moved is False:
                return False
            if moved is not None and moved not in seen:
                seen.add(moved)
                queue.append(moved)
    return True


## negative controls
def random_like(m: Fsm, seed: int) -> Fsm:
    """Machine with the interface of ``m``: same states, alphabets, reset and defined pairs,
    uniform random targets and outputs."""
    rng = np.random.default_rng(seed)
    transitions = {key: (m.states[int(rng.integers(m.n_states))],
                         m.outputs[int(rng.integers(len(m.outputs)))])
                   for key in sorted(m.table)}
    return Fsm(m.states, m.inputs, m.outputs, m.reset, transitions, name=f"random-{seed}")


def single_edge_tamperings(m: Fsm) -> Iterator[Tuple[int, str, int, Fsm]]:
    """Every machine obtained by redirecting one transition to another state.

    Yields
    ------
    Tuple[int, str, int, Fsm]
        Source state, input, new target and the tampered machine.
    """
    for (state, symbol), target in sorted(m.transitions.items()):
        for other in m.states:
            if other != target:
                yield state, symbol, other, m.replace_transition(state, symbol, other)


def failed_branches(verdicts: Dict[int, Verdict]) -> List[int]:
    """Branches whose verdict failed."""
    return [branch for branch, verdict in verdicts.items() if not verdict.passed]

