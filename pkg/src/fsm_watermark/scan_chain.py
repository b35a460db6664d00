"""Serial access to the watermark machine through a three-state test access port.

The TAP cycles Latch -> Shift -> Assert on TMS=1 and stays put on TMS=0. A frame of the
boundary scan register is the output field (state of the machine behind the TAP) followed by
the input field (its input lines). Frames are permuted on latch and un-permuted on assert by a
per-session setting, broadcast unpermuted at the start of the session. Bits leave MSB first on
TDO and enter LSB first from TDI.
"""
import enum
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from fsm_watermark import redux, utils
from fsm_watermark.errors import TranscriptError
from fsm_watermark.fsm import Fsm


class TapState(enum.Enum):
    """States of the simplified TAP controller."""
    LATCH = "Latch"
    SHIFT = "Shift"
    ASSERT = "Assert"

    @property
    def following(self) -> 'TapState':
        """State entered on TMS=1."""
        return {TapState.LATCH: TapState.SHIFT,
                TapState.SHIFT: TapState.ASSERT,
                TapState.ASSERT: TapState.LATCH}[self]


## permutations
def _check_index(n: int, i: int):
    if n < 1:
        raise ValueError(f"'n' ({n}) must be >= 1.")
    if not 1 <= i <= math.factorial(n):
        raise ValueError(f"permutation index {i} is out of range [1;{n}!].")


def lehmer_digits(n: int, i: int) -> Tuple[int, ...]:
    """Factorial-number-system digits of ``i - 1``, most significant first."""
    _check_index(n, i)
    rank = i - 1
    digits = []
    for position in range(n):
        digit, rank = divmod(rank, math.factorial(n - 1 - position))
        digits.append(digit)
    return tuple(digits)


def index_of_digits(digits: Sequence[int]) -> int:
    """Inverse of ``lehmer_digits``."""
    n = len(digits)
    rank = 0
    for position, digit in enumerate(digits):
        if not 0 <= digit < n - position:
            raise ValueError(f"Lehmer digit {digit} at position {position} is out of range.")
        rank += digit * math.factorial(n - 1 - position)
    return rank + 1


def permutation_by_index(n: int, i: int) -> Tuple[int, ...]:
    """``i``-th permutation of ``0..n-1`` in lexicographic order, ``i = 1`` is the identity."""
    pool = list(range(n))
    return tuple(pool.pop(digit) for digit in lehmer_digits(n, i))


def apply_perm(bits: str, i: int) -> str:
    """Permute a frame: position ``k`` receives bit ``p[k]``."""
    permutation = permutation_by_index(len(bits), i)
    return "".join(bits[source] for source in permutation)


def invert_perm(bits: str, i: int) -> str:
    """Inverse of ``apply_perm``."""
    permutation = permutation_by_index(len(bits), i)
    restored = [""] * len(bits)
    for position, source in enumerate(permutation):
        restored[source] = bits[position]
    return "".join(restored)


def draw_setting(rng: np.random.Generator, n: int) -> int:
    """Uniform setting in ``[1, n!]`` drawn digit by digit."""
    return index_of_digits([int(rng.integers(0, n - position)) for position in range(n)])


def preamble_width(n_b: int) -> int:
    """Bits needed to broadcast a setting of an ``n_b``-bit frame."""
    return (math.factorial(n_b) - 1).bit_length()


class PermutationScheme:
    """Secret scramble composed with the per-session setting permutation.

    Parameters
    ----------
    scramble : Sequence[int]
        Permutation of the frame positions.
    """

    IDENTITY_ID = "identity"
    SCRAMBLED_ID = "scrambled-lehmer"

    def __init__(self, scramble: Sequence[int]) -> None:
        self._scramble = tuple(int(i) for i in scramble)
        if sorted(self._scramble) != list(range(len(self._scramble))) or not self._scramble:
            raise ValueError(f"{list(self._scramble)} is not a permutation of frame positions.")

    @classmethod
    def identity(cls, width: int) -> 'PermutationScheme':
        """Scheme reduced to plain ``apply_perm``."""
        return cls(range(width))

    @classmethod
    def random(cls, width: int, seed: int) -> 'PermutationScheme':
        """Seeded scramble."""
        return cls(np.random.default_rng(seed).permutation(width))

    @property
    def width(self) -> int:
        """Frame width ``n_b``."""
        return len(self._scramble)

    @property
    def scramble(self) -> Tuple[int, ...]:
        """Scramble permutation."""
        return self._scramble

    @property
    def scheme_id(self) -> str:
        """Public name of the scheme family."""
        if self._scramble == tuple(range(self.width)):
            return self.IDENTITY_ID
        return self.SCRAMBLED_ID

    def permutation(self, setting: int) -> Tuple[int, ...]:
        """Effective permutation of a setting."""
        return tuple(self._scramble[source]
                     for source in permutation_by_index(self.width, setting))

    def apply(self, bits: str, setting: int) -> str:
        """Permute a frame for ``setting``."""
        self._check_width(bits)
        return "".join(bits[source] for source in self.permutation(setting))

    def invert(self, bits: str, setting: int) -> str:
        """Inverse of ``apply``."""
        self._check_width(bits)
        restored = [""] * self.width
        for position, source in enumerate(self.permutation(setting)):
            restored[source] = bits[position]
        return "".join(restored)

    def _check_width(self, bits: str):
        if len(bits) != self.width:
            raise ValueError(f"frame of {len(bits)} bits, the scheme permutes {self.width}.")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PermutationScheme):
            return NotImplemented
        return self._scramble == other.scramble

    def __hash__(self) -> int:
        return hash(self._scramble)


## transcripts
@dataclass(frozen=True)
class CycleRecord:
    """One TCK cycle: pins and the TAP state acting during the cycle."""
    index: int
    tms: int
    tdi: int
    tdo: int
    state: TapState


class Transcript:
    """Append-only list of cycle records of one session.

    Parameters
    ----------
    n_b : int
        Frame width.
    chi : int
        Input field width.
    omega : int
        Output field width.
    seed : int
        Seed of the session's setting.
    """

    def __init__(self, n_b: int, chi: int, omega: int, seed: int) -> None:
        if n_b != chi + omega:
            raise ValueError(f"frame width {n_b} is not {chi} + {omega}.")
        self._n_b = n_b
        self._chi = chi
        self._omega = omega
        self._seed = seed
        self._records: List[CycleRecord] = []

    @property
    def n_b(self) -> int:
        """Frame width."""
        return self._n_b

    @property
    def chi(self) -> int:
        """Input field width."""
        return self._chi

    @property
    def omega(self) -> int:
        """Output field width."""
        return self._omega

    @property
    def seed(self) -> int:
        """Seed of the session's setting."""
        return self._seed

    @property
    def records(self) -> Tuple[CycleRecord, ...]:
        """Cycle records, indexed from 0."""
        return tuple(self._records)

    def append(self, record: CycleRecord):
        """Add the next cycle.

        Raises
        ------
        TranscriptError
            The record index does not follow the last one.
        """
        if record.index != len(self._records):
            raise TranscriptError(f"cycle {record.index} does not follow cycle "
                                  f"{len(self._records) - 1}.")
        self._records.append(record)

    def __len__(self) -> int:
        return len(self._records)


## TAP
class TapSession:
    """Single-owner TAP wrapped around one machine instance.

    Parameters
    ----------
    machine : Fsm
        Machine behind the TAP, frozen between asserts.
    scheme : PermutationScheme
        Permutation scheme built into the TAP.
    seed : int
        Seed of the session's setting generator.
    setting : int, optional
        Setting forced instead of the drawn one.

    Raises
    ------
    ValueError
        The scheme width is not ``chi + omega`` or ``setting`` is out of range.
    """

    def __init__(self, machine: Fsm, scheme: PermutationScheme, seed: int,
                 setting: Optional[int] = None) -> None:
        self._machine = machine
        self._chi = machine.input_width
        self._omega = machine.state_width
        n_b = self._chi + self._omega
        if scheme.width != n_b:
            raise ValueError(f"scheme permutes {scheme.width} bits, the frame has {n_b}.")
        self._scheme = scheme
        if setting is None:
            setting = draw_setting(np.random.default_rng(seed), n_b)
        _check_index(n_b, setting)
        self._setting = setting
        self._preamble = utils.to_bits(self._setting - 1, preamble_width(n_b))
        self._tap_state = TapState.SHIFT if self._preamble else TapState.ASSERT
        self._machine_state = machine.reset
        self._lines = utils.to_bits(0, self._chi)
        self._bsr = utils.to_bits(0, n_b)
        self._armed = False
        self._clocks = 0
        self._transcript = Transcript(n_b, self._chi, self._omega, seed)

    @property
    def setting(self) -> int:
        """Setting drawn for the session."""
        return self._setting

    @property
    def n_b(self) -> int:
        """Frame width."""
        return self._chi + self._omega

    @property
    def tap_state(self) -> TapState:
        """Current TAP state."""
        return self._tap_state

    @property
    def machine_state(self) -> int:
        """Current state of the machine behind the TAP."""
        return self._machine_state

    @property
    def clocks(self) -> int:
        """Number of times the machine was clocked."""
        return self._clocks

    @property
    def transcript(self) -> Transcript:
        """Cycles recorded so far."""
        return self._transcript

    def tap_step(self, tms: int, tdi: int) -> int:
        """One TCK cycle.

        Parameters
        ----------
        tms : int
            Test mode select, 1 advances the TAP.
        tdi : int
            Bit shifted into the register while in Shift.

        Returns
        -------
        int
            TDO bit, 0 outside Shift.
        """
        acting = self._tap_state
        tdo = 0
        if acting is TapState.SHIFT:
            if self._preamble:
                tdo, self._preamble = int(self._preamble[0]), self._preamble[1:]
            else:
                tdo = int(self._bsr[0])
                self._bsr = self._bsr[1:] + str(tdi & 1)
        if tms & 1:
            self._tap_state = acting.following
            if self._tap_state is TapState.LATCH:
                self._latch()
            elif self._tap_state is TapState.ASSERT:
                self._assert()
        self._transcript.append(CycleRecord(len(self._transcript), tms & 1, tdi & 1, tdo,
                                            acting))
        return tdo

    def _latch(self):
        frame = utils.to_bits(self._machine_state, self._omega) + self._lines
        self._bsr = self._scheme.apply(frame, self._setting)
        self._armed = True

    def _assert(self):
        if not self._armed:
            return
        self._armed = False
        self._lines = self._scheme.invert(self._bsr, self._setting)[self._omega:]
        symbol = self._machine.decode_input(self._lines)
        moved = None if symbol is None else self._machine.step(self._machine_state, symbol)
        self._clocks += 1
        if moved is not None:
            self._machine_state = moved[0]


## drivers
def parallel_payload(machine: Fsm, symbols: Sequence[str]) -> List[Tuple[str, int]]:
    """Frames a parallel tester latching the pins would see: ``(input bits, state)``.

    The first frame is the reset state with idle lines; a halted machine stays frozen.
    """
    state = machine.reset
    lines = utils.to_bits(0, machine.input_width)
    frames = [(lines, state)]
    for symbol in symbols:
        lines = machine.encode_input(symbol)
        moved = machine.step(state, symbol)
        if moved is not None:
            state = moved[0]
        frames.append((lines, state))
    return frames


def drive_session(session: TapSession, machine: Fsm, scheme: PermutationScheme,
                  symbols: Sequence[str]) -> Transcript:
    """Play the preamble then one latch/shift/assert step per symbol plus a draining step."""
    width = preamble_width(session.n_b)
    preamble = "".join(str(session.tap_step(int(i == width - 1), 0)) for i in range(width))
    setting = utils.from_bits(preamble) + 1
    omega = machine.state_width
    for symbol in list(symbols) + [None]:
        lines = machine.encode_input(symbol) if symbol is not None else \
            utils.to_bits(0, machine.input_width)
        frame = scheme.apply(utils.to_bits(0, omega) + lines, setting)
        session.tap_step(1, 0)
        session.tap_step(1, 0)
        for position, bit in enumerate(frame):
            session.tap_step(int(position == len(frame) - 1), int(bit))
    return session.transcript


def decode_transcript(transcript: Transcript,
                      scheme: PermutationScheme) -> Tuple[int, List[Tuple[str, int]]]:
    """Recover the setting and the latched ``(input bits, state)`` frames.

    Raises
    ------
    TranscriptError
        The shifted bits do not split into a preamble and whole frames.
    """
    shifted = "".join(str(record.tdo) for record in transcript.records
                      if record.state is TapState.SHIFT)
    width = preamble_width(transcript.n_b)
    if len(shifted) < width or (len(shifted) - width) % transcript.n_b:
        raise TranscriptError(f"{len(shifted)} shifted bits do not hold a {width}-bit "
                              f"preamble and whole {transcript.n_b}-bit frames.")
    setting = utils.from_bits(shifted[:width]) + 1
    frames = []
    for start in range(width, len(shifted), transcript.n_b):
        frame = scheme.invert(shifted[start:start + transcript.n_b], setting)
        frames.append((frame[transcript.omega:], utils.from_bits(frame[:transcript.omega])))
    return setting, frames


def scan_watermark_test(package, branch: int, seed: int,
                        scheme: Optional[PermutationScheme] = None,
                        length: Optional[int] = None) -> Transcript:
    """Run a watermark test of one branch serially through the package's TAP.

    Parameters
    ----------
    package : bundle.Package
        Package holding the watermark machine and its TAP configuration.
    branch : int
        Start input code of the branch.
    seed : int
        Seed of the session's setting.
    scheme : PermutationScheme, optional
        Scheme built into the TAP, required unless the package declares the identity scheme.
    length : int, optional
        Number of inputs, by default the package's test length.

    Raises
    ------
    BundleError
        The package TAP configuration does not match its machine or the scheme is missing.
    """
    package.check_tap()
    machine = package.watermark
    if scheme is None:
        scheme = package.default_scheme()
    length = package.test_length if length is None else length
    session = TapSession(machine, scheme, seed)
    utils.debug(f"scan session: n_b={session.n_b}, setting={session.setting}")
    return drive_session(session, machine, scheme, redux.branch_schedule(machine, branch, length))
