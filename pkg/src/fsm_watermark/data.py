"""Module to load, parse and write the text formats of the toolkit (JSON interchange and KISS2
machines, key files, partition files and scan transcripts).
"""
import itertools
import json
from pathlib import Path
from typing import Any, Dict, List, Tuple

from fsm_watermark.decomposition import Partition, PartitionPair
from fsm_watermark.errors import FsmSemanticError, FsmSyntaxError, TranscriptError
from fsm_watermark.fsm import Fsm
from fsm_watermark.matrix_crypt import PermKey
from fsm_watermark.scan_chain import CycleRecord, TapState, Transcript

KISS2_SUFFIX = ".kiss2"
PI_I_SUFFIX = ".pi_i"
PI_D_SUFFIX = ".pi_d"


## JSON interchange
def fsm_to_dict(m: Fsm) -> Dict[str, Any]:
    """Interchange document of a machine, transitions sorted by state then input index."""
    order = {symbol: index for index, symbol in enumerate(m.inputs)}
    rows = sorted(m.table.items(), key=lambda item: (item[0][0], order[item[0][1]]))
    return {
        "name": m.name,
        "states": list(m.states),
        "inputs": list(m.inputs),
        "outputs": list(m.outputs),
        "reset": m.reset,
        "transitions": [{"from": s, "in": x, "to": t, "out": o} for (s, x), (t, o) in rows],
    }


def dict_to_fsm(dico: Dict[str, Any]) -> Fsm:
    """Build a machine from an interchange document already decoded from JSON.

    Raises
    ------
    FsmSemanticError
        A field is missing, badly typed, or a ``(state, input)`` pair is defined twice.
    """
    if not isinstance(dico, dict):
        raise FsmSemanticError("an FSM document is a JSON object.")
    for field in ("states", "inputs", "outputs", "reset", "transitions"):
        if field not in dico:
            raise FsmSemanticError(f"missing field '{field}'.")
    for field in ("states", "inputs", "outputs", "transitions"):
        if not isinstance(dico[field], list):
            raise FsmSemanticError(f"field '{field}' must be a list.")
    transitions: Dict[Tuple[int, str], Tuple[int, str]] = {}
    for index, row in enumerate(dico["transitions"]):
        if not isinstance(row, dict) or set(row) != {"from", "in", "to", "out"}:
            raise FsmSemanticError(f"transition {index} must hold exactly 'from', 'in', 'to' "
                                   f"and 'out'.")
        key = (row["from"], row["in"])
        if key in transitions:
            raise FsmSemanticError(f"duplicate transition {index} from state {row['from']} on "
                                   f"'{row['in']}'.")
        if row["from"] not in dico["states"]:
            raise FsmSemanticError(f"unknown state {row['from']} referenced by transition "
                                   f"{index}")
        if row["to"] not in dico["states"]:
            raise FsmSemanticError(f"unknown state {row['to']} referenced by transition {index}")
        transitions[key] = (row["to"], row["out"])
    return Fsm(dico["states"], dico["inputs"], dico["outputs"], dico["reset"], transitions,
               name=dico.get("name", ""))


def parse_fsm(doc: str) -> Fsm:
    """Parse an interchange document.

    Raises
    ------
    FsmSyntaxError
        The text is not JSON, the error carries its line and column.
    FsmSemanticError
        The document does not describe a valid machine.
    """
    try:
        dico = json.loads(doc)
    except json.JSONDecodeError as error:
        raise FsmSyntaxError(error.msg, error.lineno, error.colno) from error
    return dict_to_fsm(dico)


def fsm_to_json(m: Fsm) -> str:
    """Deterministic interchange text of a machine."""
    return json.dumps(fsm_to_dict(m), indent=2) + "\n"


## KISS2
def _kiss2_header(tokens: List[str], line_no: int) -> int:
    if len(tokens) != 2 or not tokens[1].isdigit():
        raise FsmSyntaxError(f"header '{tokens[0]}' expects one integer", line_no, 1)
    return int(tokens[1])


def _expand(cube: str) -> List[str]:
    choices = [("0", "1") if bit == "-" else (bit,) for bit in cube]
    return ["".join(bits) for bits in itertools.product(*choices)]


def parse_kiss2(text: str, name: str = "") -> Fsm:  # pylint: disable=too-many-branches
    """Parse a KISS2 machine.

    Don't-care input bits are expanded to every concrete code and the input alphabet is the
    set of codes used, sorted by value. Numeric state names are kept as ids; otherwise the reset
    state gets id 0 and the other states follow in order of first appearance. Lines whose next
    state is ``*`` leave the transition undefined.

    Raises
    ------
    FsmSyntaxError
        A header or a transition line is malformed, or the declared counts do not match.
    FsmSemanticError
        Two expanded lines give different results for the same state and code.
    """
    headers: Dict[str, int] = {}
    reset_name = None
    rows = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] in (".i", ".o", ".p", ".s"):
            headers[tokens[0]] = _kiss2_header(tokens, line_no)
        elif tokens[0] == ".r":
            if len(tokens) != 2:
                raise FsmSyntaxError("header '.r' expects one state name", line_no, 1)
            reset_name = tokens[1]
        elif tokens[0] in (".e", ".end"):
            break
        elif tokens[0].startswith("."):
            raise FsmSyntaxError(f"unknown header '{tokens[0]}'", line_no, 1)
        else:
            if len(tokens) != 4:
                raise FsmSyntaxError(f"transition line holds {len(tokens)} fields instead of 4",
                                     line_no, 1)
            if set(tokens[0]) - set("01-") or \
                    (".i" in headers and len(tokens[0]) != headers[".i"]):
                raise FsmSyntaxError(f"bad input cube '{tokens[0]}'", line_no, 1)
            if ".o" in headers and len(tokens[3]) != headers[".o"]:
                raise FsmSyntaxError(f"bad output '{tokens[3]}'", line_no,
                                     raw.index(tokens[3]) + 1)
            rows.append((line_no, tokens))
    if ".p" in headers and headers[".p"] != len(rows):
        raise FsmSyntaxError(f"'.p' declares {headers['.p']} lines, found {len(rows)}")
    if not rows:
        raise FsmSemanticError("KISS2 document without transition lines.")

    names: List[str] = [] if reset_name is None else [reset_name]
    for _, (_, current, following, _) in rows:
        for state in (current, following):
            if state != "*" and state not in names:
                names.append(state)
    if ".s" in headers and headers[".s"] != len(names):
        raise FsmSyntaxError(f"'.s' declares {headers['.s']} states, found {len(names)}")
    if all(state.isdigit() for state in names):
        ids = {state: int(state) for state in names}
    else:
        ids = {state: index for index, state in enumerate(names)}

    transitions: Dict[Tuple[int, str], Tuple[int, str]] = {}
    outputs: List[str] = []
    for line_no, (cube, current, following, output) in rows:
        if output not in outputs:
            outputs.append(output)
        if following == "*":
            continue
        for code in _expand(cube):
            key = (ids[current], code)
            value = (ids[following], output)
            if transitions.get(key, value) != value:
                raise FsmSemanticError(f"line {line_no} redefines state '{current}' on {code}.")
            transitions[key] = value
    inputs = sorted({code for _, code in transitions}, key=lambda code: int(code, 2))
    return Fsm(ids.values(), inputs, outputs, ids[names[0]], transitions, name=name)


## machine files
def read_fsm(filepath: Path) -> Fsm:
    """Read a machine, KISS2 when the suffix is ``.kiss2``, JSON interchange otherwise."""
    text = filepath.read_text(encoding='utf-8')
    if filepath.suffix == KISS2_SUFFIX:
        return parse_kiss2(text, name=filepath.stem)
    return parse_fsm(text)


def write_fsm(m: Fsm, filepath: Path):
    """Write a machine in the JSON interchange format."""
    filepath.write_text(fsm_to_json(m), encoding='utf-8')


## key file
def key_to_text(key: PermKey) -> str:
    """One line holding the permutation image."""
    return " ".join(str(i) for i in key.image) + "\n"


def text_to_key(text: str) -> PermKey:
    """Inverse of ``key_to_text``.

    Raises
    ------
    ValueError
        The line is not a permutation of ``0..m-1``.
    """
    tokens = text.split()
    if not tokens or not all(token.isdigit() for token in tokens):
        raise ValueError(f"key file must hold non-negative integers, found '{text.strip()}'.")
    return PermKey(int(token) for token in tokens)


def write_key(key: PermKey, filepath: Path):
    """Write a key file."""
    filepath.write_text(key_to_text(key), encoding='utf-8')


def read_key(filepath: Path) -> PermKey:
    """Read a key file."""
    return text_to_key(filepath.read_text(encoding='utf-8'))


## partition files
def partition_to_text(pi: Partition) -> str:
    """One block per line, state ids comma separated."""
    return "".join(",".join(str(s) for s in block) + "\n" for block in pi.blocks)


def text_to_partition(text: str) -> Partition:
    """Inverse of ``partition_to_text``.

    Raises
    ------
    ValueError
        A line holds something else than integers or the blocks overlap.
    """
    blocks = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            blocks.append([int(token) for token in line.split(",")])
        except ValueError as error:
            raise ValueError(f"line {line_no} of the partition file is not a list of state "
                             f"ids: '{line}'.") from error
    return Partition(blocks)


def write_partition_pair(pair: PartitionPair, stem: Path) -> Tuple[Path, Path]:
    """Write ``stem.pi_i`` and ``stem.pi_d``."""
    paths = (stem.with_suffix(PI_I_SUFFIX), stem.with_suffix(PI_D_SUFFIX))
    for path, pi in zip(paths, (pair.pi_i, pair.pi_d)):
        path.write_text(partition_to_text(pi), encoding='utf-8')
    return paths


def read_partition_pair(stem: Path) -> PartitionPair:
    """Read ``stem.pi_i`` and ``stem.pi_d``."""
    return PartitionPair(
        text_to_partition(stem.with_suffix(PI_I_SUFFIX).read_text(encoding='utf-8')),
        text_to_partition(stem.with_suffix(PI_D_SUFFIX).read_text(encoding='utf-8')))


## transcripts
def transcript_to_text(transcript: Transcript) -> str:
    """Header ``n_b chi omega seed`` then ``idx tms tdi tdo state`` per cycle."""
    lines = [f"{transcript.n_b} {transcript.chi} {transcript.omega} {transcript.seed}"]
    lines.extend(f"{r.index} {r.tms} {r.tdi} {r.tdo} {r.state.value}"
                 for r in transcript.records)
    return "\n".join(lines) + "\n"


def text_to_transcript(text: str) -> Transcript:
    """Inverse of ``transcript_to_text``.

    Raises
    ------
    TranscriptError
        The header or a cycle line is malformed.
    """
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise TranscriptError("empty transcript.")
    try:
        n_b, chi, omega, seed = (int(token) for token in lines[0].split())
        transcript = Transcript(n_b, chi, omega, seed)
    except ValueError as error:
        raise TranscriptError(f"bad transcript header '{lines[0]}'.") from error
    for line in lines[1:]:
        tokens = line.split()
        try:
            index, tms, tdi, tdo = (int(token) for token in tokens[:4])
            state = TapState(tokens[4])
        except (ValueError, IndexError) as error:
            raise TranscriptError(f"bad transcript line '{line}'.") from error
        if len(tokens) != 5 or {tms, tdi, tdo} - {0, 1}:
            raise TranscriptError(f"bad transcript line '{line}'.")
        transcript.append(CycleRecord(index, tms, tdi, tdo, state))
    return transcript


def write_transcript(transcript: Transcript, filepath: Path):
    """Write a transcript file."""
    filepath.write_text(transcript_to_text(transcript), encoding='utf-8')


def read_transcript(filepath: Path) -> Transcript:
    """Read a transcript file."""
    return text_to_transcript(filepath.read_text(encoding='utf-8'))
