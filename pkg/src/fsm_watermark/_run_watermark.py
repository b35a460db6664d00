""" Command line tool deriving, embedding, packaging, verifying and attacking FSM watermarks.
"""

import argparse
import sys
from pathlib import Path
from typing import Callable, Dict, List

from fsm_watermark import attacks, bundle, data, decomposition, matrix_crypt, redux, utils
from fsm_watermark.errors import WatermarkError
from fsm_watermark.fsm import connectivity_graph, standard_cg_machine
from fsm_watermark.run_config import COMMANDS, MODES, RunConfig
from fsm_watermark.scan_chain import decode_transcript, parallel_payload, scan_watermark_test
from fsm_watermark.verification import failed_branches, verify_all_branches, watermark_test

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_INPUT = 3


class UsageError(ValueError):
    """ Settings accepted by the parser but meaningless for the given files."""


_FLAGS = {
    "--in": {"dest": "input", "help": "input machine (JSON, KISS2 when suffixed .kiss2)"},
    "--out": {"dest": "output", "help": "output file"},
    "--m": {"type": int, "help": "LPR length"},
    "--n": {"type": int, "help": "branch length of the LPR(k)"},
    "--k": {"type": int, "help": "branch count of the LPR(k)"},
    "--z": {"type": int, "help": "hash bit-width (automatic by default)"},
    "--key": {"help": "key file"},
    "--package": {"help": "package bundle"},
    "--secret": {"help": "secret bundle"},
    "--partitions": {"help": "partition pair stem (files STEM.pi_i and STEM.pi_d)"},
    "--report": {"help": "verdict report file"},
    "--mode": {"choices": MODES, "help": "embedding mode"},
    "--key-seed": {"type": int, "help": "seed of the permutation key"},
    "--setting-seed": {"type": int, "help": "seed of the TAP settings and of random probing"},
    "--scheme-seed": {"type": int, "help": "seed of the secret frame scramble"},
    "--identity-scheme": {"action": "store_const", "const": True,
                          "help": "ship the TAP without frame scramble"},
    "--lattice-cap": {"type": int, "help": "largest machine of the exhaustive lattice search"},
    "--probe-budget": {"type": int, "help": "largest number of probes of the estimator"},
    "--patience": {"type": int, "help": "probes without a new output before stopping"},
    "--branch": {"type": int, "help": "start input code of the tested branch"},
    "--len": {"dest": "length", "type": int, "help": "number of inputs of a watermark test"},
    "--scan": {"action": "store_const", "const": True,
              "help": "read the watermark machine through its TAP"},
}

_COMMAND_FLAGS = {
    "extract-cg": ("--in", "--out"),
    "lpr": ("--in", "--m", "--out"),
    "lprk": ("--in", "--n", "--k", "--z", "--out"),
    "encrypt-matrix": ("--in", "--key", "--key-seed", "--out"),
    "build-decrypt": ("--in", "--key", "--out"),
    "decompose": ("--in", "--mode", "--n", "--k", "--lattice-cap", "--out"),
    "emit-package": ("--in", "--n", "--k", "--z", "--mode", "--key-seed", "--scheme-seed",
                     "--identity-scheme", "--lattice-cap", "--package", "--secret"),
    "verify": ("--package", "--secret", "--branch", "--len", "--scan", "--setting-seed",
               "--report"),
    "scan-test": ("--package", "--secret", "--branch", "--len", "--setting-seed", "--out"),
    "attack": ("--package", "--probe-budget", "--patience", "--setting-seed", "--out"),
    "validate-partitions": ("--in", "--partitions"),
}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fsm-watermark", description=__doc__)
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        subparser = subparsers.add_parser(command)
        for flag in _COMMAND_FLAGS[command]:
            subparser.add_argument(flag, **_FLAGS[flag])
        subparser.add_argument("--config", help="JSON file of settings, flags win")
        verbosity = subparser.add_mutually_exclusive_group()
        verbosity.add_argument("--debug", action="store_true",
                               help="activate debug mode (default: %(default)s)")
        verbosity.add_argument("--quiet", action="store_true",
                               help="silence the logs (default: %(default)s)")
    return parser


## subcommands
def _checked_branch(config: RunConfig, secret: bundle.Secret) -> int:
    branch = config.branch or 0
    n_inputs = len(secret.redux.inputs)
    if not 0 <= branch < n_inputs:
        raise UsageError(f"'branch' ({branch}) must be in 0..{n_inputs - 1} for this secret.")
    return branch


def _extract_cg(config: RunConfig) -> int:
    graph = connectivity_graph(data.read_fsm(config.path("input")))
    utils.info(f"connectivity graph: {len(graph.vertices)} vertices, {len(graph.edges)} edges")
    data.write_fsm(standard_cg_machine(graph), config.path("output"))
    return EXIT_OK


def _lpr(config: RunConfig) -> int:
    chain = redux.lpr(connectivity_graph(data.read_fsm(config.path("input"))), config.m)
    utils.info(f"LPR: {len(chain.vertices)} states rooted at {chain.root}")
    data.write_fsm(standard_cg_machine(chain), config.path("output"))
    return EXIT_OK


def _lprk(config: RunConfig) -> int:
    host = data.read_fsm(config.path("input"))
    data.write_fsm(bundle.build_redux(host, config.n, config.k, config.z),
                   config.path("output"))
    return EXIT_OK


def _encrypt_matrix(config: RunConfig) -> int:
    machine = data.read_fsm(config.path("input"))
    key = matrix_crypt.random_perm_key(machine.n_states, config.key_seed)
    output = config.path("output")
    key_path = config.path("key") or output.with_suffix(".key")
    data.write_fsm(matrix_crypt.build_watermark_machine(key, machine), output)
    data.write_key(key, key_path)
    utils.info(f"key of dimension {key.dimension} written to {key_path}")
    return EXIT_OK


def _build_decrypt(config: RunConfig) -> int:
    machine = data.read_fsm(config.path("input"))
    key = data.read_key(config.path("key"))
    data.write_fsm(matrix_crypt.build_decryption_machine(key, machine), config.path("output"))
    return EXIT_OK


def _decompose(config: RunConfig) -> int:
    machine = data.read_fsm(config.path("input"))
    if config.mode == "fixed":
        pair = decomposition.fixed_partitions_lprk(machine, config.n, config.k)
    else:
        pair = decomposition.minimal_decomposition(machine, config.lattice_cap)
    stem = config.path("output")
    data.write_partition_pair(pair, stem)
    data.write_fsm(decomposition.build_independent(machine, pair.pi_i),
                   stem.parent / f"{stem.name}_independent.json")
    data.write_fsm(decomposition.build_dependent(machine, pair),
                   stem.parent / f"{stem.name}_dependent.json")
    utils.info(f"{config.mode} decomposition: {len(pair.pi_i)} + {len(pair.pi_d)} blocks")
    return EXIT_OK


def _emit_package(config: RunConfig) -> int:
    host = data.read_fsm(config.path("input"))
    package, secret = bundle.embed_watermark(
        host, config.n, config.k, config.z, config.mode, key_seed=config.key_seed,
        scheme_seed=None if config.identity_scheme else config.scheme_seed,
        cap=config.lattice_cap)
    bundle.write_package(package, config.path("package"))
    bundle.write_secret(secret, config.path("secret"))
    return EXIT_OK


def _verify(config: RunConfig) -> int:
    package = bundle.read_package(config.path("package"))
    secret = bundle.read_secret(config.path("secret"))
    scan_seed = config.setting_seed if config.scan else None
    if config.branch is None:
        verdicts = verify_all_branches(package, secret, config.length, scan_seed)
    else:
        branch = _checked_branch(config, secret)
        verdicts = {branch: watermark_test(package, secret, branch, config.length, scan_seed)}
    report = "".join(f"branch: {branch}\n{verdict.report()}"
                     for branch, verdict in verdicts.items())
    utils.info(report, end="")
    if config.report is not None:
        config.path("report").write_text(report, encoding='utf-8')
    failed = failed_branches(verdicts)
    if failed:
        utils.info(f"watermark test failed on branch(es) {failed}")
        return EXIT_FAILED
    utils.info(f"watermark test passed on {len(verdicts)} branch(es)")
    return EXIT_OK


def _scan_test(config: RunConfig) -> int:
    package = bundle.read_package(config.path("package"))
    secret = bundle.read_secret(config.path("secret"))
    branch = _checked_branch(config, secret)
    length = package.test_length if config.length is None else config.length
    transcript = scan_watermark_test(package, branch, config.setting_seed, secret.scheme,
                                     length)
    data.write_transcript(transcript, config.path("output"))
    setting, frames = decode_transcript(transcript, secret.scheme)
    schedule = redux.branch_schedule(package.watermark, branch, length)
    matches = frames == parallel_payload(package.watermark, schedule)
    utils.info(f"{len(transcript)} cycles, setting {setting}, payload "
               f"{'matches' if matches else 'differs from'} the parallel run")
    return EXIT_OK if matches else EXIT_FAILED


def _attack(config: RunConfig) -> int:
    package = bundle.read_package(config.path("package"))
    oracle = attacks.MachineOracle(package.watermark)
    recovered = attacks.informed_attack(oracle, package.tap.chi)
    if config.output is not None:
        data.write_fsm(recovered, config.path("output"))
    budget = attacks.OracleBudget(config.probe_budget, package.test_length + 1, config.patience)
    estimate = attacks.estimate_output_count(attacks.MachineOracle(package.watermark), budget,
                                             config.setting_seed, attacks.observed_state)
    utils.info(f"estimated state-revealing outputs: {estimate.count} after {estimate.probes} "
               f"probes ({estimate.note})")
    return EXIT_OK


def _validate_partitions(config: RunConfig) -> int:
    machine = data.read_fsm(config.path("input"))
    pair = data.read_partition_pair(config.path("partitions"))
    checks = {
        "pi_I input-preserving": decomposition.is_input_preserving(machine, pair.pi_i),
        "pi_D input-preserving": decomposition.is_input_preserving(machine, pair.pi_d),
        "orthogonal": decomposition.is_orthogonal(pair.pi_i, pair.pi_d),
        "nontrivial": not pair.is_trivial(),
    }
    for name, passed in checks.items():
        utils.info(f"{name}: {'yes' if passed else 'no'}")
    return EXIT_OK if all(checks.values()) else EXIT_FAILED


_COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "extract-cg": _extract_cg,
    "lpr": _lpr,
    "lprk": _lprk,
    "encrypt-matrix": _encrypt_matrix,
    "build-decrypt": _build_decrypt,
    "decompose": _decompose,
    "emit-package": _emit_package,
    "verify": _verify,
    "scan-test": _scan_test,
    "attack": _attack,
    "validate-partitions": _validate_partitions,
}


def main(arguments: List[str]) -> int:
    """ Run one subcommand with the given command line arguments.

    Parameters
    ----------
    arguments: list of str
        Command line arguments.

    Returns
    -------
    int
        0 on success, 1 on a failed verdict or validation, 2 on a usage error, 3 on an input
        error.
    """
    try:
        args = _parser().parse_args(arguments)
    except SystemExit as error:
        return EXIT_OK if error.code in (0, None) else EXIT_USAGE

    utils.set_verbosity(utils.DEBUG if args.debug else utils.NONE if args.quiet else utils.INFO)
    flags = {name: value for name, value in vars(args).items()
             if name not in ("command", "config", "debug", "quiet")}
    try:
        config = RunConfig.from_sources(args.command, flags,
                                        Path(args.config) if args.config else None)
    except OSError as error:
        utils.info(f"cannot read config file: {error}")
        return EXIT_INPUT
    except ValueError as error:
        utils.info(f"usage error: {error}")
        return EXIT_USAGE

    try:
        return _COMMANDS[config.command](config)
    except UsageError as error:
        utils.info(f"usage error: {error}")
        return EXIT_USAGE
    except (WatermarkError, ValueError, OSError) as error:
        utils.info(f"{config.command} failed: {error}")
        return EXIT_INPUT


def run_watermark():
    """ Entry point for the ``fsm-watermark`` script."""
    sys.exit(main(sys.argv[1:]))
