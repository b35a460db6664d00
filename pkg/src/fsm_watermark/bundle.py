"""Shipped package, verifier secret and the embedding pipeline producing both.

The package holds the host machine, the watermark machine and the TAP configuration; the
secret holds what the verifier needs to run the protocol (REDUX, decoder, frame scramble and
either the key or the partition pair).
"""
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from fsm_watermark import utils
from fsm_watermark.data import dict_to_fsm, fsm_to_dict
from fsm_watermark.decomposition import (LATTICE_CAP, Partition, PartitionPair, build_dependent,
                                         build_independent, fixed_partitions_lprk,
                                         minimal_decomposition, size_report)
from fsm_watermark.errors import BundleError
from fsm_watermark.fsm import Fsm, connectivity_graph
from fsm_watermark.matrix_crypt import (PermKey, build_decryption_machine,
                                        build_watermark_machine, random_perm_key)
from fsm_watermark.redux import LprkSpec, lpr_k
from fsm_watermark.run_config import KEY_SEED, MODES, SCHEME_SEED
from fsm_watermark.scan_chain import PermutationScheme


@dataclass(frozen=True)
class TapConfig:
    """Public TAP parameters: field widths, scheme family and test length."""
    chi: int
    omega: int
    scheme_id: str
    test_length: int

    @property
    def n_b(self) -> int:
        """Frame width."""
        return self.chi + self.omega


class Package:
    """Artifact shipped to the customer.

    Parameters
    ----------
    host : Fsm
        Host machine.
    watermark : Fsm
        Watermark (independent) machine behind the TAP.
    tap : TapConfig
        TAP configuration.
    """

    def __init__(self, host: Fsm, watermark: Fsm, tap: TapConfig) -> None:
        self._host = host
        self._watermark = watermark
        self._tap = tap

    @property
    def host(self) -> Fsm:
        """Host machine."""
        return self._host

    @property
    def watermark(self) -> Fsm:
        """Watermark machine."""
        return self._watermark

    @property
    def tap(self) -> TapConfig:
        """TAP configuration."""
        return self._tap

    @property
    def test_length(self) -> int:
        """Default number of inputs of a watermark test."""
        return self._tap.test_length

    def with_watermark(self, watermark: Fsm) -> 'Package':
        """Same package around another watermark machine."""
        return Package(self._host, watermark, self._tap)

    def check_tap(self):
        """Raise ``BundleError`` when the TAP widths do not fit the watermark machine."""
        if (self._tap.chi, self._tap.omega) != (self._watermark.input_width,
                                                self._watermark.state_width):
            raise BundleError(f"TAP fields ({self._tap.chi}, {self._tap.omega}) do not match "
                              f"the watermark machine ({self._watermark.input_width}, "
                              f"{self._watermark.state_width}).")

    def default_scheme(self) -> PermutationScheme:
        """Identity scheme when the package declares it.

        Raises
        ------
        BundleError
            The package uses a secret scramble.
        """
        if self._tap.scheme_id != PermutationScheme.IDENTITY_ID:
            raise BundleError(f"scheme '{self._tap.scheme_id}' is secret, pass the scheme.")
        return PermutationScheme.identity(self._tap.n_b)


class Secret:
    """Verifier material.

    Parameters
    ----------
    mode : str
        One of ``matrix``, ``fixed`` or ``optimal``.
    n, k : int
        Shape of the LPR(k).
    redux : Fsm
        LPR(k) machine.
    decoder : Fsm
        Decryption machine (matrix mode) or dependent machine.
    scheme : PermutationScheme
        Frame scramble of the TAP.
    key : PermKey, optional
        Permutation key, required in matrix mode.
    partitions : PartitionPair, optional
        Decomposition, required in the other modes.

    Raises
    ------
    BundleError
        Unknown mode or mode-specific material missing.
    """

    def __init__(self, mode: str, n: int, k: int, redux: Fsm, decoder: Fsm,
                 scheme: PermutationScheme, key: Optional[PermKey] = None,
                 partitions: Optional[PartitionPair] = None) -> None:
        if mode not in MODES:
            raise BundleError(f"unknown mode '{mode}', expected one of {MODES}.")
        if mode == "matrix" and key is None:
            raise BundleError("a matrix-mode secret holds the key.")
        if mode != "matrix" and partitions is None:
            raise BundleError(f"a {mode}-mode secret holds the partition pair.")
        self._mode = mode
        self._n = n
        self._k = k
        self._redux = redux
        self._decoder = decoder
        self._scheme = scheme
        self._key = key
        self._partitions = partitions

    @property
    def mode(self) -> str:
        """Embedding mode."""
        return self._mode

    @property
    def n(self) -> int:
        """Branch length."""
        return self._n

    @property
    def k(self) -> int:
        """Branch count."""
        return self._k

    @property
    def redux(self) -> Fsm:
        """LPR(k) machine."""
        return self._redux

    @property
    def decoder(self) -> Fsm:
        """Decryption or dependent machine."""
        return self._decoder

    @property
    def scheme(self) -> PermutationScheme:
        """Frame scramble."""
        return self._scheme

    @property
    def key(self) -> Optional[PermKey]:
        """Permutation key, matrix mode only."""
        return self._key

    @property
    def partitions(self) -> Optional[PartitionPair]:
        """Partition pair, decomposition modes only."""
        return self._partitions


## pipeline
def build_redux(host: Fsm, n: int, k: int, z: Optional[int] = None) -> Fsm:
    """LPR(k) of the host's connectivity graph."""
    graph = connectivity_graph(host)
    utils.info(f"connectivity graph: {len(graph.vertices)} vertices, {len(graph.edges)} edges")
    machine = lpr_k(graph, LprkSpec(n, k, z))
    utils.info(f"LPR({k}) with n={n}: {machine.n_states} states")
    return machine


def embed_watermark(host: Fsm, n: int, k: int, z: Optional[int] = None, mode: str = "fixed",
                    key_seed: int = KEY_SEED, scheme_seed: Optional[int] = SCHEME_SEED,
                    cap: int = LATTICE_CAP) -> Tuple[Package, Secret]:
    """Build the package and the secret of a host.

    Parameters
    ----------
    host : Fsm
        Host machine.
    n, k : int
        Shape of the LPR(k).
    z : int, optional
        Hash width, automatic by default.
    mode : str, optional
        ``matrix`` ships the key-relabelled REDUX, ``fixed`` and ``optimal`` ship the
        independent machine of the fixed or of the minimal decomposition, by default "fixed".
    key_seed : int, optional
        Seed of the permutation key (matrix mode).
    scheme_seed : int, optional
        Seed of the frame scramble, ``None`` for the identity scheme.
    cap : int, optional
        Lattice state cap of the optimal mode.

    Returns
    -------
    Tuple[Package, Secret]
        Shipped package and verifier secret.

    Raises
    ------
    BundleError
        Unknown mode.
    LatticeCapError
        Optimal mode on an LPR(k) above ``cap``.
    """
    if mode not in MODES:
        raise BundleError(f"unknown mode '{mode}', expected one of {MODES}.")
    machine = build_redux(host, n, k, z)
    key, pair = None, None
    if mode == "matrix":
        key = random_perm_key(machine.n_states, key_seed)
        watermark = build_watermark_machine(key, machine)
        decoder = build_decryption_machine(key, machine)
    else:
        if mode == "fixed":
            pair = fixed_partitions_lprk(machine, n, k)
        else:
            pair = minimal_decomposition(machine, cap)
        size_report(pair, n, k)
        watermark = build_independent(machine, pair.pi_i)
        decoder = build_dependent(machine, pair)
    n_b = watermark.input_width + watermark.state_width
    scheme = PermutationScheme.identity(n_b) if scheme_seed is None else \
        PermutationScheme.random(n_b, scheme_seed)
    tap = TapConfig(watermark.input_width, watermark.state_width, scheme.scheme_id, n + 1)
    utils.info(f"{mode} embedding: watermark machine with {watermark.n_states} states, "
               f"decoder with {decoder.n_states} states")
    return (Package(host, watermark, tap),
            Secret(mode, n, k, machine, decoder, scheme, key, pair))


## files
def _require(dico: Dict[str, Any], kind: str, fields: Tuple[str, ...]):
    if not isinstance(dico, dict) or dico.get("kind") != kind:
        raise BundleError(f"document is not a {kind} bundle.")
    missing = [field for field in fields if field not in dico]
    if missing:
        raise BundleError(f"{kind} bundle misses {', '.join(missing)}.")


def package_to_dict(package: Package) -> Dict[str, Any]:
    """Bundle document of a package."""
    return {
        "kind": "package",
        "host": fsm_to_dict(package.host),
        "watermark": fsm_to_dict(package.watermark),
        "tap": {"chi": package.tap.chi, "omega": package.tap.omega,
                "scheme": package.tap.scheme_id, "test_length": package.tap.test_length},
    }


def dict_to_package(dico: Dict[str, Any]) -> Package:
    """Inverse of ``package_to_dict``.

    Raises
    ------
    BundleError
        The document is not a well-formed package bundle.
    """
    _require(dico, "package", ("host", "watermark", "tap"))
    try:
        tap = TapConfig(int(dico["tap"]["chi"]), int(dico["tap"]["omega"]),
                        str(dico["tap"]["scheme"]), int(dico["tap"]["test_length"]))
    except (KeyError, TypeError, ValueError) as error:
        raise BundleError(f"bad TAP configuration: {error}.") from error
    package = Package(dict_to_fsm(dico["host"]), dict_to_fsm(dico["watermark"]), tap)
    package.check_tap()
    return package


def secret_to_dict(secret: Secret) -> Dict[str, Any]:
    """Bundle document of a secret."""
    pair = secret.partitions
    return {
        "kind": "secret",
        "mode": secret.mode,
        "n": secret.n,
        "k": secret.k,
        "redux": fsm_to_dict(secret.redux),
        "decoder": fsm_to_dict(secret.decoder),
        "scheme": list(secret.scheme.scramble),
        "key": None if secret.key is None else list(secret.key.image),
        "partitions": None if pair is None else {
            "pi_i": [list(block) for block in pair.pi_i.blocks],
            "pi_d": [list(block) for block in pair.pi_d.blocks]},
    }


def dict_to_secret(dico: Dict[str, Any]) -> Secret:
    """Inverse of ``secret_to_dict``.

    Raises
    ------
    BundleError
        The document is not a well-formed secret bundle.
    """
    _require(dico, "secret", ("mode", "n", "k", "redux", "decoder", "scheme"))
    try:
        key = None if dico.get("key") is None else PermKey(dico["key"])
        pair = None if dico.get("partitions") is None else PartitionPair(
            Partition(dico["partitions"]["pi_i"]), Partition(dico["partitions"]["pi_d"]))
        scheme = PermutationScheme(dico["scheme"])
    except (KeyError, TypeError) as error:
        raise BundleError(f"bad secret material: {error}.") from error
    return Secret(dico["mode"], int(dico["n"]), int(dico["k"]), dict_to_fsm(dico["redux"]),
                  dict_to_fsm(dico["decoder"]), scheme, key, pair)


def _write(dico: Dict[str, Any], filepath: Path):
    filepath.write_text(json.dumps(dico, indent=2) + "\n", encoding='utf-8')


def _read(filepath: Path) -> Dict[str, Any]:
    try:
        return json.loads(filepath.read_text(encoding='utf-8'))
    except json.JSONDecodeError as error:
        raise BundleError(f"{filepath.name} is not JSON (line {error.lineno}, "
                          f"column {error.colno}).") from error


def write_package(package: Package, filepath: Path):
    """Write a package bundle."""
    _write(package_to_dict(package), filepath)


def read_package(filepath: Path) -> Package:
    """Read a package bundle."""
    return dict_to_package(_read(filepath))


def write_secret(secret: Secret, filepath: Path):
    """Write a secret bundle."""
    _write(secret_to_dict(secret), filepath)


def read_secret(filepath: Path) -> Secret:
    """Read a secret bundle."""
    return dict_to_secret(_read(filepath))
