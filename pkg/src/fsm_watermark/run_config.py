"""Settings of one command-line invocation, merged from a JSON config file and flags.
"""
import json
from pathlib import Path
from typing import Any, Dict, Optional

from fsm_watermark.decomposition import LATTICE_CAP

KEY_SEED = 2024
"""Default seed of the permutation key."""
SETTING_SEED = 1149
"""Default seed of the TAP setting generator."""
SCHEME_SEED = 7
"""Default seed of the secret frame scramble."""
PROBE_BUDGET = 256
PATIENCE = 64

MODES = ("matrix", "fixed", "optimal")

COMMANDS = ("extract-cg", "lpr", "lprk", "encrypt-matrix", "build-decrypt", "decompose",
            "emit-package", "verify", "scan-test", "attack", "validate-partitions")

_REQUIRED = {
    "extract-cg": ("input", "output"),
    "lpr": ("input", "m", "output"),
    "lprk": ("input", "n", "k", "output"),
    "encrypt-matrix": ("input", "output"),
    "build-decrypt": ("input", "key", "output"),
    "decompose": ("input", "output"),
    "emit-package": ("input", "n", "k", "package", "secret"),
    "verify": ("package", "secret"),
    "scan-test": ("package", "secret", "output"),
    "attack": ("package",),
    "validate-partitions": ("input", "partitions"),
}


class RunConfig:
    """Validated settings of one subcommand.

    Parameters
    ----------
    command : str
        Subcommand name, one of ``COMMANDS``.
    **values
        Settings named like the long flags, dashes replaced by underscores.

    Raises
    ------
    ValueError
        Unknown command or setting, missing mode-specific setting, or a value out of range.
    """

    DEFAULTS: Dict[str, Any] = {
        "input": None,
        "output": None,
        "key": None,
        "package": None,
        "secret": None,
        "partitions": None,
        "report": None,
        "m": None,
        "n": None,
        "k": None,
        "z": None,
        "mode": "fixed",
        "key_seed": KEY_SEED,
        "setting_seed": SETTING_SEED,
        "scheme_seed": SCHEME_SEED,
        "identity_scheme": False,
        "lattice_cap": LATTICE_CAP,
        "probe_budget": PROBE_BUDGET,
        "patience": PATIENCE,
        "branch": None,
        "length": None,
        "scan": False,
    }

    def __init__(self, command: str, **values: Any) -> None:
        if command not in COMMANDS:
            raise ValueError(f"unknown command '{command}'.")
        unknown = sorted(set(values) - set(self.DEFAULTS))
        if unknown:
            raise ValueError(f"unknown setting(s) {unknown}.")
        self._command = command
        self._values = dict(self.DEFAULTS)
        self._values.update({name: value for name, value in values.items()
                             if value is not None})
        self._check()

    def _check(self):
        missing = [name for name in _REQUIRED[self._command] if self._values[name] is None]
        if self._command == "decompose" and self.mode == "matrix":
            raise ValueError("'decompose' needs mode 'fixed' or 'optimal'.")
        if self._command == "decompose" and self.mode == "fixed":
            missing += [name for name in ("n", "k") if self._values[name] is None]
        if missing:
            raise ValueError(f"'{self._command}' requires {', '.join(missing)}.")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode '{self.mode}', expected one of {MODES}.")
        for name in ("m", "n", "k", "z", "lattice_cap", "probe_budget", "patience"):
            value = self._values[name]
            if value is not None and (not isinstance(value, int) or value < 1):
                raise ValueError(f"'{name}' ({value}) must be an integer >= 1.")
        for name in ("branch", "length"):
            value = self._values[name]
            if value is not None and (not isinstance(value, int) or value < 0):
                raise ValueError(f"'{name}' ({value}) must be an integer >= 0.")

    @classmethod
    def from_sources(cls, command: str, flags: Dict[str, Any],
                     config_path: Optional[Path] = None) -> 'RunConfig':
        """Settings of ``config_path`` overridden by every flag explicitly given (not None).

        Raises
        ------
        ValueError
            The config file is not a JSON object or the merged settings are invalid.
        """
        values: Dict[str, Any] = {}
        if config_path is not None:
            try:
                loaded = json.loads(Path(config_path).read_text(encoding='utf-8'))
            except json.JSONDecodeError as error:
                raise ValueError(f"config file {config_path} is not valid JSON: "
                                 f"{error.msg}.") from error
            if not isinstance(loaded, dict):
                raise ValueError(f"config file {config_path} must hold a JSON object.")
            values.update({name.replace("-", "_"): value for name, value in loaded.items()})
        values.update({name: value for name, value in flags.items() if value is not None})
        return cls(command, **values)

    @property
    def command(self) -> str:
        """Subcommand name."""
        return self._command

    def path(self, name: str) -> Optional[Path]:
        """Setting ``name`` as a path, None when unset."""
        value = self._values[name]
        return None if value is None else Path(value)

    def __getattr__(self, name: str) -> Any:
        values = self.__dict__.get("_values", {})
        if name in values:
            return values[name]
        raise AttributeError(name)

    def as_dict(self) -> Dict[str, Any]:
        """Every setting, defaults included."""
        return dict(self._values, command=self._command)
