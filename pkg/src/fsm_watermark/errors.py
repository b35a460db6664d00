"""Exceptions raised by ``fsm_watermark``.

Every error is a ``ValueError`` so callers that only care about bad input can catch that.
"""
from typing import Optional


class WatermarkError(ValueError):
    """Base class of the package errors."""


class FsmSyntaxError(WatermarkError):
    """A machine document could not be read.

    Parameters
    ----------
    message : str
        What went wrong.
    line : int, optional
        1-based line of the offending token.
    column : int, optional
        1-based column of the offending token.
    """

    def __init__(self, message: str, line: Optional[int] = None,
                 column: Optional[int] = None) -> None:
        position = ""
        if line is not None:
            position = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(f"{message}{position}")
        self._line = line
        self._column = column

    @property
    def line(self) -> Optional[int]:
        """Line of the error, if known."""
        return self._line

    @property
    def column(self) -> Optional[int]:
        """Column of the error, if known."""
        return self._column


class FsmSemanticError(WatermarkError):
    """A machine is well formed but violates a machine invariant."""


class ReduxError(WatermarkError):
    """Invalid path operator arguments."""


class HashCollisionError(ReduxError):
    """Two LPR(k) branch states received the same id."""


class AlphabetMismatchError(WatermarkError):
    """Two machines do not share the alphabet an operation needs."""


class DecompositionError(WatermarkError):
    """A partition pair cannot be found, built or verified."""


class LatticeCapError(DecompositionError):
    """The machine has too many states for the exhaustive lattice search."""


class IncompatibleBlocksError(DecompositionError):
    """Two blocks do not share exactly one state."""


class TranscriptError(WatermarkError):
    """An observation log or a scan transcript is inconsistent."""


class UnsupportedOracleError(WatermarkError):
    """The black box does not offer what an attack needs."""


class BundleError(WatermarkError):
    """A package or secret bundle is malformed."""
