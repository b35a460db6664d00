"""Verbosity of the logs and bit-string helpers shared by the modules.
"""

_log_level = 1  # pylint: disable=invalid-name
"""Verbosity level"""

NONE = 0
INFO = 1
DEBUG = 2


def set_verbosity(log_level: int):
    """Define verbosity level.

    Parameters
    ----------
    log_level : int
        log level

    Raises
    ------
    ValueError
        if not in range [NONE;DEBUG]
    """
    global _log_level  # pylint: disable=invalid-name,global-statement
    if not NONE <= log_level <= DEBUG:
        raise ValueError(f"log_level must be in [{NONE};{DEBUG}]")
    _log_level = log_level


def get_log_level():
    """Access to current log level."""
    return _log_level


def log(level, *args, **kwargs):
    """log basis function, debug lines are tagged and flushed"""
    if _log_level < level:
        return
    if level >= DEBUG:
        kwargs.setdefault("flush", True)
        args = ("debug:",) + args
    print(*args, **kwargs)


def info(*args, **kwargs):
    """Log info level. Use it as print function."""
    log(INFO, *args, **kwargs)


def debug(*args, **kwargs):
    """Log debug level. Use it as print function."""
    log(DEBUG, *args, **kwargs)


## bit strings
def bit_width(count: int) -> int:
    """Number of bits needed to index ``count`` distinct values, never less than 1.

    Parameters
    ----------
    count : int
        Number of values to encode.

    Returns
    -------
    int
        ``max(1, ceil(log2(count)))``

    Raises
    ------
    ValueError
        ``count`` is not positive.
    """
    if count < 1:
        raise ValueError(f"'count' ({count}) must be >= 1.")
    return max(1, (count - 1).bit_length())


def to_bits(value: int, width: int) -> str:
    """Encode ``value`` as a most-significant-bit first string of ``width`` bits.

    Raises
    ------
    ValueError
        ``value`` does not fit.
    """
    if value < 0 or value >= 1 << width:
        raise ValueError(f"value {value} does not fit in {width} bits.")
    return format(value, f"0{width}b") if width else ""


def from_bits(bits: str) -> int:
    """Decode a most-significant-bit first string, the empty string is 0."""
    if bits and set(bits) - {"0", "1"}:
        raise ValueError(f"'{bits}' is not a bit string.")
    return int(bits, 2) if bits else 0


def is_bit_string(symbol: str) -> bool:
    """Tell whether ``symbol`` is a nonempty string of 0 and 1."""
    return bool(symbol) and not set(symbol) - {"0", "1"}
