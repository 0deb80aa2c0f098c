"""Symbol files and result tables.

Text symbol files hold one complex value per line as ``re im``; binary
files hold little-endian float64 ``(re, im)`` pairs.
"""

import sys
from pathlib import Path
from typing import Optional

import numpy as np
import structlog

from ..errors import ConfigError, DimensionMismatch
from ..models.reports import ResultTable

logger = structlog.get_logger(__name__)

_BINARY_DTYPE = np.dtype("<f8")


def parse_symbols(text: str) -> np.ndarray:
    """Parse ``re im`` lines; blank lines and # comments are skipped"""
    values = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ConfigError(
                f"Line {lineno}: expected 're im', got {line!r}"
            )
        try:
            values.append(complex(float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise ConfigError(f"Line {lineno}: {exc}") from exc
    return np.array(values, dtype=complex)


def format_symbols(values) -> str:
    values = np.asarray(values, dtype=complex).reshape(-1)
    return "".join(f"{v.real:.17g} {v.imag:.17g}\n" for v in values)


def read_symbols(path: str, binary: bool = False) -> np.ndarray:
    """Load a flat complex vector from a symbol file"""
    try:
        if binary:
            size = Path(path).stat().st_size
            if size % (2 * _BINARY_DTYPE.itemsize):
                raise DimensionMismatch(
                    f"Binary file {path} has {size} bytes, not a whole "
                    "number of (re, im) float64 pairs"
                )
            raw = np.fromfile(path, dtype=_BINARY_DTYPE)
            values = raw[0::2] + 1j * raw[1::2]
        else:
            values = parse_symbols(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"Cannot read {path}: {exc}") from exc

    if not np.all(np.isfinite(values)):
        raise ConfigError(f"{path} contains non-finite values")
    logger.debug("Read symbols", path=path, count=int(values.size))
    return values


def write_symbols(
    values, path: Optional[str] = None, binary: bool = False
) -> None:
    """Write a complex vector to a file, or to stdout as text"""
    values = np.asarray(values, dtype=complex).reshape(-1)
    if binary:
        if path is None:
            raise ConfigError("--binary output requires --out")
        pairs = np.empty(2 * values.size, dtype=_BINARY_DTYPE)
        pairs[0::2] = values.real
        pairs[1::2] = values.imag
        try:
            pairs.tofile(path)
        except OSError as exc:
            raise ConfigError(f"Cannot write {path}: {exc}") from exc
    else:
        _write_text(format_symbols(values), path)
    logger.debug("Wrote symbols", path=path, count=int(values.size))


def split_blocks(values, size: int) -> np.ndarray:
    """Reshape a flat vector into (blocks, size)"""
    values = np.asarray(values)
    if values.size == 0 or values.size % size:
        raise DimensionMismatch(
            f"Input holds {values.size} values, not a positive multiple "
            f"of N={size}"
        )
    return values.reshape(-1, size)


def write_table(table: ResultTable, path: Optional[str] = None) -> None:
    _write_text(table.to_csv(), path)
    logger.debug("Wrote table", path=path, rows=len(table.rows))


def _write_text(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"Cannot write {path}: {exc}") from exc
