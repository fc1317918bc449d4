"""Cell geometry shared by all the array-code families.

An array codeword is a grid of fixed-size blocks. Rows and columns are
1-based. Row ``p`` is an imaginary all-zero row: it is addressable, so line
arithmetic can land on it, but it is never stored. A parity line of slope
``v`` through index ``i`` visits, in column ``j``, the row ``<i + v*(1-j)>``
where ``<x>`` wraps into ``1..p``.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple

import numpy as np

__all__ = [
    "ArraycodeError",
    "ParameterError",
    "UnrecoverableError",
    "CorruptionError",
    "PlanError",
    "OracleMismatch",
    "Coord",
    "ParityGroupId",
    "is_prime",
    "mod_index",
    "mod_inverse",
    "parity_group_members",
    "adjuster_line",
    "crossing",
    "is_zero_crossing_pair",
    "xor_blocks",
    "zero_block",
]


class ArraycodeError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(ArraycodeError, ValueError):
    """Invalid code parameters (non-prime p, bad column, bad slope...)."""


class UnrecoverableError(ArraycodeError):
    """The erasure pattern exceeds what the code can repair."""


class CorruptionError(ArraycodeError):
    """Surviving blocks are mutually inconsistent."""


class PlanError(ArraycodeError):
    """A repair plan could not be built or executed."""


class OracleMismatch(ArraycodeError):
    """A closed-form value disagrees with its brute-force oracle."""


class Coord(NamedTuple):
    """1-based (row, col) grid position; row p is the imaginary row."""

    row: int
    col: int


class ParityGroupId(NamedTuple):
    """A parity line: slope and start index.

    ``index`` is normally in 1..p-1 and names the stored parity block
    ``b[index, slope]``. Index 0 is the line through the imaginary cell of
    column 1: it has no stored parity block (its parity-side value is the
    slope's adjuster) and appears only inside repair plans.
    """

    slope: int
    index: int


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def mod_index(x: int, p: int) -> int:
    """Wrap an arbitrary integer into the index range 1..p."""
    return (x - 1) % p + 1


def mod_inverse(x: int, p: int) -> int:
    return pow(x, -1, p)


def _check_group(p: int, g: ParityGroupId) -> None:
    if not is_prime(p) or p < 3:
        raise ParameterError(f"p must be an odd prime, got {p}")
    if not -p < g.slope < p:
        raise ParameterError(f"slope {g.slope} out of range for p={p}")
    if not 0 <= g.index <= p - 1:
        raise ParameterError(f"group index {g.index} out of range for p={p}")


def parity_group_members(p: int, g: ParityGroupId, info_cols: int | None = None) -> list[Coord]:
    """Information-cell coordinates of the parity line ``g``, column order.

    Column ``j`` contributes the cell in row ``<index + slope*(1-j)>``.
    Exactly one member per column; for a non-zero slope exactly one of them
    lies in the imaginary row.
    """
    _check_group(p, g)
    if info_cols is None:
        info_cols = p
    if not 1 <= info_cols <= p:
        raise ParameterError(f"info_cols {info_cols} out of range for p={p}")
    v, i = g.slope, g.index
    return [Coord(mod_index(i + v * (1 - j), p), j) for j in range(1, info_cols + 1)]


def adjuster_line(p: int, slope: int) -> list[Coord]:
    """The index-0 line of a slope: the cells folded into every parity of
    that slope as its adjuster. Its column-1 cell is imaginary."""
    if slope % p == 0:
        raise ParameterError("slope 0 has no adjuster line")
    return parity_group_members(p, ParityGroupId(slope, 0))


def crossing(p: int, g1: ParityGroupId, g2: ParityGroupId) -> Coord:
    """The unique coordinate shared by two parity lines of different slopes.

    Two lines with distinct slopes mod p meet in exactly one of the p
    columns. The result can sit in the imaginary row (a zero crossing,
    detected by ``row == p``); callers that count transfer savings must
    skip those.
    """
    _check_group(p, g1)
    _check_group(p, g2)
    if (g1.slope - g2.slope) % p == 0:
        raise ParameterError("parity groups of equal slope never cross")
    # index1 + v1*(1-j) == index2 + v2*(1-j)  (mod p), solve for the column j
    diff = mod_inverse(g1.slope - g2.slope, p)
    j = mod_index(1 - (g2.index - g1.index) * diff, p)
    row = mod_index(g1.index + g1.slope * (1 - j), p)
    return Coord(row, j)


def is_zero_crossing_pair(p: int, g1: ParityGroupId, g2: ParityGroupId) -> bool:
    """Whether two lines of distinct slopes meet in the imaginary row.

    The crossing of (v1, i1) and (v2, i2) sits in row (i1*v2 - i2*v1) /
    (v2 - v1) mod p, so it is imaginary exactly when i1*v2 == i2*v1
    (mod p). A slope-0 line with a real index never qualifies: its whole
    line stays in row i1.
    """
    if (g1.slope - g2.slope) % p == 0:
        raise ParameterError("zero-crossing test needs distinct slopes mod p")
    return (g1.index * g2.slope - g2.index * g1.slope) % p == 0


def zero_block(block_size: int) -> np.ndarray:
    return np.zeros(block_size, dtype=np.uint8)


def xor_blocks(blocks: Iterable[np.ndarray]) -> np.ndarray:
    """XOR-fold equal-length byte blocks. Raises on an empty iterable."""
    it = iter(blocks)
    try:
        first = next(it)
    except StopIteration:
        raise ValueError("xor_blocks needs at least one block") from None
    out = np.array(first, dtype=np.uint8, copy=True)
    for b in it:
        arr = np.asarray(b, dtype=np.uint8)
        if arr.shape != out.shape:
            raise ValueError(f"block shape mismatch: {arr.shape} vs {out.shape}")
        out ^= arr
    return out
