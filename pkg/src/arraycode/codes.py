"""The five binary MDS array-code families and a generic erasure decoder.

All families live on a grid of byte blocks over a prime ``p``:

* ``evenodd``      (p-1) x (p+2): p data columns, slope-0 and slope-1 parity.
* ``evenodd-ext``  (p-1) x (p+r): p data columns, slopes 0..r-1. MDS is
  guaranteed for r <= 3; r in {4, 5} encode fine but decoding more than 3
  erasures must be requested explicitly.
* ``rdp``          (p-1) x (p+1): p-1 data columns, a row-parity column and a
  diagonal-parity column whose diagonals include the row parity. The
  diagonal through (p, 1) carries no parity block.
* ``xcode``        p x p: rows 1..p-2 hold data, row p-1 holds slope -1
  parity (skipping row p) and row p holds slope +1 parity (skipping row p-1).
* ``star``         (p-1) x (p+3): p data columns, slopes 0, +1 and -1.

Slope-v parity of the evenodd family tree is
``b[i, v] = adjuster(v) XOR sum_j a[<i + v*(1-j)>, j]`` where the adjuster
is the XOR of the index-0 line of that slope and ``adjuster(0) = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from threading import Lock

import numpy as np

from .core import (
    Coord,
    CorruptionError,
    ParameterError,
    ParityGroupId,
    UnrecoverableError,
    adjuster_line,
    is_prime,
    mod_index,
    parity_group_members,
    xor_blocks,
)

__all__ = [
    "Code",
    "CodeGrid",
    "encode",
    "mds_decode",
    "parity_check_equations",
    "random_info",
]

_EVENODD_TREE = ("evenodd", "evenodd-ext", "star")


@dataclass(frozen=True)
class Code:
    """Family tag plus parameters; use the classmethod constructors."""

    family: str
    p: int
    r: int

    @classmethod
    def evenodd(cls, p: int) -> "Code":
        _check_prime(p)
        return cls("evenodd", p, 2)

    @classmethod
    def evenodd_ext(cls, p: int, r: int) -> "Code":
        _check_prime(p)
        if not 2 <= r <= 5:
            raise ParameterError(f"extended code supports r in 2..5, got {r}")
        if r >= p:
            raise ParameterError(f"r={r} needs p > r, got p={p}")
        return cls("evenodd-ext", p, r)

    @classmethod
    def rdp(cls, p: int) -> "Code":
        _check_prime(p)
        return cls("rdp", p, 2)

    @classmethod
    def xcode(cls, p: int) -> "Code":
        _check_prime(p)
        if p < 5:
            raise ParameterError("xcode needs p >= 5")
        return cls("xcode", p, 2)

    @classmethod
    def star(cls, p: int) -> "Code":
        _check_prime(p)
        return cls("star", p, 3)

    @classmethod
    def make(cls, family: str, p: int, r: int | None = None) -> "Code":
        """Build a code from a family name, as the CLI and file headers do."""
        if family == "evenodd":
            return cls.evenodd(p)
        if family == "evenodd-ext":
            return cls.evenodd_ext(p, 3 if r is None else r)
        if family == "rdp":
            return cls.rdp(p)
        if family == "xcode":
            return cls.xcode(p)
        if family == "star":
            return cls.star(p)
        raise ParameterError(f"unknown family {family!r}")

    # -- geometry ---------------------------------------------------------

    @property
    def slopes(self) -> tuple[int, ...]:
        """Parity slopes, in stored parity-column order (evenodd tree only)."""
        if self.family == "evenodd":
            return (0, 1)
        if self.family == "evenodd-ext":
            return tuple(range(self.r))
        if self.family == "star":
            return (0, 1, -1)
        raise ParameterError(f"{self.family} has no slope-indexed parity columns")

    @property
    def n(self) -> int:
        return {"evenodd": self.p + 2, "evenodd-ext": self.p + self.r,
                "rdp": self.p + 1, "xcode": self.p, "star": self.p + 3}[self.family]

    @property
    def k(self) -> int:
        return {"evenodd": self.p, "evenodd-ext": self.p, "rdp": self.p - 1,
                "xcode": self.p - 2, "star": self.p}[self.family]

    @property
    def rows(self) -> int:
        """Stored rows per column."""
        return self.p if self.family == "xcode" else self.p - 1

    @property
    def info_cols(self) -> int:
        """Count of pure-data columns (xcode keeps data in rows instead)."""
        return self.k if self.family != "xcode" else self.p

    @property
    def info_shape(self) -> tuple[int, int]:
        if self.family == "xcode":
            return (self.p - 2, self.p)
        return (self.p - 1, self.k)

    @property
    def total_info_blocks(self) -> int:
        r, c = self.info_shape
        return r * c

    @property
    def erasure_tolerance(self) -> int:
        if self.family == "evenodd-ext":
            return min(self.r, 3)
        return 3 if self.family == "star" else 2

    def parity_col(self, slope: int) -> int:
        """Column holding the parities of a slope (evenodd tree only)."""
        return self.p + 1 + self.slopes.index(slope)

    def systematic_cols(self) -> range:
        return range(1, self.info_cols + 1)


def _check_prime(p: int) -> None:
    if not is_prime(p) or p < 3:
        raise ParameterError(f"p must be an odd prime >= 3, got {p}")


@dataclass
class CodeGrid:
    """An encoded array: ``cells[row-1, col-1]`` is one block (uint8 vector)."""

    code: Code
    cells: np.ndarray  # shape (rows, n, block_size)

    @property
    def block_size(self) -> int:
        return int(self.cells.shape[2])

    def cell(self, coord: Coord) -> np.ndarray:
        if coord.row == self.code.p and self.code.family != "xcode":
            return np.zeros(self.block_size, dtype=np.uint8)
        return self.cells[coord.row - 1, coord.col - 1]

    def set_cell(self, coord: Coord, value: np.ndarray) -> None:
        self.cells[coord.row - 1, coord.col - 1] = value

    def column(self, col: int) -> np.ndarray:
        return self.cells[:, col - 1]

    def copy(self) -> "CodeGrid":
        return CodeGrid(self.code, self.cells.copy())

    def info(self) -> np.ndarray:
        rows, cols = self.code.info_shape
        return self.cells[:rows, :cols]


def random_info(code: Code, block_size: int, rng: np.random.Generator) -> np.ndarray:
    rows, cols = code.info_shape
    return rng.integers(0, 256, size=(rows, cols, block_size), dtype=np.uint8)


# ---------------------------------------------------------------------------
# encoding
# ---------------------------------------------------------------------------

def encode(code: Code, info: np.ndarray) -> CodeGrid:
    """Encode an information array of shape ``code.info_shape + (block,)``."""
    info = np.asarray(info, dtype=np.uint8)
    if info.ndim != 3 or info.shape[:2] != code.info_shape:
        raise ParameterError(
            f"info shape {info.shape} does not match {code.info_shape} + (block,)")
    block = info.shape[2]
    grid = CodeGrid(code, np.zeros((code.rows, code.n, block), dtype=np.uint8))
    if code.family in _EVENODD_TREE:
        _encode_evenodd_tree(code, info, grid)
    elif code.family == "rdp":
        _encode_rdp(code, info, grid)
    else:
        _encode_xcode(code, info, grid)
    return grid


def _line_xor(grid_info: np.ndarray, p: int, coords: list[Coord]) -> np.ndarray:
    """XOR of real (non-imaginary) cells of a line over an info array."""
    block = grid_info.shape[2]
    out = np.zeros(block, dtype=np.uint8)
    for c in coords:
        if c.row != p:
            out ^= grid_info[c.row - 1, c.col - 1]
    return out


def _encode_evenodd_tree(code: Code, info: np.ndarray, grid: CodeGrid) -> None:
    p = code.p
    grid.cells[:, :p] = info
    for v in code.slopes:
        col = code.parity_col(v) - 1
        if v == 0:
            # plain row parity across the data columns
            grid.cells[:, col] = np.bitwise_xor.reduce(info, axis=1)
            continue
        adjuster = _line_xor(info, p, adjuster_line(p, v))
        for i in range(1, p):
            members = parity_group_members(p, ParityGroupId(v, i))
            grid.cells[i - 1, col] = adjuster ^ _line_xor(info, p, members)


def _encode_rdp(code: Code, info: np.ndarray, grid: CodeGrid) -> None:
    p = code.p
    grid.cells[:, : p - 1] = info
    # row parity over the data columns
    grid.cells[:, p - 1] = np.bitwise_xor.reduce(info, axis=1)
    # diagonal parity: the slope-1 line through (i, 1) over columns 1..p,
    # which picks up one row-parity block; the line through (p, 1) is skipped
    left = grid.cells[:, :p]
    for i in range(1, p):
        members = parity_group_members(p, ParityGroupId(1, i))
        grid.cells[i - 1, p] = _line_xor(left, p, members)


def _encode_xcode(code: Code, info: np.ndarray, grid: CodeGrid) -> None:
    p = code.p
    grid.cells[: p - 2] = info
    for c in range(1, p + 1):
        # slope -1 parity covers the line through its own cell (p-1, c),
        # skipping the row-p cell: data member of row r sits in col <c+r+1>
        grid.cells[p - 2, c - 1] = _line_xor(
            info, p, [Coord(r, mod_index(c + r + 1, p)) for r in range(1, p - 1)])
        # slope +1 parity at (p, c) covers the line through the excluded cell
        # (p-1, c): data member of row r sits in col <c-r-1>
        grid.cells[p - 1, c - 1] = _line_xor(
            info, p, [Coord(r, mod_index(c - r - 1, p)) for r in range(1, p - 1)])


# ---------------------------------------------------------------------------
# parity-check equations (shared by the decoder and by tests)
# ---------------------------------------------------------------------------

def parity_check_equations(code: Code) -> list[list[Coord]]:
    """Coordinate sets of stored cells, each XOR-summing to zero.

    Imaginary cells are dropped. Every stored parity block appears in
    exactly one equation together with the cells that define it.
    """
    p = code.p
    eqs: list[list[Coord]] = []
    if code.family in _EVENODD_TREE:
        for v in code.slopes:
            pcol = code.parity_col(v)
            adj = [c for c in adjuster_line(p, v) if c.row != p] if v != 0 else []
            for i in range(1, p):
                members = [c for c in parity_group_members(p, ParityGroupId(v, i))
                           if c.row != p]
                eqs.append([Coord(i, pcol)] + members + adj)
    elif code.family == "rdp":
        for i in range(1, p):
            eqs.append([Coord(i, p)] + [Coord(i, j) for j in range(1, p)])
        for i in range(1, p):
            members = [c for c in parity_group_members(p, ParityGroupId(1, i))
                       if c.row != p]
            eqs.append([Coord(i, p + 1)] + members)
    else:
        for c in range(1, p + 1):
            eqs.append([Coord(p - 1, c)] + [
                Coord(r, mod_index(c + r + 1, p)) for r in range(1, p - 1)])
            eqs.append([Coord(p, c)] + [
                Coord(r, mod_index(c - r - 1, p)) for r in range(1, p - 1)])
    return eqs


# ---------------------------------------------------------------------------
# generic erasure decoding
# ---------------------------------------------------------------------------

_recipe_cache: dict[tuple, dict[Coord, tuple[Coord, ...]]] = {}
_recipe_lock = Lock()


def _solve_recipe(code: Code, erased: tuple[int, ...]) -> dict[Coord, tuple[Coord, ...]]:
    """Express each erased cell as an XOR of surviving cells.

    Gauss-Jordan elimination over GF(2) on the parity-check equations,
    tracking which equations were combined; the surviving-cell lists of the
    combined equations symmetric-difference into the recovery set.
    """
    unknowns: list[Coord] = [Coord(r, c) for c in erased
                             for r in range(1, code.rows + 1)]
    idx = {coord: i for i, coord in enumerate(unknowns)}
    rows: list[tuple[int, set[Coord]]] = []
    for eq in parity_check_equations(code):
        mask = 0
        knowns: set[Coord] = set()
        for coord in eq:
            if coord in idx:
                mask |= 1 << idx[coord]
            else:
                knowns.add(coord)
        if mask:
            rows.append((mask, knowns))

    nu = len(unknowns)
    pivots: dict[int, tuple[int, set[Coord]]] = {}
    for mask, knowns in rows:
        while mask:
            bit = mask & -mask
            if bit in pivots:
                pmask, pknowns = pivots[bit]
                mask ^= pmask
                knowns = knowns ^ pknowns
            else:
                pivots[bit] = (mask, knowns)
                break
    if len(pivots) < nu:
        raise UnrecoverableError(
            f"erasure pattern {sorted(erased)} is not decodable for {code.family} p={code.p}")
    # back-substitute so every pivot row holds a single unknown
    for bit in sorted(pivots, reverse=True):
        mask, knowns = pivots[bit]
        rest = mask ^ bit
        while rest:
            b2 = rest & -rest
            m2, k2 = pivots[b2]
            mask ^= m2
            knowns = knowns ^ k2
            rest = mask ^ bit
        pivots[bit] = (mask, knowns)
    return {unknowns[_bit_index(bit)]: tuple(sorted(knowns))
            for bit, (_, knowns) in pivots.items()}


def _bit_index(bit: int) -> int:
    return bit.bit_length() - 1


def decode_recipe(code: Code, erased: tuple[int, ...]) -> dict[Coord, tuple[Coord, ...]]:
    key = (code.family, code.p, code.r, tuple(sorted(erased)))
    with _recipe_lock:
        recipe = _recipe_cache.get(key)
    if recipe is None:
        recipe = _solve_recipe(code, tuple(sorted(erased)))
        with _recipe_lock:
            _recipe_cache.setdefault(key, recipe)
    return recipe


def mds_decode(code: Code, grid: CodeGrid, erased: list[int] | tuple[int, ...],
               *, allow_unchecked: bool = False) -> CodeGrid:
    """Rebuild erased columns from the surviving ones.

    ``grid`` supplies the surviving columns (erased ones are ignored). The
    repaired grid is re-encoded and compared against every surviving block;
    any mismatch raises :class:`CorruptionError`.

    Patterns beyond the family's proven tolerance are refused unless
    ``allow_unchecked`` is set (extended codes with r > 3); the generic
    solver then decides solvability case by case.
    """
    erased = tuple(sorted(set(erased)))
    if not erased:
        return grid.copy()
    if any(not 1 <= c <= code.n for c in erased):
        raise ParameterError(f"erased columns {erased} out of range 1..{code.n}")
    limit = code.erasure_tolerance
    if allow_unchecked and code.family == "evenodd-ext":
        limit = code.r
    if len(erased) > limit:
        raise UnrecoverableError(
            f"{len(erased)} erasures exceed the supported tolerance {limit}")
    recipe = decode_recipe(code, erased)
    out = grid.copy()
    for col in erased:
        out.cells[:, col - 1] = 0
    for coord, sources in recipe.items():
        if sources:
            out.set_cell(coord, xor_blocks(grid.cell(c) for c in sources))
        else:
            out.set_cell(coord, np.zeros(grid.block_size, dtype=np.uint8))
    reencoded = encode(code, out.info())
    live = [c for c in range(1, code.n + 1) if c not in erased]
    for col in live:
        if not np.array_equal(reencoded.column(col), grid.column(col)):
            raise CorruptionError(f"surviving column {col} is inconsistent")
    return reencoded
