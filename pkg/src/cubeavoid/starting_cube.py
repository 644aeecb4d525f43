"""The starting Latin square and starting Latin cube of order ``n = 2t``.

Both are built from the reduced residue ``mod_t``, which maps into ``1..t``
rather than ``0..t-1``.  Coordinates split into a low half ``1..t`` and a
high half ``t+1..n``; the three half-flags of a cell pick one of eight
octants, and each octant uses one of the two symbol classes
``S1 = {1..t}`` and ``S2 = {t+1..n}``.
"""

from __future__ import annotations

from enum import Enum
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .cube_core import CubeError, LatinCube


def mod_t(x, t: int):
    """Residue of ``x`` modulo ``t`` in ``1..t`` (so multiples of ``t`` give ``t``).

    Works elementwise on numpy arrays.
    """
    return (x - 1) % t + 1


def _check_t(t: int) -> None:
    if not isinstance(t, (int, np.integer)) or t < 1:
        raise CubeError(f"half order t must be a positive integer, got {t!r}")


def starting_square(t: int) -> np.ndarray:
    """The ``2t x 2t`` starting Latin square (read-only array, 1-based symbols)."""
    _check_t(t)
    n = 2 * t
    i, j = np.indices((n, n)) + 1
    lo_i, lo_j = i <= t, j <= t
    out = np.where(
        lo_i & lo_j, mod_t(j - i + 1, t),
        np.where(~lo_i & ~lo_j, mod_t(i - j + 1, t),
                 np.where(lo_i & ~lo_j, mod_t(j - i + 1, t) + t, mod_t(i - j + 1, t) + t)),
    )
    out.setflags(write=False)
    return out


class Orientation(Enum):
    PLUS = "plus"    # symbol residue i - j + k
    MINUS = "minus"  # symbol residue j - i + k


# Octant case list in the order of the defining formula; each entry is
# (high_i, high_j, high_k).  Cases 1-4 use S1, cases 5-8 use S2.
_CASES = (
    (False, False, False),
    (True, False, True),
    (True, True, False),
    (False, True, True),
    (False, True, False),
    (True, True, True),
    (True, False, False),
    (False, False, True),
)
_CASE_ORIENTATION = (
    Orientation.MINUS, Orientation.MINUS, Orientation.PLUS, Orientation.PLUS,
    Orientation.MINUS, Orientation.MINUS, Orientation.PLUS, Orientation.PLUS,
)


class Octant(NamedTuple):
    high_i: bool
    high_j: bool
    high_k: bool

    @property
    def case(self) -> int:
        return _CASES.index(tuple(self)) + 1

    @property
    def symbol_class(self) -> int:
        """1 for ``S1``, 2 for ``S2``."""
        return 1 if self.case <= 4 else 2

    @property
    def orientation(self) -> Orientation:
        return _CASE_ORIENTATION[self.case - 1]

    def opposite(self) -> "Octant":
        return Octant(not self.high_i, not self.high_j, not self.high_k)

    def name(self) -> str:
        return "(" + ",".join("high" if h else "low" for h in self) + ")"


def _check_cell(cell: Sequence[int], t: int) -> None:
    n = 2 * t
    if len(cell) != 3 or not all(1 <= x <= n for x in cell):
        raise CubeError(f"cell {tuple(cell)} outside 1..{n}")


def octant_of(cell: Sequence[int], t: int) -> Octant:
    _check_t(t)
    _check_cell(cell, t)
    i, j, k = cell
    return Octant(i > t, j > t, k > t)


def orientation_of(cell: Sequence[int], t: int) -> Orientation:
    """Which residue form the starting cube uses at ``cell``.

    Decided by the octant case, never by the symbol value: for small ``t``
    both residues can coincide numerically.
    """
    return octant_of(cell, t).orientation


class LayerKind(Enum):
    ROW = "row"
    COLUMN = "column"
    FILE = "file"


class QuadrantId(NamedTuple):
    kind: LayerKind
    layer: int
    quadrant: int  # 1..4


def quadrant_of(cell: Sequence[int], t: int, kind: LayerKind) -> QuadrantId:
    """Quadrant of ``cell`` inside its layer of the given kind.

    The quadrant index is ``1 + 2*high_a + high_b`` where ``a, b`` are the
    two free coordinates of the layer in ``(i, j, k)`` order; opposite
    quadrants have indices summing to 5.
    """
    _check_t(t)
    _check_cell(cell, t)
    i, j, k = cell
    if kind is LayerKind.ROW:
        layer, a, b = i, j, k
    elif kind is LayerKind.COLUMN:
        layer, a, b = j, i, k
    else:
        layer, a, b = k, i, j
    return QuadrantId(kind, layer, 1 + 2 * (a > t) + (b > t))


@lru_cache(maxsize=16)
def _starting_array(t: int) -> np.ndarray:
    n = 2 * t
    i, j, k = np.indices((n, n, n)) + 1
    hi, hj, hk = i > t, j > t, k > t
    minus_case = (~hi & ~hj & ~hk) | (hi & ~hj & hk) | (~hi & hj & ~hk) | (hi & hj & hk)
    base = np.where(minus_case, mod_t(j - i + k, t), mod_t(i - j + k, t))
    # an odd number of high coordinates selects S2
    out = base + np.where(hi ^ hj ^ hk, t, 0)
    out.setflags(write=False)
    return out


def starting_latin_cube(t: int) -> LatinCube:
    """The starting Latin cube of order ``2t``."""
    _check_t(t)
    return LatinCube(_starting_array(int(t)))


def is_starting_cube(cube: LatinCube) -> bool:
    return cube.n % 2 == 0 and cube == starting_latin_cube(cube.n // 2)
