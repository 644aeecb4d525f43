"""Cube containers and the primitive operations on them.

Everything at the public surface is 1-based: cells are ``(i, j, k)`` with
coordinates in ``1..n`` and symbols are ``1..n``.  Storage is a numpy array
indexed 0-based by coordinate that keeps the 1-based symbol values, so
``cube.array[i - 1, j - 1, k - 1] == cube[i, j, k]``.

Lines follow the usual convention: a row ``R_{i,k}`` varies ``j``, a column
``C_{j,k}`` varies ``i`` and a file ``F_{i,j}`` varies ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np


class CubeError(ValueError):
    """Malformed cube data, mismatched orders or an invalid subcube."""


class Cell(NamedTuple):
    i: int
    j: int
    k: int


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def flat_index(n: int, cell: Sequence[int]) -> int:
    """0-based flat index of a 1-based cell."""
    i, j, k = cell
    return ((i - 1) * n + (j - 1)) * n + (k - 1)


def cell_of(n: int, flat: int) -> Cell:
    """Inverse of :func:`flat_index`."""
    flat = int(flat)
    return Cell(flat // (n * n) + 1, (flat // n) % n + 1, flat % n + 1)


@dataclass(frozen=True, eq=False)
class LatinCube:
    """An ``n x n x n`` array of symbols in ``1..n``.

    The container only checks shape and symbol range; use :func:`is_latin`
    to test the Latin property, since verifiers need to load broken cubes.
    """

    array: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.array)
        if a.ndim != 3 or not (a.shape[0] == a.shape[1] == a.shape[2]) or a.shape[0] == 0:
            raise CubeError(f"expected an n x n x n array, got shape {a.shape}")
        if not np.issubdtype(a.dtype, np.integer):
            raise CubeError("cube entries must be integers")
        n = a.shape[0]
        if a.min() < 1 or a.max() > n:
            raise CubeError(f"symbols must lie in 1..{n}")
        object.__setattr__(self, "array", _readonly(a.astype(np.int64)))

    @classmethod
    def from_lists(cls, cells) -> "LatinCube":
        return cls(np.array(cells, dtype=np.int64))

    @property
    def n(self) -> int:
        return int(self.array.shape[0])

    def __getitem__(self, cell: Sequence[int]) -> int:
        i, j, k = cell
        n = self.n
        if not (1 <= i <= n and 1 <= j <= n and 1 <= k <= n):
            raise IndexError(f"cell {tuple(cell)} outside 1..{n}")
        return int(self.array[i - 1, j - 1, k - 1])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LatinCube):
            return NotImplemented
        return bool(np.array_equal(self.array, other.array))

    def __hash__(self) -> int:
        return hash(self.array.tobytes())

    def with_entries(self, updates: dict) -> "LatinCube":
        """Copy of the cube with ``{cell: symbol}`` overrides applied."""
        a = np.array(self.array)
        for (i, j, k), s in updates.items():
            a[i - 1, j - 1, k - 1] = s
        return LatinCube(a)

    def to_lists(self) -> list:
        return self.array.tolist()


class ForbiddenCube:
    """The cube ``A`` of forbidden symbol sets.

    Stored as a boolean mask of shape ``(n, n, n, n)``; ``mask[i, j, k, s]``
    is true when symbol ``s + 1`` is forbidden in cell ``(i+1, j+1, k+1)``.

    With ``strict=True`` (the default) the four ``(m,m,m,m)`` conditions
    are enforced at construction: cell sets of size at most ``m`` and every
    symbol at most ``m`` times per row, column and file.  ``strict=False``
    keeps non-conforming cubes for oracle experiments.
    """

    __slots__ = ("mask", "m", "_hash")

    def __init__(self, mask: np.ndarray, m: int | None = None, strict: bool = True):
        mask = np.asarray(mask, dtype=bool)
        if mask.ndim != 4 or len(set(mask.shape)) != 1 or mask.shape[0] == 0:
            raise CubeError(f"expected an (n, n, n, n) mask, got shape {mask.shape}")
        needed = _min_bound(mask)
        if m is None:
            m = needed
        if m < 0:
            raise CubeError("m must be non-negative")
        if strict and needed > m:
            raise CubeError(f"not an ({m},{m},{m},{m})-cube: " + "; ".join(_violations(mask, m)[:5]))
        self.mask = _readonly(mask)
        self.m = int(m)
        self._hash = None

    @classmethod
    def from_sets(cls, cells, m: int | None = None, strict: bool = True) -> "ForbiddenCube":
        """Build from nested ``cells[i-1][j-1][k-1]`` iterables of symbols."""
        n = len(cells)
        mask = np.zeros((n, n, n, n), dtype=bool)
        for i, plane in enumerate(cells):
            if len(plane) != n:
                raise CubeError("ragged forbidden cube")
            for j, line in enumerate(plane):
                if len(line) != n:
                    raise CubeError("ragged forbidden cube")
                for k, syms in enumerate(line):
                    for s in syms:
                        if not (isinstance(s, (int, np.integer)) and 1 <= s <= n):
                            raise CubeError(f"symbol {s!r} outside 1..{n}")
                        mask[i, j, k, s - 1] = True
        return cls(mask, m=m, strict=strict)

    @classmethod
    def empty(cls, n: int, m: int = 0) -> "ForbiddenCube":
        return cls(np.zeros((n, n, n, n), dtype=bool), m=m)

    @classmethod
    def from_dict(cls, n: int, entries: dict, m: int | None = None, strict: bool = True) -> "ForbiddenCube":
        """Sparse constructor: ``{cell: symbols}`` with every other cell empty."""
        mask = np.zeros((n, n, n, n), dtype=bool)
        for (i, j, k), syms in entries.items():
            for s in syms:
                mask[i - 1, j - 1, k - 1, s - 1] = True
        return cls(mask, m=m, strict=strict)

    @property
    def n(self) -> int:
        return int(self.mask.shape[0])

    def at(self, cell: Sequence[int]) -> frozenset:
        i, j, k = cell
        return frozenset(int(s) + 1 for s in np.flatnonzero(self.mask[i - 1, j - 1, k - 1]))

    def to_lists(self) -> list:
        """Nested lists of sorted symbol lists, ``cells[i-1][j-1][k-1]``."""
        n = self.n
        out = [[[[] for _ in range(n)] for _ in range(n)] for _ in range(n)]
        for i, j, k, s in np.argwhere(self.mask):
            out[i][j][k].append(int(s) + 1)
        return out

    def filled_cells(self) -> int:
        return int(self.mask.any(axis=3).sum())

    def violations(self, m: int | None = None) -> list[str]:
        """Human-readable list of broken ``(m,m,m,m)`` conditions."""
        return _violations(self.mask, self.m if m is None else m)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ForbiddenCube):
            return NotImplemented
        return self.m == other.m and bool(np.array_equal(self.mask, other.mask))

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.m, self.mask.tobytes()))
        return self._hash

    def __repr__(self) -> str:
        return f"ForbiddenCube(n={self.n}, m={self.m}, entries={int(self.mask.sum())})"


def _min_bound(mask: np.ndarray) -> int:
    if not mask.any():
        return 0
    return int(max(mask.sum(axis=3).max(), mask.sum(axis=0).max(), mask.sum(axis=1).max(), mask.sum(axis=2).max()))


def _violations(mask: np.ndarray, m: int) -> list[str]:
    out = []
    for i, j, k in np.argwhere(mask.sum(axis=3) > m):
        out.append(f"(a) cell {(i + 1, j + 1, k + 1)} holds more than {m} symbols")
    # axis 1 varies j: rows R_{i,k}; axis 0 varies i: columns; axis 2 varies k: files
    for i, k, s in np.argwhere(mask.sum(axis=1) > m):
        out.append(f"(b) symbol {s + 1} occurs more than {m} times in row R_{i + 1},{k + 1}")
    for j, k, s in np.argwhere(mask.sum(axis=0) > m):
        out.append(f"(c) symbol {s + 1} occurs more than {m} times in column C_{j + 1},{k + 1}")
    for i, j, s in np.argwhere(mask.sum(axis=2) > m):
        out.append(f"(d) symbol {s + 1} occurs more than {m} times in file F_{i + 1},{j + 1}")
    return out


@dataclass(frozen=True, order=True)
class Subcube:
    """Two row layers, two column layers and two file layers, kept sorted."""

    i1: int
    i2: int
    j1: int
    j2: int
    k1: int
    k2: int

    def __post_init__(self) -> None:
        if not (self.i1 < self.i2 and self.j1 < self.j2 and self.k1 < self.k2):
            raise CubeError(f"subcube coordinates must satisfy i1<i2, j1<j2, k1<k2: {self}")

    @classmethod
    def spanning(cls, a: Sequence[int], b: Sequence[int]) -> "Subcube":
        """The subcube with opposite corners ``a`` and ``b``."""
        (ai, aj, ak), (bi, bj, bk) = a, b
        return cls(min(ai, bi), max(ai, bi), min(aj, bj), max(aj, bj), min(ak, bk), max(ak, bk))

    def cells(self) -> tuple[Cell, ...]:
        """The eight cells; the first four of the even-parity pattern carry one symbol.

        Order: (i1,j1,k1), (i1,j2,k1), (i2,j1,k1), (i2,j2,k1),
        (i1,j1,k2), (i1,j2,k2), (i2,j1,k2), (i2,j2,k2).
        """
        i1, i2, j1, j2, k1, k2 = self.i1, self.i2, self.j1, self.j2, self.k1, self.k2
        return (
            Cell(i1, j1, k1), Cell(i1, j2, k1), Cell(i2, j1, k1), Cell(i2, j2, k1),
            Cell(i1, j1, k2), Cell(i1, j2, k2), Cell(i2, j1, k2), Cell(i2, j2, k2),
        )

    def __contains__(self, cell: object) -> bool:
        try:
            i, j, k = cell  # type: ignore[misc]
        except (TypeError, ValueError):
            return False
        return i in (self.i1, self.i2) and j in (self.j1, self.j2) and k in (self.k1, self.k2)

    def opposite(self, cell: Sequence[int]) -> Cell:
        """The cell of the subcube differing from ``cell`` in all three coordinates."""
        i, j, k = cell
        return Cell(
            self.i2 if i == self.i1 else self.i1,
            self.j2 if j == self.j1 else self.j1,
            self.k2 if k == self.k1 else self.k1,
        )

    def symbols(self, cube: LatinCube) -> tuple[int, int]:
        """``(x1, x2)``: the symbols at ``(i1,j1,k1)`` and ``(i1,j2,k1)``."""
        return cube[self.i1, self.j1, self.k1], cube[self.i1, self.j2, self.k1]

    def is_subcube_of(self, cube: LatinCube) -> bool:
        """The two checkerboard classes of cells each carry one symbol, and they differ."""
        vals = [cube[c] for c in self.cells()]
        x1, x2 = vals[0], vals[1]
        even = (vals[0], vals[3], vals[5], vals[6])
        odd = (vals[1], vals[2], vals[4], vals[7])
        return x1 != x2 and all(v == x1 for v in even) and all(v == x2 for v in odd)

    def disjoint(self, other: "Subcube") -> bool:
        return not (
            {self.i1, self.i2} & {other.i1, other.i2}
            and {self.j1, self.j2} & {other.j1, other.j2}
            and {self.k1, self.k2} & {other.k1, other.k2}
        )


# positions inside Subcube.cells() that carry the symbol of (i1,j1,k1)
EVEN_POSITIONS = (0, 3, 5, 6)
ODD_POSITIONS = (1, 2, 4, 7)


def _check_perm(p: Sequence[int], n: int, name: str) -> tuple[int, ...]:
    p = tuple(int(x) for x in p)
    if sorted(p) != list(range(1, n + 1)):
        raise CubeError(f"{name} is not a permutation of 1..{n}")
    return p


@dataclass(frozen=True)
class Isotopy:
    """Permutations of row layers, column layers, file layers and symbols.

    ``rows[x - 1]`` is the image of row layer ``x``; likewise for the others.
    """

    rows: tuple[int, ...]
    columns: tuple[int, ...]
    files: tuple[int, ...]
    symbols: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.rows)
        for name in ("rows", "columns", "files", "symbols"):
            object.__setattr__(self, name, _check_perm(getattr(self, name), n, name))

    @property
    def n(self) -> int:
        return len(self.rows)

    @classmethod
    def identity(cls, n: int) -> "Isotopy":
        p = tuple(range(1, n + 1))
        return cls(p, p, p, p)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "Isotopy":
        return cls(*(tuple(int(x) + 1 for x in rng.permutation(n)) for _ in range(4)))

    def components(self) -> tuple[tuple[int, ...], ...]:
        return self.rows, self.columns, self.files, self.symbols

    def arrays(self) -> tuple[np.ndarray, ...]:
        """The four permutations as 0-based index arrays."""
        return tuple(np.array(p, dtype=np.int64) - 1 for p in self.components())

    def inverse(self) -> "Isotopy":
        def inv(p):
            out = [0] * len(p)
            for x, y in enumerate(p, start=1):
                out[y - 1] = x
            return tuple(out)

        return Isotopy(*(inv(p) for p in self.components()))

    def then(self, other: "Isotopy") -> "Isotopy":
        """Apply ``self`` first, then ``other``."""
        return Isotopy(*(tuple(q[x - 1] for x in p) for p, q in zip(self.components(), other.components())))

    def map_cell(self, cell: Sequence[int]) -> Cell:
        i, j, k = cell
        return Cell(self.rows[i - 1], self.columns[j - 1], self.files[k - 1])

    def to_dict(self) -> dict:
        return {"rows": list(self.rows), "columns": list(self.columns),
                "files": list(self.files), "symbols": list(self.symbols)}

    @classmethod
    def from_dict(cls, d: dict) -> "Isotopy":
        return cls(tuple(d["rows"]), tuple(d["columns"]), tuple(d["files"]), tuple(d["symbols"]))


def is_latin(cube: LatinCube) -> bool:
    """True iff every row, column and file is a permutation of ``1..n``."""
    a = cube.array
    n = cube.n
    target = np.arange(1, n + 1)
    for axis in range(3):
        s = np.moveaxis(np.sort(a, axis=axis), axis, -1)
        if not np.array_equal(s, np.broadcast_to(target, s.shape)):
            return False
    return True


def conflict_mask(cube: LatinCube, forbidden: ForbiddenCube) -> np.ndarray:
    """Boolean ``(n, n, n)`` array, true where ``cube(i,j,k) in A(i,j,k)``."""
    if cube.n != forbidden.n:
        raise CubeError(f"order mismatch: cube n={cube.n}, forbidden n={forbidden.n}")
    return np.take_along_axis(forbidden.mask, (cube.array - 1)[..., None], axis=3)[..., 0]


def conflicts(cube: LatinCube, forbidden: ForbiddenCube) -> frozenset:
    """The conflict cells of ``cube`` with ``forbidden``."""
    return frozenset(Cell(int(i) + 1, int(j) + 1, int(k) + 1) for i, j, k in np.argwhere(conflict_mask(cube, forbidden)))


def swap_on(cube: LatinCube, sc: Subcube) -> LatinCube:
    """Exchange the two symbols of ``sc``; all other cells are unchanged."""
    if not sc.is_subcube_of(cube):
        raise CubeError(f"{sc} is not a subcube of the given cube")
    return LatinCube(_swapped_array(cube.array, sc))


def _swapped_array(a: np.ndarray, sc: Subcube) -> np.ndarray:
    a = np.array(a)
    ii = np.array([sc.i1, sc.i2]) - 1
    jj = np.array([sc.j1, sc.j2]) - 1
    kk = np.array([sc.k1, sc.k2]) - 1
    block = a[np.ix_(ii, jj, kk)]
    x1, x2 = block[0, 0, 0], block[0, 1, 0]
    a[np.ix_(ii, jj, kk)] = np.where(block == x1, x2, x1)
    return a


def apply_isotopy(cube: LatinCube, sigma: Isotopy) -> LatinCube:
    """``result(t1(i), t2(j), t3(k)) = t4(cube(i, j, k))``."""
    if sigma.n != cube.n:
        raise CubeError(f"isotopy of order {sigma.n} applied to cube of order {cube.n}")
    r, c, f, s = sigma.arrays()
    out = np.empty_like(cube.array)
    out[r[:, None, None], c[None, :, None], f[None, None, :]] = s[cube.array - 1] + 1
    return LatinCube(out)


def iter_cells(n: int) -> Iterator[Cell]:
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            for k in range(1, n + 1):
                yield Cell(i, j, k)


def symbols_of(cube: LatinCube, cells: Iterable[Sequence[int]]) -> list[int]:
    return [cube[c] for c in cells]
