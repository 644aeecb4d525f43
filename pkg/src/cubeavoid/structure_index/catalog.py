"""Subcubes, transversal-sets and block families of the starting cube.

Everything is computed once on the coordinates of the starting cube and then
carried through an isotopy by relabelling (:meth:`BlockCatalog.carry`); the
structures of an isotopic cube are the images of the starting ones and are
never recomputed from the image.

Cells are addressed by 0-based flat index ``(i * n + j) * n + k`` in the
arrays.  Only mixed subcubes (one symbol from each class) are catalogued.

Per-cell label arrays use dense ids assigned in order of first appearance in
flat order, so block ``b`` is the one whose smallest cell (in starting
coordinates) comes ``b``-th.  ``symbol_block`` is the exception: it is the
starting-cube symbol minus one.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence

import numpy as np

from ..cube_core import Cell, CubeError, Isotopy, LatinCube, Subcube, cell_of, flat_index, is_latin
from ..starting_cube import starting_latin_cube


class StructureError(CubeError):
    """The cube does not carry the structure the construction relies on."""


# half-block families: (family, member structure, relation used to determine a block)
#   c122 = (i1, j2, k2), c211 = (i2, j1, k1), c222 = (i2, j2, k2) relative to
#   the determining cell (i1, j1, k1) and one of its subcubes.
HALF_BLOCK_FAMILIES = {
    "first half column block": ("half_column", "c122"),
    "second half column block": ("half_column", "c222"),
    "first half transversal block": ("half_transversal", "c122"),
    "second half transversal block": ("half_transversal", "c211"),
    "first half symbol-row block": ("half_symbol_set", "c211"),
    "second half symbol-row block": ("half_symbol_set", "c222"),
}

_CELL_LABELS = (
    "half_column", "half_symbol_set", "half_transversal", "determined_half_transversal",
    "transversal", "row_block", "file_block", "symbol_block",
    "symbol_column_block", "symbol_file_block",
)


def _readonly(a) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.int64) if not isinstance(a, np.ndarray) or a.dtype != bool else np.array(a)
    a.setflags(write=False)
    return a


def _dense(labels: np.ndarray) -> np.ndarray:
    """Relabel to 0..m-1 in order of first appearance."""
    if labels.ndim == 1:
        _, first, inv = np.unique(labels, return_index=True, return_inverse=True)
    else:
        _, first, inv = np.unique(labels, axis=0, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[np.asarray(inv).reshape(-1)]


@dataclass(frozen=True, eq=False)
class BlockCatalog:
    """Structure index of a starting cube, or of an isotopic image via :meth:`carry`.

    Arrays (``N = n**3`` cells, 0-based flat indices):

    ``far``            (N, t)  opposite corner of each mixed subcube through a cell
    ``cell_subcubes``  (N, t)  subcube id for the same slots as ``far``
    ``subcube_cells``  (S, 8)  cells of each subcube in :meth:`Subcube.cells` order
                              of the starting coordinates (positions 0,3,5,6
                              share one symbol, 1,2,4,7 the other)
    ``cell_class``     (N,)    0 if the cell's starting symbol is in S1, else 1
    ``labels``         per-cell ids for half columns, half symbol-sets,
                       half transversal-sets (the one containing the cell and
                       the one it determines), transversal-sets, row blocks,
                       file blocks, symbol blocks, symbol-column and
                       symbol-file blocks
    ``blocks``         half-block family -> block containing each cell
    ``determined``     half-block family -> block determined by each cell
    """

    n: int
    far: np.ndarray
    cell_subcubes: np.ndarray
    subcube_cells: np.ndarray
    cell_class: np.ndarray
    row_high: np.ndarray
    column_high: np.ndarray
    file_high: np.ndarray
    symbol_class: np.ndarray
    labels: dict
    blocks: dict
    determined: dict
    isotopy: Isotopy = field(default=None)  # type: ignore[assignment]

    @property
    def t(self) -> int:
        return self.n // 2

    @property
    def num_subcubes(self) -> int:
        return int(self.subcube_cells.shape[0])

    def __getattr__(self, name: str):
        # labels are reachable as attributes: catalog.row_block etc.
        labels = self.__dict__.get("labels")
        if labels is not None and name in labels:
            return labels[name]
        raise AttributeError(name)

    # -- lookups -----------------------------------------------------------

    def flat(self, cell: Sequence[int]) -> int:
        return flat_index(self.n, cell)

    def cell(self, flat: int) -> Cell:
        return cell_of(self.n, flat)

    def subcubes_at(self, cell: Sequence[int]) -> list[Subcube]:
        """The mixed subcubes through ``cell``, sorted canonically."""
        c = self.flat(cell)
        return sorted(Subcube.spanning(cell, self.cell(f)) for f in self.far[c])

    def half_transversal_members(self, cell: Sequence[int]) -> frozenset:
        """Cells of the half transversal-set determined by ``cell``."""
        return frozenset(self.cell(f) for f in self.far[self.flat(cell)])

    def transversal_cells(self, tid: int) -> frozenset:
        return frozenset(self.cell(f) for f in np.flatnonzero(self.labels["transversal"] == tid))

    def block_of(self, family: str, cell: Sequence[int]) -> int:
        c = self.flat(cell)
        if family in self.blocks:
            return int(self.blocks[family][c])
        return int(self.labels[family][c])

    def counts(self) -> dict:
        """Number of blocks/sets in each family."""
        lab = self.labels
        out = {
            "subcubes": self.num_subcubes,
            "half transversal-sets": int(lab["half_transversal"].max()) + 1,
            "transversal-sets": int(lab["transversal"].max()) + 1,
            "half columns": int(lab["half_column"].max()) + 1,
            "half symbol-sets": int(lab["half_symbol_set"].max()) + 1,
            "row blocks": int(lab["row_block"].max()) + 1,
            "file blocks": int(lab["file_block"].max()) + 1,
            "symbol blocks": int(lab["symbol_block"].max()) + 1,
            "symbol-column blocks": int(lab["symbol_column_block"].max()) + 1,
            "symbol-file blocks": int(lab["symbol_file_block"].max()) + 1,
        }
        for fam, arr in self.blocks.items():
            out[fam + "s"] = int(arr.max()) + 1
        return out

    def memberships(self, cell: Sequence[int]) -> dict:
        """Every structure id the cell belongs to (JSON-friendly)."""
        c = self.flat(cell)
        out = {name: int(arr[c]) for name, arr in self.labels.items()}
        out.update({fam: int(arr[c]) for fam, arr in self.blocks.items()})
        out.update({"determined " + fam: int(arr[c]) for fam, arr in self.determined.items()})
        return out

    # -- isotopy -----------------------------------------------------------

    def positions(self, sigma: Isotopy) -> np.ndarray:
        """Flat image of every flat cell under ``sigma``."""
        n = self.n
        r, c, f, _ = sigma.arrays()
        return ((r[:, None, None] * n + c[None, :, None]) * n + f[None, None, :]).reshape(-1)

    def carry(self, sigma: Isotopy) -> "BlockCatalog":
        """The catalog of ``apply_isotopy(cube, sigma)``, where ``cube`` is this catalog's cube."""
        if sigma.n != self.n:
            raise CubeError("isotopy order does not match catalog")
        pos = self.positions(sigma)
        r, c, f, s = sigma.arrays()

        def cells(a):
            out = np.empty_like(a)
            out[pos] = a
            return _readonly(out)

        def perm(a, p):
            out = np.empty_like(a)
            out[p] = a
            return _readonly(out)

        total = sigma if self.isotopy is None else self.isotopy.then(sigma)
        return replace(
            self,
            far=cells(pos[self.far]),
            cell_subcubes=cells(self.cell_subcubes),
            subcube_cells=_readonly(pos[self.subcube_cells]),
            cell_class=cells(self.cell_class),
            row_high=perm(self.row_high, r),
            column_high=perm(self.column_high, c),
            file_high=perm(self.file_high, f),
            symbol_class=perm(self.symbol_class, s),
            labels={k: cells(v) for k, v in self.labels.items()},
            blocks={k: cells(v) for k, v in self.blocks.items()},
            determined={k: cells(v) for k, v in self.determined.items()},
            isotopy=total,
        )


def build_catalog(cube: LatinCube) -> BlockCatalog:
    """Index every structure of a starting cube.

    The construction completes, for each cell and each column layer ``j2`` in
    the other half, the unique candidate subcube and checks it; a cube lacking
    the starting-cube structure raises :class:`StructureError`.
    """
    n = cube.n
    if n % 2:
        raise StructureError(f"order must be even, got {n}")
    if not is_latin(cube):
        raise StructureError("cube is not Latin")
    t = n // 2
    N = n ** 3
    a = cube.array
    vals = a.reshape(-1)
    I, J, K = (x.reshape(-1) for x in np.indices((n, n, n)))

    col_pos = np.empty((n, n, n), dtype=np.int64)   # [j, k, s] -> i
    col_pos[J, K, vals - 1] = I
    file_pos = np.empty((n, n, n), dtype=np.int64)  # [i, j, s] -> k
    file_pos[I, J, vals - 1] = K

    high = np.arange(n) >= t
    J2 = np.where(high[J][:, None], np.arange(t)[None, :], np.arange(t, n)[None, :])
    I1, J1, K1 = I[:, None], J[:, None], K[:, None]
    x1 = vals[:, None]
    x2 = a[I1, J2, K1]
    I2 = col_pos[J1, K1, x2 - 1]
    K2 = file_pos[I1, J1, x2 - 1]
    ok = (a[I2, J2, K1] == x1) & (a[I1, J2, K2] == x1) & (a[I2, J1, K2] == x1) & (a[I2, J2, K2] == x2)
    if not ok.all():
        bad = cell_of(n, int(np.argwhere(~ok)[0, 0]))
        raise StructureError(f"subcube completion fails at cell {tuple(bad)}")

    far = (I2 * n + J2) * n + K2
    c122 = (I1 * n + J2) * n + K2
    c211 = (I2 * n + J1) * n + K1

    # subcubes, keyed by (min corner, max corner)
    lo = (np.minimum(I1, I2) * n + np.minimum(J1, J2)) * n + np.minimum(K1, K2)
    hi = (np.maximum(I1, I2) * n + np.maximum(J1, J2)) * n + np.maximum(K1, K2)
    keys, cell_subcubes, mult = np.unique((lo * N + hi).reshape(-1), return_inverse=True, return_counts=True)
    if not (mult == 8).all():
        raise StructureError("a subcube is not reached from all eight of its cells")
    cell_subcubes = np.asarray(cell_subcubes).reshape(N, t)
    lo_c, hi_c = keys // N, keys % N
    li, lj, lk = lo_c // (n * n), (lo_c // n) % n, lo_c % n
    hi_, hj, hk = hi_c // (n * n), (hi_c // n) % n, hi_c % n
    subcube_cells = np.stack([
        (ii * n + jj) * n + kk
        for ii, jj, kk in (
            (li, lj, lk), (li, hj, lk), (hi_, lj, lk), (hi_, hj, lk),
            (li, lj, hk), (li, hj, hk), (hi_, lj, hk), (hi_, hj, hk),
        )
    ], axis=1)

    cell_class = (vals > t).astype(np.int64)

    # half transversal-sets: the far corners of a cell form the set it determines
    members = np.sort(far, axis=1)
    sets, det_ht = np.unique(members, axis=0, return_inverse=True)
    det_ht = np.asarray(det_ht).reshape(-1)
    if sets.size != N or len(np.unique(sets)) != N:
        raise StructureError("half transversal-sets do not partition the cells")
    ht = np.empty(N, dtype=np.int64)
    ht[sets] = np.arange(len(sets))[:, None]

    transversal = np.stack([np.minimum(ht, det_ht), np.maximum(ht, det_ht)], axis=1)

    rows = a.transpose(0, 2, 1).reshape(n * n, n)  # row (i, k) -> sequence over j
    files = a.reshape(n * n, n)                      # file (i, j) -> sequence over k
    row_lab = _dense(rows)
    file_lab = _dense(files)

    labels = {
        "half_column": (J * n + K) * 2 + cell_class,
        "half_symbol_set": ((I * 2 + high[J]) * 2 + high[K]) * n + (vals - 1),
        "half_transversal": ht,
        "transversal": transversal,
        "row_block": row_lab[I * n + K],
        "file_block": file_lab[I * n + J],
        "symbol_column_block": a[I, 0, K] - 1,
        "symbol_file_block": a[I, J, 0] - 1,
    }
    labels = {k: _dense(v) for k, v in labels.items()}
    # the set a cell determines, in the same id space as half_transversal
    ht_ids = np.empty(len(sets), dtype=np.int64)
    ht_ids[ht] = labels["half_transversal"]
    labels["determined_half_transversal"] = ht_ids[det_ht]
    labels["symbol_block"] = vals - 1

    relations = {"c122": c122, "c211": c211, "c222": far}
    blocks, determined = {}, {}
    for fam, (member_name, rel) in HALF_BLOCK_FAMILIES.items():
        member = labels[member_name]
        keyset = np.sort(member[relations[rel]], axis=1)
        uniq, det = np.unique(keyset, axis=0, return_inverse=True)
        det = np.asarray(det).reshape(-1)
        if len(np.unique(uniq)) != uniq.size or uniq.size != member.max() + 1:
            raise StructureError(f"{fam}s do not partition the {member_name.replace('_', ' ')}s")
        of_member = np.empty(uniq.size, dtype=np.int64)
        of_member[uniq] = np.arange(len(uniq))[:, None]
        per_cell = of_member[member]
        dense = _dense(per_cell)
        remap = np.empty(len(uniq), dtype=np.int64)
        remap[per_cell] = dense
        blocks[fam] = dense
        determined[fam] = remap[det]

    return BlockCatalog(
        n=n,
        far=_readonly(far),
        cell_subcubes=_readonly(cell_subcubes),
        subcube_cells=_readonly(subcube_cells),
        cell_class=_readonly(cell_class),
        row_high=_readonly(high.astype(np.int64)),
        column_high=_readonly(high.astype(np.int64)),
        file_high=_readonly(high.astype(np.int64)),
        symbol_class=_readonly((np.arange(1, n + 1) > t).astype(np.int64)),
        labels={k: _readonly(v) for k, v in labels.items()},
        blocks={k: _readonly(v) for k, v in blocks.items()},
        determined={k: _readonly(v) for k, v in determined.items()},
        isotopy=Isotopy.identity(n),
    )


@lru_cache(maxsize=8)
def starting_catalog(t: int) -> BlockCatalog:
    """Cached catalog of the starting cube of order ``2t``."""
    return build_catalog(starting_latin_cube(t))


# -- per-cell constructive operations --------------------------------------


@dataclass(frozen=True)
class HalfTransversalSet:
    determining: Cell
    members: frozenset


@dataclass(frozen=True)
class TransversalSet:
    id: int | None
    cells: frozenset


def _halves(cube: LatinCube, catalog: BlockCatalog | None):
    t = cube.n // 2
    if catalog is None:
        h = np.arange(cube.n) >= t
        return h, h, h
    return catalog.row_high.astype(bool), catalog.column_high.astype(bool), catalog.file_high.astype(bool)


def subcubes_through(cell: Sequence[int], cube: LatinCube, catalog: BlockCatalog | None = None) -> list[Subcube]:
    """The ``t`` mixed subcubes through ``cell``, by direct completion.

    For every column layer ``j2`` in the other half from ``cell`` the
    candidate is completed by locating the symbol ``L(i1, j2, k1)`` in the
    column ``C_{j1,k1}`` (giving ``i2``) and in the file ``F_{i1,j1}``
    (giving ``k2``).  Without ``catalog`` the halves are those of the
    starting cube; pass the carried catalog for an isotopic image.
    """
    n = cube.n
    if n % 2:
        raise StructureError("order must be even")
    i1, j1, k1 = cell
    if not all(1 <= x <= n for x in cell):
        raise CubeError(f"cell {tuple(cell)} outside 1..{n}")
    a = cube.array
    _, col_high, _ = _halves(cube, catalog)
    out = []
    for j2 in np.flatnonzero(col_high != col_high[j1 - 1]) + 1:
        x2 = a[i1 - 1, j2 - 1, k1 - 1]
        i2 = int(np.flatnonzero(a[:, j1 - 1, k1 - 1] == x2)[0]) + 1
        k2 = int(np.flatnonzero(a[i1 - 1, j1 - 1, :] == x2)[0]) + 1
        sc = Subcube.spanning((i1, j1, k1), (i2, int(j2), k2))
        if not sc.is_subcube_of(cube):
            raise StructureError(f"completion through {tuple(cell)} with j2={j2} is not a subcube")
        out.append(sc)
    return sorted(out)


def half_transversal_set(cell: Sequence[int], cube: LatinCube, catalog: BlockCatalog | None = None) -> HalfTransversalSet:
    """The far corners of the subcubes through ``cell``."""
    c = Cell(*cell)
    return HalfTransversalSet(c, frozenset(sc.opposite(c) for sc in subcubes_through(c, cube, catalog)))


def transversal_set_of(cell: Sequence[int], cube: LatinCube, catalog: BlockCatalog | None = None) -> TransversalSet:
    """Union of the half set ``cell`` determines and the related half set containing ``cell``."""
    own = half_transversal_set(cell, cube, catalog)
    partner = next(iter(sorted(own.members)))
    related = half_transversal_set(partner, cube, catalog)
    tid = None if catalog is None else int(catalog.labels["transversal"][catalog.flat(cell)])
    return TransversalSet(tid, own.members | related.members)
