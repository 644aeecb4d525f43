"""Exhaustive checks of the structural properties of the starting cube.

Each check returns a :class:`PropertyResult` with up to a handful of
counterexample cells (1-based).  ``check_properties`` runs them against any
cube together with a catalog (by default the starting catalog of the same
order), which is how corrupted cubes are shown to fail.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Callable, Iterable

import numpy as np

from ..cube_core import LatinCube, cell_of, is_latin
from ..starting_cube import Octant, starting_latin_cube
from .catalog import HALF_BLOCK_FAMILIES, BlockCatalog, StructureError, starting_catalog

MAX_EXHAUSTIVE_T = 4
_MAX_EXAMPLES = 5


@dataclass
class PropertyResult:
    name: str
    passed: bool
    counterexamples: list = field(default_factory=list)
    detail: str = ""

    def __post_init__(self) -> None:
        self.passed = bool(self.passed)

    def line(self) -> str:
        s = f"[{'PASS' if self.passed else 'FAIL'}] {self.name}"
        if self.detail:
            s += f": {self.detail}"
        if self.counterexamples:
            s += f" (e.g. {self.counterexamples[0]})"
        return s


@dataclass
class PropertyReport:
    t: int
    mode: str
    results: list
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def failed(self) -> list:
        return [r for r in self.results if not r.passed]

    def __getitem__(self, name: str) -> PropertyResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def lines(self) -> list[str]:
        return [r.line() for r in self.results]

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "mode": self.mode,
            "passed": self.passed,
            "seconds": round(self.seconds, 3),
            "properties": [asdict(r) for r in self.results],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _cells(n: int, flats: Iterable[int]) -> list:
    out = []
    for f in flats:
        out.append(list(cell_of(n, int(f))))
        if len(out) >= _MAX_EXAMPLES:
            break
    return out


def _result(name: str, bad_flats, n: int, detail: str = "") -> PropertyResult:
    bad = np.unique(np.asarray(list(bad_flats) if not isinstance(bad_flats, np.ndarray) else bad_flats, dtype=np.int64))
    return PropertyResult(name, bad.size == 0, _cells(n, bad), detail)


def _same_partition(a: np.ndarray, b: np.ndarray) -> bool:
    pairs = np.unique(np.stack([a, b], axis=1), axis=0)
    return len(pairs) == len(np.unique(a)) == len(np.unique(b))


# -- layers and 4-cycles -----------------------------------------------------


def _layers(a: np.ndarray):
    """Yield (kind, layer index, square, flat index grid) for every layer."""
    n = a.shape[0]
    flat = np.arange(n ** 3).reshape(n, n, n)
    for x in range(n):
        yield "row", x, a[x, :, :], flat[x, :, :]
        yield "column", x, a[:, x, :], flat[:, x, :]
        yield "file", x, a[:, :, x], flat[:, :, x]


def intercalates(square: np.ndarray) -> list[tuple[int, int, int, int]]:
    """All 2x2 Latin subsquares ``(a1, a2, b1, b2)`` of a square, 0-based, a1<a2, b1<b2."""
    n = square.shape[0]
    out = []
    for a1 in range(n):
        for a2 in range(a1 + 1, n):
            e = square[a1][:, None] == square[a2][None, :]
            hit = e & e.T
            for b1, b2 in zip(*np.nonzero(np.triu(hit, 1))):
                out.append((a1, a2, int(b1), int(b2)))
    return out


def _check_four_cycles(a, cat: BlockCatalog, sample_layers=None) -> list[PropertyResult]:
    n, t = cat.n, cat.t
    N = n ** 3
    cls = cat.symbol_class
    halves = {"row": (cat.column_high, cat.file_high),
              "column": (cat.row_high, cat.file_high),
              "file": (cat.row_high, cat.column_high)}
    mixed_count = {k: np.zeros(N, dtype=np.int64) for k in halves}
    mono_total = 0
    bad_quadrant, bad_pair, bad_meet = [], [], []
    layers = list(_layers(a))
    if sample_layers is not None:
        layers = [layers[i] for i in sample_layers]
    for kind, _, sq, fl in layers:
        ha, hb = halves[kind]
        cycles = intercalates(sq)
        covered = set()
        cyc_cells = []
        for a1, a2, b1, b2 in cycles:
            cells = [int(fl[a1, b1]), int(fl[a1, b2]), int(fl[a2, b1]), int(fl[a2, b2])]
            cyc_cells.append(frozenset(cells))
            if cls[sq[a1, b1] - 1] == cls[sq[a1, b2] - 1]:
                mono_total += 1
                continue
            for c in cells:
                mixed_count[kind][c] += 1
            quads = {ha[a1] * 2 + hb[b1], ha[a1] * 2 + hb[b2], ha[a2] * 2 + hb[b1], ha[a2] * 2 + hb[b2]}
            if len(quads) != 4:
                bad_quadrant.append(cells[0])
            c11, c12, c21, c22 = cells
            covered.update({(c11, c12), (c21, c22), (c11, c21), (c12, c22)})
        # each cell and a cell in the adjacent quadrant along a line lie on one mixed 4-cycle
        for x in range(n):
            for y in range(n):
                for z in range(x + 1, n):
                    if ha[x] != ha[z] and (int(fl[x, y]), int(fl[z, y])) not in covered:
                        bad_pair.append(int(fl[x, y]))
                    if hb[x] != hb[z] and (int(fl[y, x]), int(fl[y, z])) not in covered:
                        bad_pair.append(int(fl[y, x]))
        for p, q in combinations(cyc_cells, 2):
            if len(p & q) not in (0, 1, 4):
                bad_meet.append(min(p & q))
    out = []
    for kind in halves:
        cnt = mixed_count[kind]
        touched = np.zeros(N, dtype=bool)
        for k2, _, _, fl in layers:
            if k2 == kind:
                touched[fl.reshape(-1)] = True
        bad = np.flatnonzero(touched & (cnt != t))
        out.append(_result(f"4-cycles: t mixed 4-cycles per cell in each {kind} layer", bad, n,
                           f"{int(touched.sum())} cells checked"))
    out.append(_result("4-cycles: mixed 4-cycles meet all four quadrants of their layer", bad_quadrant, n))
    out.append(_result("4-cycles: a cell and a line-neighbour in the adjacent quadrant share a 4-cycle", bad_pair, n))
    out.append(_result("4-cycles: two 4-cycles of a layer meet in 0, 1 or 4 cells", bad_meet, n,
                       f"{mono_total} single-class 4-cycles seen"))
    return out


# -- subcubes ---------------------------------------------------------------


def _all_mixed_through(a, cls) -> np.ndarray:
    """Mixed subcubes through each cell, counted over every j2 != j1 (not only the catalogued half)."""
    n = a.shape[0]
    N = n ** 3
    vals = a.reshape(-1)
    I, J, K = (x.reshape(-1) for x in np.indices((n, n, n)))
    col_pos = np.full((n, n, n), -1, dtype=np.int64)
    col_pos[J, K, vals - 1] = I
    file_pos = np.full((n, n, n), -1, dtype=np.int64)
    file_pos[I, J, vals - 1] = K
    count = np.zeros(N, dtype=np.int64)
    for j2 in range(n):
        x1 = vals
        x2 = a[I, j2, K]
        I2 = col_pos[J, K, x2 - 1]
        K2 = file_pos[I, J, x2 - 1]
        valid = (J != j2) & (I2 >= 0) & (K2 >= 0)
        I2c, K2c = np.where(valid, I2, 0), np.where(valid, K2, 0)
        ok = valid & (I2c != I) & (K2c != K)
        ok &= (a[I2c, j2, K] == x1) & (a[I, j2, K2c] == x1) & (a[I2c, J, K2c] == x1) & (a[I2c, j2, K2c] == x2)
        ok &= cls[x1 - 1] != cls[x2 - 1]
        count += ok
    return count


def _check_subcubes(a, cat: BlockCatalog) -> list[PropertyResult]:
    n, t = cat.n, cat.t
    vals = a.reshape(-1)
    cls = cat.symbol_class
    sc = cat.subcube_cells
    v = vals[sc]
    even, odd = v[:, [0, 3, 5, 6]], v[:, [1, 2, 4, 7]]
    valid = (even == even[:, :1]).all(1) & (odd == odd[:, :1]).all(1) & (even[:, 0] != odd[:, 0])
    mixed = cls[even[:, 0] - 1] != cls[odd[:, 0] - 1]
    bad_sc = sc[~(valid & mixed), 0]
    res = [_result("subcubes: every catalogued subcube satisfies the eight equalities with one symbol per class",
                   bad_sc, n, f"{len(sc)} subcubes")]

    count = _all_mixed_through(a, cls)
    res.append(_result("subcubes: each cell lies in exactly t mixed subcubes", np.flatnonzero(count != t), n))

    # distinct subcubes never share two cells, so intersections are 0, 1 or 8 cells
    pairs = np.stack([sc[:, p] * n ** 3 + sc[:, q] for p, q in combinations(range(8), 2)], axis=1)
    pairs = pairs.reshape(-1)
    lo_hi = np.unique(pairs, return_counts=True)
    shared = lo_hi[0][lo_hi[1] > 1] // n ** 3
    res.append(_result("subcubes: two subcubes meet in 0, 1 or 8 cells", shared, n))

    # the far corner sits in the opposite octant and keeps the residue orientation
    flats = np.arange(n ** 3)
    ori = _orientation_flags(cat)
    oct_ = _octant_code(cat)
    far = cat.far
    bad = flats[((oct_[far] != (7 - oct_)[:, None]) | (ori[far] != ori[:, None])).any(1)]
    res.append(_result("subcubes: far corner lies in the opposite octant with the same orientation", bad, n))
    return res


def _class_lists(cat: BlockCatalog) -> list:
    syms = np.arange(1, cat.n + 1)
    return [syms[cat.symbol_class == c].tolist() for c in (0, 1)]


def _octant_code(cat: BlockCatalog) -> np.ndarray:
    n = cat.n
    hi = cat.row_high[:, None, None] * 4 + cat.column_high[None, :, None] * 2 + cat.file_high[None, None, :]
    return np.broadcast_to(hi, (n, n, n)).reshape(-1)


_MINUS = {Octant(*c) for c in [(False, False, False), (True, False, True), (False, True, False), (True, True, True)]}


def _orientation_flags(cat: BlockCatalog) -> np.ndarray:
    code = _octant_code(cat)
    minus = np.array([Octant(bool(c & 4), bool(c & 2), bool(c & 1)) in _MINUS for c in range(8)])
    return minus[code]


# -- transversal-sets -------------------------------------------------------


def _check_transversals(a, cat: BlockCatalog) -> list[PropertyResult]:
    n, t = cat.n, cat.t
    N = n ** 3
    vals = a.reshape(-1)
    ht = cat.labels["half_transversal"]
    dht = cat.labels["determined_half_transversal"]
    far = cat.far
    cls = cat.symbol_class
    flats = np.arange(N)
    res = []

    fsym = vals[far]
    size_ok = np.array([len(set(r)) == t for r in far.tolist()])
    cls_ok = (cls[fsym - 1] == cls[fsym[:, :1] - 1]).all(1)
    classes = _class_lists(cat)
    full_class = np.array([sorted(r) in classes for r in fsym.tolist()])
    res.append(_result("half transversal-sets: t cells whose symbols are exactly S1 or exactly S2",
                       flats[~(size_ok & cls_ok & full_class)], n))
    opposite = cls[fsym[:, 0] - 1] != cls[vals - 1]
    res.append(_result("half transversal-sets: symbols lie in the class opposite to the determining cell",
                       flats[~opposite], n))

    # disjoint: the far sets of two cells are equal or disjoint, and every cell is in one
    same_ht = (ht[far] == ht[far[:, :1]]).all(1)
    counts = np.bincount(ht, minlength=ht.max() + 1)
    res.append(_result("half transversal-sets: distinct sets are disjoint and cover every cell",
                       np.concatenate([flats[~same_ht], flats[counts[ht] != t]]), n,
                       f"{len(counts)} sets"))
    symmetric = (far[far] == flats[:, None, None]).any(2).all(1)
    res.append(_result("half transversal-sets: each member determines a set containing the determining cell",
                       flats[~symmetric], n))
    related = (dht[far] == ht[:, None]).all(1)
    union_syms = np.concatenate([fsym, vals[far[far[:, 0]]]], axis=1)
    n_syms = np.array([len(set(r)) for r in union_syms.tolist()])
    res.append(_result("half transversal-sets: related sets together carry all n symbols",
                       flats[~related | (n_syms != n)], n))

    tr = cat.labels["transversal"]
    tcount = np.bincount(tr)
    order = np.argsort(tr, kind="stable")
    groups = order.reshape(-1, n) if (tcount == n).all() else None
    bad = list(flats[tcount[tr] != n])
    if groups is not None:
        I, J, K = groups // (n * n), (groups // n) % n, groups % n
        for g, ii, jj, kk in zip(groups, I, J, K):
            lines = [ii * n + kk, jj * n + kk, ii * n + jj]
            if len(set(vals[g])) != n or any(len(set(x.tolist())) != n for x in lines):
                bad.append(int(g[0]))
    closed = (tr[far] == tr[:, None]).all(1)
    bad += list(flats[~closed])
    res.append(_result("transversal-sets: n cells, n symbols, no two cells on a common line, closed under subcubes",
                       bad, n, f"{len(tcount)} sets"))
    return res


# -- row, file and symbol blocks -------------------------------------------


def _check_line_blocks(a, cat: BlockCatalog) -> list[PropertyResult]:
    n = cat.n
    N = n ** 3
    flats = np.arange(N)
    I, J, K = (x.reshape(-1) for x in np.indices((n, n, n)))
    res = []
    tr = cat.labels["transversal"]
    for name, lab, line_of, seq in (
        ("row", cat.labels["row_block"], I * n + K, a.transpose(0, 2, 1).reshape(n * n, n)),
        ("file", cat.labels["file_block"], I * n + J, a.reshape(n * n, n)),
    ):
        per_line = np.full(n * n, -1)
        per_line[line_of] = lab
        bad = []
        # well defined per line
        if not (per_line[line_of] == lab).all():
            bad += list(flats[per_line[line_of] != lab])
        sizes = np.bincount(per_line, minlength=n)
        # rows in a block repeat one symbol sequence
        for b in range(per_line.max() + 1):
            members = np.flatnonzero(per_line == b)
            if not (seq[members] == seq[members[0]]).all():
                bad.append(int(members[0]) * n)
        lines = np.arange(n * n).reshape(n, n)  # (i, k) for rows, (i, j) for files
        blk = per_line[lines]
        # uniqueness: across each index of the first or second line coordinate exactly one line of a block
        uniq_first = all(len(set(blk[:, y].tolist())) == n for y in range(n))
        uniq_second = all(len(set(blk[x, :].tolist())) == n for x in range(n))
        detail = f"{per_line.max() + 1} blocks of sizes {sorted(set(sizes.tolist()))}"
        ok = not bad and uniq_first and uniq_second and (sizes == n).all() and per_line.max() + 1 == n
        res.append(PropertyResult(f"{name} blocks: n blocks of n lines, one per layer in each direction",
                                  ok, _cells(n, bad), detail))
        # subcubes: opposite lines of a subcube share a block
        sc = cat.subcube_cells
        l = line_of[sc]
        if name == "row":
            pairs = [(0, 6), (2, 4)]  # R(i1,k1)~R(i2,k2), R(i2,k1)~R(i1,k2)
        else:
            pairs = [(0, 3), (1, 2)]  # F(i1,j1)~F(i2,j2), F(i1,j2)~F(i2,j1)
        badsc = [int(sc[s, 0]) for s in range(len(sc)) if any(per_line[l[s, p]] != per_line[l[s, q]] for p, q in pairs)]
        res.append(_result(f"{name} blocks: opposite {name}s of every subcube share a block", badsc, n))
        # each block splits into n disjoint transversal-sets
        per_block = [len(np.unique(tr[lab == b])) for b in range(lab.max() + 1)]
        inside = len(np.unique(np.stack([tr, lab], 1), axis=0)) == len(np.unique(tr))
        res.append(PropertyResult(f"{name} blocks: each block is a union of exactly n transversal-sets",
                                  inside and all(p == n for p in per_block), [],
                                  f"transversal-sets per block {sorted(set(per_block))}"))

    vals = a.reshape(-1)
    sb = cat.labels["symbol_block"]
    bad = [int(flats[sb == b][0]) for b in range(n) if len(np.unique(vals[sb == b])) != 1 or (sb == b).sum() != n * n]
    res.append(_result("symbol blocks: n blocks of n^2 cells holding one symbol", bad, n))

    for name, lab, layer, fiber in (
        ("symbol-column", cat.labels["symbol_column_block"], J, I * n + K),
        ("symbol-file", cat.labels["symbol_file_block"], K, I * n + J),
    ):
        bad = []
        # constant on each fiber of the layer direction
        key = np.unique(np.stack([fiber, lab], 1), axis=0)
        if len(key) != len(np.unique(fiber)):
            bad += list(flats[:1])
        # every layer meets a block in one symbol, n cells
        pair = np.stack([lab, layer], 1)
        syms = {}
        for c, (b, y) in enumerate(pair.tolist()):
            syms.setdefault((b, y), set()).add(int(vals[c]))
        bad += [int(flats[(lab == b) & (layer == y)][0]) for (b, y), s in syms.items() if len(s) != 1]
        sizes = np.bincount(lab)
        ok = not bad and len(sizes) == n and (sizes == n * n).all()
        word = "column" if name == "symbol-column" else "file"
        res.append(PropertyResult(f"{name} blocks: n blocks; cells of a block in one {word} layer all contain the same symbol",
                                  ok, _cells(n, bad), f"{len(sizes)} blocks"))
    return res


# -- half columns, half symbol-sets and half blocks -------------------------


def _check_halves(a, cat: BlockCatalog) -> list[PropertyResult]:
    n, t = cat.n, cat.t
    N = n ** 3
    vals = a.reshape(-1)
    flats = np.arange(N)
    I, J, K = (x.reshape(-1) for x in np.indices((n, n, n)))
    cls = cat.symbol_class
    res = []

    hc = cat.labels["half_column"]
    classes = _class_lists(cat)
    bad = []
    for h in range(hc.max() + 1):
        m = flats[hc == h]
        syms = sorted(vals[m].tolist())
        if len(m) != t or len(set(zip(J[m], K[m]))) != 1 or syms not in classes:
            bad.append(int(m[0]))
    res.append(_result("half columns: 2n^2 sets of t cells of one column holding S1 or S2", bad, n,
                       f"{hc.max() + 1} half columns"))

    hs = cat.labels["half_symbol_set"]
    ch, fh = cat.column_high, cat.file_high
    bad = []
    for h in range(hs.max() + 1):
        m = flats[hs == h]
        if len(m) != t or len(set(I[m])) != 1 or len(set(vals[m])) != 1 or len(set(zip(ch[J[m]], fh[K[m]]))) != 1:
            bad.append(int(m[0]))
    res.append(_result("half symbol-sets: 2n^2 sets of t same-symbol cells in a quadrant of a row layer", bad, n,
                       f"{hs.max() + 1} half symbol-sets"))

    for fam, (member_name, _rel) in HALF_BLOCK_FAMILIES.items():
        member = cat.labels[member_name]
        blk = cat.blocks[fam]
        det = cat.determined[fam]
        nb = blk.max() + 1
        pairs = np.unique(np.stack([member, blk], 1), axis=0)
        well = len(pairs) == member.max() + 1  # each member in exactly one block
        per_block = np.bincount(pairs[:, 1], minlength=nb)
        ok = well and nb == 4 * n and (per_block == t).all()
        res.append(PropertyResult(f"{fam}s: 4n disjoint blocks of exactly t {member_name.replace('_', ' ')}s",
                                  ok, [], f"{nb} blocks, members per block {sorted(set(per_block.tolist()))}"))
        # a determining cell's related cells all lie in the block it determines
        rel = _relation(cat, _rel)
        bad = flats[(blk[rel] != det[:, None]).any(1)]
        res.append(_result(f"{fam}s: the related cells of a determining cell fill the determined block", bad, n))

    # dualities between families: cells determining one block form one block of the partner family
    b, d = cat.blocks, cat.determined
    dual = (
        ("first half column block", "first half transversal block"),
        ("second half column block", "first half transversal block"),
        ("first half transversal block", "first half column block"),
        ("second half transversal block", "first half column block"),
        ("first half symbol-row block", "second half column block"),
        ("second half symbol-row block", "second half column block"),
    )
    for det_fam, part_fam in dual:
        res.append(PropertyResult(
            f"duality: cells determining one {det_fam} form a {part_fam}",
            _same_partition(d[det_fam], b[part_fam]), [],
        ))
    _ = cls
    return res


def _relation(cat: BlockCatalog, rel: str) -> np.ndarray:
    n = cat.n
    flats = np.arange(n ** 3)
    far = cat.far
    I, J, K = flats // (n * n), (flats // n) % n, flats % n
    I2, J2, K2 = far // (n * n), (far // n) % n, far % n
    if rel == "c222":
        return far
    if rel == "c122":
        return (I[:, None] * n + J2) * n + K2
    if rel == "c211":
        return (I2 * n + J[:, None]) * n + K[:, None]
    raise ValueError(rel)


# -- starting-cube specific -------------------------------------------------


def _check_starting_layout(a, cat: BlockCatalog, sample=None) -> list[PropertyResult]:
    """Octant classes and the co-membership formula of half transversal-sets."""
    n, t = cat.n, cat.t
    N = n ** 3
    vals = a.reshape(-1)
    flats = np.arange(N)
    cls = cat.symbol_class
    code = _octant_code(cat)
    res = []
    bad = []
    octant_cls = {}
    for c in range(8):
        m = flats[code == c]
        s = set(cls[vals[m] - 1].tolist())
        octant_cls[c] = s
        if len(s) != 1:
            bad.append(int(m[0]))
    if not bad:
        bad += [int(flats[code == c][0]) for c in range(8) if octant_cls[c] == octant_cls[7 - c]]
    res.append(_result("octants: each octant uses one symbol class and opposite octants use different ones", bad, n))

    # members c, e of T_h(d): e ∈ T_h(c)'s co-members iff same octant as d and the residue condition holds
    minus = _orientation_flags(cat)
    far = cat.far
    # the residue condition lives on starting coordinates: pull every cell back
    back = cat.isotopy.inverse().arrays() if cat.isotopy is not None else tuple(np.arange(n) for _ in range(4))
    I, J, K = back[0][flats // (n * n)], back[1][(flats // n) % n], back[2][flats % n]
    cand = flats if sample is None else np.asarray(sample)
    bad = []
    for d in cand:
        c = far[d, 0]
        # cells forming a subcube with c
        partners = set(far[c].tolist())
        e = flats[(I != I[c]) & (J != J[c]) & (K != K[c])]
        same = code[e] == code[d]
        di, dj = (I[d] - I[e]) % t, (J[d] - J[e]) % t
        dk = (K[d] - K[e]) % t if minus[d] else (K[e] - K[d]) % t
        formula = (di == dj) & (dj == dk)
        predicted = set(e[same & formula].tolist())
        if predicted != partners:
            bad.append(int(d))
    res.append(_result("half transversal-sets: co-membership follows the octant and residue condition",
                       bad, n, f"{len(cand)} determining cells checked"))
    return res


# -- entry points -----------------------------------------------------------


def check_properties(cube: LatinCube, catalog: BlockCatalog | None = None, sample=None,
                     sample_layers=None) -> list[PropertyResult]:
    """Run every property check against ``cube`` using ``catalog``'s structures."""
    n = cube.n
    if catalog is None:
        catalog = starting_catalog(n // 2)
    a = cube.array
    latin = is_latin(cube)
    bad = []
    if not latin:
        for axis in range(3):
            srt = np.sort(a, axis=axis)
            ok = (srt == np.arange(1, n + 1).reshape([-1 if x == axis else 1 for x in range(3)])).all(axis=axis)
            idx = np.argwhere(~ok)
            if len(idx):
                p, q = idx[0]
                cell = [int(p), int(q)]
                cell.insert(axis, 0)
                bad.append((cell[0] * n + cell[1]) * n + cell[2])
    results = [_result("Latin: every line holds each symbol once", bad, n)]
    if not latin:
        results[0].passed = False
    checks: list[Callable] = [
        lambda: _check_four_cycles(a, catalog, sample_layers),
        lambda: _check_subcubes(a, catalog),
        lambda: _check_transversals(a, catalog),
        lambda: _check_line_blocks(a, catalog),
        lambda: _check_halves(a, catalog),
        lambda: _check_starting_layout(a, catalog, sample),
    ]
    for chk in checks:
        try:
            results.extend(chk())
        except (IndexError, ValueError) as exc:
            results.append(PropertyResult(getattr(chk, "__name__", "check"), False, [], f"check aborted: {exc}"))
    return results


def verify_properties(t: int, max_t: int = MAX_EXHAUSTIVE_T, sample: int | None = None,
                      seed: int = 0, cube: LatinCube | None = None) -> PropertyReport:
    """Check every structural property of the starting cube of order ``2t``.

    Exhaustive for ``t <= max_t``.  Above the bound pass ``sample`` to check a
    random set of that many determining cells and layers instead.  ``cube``
    replaces the cube under test (the structures stay those of the starting
    cube), which is how mutation tests are run.
    """
    if t < 1:
        raise ValueError("t must be positive")
    if t > max_t and sample is None:
        raise ValueError(f"t={t} exceeds the exhaustive bound {max_t}; pass sample=<cells> for a randomized check")
    start = time.perf_counter()
    n = 2 * t
    cube = starting_latin_cube(t) if cube is None else cube
    try:
        catalog = starting_catalog(t)
    except StructureError as exc:
        return PropertyReport(t, "exhaustive", [PropertyResult("catalog construction", False, [], str(exc))])
    cells = layers = None
    mode = "exhaustive"
    if t > max_t:
        rng = np.random.default_rng(seed)
        cells = rng.choice(n ** 3, size=min(sample, n ** 3), replace=False)
        layers = rng.choice(3 * n, size=min(max(3, sample // n), 3 * n), replace=False)
        mode = f"sampled({sample})"
    results = check_properties(cube, catalog, sample=cells, sample_layers=layers)
    return PropertyReport(t, mode, results, time.perf_counter() - start)
