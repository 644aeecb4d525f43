"""Cover every conflict by disjoint allowed subcubes and swap on them.

Conflicts are handled one at a time in row-major order.  For each one the
subcubes through it are screened by the overload conditions below; a
passing candidate is added to the plan and all eight of its cells are
marked used.  The plan is built in one pass with no backtracking; a stuck
conflict raises :class:`SwapPlanFailed` and :func:`solve` retries on a fresh
isotopy.

Cells inside a candidate are named by where they sit relative to the
conflict ``(i1, j1, k1)``: ``"211"`` is ``(i2, j1, k1)``, ``"122"`` is
``(i1, j2, k2)`` and so on.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cube_core import (
    Cell, CubeError, ForbiddenCube, Isotopy, LatinCube, Subcube, _swapped_array,
    conflicts, flat_index, is_latin,
)
from .isotopy_search import (
    ConflictStats, IsotopySearchFailed, IsotopySearchResult, Params, conflict_stats,
    find_good_isotopy, meets_conditions, parse_exact,
)
from .structure_index import HALF_BLOCK_FAMILIES, BlockCatalog

log = logging.getLogger(__name__)

LAYER_BLOCKS = ("row layer", "column layer", "file layer", "row block", "file block",
                "symbol block", "symbol-column block", "symbol-file block")
HALF_BLOCKS = tuple(HALF_BLOCK_FAMILIES)
LINES = ("row", "column", "file", "transversal-set",
         "row-layer symbol-set", "column-layer symbol-set", "file-layer symbol-set")
HALF_SETS = ("half column", "half transversal-set", "half symbol-set")


def _family_keys(catalog: BlockCatalog) -> dict:
    n = catalog.n
    flats = np.arange(n ** 3)
    I, J, K = flats // (n * n), (flats // n) % n, flats % n
    lab = catalog.labels
    s = lab["symbol_block"]
    keys = {
        "row layer": I, "column layer": J, "file layer": K,
        "row block": lab["row_block"], "file block": lab["file_block"], "symbol block": s,
        "symbol-column block": lab["symbol_column_block"], "symbol-file block": lab["symbol_file_block"],
        "row": I * n + K, "column": J * n + K, "file": I * n + J,
        "transversal-set": lab["transversal"],
        "row-layer symbol-set": I * n + s, "column-layer symbol-set": J * n + s, "file-layer symbol-set": K * n + s,
        "half column": lab["half_column"], "half transversal-set": lab["half_transversal"],
        "half symbol-set": lab["half_symbol_set"],
    }
    keys.update(catalog.blocks)
    return keys


class OverloadTracker:
    """Used-cell counters for every layer, block, line and set family.

    A structure is overloaded once its counter reaches its threshold:
    ``theta n^2`` for layers and blocks, ``theta n^2 / 2`` for half blocks,
    ``epsilon n`` for lines, transversal-sets and symbol-sets, and
    ``epsilon n / 2`` for half columns, half transversal-sets and half
    symbol-sets.
    """

    def __init__(self, catalog: BlockCatalog, params: Params):
        n = catalog.n
        self.n = n
        self.catalog = catalog
        self.params = params
        self.keys = _family_keys(catalog)
        th, ep = params.theta * n * n, params.epsilon * n
        self.thresholds: dict[str, Fraction] = {}
        for name in LAYER_BLOCKS:
            self.thresholds[name] = th
        for name in HALF_BLOCKS:
            self.thresholds[name] = th / 2
        for name in LINES:
            self.thresholds[name] = ep
        for name in HALF_SETS:
            self.thresholds[name] = ep / 2
        # integer counters are overloaded iff counter >= ceil(threshold)
        self.limits = {k: math.ceil(v) for k, v in self.thresholds.items()}
        self.counters = {k: np.zeros(int(v.max()) + 1, dtype=np.int64) for k, v in self.keys.items()}
        self.used = np.zeros(n ** 3, dtype=bool)

    def counter(self, family: str, flat: int) -> int:
        return int(self.counters[family][self.keys[family][flat]])

    def overloaded(self, family: str, flat: int) -> bool:
        return self.counter(family, flat) >= self.limits[family]

    def set_counter(self, family: str, flat: int, value: int) -> None:
        """Force a counter (for tests and what-if probes)."""
        self.counters[family][self.keys[family][flat]] = value

    def use(self, flats: Sequence[int]) -> None:
        flats = np.asarray(flats, dtype=np.int64)
        if self.used[flats].any():
            raise CubeError("cell used twice")
        self.used[flats] = True
        for fam, keys in self.keys.items():
            np.add.at(self.counters[fam], keys[flats], 1)

    def peak_ratio(self, flats: Sequence[int]) -> float:
        """Largest counter/threshold ratio among the structures these cells touch, after adding them."""
        flats = np.asarray(flats, dtype=np.int64)
        worst = 0.0
        for fam, keys in self.keys.items():
            k, c = np.unique(keys[flats], return_counts=True)
            worst = max(worst, float((self.counters[fam][k] + c).max()) / float(self.thresholds[fam]))
        return worst

    def recount(self) -> dict:
        """Counters recomputed from the used flags."""
        u = np.flatnonzero(self.used)
        return {fam: np.bincount(keys[u], minlength=len(self.counters[fam])) for fam, keys in self.keys.items()}

    def maxima(self) -> dict:
        return {fam: int(c.max()) for fam, c in self.counters.items()}


# -- one candidate ------------------------------------------------------------

# every (sub-condition, family, relative cell) overload check, in the order they are reported
_OVERLOAD_CHECKS: list[tuple[str, str, str]] = [
    ("(1)", "row layer", "211"),
    ("(1)", "column layer", "121"),
    ("(1)", "file layer", "112"),
    ("(1)", "row block", "211"),
    ("(1)", "file block", "121"),
    ("(1)", "symbol-column block", "211"),
    ("(1)", "symbol-file block", "121"),
    ("(1)", "symbol block", "121"),
]
_OVERLOAD_CHECKS += [("(1)", fam, x) for fam in HALF_BLOCKS for x in ("121", "221", "112", "212")]
_OVERLOAD_CHECKS += [
    ("(1)", "first half column block", "222"),
    ("(1)", "second half column block", "122"),
    ("(1)", "first half transversal block", "211"),
    ("(1)", "second half transversal block", "122"),
    ("(1)", "first half symbol-row block", "222"),
    ("(1)", "second half symbol-row block", "211"),
    ("(2a)", "row", "211"), ("(2a)", "row", "112"), ("(2a)", "row", "212"),
    ("(2a)", "file", "121"), ("(2a)", "file", "211"), ("(2a)", "file", "221"),
    ("(2a)", "column", "121"), ("(2a)", "column", "112"),
    ("(2a)", "half column", "122"), ("(2a)", "half column", "222"),
    ("(2b)", "transversal-set", "121"), ("(2b)", "transversal-set", "221"),
    ("(2b)", "half transversal-set", "211"), ("(2b)", "half transversal-set", "122"),
    ("(2c)", "file-layer symbol-set", "212"), ("(2c)", "column-layer symbol-set", "221"),
    ("(2c)", "row-layer symbol-set", "221"),
    ("(2d)", "file-layer symbol-set", "121"), ("(2d)", "row-layer symbol-set", "112"),
    ("(2d)", "column-layer symbol-set", "211"),
    ("(2e)", "column-layer symbol-set", "121"), ("(2e)", "file-layer symbol-set", "112"),
    ("(2e)", "half symbol-set", "211"), ("(2e)", "half symbol-set", "222"),
]
_CELL_CHECKS = [("(3a)", ("211", "121", "112")), ("(3b)", ("122", "212", "221")), ("(3c)", ("222",))]


def relative_cells(sc: Subcube, conflict: Sequence[int]) -> dict:
    """The eight cells of ``sc`` keyed by their position relative to ``conflict``."""
    i1, j1, k1 = conflict
    if tuple(conflict) not in sc:
        raise CubeError(f"{tuple(conflict)} is not a cell of {sc}")
    i2 = sc.i2 if sc.i1 == i1 else sc.i1
    j2 = sc.j2 if sc.j1 == j1 else sc.j1
    k2 = sc.k2 if sc.k1 == k1 else sc.k1
    pick = {"1": (i1, j1, k1), "2": (i2, j2, k2)}
    return {a + b + c: Cell(pick[a][0], pick[b][1], pick[c][2])
            for a in "12" for b in "12" for c in "12"}


def candidate_passes(sc: Subcube, conflict: Sequence[int], tracker: OverloadTracker,
                     stats: ConflictStats) -> tuple[bool, str]:
    """Screen one allowed subcube through ``conflict``; the reason names the first failed check."""
    n = tracker.n
    rel = relative_cells(sc, conflict)
    flat = {code: flat_index(n, c) for code, c in rel.items()}
    mask = stats.mask.reshape(-1)
    for label, family, code in _OVERLOAD_CHECKS:
        if tracker.overloaded(family, flat[code]):
            return False, f"{label} overloaded {family}"
    for label, codes in _CELL_CHECKS:
        for code in codes:
            if mask[flat[code]]:
                return False, f"{label} conflict cell"
            if tracker.used[flat[code]]:
                return False, f"{label} used cell"
    return True, "ok"


# -- plans --------------------------------------------------------------------


@dataclass(frozen=True)
class PlanEntry:
    conflict: Cell
    subcube: Subcube
    symbols: tuple  # (symbol at the first corner, the other one) before the swap

    def to_dict(self) -> dict:
        sc = self.subcube
        return {"conflict": list(self.conflict),
                "subcube": [sc.i1, sc.i2, sc.j1, sc.j2, sc.k1, sc.k2],
                "symbols": list(self.symbols)}


@dataclass(frozen=True)
class SwapPlan:
    entries: tuple = ()
    bookkeeping: dict = field(default_factory=dict, compare=False)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def cells(self) -> list:
        return [c for e in self.entries for c in e.subcube.cells()]

    def to_dict(self) -> dict:
        return {"entries": [e.to_dict() for e in self.entries]}


class SwapPlanFailed(RuntimeError):
    def __init__(self, report: dict):
        self.report = report
        super().__init__(
            f"no passing subcube for conflict {report['stuck_conflict']} "
            f"({report['candidates']} candidates, {report['covered']} conflicts covered)"
        )


class BookkeepingViolation(AssertionError):
    """A used-cell cap from the covering argument was exceeded."""


def bookkeeping_caps(params: Params, n: int) -> dict:
    """Caps on used cells per structure once the isotopy meets every sparsity condition."""
    k, th, ep = params.kappa, params.theta, params.epsilon
    caps = {}
    for name in LAYER_BLOCKS:
        caps[name] = 4 * k * n * n + th * n * n + 3
    for name in HALF_BLOCKS:
        caps[name] = 3 * k * n * n / 2 + th * n * n / 2
    for name in LINES:
        caps[name] = 2 * k * n + ep * n + 1
    return caps


def check_bookkeeping(tracker: OverloadTracker) -> dict:
    """Per family: (largest used-cell count, cap, within cap)."""
    caps = bookkeeping_caps(tracker.params, tracker.n)
    mx = tracker.maxima()
    return {fam: (mx[fam], float(cap), mx[fam] <= cap) for fam, cap in caps.items()}


def _candidates(conflict: Cell, catalog: BlockCatalog, stats: ConflictStats) -> list[tuple[Subcube, bool]]:
    c = catalog.flat(conflict)
    out = []
    for sid in catalog.cell_subcubes[c]:
        cells = catalog.subcube_cells[sid]
        sc = Subcube.spanning(catalog.cell(cells[0]), catalog.cell(cells[7]))
        out.append((sc, bool(stats.allowed_subcubes[sid])))
    return sorted(out)


def build_swap_plan(L: LatinCube, A: ForbiddenCube, params: Params, catalog: BlockCatalog,
                    stats: ConflictStats | None = None, check_bounds: bool = True) -> SwapPlan:
    """Pick a disjoint allowed subcube for every conflict of ``L``.

    Among the candidates that pass every check the one keeping the largest
    counter/threshold ratio smallest wins, ties going to the canonical
    subcube order.  When the isotopy conditions hold and ``check_bounds`` is
    set, the final counters are checked against :func:`bookkeeping_caps`.
    """
    n = L.n
    if A.n != n or catalog.n != n:
        raise CubeError(f"dimension mismatch: cube {n}, forbidden {A.n}, catalog {catalog.n}")
    if stats is None:
        stats = conflict_stats(L, A, catalog)
    if params.epsilon * n < 3:
        warnings.warn(f"epsilon*n = {float(params.epsilon * n):g} < 3; the covering argument needs at least 3",
                      stacklevel=2)
    tracker = OverloadTracker(catalog, params)
    entries = []
    todo = stats.conflict_cells()
    for idx, conflict in enumerate(todo):
        conflict = Cell(*conflict)
        best, best_key = None, None
        tally: dict[str, int] = {}
        cands = _candidates(conflict, catalog, stats)
        for sc, allowed in cands:
            if not allowed:
                tally["not allowed"] = tally.get("not allowed", 0) + 1
                continue
            ok, why = candidate_passes(sc, conflict, tracker, stats)
            if not ok:
                tally[why] = tally.get(why, 0) + 1
                continue
            key = (tracker.peak_ratio([catalog.flat(c) for c in sc.cells()]), sc)
            if best_key is None or key < best_key:
                best, best_key = sc, key
        if best is None:
            _assert_caps(tracker, stats, check_bounds)
            raise SwapPlanFailed({
                "stuck_conflict": list(conflict),
                "candidates": len(cands),
                "covered": idx,
                "conflicts": len(todo),
                "eliminations": dict(sorted(tally.items())),
                "bookkeeping": {k: list(v) for k, v in check_bookkeeping(tracker).items()},
            })
        tracker.use([catalog.flat(c) for c in best.cells()])
        entries.append(PlanEntry(conflict, best, best.symbols(L)))

    return SwapPlan(tuple(entries), _assert_caps(tracker, stats, check_bounds))


def _assert_caps(tracker: OverloadTracker, stats: ConflictStats, check_bounds: bool) -> dict:
    # the caps are only promised when the isotopy met every condition
    book = check_bookkeeping(tracker)
    if check_bounds and meets_conditions(stats, tracker.params, tracker.n):
        tripped = {k: v for k, v in book.items() if not v[2]}
        if tripped:
            raise BookkeepingViolation(f"used-cell caps exceeded: {tripped}")
    return book


def apply_plan(L: LatinCube, plan: SwapPlan) -> LatinCube:
    """Swap on every subcube of the plan after checking it still matches ``L``."""
    seen: set = set()
    a = L.array
    for e in plan.entries:
        cells = e.subcube.cells()
        if seen.intersection(cells):
            raise CubeError(f"plan subcubes overlap at {sorted(seen.intersection(cells))[0]}")
        seen.update(cells)
        if not e.subcube.is_subcube_of(L):
            raise CubeError(f"{e.subcube} is not a subcube of the cube")
        if e.subcube.symbols(L) != tuple(e.symbols):
            raise CubeError(f"stale plan entry: {e.subcube} holds {e.subcube.symbols(L)}, planned {tuple(e.symbols)}")
        a = _swapped_array(a, e.subcube)
    return LatinCube(a)


# -- the solver -----------------------------------------------------------------


class SolveFailed(RuntimeError):
    def __init__(self, report: dict):
        self.report = report
        super().__init__(report.get("reason", "solve failed"))


@dataclass(frozen=True, eq=False)
class SolveResult:
    cube: LatinCube
    isotopy: Isotopy
    plan: SwapPlan
    restart: int
    attempt: int
    stats: ConflictStats
    conditions_met: bool


def _one_restart(A: ForbiddenCube, params: Params, seed: int, restart: int, max_attempts: int,
                 best_effort: bool, check_bounds: bool):
    """Returns (SolveResult or None, report)."""
    try:
        found = find_good_isotopy(A, params, seed, max_attempts=max_attempts, restart=restart)
        met = True
    except IsotopySearchFailed as exc:
        if not best_effort:
            return None, {"restart": restart, "stage": "isotopy", **exc.report}
        from .isotopy_search import _try  # the best attempt, rebuilt
        from .structure_index import starting_catalog
        a = exc.report["best_attempt"]
        sigma, cat, cube, stats = _try(A, params, seed, restart, a, starting_catalog(A.n // 2))
        found = IsotopySearchResult(cube, sigma, stats, cat, a)
        met = False
    try:
        plan = build_swap_plan(found.cube, A, params, found.catalog, found.stats, check_bounds=check_bounds)
    except SwapPlanFailed as exc:
        return None, {"restart": restart, "stage": "plan", "attempt": found.attempt,
                      "conditions_met": met, **exc.report}
    out = apply_plan(found.cube, plan)
    return SolveResult(out, found.isotopy, plan, restart, found.attempt, found.stats, met), {
        "restart": restart, "stage": "done"}


def _restart_worker(args):
    return _one_restart(*args)


def solve(A: ForbiddenCube, params: Params, seed: int, restarts: int = 10, max_attempts: int = 100,
          jobs: int = 1, best_effort: bool = True, check_bounds: bool = True) -> SolveResult:
    """Find a Latin cube avoiding ``A``: good isotopy, swap plan, swaps; retry on a fresh isotopy.

    Restart ``r`` draws its isotopies from seeds ``(seed, r, attempt)``.  If no
    isotopy meets every condition and ``best_effort`` is set, the plan is
    attempted on the best one anyway.  Every returned cube has been checked
    to be Latin and conflict-free.  With ``jobs > 1`` restarts run in
    parallel and the lowest successful restart index is returned.
    """
    n = A.n
    if n % 2 or n < 2:
        raise CubeError(f"order must be even and positive, got {n}")
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    full = np.flatnonzero(A.mask.reshape(n ** 3, n).all(1))
    if full.size:
        cell = [x + 1 for x in np.unravel_index(int(full[0]), (n, n, n))]
        raise SolveFailed({"reason": f"cell {tuple(int(x) for x in cell)} forbids every symbol",
                           "cell": [int(x) for x in cell], "restarts": []})
    reports = []
    args = [(A, params, seed, r, max_attempts, best_effort, check_bounds) for r in range(restarts)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            for lo in range(0, restarts, jobs):
                batch = list(ex.map(_restart_worker, args[lo:lo + jobs]))
                for res, rep in batch:
                    if res is not None:
                        return _certify(res, A)
                    reports.append(rep)
    else:
        for a in args:
            res, rep = _one_restart(*a)
            if res is not None:
                return _certify(res, A)
            log.info("restart %d failed at stage %s", rep["restart"], rep["stage"])
            reports.append(rep)
    raise SolveFailed({"reason": f"all {restarts} restarts failed", "restarts": reports})


def _certify(res: SolveResult, A: ForbiddenCube) -> SolveResult:
    if not is_latin(res.cube) or conflicts(res.cube, A):
        # cannot happen for a valid plan; never hand back an unsound cube
        raise SolveFailed({"reason": "internal error: output failed verification", "restarts": []})
    return res


# -- the covering inequality -------------------------------------------------------


def lemma2_slack(params: Params, n) -> Fraction:
    """``a n - 21 k n - 7 e n - 90 k n / e - 24 t n / e - 544 k n / t - 25``, exactly."""
    n = parse_exact(n)
    a, k, e, t = params.alpha, params.kappa, params.epsilon, params.theta
    return a * n - 21 * k * n - 7 * e * n - 90 * k / e * n - 24 * t / e * n - 544 * k / t * n - 25
