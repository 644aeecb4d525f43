"""Search for an isotopy of the starting cube with few, well spread conflicts.

A random quadruple of permutations is drawn per attempt and accepted once the
permuted cube meets the sparsity conditions (every row, column, file,
symbol-set and transversal-set has at most ``kappa*n`` conflicts) and the
richness condition (every cell lies in at least ``alpha*n`` allowed
subcubes).  The counting inequality that guarantees such an isotopy exists
is evaluated by :func:`lemma1_lhs`.
"""

from __future__ import annotations

import ast
import logging
import math
import operator
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from .cube_core import CubeError, ForbiddenCube, Isotopy, LatinCube, Subcube, apply_isotopy, conflict_mask
from .structure_index import BlockCatalog, starting_catalog

log = logging.getLogger(__name__)

# -- parameters -------------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}


def parse_exact(text) -> Fraction:
    """Parse ``"6*2^-27"``, ``"1/2-38*2^-27"``, ``"0.25"`` or a number into an exact Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, (int, np.integer)):
        return Fraction(int(text))
    if isinstance(text, float):
        return Fraction(str(text))
    if not isinstance(text, str):
        raise ValueError(f"cannot parse {text!r} as a number")
    try:
        tree = ast.parse(text.replace("^", "**").strip(), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse {text!r}: {exc.msg}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return Fraction(str(node.value)) if isinstance(node.value, float) else Fraction(node.value)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            lhs, rhs = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Pow):
                if rhs.denominator != 1:
                    raise ValueError(f"non-integer exponent in {text!r}")
                rhs = int(rhs)
            if isinstance(node.op, ast.Div) and rhs == 0:
                raise ValueError(f"division by zero in {text!r}")
            return _BINOPS[type(node.op)](lhs, rhs)
        raise ValueError(f"unsupported expression in {text!r}")

    return ev(tree)


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Params:
    """The five constants of the construction, stored exactly."""

    alpha: Fraction
    gamma: Fraction
    kappa: Fraction
    epsilon: Fraction
    theta: Fraction

    def __post_init__(self) -> None:
        for name in ("alpha", "gamma", "kappa", "epsilon", "theta"):
            v = parse_exact(getattr(self, name))
            object.__setattr__(self, name, v)
            lo_ok = v >= 0 if name == "gamma" else v > 0
            if not (lo_ok and v < 1):
                raise ValueError(f"{name} must lie in {'[0,1)' if name == 'gamma' else '(0,1)'}, got {v}")
        if self.gamma > Fraction(1, 3):
            warnings.warn("gamma above 1/3: no isotopy argument can cover such dense forbidden cubes", stacklevel=3)

    @classmethod
    def from_dict(cls, d: dict) -> "Params":
        unknown = set(d) - {"alpha", "gamma", "kappa", "epsilon", "theta"}
        if unknown:
            raise ValueError(f"unknown parameter(s): {sorted(unknown)}")
        return cls(**{k: parse_exact(v) for k, v in d.items()})

    def to_dict(self) -> dict:
        return {k: _fmt(getattr(self, k)) for k in ("alpha", "gamma", "kappa", "epsilon", "theta")}

    def replace(self, **kw) -> "Params":
        d = {k: getattr(self, k) for k in ("alpha", "gamma", "kappa", "epsilon", "theta")}
        d.update({k: parse_exact(v) for k, v in kw.items()})
        return Params(**d)


PRESETS = {
    # the constants for which the existence proof goes through (at huge n)
    "paper": Params(alpha=parse_exact("1/2-38*2^-27"), gamma=parse_exact("2^-27"),
                    kappa=parse_exact("6*2^-27"), epsilon=parse_exact("2^-6"), theta=parse_exact("2^-13")),
    # desk scale: loose enough to be usable at n <= 64; no guarantee, relies on retries
    "desk": Params(alpha=Fraction(1, 4), gamma=Fraction(1, 16), kappa=Fraction(1, 2),
                   epsilon=Fraction(1, 2), theta=Fraction(1, 2)),
}


def preset(name: str) -> Params:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


# -- allowed subcubes and conflict statistics -------------------------------


def is_allowed(sc: Subcube, cube: LatinCube, forbidden: ForbiddenCube) -> bool:
    """True iff after swapping on ``sc`` none of its eight cells is a conflict."""
    if not sc.is_subcube_of(cube):
        raise CubeError(f"{sc} is not a subcube of the cube")
    x1, x2 = sc.symbols(cube)
    for pos, c in enumerate(sc.cells()):
        after = x2 if pos in (0, 3, 5, 6) else x1
        if after in forbidden.at(c):
            return False
    return True


def allowed_subcubes(cube: LatinCube, forbidden: ForbiddenCube, catalog: BlockCatalog) -> np.ndarray:
    """Boolean per catalogued subcube: allowed or not."""
    mask = forbidden.mask.reshape(cube.n ** 3, cube.n)
    vals = cube.array.reshape(-1)
    sc = catalog.subcube_cells
    x1 = vals[sc[:, 0]]
    x2 = vals[sc[:, 1]]
    even, odd = sc[:, [0, 3, 5, 6]], sc[:, [1, 2, 4, 7]]
    bad = mask[even, (x2 - 1)[:, None]].any(1) | mask[odd, (x1 - 1)[:, None]].any(1)
    return ~bad


@dataclass(frozen=True, eq=False)
class ConflictStats:
    """Exact conflict counters of a cube against a forbidden cube.

    ``rows[i, k]``, ``columns[j, k]`` and ``files[i, j]`` count conflicts on
    each line; ``symbol_sets[kind][layer, s-1]`` counts conflicts among the
    cells of a layer holding symbol ``s``; ``transversal[id]`` counts per
    transversal-set; ``allowed[i, j, k]`` is the number of allowed subcubes
    through each cell (all 0-based).
    """

    n: int
    mask: np.ndarray
    rows: np.ndarray
    columns: np.ndarray
    files: np.ndarray
    symbol_sets: dict
    transversal: np.ndarray
    allowed: np.ndarray
    allowed_subcubes: np.ndarray = field(repr=False)

    @property
    def total(self) -> int:
        return int(self.mask.sum())

    def conflict_cells(self) -> list:
        return [tuple(int(x) + 1 for x in c) for c in np.argwhere(self.mask)]

    def maxima(self) -> dict:
        return {
            "row": int(self.rows.max()),
            "column": int(self.columns.max()),
            "file": int(self.files.max()),
            "symbol-set": int(max(v.max() for v in self.symbol_sets.values())),
            "transversal-set": int(self.transversal.max()),
            "min allowed": int(self.allowed.min()),
        }


def conflict_stats(cube: LatinCube, forbidden: ForbiddenCube, catalog: BlockCatalog) -> ConflictStats:
    """Count conflicts per line, symbol-set and transversal-set, and allowed subcubes per cell.

    ``catalog`` must be carried through the same isotopy that produced ``cube``.
    """
    n = cube.n
    if forbidden.n != n or catalog.n != n:
        raise CubeError(f"dimension mismatch: cube {n}, forbidden {forbidden.n}, catalog {catalog.n}")
    m = conflict_mask(cube, forbidden)
    a = cube.array
    sym = np.zeros((3, n, n), dtype=np.int64)  # [kind, layer, symbol]
    ci, cj, ck = np.nonzero(m)
    s = a[ci, cj, ck] - 1
    np.add.at(sym[0], (ci, s), 1)
    np.add.at(sym[1], (cj, s), 1)
    np.add.at(sym[2], (ck, s), 1)
    tr = np.bincount(catalog.labels["transversal"][m.reshape(-1)], minlength=n * n)
    ok = allowed_subcubes(cube, forbidden, catalog)
    allowed = ok[catalog.cell_subcubes].sum(1).reshape(n, n, n)
    for arr in (m, sym, tr, allowed, ok):
        arr.setflags(write=False)
    return ConflictStats(
        n=n, mask=m,
        rows=m.sum(1), columns=m.sum(0), files=m.sum(2),
        symbol_sets={"row": sym[0], "column": sym[1], "file": sym[2]},
        transversal=tr, allowed=allowed, allowed_subcubes=ok,
    )


def violations(stats: ConflictStats, params: Params, n: int) -> dict:
    """Per condition: (worst value, bound, satisfied)."""
    cap = params.kappa * n
    need = params.alpha * n
    mx = stats.maxima()
    out = {}
    for key, label in (("row", "a"), ("column", "b"), ("file", "c"), ("symbol-set", "d"), ("transversal-set", "e")):
        out[f"({label}) {key}"] = (mx[key], float(cap), mx[key] <= cap)
    out["(f) allowed"] = (mx["min allowed"], float(need), mx["min allowed"] >= need)
    return out


def meets_conditions(stats: ConflictStats, params: Params, n: int) -> bool:
    return all(ok for _, _, ok in violations(stats, params, n).values())


# -- the search -------------------------------------------------------------


class IsotopySearchFailed(RuntimeError):
    """No attempt met the conditions; ``report`` summarizes the best attempt."""

    def __init__(self, report: dict):
        self.report = report
        super().__init__(f"no good isotopy in {report['attempts']} attempts; best: {report['best']}")


@dataclass(frozen=True, eq=False)
class IsotopySearchResult:
    cube: LatinCube
    isotopy: Isotopy
    stats: ConflictStats
    catalog: BlockCatalog
    attempt: int

    def __iter__(self) -> Iterator:
        return iter((self.cube, self.isotopy, self.stats))


def attempt_rng(seed: int, restart: int, attempt: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(restart), int(attempt)]))


def _score(v: dict) -> tuple:
    # fewer failed conditions first, then smallest total overshoot
    failed = sum(not ok for _, _, ok in v.values())
    over = sum(max(0.0, val - bound) if "allowed" not in k else max(0.0, bound - val) for k, (val, bound, _) in v.items())
    return failed, over


def _try(forbidden: ForbiddenCube, params: Params, seed: int, restart: int, attempt: int, base: BlockCatalog):
    n = forbidden.n
    sigma = Isotopy.random(n, attempt_rng(seed, restart, attempt))
    cat = base.carry(sigma)
    cube = apply_isotopy(_base_cube(base), sigma)
    stats = conflict_stats(cube, forbidden, cat)
    return sigma, cat, cube, stats


def _base_cube(base: BlockCatalog) -> LatinCube:
    from .starting_cube import starting_latin_cube
    return starting_latin_cube(base.t)


def _worker(args):
    forbidden, params, seed, restart, attempts = args
    base = starting_catalog(forbidden.n // 2)
    for a in attempts:
        sigma, _, _, stats = _try(forbidden, params, seed, restart, a, base)
        v = violations(stats, params, forbidden.n)
        if all(ok for _, _, ok in v.values()):
            return a, v
    return None, None


def find_good_isotopy(forbidden: ForbiddenCube, params: Params, seed: int, max_attempts: int = 100,
                      restart: int = 0, jobs: int = 1) -> IsotopySearchResult:
    """Draw isotopies until one meets every condition; raise :class:`IsotopySearchFailed` otherwise.

    Attempt ``a`` of restart ``r`` uses the generator seeded by ``(seed, r, a)``,
    so the result depends only on the arguments.  With ``jobs > 1`` the
    attempts are split across processes and the lowest successful attempt
    index wins, which gives the same answer as a serial run.
    """
    n = forbidden.n
    if n % 2:
        raise CubeError(f"order must be even, got {n}")
    if max_attempts < 1:
        raise ValueError("max_attempts must be at least 1")
    base = starting_catalog(n // 2)
    if jobs > 1 and max_attempts > 1:
        chunks = [list(range(j, max_attempts, jobs)) for j in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            found = [a for a, _ in ex.map(_worker, [(forbidden, params, seed, restart, c) for c in chunks]) if a is not None]
        if found:
            a = min(found)
            sigma, cat, cube, stats = _try(forbidden, params, seed, restart, a, base)
            return IsotopySearchResult(cube, sigma, stats, cat, a)
        # fall through to a serial pass for the failure report

    best = None
    for a in range(max_attempts):
        sigma, cat, cube, stats = _try(forbidden, params, seed, restart, a, base)
        v = violations(stats, params, n)
        if all(ok for _, _, ok in v.values()):
            log.debug("isotopy accepted at attempt %d (restart %d)", a, restart)
            return IsotopySearchResult(cube, sigma, stats, cat, a)
        if best is None or _score(v) < _score(best[1]):
            best = (a, v)
    report = {
        "attempts": max_attempts,
        "seed": seed,
        "restart": restart,
        "best_attempt": best[0],
        "best": {k: {"worst": val, "bound": bound, "ok": ok} for k, (val, bound, ok) in best[1].items()},
    }
    raise IsotopySearchFailed(report)


# -- the counting inequality -------------------------------------------------


@dataclass(frozen=True)
class Lemma1Value:
    log_value: float
    log_terms: tuple

    @property
    def value(self) -> float:
        return math.exp(self.log_value) if self.log_value < 709 else math.inf

    @property
    def holds(self) -> bool:
        return self.log_value < 0


def _log_power_over_factorial(log_base: float, e: float) -> float:
    # log(base^e / e!) with the factorial extended by the gamma function
    return (e * log_base if e else 0.0) - math.lgamma(e + 1)


def lemma1_lhs(params: Params, n: int) -> Lemma1Value:
    """Left-hand side of the isotopy counting inequality, in log space.

    ``7 n^2 (gn)^(kn)/(kn)! + 3 n^3 (2gn)^e/e!`` with ``e = (1/2 - a - 2g) n / 3``.
    A zero ``gamma`` makes each term zero unless its exponent is zero.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    a, g, k = params.alpha, params.gamma, params.kappa
    base = Fraction(1, 2) - a - 2 * g
    if base <= 0:
        raise ValueError(f"precondition 1/2 - alpha - 2*gamma > 0 violated (it is {float(base):.6g})")
    e1 = float(k * n)
    e2 = float(base * n / 3)
    terms = []
    for coef, power, e in ((math.log(7) + 2 * math.log(n), g * n, e1),
                           (math.log(3) + 3 * math.log(n), 2 * g * n, e2)):
        if power == 0:
            terms.append(coef - math.lgamma(e + 1) if e == 0 else -math.inf)
        else:
            terms.append(coef + _log_power_over_factorial(math.log(power), e))
    hi = max(terms)
    total = -math.inf if hi == -math.inf else hi + math.log(sum(math.exp(x - hi) for x in terms))
    return Lemma1Value(total, tuple(terms))
