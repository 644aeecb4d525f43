"""Ground truth for small orders and random instance generation.

Nothing here uses the starting-cube structure: subcubes are found by
scanning the definition directly and avoidance is decided by plain
backtracking, so these serve as independent checks of the main pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cube_core import Cell, CubeError, ForbiddenCube, Isotopy, LatinCube, Subcube

MAX_BACKTRACK_N = 6

# Fraction of cells that receive a forbidden set in the uniform model when
# none is given.  Chosen by simulation: at this density the desk preset
# solves essentially every instance at n = 8, 16 (m = 1) and n = 32 (m = 2),
# while n = 8 already fails most single restarts at twice the density.
DEFAULT_FILL = 0.1

MODELS = ("uniform", "adversarial")


@dataclass(frozen=True)
class InstanceSpec:
    """A recipe for a random (m,m,m,m)-cube.

    ``uniform``: each cell independently receives, with probability ``fill``,
    up to ``m`` random symbols; a symbol is dropped if it would appear more
    than ``m`` times in a line.  ``adversarial``: every cell gets exactly
    ``m`` symbols and every symbol meets every line exactly ``m`` times
    (``fill`` is ignored).
    """

    n: int
    m: int
    model: str = "uniform"
    seed: int = 0
    fill: float | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise CubeError("n must be positive")
        if not 0 <= self.m <= self.n:
            raise CubeError(f"m must lie in 0..n, got m={self.m} for n={self.n}")
        if self.model not in MODELS:
            raise CubeError(f"unknown model {self.model!r}; choose from {MODELS}")
        if self.fill is not None and not 0 <= self.fill <= 1:
            raise CubeError("fill must lie in [0, 1]")

    @property
    def effective_fill(self) -> float:
        if self.fill is not None:
            return self.fill
        return DEFAULT_FILL


def generate_instance(spec: InstanceSpec) -> ForbiddenCube:
    n, m = spec.n, spec.m
    rng = np.random.default_rng(np.random.SeedSequence([int(spec.seed), n, m, MODELS.index(spec.model)]))
    mask = np.zeros((n, n, n, n), dtype=bool)
    if m == 0:
        return ForbiddenCube(mask, m=0)
    if spec.model == "adversarial":
        i, j, k = np.indices((n, n, n))
        base = (i + j + k) % n
        for d in range(m):
            s = (base + d) % n
            mask[i, j, k, s] = True
        sigma = Isotopy.random(n, rng)
        r, c, f, p = sigma.arrays()
        out = np.zeros_like(mask)
        out[np.ix_(r, c, f, p)] = mask
        return ForbiddenCube(out, m=m)

    row = np.zeros((n, n, n), dtype=np.int64)   # [i, k, s]
    col = np.zeros((n, n, n), dtype=np.int64)   # [j, k, s]
    fil = np.zeros((n, n, n), dtype=np.int64)   # [i, j, s]
    fill = spec.effective_fill
    chosen = rng.random(n ** 3) < fill
    order = rng.permutation(n ** 3)
    for flat in order:
        if not chosen[flat]:
            continue
        i, j, k = flat // (n * n), (flat // n) % n, flat % n
        placed = 0
        for s in rng.permutation(n):
            if placed == m:
                break
            if row[i, k, s] < m and col[j, k, s] < m and fil[i, j, s] < m:
                mask[i, j, k, s] = True
                row[i, k, s] += 1
                col[j, k, s] += 1
                fil[i, j, s] += 1
                placed += 1
    return ForbiddenCube(mask, m=m)


# -- brute-force subcubes -------------------------------------------------------


def brute_subcubes(cube: LatinCube, cell, symbol_class=None) -> list[tuple[Subcube, bool]]:
    """Every subcube through ``cell`` by direct scan, each flagged mixed or not.

    A subcube is mixed when its two symbols fall in different classes; by
    default the classes are ``1..n/2`` and ``n/2+1..n``.
    """
    n = cube.n
    a = cube.array
    i1, j1, k1 = (x - 1 for x in cell)
    if symbol_class is None:
        symbol_class = [0 if s <= n // 2 else 1 for s in range(1, n + 1)]
    x1 = a[i1, j1, k1]
    out = []
    for i2 in range(n):
        if i2 == i1:
            continue
        for j2 in range(n):
            if j2 == j1:
                continue
            for k2 in range(n):
                if k2 == k1:
                    continue
                x2 = a[i1, j2, k1]
                if (a[i2, j1, k1] == x2 and a[i1, j1, k2] == x2 and a[i2, j2, k2] == x2
                        and a[i2, j2, k1] == x1 and a[i2, j1, k2] == x1 and a[i1, j2, k2] == x1):
                    sc = Subcube.spanning(Cell(i1 + 1, j1 + 1, k1 + 1), Cell(i2 + 1, j2 + 1, k2 + 1))
                    out.append((sc, symbol_class[x1 - 1] != symbol_class[x2 - 1]))
    return sorted(out)


# -- backtracking avoidance -------------------------------------------------------


class SearchLimitReached(RuntimeError):
    pass


def backtracking_avoid(A: ForbiddenCube, max_n: int = MAX_BACKTRACK_N,
                       node_limit: int | None = None) -> LatinCube | None:
    """A Latin cube with no conflict against ``A``, or ``None`` when none exists.

    Cells are filled in lexicographic order, each trying its smallest
    admissible symbol first; after every assignment each unfilled cell on the
    same row, column or file must still have an admissible symbol.  ``None``
    is returned only after the whole tree is exhausted.
    """
    n = A.n
    if n > max_n:
        raise CubeError(f"n={n} exceeds the exhaustive bound {max_n}; use the main solver")
    full = (1 << n) - 1
    forb = np.zeros((n, n, n), dtype=np.int64)
    for s in range(n):
        forb |= A.mask[..., s].astype(np.int64) << s
    forb = forb.tolist()
    row = [[0] * n for _ in range(n)]  # [i][k] symbols used
    col = [[0] * n for _ in range(n)]  # [j][k]
    fil = [[0] * n for _ in range(n)]  # [i][j]
    grid = [[[0] * n for _ in range(n)] for _ in range(n)]
    cells = [(i, j, k) for i in range(n) for j in range(n) for k in range(n)]
    filled = [[[False] * n for _ in range(n)] for _ in range(n)]
    nodes = 0

    def free(i, j, k):
        return full & ~(row[i][k] | col[j][k] | fil[i][j] | forb[i][j][k])

    def neighbours_ok(i, j, k):
        for x in range(n):
            if not filled[x][j][k] and not free(x, j, k):
                return False
            if not filled[i][x][k] and not free(i, x, k):
                return False
            if not filled[i][j][x] and not free(i, j, x):
                return False
        return True

    def rec(pos):
        nonlocal nodes
        if pos == len(cells):
            return True
        i, j, k = cells[pos]
        avail = free(i, j, k)
        while avail:
            bit = avail & -avail
            avail ^= bit
            nodes += 1
            if node_limit is not None and nodes > node_limit:
                raise SearchLimitReached(f"more than {node_limit} nodes")
            row[i][k] |= bit
            col[j][k] |= bit
            fil[i][j] |= bit
            filled[i][j][k] = True
            grid[i][j][k] = bit.bit_length()
            if neighbours_ok(i, j, k) and rec(pos + 1):
                return True
            row[i][k] ^= bit
            col[j][k] ^= bit
            fil[i][j] ^= bit
            filled[i][j][k] = False
        return False

    if any(free(*c) == 0 for c in cells):
        return None
    import sys
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, len(cells) + 100))
    try:
        found = rec(0)
    finally:
        sys.setrecursionlimit(limit)
    return LatinCube(np.array(grid, dtype=np.int64)) if found else None
