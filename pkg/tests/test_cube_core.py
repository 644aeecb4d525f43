from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cubeavoid.cube_core import (
    EVEN_POSITIONS, ODD_POSITIONS, Cell, CubeError, ForbiddenCube, Isotopy, LatinCube, Subcube,
    apply_isotopy, cell_of, conflict_mask, conflicts, flat_index, is_latin, swap_on,
)
from cubeavoid.starting_cube import starting_latin_cube


def cyclic(n):
    i, j, k = np.indices((n, n, n))
    return LatinCube((i + j + k) % n + 1)


def test_flat_index_roundtrip():
    n = 6
    for f in range(n ** 3):
        assert flat_index(n, cell_of(n, f)) == f
    assert cell_of(4, 0) == Cell(1, 1, 1)


def test_latin_cube_rejects_bad_shapes_and_symbols():
    with pytest.raises(CubeError):
        LatinCube(np.ones((2, 2, 3), dtype=int))
    with pytest.raises(CubeError):
        LatinCube(np.full((2, 2, 2), 3))
    with pytest.raises(CubeError):
        LatinCube(np.zeros((2, 2, 2), dtype=int))


def test_is_latin_detects_repeats():
    L = cyclic(4)
    assert is_latin(L)
    assert not is_latin(L.with_entries({(1, 1, 1): L[(1, 1, 2)]}))


def test_latin_cube_is_immutable():
    L = cyclic(3)
    with pytest.raises(ValueError):
        L.array[0, 0, 0] = 2


def test_forbidden_cube_enforces_line_bounds():
    ok = ForbiddenCube.from_dict(4, {(1, 1, 1): {1}, (2, 1, 1): {2}}, m=1)
    assert ok.at((1, 1, 1)) == {1}
    assert ok.filled_cells() == 2
    with pytest.raises(CubeError):  # symbol 1 twice in column (j=1, k=1)
        ForbiddenCube.from_dict(4, {(1, 1, 1): {1}, (2, 1, 1): {1}}, m=1)
    with pytest.raises(CubeError):  # cell set larger than m
        ForbiddenCube.from_dict(4, {(1, 1, 1): {1, 2}}, m=1)
    loose = ForbiddenCube.from_dict(4, {(1, 1, 1): {1, 2}}, m=1, strict=False)
    assert loose.violations()


def test_forbidden_cube_infers_m_and_serializes_sorted():
    A = ForbiddenCube.from_dict(3, {(1, 2, 3): {3, 1}})
    assert A.m == 2
    assert A.to_lists()[0][1][2] == [1, 3]
    assert ForbiddenCube.from_sets(A.to_lists(), m=A.m) == A


def test_conflicts_order_mismatch_and_everything_forbidden():
    L = starting_latin_cube(2)
    with pytest.raises(CubeError):
        conflicts(L, ForbiddenCube.empty(6))
    everywhere = ForbiddenCube.from_dict(4, {c: {L[c]} for c in np.ndindex(4, 4, 4) for c in [tuple(x + 1 for x in c)]})
    assert len(conflicts(L, everywhere)) == 64
    assert conflicts(L, ForbiddenCube.empty(4)) == set()


def test_symbol_transposition_isotopy():
    idn = Isotopy.identity(4)
    sigma = Isotopy(idn.rows, idn.columns, idn.files, (2, 1, 3, 4))
    assert apply_isotopy(starting_latin_cube(2), sigma)[(1, 1, 1)] == 2
    assert apply_isotopy(starting_latin_cube(2), idn) == starting_latin_cube(2)


def test_conflicts():
    L = starting_latin_cube(2)
    A = ForbiddenCube.from_dict(4, {(1, 1, 1): {1}, (1, 1, 2): {1}})
    assert conflicts(L, A) == {Cell(1, 1, 1)}
    assert conflict_mask(L, A).sum() == 1


def test_subcube_validation_and_cells():
    with pytest.raises(CubeError):
        Subcube(2, 1, 1, 2, 1, 2)
    with pytest.raises(CubeError):
        Subcube(1, 1, 1, 2, 1, 2)
    sc = Subcube(1, 3, 1, 3, 1, 3)
    cells = sc.cells()
    assert len(set(cells)) == 8 and cells[0] == (1, 1, 1) and cells[7] == (3, 3, 3)
    assert sc.opposite((1, 3, 1)) == (3, 1, 3)
    assert (2, 2, 2) not in sc
    assert Subcube.spanning((3, 1, 3), (1, 3, 1)) == sc


def test_subcube_symbols_follow_parity_positions():
    L = starting_latin_cube(2)
    sc = Subcube(1, 3, 1, 3, 1, 3)
    assert sc.is_subcube_of(L)
    x1, x2 = sc.symbols(L)
    vals = [L[c] for c in sc.cells()]
    assert [vals[p] for p in EVEN_POSITIONS] == [x1] * 4
    assert [vals[p] for p in ODD_POSITIONS] == [x2] * 4


def test_swap_is_an_involution_and_keeps_latin():
    L = starting_latin_cube(2)
    sc = Subcube(1, 3, 1, 3, 1, 3)
    S = swap_on(L, sc)
    assert is_latin(S)
    assert S[(1, 1, 1)] == 3 and S[(1, 3, 1)] == 1
    assert swap_on(S, sc) == L
    assert (S.array != L.array).sum() == 8


def test_swap_rejects_non_subcube():
    L = starting_latin_cube(2)
    with pytest.raises(CubeError):
        swap_on(L, Subcube(1, 2, 1, 2, 1, 3))


def test_isotopy_identity_inverse_and_composition(rng):
    a, b = Isotopy.random(6, rng), Isotopy.random(6, rng)
    idn = Isotopy.identity(6)
    assert a.then(a.inverse()) == idn
    assert a.then(idn) == a
    L = cyclic(6)
    assert apply_isotopy(apply_isotopy(L, a), b) == apply_isotopy(L, a.then(b))
    assert Isotopy.from_dict(a.to_dict()) == a
    with pytest.raises(CubeError):
        Isotopy((1, 1, 2), (1, 2, 3), (1, 2, 3), (1, 2, 3))


def test_apply_isotopy_moves_cells_and_renames_symbols():
    L = starting_latin_cube(2)
    sigma = Isotopy((2, 1, 3, 4), (1, 2, 4, 3), (4, 3, 2, 1), (2, 3, 4, 1))
    M = apply_isotopy(L, sigma)
    for c in [(1, 1, 1), (3, 2, 4), (4, 4, 4)]:
        assert M[sigma.map_cell(c)] == sigma.symbols[L[c] - 1]


@given(st.integers(1, 4), st.integers(0, 2 ** 32 - 1))
def test_isotopy_preserves_latin(t, seed):
    sigma = Isotopy.random(2 * t, np.random.default_rng(seed))
    assert is_latin(apply_isotopy(starting_latin_cube(t), sigma))


@pytest.mark.parametrize("t", [2, 3])
def test_swap_preserves_latin_on_every_subcube(t):
    from cubeavoid.structure_index import starting_catalog
    L = starting_latin_cube(t)
    cat = starting_catalog(t)
    for cells in cat.subcube_cells:
        sc = Subcube.spanning(cat.cell(cells[0]), cat.cell(cells[7]))
        assert is_latin(swap_on(L, sc))


def test_isotopy_preserves_latin_1000_times(rng):
    for n in (4, 6, 8):
        L = cyclic(n)
        for _ in range(1000 if n == 4 else 300):
            assert is_latin(apply_isotopy(L, Isotopy.random(n, rng)))
