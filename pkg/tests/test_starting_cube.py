from __future__ import annotations

import numpy as np
import pytest

from cubeavoid.cube_core import CubeError, is_latin
from cubeavoid.starting_cube import (
    LayerKind, Octant, Orientation, is_starting_cube, mod_t, octant_of, orientation_of,
    quadrant_of, starting_latin_cube, starting_square,
)


def test_mod_t_maps_into_one_to_t():
    assert [mod_t(x, 3) for x in range(-2, 7)] == [1, 2, 3, 1, 2, 3, 1, 2, 3]


def test_starting_square_t2_by_hand():
    assert starting_square(2).tolist() == [[1, 2, 3, 4], [2, 1, 4, 3], [3, 4, 1, 2], [4, 3, 2, 1]]


@pytest.mark.parametrize("t", range(1, 7))
def test_starting_square_is_latin(t):
    sq = starting_square(t)
    n = 2 * t
    assert (np.sort(sq, 0) == np.arange(1, n + 1)[:, None]).all()
    assert (np.sort(sq, 1) == np.arange(1, n + 1)[None, :]).all()


@pytest.mark.parametrize("t", range(1, 7))
def test_starting_cube_is_latin(t):
    assert is_latin(starting_latin_cube(t))


def test_starting_cube_values_t2():
    L = starting_latin_cube(2)
    # hand evaluation of the octant formulas
    assert L[(1, 1, 1)] == 1
    assert L[(2, 1, 1)] == 2
    assert L[(1, 1, 3)] == 3
    assert L[(3, 3, 3)] == 3
    assert L[(1, 3, 1)] == 3
    assert L[(3, 1, 1)] == 3


@pytest.mark.parametrize("t", [2, 3, 4])
def test_octant_symbol_classes(t):
    L = starting_latin_cube(t)
    n = 2 * t
    for c in np.ndindex(n, n, n):
        cell = tuple(x + 1 for x in c)
        cls = 1 if L[cell] <= t else 2
        assert cls == octant_of(cell, t).symbol_class


def test_octant_cases_and_orientation():
    assert Octant(False, False, False).case == 1
    assert Octant(True, True, True).case == 6
    assert Octant(False, False, True).case == 8
    assert sorted(Octant(*map(bool, (a, b, c))).case for a in (0, 1) for b in (0, 1) for c in (0, 1)) == list(range(1, 9))
    # opposite octants use different classes
    for o in (Octant(False, False, False), Octant(True, False, False), Octant(False, True, True)):
        assert o.symbol_class != o.opposite().symbol_class
    assert orientation_of((1, 1, 1), 2) is Orientation.MINUS
    assert orientation_of((3, 3, 1), 2) is Orientation.PLUS


@pytest.mark.parametrize("t", [2, 3, 5])
def test_orientation_matches_residue_where_forms_differ(t):
    L = starting_latin_cube(t)
    n = 2 * t
    for c in np.ndindex(n, n, n):
        i, j, k = (x + 1 for x in c)
        plus, minus = mod_t(i - j + k, t), mod_t(j - i + k, t)
        r = mod_t(L[(i, j, k)], t)
        if plus != minus:
            expected = Orientation.PLUS if r == plus else Orientation.MINUS
            assert orientation_of((i, j, k), t) is expected


def test_quadrants():
    q = quadrant_of((1, 3, 4), 2, LayerKind.ROW)
    assert q.layer == 1 and q.quadrant == 4
    assert quadrant_of((3, 1, 1), 2, LayerKind.COLUMN).quadrant == 3
    with pytest.raises(CubeError):
        quadrant_of((5, 1, 1), 2, LayerKind.FILE)


def test_is_starting_cube_and_bad_t():
    assert is_starting_cube(starting_latin_cube(3))
    assert not is_starting_cube(starting_latin_cube(3).with_entries({(1, 1, 1): 2}))
    with pytest.raises(CubeError):
        starting_latin_cube(0)
