from __future__ import annotations

from fractions import Fraction

import mpmath
import numpy as np
import pytest

import cubeavoid.swap_engine as se
from cubeavoid.cube_core import Cell, CubeError, ForbiddenCube, Subcube, apply_isotopy, conflicts, is_latin
from cubeavoid.isotopy_search import PRESETS, Params, conflict_stats, find_good_isotopy
from cubeavoid.oracle import InstanceSpec, generate_instance
from cubeavoid.starting_cube import starting_latin_cube
from cubeavoid.structure_index import starting_catalog
from cubeavoid.swap_engine import (
    BookkeepingViolation, OverloadTracker, PlanEntry, SolveFailed, SwapPlan, SwapPlanFailed,
    apply_plan, build_swap_plan, candidate_passes, lemma2_slack, relative_cells, solve,
)

DESK = PRESETS["desk"]
PAPER = PRESETS["paper"]


def single_conflict(t, cell=(1, 1, 1)):
    L, cat = starting_latin_cube(t), starting_catalog(t)
    A = ForbiddenCube.from_dict(2 * t, {cell: {L[cell]}})
    return L, cat, A, conflict_stats(L, A, cat)


def test_relative_cells():
    rel = relative_cells(Subcube(1, 3, 2, 4, 1, 3), (3, 2, 3))
    assert rel["111"] == (3, 2, 3) and rel["222"] == (1, 4, 1) and rel["211"] == (1, 2, 3)
    assert rel["122"] == (3, 4, 1)
    with pytest.raises(CubeError):
        relative_cells(Subcube(1, 3, 2, 4, 1, 3), (2, 2, 2))


def test_fresh_tracker_passes_every_allowed_candidate():
    L, cat, A, stats = single_conflict(4)
    tr = OverloadTracker(cat, DESK)
    for sc in cat.subcubes_at((1, 1, 1)):
        assert candidate_passes(sc, (1, 1, 1), tr, stats) == (True, "ok")


def test_used_cell_rejected():
    L, cat, A, stats = single_conflict(4)
    sc = cat.subcubes_at((1, 1, 1))[0]
    tr = OverloadTracker(cat, DESK)
    tr.use([cat.flat(relative_cells(sc, (1, 1, 1))["211"])])
    assert candidate_passes(sc, (1, 1, 1), tr, stats) == (False, "(3a) used cell")


def test_file_layer_threshold_boundary():
    L, cat, A, stats = single_conflict(4)
    sc = cat.subcubes_at((1, 1, 1))[0]
    f = cat.flat(relative_cells(sc, (1, 1, 1))["112"])
    tr = OverloadTracker(cat, DESK)
    theta_n2 = int(DESK.theta * 64)
    tr.set_counter("file layer", f, theta_n2 - 1)
    assert candidate_passes(sc, (1, 1, 1), tr, stats)[0]
    tr.set_counter("file layer", f, theta_n2)
    assert candidate_passes(sc, (1, 1, 1), tr, stats) == (False, "(1) overloaded file layer")


def test_other_conflict_inside_candidate_rejected():
    L, cat = starting_latin_cube(4), starting_catalog(4)
    sc = cat.subcubes_at((1, 1, 1))[0]
    other = relative_cells(sc, (1, 1, 1))["222"]
    A = ForbiddenCube.from_dict(8, {(1, 1, 1): {L[(1, 1, 1)]}, other: {L[other]}})
    stats = conflict_stats(L, A, cat)
    assert candidate_passes(sc, (1, 1, 1), OverloadTracker(cat, DESK), stats) == (False, "(3c) conflict cell")


def test_tracker_recount_and_double_use():
    cat = starting_catalog(3)
    tr = OverloadTracker(cat, DESK)
    tr.use([0, 5, 17, 100])
    rc = tr.recount()
    for fam, arr in tr.counters.items():
        assert (rc[fam] == arr).all()
    with pytest.raises(CubeError):
        tr.use([5])


def test_plan_empty_and_single_conflict_example():
    L, cat = starting_latin_cube(2), starting_catalog(2)
    assert len(build_swap_plan(L, ForbiddenCube.empty(4), DESK, cat)) == 0
    A = ForbiddenCube.from_dict(4, {(1, 1, 1): {1}})
    plan = build_swap_plan(L, A, DESK, cat)
    assert [e.subcube for e in plan] == [Subcube(1, 3, 1, 3, 1, 3)]
    assert plan.entries[0].symbols == (1, 3)
    out = apply_plan(L, plan)
    assert is_latin(out) and not conflicts(out, A)
    assert apply_plan(L, SwapPlan()) == L
    with pytest.raises(CubeError, match="stale"):
        apply_plan(out, plan)


def test_apply_plan_rejects_overlap_and_non_subcubes():
    L = starting_latin_cube(2)
    sc = Subcube(1, 3, 1, 3, 1, 3)
    e = PlanEntry(Cell(1, 1, 1), sc, sc.symbols(L))
    with pytest.raises(CubeError, match="overlap"):
        apply_plan(L, SwapPlan((e, e)))
    bogus = Subcube(1, 2, 1, 3, 1, 2)
    with pytest.raises(CubeError, match="not a subcube"):
        apply_plan(L, SwapPlan((PlanEntry(Cell(1, 1, 1), bogus, (1, 2)),)))


def _independent_maxima(plan, n, cat):
    used = np.zeros((n, n, n), dtype=int)
    for c in plan.cells():
        used[c[0] - 1, c[1] - 1, c[2] - 1] += 1
    tr = np.zeros(n * n, int)
    for f in np.flatnonzero(used.reshape(-1)):
        tr[cat.labels["transversal"][f]] += 1
    return {
        "row layer": used.sum((1, 2)).max(), "column layer": used.sum((0, 2)).max(),
        "file layer": used.sum((0, 1)).max(),
        "row": used.sum(1).max(), "column": used.sum(0).max(), "file": used.sum(2).max(),
        "transversal-set": tr.max(),
    }


@pytest.mark.parametrize("seed", [7, 9, 10, 12])
def test_plan_invariants_on_regression_instance(seed):
    A = generate_instance(InstanceSpec(8, 1, seed=seed))
    good = find_good_isotopy(A, DESK, seed=seed)
    plan = build_swap_plan(good.cube, A, DESK, good.catalog, good.stats)
    cells = plan.cells()
    assert len(set(cells)) == 8 * len(plan)
    conf = conflicts(good.cube, A)
    assert sorted(e.conflict for e in plan) == sorted(conf)
    for e in plan:
        assert e.conflict in e.subcube
        assert len(conf.intersection(e.subcube.cells())) == 1
        assert e.subcube in good.catalog.subcubes_at(e.conflict)
    mx = _independent_maxima(plan, 8, good.catalog)
    for fam, v in mx.items():
        assert plan.bookkeeping[fam][0] == v
    out = apply_plan(good.cube, plan)
    assert is_latin(out) and not conflicts(out, A)


def test_stuck_plan_reports_conflict_and_tallies():
    L, cat = starting_latin_cube(2), starting_catalog(2)
    # forbid both swapped symbols at the conflict, so no candidate is allowed
    A = ForbiddenCube.from_dict(4, {(1, 1, 1): {1, 3, 4}}, m=3)
    with pytest.raises(SwapPlanFailed) as info:
        build_swap_plan(L, A, DESK, cat)
    rep = info.value.report
    assert rep["stuck_conflict"] == [1, 1, 1] and rep["candidates"] == 2
    assert rep["eliminations"] == {"not allowed": 2}


def test_bookkeeping_assertion_is_wired(monkeypatch):
    A = generate_instance(InstanceSpec(8, 1, seed=7))
    good = find_good_isotopy(A, DESK, seed=7)
    assert good.stats.total > 0
    monkeypatch.setattr(se, "bookkeeping_caps", lambda p, n: {k: 0 for k in se.LAYER_BLOCKS})
    with pytest.raises(BookkeepingViolation):
        build_swap_plan(good.cube, A, DESK, good.catalog, good.stats)
    plan = build_swap_plan(good.cube, A, DESK, good.catalog, good.stats, check_bounds=False)
    assert len(plan) == good.stats.total


def test_solve_empty_and_blocked():
    res = solve(ForbiddenCube.empty(8), DESK, seed=1)
    assert len(res.plan) == 0
    assert res.cube == apply_isotopy(starting_latin_cube(4), res.isotopy)
    full = ForbiddenCube.from_dict(4, {(2, 2, 2): {1, 2, 3, 4}}, m=4)
    with pytest.raises(SolveFailed, match="forbids every symbol"):
        solve(full, DESK, seed=0)
    with pytest.raises(CubeError):
        solve(ForbiddenCube.empty(5), DESK, seed=0)


def test_solve_deterministic_and_parallel_agrees():
    A = generate_instance(InstanceSpec(16, 1, seed=5))
    a = solve(A, DESK, seed=3)
    b = solve(A, DESK, seed=3)
    c = solve(A, DESK, seed=3, jobs=2)
    assert a.cube == b.cube == c.cube and a.isotopy == b.isotopy == c.isotopy
    assert (a.restart, a.attempt) == (c.restart, c.attempt)


def test_solve_failure_report_aggregates_restarts():
    A = generate_instance(InstanceSpec(8, 2, model="adversarial", seed=1))
    with pytest.raises(SolveFailed) as info:
        solve(A, DESK, seed=0, restarts=2, max_attempts=3, best_effort=False)
    reps = info.value.report["restarts"]
    assert [r["restart"] for r in reps] == [0, 1]
    assert all(r["stage"] in ("isotopy", "plan") for r in reps)


# -- the covering inequality ------------------------------------------------------------

def mp_slack(p, n):
    with mpmath.workdps(60):
        a, k, e, t = (mpmath.mpf(x.numerator) / x.denominator for x in (p.alpha, p.kappa, p.epsilon, p.theta))
        n = mpmath.mpf(n)
        return a * n - 21 * k * n - 7 * e * n - 90 * k / e * n - 24 * t / e * n - 544 * k / t * n - 25


def test_lemma2_positive_example():
    p = Params.from_dict({"alpha": "0.45", "gamma": "0", "kappa": "1e-9", "epsilon": "1e-2", "theta": "1e-5"})
    v = lemma2_slack(p, 10 ** 6)
    assert isinstance(v, Fraction)
    assert 2.9e5 < float(v) < 3.1e5
    assert abs(float(v) - float(mp_slack(p, 10 ** 6))) <= 1e-8 * abs(float(v))


def test_lemma2_paper_params():
    n = 2 * 2 ** 30
    v = lemma2_slack(PAPER, n)
    assert v > 0
    ref = mp_slack(PAPER, n)
    assert abs(float(v) - float(ref)) <= 1e-8 * abs(float(ref))


def test_lemma2_negative_example():
    p = Params.from_dict({"alpha": "0.45", "gamma": "0", "kappa": "0.01", "epsilon": "0.1", "theta": "0.05"})
    assert lemma2_slack(p, 1000) < 0
