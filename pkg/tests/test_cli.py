from __future__ import annotations

import json

import pytest

from cubeavoid.cli import EXIT_IO, EXIT_OK, EXIT_SOLVE, EXIT_VERIFY, main
from cubeavoid.cube_core import ForbiddenCube
from cubeavoid.cubefile import CubeFile, CubeFileError, read_cube_file, write_cube_file
from cubeavoid.starting_cube import starting_latin_cube


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_solve_verify_roundtrip(tmp_path, capsys):
    inst, sol = tmp_path / "a.json", tmp_path / "l.json"
    assert run(capsys, "gen", "-n", 8, "-m", 1, "--seed", 7, "-o", inst)[0] == EXIT_OK
    A = read_cube_file(inst, "forbidden").cube
    assert A.n == 8 and A.m == 1
    code, out, _ = run(capsys, "solve", inst, "--seed", 7, "-o", sol)
    assert code == EXIT_OK and "plan_size=" in out and "conflicts_after_isotopy=" in out
    code, out, _ = run(capsys, "verify", sol, inst)
    assert code == EXIT_OK and "latin: yes" in out and "conflicts: 0" in out


def test_gen_errors_and_empty(tmp_path, capsys):
    assert run(capsys, "gen", "-n", 8, "-m", 9)[0] == EXIT_IO
    p = tmp_path / "e.json"
    assert run(capsys, "gen", "-n", 8, "-m", 0, "-o", p)[0] == EXIT_OK
    assert not read_cube_file(p).cube.mask.any()
    code, out, err = run(capsys, "solve", p)
    # with the cube on stdout the summary moves to stderr
    assert code == EXIT_OK and "plan_size=0" in err and json.loads(out)["kind"] == "latin"
    with pytest.raises(SystemExit) as info:  # usage error
        main(["gen", "-m", "1"])
    assert info.value.code == EXIT_IO


def test_solve_blocked_cell_exit_2(tmp_path, capsys):
    p = tmp_path / "b.json"
    write_cube_file(p, CubeFile("forbidden", ForbiddenCube.from_dict(4, {(1, 1, 1): {1, 2, 3, 4}}, m=4)))
    code, _, err = run(capsys, "solve", p)
    assert code == EXIT_SOLVE
    assert "forbids every symbol" in json.loads(err)["reason"]


def test_solve_parse_error_exit_1(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{nope")
    assert run(capsys, "solve", p)[0] == EXIT_IO
    assert run(capsys, "solve", tmp_path / "missing.json")[0] == EXIT_IO


def test_verify_conflict_not_latin_and_mismatch(tmp_path, capsys):
    L = starting_latin_cube(2)
    lp, ap = tmp_path / "l.json", tmp_path / "a.json"
    write_cube_file(lp, CubeFile("latin", L))
    write_cube_file(ap, CubeFile("forbidden", ForbiddenCube.from_dict(4, {(1, 1, 1): {L[(1, 1, 1)]}})))
    code, out, _ = run(capsys, "verify", lp, ap)
    assert code == EXIT_VERIFY and "conflicts: 1" in out
    bad = tmp_path / "bad.json"
    d = CubeFile("latin", L).to_dict()
    d["cells"][0][0][0] = d["cells"][0][1][0]
    bad.write_text(json.dumps(d))
    code, out, _ = run(capsys, "verify", bad, ap)
    assert code == EXIT_VERIFY and "not Latin" in out
    other = tmp_path / "o.json"
    write_cube_file(other, CubeFile("forbidden", ForbiddenCube.empty(6)))
    assert run(capsys, "verify", lp, other)[0] == EXIT_IO


def test_inspect_queries(tmp_path, capsys):
    s2, s3 = tmp_path / "s2.json", tmp_path / "s3.json"
    run(capsys, "start", "-n", 4, "-o", s2)
    run(capsys, "start", "-n", 6, "-o", s3)
    code, out, _ = run(capsys, "inspect", s2, "--cell", "1,1,1", "--what", "subcubes")
    got = json.loads(out)["subcubes"]
    assert code == EXIT_OK and len(got) == 2
    assert got[0]["rows"] == [1, 3] and got[0]["symbols"] == [1, 3]
    out = run(capsys, "inspect", s2, "--cell", "1,1,1", "--what", "transversal")[1]
    assert json.loads(out)["cells"] == [[1, 1, 1], [2, 2, 2], [3, 3, 3], [4, 4, 4]]
    out = run(capsys, "inspect", s3, "--what", "catalog-counts")[1]
    assert json.loads(out)["counts"]["first half column blocks"] == 24
    code, out, _ = run(capsys, "inspect", s3, "--what", "properties")
    assert code == EXIT_OK and json.loads(out)["report"]["passed"]
    assert run(capsys, "inspect", s2, "--what", "subcubes")[0] == EXIT_IO


def test_inspect_solved_file_and_non_starting(tmp_path, capsys):
    inst, sol = tmp_path / "a.json", tmp_path / "l.json"
    run(capsys, "gen", "-n", 8, "-m", 1, "--seed", 3, "-o", inst)
    run(capsys, "solve", inst, "--seed", 3, "-o", sol)
    code, out, _ = run(capsys, "inspect", sol, "--what", "properties")
    assert code == EXIT_OK and json.loads(out)["report"]["passed"]
    plain = tmp_path / "p.json"
    write_cube_file(plain, CubeFile("latin", read_cube_file(sol).cube))
    code, _, err = run(capsys, "inspect", plain)
    assert code == EXIT_IO and "undefined" in err


def test_canonical_output_is_byte_stable(tmp_path, capsys, monkeypatch):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "gen", "-n", 8, "-m", 1, "--seed", 4, "--canonical", "-o", a)
    monkeypatch.setenv("CUBEAVOID_SEED", "4")
    run(capsys, "gen", "-n", 8, "-m", 1, "--canonical", "-o", b)
    assert a.read_bytes() == b.read_bytes()
    cf = read_cube_file(a)
    assert cf.dumps(canonical=True).encode() == a.read_bytes()


def test_cubefile_errors(tmp_path):
    with pytest.raises(CubeFileError):
        CubeFile.loads('{"kind": "latin"}')
    with pytest.raises(CubeFileError):
        CubeFile.loads('{"kind": "forbidden", "cells": []}')
    with pytest.raises(CubeFileError):
        CubeFile.loads('{"kind": "square", "cells": []}')
    d = CubeFile("latin", starting_latin_cube(1)).to_dict()
    d["n"] = 4
    with pytest.raises(CubeFileError):
        CubeFile.from_dict(d)
    with pytest.raises(CubeFileError):
        read_cube_file(tmp_path / "none.json")
