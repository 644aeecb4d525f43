"""JSON files for Latin cubes and forbidden cubes.

::

    {"kind": "latin", "n": 4, "cells": [[[1, 2, ...], ...], ...], "isotopy": {...}}
    {"kind": "forbidden", "n": 4, "m": 1, "cells": [[[[1], [], ...], ...], ...]}

``cells[i-1][j-1][k-1]`` holds the symbol (latin) or the sorted list of
forbidden symbols.  ``isotopy`` is optional and records the permutations
that carried the starting cube to the cube the file was solved from.
Canonical form is compact JSON with sorted keys and a trailing newline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .cube_core import CubeError, ForbiddenCube, Isotopy, LatinCube


class CubeFileError(CubeError):
    pass


@dataclass(frozen=True)
class CubeFile:
    kind: str
    cube: object  # LatinCube or ForbiddenCube
    isotopy: Isotopy | None = None

    @property
    def n(self) -> int:
        return self.cube.n

    def to_dict(self) -> dict:
        if self.kind == "latin":
            d = {"kind": "latin", "n": self.n, "cells": self.cube.to_lists()}
        else:
            d = {"kind": "forbidden", "n": self.n, "m": self.cube.m, "cells": self.cube.to_lists()}
        if self.isotopy is not None:
            d["isotopy"] = self.isotopy.to_dict()
        return d

    def dumps(self, canonical: bool = False) -> str:
        if canonical:
            return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"
        return json.dumps(self.to_dict(), sort_keys=True) + "\n"

    @classmethod
    def loads(cls, text: str) -> "CubeFile":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CubeFileError(f"not valid JSON: {exc}") from None
        return cls.from_dict(d)

    @classmethod
    def from_dict(cls, d) -> "CubeFile":
        if not isinstance(d, dict) or "kind" not in d or "cells" not in d:
            raise CubeFileError("expected an object with 'kind' and 'cells'")
        kind = d["kind"]
        try:
            if kind == "latin":
                cube = LatinCube.from_lists(d["cells"])
            elif kind == "forbidden":
                if "m" not in d:
                    raise CubeFileError("forbidden file lacks 'm'")
                cube = ForbiddenCube.from_sets(d["cells"], m=int(d["m"]))
            else:
                raise CubeFileError(f"unknown kind {kind!r}")
        except CubeFileError:
            raise
        except (CubeError, TypeError, ValueError) as exc:
            raise CubeFileError(f"bad {kind} cells: {exc}") from None
        if "n" in d and d["n"] != cube.n:
            raise CubeFileError(f"declared n={d['n']} but cells have order {cube.n}")
        iso = None
        if d.get("isotopy") is not None:
            try:
                iso = Isotopy.from_dict(d["isotopy"])
            except (CubeError, KeyError, TypeError, ValueError) as exc:
                raise CubeFileError(f"bad isotopy record: {exc}") from None
            if iso.n != cube.n:
                raise CubeFileError("isotopy order does not match the cube")
        return cls(kind, cube, iso)


def read_cube_file(path, kind: str | None = None) -> CubeFile:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CubeFileError(f"cannot read {path}: {exc.strerror}") from None
    cf = CubeFile.loads(text)
    if kind is not None and cf.kind != kind:
        raise CubeFileError(f"{path}: expected a {kind} file, got {cf.kind}")
    return cf


def write_cube_file(path, cf: CubeFile, canonical: bool = False) -> None:
    try:
        Path(path).write_text(cf.dumps(canonical))
    except OSError as exc:
        raise CubeFileError(f"cannot write {path}: {exc.strerror}") from None
