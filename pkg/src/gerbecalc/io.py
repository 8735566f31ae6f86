"""JSON serialization of meshes, gerbe data and reports.

Matrices are nested lists of ``[re, im]`` pairs.  Group functions are keyed by
sd vertex id, cochains by the sorted sd simplex key ``"a-b-c"``; entries not
listed are the identity (group functions) or zero (cochains).  Keys are
written sorted so files diff cleanly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import liecore
from .complexes import StarCover, TriangulatedComplex, build_complex, parse_key, simplex_key
from .connective import ConnectiveBundle, CurvingData
from .dcalc import Cochain, GroupFunction
from .errors import GerbeError, ParseError
from .gerbedata import GerbeCocycle


def matrix_to_json(m) -> list:
    m = np.atleast_2d(np.asarray(m))
    return [[[float(np.real(x)), float(np.imag(x))] for x in row] for row in m]


def matrix_from_json(obj, where="matrix") -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError):
        raise ParseError("matrix entries must be [re, im] pairs", where)
    if arr.ndim != 3 or arr.shape[-1] != 2 or arr.shape[0] != arr.shape[1]:
        raise ParseError(f"expected a square matrix of [re, im] pairs, got shape {arr.shape}", where)
    return arr[..., 0] + 1j * arr[..., 1]


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1)


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps(obj))
        f.write("\n")


def read_json(path):
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise ParseError(str(e), str(path))
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, f"{path}:{e.lineno}:{e.colno}")


# ---------------------------------------------------------------- meshes

def mesh_from_complex(k: TriangulatedComplex) -> dict:
    key = "tets" if k.dim == 3 else "triangles"
    return {"vertices": list(k.vertices), key: [list(t) for t in k.simplices[k.dim]],
            "orientation": [int(o) for o in k.orientation]}


def load_mesh(obj, where="mesh") -> TriangulatedComplex:
    if not isinstance(obj, dict):
        raise ParseError("mesh must be a JSON object", where)
    try:
        return build_complex(obj)
    except GerbeError as e:
        raise ParseError(str(e), where)
    except (TypeError, ValueError) as e:
        raise ParseError(f"malformed mesh ({e})", where)


# ---------------------------------------------------------- group data

def _group_function_to_json(g: GroupFunction) -> dict:
    idx = np.flatnonzero(g.mask)
    return {str(int(v)): matrix_to_json(g.values[v]) for v in idx}


def _group_function_from_json(obj, sub, support, spec, where) -> GroupFunction:
    if not isinstance(obj, dict):
        raise ParseError("group function must map sd vertex ids to matrices", where)
    vals = np.array(np.broadcast_to(np.eye(spec.dim, dtype=spec.dtype), (len(sub.carrier), spec.dim, spec.dim)))
    for key, m in obj.items():
        try:
            v = int(key)
        except ValueError:
            raise ParseError(f"bad sd vertex id {key!r}", where)
        if not 0 <= v < len(sub.carrier):
            raise ParseError(f"sd vertex id {v} out of range", where)
        mat = matrix_from_json(m, f"{where}/{key}")
        if mat.shape != (spec.dim, spec.dim):
            raise ParseError(f"expected {spec.dim}x{spec.dim} {spec} matrix", f"{where}/{key}")
        vals[v] = mat.real if spec.field == "real" else mat
    try:
        return GroupFunction(sub, vals, support, spec)
    except GerbeError as e:
        raise ParseError(str(e), where)


def cochain_to_json(c: Cochain) -> dict:
    out = {}
    for s, v in c.items():
        if np.any(v != 0):
            out[simplex_key(s)] = matrix_to_json(v)
    return out


def cochain_from_json(obj, sub, degree, support, spec, where) -> Cochain:
    if not isinstance(obj, dict):
        raise ParseError("cochain must map sd simplex keys to matrices", where)
    n = len(sub.sd.simplices[degree])
    vals = np.zeros((n, spec.dim, spec.dim), dtype=spec.dtype)
    index = sub.sd.index[degree]
    for key, m in obj.items():
        try:
            s = parse_key(key)
        except ValueError:
            raise ParseError(f"bad simplex key {key!r}", where)
        if s not in index:
            raise ParseError(f"{key} is not an sd {degree}-simplex", where)
        mat = matrix_from_json(m, f"{where}/{key}")
        vals[index[s]] = mat.real if spec.field == "real" else mat
    c = Cochain(sub, degree, vals, support, spec)
    outside = float(np.max(np.abs(vals - c.values), initial=0.0))
    if outside > 0:
        raise ParseError(f"values given outside the overlap U_{simplex_key(support)}", where)
    return c


@dataclass
class GerbeData:
    """Everything a data file can carry."""

    gc: GerbeCocycle
    cb: ConnectiveBundle
    cur: CurvingData | None


def data_to_json(gc: GerbeCocycle, cb: ConnectiveBundle | None = None, L: dict | None = None) -> dict:
    out = {
        "group": gc.band.name,
        "transition": gc.transition.name,
        "central": bool(gc.central),
        "edges": {simplex_key(e): _group_function_to_json(g) for e, g in gc.h.items()} if gc.h else None,
        "triangles": {simplex_key(t): _group_function_to_json(g) for t, g in gc.c.items()},
    }
    if cb is not None:
        out["mode"] = cb.mode
        out["alpha"] = {str(i): cochain_to_json(a) for i, a in cb.alphas.items() if a.max_abs() > 0}
        if cb.transition_forms is not None:
            out["transition_forms"] = {simplex_key(e): cochain_to_json(a) for e, a in cb.transition_forms.items()}
    if L is not None:
        out["L"] = {str(i): cochain_to_json(l) for i, l in L.items() if l.max_abs() > 0}
    return out


def load_data(obj, cover: StarCover, group: str | None = None, tol_alg: float = liecore.TOL_ALG,
              where="data", validate_curving: bool = True) -> GerbeData:
    """Parse a data object against a cover.

    Raises:
        ParseError: malformed content, with a location path.
        IncompatibleCurving: if the curving fails overlap compatibility and
            ``validate_curving`` is set.
    """
    if not isinstance(obj, dict):
        raise ParseError("data must be a JSON object", where)
    sub = cover.subdivision
    try:
        band = liecore.group_spec(group or obj.get("group", "U1"))
        transition = liecore.group_spec(obj.get("transition", band.name))
    except GerbeError as e:
        raise ParseError(str(e), f"{where}/group")
    base = cover.base

    def keyed(section, expect):
        raw = obj.get(section) or {}
        if not isinstance(raw, dict):
            raise ParseError(f"'{section}' must be an object", f"{where}/{section}")
        out = {}
        for key, val in raw.items():
            try:
                s = parse_key(key)
            except ValueError:
                raise ParseError(f"bad key {key!r}", f"{where}/{section}")
            if s not in expect:
                raise ParseError(f"{key} is not a base simplex of the right dimension", f"{where}/{section}/{key}")
            out[s] = val
        return out

    tri_raw = keyed("triangles", base.index[2])
    c = {t: _group_function_from_json(tri_raw.get(t, {}), sub, t, band, f"{where}/triangles/{simplex_key(t)}")
         for t in base.simplices[2]}
    h = None
    if obj.get("edges"):
        edge_raw = keyed("edges", base.index[1])
        h = {e: _group_function_from_json(edge_raw.get(e, {}), sub, e, transition, f"{where}/edges/{simplex_key(e)}")
             for e in base.simplices[1]}
    try:
        gc = GerbeCocycle(cover, band, c, h, transition, obj.get("central"))
    except GerbeError as e:
        raise ParseError(str(e), where)

    def per_patch(section, degree):
        raw = obj.get(section) or {}
        if not isinstance(raw, dict):
            raise ParseError(f"'{section}' must be an object", f"{where}/{section}")
        out = {}
        for key, val in raw.items():
            try:
                i = int(key)
            except ValueError:
                raise ParseError(f"bad patch id {key!r}", f"{where}/{section}")
            if i not in base.index[0] and (i,) not in base.index[0]:
                raise ParseError(f"unknown patch {i}", f"{where}/{section}/{key}")
            out[i] = cochain_from_json(val, sub, degree, (i,), band, f"{where}/{section}/{key}")
        return out

    alphas = per_patch("alpha", 1)
    tf = None
    if obj.get("transition_forms") is not None:
        tf_raw = keyed("transition_forms", base.index[1])
        tf = {e: cochain_from_json(tf_raw.get(e, {}), sub, 1, e, band, f"{where}/transition_forms/{simplex_key(e)}")
              for e in base.simplices[1]}
    try:
        cb = ConnectiveBundle(gc, alphas, mode=obj.get("mode", "full"), transition_forms=tf)
    except (GerbeError, ValueError) as e:
        raise ParseError(str(e), f"{where}/alpha")
    cur = None
    if validate_curving:
        cur = CurvingData(cb, per_patch("L", 2), tol=tol_alg)
    return GerbeData(gc, cb, cur)
