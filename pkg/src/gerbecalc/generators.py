"""Ready-made meshes and gerbe data used by the CLI and the test-suite."""
from __future__ import annotations

import numpy as np

from . import liecore
from .complexes import StarCover, TriangulatedComplex, build_complex, icosahedron_mesh, perm_sign, torus3_mesh, torus_mesh
from .connective import ConnectiveBundle, CurvingData
from .dcalc import Cochain, GroupFunction, cup, coboundary, maurer_cartan
from .gerbedata import (U2_OVER_SU2, GerbeCocycle, build_lifting_gerbe, cech_contract, monopole_transitions,
                        pullback, random_twist)
from .liecore import U1


def trivial_cocycle(cover: StarCover, spec=U1) -> GerbeCocycle:
    sub = cover.subdivision
    return GerbeCocycle(cover, spec, {t: GroupFunction.identity(sub, spec, t) for t in cover.base.simplices[2]})


def global_curving(cover: StarCover, total: complex, spec=U1) -> Cochain:
    """Global central 2-cochain, spread evenly, whose integral is ``total``."""
    sub = cover.subdivision
    n = len(sub.sd.simplices[2])
    vals = (sub.sd.orientation * (total / n))[:, None, None] * np.eye(spec.dim)
    return Cochain(sub, 2, vals.astype(spec.dtype), None, spec)


def trivial_curving_data(cover: StarCover, total_turns: float, spec=U1):
    """Trivial gerbe with global curving B, integral of B = 2 pi i * total_turns.

    Returns:
        (cb, cur, B)
    """
    B = global_curving(cover, 2j * np.pi * total_turns, spec)
    cb = ConnectiveBundle(trivial_cocycle(cover, spec), mode="center" if not spec.abelian else "full")
    cur = CurvingData(cb, {i: B.restrict((i,)) for i in cover.base.vertices})
    return cb, cur, B


def monopole_gerbe(cover: StarCover, charge: int, twist_seed: int | None = None):
    """U2/SU2 lifting gerbe of the charge-``charge`` U1 bundle on a surface."""
    u = monopole_transitions(cover, charge)
    twist = None
    if twist_seed is not None:
        twist = random_twist(cover, liecore.SU2, np.random.default_rng(twist_seed))
    return build_lifting_gerbe(U2_OVER_SU2, u, cover, twist=twist)


def torus3_to_triangle_map(n: int, triangle=(0, 11, 5)) -> dict:
    """Simplicial map from the n^3 torus grid onto one triangle, by 3-colouring.

    Vertex (x, y, z) goes to ``triangle[(x + 2y + z) mod 3]``.  Edges whose
    ends get the same colour collapse, which is still a simplicial map.
    """
    return {((x * n) + y) * n + z: triangle[(x + 2 * y + z) % 3]
            for x in range(n) for y in range(n) for z in range(n)}


def monopole_on_torus3(n: int, charge: int, twist_seed: int | None = None):
    """Monopole lifting gerbe on the icosahedron pulled back to the n^3 torus."""
    sphere = StarCover(build_complex(icosahedron_mesh()))
    lg = monopole_gerbe(sphere, charge, twist_seed)
    cover3 = StarCover(build_complex(torus3_mesh(n)))
    return pullback(lg.gerbe, cover3, torus3_to_triangle_map(n)), cover3


# ------------------------------------------------------ integer-class data

def integer_cocycle(base: TriangulatedComplex, n: int) -> dict:
    """Top-degree integer Cech cocycle with total class n (+-1 on |n| simplices)."""
    top = base.simplices[base.dim]
    if abs(n) > len(top):
        raise ValueError("class exceeds number of top simplices")
    sign = 1 if n >= 0 else -1
    return {t: sign * int(o) for t, o in list(zip(top, base.orientation))[:abs(n)]}


def _cech_K_cochain(cover: StarCover, table: dict, sigma, degree: int, spec=U1) -> Cochain:
    """(K w)_sigma = sum_a phi_a cup w_{a sigma} for a table of cochains."""
    sub = cover.subdivision
    phi = cover.partition
    first = sub.sd.simplex_array(degree)[:, 0]
    total = np.zeros((len(first), spec.dim, spec.dim), dtype=spec.dtype)
    for a in cover.base.vertices:
        idx = (a,) + tuple(sigma)
        if len(set(idx)) < len(idx):
            continue
        key = tuple(sorted(idx))
        if key not in table:
            continue
        total += perm_sign(idx) * phi[a][first][:, None, None] * table[key].values
    return Cochain(sub, degree, total, sigma, spec)


def abelian_class_data(cover: StarCover, n: int):
    """U1-banded gerbe on a closed 3-complex with Cech class n.

    The class is that of the classifying cocycle u_kj u_ji u_ik, the inverse
    of the stored c_ijk = u_ki u_ij u_jk (see :func:`log_class_oracle`).  So
    c_ijk = exp(-2 pi i f_ijk) with f = K(n) (delta f = n); the transition
    forms are A = K(c^-1 dc) and the curvings L = K(R) with
    R_ij = d alpha_ij + alpha_ij cup alpha_ij.

    Returns:
        (cb, cur, ncocycle)
    """
    base = cover.base
    if base.dim != 3:
        raise ValueError("abelian_class_data needs a 3-complex")
    sub = cover.subdivision
    ncoc = integer_cocycle(base, n)
    c = {}
    for t in base.simplices[2]:
        f = cech_contract(cover, ncoc, t)
        c[t] = GroupFunction(sub, np.exp(-2j * np.pi * f)[:, None, None], t, U1)
    gc = GerbeCocycle(cover, U1, c)
    mc = {t: maurer_cartan(gc.c_of(*t)) for t in base.simplices[2]}
    A = {e: _cech_K_cochain(cover, mc, e, 1) for e in base.simplices[1]}
    cb = ConnectiveBundle(gc, transition_forms=A)
    R = {}
    for e in base.simplices[1]:
        a = cb.alpha_ij(*e)
        R[e] = coboundary(a) + cup(a, a)
    L = {i: _cech_K_cochain(cover, R, (i,), 2) for i in base.vertices}
    cur = CurvingData(cb, L)
    return cb, cur, ncoc


def surface_class_data(cover: StarCover, n: int):
    """U1-banded connective data on a closed surface whose kappa has class n.

    c = 1 (triple overlaps are points), alpha_ij = 2 pi i d(K n)_ij via the
    transition forms, L_i = 0 (compatibility is vacuous on 1-dimensional
    edge overlaps).
    """
    base = cover.base
    if base.dim != 2:
        raise ValueError("surface_class_data needs a surface")
    sub = cover.subdivision
    ncoc = integer_cocycle(base, n)
    A = {}
    for e in base.simplices[1]:
        f = Cochain(sub, 0, cech_contract(cover, ncoc, e)[:, None, None].astype(complex), e, U1)
        A[e] = -(coboundary(f) * (2j * np.pi))
    cb = ConnectiveBundle(trivial_cocycle(cover), transition_forms=A)
    return cb, CurvingData(cb), ncoc


def log_class_oracle(gc: GerbeCocycle) -> int:
    """Cech class of a U1 gerbe on a 3-complex, computed from log c alone.

    On each tetrahedron T the four c's are continued by principal logs along
    the sd edge from b_t to b_T, then (delta log c)/(2 pi i) at b_T is
    rounded and summed with orientation signs.  The result is reported for
    the classifying cocycle u_kj u_ji u_ik, i.e. for c^-1, which is the
    ordering in which the curvature integral reads +2 pi n.
    """
    base = gc.cover.base
    sub = gc.sub
    total = 0
    for T, o in zip(base.simplices[3], base.orientation):
        bT = sub.vertex_of[T]
        acc = 0j
        for r, face in enumerate(((T[1], T[2], T[3]), (T[0], T[2], T[3]), (T[0], T[1], T[3]), (T[0], T[1], T[2]))):
            cv = gc.c_values(*face)
            bt = sub.vertex_of[face]
            z0, z1 = cv[bt, 0, 0], cv[bT, 0, 0]
            logv = np.log(z0) + np.log(z1 / z0)
            acc += (-1) ** r * logv
        k = acc / (2j * np.pi)
        total -= int(o) * int(round(k.real))
    return total


GENERATORS = ("sphere", "torus", "torus3", "monopole", "trivial-curving", "abelian-class")
