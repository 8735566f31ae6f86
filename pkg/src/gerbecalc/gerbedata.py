"""Classifying data of a principal gerbe relative to the star cover.

``h[i, j]`` are G-valued transition functions on U_ij acting on the band by
conjugation; ``c[i, j, k]`` are band-valued functions on U_ijk.  Only sorted
edges and triangles are stored; other index orders follow

    h_ji = h_ij^-1,
    c_jki = h_ik c_ijk h_ki            (cyclic shift),
    c_ikj = h_jk c_ijk^-1 h_kj         (transposition),

which is exactly how c_ijk = h_ki h_ij h_jk transforms.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import liecore
from .complexes import StarCover, TriangulatedComplex, perm_sign, simplex_key
from .dcalc import Cochain, GroupFunction, ad_transport
from .errors import LiftNotInH, NotSimplicial, QuotientNotCocycle, SpecMismatch
from .liecore import GroupSpec

TOL_COCYCLE = 1e-9


def _inv(m):
    return np.conj(np.swapaxes(m, -1, -2))


def _maxabs(a):
    return float(np.max(np.abs(a), initial=0.0))


class GerbeCocycle:
    """Transition data (h, c) of a gerbe over a star cover.

    Args:
        cover: the star cover of the base complex.
        band: group of the band H (values of c, algebra of connections).
        h: mapping sorted edge -> GroupFunction of the transition group, or
            None for identity transitions.
        c: mapping sorted triangle -> band-valued GroupFunction.
        transition: group of the h values (defaults to ``band``).
        central: True when the band is central in the transition group, so
            conjugation by h acts trivially on band values.
    """

    def __init__(self, cover: StarCover, band: GroupSpec, c: dict, h: dict | None = None,
                 transition: GroupSpec | None = None, central: bool | None = None):
        self.cover = cover
        self.band = band
        self.transition = transition or band
        self.h = {} if h is None else {tuple(sorted(k)): v for k, v in h.items()}
        self.c = {tuple(sorted(k)): v for k, v in c.items()}
        if central is None:
            central = band.abelian or not self.h
        if not central and self.transition.dim != band.dim:
            raise SpecMismatch(f"band {band} cannot be conjugated by {self.transition}")
        self.central = central
        base = cover.base
        if set(self.c) != set(base.simplices[2]):
            raise SpecMismatch("c must be given on every base triangle")
        if self.h and set(self.h) != set(base.simplices[1]):
            raise SpecMismatch("h must be given on every base edge (or omitted)")
        for key, g in self.c.items():
            if g.spec.dim != band.dim:
                raise SpecMismatch(f"c{simplex_key(key)} is not band-valued")

    @property
    def sub(self):
        return self.cover.subdivision

    # ---------------------------------------------------------- accessors

    def h_values(self, i, j) -> np.ndarray:
        """h_ij at every sd vertex (identity off U_ij)."""
        if not self.h:
            return np.broadcast_to(np.eye(self.transition.dim, dtype=self.transition.dtype),
                                   (len(self.sub.carrier), self.transition.dim, self.transition.dim))
        if i < j:
            return self.h[(i, j)].values
        return _inv(self.h[(j, i)].values)

    def h_of(self, i, j) -> GroupFunction:
        return GroupFunction(self.sub, self.h_values(i, j), (i, j), self.transition, check=False)

    def conj(self, g, x):
        """g x g^-1 on the band, pointwise; trivial for a central band."""
        if self.central:
            return x
        return g @ x @ _inv(g)

    def c_values(self, i, j, k) -> np.ndarray:
        if i < j < k:
            return self.c[(i, j, k)].values
        if i < j and i < k:  # (i, j, k) with k < j: transposition of (i, k, j)
            return self.conj(self.h_values(k, j), _inv(self.c_values(i, k, j)))
        # rotate so the smallest index comes first: c_abc = h_cb c_cab h_bc
        return self.conj(self.h_values(k, j), self.c_values(k, i, j))

    def c_of(self, i, j, k) -> GroupFunction:
        return GroupFunction(self.sub, self.c_values(i, j, k), (i, j, k), self.band, check=False)

    def with_c(self, tri, values) -> "GerbeCocycle":
        c = dict(self.c)
        key = tuple(sorted(tri))
        c[key] = GroupFunction(self.sub, values, key, self.band, check=False)
        return GerbeCocycle(self.cover, self.band, c, self.h or None, self.transition, self.central)


@dataclass
class CocycleReport:
    max_deviation: float
    worst: tuple | None
    tol: float
    tetrahedra: int

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tol

    def as_dict(self):
        return {"check": "cocycle", "status": "PASS" if self.passed else "FAIL",
                "max_deviation": self.max_deviation,
                "worst": simplex_key(self.worst) if self.worst else None,
                "tetrahedra": self.tetrahedra, "tol": self.tol}


def check_cocycle(gc: GerbeCocycle, tol: float = TOL_COCYCLE) -> CocycleReport:
    """Twisted 2-cocycle identity on every base tetrahedron.

    With c' = h_43 c_123 h_34 (the h_34-conjugate of c_123) this measures
    ``c_134 c'_123 - c_124 c_234`` on U_1234.  Vacuous on surfaces.
    """
    base = gc.cover.base
    worst, dev = None, 0.0
    if base.dim < 3:
        return CocycleReport(0.0, None, tol, 0)
    sub = gc.sub
    for t in base.simplices[3]:
        a, b, c, d = t
        m = sub.overlap_mask(t, 0)
        cp = gc.conj(gc.h_values(d, c)[m], gc.c_values(a, b, c)[m])
        lhs = gc.c_values(a, c, d)[m] @ cp
        rhs = gc.c_values(a, b, d)[m] @ gc.c_values(b, c, d)[m]
        e = _maxabs(lhs - rhs)
        if worst is None or e > dev:
            dev, worst = e, t
    return CocycleReport(dev, worst, tol, len(base.simplices[3]))


# ------------------------------------------------------------ extensions

@dataclass(frozen=True)
class ExtensionSpec:
    """A group extension H -> G -> G/H with a chosen local section."""

    name: str
    G: GroupSpec
    H: GroupSpec
    Q: GroupSpec
    quotient: Callable  # stack of G matrices -> stack of Q matrices
    lift: Callable  # stack of Q matrices -> stack of G matrices
    embed: Callable  # stack of H matrices -> stack of G matrices
    restrict: Callable  # stack of G matrices (lying in H) -> H matrices
    central: bool

    def in_H_defect(self, g) -> float:
        """Distance of q(g) from the identity."""
        return _maxabs(self.quotient(g) - np.eye(self.Q.dim))


def _det_quotient(g):
    return np.linalg.det(g)[..., None, None]


def _diag_lift(u):
    u = np.asarray(u)
    out = np.zeros(u.shape[:-2] + (2, 2), dtype=complex)
    out[..., 0, 0] = u[..., 0, 0]
    out[..., 1, 1] = 1.0
    return out


U2_OVER_SU2 = ExtensionSpec(
    "U2/SU2", liecore.U2, liecore.SU2, liecore.U1,
    quotient=_det_quotient, lift=_diag_lift,
    embed=lambda h: np.asarray(h, dtype=complex), restrict=lambda g: np.asarray(g, dtype=complex),
    central=False,
)

_SU2_BASIS = np.array([[[0, 1j], [1j, 0]], [[0, 1], [-1, 0]], [[1j, 0], [0, -1j]]])


def _adjoint_rep(g):
    """U2 -> SO3: matrix of Ad(g) on su(2) in the basis i*sigma_a."""
    g = np.asarray(g)
    ad = g[..., None, :, :] @ _SU2_BASIS @ _inv(g)[..., None, :, :]
    # coefficient of e_a in Y is -tr(e_a Y)/2
    return (-np.einsum("aij,...bji->...ab", _SU2_BASIS, ad) / 2).real


def _ad_lift(r):
    """SO3 -> SU2 section through the principal logarithm."""
    r = np.asarray(r, dtype=float)
    logs = liecore.logm_batch(r).real
    gens = _adjoint_rep_derivative()
    coeffs = np.linalg.lstsq(gens.reshape(3, 9).T, logs.reshape(-1, 9).T, rcond=None)[0].T
    x = np.einsum("na,aij->nij", coeffs, _SU2_BASIS)
    return liecore.expm_batch(x).reshape(r.shape[:-2] + (2, 2))


def _adjoint_rep_derivative():
    # ad(e_c) as a 3x3 matrix: [e_c, e_b] = sum_a M_ab e_a
    out = np.zeros((3, 3, 3))
    for c in range(3):
        for b in range(3):
            y = _SU2_BASIS[c] @ _SU2_BASIS[b] - _SU2_BASIS[b] @ _SU2_BASIS[c]
            out[c, :, b] = (-np.einsum("aij,ji->a", _SU2_BASIS, y) / 2).real
    return out


U2_OVER_U1 = ExtensionSpec(
    "U2/U1", liecore.U2, liecore.U2, liecore.SO3,
    quotient=_adjoint_rep, lift=_ad_lift,
    embed=lambda h: np.asarray(h, dtype=complex), restrict=lambda g: np.asarray(g, dtype=complex),
    central=True,
)
# The central U(1) is kept in its U(2) matrix form (scalar matrices), so the
# band spec is U2 and center-valued connective data stays 2x2.

EXTENSIONS = {e.name: e for e in (U2_OVER_SU2, U2_OVER_U1)}


@dataclass
class LiftingGerbe:
    gerbe: GerbeCocycle
    central: bool
    quotient_deviation: float
    lift_defect: float


def _quotient_values(u: dict, cover, Q, i, j):
    if i < j:
        return u[(i, j)].values
    return _inv(u[(j, i)].values)


def build_lifting_gerbe(ext: ExtensionSpec, u: dict, cover: StarCover, twist: dict | None = None,
                        tol: float = TOL_COCYCLE) -> LiftingGerbe:
    """Gerbe of local lifts of a G/H-bundle with transitions ``u``.

    h_ij = lift(u_ij) (times an optional H-valued ``twist[i, j]``) and
    c_ijk = h_ki h_ij h_jk.

    Raises:
        QuotientNotCocycle: u_ik != u_ij u_jk somewhere on a triple overlap.
        LiftNotInH: some c_ijk does not project to the identity of G/H.
    """
    sub = cover.subdivision
    u = {tuple(sorted(k)): v for k, v in u.items()}
    qdev = 0.0
    for t in cover.base.simplices[2]:
        i, j, k = t
        m = sub.overlap_mask(t, 0)
        lhs = _quotient_values(u, cover, ext.Q, i, k)[m]
        rhs = _quotient_values(u, cover, ext.Q, i, j)[m] @ _quotient_values(u, cover, ext.Q, j, k)[m]
        qdev = max(qdev, _maxabs(lhs - rhs))
    if qdev > tol:
        raise QuotientNotCocycle(f"quotient transitions fail the cocycle condition by {qdev:.3e}", deviation=qdev)

    h = {}
    for e, ue in u.items():
        vals = np.array(np.broadcast_to(np.eye(ext.G.dim, dtype=complex), (len(sub.carrier), ext.G.dim, ext.G.dim)))
        m = ue.mask
        vals[m] = ext.lift(ue.values[m])
        if twist is not None and e in twist:
            vals[m] = vals[m] @ ext.embed(twist[e].values[m])
        h[e] = GroupFunction(sub, vals, e, ext.G)

    def hv(a, b):
        return h[(a, b)].values if a < b else _inv(h[(b, a)].values)

    c, lift_defect, central = {}, 0.0, True
    for t in cover.base.simplices[2]:
        i, j, k = t
        m = sub.overlap_mask(t, 0)
        vals = np.array(np.broadcast_to(np.eye(ext.H.dim, dtype=complex), (len(sub.carrier), ext.H.dim, ext.H.dim)))
        cg = hv(k, i)[m] @ hv(i, j)[m] @ hv(j, k)[m]
        lift_defect = max(lift_defect, ext.in_H_defect(cg))
        vals[m] = ext.restrict(cg)
        if not ext.central and ext.H.dim > 1:
            scal = np.trace(vals[m], axis1=-2, axis2=-1)[:, None, None] / ext.H.dim
            central = central and _maxabs(vals[m] - scal * np.eye(ext.H.dim)) < tol
        c[t] = GroupFunction(sub, vals, t, ext.H, check=False)
    if lift_defect > tol:
        raise LiftNotInH(f"c does not lie in H (q(c) deviates by {lift_defect:.3e})")
    gerbe = GerbeCocycle(cover, ext.H, c, h, ext.G, central=ext.central)
    return LiftingGerbe(gerbe, central, qdev, lift_defect)


def adjoint_bundle_action(gc: GerbeCocycle, i: int, j: int, c: Cochain) -> Cochain:
    """Transition of the adjoint bundle: Ad(h_ij^-1) on a cochain over U_ij."""
    c = c.restrict((i, j))
    if gc.central:
        return c
    return ad_transport(gc.h_of(i, j), c)


# --------------------------------------------------------------- pullback

def sd_vertex_map(cover2: StarCover, cover: StarCover, vmap: dict) -> np.ndarray:
    """Induced map b_tau -> b_f(tau) between subdivisions."""
    sub2, sub = cover2.subdivision, cover.subdivision
    out = np.empty(len(sub2.carrier), dtype=np.int64)
    for v, tau in enumerate(sub2.carrier):
        img = tuple(sorted({vmap[x] for x in tau}))
        out[v] = sub.vertex_of[img]
    return out


def check_simplicial(k2: TriangulatedComplex, k: TriangulatedComplex, vmap: dict):
    missing = [v for v in k2.vertices if v not in vmap]
    if missing:
        raise NotSimplicial(f"vertex map undefined on {missing[:5]}")
    for t in k2.simplices[k2.dim]:
        img = tuple(sorted({vmap[v] for v in t}))
        if len(img) - 1 > k.dim or img not in k.index[len(img) - 1]:
            raise NotSimplicial(f"{simplex_key(t)} maps to non-simplex {simplex_key(img)}")


def pullback(gc: GerbeCocycle, cover2: StarCover, vmap: dict) -> GerbeCocycle:
    """Pull the gerbe back along the simplicial map given by ``vmap``.

    Degenerate images carry identity transitions.
    """
    vmap = {int(k): int(v) for k, v in vmap.items()}
    check_simplicial(cover2.base, gc.cover.base, vmap)
    sub2 = cover2.subdivision
    F = sd_vertex_map(cover2, gc.cover, vmap)
    G, H = gc.transition, gc.band

    def pulled(values, support, spec):
        m = sub2.overlap_mask(support, 0)
        vals = np.array(np.broadcast_to(np.eye(spec.dim, dtype=spec.dtype), (len(sub2.carrier), spec.dim, spec.dim)))
        if values is not None:
            vals[m] = values[F[m]]
        return GroupFunction(sub2, vals, support, spec, check=False)

    h = None
    if gc.h:
        h = {}
        for e in cover2.base.simplices[1]:
            a, b = vmap[e[0]], vmap[e[1]]
            h[e] = pulled(gc.h_values(a, b) if a != b else None, e, G)
    c = {}
    for t in cover2.base.simplices[2]:
        a, b, d = (vmap[v] for v in t)
        c[t] = pulled(gc.c_values(a, b, d) if len({a, b, d}) == 3 else None, t, H)
    return GerbeCocycle(cover2, H, c, h, G, gc.central)


# ---------------------------------------------------- Cech helpers/generators

def alternating(table: dict, idx) -> float:
    """Value of an alternating function of base simplices (0 on repeats)."""
    if len(set(idx)) < len(idx):
        return 0.0
    key = tuple(sorted(idx))
    return perm_sign(idx) * table.get(key, 0.0)


def cech_contract(cover: StarCover, table: dict, sigma) -> np.ndarray:
    """sum_j phi_j * n_{j sigma}: scalar function on the sd vertices."""
    phi = cover.partition
    out = np.zeros(len(cover.subdivision.carrier))
    for j in cover.base.vertices:
        val = alternating(table, (j,) + tuple(sigma))
        if val:
            out += val * phi[j]
    return out


def monopole_transitions(cover: StarCover, charge: int) -> dict:
    """U(1) transition functions of charge ``charge`` on a closed surface.

    Uses an integer Cech 2-cocycle with +-1 on |charge| triangles and the
    partition of unity to produce exact cocycle transitions.
    """
    base = cover.base
    if abs(charge) > len(base.simplices[2]):
        raise ValueError("charge exceeds number of triangles")
    sign = 1 if charge >= 0 else -1
    table = {t: sign * int(o) for t, o in list(zip(base.simplices[2], base.orientation))[:abs(charge)]}
    u = {}
    sub = cover.subdivision
    for e in base.simplices[1]:
        theta = 2 * np.pi * cech_contract(cover, table, e)
        vals = np.exp(1j * theta)[:, None, None]
        u[e] = GroupFunction(sub, vals, e, liecore.U1)
    return u


def random_twist(cover: StarCover, spec: GroupSpec, rng, scale=0.3) -> dict:
    """Random smooth-ish H-valued functions on each edge overlap."""
    return {e: _random_function(cover, e, spec, rng, scale) for e in cover.base.simplices[1]}


def _random_function(cover, support, spec, rng, scale):
    sub = cover.subdivision
    m = sub.overlap_mask(support, 0)
    vals = np.array(np.broadcast_to(np.eye(spec.dim, dtype=spec.dtype), (len(sub.carrier), spec.dim, spec.dim)))
    vals[m] = liecore.random_group(spec, rng, scale, size=int(m.sum()))
    return GroupFunction(sub, vals, support, spec)


def random_gerbe(cover: StarCover, spec: GroupSpec, rng, scale=0.3, central=None) -> GerbeCocycle:
    """Random transitions h with derived c = h_ki h_ij h_jk."""
    sub = cover.subdivision
    h = {e: _random_function(cover, e, spec, rng, scale) for e in cover.base.simplices[1]}
    tmp = GerbeCocycle.__new__(GerbeCocycle)
    tmp.cover, tmp.transition, tmp.h = cover, spec, h
    c = {}
    for t in cover.base.simplices[2]:
        i, j, k = t
        c[t] = GroupFunction(sub, tmp.h_values(k, i) @ tmp.h_values(i, j) @ tmp.h_values(j, k), t, spec, check=False)
    return GerbeCocycle(cover, spec, c, h, spec, central=False if central is None else central)
