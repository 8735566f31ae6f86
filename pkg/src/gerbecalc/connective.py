"""Connective structures and curvings in cocycle gauge.

Each patch U_i carries one connection 1-cochain alpha_i.  The pullback along a
transition u_ij acts on connections by

    u_ij^*(nabla) = Ad(h_ij^-1) nabla + A_ij,

where A_ij defaults to the Maurer-Cartan cochain of h_ij (the gauge law for
honest G-valued transitions).  On differences of connections it acts by
Ad(h_ij^-1) alone.  In center-valued mode every connective value is
projected to the center of the band algebra.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import liecore
from .complexes import simplex_key
from .dcalc import Cochain, GroupFunction, _EmptyCochain, ad_transport, coboundary, cup, maurer_cartan
from .errors import DegreeMismatch, IncompatibleCurving, MembershipError, NotGluable, SpecMismatch
from .gerbedata import GerbeCocycle
from .liecore import InvariantPolynomial, TOL_ALG


def gauge_transform(g: GroupFunction, nabla: Cochain, tol_log: float = liecore.TOL_LOG) -> Cochain:
    """g^* nabla = Ad(g^-1) nabla + g^-1 dg."""
    return ad_transport(g, nabla) + maurer_cartan(g, tol_log=tol_log)


def _center(c: Cochain, spec) -> Cochain:
    return c.map_values(lambda v: liecore.center_project_batch(spec, v))


class ConnectiveBundle:
    """Gerbe cocycle plus a chosen connection on every patch.

    Args:
        gc: the gerbe cocycle.
        alphas: vertex -> 1-cochain supported on U_i (missing means zero).
        mode: "full" or "center".
        transition_forms: optional sorted edge -> 1-cochain A_ij replacing the
            default Maurer-Cartan term of the transition.
    """

    def __init__(self, gc: GerbeCocycle, alphas: dict | None = None, mode: str = "full",
                 transition_forms: dict | None = None, tol_log: float = liecore.TOL_LOG):
        if mode not in ("full", "center"):
            raise ValueError("mode must be 'full' or 'center'")
        self.gc = gc
        self.mode = mode
        self.tol_log = tol_log
        self.spec = gc.band
        sub = gc.sub
        self.alphas = {}
        for i in gc.cover.base.vertices:
            a = (alphas or {}).get(i)
            if a is None:
                a = Cochain.zeros(sub, 1, self.spec, (i,))
            if a.degree != 1:
                raise DegreeMismatch(f"alpha_{i} must be a 1-cochain")
            a = a.restrict((i,))
            if mode == "center":
                dev = float(np.max(np.abs(a.values - liecore.center_project_batch(self.spec, a.values)), initial=0.0))
                if dev > 0:
                    raise MembershipError(f"alpha_{i} is not center-valued (off-center part {dev:.3e})")
            self.alphas[i] = a
        self.transition_forms = None
        if transition_forms is not None:
            self.transition_forms = {tuple(sorted(k)): v.restrict(tuple(sorted(k))) for k, v in transition_forms.items()}
        self._mc = {}
        self._alpha = {}

    @classmethod
    def center_valued(cls, gc: GerbeCocycle, alphas: dict | None = None, **kw) -> "ConnectiveBundle":
        """Build in center-valued mode, projecting the given connections."""
        proj = {i: _center(a, gc.band) for i, a in (alphas or {}).items()}
        return cls(gc, proj, mode="center", **kw)

    # ------------------------------------------------------------ actions

    def _mc_term(self, i, j) -> Cochain:
        if (i, j) not in self._mc:
            gc = self.gc
            if self.transition_forms is not None:
                if i < j:
                    a = self.transition_forms[(i, j)]
                else:
                    a = -ad_transport(gc.h_of(i, j), self.transition_forms[(j, i)]) if gc.h \
                        else -self.transition_forms[(j, i)]
            elif not gc.h:
                a = Cochain.zeros(gc.sub, 1, self.spec, (i, j))
            else:
                a = maurer_cartan(gc.h_of(i, j), tol_log=self.tol_log)
            if self.mode == "center":
                a = _center(a, a.spec)
            self._mc[(i, j)] = a
        return self._mc[(i, j)]

    def pull_difference(self, i, j, x: Cochain) -> Cochain:
        """u_ij^* on a difference of connections: Ad(h_ij^-1)."""
        x = x.restrict((i, j))
        if self.gc.central or not self.gc.h:
            return x
        return ad_transport(self.gc.h_of(i, j), x)

    def pull_connection(self, i, j, nabla: Cochain) -> Cochain:
        """u_ij^* on a connection over U_ij."""
        out = self.pull_difference(i, j, nabla) + self._mc_term(i, j)
        if self.mode == "center":
            out = _center(out, out.spec)
        return out

    def alpha_ij(self, i, j) -> Cochain:
        if (i, j) not in self._alpha:
            self._alpha[(i, j)] = self.alphas[i].restrict((i, j)) - self.pull_connection(i, j, self.alphas[j])
        return self._alpha[(i, j)]


def connective_cocycle(cb: ConnectiveBundle) -> dict:
    """alpha_ij = alpha_i - u_ij^*(alpha_j) on every sorted base edge."""
    return {e: cb.alpha_ij(*e) for e in cb.gc.cover.base.simplices[1]}


@dataclass
class BoundaryReport:
    per_triangle: dict
    tol: float

    @property
    def max_deviation(self) -> float:
        return max(self.per_triangle.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tol

    def as_dict(self):
        worst = max(self.per_triangle, key=self.per_triangle.get) if self.per_triangle else None
        return {"check": "boundary_identity", "status": "PASS" if self.passed else "FAIL",
                "max_deviation": self.max_deviation, "worst": simplex_key(worst) if worst else None,
                "triangles": len(self.per_triangle), "tol": self.tol}


def boundary_identity_sides(cb: ConnectiveBundle, tri):
    """(LHS, RHS) of the Cech-boundary identity on U_123.

    LHS = u_12^*(alpha_23) - alpha_13 + alpha_12
    RHS = Ad(h_13^-1)(alpha_3 - Ad(c^-1) alpha_3 - c^-1 dc)
    """
    i1, i2, i3 = tri
    gc = cb.gc
    lhs = cb.pull_difference(i1, i2, cb.alpha_ij(i2, i3)) - cb.alpha_ij(i1, i3) + cb.alpha_ij(i1, i2)
    lhs = lhs.restrict(tri)
    a3 = cb.alphas[i3].restrict(tri)
    c = gc.c_of(i1, i2, i3)
    twisted = a3 if gc.central else ad_transport(c, a3)
    inner = a3 - twisted - maurer_cartan(c, tol_log=cb.tol_log)
    if cb.mode == "center":
        inner = _center(inner, inner.spec)
    rhs = cb.pull_difference(i1, i3, inner).restrict(tri)
    return lhs, rhs


def boundary_identity_check(cb: ConnectiveBundle, tol: float = TOL_ALG) -> BoundaryReport:
    out = {}
    for t in cb.gc.cover.base.simplices[2]:
        lhs, rhs = boundary_identity_sides(cb, t)
        out[t] = float(np.max(np.abs(lhs.values - rhs.values), initial=0.0))
    return BoundaryReport(out, tol)


# ------------------------------------------------------------------ curving

def curving_shift(L: Cochain, alpha: Cochain) -> Cochain:
    """D(nabla + alpha) = D(nabla) + d alpha + alpha cup alpha."""
    if L.degree != 2 or alpha.degree != 1:
        raise DegreeMismatch("curving_shift needs a 2-cochain and a 1-cochain")
    return L + coboundary(alpha) + cup(alpha, alpha)


def shift_discrepancy(L: Cochain, a: Cochain, b: Cochain) -> float:
    """How far shifting by a then b is from shifting by a + b.

    The shift law is not additive: the difference is a cup b + b cup a.
    """
    two_step = curving_shift(curving_shift(L, a), b)
    one_step = curving_shift(L, a + b)
    return (two_step - one_step).max_abs()


def compatibility_residual(cb: ConnectiveBundle, L: dict, edge) -> Cochain:
    i, j = edge
    a = cb.alpha_ij(i, j)
    return (L[j].restrict(edge) - L[i].restrict(edge)) - (coboundary(a) + cup(a, a))


class CurvingData:
    """Curving 2-cochains L_i with validated overlap compatibility

        L_j - L_i = d(alpha_ij) + alpha_ij cup alpha_ij   on U_ij.
    """

    def __init__(self, cb: ConnectiveBundle, L: dict | None = None, tol: float = TOL_ALG):
        self.cb = cb
        self.tol = tol
        sub = cb.gc.sub
        self.L = {}
        for i in cb.gc.cover.base.vertices:
            li = (L or {}).get(i)
            if li is None:
                li = Cochain.zeros(sub, 2, cb.spec, (i,))
            if li.degree != 2:
                raise DegreeMismatch(f"L_{i} must be a 2-cochain")
            li = li.restrict((i,))
            if cb.mode == "center":
                dev = float(np.max(np.abs(li.values - liecore.center_project_batch(cb.spec, li.values)), initial=0.0))
                if dev > 0:
                    raise MembershipError(f"L_{i} is not center-valued")
            self.L[i] = li
        self.residuals = {e: compatibility_residual(cb, self.L, e).max_abs() for e in cb.gc.cover.base.simplices[1]}
        worst = max(self.residuals.values(), default=0.0)
        if worst > tol:
            edge = max(self.residuals, key=self.residuals.get)
            raise IncompatibleCurving(f"curving incompatible on U_{simplex_key(edge)} (deviation {worst:.3e})",
                                      deviation=worst)

    @classmethod
    def center_valued(cls, cb: ConnectiveBundle, L: dict | None = None, **kw) -> "CurvingData":
        return cls(cb, {i: _center(l, cb.spec) for i, l in (L or {}).items()}, **kw)

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)


def curvature3(cb: ConnectiveBundle, cur: CurvingData, tol: float = TOL_ALG) -> Cochain:
    """Glue the local curvatures d(L_i) into a global 3-cochain.

    Raises:
        NotGluable: the local 3-cochains disagree on some overlap (always
            reported, never glued, outside center-valued/abelian data).
    """
    gc = cb.gc
    base = gc.cover.base
    if base.dim != 3:
        raise DegreeMismatch("curvature3 needs a 3-dimensional base")
    if cb.mode != "center" and not cb.spec.abelian:
        raise NotGluable("global curvature assembly requires center-valued or abelian data")
    omega = {i: coboundary(cur.L[i]) for i in base.vertices}
    dev = 0.0
    for i, j in base.simplices[1]:
        dev = max(dev, (omega[j].restrict((i, j)) - omega[i].restrict((i, j))).max_abs())
    if dev >= tol:
        raise NotGluable(f"local curvatures disagree on overlaps by {dev:.3e}", deviation=dev)
    sub = gc.sub
    phi = gc.cover.partition
    first = sub.sd.simplex_array(3)[:, 0]
    total = np.zeros_like(omega[base.vertices[0]].values)
    for i in base.vertices:
        total = total + phi[i][first][:, None, None] * omega[i].values
    return Cochain(sub, 3, total, None, cb.spec)


def characteristic_form(poly: InvariantPolynomial, omega: Cochain) -> Cochain:
    """Scalar (3l)-cochain P(Omega); only l = 1 is nonvacuous up to dimension 3."""
    sub = omega.sub
    if 3 * poly.degree > sub.dim:
        return _EmptyCochain(sub, 3 * poly.degree, omega.support, None)
    tr = np.trace(omega.values, axis1=-2, axis2=-1)
    vals = tr.imag if poly.part_for(omega.spec) == "im" else tr.real
    return Cochain(sub, 3, vals, omega.support, None)
