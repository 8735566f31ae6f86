"""Simplicial cochain calculus on the barycentric subdivision.

Cochains are stored as dense arrays over *all* sd k-simplices (sorted vertex
order) and carry the overlap they are supported on; entries outside the
support are zero.  Values are scalars or ``(d, d)`` matrices.
"""
from __future__ import annotations

import numpy as np

from . import liecore
from .complexes import Subdivision, simplex_key
from .errors import DegreeMismatch, SpecMismatch, SupportMismatch
from .liecore import AlgebraElement, GroupSpec


def _join_support(a, b):
    """Support of a combination: the smaller overlap U_{a cup b}."""
    if a is None:
        return b
    if b is None:
        return a
    return tuple(sorted(set(a) | set(b)))


def _join_spec(a: GroupSpec | None, b: GroupSpec | None):
    if a is None or a == b:
        return b
    if b is None:
        return a
    if a.dim != b.dim:
        raise SpecMismatch(f"cannot combine {a} and {b} values")
    # su(2) sits inside u(2)
    return liecore.U2 if "U2" in (a.name, b.name) else a


class Cochain:
    """A degree-k cochain on the subdivision, supported on an overlap."""

    __slots__ = ("sub", "degree", "values", "support", "spec")

    def __init__(self, sub: Subdivision, degree: int, values, support=None, spec: GroupSpec | None = None):
        self.sub = sub
        self.degree = degree
        self.support = None if support is None else tuple(sorted(support))
        self.spec = spec
        vals = np.asarray(values)
        n = len(sub.sd.simplices[degree])
        if vals.shape[0] != n:
            raise DegreeMismatch(f"degree-{degree} cochain needs {n} values, got {vals.shape[0]}")
        if spec is not None and vals.shape[1:] != (spec.dim, spec.dim):
            raise SpecMismatch(f"{spec} values must be {spec.dim}x{spec.dim}")
        if self.support is not None:
            vals = vals * self.mask.reshape((-1,) + (1,) * (vals.ndim - 1))
        vals.setflags(write=False)
        self.values = vals

    # --------------------------------------------------------- construction

    @classmethod
    def zeros(cls, sub, degree, spec=None, support=None):
        n = len(sub.sd.simplices[degree])
        shape = (n,) if spec is None else (n, spec.dim, spec.dim)
        dtype = np.float64 if spec is None else spec.dtype
        return cls(sub, degree, np.zeros(shape, dtype=dtype), support, spec)

    @classmethod
    def from_function(cls, sub, degree, fn, spec=None, support=None):
        """Evaluate ``fn(sd_simplex_tuple)`` on every simplex of the support."""
        c = cls.zeros(sub, degree, spec, support)
        vals = np.array(c.values)
        for i in np.flatnonzero(c.mask):
            vals[i] = fn(sub.sd.simplices[degree][i])
        return cls(sub, degree, vals, support, spec)

    # ------------------------------------------------------------- queries

    @property
    def mask(self) -> np.ndarray:
        if self.support is None:
            return np.ones(len(self.sub.sd.simplices[self.degree]), dtype=bool)
        return self.sub.overlap_mask(self.support, self.degree)

    @property
    def is_scalar(self) -> bool:
        return self.values.ndim == 1

    def value(self, simplex):
        """Value on an oriented simplex given in any vertex order."""
        idx = self.sub.sd.index[self.degree][tuple(sorted(simplex))]
        from .complexes import perm_sign
        return perm_sign(simplex) * self.values[idx]

    def items(self):
        """(sorted simplex, value) pairs over the support."""
        level = self.sub.sd.simplices[self.degree]
        for i in np.flatnonzero(self.mask):
            yield level[i], self.values[i]

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values), initial=0.0))

    def restrict(self, support) -> "Cochain":
        return Cochain(self.sub, self.degree, self.values, _join_support(self.support, support), self.spec)

    def map_values(self, fn) -> "Cochain":
        return Cochain(self.sub, self.degree, fn(self.values), self.support, self.spec)

    def __repr__(self):
        where = "global" if self.support is None else f"U_{simplex_key(self.support)}"
        return f"Cochain(degree={self.degree}, {where}, spec={self.spec})"

    # ---------------------------------------------------------- arithmetic

    def _combine(self, other, op):
        if not isinstance(other, Cochain):
            return NotImplemented
        if other.degree != self.degree:
            raise DegreeMismatch(f"degrees {self.degree} and {other.degree}")
        if other.sub is not self.sub:
            raise SupportMismatch("cochains live on different complexes")
        return Cochain(self.sub, self.degree, op(self.values, other.values),
                       _join_support(self.support, other.support), _join_spec(self.spec, other.spec))

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __neg__(self):
        return self.map_values(np.negative)

    def __mul__(self, s):
        if isinstance(s, Cochain):
            return NotImplemented
        return self.map_values(lambda v: v * s)

    __rmul__ = __mul__


class GroupFunction:
    """Group-valued function on the sd vertices of an overlap."""

    __slots__ = ("sub", "values", "support", "spec")

    def __init__(self, sub: Subdivision, values, support=None, spec: GroupSpec | None = None, check=True):
        self.sub = sub
        self.spec = spec
        self.support = None if support is None else tuple(sorted(support))
        vals = np.array(values, dtype=spec.dtype, copy=True)
        if vals.shape != (len(sub.carrier), spec.dim, spec.dim):
            raise SpecMismatch("group function needs one matrix per sd vertex")
        vals[~self.mask] = np.eye(spec.dim)
        if check:
            dev = liecore.group_defect(spec, vals)
            if dev > liecore.TOL_GRP:
                raise liecore.MembershipError(f"group function leaves {spec} (defect {dev:.3e})")
        vals.setflags(write=False)
        self.values = vals

    @classmethod
    def constant(cls, sub, mat, spec, support=None):
        vals = np.broadcast_to(np.asarray(mat, dtype=spec.dtype), (len(sub.carrier), spec.dim, spec.dim))
        return cls(sub, vals, support, spec)

    @classmethod
    def identity(cls, sub, spec, support=None):
        return cls.constant(sub, np.eye(spec.dim), spec, support)

    @property
    def mask(self):
        if self.support is None:
            return np.ones(len(self.sub.carrier), dtype=bool)
        return self.sub.overlap_mask(self.support, 0)

    def inv(self) -> "GroupFunction":
        return GroupFunction(self.sub, np.conj(np.swapaxes(self.values, -1, -2)), self.support, self.spec, check=False)

    def __matmul__(self, other: "GroupFunction") -> "GroupFunction":
        return GroupFunction(self.sub, self.values @ other.values, _join_support(self.support, other.support),
                             _join_spec(self.spec, other.spec), check=False)

    def restrict(self, support) -> "GroupFunction":
        return GroupFunction(self.sub, self.values, _join_support(self.support, support), self.spec, check=False)

    def at(self, sd_vertex: int) -> np.ndarray:
        return self.values[sd_vertex]


# ----------------------------------------------------------------- operators

def _flat(values):
    return values.reshape(values.shape[0], -1)


def coboundary(c: Cochain) -> Cochain:
    sd = c.sub.sd
    if c.degree >= sd.dim:
        return _EmptyCochain(c.sub, c.degree + 1, c.support, c.spec)
    d = sd.coboundary_matrices[c.degree]
    out = (d @ _flat(c.values)).reshape((d.shape[0],) + c.values.shape[1:])
    return Cochain(c.sub, c.degree + 1, out, c.support, c.spec)


class _EmptyCochain(Cochain):
    """Cochain of degree above the dimension (no simplices)."""

    def __init__(self, sub, degree, support, spec):
        self.sub, self.degree, self.support, self.spec = sub, degree, support, spec
        shape = (0,) if spec is None else (0, spec.dim, spec.dim)
        self.values = np.zeros(shape)

    @property
    def mask(self):
        return np.zeros(0, dtype=bool)


def _product(x, y):
    if x.ndim == 1 and y.ndim == 1:
        return x * y
    if x.ndim == 1:
        return x[:, None, None] * y
    if y.ndim == 1:
        return x * y[:, None, None]
    return x @ y


def cup(a: Cochain, b: Cochain) -> Cochain:
    """(a cup b)(v0..v_{p+q}) = a(v0..vp) b(vp..v_{p+q}), matrix product of values."""
    if a.sub is not b.sub:
        raise SupportMismatch("cochains live on different complexes")
    p, q = a.degree, b.degree
    if p + q > a.sub.dim:
        return _EmptyCochain(a.sub, p + q, _join_support(a.support, b.support), _join_spec(a.spec, b.spec))
    front, back = a.sub.sd.front_back(p, q)
    return Cochain(a.sub, p + q, _product(a.values[front], b.values[back]),
                   _join_support(a.support, b.support), _join_spec(a.spec, b.spec))


def maurer_cartan(g: GroupFunction, tol_log: float = liecore.TOL_LOG) -> Cochain:
    """Discrete g^-1 dg: edge (x -> y) maps to log(g(x)^-1 g(y))."""
    sd = g.sub.sd
    edges = sd.simplex_array(1)
    mask = g.sub.overlap_mask(g.support, 1) if g.support is not None else np.ones(len(edges), dtype=bool)
    sel = np.flatnonzero(mask)
    gx = g.values[edges[sel, 0]]
    gy = g.values[edges[sel, 1]]
    rel = np.conj(np.swapaxes(gx, -1, -2)) @ gy
    labels = [simplex_key(sd.simplices[1][i]) for i in sel]
    logs = liecore.logm_batch(rel, tol_log=tol_log, where=labels)
    vals = np.zeros((len(edges), g.spec.dim, g.spec.dim), dtype=g.spec.dtype)
    vals[sel] = logs.real if g.spec.field == "real" else logs
    return Cochain(g.sub, 1, vals, g.support, g.spec)


def ad_transport(h: GroupFunction, c: Cochain) -> Cochain:
    """Ad(h(v0)^-1) applied to the value on each simplex, v0 its first vertex."""
    if h.sub is not c.sub:
        raise SupportMismatch("different complexes")
    if c.is_scalar:
        return c.restrict(h.support)
    support = _join_support(h.support, c.support)
    sel = np.flatnonzero(c.sub.overlap_mask(support, c.degree)) if support is not None else slice(None)
    hv = h.values[c.sub.sd.simplex_array(c.degree)[sel, 0]]
    out = np.zeros_like(c.values)
    out[sel] = np.conj(np.swapaxes(hv, -1, -2)) @ c.values[sel] @ hv
    return Cochain(c.sub, c.degree, out, support, c.spec)


def integrate(c: Cochain):
    """Orientation-signed sum over the top sd simplices of a closed complex."""
    sd = c.sub.sd
    if c.degree != sd.dim:
        raise DegreeMismatch(f"can only integrate top-degree cochains (got degree {c.degree})")
    if c.support is not None:
        raise SupportMismatch("integration needs a global cochain")
    o = sd.orientation
    if c.is_scalar:
        return float(np.sum(o * c.values)) if not np.iscomplexobj(c.values) else complex(np.sum(o * c.values))
    total = np.einsum("n,nij->ij", o.astype(c.values.dtype), c.values)
    if c.spec is None:
        return total
    return AlgebraElement(c.spec, total, tol=1e-8)
