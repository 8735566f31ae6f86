"""Matrix Lie groups U(1), SU(2), U(2), SO(3) and their Lie algebras.

Single values are wrapped in :class:`GroupElement` / :class:`AlgebraElement`,
which validate membership on construction.  The ``*_batch`` helpers work on
stacked ``(n, d, d)`` arrays and are what the cochain layer uses.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ArityError, BranchCutError, MembershipError, SpecMismatch

TOL_GRP = 1e-10
TOL_LOG = 1e-6
TOL_ALG = 1e-9
TOL_LIN = 1e-12


@dataclass(frozen=True)
class GroupSpec:
    name: str
    dim: int
    field: str  # "real" or "complex"

    @property
    def dtype(self):
        return np.float64 if self.field == "real" else np.complex128

    @property
    def abelian(self) -> bool:
        return self.name == "U1"

    def __str__(self):
        return self.name


U1 = GroupSpec("U1", 1, "complex")
SU2 = GroupSpec("SU2", 2, "complex")
U2 = GroupSpec("U2", 2, "complex")
SO3 = GroupSpec("SO3", 3, "real")

GROUPS = {g.name: g for g in (U1, SU2, U2, SO3)}


def group_spec(name: str) -> GroupSpec:
    try:
        return GROUPS[name.upper()]
    except KeyError:
        raise SpecMismatch(f"unknown group {name!r}; expected one of {sorted(GROUPS)}")


def _as_stack(mats) -> np.ndarray:
    a = np.asarray(mats)
    return a[None] if a.ndim == 2 else a


def _maxabs(a) -> float:
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


def group_defect(spec: GroupSpec, mats) -> float:
    """Largest entrywise violation of the membership equations."""
    m = _as_stack(mats)
    eye = np.eye(spec.dim)
    dev = _maxabs(np.conj(np.swapaxes(m, -1, -2)) @ m - eye)
    if spec.field == "real":
        dev = max(dev, _maxabs(np.imag(m)))
    if spec.name in ("SU2", "SO3"):
        dev = max(dev, _maxabs(np.linalg.det(m) - 1.0))
    return dev


def algebra_defect(spec: GroupSpec, mats) -> float:
    m = _as_stack(mats)
    dev = _maxabs(m + np.conj(np.swapaxes(m, -1, -2)))
    if spec.field == "real":
        dev = max(dev, _maxabs(np.imag(m)))
    if spec.name == "SU2":
        dev = max(dev, _maxabs(np.trace(m, axis1=-2, axis2=-1)))
    return dev


def reproject(spec: GroupSpec, mat) -> np.ndarray:
    """Nearest group element via polar decomposition.

    Offered for cleaning up drifted data; nothing in the library calls it
    implicitly.
    """
    u, _ = scipy.linalg.polar(np.asarray(mat, dtype=spec.dtype))
    if spec.name == "SU2":
        u = u / np.sqrt(np.linalg.det(u))
    elif spec.name == "SO3" and np.linalg.det(u) < 0:
        raise MembershipError("orientation-reversing matrix has no SO3 projection")
    return u


@dataclass(frozen=True, eq=False)
class GroupElement:
    spec: GroupSpec
    mat: np.ndarray = field(repr=False)
    tol: float = TOL_GRP

    def __post_init__(self):
        m = np.array(self.mat, dtype=self.spec.dtype)
        if m.shape != (self.spec.dim, self.spec.dim):
            raise MembershipError(f"{self.spec} element must be {self.spec.dim}x{self.spec.dim}, got {m.shape}")
        dev = group_defect(self.spec, m)
        if dev > self.tol:
            raise MembershipError(f"matrix is not in {self.spec} (defect {dev:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    @classmethod
    def identity(cls, spec: GroupSpec) -> "GroupElement":
        return cls(spec, np.eye(spec.dim))

    def inv(self) -> "GroupElement":
        return GroupElement(self.spec, np.conj(self.mat.T))

    def __matmul__(self, other):
        return mul(self, other)


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    spec: GroupSpec
    mat: np.ndarray = field(repr=False)
    tol: float = TOL_GRP

    def __post_init__(self):
        m = np.array(self.mat, dtype=self.spec.dtype)
        if m.shape != (self.spec.dim, self.spec.dim):
            raise MembershipError(f"{self.spec} algebra element must be {self.spec.dim}x{self.spec.dim}")
        dev = algebra_defect(self.spec, m)
        if dev > self.tol * max(1.0, _maxabs(m)):
            raise MembershipError(f"matrix is not in the Lie algebra of {self.spec} (defect {dev:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    @classmethod
    def zero(cls, spec: GroupSpec) -> "AlgebraElement":
        return cls(spec, np.zeros((spec.dim, spec.dim)))

    def __add__(self, other):
        _same_spec(self, other)
        return AlgebraElement(self.spec, self.mat + other.mat)

    def __sub__(self, other):
        _same_spec(self, other)
        return AlgebraElement(self.spec, self.mat - other.mat)

    def __neg__(self):
        return AlgebraElement(self.spec, -self.mat)

    def __mul__(self, s):
        return AlgebraElement(self.spec, self.mat * s)

    __rmul__ = __mul__


def _same_spec(a, b):
    if a.spec != b.spec:
        raise SpecMismatch(f"{a.spec} vs {b.spec}")


def bracket(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    _same_spec(x, y)
    return AlgebraElement(x.spec, x.mat @ y.mat - y.mat @ x.mat)


def mul(a: GroupElement, b: GroupElement) -> GroupElement:
    _same_spec(a, b)
    return GroupElement(a.spec, a.mat @ b.mat)


def exp_alg(x: AlgebraElement) -> GroupElement:
    m = expm_batch(x.mat[None])[0]
    if x.spec.field == "real":
        m = m.real
    return GroupElement(x.spec, m)


def log_grp(g: GroupElement, tol_log: float = TOL_LOG) -> AlgebraElement:
    """Principal logarithm.

    Raises:
        BranchCutError: if an eigenvalue lies within ``tol_log`` of -1.
    """
    m = logm_batch(g.mat[None], tol_log=tol_log)[0]
    if g.spec.field == "real":
        m = m.real
    if g.spec.name == "SU2":
        # eigen-angles sum to 0 mod 2pi; the principal branch keeps them in (-pi, pi]
        m = m - np.trace(m) / 2 * np.eye(2)
    return AlgebraElement(g.spec, m, tol=TOL_ALG)


def adjoint(g: GroupElement, x: AlgebraElement) -> AlgebraElement:
    _same_spec(g, x)
    return AlgebraElement(x.spec, g.mat @ x.mat @ np.conj(g.mat.T))


def center_project(x: AlgebraElement) -> AlgebraElement:
    return AlgebraElement(x.spec, center_project_batch(x.spec, x.mat[None])[0])


# ---------------------------------------------------------------- batched

def expm_batch(mats) -> np.ndarray:
    m = _as_stack(mats)
    if m.shape[-1] == 1:
        return np.exp(m)
    return scipy.linalg.expm(m)


def logm_batch(mats, tol_log: float = TOL_LOG, where=None) -> np.ndarray:
    """Principal log of a stack of normal (unitary/orthogonal) matrices.

    Args:
        mats: array of shape (n, d, d).
        tol_log: minimum distance of every eigenvalue from -1.
        where: optional labels, one per matrix, used in the error message.
    """
    m = np.asarray(_as_stack(mats), dtype=np.complex128)
    n, d, _ = m.shape
    if n == 0:
        return np.zeros_like(m)
    if d == 1:
        dist = np.abs(m[:, 0, 0] + 1.0)
        _check_cut(dist, tol_log, where)
        return np.log(m)
    w, v = np.linalg.eig(m)
    dist = np.min(np.abs(w + 1.0), axis=-1)
    _check_cut(dist, tol_log, where)
    out = np.empty_like(m)
    cond = np.linalg.cond(v)
    good = cond < 1e6
    if np.any(good):
        vg = v[good]
        out[good] = (vg * np.log(w[good])[:, None, :]) @ np.linalg.inv(vg)
    for k in np.flatnonzero(~good):
        # near-degenerate spectrum: the complex Schur form of a normal matrix is diagonal
        t, z = scipy.linalg.schur(m[k], output="complex")
        out[k] = (z * np.log(np.diag(t))[None, :]) @ np.conj(z.T)
    return out


def _check_cut(dist, tol_log, where):
    bad = np.flatnonzero(dist <= tol_log)
    if bad.size:
        k = int(bad[0])
        label = where[k] if where is not None else k
        raise BranchCutError(f"eigenvalue within {tol_log:g} of -1 at {label}", where=label)


def adjoint_batch(g, x) -> np.ndarray:
    """g x g^-1 for stacks of unitary g."""
    return g @ x @ np.conj(np.swapaxes(g, -1, -2))


def center_project_batch(spec: GroupSpec, x) -> np.ndarray:
    x = np.asarray(x)
    if spec.name == "U1":
        return x.copy()
    if spec.name == "U2":
        tr = np.trace(x, axis1=-2, axis2=-1) / spec.dim
        return tr[..., None, None] * np.eye(spec.dim)
    return np.zeros_like(x)


# ------------------------------------------------------ invariant polynomials

@dataclass(frozen=True)
class InvariantPolynomial:
    """Symmetrized trace polynomial of a given degree.

    ``part`` selects the real or imaginary part of the trace.  By default odd
    degrees on the unitary algebras use the imaginary part (the real part of
    an odd symmetrized trace of anti-hermitian matrices vanishes).
    """

    degree: int
    part: str | None = None

    def __post_init__(self):
        if self.degree < 1:
            raise ArityError("degree must be positive")
        if self.part not in (None, "re", "im"):
            raise ValueError("part must be 're', 'im' or None")

    def part_for(self, spec: GroupSpec) -> str:
        if self.part is not None:
            return self.part
        if spec.field == "complex" and self.degree % 2 == 1:
            return "im"
        return "re"


def symmetrized_trace(mats) -> complex:
    mats = list(mats)
    total = 0j
    for perm in itertools.permutations(range(len(mats))):
        prod = mats[perm[0]]
        for k in perm[1:]:
            prod = prod @ mats[k]
        total += np.trace(prod)
    return total / math.factorial(len(mats))


def eval_invariant(poly: InvariantPolynomial, *xs: AlgebraElement) -> float:
    if len(xs) == 1 and isinstance(xs[0], (list, tuple)):
        xs = tuple(xs[0])
    if len(xs) != poly.degree:
        raise ArityError(f"degree-{poly.degree} polynomial got {len(xs)} arguments")
    spec = xs[0].spec
    for x in xs[1:]:
        _same_spec(xs[0], x)
    t = symmetrized_trace([x.mat for x in xs])
    return float(t.imag if poly.part_for(spec) == "im" else t.real)


# --------------------------------------------------------------- samplers

def random_algebra(spec: GroupSpec, rng, scale: float = 1.0, size=None) -> np.ndarray:
    """Random algebra matrices with entries of order ``scale``."""
    shape = (() if size is None else (size,)) + (spec.dim, spec.dim)
    a = rng.standard_normal(shape)
    if spec.field == "complex":
        a = a + 1j * rng.standard_normal(shape)
    a = (a - np.conj(np.swapaxes(a, -1, -2))) / 2
    if spec.name == "SU2":
        a = a - (np.trace(a, axis1=-2, axis2=-1) / 2)[..., None, None] * np.eye(2)
    return a * scale


def random_group(spec: GroupSpec, rng, scale: float = 1.0, size=None) -> np.ndarray:
    m = expm_batch(_as_stack(random_algebra(spec, rng, scale, size)))
    if spec.field == "real":
        m = m.real
    return m if size is not None else m[0]
