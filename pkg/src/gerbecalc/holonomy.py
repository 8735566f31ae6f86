"""Surface holonomy by descent through the star cover.

Stages, for a closed oriented triangulated surface:

1. L'_i with dL'_i = L_i on each star (cone contraction at the vertex).
2. L'_ij with dL'_ij = alpha_ij cup alpha_ij on each edge overlap.
3. h_ij = alpha_ij + L'_ij, rho_ij = L'_j - L'_i - h_ij (closed), dL''_ij = rho_ij.
4. kappa_ijk = C_ijk + (delta L'')_ijk, a constant on every triangle overlap,
   where dC_ijk = (delta h)_ijk.
5. The Cech 2-cocycle kappa is carried to a global 2-cochain by the discrete
   Cech-de Rham zig-zag built from the partition of unity.
6. value = exp(integral of that 2-cochain).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import liecore
from .complexes import perm_sign, simplex_key
from .connective import ConnectiveBundle, CurvingData
from .dcalc import Cochain, cup
from .errors import DegreeMismatch, MembershipError, NotConstant, SupportMismatch
from .liecore import AlgebraElement, GroupElement, TOL_ALG

FRAME_CONVENTION = "delta(h) and delta(L'') transported to the least-index patch frame by Ad(h^-1)"


@dataclass
class HolonomyProblem:
    """Pulled-back connective data over a closed oriented surface."""

    cb: ConnectiveBundle
    cur: CurvingData

    def __post_init__(self):
        if self.cur.cb is not self.cb:
            raise SupportMismatch("curving data belongs to a different connective bundle")
        if self.cover.base.dim != 2:
            raise DegreeMismatch("holonomy needs a 2-dimensional surface")

    @property
    def cover(self):
        return self.cb.gc.cover

    @property
    def sub(self):
        return self.cb.gc.sub

    @property
    def spec(self):
        return self.cb.spec


@dataclass
class HolonomyReport:
    kappa: dict
    density: Cochain
    integral: AlgebraElement
    value: GroupElement
    diagnostics: dict = field(default_factory=dict)
    frame: str = FRAME_CONVENTION

    def as_dict(self):
        from .io import matrix_to_json
        return {
            "kappa": {simplex_key(t): matrix_to_json(k) for t, k in sorted(self.kappa.items())},
            "integral": matrix_to_json(self.integral.mat),
            "value": matrix_to_json(self.value.mat),
            "diagnostics": self.diagnostics,
            "frame": self.frame,
        }


def solve_potentials(problem: HolonomyProblem) -> dict:
    """L'_i = cone contraction of L_i at the barycenter of vertex i."""
    cover = problem.cover
    return {i: _cone(cover.overlap((i,)), problem.cur.L[i]) for i in cover.base.vertices}


def solve_wedge_potentials(problem: HolonomyProblem) -> dict:
    """L'_ij with d L'_ij = alpha_ij cup alpha_ij on U_ij."""
    cover = problem.cover
    out = {}
    for e in cover.base.simplices[1]:
        a = problem.cb.alpha_ij(*e)
        out[e] = _cone(cover.overlap(e), cup(a, a))
    return out


def _cone(overlap, c, tol=TOL_ALG):
    from .complexes import cone_contract
    return cone_contract(overlap, c, tol=tol)


def _residual(a: Cochain, b: Cochain, mask) -> float:
    return float(np.max(np.abs(a.values[mask] - b.values[mask]), initial=0.0))


def build_h_chain(problem: HolonomyProblem, Lp: dict, Lpij: dict, tol: float = TOL_ALG):
    """Corrected Cech 1-chain h_ij and the 0-cochains L''_ij.

    Returns:
        (h, Lpp, rho_residual) where rho_residual is the largest |d rho_ij|.

    Raises:
        NotClosed: rho_ij is not closed (inconsistent curving input).
    """
    from .dcalc import coboundary
    cover = problem.cover
    h, Lpp, res = {}, {}, 0.0
    for e in cover.base.simplices[1]:
        i, j = e
        h[e] = problem.cb.alpha_ij(i, j) + Lpij[e]
        rho = (Lp[j].restrict(e) - Lp[i].restrict(e)) - h[e]
        drho = coboundary(rho)
        res = max(res, float(np.max(np.abs(drho.values[cover.overlap(e).mask(2)]), initial=0.0)))
        Lpp[e] = _cone(cover.overlap(e), rho, tol=tol)
    return h, Lpp, res


def _transport(problem, i, j, x: Cochain) -> Cochain:
    return problem.cb.pull_difference(i, j, x)


def extract_constants(problem: HolonomyProblem, h: dict, Lpp: dict, tol: float = TOL_ALG):
    """kappa_ijk = C_ijk + (delta L'')_ijk read at the barycenter of ijk.

    The discrete cup alpha cup alpha is not graded-antisymmetric, so kappa is a
    matrix of the complexified algebra; it lies in the Lie algebra exactly
    when the wedge terms do.  ``holonomy`` reports the defect.

    Returns:
        (kappa, spread) with kappa a constant matrix per base triangle and
        spread the largest deviation from constancy over any overlap.

    Raises:
        NotConstant: some kappa varies over its overlap by more than ``tol``.
    """
    cover = problem.cover
    sub = problem.sub
    kappa, spread = {}, 0.0
    for t in cover.base.simplices[2]:
        i, j, k = t
        ov = cover.overlap(t)
        dh = _transport(problem, i, j, h[(j, k)]) - h[(i, k)].restrict(t) + h[(i, j)].restrict(t)
        C = _cone(ov, dh.restrict(t), tol=tol)
        dL = _transport(problem, i, j, Lpp[(j, k)]) - Lpp[(i, k)].restrict(t) + Lpp[(i, j)].restrict(t)
        total = (C + dL).values
        m = ov.mask(0)
        centre = total[ov.apex]
        s = float(np.max(np.abs(total[m] - centre), initial=0.0))
        spread = max(spread, s)
        if s > tol:
            raise NotConstant(f"kappa on U_{simplex_key(t)} is not constant (spread {s:.3e})", spread=s)
        kappa[t] = np.array(centre)
    return kappa, spread


def whitney_assemble(kappa: dict, cover, spec=None) -> Cochain:
    """Global 2-cochain representing the Cech 2-cocycle ``kappa``.

    Uses the zig-zag with the Cech contraction (K w)_{i0..} = sum_a phi_a w_{a i0..}
    (phi multiplying at the front vertex), which gives on each sd triangle
    (v0, v1, v2)

        -sum over ordered (a, b, c) of kappa_abc phi_a(v0) (phi_b(v1) - phi_b(v0)) (phi_c(v2) - phi_c(v1)),

    kappa extended to all orderings as an alternating function.  Exact in the
    sense that its integral is the pairing of kappa with the fundamental class.
    """
    sub = cover.subdivision
    phi = cover.partition
    tri = sub.sd.simplex_array(2)
    v0, v1, v2 = tri[:, 0], tri[:, 1], tri[:, 2]
    if spec is None:
        spec = next((k.spec for k in kappa.values() if isinstance(k, AlgebraElement)), None)
    kappa = {t: np.asarray(getattr(k, "mat", k)) for t, k in kappa.items()}
    sample = next(iter(kappa.values()), None)
    shape = (len(tri),) if sample is None else (len(tri),) + np.shape(sample)
    dens = np.zeros(shape, dtype=np.complex128 if sample is None else np.result_type(sample, np.complex128))
    for t, kap in kappa.items():
        weight = np.zeros(len(tri))
        for perm in itertools.permutations(t):
            a, b, c = perm
            pa, pb, pc = phi[a], phi[b], phi[c]
            weight += perm_sign([t.index(x) for x in perm]) * pa[v0] * (pb[v1] - pb[v0]) * (pc[v2] - pc[v1])
        dens -= weight.reshape((-1,) + (1,) * (dens.ndim - 1)) * kap
    return Cochain(sub, 2, dens, None, spec)


def holonomy(problem: HolonomyProblem, potentials: dict | None = None, tol: float = TOL_ALG) -> HolonomyReport:
    """Run the full pipeline.

    Args:
        problem: surface data.
        potentials: optional replacement for the stage-1 potentials L'_i (each
            must still satisfy dL'_i = L_i; used to probe choice independence).
        tol: tolerance for closedness and constancy checks.
    """
    Lp = solve_potentials(problem) if potentials is None else potentials
    cover = problem.cover
    pot_res = 0.0
    from .dcalc import coboundary
    for i in cover.base.vertices:
        m = cover.overlap((i,)).mask(2)
        pot_res = max(pot_res, _residual(coboundary(Lp[i]), problem.cur.L[i], m))
    Lpij = solve_wedge_potentials(problem)
    h, Lpp, rho_res = build_h_chain(problem, Lp, Lpij, tol=tol)
    kappa, spread = extract_constants(problem, h, Lpp, tol=tol)
    density = whitney_assemble(kappa, cover, problem.spec)
    spec = problem.spec
    raw = np.einsum("n,nij->ij", problem.sub.sd.orientation.astype(density.values.dtype), density.values)
    defect = liecore.algebra_defect(spec, raw)
    if defect > 1e-8 * max(1.0, float(np.max(np.abs(raw)))):
        raise MembershipError(f"integrate: integral leaves the Lie algebra of {spec} (defect {defect:.3e})")
    integral = AlgebraElement(spec, raw.real if spec.field == "real" else raw, tol=1e-8)
    mat = liecore.expm_batch(integral.mat[None])[0]
    if spec.field == "real":
        mat = mat.real
    value = GroupElement(spec, mat, tol=1e-8)
    kdef = max((liecore.algebra_defect(spec, k) for k in kappa.values()), default=0.0)
    diagnostics = {
        "potential_residual": pot_res,
        "rho_closedness": rho_res,
        "kappa_spread": spread,
        "kappa_algebra_defect": kdef,
        "integral_algebra_defect": defect,
        "cech_pairing": _matrix_list(cech_pairing(kappa, cover)),
        "tol": tol,
    }
    return HolonomyReport(kappa, density, integral, value, diagnostics)


def cech_pairing(kappa: dict, cover) -> np.ndarray:
    """Pairing of kappa with the fundamental class, in the zig-zag's sign.

    Equals -sum_t orientation(t) kappa_t; the sign comes from the two Cech
    contractions in the zig-zag, and with it the Whitney integral matches
    this value exactly.
    """
    base = cover.base
    total = None
    for t, o in zip(base.simplices[2], base.orientation):
        if t in kappa:
            v = -int(o) * np.asarray(getattr(kappa[t], "mat", kappa[t]))
            total = v if total is None else total + v
    return total if total is not None else np.zeros((1, 1))


def _matrix_list(m):
    from .io import matrix_to_json
    return matrix_to_json(m)
