import numpy as np
import pytest

from gerbecalc import liecore as lc
from gerbecalc.connective import (ConnectiveBundle, CurvingData, boundary_identity_check, characteristic_form,
                                  connective_cocycle, curvature3, curving_shift, gauge_transform, shift_discrepancy)
from gerbecalc.dcalc import Cochain, GroupFunction, coboundary, cup, maurer_cartan
from gerbecalc.errors import DegreeMismatch, IncompatibleCurving, MembershipError, NotGluable
from gerbecalc.generators import monopole_on_torus3, trivial_cocycle
from gerbecalc.gerbedata import random_gerbe


def rand_alpha(cover, spec, rng, support, scale=0.5, degree=1):
    sub = cover.subdivision
    n = len(sub.sd.simplices[degree])
    return Cochain(sub, degree, lc.random_algebra(spec, rng, scale, size=n), support, spec)


def rand_g(cover, spec, rng, scale, support=(0,)):
    sub = cover.subdivision
    return GroupFunction(sub, lc.random_group(spec, rng, scale, size=len(sub.carrier)), support, spec)


# ------------------------------------------------------------------ gauge

def test_gauge_constant_and_identity(ico, rng):
    nabla = rand_alpha(ico, lc.SU2, rng, (0,))
    I = GroupFunction.identity(ico.subdivision, lc.SU2, (0,))
    assert (gauge_transform(I, nabla) - nabla).max_abs() < 1e-15
    g0 = lc.random_group(lc.SU2, rng)
    g = GroupFunction.constant(ico.subdivision, g0, lc.SU2, (0,))
    out = gauge_transform(g, nabla)
    expect = np.linalg.inv(g0) @ nabla.values @ g0
    assert np.max(np.abs(out.values - expect * nabla.mask[:, None, None])) < 1e-12


def test_gauge_composition_abelian_exact(ico, rng):
    nabla = rand_alpha(ico, lc.U1, rng, (0,))
    g1, g2 = rand_g(ico, lc.U1, rng, 0.5), rand_g(ico, lc.U1, rng, 0.5)
    g12 = GroupFunction(ico.subdivision, g1.values @ g2.values, (0,), lc.U1)
    lhs = gauge_transform(g12, nabla)
    rhs = gauge_transform(g2, gauge_transform(g1, nabla))
    assert (lhs - rhs).max_abs() < 1e-12


def test_gauge_composition_nonabelian_second_order(ico, rng):
    nabla = rand_alpha(ico, lc.SU2, rng, (0,))
    errs = []
    for eps in (1e-2, 1e-3):
        r = np.random.default_rng(5)
        g1, g2 = rand_g(ico, lc.SU2, r, eps), rand_g(ico, lc.SU2, r, eps)
        g12 = GroupFunction(ico.subdivision, g1.values @ g2.values, (0,), lc.SU2)
        errs.append((gauge_transform(g12, nabla) - gauge_transform(g2, gauge_transform(g1, nabla))).max_abs())
    assert errs[0] < 1e-2 and errs[1] < errs[0] / 50


# ------------------------------------------------------- connective cocycle

def test_connective_cocycle_trivial_gerbe(ico, rng):
    gc = trivial_cocycle(ico)
    alphas = {i: rand_alpha(ico, lc.U1, rng, (i,)) for i in ico.base.vertices}
    cb = ConnectiveBundle(gc, alphas)
    for (i, j), a in connective_cocycle(cb).items():
        diff = alphas[i].restrict((i, j)) - alphas[j].restrict((i, j))
        assert (a - diff).max_abs() < 1e-15


def test_connective_cocycle_antisymmetric(torus4, rng):
    gc = random_gerbe(torus4, lc.SU2, rng)
    alphas = {i: rand_alpha(torus4, lc.SU2, rng, (i,)) for i in torus4.base.vertices}
    cb = ConnectiveBundle(gc, alphas)
    for i, j in torus4.base.simplices[1][:20]:
        back = cb.pull_difference(i, j, cb.alpha_ij(j, i))
        assert (cb.alpha_ij(i, j) + back).max_abs() < 1e-12


def test_center_mode_projects(ico, rng):
    gc = random_gerbe(ico, lc.U2, rng, scale=0.1)
    alphas = {i: rand_alpha(ico, lc.U2, rng, (i,)) for i in ico.base.vertices}
    with pytest.raises(MembershipError):
        ConnectiveBundle(gc, alphas, mode="center")
    cb = ConnectiveBundle.center_valued(gc, alphas)
    for (i, j), a in list(connective_cocycle(cb).items())[:10]:
        v = a.values[a.mask]
        assert np.max(np.abs(v - v[:, :1, :1] * np.eye(2)), initial=0) < 1e-12
        mc = maurer_cartan(gc.h_of(i, j))
        expect = cb.alphas[i].restrict((i, j)) - cb.alphas[j].restrict((i, j)) \
            - mc.map_values(lambda x: lc.center_project_batch(lc.U2, x))
        assert (a - expect).max_abs() < 1e-12


# --------------------------------------------------------- boundary identity

def test_boundary_identity_u1_random(t3, rng):
    gc = random_gerbe(t3, lc.U1, rng, scale=0.1)
    alphas = {i: rand_alpha(t3, lc.U1, rng, (i,)) for i in t3.base.vertices}
    assert boundary_identity_check(ConnectiveBundle(gc, alphas)).max_deviation < 1e-12


def test_boundary_identity_center_mode(t3, rng):
    gc = random_gerbe(t3, lc.U2, rng, scale=0.1)
    alphas = {i: rand_alpha(t3, lc.U2, rng, (i,)) for i in t3.base.vertices}
    rep = boundary_identity_check(ConnectiveBundle.center_valued(gc, alphas))
    assert rep.passed and rep.max_deviation < 1e-12


@pytest.mark.parametrize("twist", [None, 3])
def test_boundary_identity_monopole_lift(twist):
    gc, _ = monopole_on_torus3(3, 1, twist)
    assert boundary_identity_check(ConnectiveBundle(gc)).max_deviation < 1e-12


def test_boundary_identity_global_shift(t3, rng):
    gc = random_gerbe(t3, lc.U1, rng, scale=0.1)
    beta = rand_alpha(t3, lc.U1, rng, None)
    cb = ConnectiveBundle(gc, {i: beta.restrict((i,)) for i in t3.base.vertices})
    assert boundary_identity_check(cb).max_deviation < 1e-12


def test_boundary_identity_detects_bad_c(t3, rng):
    gc = random_gerbe(t3, lc.U1, rng)
    t = t3.base.simplices[2][0]
    vals = np.array(gc.c[t].values)
    rng2 = np.random.default_rng(1)
    vals[gc.c[t].mask] *= np.exp(0.05j * rng2.standard_normal(int(gc.c[t].mask.sum())))[:, None, None]
    rep = boundary_identity_check(ConnectiveBundle(gc.with_c(t, vals)))
    assert not rep.passed


# ------------------------------------------------------------------ curving

def test_curving_shift_examples(ico, rng):
    L = rand_alpha(ico, lc.SU2, rng, (0,), degree=2)
    a = rand_alpha(ico, lc.SU2, rng, (0,))
    b = rand_alpha(ico, lc.SU2, rng, (0,))
    assert (curving_shift(L, Cochain.zeros(ico.subdivision, 1, lc.SU2, (0,))) - L).max_abs() == 0
    back = curving_shift(curving_shift(L, a), -a)
    assert (back - (L + cup(a, a) * 2)).max_abs() < 1e-12
    assert abs(shift_discrepancy(L, a, b) - (cup(a, b) + cup(b, a)).max_abs()) < 1e-12
    with pytest.raises(DegreeMismatch):
        curving_shift(a, a)


def test_incompatible_curving(ico, t3, rng):
    # edge overlaps of a surface are 1-dimensional, so any curving is compatible there
    cb = ConnectiveBundle(trivial_cocycle(ico))
    assert CurvingData(cb, {0: rand_alpha(ico, lc.U1, rng, (0,), degree=2)}).max_residual == 0
    cb = ConnectiveBundle(trivial_cocycle(t3))
    with pytest.raises(IncompatibleCurving) as err:
        CurvingData(cb, {0: rand_alpha(t3, lc.U1, rng, (0,), degree=2)})
    assert err.value.deviation > 0


def test_compatible_curving_from_global_form(ico, rng):
    B = rand_alpha(ico, lc.U1, rng, None, degree=2)
    cb = ConnectiveBundle(trivial_cocycle(ico))
    cur = CurvingData(cb, {i: B.restrict((i,)) for i in ico.base.vertices})
    assert cur.max_residual == 0


# ---------------------------------------------------------------- curvature

def test_curvature3_zero_and_exact(t3, rng):
    cb = ConnectiveBundle(trivial_cocycle(t3))
    assert curvature3(cb, CurvingData(cb)).max_abs() == 0
    beta = rand_alpha(t3, lc.U1, rng, None)
    dB = coboundary(beta)
    cur = CurvingData(cb, {i: dB.restrict((i,)) for i in t3.base.vertices})
    assert curvature3(cb, cur).max_abs() < 1e-12


def test_curvature3_refuses_nonabelian_full(t3, rng):
    cb = ConnectiveBundle(random_gerbe(t3, lc.U2, rng, scale=0.1))
    with pytest.raises(NotGluable):
        curvature3(cb, CurvingData(cb, tol=np.inf))


def test_curvature3_needs_3d(ico):
    cb = ConnectiveBundle(trivial_cocycle(ico))
    with pytest.raises(DegreeMismatch):
        curvature3(cb, CurvingData(cb))


def test_characteristic_form(t3, rng):
    cb = ConnectiveBundle(trivial_cocycle(t3))
    beta = rand_alpha(t3, lc.U1, rng, None, degree=2)
    B = beta.restrict((0,))
    omega = coboundary(beta)
    p1 = characteristic_form(lc.InvariantPolynomial(1), omega)
    assert np.allclose(p1.values, omega.values[:, 0, 0].imag)
    p2 = characteristic_form(lc.InvariantPolynomial(2), omega)
    assert p2.values.size == 0 and p2.degree == 6
    assert B.degree == 2
