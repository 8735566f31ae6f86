import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gerbecalc import liecore as lc
from gerbecalc.errors import ArityError, BranchCutError, MembershipError, SpecMismatch
from gerbecalc.liecore import AlgebraElement, GroupElement, InvariantPolynomial

SIGMA3 = np.array([[1, 0], [0, -1]])


def test_mul_examples():
    I = GroupElement.identity(lc.U2)
    assert np.allclose(lc.mul(I, I).mat, np.eye(2))
    g = GroupElement(lc.U2, lc.random_group(lc.U2, np.random.default_rng(0)))
    assert np.allclose(lc.mul(g, g.inv()).mat, np.eye(2), atol=1e-12)
    a = GroupElement(lc.U2, np.diag([np.exp(1j * np.pi / 3), 1]))
    b = GroupElement(lc.U2, np.diag([np.exp(1j * np.pi / 6), 1]))
    assert np.allclose((a @ b).mat, np.diag([1j, 1]), atol=1e-15)


def test_mul_spec_mismatch():
    with pytest.raises(SpecMismatch):
        lc.mul(GroupElement.identity(lc.U2), GroupElement.identity(lc.SU2))


def test_membership_rejected():
    with pytest.raises(MembershipError):
        GroupElement(lc.SU2, np.diag([1j, 1]))
    with pytest.raises(MembershipError):
        GroupElement(lc.SO3, -np.eye(3))
    with pytest.raises(MembershipError):
        AlgebraElement(lc.SU2, 1j * np.eye(2))
    with pytest.raises(MembershipError):
        AlgebraElement(lc.U1, [[1.0]])


def test_exp_examples():
    assert np.array_equal(lc.exp_alg(AlgebraElement.zero(lc.SU2)).mat, np.eye(2))
    assert np.allclose(lc.exp_alg(AlgebraElement(lc.U1, [[1j * np.pi / 2]])).mat, [[1j]])
    th = 0.7
    g = lc.exp_alg(AlgebraElement(lc.SU2, th / 2 * 1j * SIGMA3))
    assert np.allclose(g.mat, np.diag([np.exp(1j * th / 2), np.exp(-1j * th / 2)]), atol=1e-14)


def test_log_examples():
    assert np.allclose(lc.log_grp(GroupElement.identity(lc.U2)).mat, 0)
    assert np.allclose(lc.log_grp(GroupElement(lc.U1, [[np.exp(0.3j)]])).mat, [[0.3j]])


def test_log_branch_cut():
    with pytest.raises(BranchCutError):
        lc.log_grp(GroupElement(lc.U1, [[-1.0]]))
    with pytest.raises(BranchCutError):
        lc.log_grp(GroupElement(lc.SO3, np.diag([1.0, -1.0, -1.0])))
    near = GroupElement(lc.U1, [[np.exp(1j * (np.pi - 1e-3))]])
    assert np.isclose(lc.log_grp(near).mat[0, 0], 1j * (np.pi - 1e-3))


@pytest.mark.parametrize("spec", [lc.SU2, lc.U2, lc.SO3, lc.U1])
def test_log_exp_roundtrip(spec):
    rng = np.random.default_rng(7)
    for _ in range(50):
        x = lc.random_algebra(spec, rng, scale=0.4)
        x *= 0.9 / max(1.0, np.linalg.norm(x, 2))
        X = AlgebraElement(spec, x)
        back = lc.log_grp(lc.exp_alg(X))
        assert np.max(np.abs(back.mat - X.mat)) < 1e-9


def test_logm_degenerate_spectrum():
    # repeated eigenvalues route through the Schur fallback
    g = np.exp(0.4j) * np.eye(2)
    assert np.allclose(lc.logm_batch(g[None])[0], 0.4j * np.eye(2))


def test_adjoint_examples():
    rng = np.random.default_rng(1)
    X = AlgebraElement(lc.SU2, lc.random_algebra(lc.SU2, rng))
    assert np.allclose(lc.adjoint(GroupElement.identity(lc.SU2), X).mat, X.mat)
    z = AlgebraElement(lc.U1, [[0.4j]])
    assert np.allclose(lc.adjoint(GroupElement(lc.U1, [[np.exp(1.1j)]]), z).mat, z.mat)


def _coeffs(x):
    # x = sum_a v_a (i sigma_a / 2) with sigma_1, sigma_2, sigma_3
    s = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), SIGMA3]
    return np.array([(-1j * np.trace(si @ x)).real for si in s])


def test_adjoint_su2_is_rotation():
    t = 0.8
    g = lc.exp_alg(AlgebraElement(lc.SU2, t / 2 * 1j * SIGMA3))
    rng = np.random.default_rng(3)
    X = AlgebraElement(lc.SU2, lc.random_algebra(lc.SU2, rng))
    # g sigma_1 g^-1 = cos t sigma_1 - sin t sigma_2: rotation by -t about the 3-axis
    rot = np.array([[np.cos(t), np.sin(t), 0], [-np.sin(t), np.cos(t), 0], [0, 0, 1]])
    assert np.allclose(_coeffs(lc.adjoint(g, X).mat), rot @ _coeffs(X.mat), atol=1e-12)


def test_adjoint_preserves_bracket():
    rng = np.random.default_rng(4)
    for spec in (lc.SU2, lc.U2, lc.SO3):
        for _ in range(20):
            g = GroupElement(spec, lc.random_group(spec, rng))
            X = AlgebraElement(spec, lc.random_algebra(spec, rng))
            Y = AlgebraElement(spec, lc.random_algebra(spec, rng))
            lhs = lc.adjoint(g, lc.bracket(X, Y))
            rhs = lc.bracket(lc.adjoint(g, X), lc.adjoint(g, Y))
            assert np.max(np.abs(lhs.mat - rhs.mat)) < 1e-10


def test_center_project_examples():
    x = AlgebraElement(lc.U1, [[0.5j]])
    assert np.allclose(lc.center_project(x).mat, x.mat)
    rng = np.random.default_rng(5)
    assert np.array_equal(lc.center_project(AlgebraElement(lc.SO3, lc.random_algebra(lc.SO3, rng))).mat, np.zeros((3, 3)))
    y = AlgebraElement(lc.U2, 1j * np.eye(2) + 1j * SIGMA3)
    assert np.allclose(lc.center_project(y).mat, 1j * np.eye(2))


@pytest.mark.parametrize("spec", [lc.U1, lc.SU2, lc.U2, lc.SO3])
def test_center_project_idempotent_and_invariant(spec):
    rng = np.random.default_rng(6)
    for _ in range(50):
        X = AlgebraElement(spec, lc.random_algebra(spec, rng))
        g = GroupElement(spec, lc.random_group(spec, rng))
        p = lc.center_project(X)
        assert np.max(np.abs(lc.center_project(p).mat - p.mat)) < 1e-12
        assert np.max(np.abs(lc.center_project(lc.adjoint(g, X)).mat - p.mat)) < 1e-10


def test_eval_invariant_examples():
    P1 = InvariantPolynomial(1, part="re")
    assert lc.eval_invariant(P1, AlgebraElement(lc.U1, [[0.3j]])) == 0.0
    assert np.isclose(lc.eval_invariant(InvariantPolynomial(1), AlgebraElement(lc.U1, [[0.3j]])), 0.3)
    rng = np.random.default_rng(8)
    X = AlgebraElement(lc.SU2, lc.random_algebra(lc.SU2, rng))
    assert np.isclose(lc.eval_invariant(InvariantPolynomial(2), X, X), np.trace(X.mat @ X.mat).real)
    with pytest.raises(ArityError):
        lc.eval_invariant(InvariantPolynomial(2), X)
    with pytest.raises(ArityError):
        InvariantPolynomial(0)


@pytest.mark.parametrize("spec", [lc.U1, lc.SU2, lc.U2, lc.SO3])
@pytest.mark.parametrize("degree", [1, 2, 3])
def test_eval_invariant_ad_invariant_and_symmetric(spec, degree):
    rng = np.random.default_rng(degree)
    P = InvariantPolynomial(degree)
    for _ in range(1000 if degree == 2 else 100):
        xs = [AlgebraElement(spec, lc.random_algebra(spec, rng)) for _ in range(degree)]
        g = GroupElement(spec, lc.random_group(spec, rng))
        base = lc.eval_invariant(P, *xs)
        assert abs(lc.eval_invariant(P, *[lc.adjoint(g, x) for x in xs]) - base) < 1e-10
        assert abs(lc.eval_invariant(P, *xs[::-1]) - base) < 1e-10


def test_reproject():
    rng = np.random.default_rng(9)
    g = lc.random_group(lc.SU2, rng) + 1e-6 * rng.standard_normal((2, 2))
    assert lc.group_defect(lc.SU2, lc.reproject(lc.SU2, g)) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
def test_u2_diagonal_product(a, b):
    x = GroupElement(lc.U2, np.diag([np.exp(1j * a), 1]))
    y = GroupElement(lc.U2, np.diag([np.exp(1j * b), 1]))
    assert np.allclose((x @ y).mat, np.diag([np.exp(1j * (a + b)), 1]))
