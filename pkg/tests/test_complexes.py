import itertools
from fractions import Fraction

import numpy as np
import pytest

from gerbecalc import complexes as cx
from gerbecalc.dcalc import Cochain, coboundary
from gerbecalc.errors import NonManifold, NonOrientable, NotClosed, NotCone


def test_icosahedron_counts(ico):
    K = ico.base
    assert K.counts() == [12, 30, 20]
    assert K.euler_characteristic() == 2


@pytest.mark.parametrize("n,m", [(3, 3), (4, 4), (5, 3)])
def test_torus_euler(n, m):
    K = cx.build_complex(cx.torus_mesh(n, m))
    assert K.counts() == [n * m, 3 * n * m, 2 * n * m]
    assert K.euler_characteristic() == 0


def test_torus3_counts():
    K = cx.build_complex(cx.torus3_mesh(3))
    assert K.counts() == [27, 189, 324, 162]
    assert K.euler_characteristic() == 0


def test_sphere_refinement():
    K = cx.build_complex(cx.sphere_mesh(1))
    assert K.counts() == [42, 120, 80]
    assert K.euler_characteristic() == 2


def test_two_triangles_rejected():
    with pytest.raises(NonManifold):
        cx.TriangulatedComplex([(0, 1, 2), (0, 2, 1)])


def test_pinched_vertex_rejected():
    # two octahedra sharing one vertex: pseudomanifold, but the link of 0 is two circles
    octa = [(0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 1), (5, 2, 1), (5, 3, 2), (5, 4, 3), (5, 1, 4)]
    shifted = [tuple(v if v == 0 else v + 10 for v in t) for t in octa]
    with pytest.raises(NonManifold):
        cx.TriangulatedComplex(octa + shifted)


def test_open_surface_rejected():
    with pytest.raises(NonManifold):
        cx.TriangulatedComplex([(0, 1, 2), (0, 2, 3)])


def test_nonorientable_rejected():
    # 6-vertex real projective plane
    rp2 = [(0, 1, 4), (0, 4, 3), (0, 3, 5), (0, 5, 2), (0, 2, 1),
           (1, 2, 3), (1, 3, 5), (1, 5, 4), (2, 4, 5), (2, 3, 4)]
    with pytest.raises(NonOrientable):
        cx.TriangulatedComplex(rp2)


def test_incoherent_orientation_rejected():
    mesh = cx.icosahedron_mesh()
    mesh["orientation"][0] = -1
    with pytest.raises(NonOrientable):
        cx.build_complex(mesh)


def test_subdivision_counts(ico):
    sd = ico.sd
    assert sd.counts() == [62, 180, 120]
    assert sd.euler_characteristic() == ico.base.euler_characteristic()
    single = cx.barycentric_subdivide(cx.build_complex(cx.icosahedron_mesh()))
    # every base triangle carries exactly 3! sd triangles
    tops = single.sd.simplex_array(2)
    carriers = [single.carrier[r[-1]] for r in tops.tolist()]
    assert all(carriers.count(t) == 6 for t in single.base.simplices[2])


def test_subdivision_orientation_coherent(t3):
    sd = t3.sd
    # coherence: every sd (dim-1)-face appears with opposite induced signs
    tot = {}
    for s, o in zip(sd.simplices[sd.dim], sd.orientation):
        for r in range(len(s)):
            f = s[:r] + s[r + 1:]
            tot[f] = tot.get(f, 0) + int(o) * (-1) ** r
    assert all(v == 0 for v in tot.values())


def test_nerve_property(ico):
    K = ico.base
    simplices = {s for level in K.simplices for s in level}
    for k in range(1, 5):
        for sigma in itertools.combinations(K.vertices, k):
            ov = ico.overlap(sigma)
            assert (not ov.empty) == (tuple(sigma) in simplices)
            if k == 4:
                assert ov.empty


def test_overlaps_contractible(ico, t3):
    for cover in (ico, t3):
        K = cover.base
        for level in K.simplices:
            for sigma in level[:40]:
                assert cover.overlap(sigma).euler_characteristic() == 1


def test_overlap_membership_rule(t3):
    sub = t3.subdivision
    for sigma in [t3.base.simplices[1][5], t3.base.simplices[2][7]]:
        ov = t3.overlap(sigma)
        verts = set(np.flatnonzero(ov.mask(0)).tolist())
        assert verts == {v for v, tau in enumerate(sub.carrier) if set(sigma) <= set(tau)}
        for s in ov.simplices(2):
            assert all(v in verts for v in s)


def test_partition_of_unity(ico, t3):
    for cover in (ico, t3):
        pu = cover.partition
        assert np.max(np.abs(pu.phi.sum(axis=0) - 1)) < 1e-15
        assert all(s == Fraction(1) for s in pu.exact_sums())
        for i in cover.base.vertices[:5]:
            assert np.all(pu[i][~cover.overlap((i,)).mask(0)] == 0)


def test_cone_contract_zero_and_exact(ico, rng):
    sub = ico.subdivision
    ov = ico.overlap((3,))
    z = Cochain.zeros(sub, 2, None, (3,))
    assert cx.cone_contract(ov, z).max_abs() == 0
    f = Cochain(sub, 0, rng.standard_normal(len(sub.carrier)), (3,))
    p = cx.cone_contract(ov, coboundary(f))
    g = (f - p).values[ov.mask(0)]
    assert np.ptp(g) < 1e-12  # reconstructs f up to a constant


@pytest.mark.parametrize("k", [1, 2])
def test_cone_contract_random_closed(ico, t3, rng, k):
    for cover in (ico, t3):
        sub = cover.subdivision
        for sigma in [cover.base.simplices[0][2], cover.base.simplices[1][4]]:
            ov = cover.overlap(sigma)
            if k > 2 or not ov.mask(k).any():
                continue
            if k < sub.dim:
                b = Cochain(sub, k - 1, rng.standard_normal(len(sub.sd.simplices[k - 1])), sigma)
                c = coboundary(b)
            else:
                c = Cochain(sub, k, rng.standard_normal(len(sub.sd.simplices[k])), sigma)
            p = cx.cone_contract(ov, c)
            res = coboundary(p).values[ov.mask(k)] - c.values[ov.mask(k)]
            assert np.max(np.abs(res), initial=0) < 1e-12


def test_cone_contract_not_closed(ico, rng):
    sub = ico.subdivision
    c = Cochain(sub, 1, rng.standard_normal(len(sub.sd.simplices[1])), (0,))
    with pytest.raises(NotClosed):
        cx.cone_contract(ico.overlap((0,)), c)


def test_cone_contract_wrong_apex(ico, rng):
    sub = ico.subdivision
    c = Cochain(sub, 2, rng.standard_normal(len(sub.sd.simplices[2])), (0,))
    far = sub.vertex_of[(3,)]
    with pytest.raises(NotCone):
        cx.cone_contract(ico.overlap((0,)), c, apex=far)


def test_simplex_keys():
    assert cx.simplex_key((5, 1, 3)) == "1-3-5"
    assert cx.parse_key("3-1") == (1, 3)
    assert cx.perm_sign((1, 0, 2)) == -1
