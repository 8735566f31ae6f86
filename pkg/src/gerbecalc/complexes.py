"""Closed oriented simplicial 2- and 3-manifolds, barycentric subdivision,
the vertex-star cover and the cone contraction on its overlaps.

Simplices are stored as sorted vertex tuples.  Orientations of top simplices
are signs relative to that sorted order; every other sign in the package is
derived from sorted order as well.
"""
from __future__ import annotations

import itertools
from collections import defaultdict, deque
from fractions import Fraction
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import NonManifold, NonOrientable, NotClosed, NotCone


def perm_sign(seq) -> int:
    """Sign of the permutation sorting ``seq`` (distinct entries)."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def simplex_key(s) -> str:
    return "-".join(str(v) for v in sorted(s))


def parse_key(key: str) -> tuple:
    return tuple(sorted(int(v) for v in key.split("-")))


class TriangulatedComplex:
    """A closed, coherently oriented pseudomanifold of dimension 2 or 3.

    Args:
        tops: top-dimensional simplices, any vertex order.
        orientation: +1/-1 per top simplex relative to the listed vertex
            order.  If omitted a coherent orientation is computed.
        vertices: optional explicit vertex list (must cover all used ids).
        validate: run the manifold checks (link condition).
    """

    def __init__(self, tops, orientation=None, vertices=None, validate=True):
        tops = [tuple(int(v) for v in t) for t in tops]
        if not tops:
            raise NonManifold("empty complex")
        dim = len(tops[0]) - 1
        if dim not in (2, 3) or any(len(t) != dim + 1 for t in tops):
            raise NonManifold("top simplices must all be triangles or all tetrahedra")
        if any(len(set(t)) != len(t) for t in tops):
            raise NonManifold("repeated vertex inside a simplex")
        self.dim = dim
        sorted_tops = [tuple(sorted(t)) for t in tops]
        if len(set(sorted_tops)) != len(sorted_tops):
            raise NonManifold("duplicate top simplex")
        used = sorted({v for t in tops for v in t})
        self.vertices = tuple(sorted(vertices)) if vertices is not None else tuple(used)
        if not set(used) <= set(self.vertices):
            raise NonManifold("top simplex uses an undeclared vertex")

        faces = set()
        for t in sorted_tops:
            for k in range(1, dim + 1):
                faces.update(itertools.combinations(t, k + 1))
        self.simplices = [[(v,) for v in self.vertices]]
        for k in range(1, dim + 1):
            self.simplices.append(sorted(s for s in faces if len(s) == k + 1))
        self.index = [{s: i for i, s in enumerate(level)} for level in self.simplices]
        order = np.argsort([self.index[dim][t] for t in sorted_tops])

        self._check_pseudomanifold(sorted_tops)
        if orientation is None:
            sorted_orient = self._orient(sorted_tops)
        else:
            if len(orientation) != len(tops):
                raise NonOrientable("orientation list length differs from simplex count")
            sorted_orient = [int(o) * perm_sign(t) for o, t in zip(orientation, tops)]
            if any(o not in (1, -1) for o in sorted_orient):
                raise NonOrientable("orientation entries must be +1 or -1")
        self.orientation = np.array(sorted_orient, dtype=np.int64)[order]
        self._check_coherent()
        if validate:
            self._check_links()

    # ------------------------------------------------------------ validation

    def _facet_cofaces(self, tops):
        cof = defaultdict(list)
        for ti, t in enumerate(tops):
            for j in range(len(t)):
                cof[t[:j] + t[j + 1:]].append((ti, j))
        return cof

    def _check_pseudomanifold(self, tops):
        for f, lst in self._facet_cofaces(tops).items():
            if len(lst) != 2:
                raise NonManifold(f"face {simplex_key(f)} lies in {len(lst)} top simplices, expected 2")

    def _orient(self, tops):
        cof = self._facet_cofaces(tops)
        nbrs = defaultdict(list)
        for (ta, ja), (tb, jb) in cof.values():
            nbrs[ta].append((tb, ja, jb))
            nbrs[tb].append((ta, jb, ja))
        orient = [0] * len(tops)
        for start in range(len(tops)):
            if orient[start]:
                continue
            orient[start] = 1
            queue = deque([start])
            while queue:
                a = queue.popleft()
                for b, ja, jb in nbrs[a]:
                    # induced signs (-1)^j o must be opposite on a shared face
                    want = -orient[a] * (-1) ** ja * (-1) ** jb
                    if orient[b] == 0:
                        orient[b] = want
                        queue.append(b)
                    elif orient[b] != want:
                        raise NonOrientable(f"no coherent orientation (conflict at {simplex_key(tops[b])})")
        return orient

    def _check_coherent(self):
        seen = {}
        for t, o in zip(self.simplices[self.dim], self.orientation):
            for j in range(len(t)):
                f = t[:j] + t[j + 1:]
                sign = int(o) * (-1) ** j
                if f in seen and seen[f] == sign:
                    raise NonOrientable(f"incoherent orientation across face {simplex_key(f)}")
                seen[f] = sign

    def _check_links(self):
        tops = self.simplices[self.dim]
        link = defaultdict(list)
        for t in tops:
            for v in t:
                link[v].append(tuple(u for u in t if u != v))
        for v in self.vertices:
            lk = link.get(v)
            if not lk:
                raise NonManifold(f"vertex {v} is not in any top simplex")
            if not _is_sphere(lk, self.dim - 1):
                raise NonManifold(f"link of vertex {v} is not a {self.dim - 1}-sphere")

    # --------------------------------------------------------------- queries

    def counts(self) -> list[int]:
        return [len(level) for level in self.simplices]

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * n for k, n in enumerate(self.counts()))

    def simplex_array(self, k: int) -> np.ndarray:
        return self._arrays[k]

    @cached_property
    def _arrays(self):
        return [np.array(level, dtype=np.int64).reshape(len(level), k + 1)
                for k, level in enumerate(self.simplices)]

    @cached_property
    def face_index(self):
        """``face_index[k][s, j]`` = index of face of k-simplex s without vertex j."""
        out = [None]
        for k in range(1, self.dim + 1):
            idx = self.index[k - 1]
            out.append(np.array([[idx[s[:j] + s[j + 1:]] for j in range(k + 1)]
                                 for s in self.simplices[k]], dtype=np.int64))
        return out

    @cached_property
    def coboundary_matrices(self):
        """Sparse integer matrices D_k : C^k -> C^{k+1}."""
        mats = []
        for k in range(self.dim):
            fi = self.face_index[k + 1]
            n1, m = fi.shape
            rows = np.repeat(np.arange(n1), m)
            signs = np.tile((-1) ** np.arange(m), n1)
            mats.append(sp.csr_matrix((signs, (rows, fi.ravel())),
                                      shape=(n1, len(self.simplices[k])), dtype=np.int64))
        return mats

    def front_back(self, p: int, q: int):
        """Index arrays of front p-faces and back q-faces of (p+q)-simplices."""
        key = (p, q)
        cache = self.__dict__.setdefault("_fb_cache", {})
        if key not in cache:
            arr = self._arrays[p + q]
            front = np.array([self.index[p][tuple(r[:p + 1])] for r in arr.tolist()], dtype=np.int64)
            back = np.array([self.index[q][tuple(r[p:])] for r in arr.tolist()], dtype=np.int64)
            cache[key] = (front, back)
        return cache[key]


def _is_sphere(link, dim) -> bool:
    """Is the list of (dim)-simplices a combinatorial dim-sphere (dim 1 or 2)?"""
    if len({tuple(sorted(s)) for s in link}) != len(link):
        return False
    verts = {v for s in link for v in s}
    adj = defaultdict(set)
    cof = defaultdict(int)
    for s in link:
        for a, b in itertools.combinations(s, 2):
            adj[a].add(b)
            adj[b].add(a)
        for j in range(len(s)):
            cof[tuple(sorted(s[:j] + s[j + 1:]))] += 1
    if any(c != 2 for c in cof.values()):
        return False
    start = next(iter(verts))
    seen, queue = {start}, [start]
    while queue:
        for w in adj[queue.pop()]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    if seen != verts:
        return False
    if dim == 1:
        return True
    edges = {tuple(sorted(e)) for s in link for e in itertools.combinations(s, 2)}
    if len(verts) - len(edges) + len(link) != 2:
        return False
    sublinks = defaultdict(list)
    for s in link:
        for v in s:
            sublinks[v].append(tuple(u for u in s if u != v))
    return all(_is_sphere(lk, 1) for lk in sublinks.values())


def build_complex(mesh: dict) -> TriangulatedComplex:
    """Build from a mesh description with ``triangles`` or ``tets``."""
    if "tets" in mesh:
        tops = mesh["tets"]
    elif "triangles" in mesh:
        tops = mesh["triangles"]
    else:
        raise NonManifold("mesh needs a 'triangles' or 'tets' list")
    return TriangulatedComplex(tops, orientation=mesh.get("orientation"), vertices=mesh.get("vertices"))


# ---------------------------------------------------------------- subdivision

class Subdivision:
    """Barycentric subdivision of a base complex.

    sd vertex ids enumerate base simplices by (dimension, lexicographic), so
    ``carrier[v]`` is the base simplex whose barycenter is v, and sorted sd
    simplices list their carriers in increasing dimension.
    """

    def __init__(self, base: TriangulatedComplex):
        self.base = base
        self.carrier = [s for level in base.simplices for s in level]
        self.vertex_of = {s: i for i, s in enumerate(self.carrier)}
        self.carrier_sets = [frozenset(s) for s in self.carrier]
        tops, orient = [], []
        n = base.dim
        for t, o in zip(base.simplices[n], base.orientation):
            for perm in itertools.permutations(range(n + 1)):
                flag = tuple(self.vertex_of[tuple(sorted(t[p] for p in perm[:r + 1]))] for r in range(n + 1))
                tops.append(flag)
                orient.append(int(o) * perm_sign(perm))
        # flags are already in increasing id order, so listed order = sorted order
        self.sd = TriangulatedComplex(tops, orientation=orient, vertices=range(len(self.carrier)), validate=False)
        self.first_carrier = [np.array([self.carrier_sets[r[0]] for r in self.sd.simplex_array(k).tolist()], dtype=object)
                              for k in range(n + 1)]

    @property
    def dim(self):
        return self.base.dim

    def overlap_mask(self, sigma, k: int) -> np.ndarray:
        """Mask of sd k-simplices lying in the overlap U_sigma.

        An sd simplex is in U_sigma iff sigma is contained in the carrier of
        its first (lowest-dimensional) vertex.
        """
        cache = self.__dict__.setdefault("_mask_cache", {})
        key = (tuple(sorted(sigma)), k)
        if key not in cache:
            inc = self._incidence(k)
            cols = [self._vcol[v] for v in key[0]]
            cache[key] = np.logical_and.reduce(inc[:, cols], axis=1)
        return cache[key]

    def _incidence(self, k: int) -> np.ndarray:
        """Boolean table: does the first carrier of sd k-simplex s contain base vertex v."""
        cache = self.__dict__.setdefault("_inc_cache", {})
        if k not in cache:
            self._vcol = {v: i for i, v in enumerate(self.base.vertices)}
            inc = np.zeros((len(self.first_carrier[k]), len(self.base.vertices)), dtype=bool)
            for r, car in enumerate(self.first_carrier[k]):
                inc[r, [self._vcol[v] for v in car]] = True
            cache[k] = inc
        return cache[k]

    def cone_join(self, apex: int, k: int):
        """For each sd (k-1)-simplex s: index of the k-simplex apex*s and its
        orientation sign relative to (apex, s...), or -1 where undefined."""
        cache = self.__dict__.setdefault("_join_cache", {})
        if (apex, k) not in cache:
            idx = self.sd.index[k]
            lower = self.sd.simplex_array(k - 1).tolist()
            join = np.full(len(lower), -1, dtype=np.int64)
            sign = np.zeros(len(lower), dtype=np.int64)
            for i, s in enumerate(lower):
                if apex in s:
                    continue
                pos = sum(1 for v in s if v < apex)
                t = tuple(s[:pos]) + (apex,) + tuple(s[pos:])
                j = idx.get(t)
                if j is not None:
                    join[i] = j
                    sign[i] = (-1) ** pos
            cache[(apex, k)] = (join, sign)
        return cache[(apex, k)]


def barycentric_subdivide(base: TriangulatedComplex) -> Subdivision:
    return Subdivision(base)


class Overlap:
    """The overlap U_sigma of the star cover, realised inside the subdivision."""

    def __init__(self, cover: "StarCover", sigma):
        self.cover = cover
        self.sigma = tuple(sorted(sigma))
        sub = cover.subdivision
        self.apex = sub.vertex_of.get(self.sigma)

    @property
    def empty(self) -> bool:
        return self.apex is None

    def mask(self, k: int) -> np.ndarray:
        return self.cover.subdivision.overlap_mask(self.sigma, k)

    def simplices(self, k: int) -> list[tuple]:
        arr = self.cover.subdivision.sd.simplex_array(k)
        return [tuple(r) for r in arr[self.mask(k)].tolist()]

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * int(self.mask(k).sum()) for k in range(self.cover.dim + 1))


class StarCover:
    """Open cover of the base by vertex stars; its nerve is the base itself."""

    def __init__(self, base: TriangulatedComplex, subdivision: Subdivision | None = None):
        self.base = base
        self.subdivision = subdivision or Subdivision(base)
        self._overlaps = {}

    @property
    def sd(self) -> TriangulatedComplex:
        return self.subdivision.sd

    @property
    def dim(self):
        return self.base.dim

    def overlap(self, sigma) -> Overlap:
        key = tuple(sorted(sigma))
        if key not in self._overlaps:
            self._overlaps[key] = Overlap(self, key)
        return self._overlaps[key]

    @cached_property
    def partition(self) -> "PartitionOfUnity":
        return PartitionOfUnity(self)


def overlap_subcomplex(cover: StarCover, sigma) -> Overlap:
    return cover.overlap(sigma)


class PartitionOfUnity:
    """phi_i(b_tau) = 1/|tau| if i in tau else 0."""

    def __init__(self, cover: StarCover):
        self.cover = cover
        sub = cover.subdivision
        verts = cover.base.vertices
        self.vertex_row = {v: r for r, v in enumerate(verts)}
        phi = np.zeros((len(verts), len(sub.carrier)))
        for sdv, tau in enumerate(sub.carrier):
            for i in tau:
                phi[self.vertex_row[i], sdv] = 1.0 / len(tau)
        self.phi = phi

    def __getitem__(self, i) -> np.ndarray:
        return self.phi[self.vertex_row[i]]

    def exact_sums(self) -> list[Fraction]:
        sub = self.cover.subdivision
        return [sum((Fraction(1, len(tau)) for _ in tau), Fraction(0)) for tau in sub.carrier]


# ---------------------------------------------------------- cone contraction

def cone_contract(overlap: Overlap, c, apex: int | None = None, tol: float = 1e-10):
    """Discrete Poincare lemma on a cone.

    Returns a (k-1)-cochain p supported on the overlap with dp = c there.
    ``p(s) = c(apex * s)`` for simplices not containing the apex, 0 otherwise.

    Raises:
        NotClosed: if the coboundary of c on the overlap exceeds ``tol``.
        NotCone: if some simplex of the overlap cannot be joined to the apex.
    """
    from .dcalc import Cochain, coboundary

    sub = overlap.cover.subdivision
    k = c.degree
    if apex is None:
        apex = overlap.apex
    if overlap.empty:
        raise NotCone(f"overlap {simplex_key(overlap.sigma)} is empty")
    if k < 1:
        raise NotClosed("cone contraction needs degree >= 1")
    if k < sub.dim:
        dc = coboundary(c)
        res = float(np.max(np.abs(dc.values[overlap.mask(k + 1)]), initial=0.0))
        if res > tol:
            raise NotClosed(f"cochain is not closed on {simplex_key(overlap.sigma)} (|dc| = {res:.3e})", residual=res)
    join, sign = sub.cone_join(apex, k)
    mask = overlap.mask(k - 1)
    arr = sub.sd.simplex_array(k - 1)
    need = mask & ~np.any(arr == apex, axis=1)
    if np.any(join[need] < 0) or not np.all(overlap.mask(k)[join[need]]):
        raise NotCone(f"overlap {simplex_key(overlap.sigma)} is not a cone over sd vertex {apex}")
    vals = np.zeros((len(arr),) + c.values.shape[1:], dtype=c.values.dtype)
    sel = np.flatnonzero(need)
    s = sign[sel].reshape((-1,) + (1,) * (c.values.ndim - 1))
    vals[sel] = s * c.values[join[sel]]
    return Cochain(sub, k - 1, vals, support=overlap.sigma, spec=c.spec)


# ---------------------------------------------------------------- generators

ICOSAHEDRON_FACES = [
    (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
    (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
    (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
    (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
]


def icosahedron_mesh() -> dict:
    return {"vertices": list(range(12)), "triangles": [list(f) for f in ICOSAHEDRON_FACES],
            "orientation": [1] * 20}


def sphere_mesh(level: int = 0) -> dict:
    """Icosahedron refined ``level`` times by 1-to-4 triangle splits."""
    faces = [tuple(f) for f in ICOSAHEDRON_FACES]
    nv = 12
    for _ in range(level):
        mid = {}

        def m(a, b):
            nonlocal nv
            key = (min(a, b), max(a, b))
            if key not in mid:
                mid[key] = nv
                nv += 1
            return mid[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = m(a, b), m(b, c), m(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    return {"vertices": list(range(nv)), "triangles": [list(f) for f in faces], "orientation": [1] * len(faces)}


def torus_mesh(n: int, m: int) -> dict:
    """n x m periodic grid, each square split along its diagonal (n, m >= 3)."""
    vid = lambda x, y: (x % n) * m + (y % m)
    tris, orient = [], []
    for x in range(n):
        for y in range(m):
            tris.append([vid(x, y), vid(x + 1, y), vid(x + 1, y + 1)])
            tris.append([vid(x, y), vid(x + 1, y + 1), vid(x, y + 1)])
            orient += [1, 1]
    return {"vertices": list(range(n * m)), "triangles": tris, "orientation": orient}


def torus3_mesh(n: int) -> dict:
    """n^3 periodic grid, each cube split into 6 Kuhn tetrahedra (n >= 3)."""
    vid = lambda p: ((p[0] % n) * n + (p[1] % n)) * n + (p[2] % n)
    tets, orient = [], []
    for x, y, z in itertools.product(range(n), repeat=3):
        for perm in itertools.permutations(range(3)):
            p = [x, y, z]
            path = [vid(p)]
            for axis in perm:
                p[axis] += 1
                path.append(vid(p))
            tets.append(path)
            orient.append(perm_sign(perm))
    return {"vertices": list(range(n ** 3)), "tets": tets, "orientation": orient}
