"""Exact rational polytopes and polyhedral cones.

Everything here is combinatorial and runs in ``fractions.Fraction``.  Vertex
and ray enumeration use the double description method; triangulations are
pulling triangulations over the face lattice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import factorial
from typing import Optional

from ..errors import Empty, NotFullDim, NotPointed, Unbounded, UnboundedSection
from .rational import (
    as_fraction,
    as_vector,
    det,
    dot,
    primitive,
    rank,
    solve,
)

LATTICES = ("M", "N")


@dataclass(frozen=True)
class LatticeVector:
    """A point of M_R or N_R.  Pairing is only defined across the two tags."""

    coords: tuple
    lattice: str = "N"

    def __post_init__(self):
        if self.lattice not in LATTICES:
            raise ValueError(f"lattice tag must be 'M' or 'N', got {self.lattice!r}")
        object.__setattr__(self, "coords", as_vector(self.coords))

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def pair(self, other: "LatticeVector") -> Fraction:
        if isinstance(other, LatticeVector):
            if other.lattice == self.lattice:
                raise TypeError("pairing requires one M vector and one N vector")
            other = other.coords
        return dot(self.coords, as_vector(other))

    def __add__(self, other):
        if isinstance(other, LatticeVector) and other.lattice != self.lattice:
            raise TypeError("cannot add vectors from different lattices")
        return LatticeVector(tuple(a + b for a, b in zip(self.coords, as_vector(other))), self.lattice)

    def __neg__(self):
        return LatticeVector(tuple(-a for a in self.coords), self.lattice)

    def __sub__(self, other):
        return self + (-LatticeVector(as_vector(other), self.lattice))

    def __mul__(self, c):
        c = as_fraction(c)
        return LatticeVector(tuple(c * a for a in self.coords), self.lattice)

    __rmul__ = __mul__

    def to_float(self):
        return [float(a) for a in self.coords]


class _Lineality(Exception):
    pass


def extreme_rays(rows, d):
    """Extreme rays of the pointed cone {x in Q^d : <row, x> >= 0 for all rows}.

    Returns ``(rays, zero_sets)`` where each ray is a primitive integer tuple
    and ``zero_sets[k]`` holds the indices of the rows tight on ray ``k``.
    Raises ``_Lineality`` when the rows do not span Q^d.
    """
    rows = [as_vector(r) for r in rows]
    basis = []
    for i, r in enumerate(rows):
        if rank([rows[j] for j in basis] + [r]) > len(basis):
            basis.append(i)
            if len(basis) == d:
                break
    if len(basis) < d:
        raise _Lineality()
    B = [rows[i] for i in basis]
    rays = []
    zsets = []
    for j in range(d):
        col = solve(B, tuple(Fraction(int(i == j)) for i in range(d)))
        rays.append(tuple(Fraction(x) for x in primitive(col)))
        zsets.append(frozenset(basis[i] for i in range(d) if i != j))

    for i, row in enumerate(rows):
        if i in basis:
            continue
        vals = [dot(row, r) for r in rays]
        plus = [k for k, v in enumerate(vals) if v > 0]
        minus = [k for k, v in enumerate(vals) if v < 0]
        zero = [k for k, v in enumerate(vals) if v == 0]
        new_rays = [rays[k] for k in plus] + [rays[k] for k in zero]
        new_z = [zsets[k] for k in plus] + [zsets[k] | {i} for k in zero]
        for p in plus:
            for m in minus:
                common = zsets[p] & zsets[m]
                if len(common) < d - 2:
                    continue
                # combinatorial adjacency test
                if any(k != p and k != m and common <= zsets[k] for k in range(len(rays))):
                    continue
                r = tuple(vals[p] * a - vals[m] * b for a, b in zip(rays[m], rays[p]))
                new_rays.append(tuple(Fraction(x) for x in primitive(r)))
                new_z.append(common | {i})
        rays, zsets = new_rays, new_z
        if not rays:
            break
    # zero sets against the full row list (basis rows were skipped in the loop)
    zsets = [frozenset(i for i, row in enumerate(rows) if dot(row, r) == 0) for r in rays]
    return rays, zsets


@dataclass(frozen=True)
class Frame:
    """Affine chart of a cross-section: y = origin + sum_j z_j basis[j]."""

    normal: tuple
    origin: tuple
    basis: tuple
    measure: Fraction
    cone: object = field(default=None, compare=False, repr=False)

    def to_ambient(self, z):
        z = as_vector(z) if not _is_float(z) else z
        out = list(self.origin)
        for zj, bj in zip(z, self.basis):
            out = [o + zj * b for o, b in zip(out, bj)]
        return tuple(out)

    def to_ambient_float(self, Z):
        import numpy as np

        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        o = np.array([float(a) for a in self.origin])
        B = np.array([[float(a) for a in b] for b in self.basis])
        return o + Z @ B

    def to_chart(self, y):
        """Chart coordinates of an ambient point on the section (exact)."""
        y = as_vector(y)
        diff = [a - b for a, b in zip(y, self.origin)]
        m = len(self.basis)
        G = [[dot(self.basis[i], self.basis[j]) for j in range(m)] for i in range(m)]
        rhs = tuple(dot(self.basis[i], diff) for i in range(m))
        return solve(G, rhs)


def _is_float(z):
    try:
        return any(isinstance(x, float) for x in z)
    except TypeError:
        return False


@dataclass(frozen=True)
class Simplex:
    vertices: tuple
    volume: Fraction  # Lebesgue volume


@dataclass(frozen=True)
class SimplicialCone:
    generators: tuple
    det: Fraction  # |det| of the generator matrix


class Polytope:
    """Bounded full-dimensional rational polytope with synchronized H- and V-reps.

    Facets are pairs ``(normal, offset)`` with ``normal`` a primitive integer
    vector and constraint ``<x, normal> >= -offset``.
    """

    def __init__(self, vertices, facets, frame: Optional[Frame] = None):
        self.vertices = tuple(vertices)
        self.facets = tuple(facets)
        self.frame = frame
        self.n = len(self.vertices[0])

    @property
    def dh_scale(self) -> Fraction:
        """Extra density factor for cross-sections (1 for ordinary polytopes)."""
        return self.frame.measure if self.frame is not None else Fraction(1)

    @cached_property
    def incidence(self):
        """For each facet, the frozenset of vertex indices lying on it."""
        out = []
        for a, b in self.facets:
            out.append(frozenset(i for i, v in enumerate(self.vertices) if dot(v, a) + b == 0))
        return tuple(out)

    @cached_property
    def volume(self) -> Fraction:
        return sum((s.volume for s in triangulate(self)), Fraction(0))

    def vertex_values(self, ell):
        ell = as_vector(ell)
        return [dot(v, ell) for v in self.vertices]

    def contains(self, x, tol=0.0) -> bool:
        if _is_float(x):
            return all(sum(float(ai) * xi for ai, xi in zip(a, x)) + float(b) >= -tol for a, b in self.facets)
        x = as_vector(x)
        return all(dot(x, a) + b >= 0 for a, b in self.facets)

    def translate(self, t) -> "Polytope":
        t = as_vector(t)
        verts = [tuple(a + b for a, b in zip(v, t)) for v in self.vertices]
        facets = [(a, b - dot(t, a)) for a, b in self.facets]
        return Polytope(*_sorted_reps(verts, facets))

    def vertices_float(self):
        import numpy as np

        return np.array([[float(c) for c in v] for v in self.vertices])

    def key(self):
        """Hashable identity used to attach weights."""
        return (self.vertices, self.frame)

    def __eq__(self, other):
        return isinstance(other, Polytope) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        vs = ", ".join("(" + ", ".join(str(c) for c in v) + ")" for v in self.vertices)
        return f"Polytope(n={self.n}, vertices=[{vs}])"

    def to_json(self):
        return {
            "vertices": [[str(c) for c in v] for v in self.vertices],
            "facets": [{"normal": list(a), "offset": str(b)} for a, b in self.facets],
        }


def _sorted_reps(vertices, facets):
    vertices = sorted(set(tuple(v) for v in vertices))
    facets = sorted(set((tuple(a), b) for a, b in facets))
    return vertices, facets


def _affine_rank(points):
    return rank([tuple(p) + (Fraction(1),) for p in points])


def _normalize_facet(a, b):
    """Scale (a, b) so a is primitive integer; returns (a, b)."""
    a = as_vector(a)
    b = as_fraction(b)
    prim = primitive(a)
    # scale factor s with a = s * prim, s > 0
    k = next(i for i, x in enumerate(prim) if x != 0)
    s = a[k] / prim[k]
    return tuple(prim), b / s


def _facets_from_hrep(facets, n):
    out = []
    for f in facets:
        if isinstance(f, dict):
            a, b = f["normal"], f["offset"]
        else:
            a, b = f
        a = as_vector(a)
        if len(a) != n:
            raise ValueError("facet normals must all have the same dimension")
        if all(x == 0 for x in a):
            if as_fraction(b) < 0:
                raise Empty("constraint 0 >= -offset with negative offset")
            continue
        out.append(_normalize_facet(a, b))
    return out


def _from_hrep(facets, n):
    facets = _facets_from_hrep(facets, n)
    rows = [tuple(a) + (b,) for a, b in facets]
    rows.append(tuple([Fraction(0)] * n) + (Fraction(1),))
    try:
        rays, _ = extreme_rays(rows, n + 1)
    except _Lineality:
        raise Unbounded("facet normals do not span the dual space; the region contains a line") from None
    if not rays:
        raise Empty("the inequality system is infeasible")
    if any(r[-1] == 0 for r in rays):
        if all(r[-1] == 0 for r in rays):
            raise Empty("the inequality system is infeasible")
        raise Unbounded("the inequality system defines an unbounded region")
    verts = [tuple(x / r[-1] for x in r[:-1]) for r in rays]
    return verts, facets


def _irredundant(verts, facets, n):
    keep = {}
    for a, b in facets:
        tight = frozenset(i for i, v in enumerate(verts) if dot(v, a) + b == 0)
        if len(tight) < n:
            continue
        if _affine_rank([verts[i] for i in tight]) != n:
            continue
        keep.setdefault(tight, (a, b))
    return list(keep.values())


def _from_vrep(points, n):
    pts = [as_vector(p) for p in points]
    if any(len(p) != n for p in pts):
        raise ValueError("vertices must all have the same dimension")
    if _affine_rank(pts) < n + 1:
        raise NotFullDim("the points do not affinely span the ambient space")
    rows = [p + (Fraction(1),) for p in set(pts)]
    rays, _ = extreme_rays(rows, n + 1)
    facets = [(tuple(int(x) for x in r[:-1]), r[-1]) for r in rays]
    facets = [_normalize_facet(a, b) for a, b in facets]
    verts = []
    for p in set(pts):
        tight = [a for a, b in facets if dot(p, a) + b == 0]
        if len(tight) >= n and rank(tight) == n:
            verts.append(p)
    return verts, facets


def build_polytope(facets=None, vertices=None, frame: Optional[Frame] = None) -> Polytope:
    """Build a polytope from an H-representation or a V-representation.

    ``facets``: iterable of ``(normal, offset)`` pairs (or dicts with those
    keys) meaning ``<x, normal> >= -offset``.  ``vertices``: iterable of points.
    """
    if (facets is None) == (vertices is None):
        raise ValueError("give exactly one of facets= or vertices=")
    if facets is not None:
        facets = list(facets)
        if not facets:
            raise Unbounded("no constraints")
        first = facets[0]
        a0 = first["normal"] if isinstance(first, dict) else first[0]
        n = len(a0)
        verts, fac = _from_hrep(facets, n)
    else:
        vertices = list(vertices)
        if not vertices:
            raise Empty("no vertices")
        n = len(as_vector(vertices[0]))
        verts, fac = _from_vrep(vertices, n)
    if n == 0:
        raise NotFullDim("dimension must be positive")
    if _affine_rank(verts) < n + 1:
        raise NotFullDim("the region is not full-dimensional")
    fac = _irredundant(verts, fac, n)
    verts, fac = _sorted_reps(verts, fac)
    return Polytope(verts, fac, frame=frame)


def simplex_polytope(n: int) -> Polytope:
    """Standard anticanonical polytope of P^n: x_i >= -1, sum x_i <= 1."""
    facets = [(tuple(int(i == j) for j in range(n)), 1) for i in range(n)]
    facets.append((tuple([-1] * n), 1))
    return build_polytope(facets=facets)


def box(lo, hi) -> Polytope:
    lo, hi = as_vector(lo), as_vector(hi)
    n = len(lo)
    facets = []
    for i in range(n):
        e = tuple(int(i == j) for j in range(n))
        facets.append((e, -lo[i]))
        facets.append((tuple(-x for x in e), hi[i]))
    return build_polytope(facets=facets)


class PolyCone:
    """Pointed full-dimensional rational polyhedral cone.

    ``generators`` are primitive integer extreme rays in ``lattice``;
    ``facets`` are primitive integer inward normals in the dual lattice (the
    extreme rays of the dual cone).
    """

    def __init__(self, generators, facets, lattice: str = "M"):
        self.generators = tuple(generators)
        self.facets = tuple(facets)
        self.lattice = lattice
        self.d = len(self.generators[0])

    @cached_property
    def incidence(self):
        return tuple(
            frozenset(i for i, g in enumerate(self.generators) if dot(g, f) == 0) for f in self.facets
        )

    def dual(self) -> "PolyCone":
        other = "N" if self.lattice == "M" else "M"
        return PolyCone(self.facets, self.generators, lattice=other)

    def contains(self, x, strict=False) -> bool:
        if _is_float(x):
            vals = [sum(float(a) * b for a, b in zip(f, x)) for f in self.facets]
        else:
            x = as_vector(x)
            vals = [dot(f, x) for f in self.facets]
        return all(v > 0 for v in vals) if strict else all(v >= 0 for v in vals)

    def __eq__(self, other):
        return (
            isinstance(other, PolyCone)
            and self.lattice == other.lattice
            and self.generators == other.generators
            and self.facets == other.facets
        )

    def __hash__(self):
        return hash((self.generators, self.facets, self.lattice))

    def __repr__(self):
        return f"PolyCone({self.lattice}, generators={[list(map(int, g)) for g in self.generators]})"


def _cone_pair(rows_in, d, err_full, err_pointed):
    rows_in = [as_vector(r) for r in rows_in]
    try:
        dual_rays, _ = extreme_rays(rows_in, d)
    except _Lineality:
        raise err_full from None
    if rank(dual_rays) < d:
        raise err_pointed
    prim = []
    for r in set(tuple(primitive(r)) for r in rows_in if any(x != 0 for x in r)):
        tight = [f for f in dual_rays if dot(f, r) == 0]
        if len(tight) >= d - 1 and rank(tight) == d - 1:
            prim.append(tuple(Fraction(x) for x in r))
    return sorted(prim), sorted(dual_rays)


def build_cone(generators=None, facets=None, lattice: str = "M") -> PolyCone:
    """Cone from generators (in ``lattice``) or from inward facet normals."""
    if (generators is None) == (facets is None):
        raise ValueError("give exactly one of generators= or facets=")
    if generators is not None:
        gens = list(generators)
        d = len(as_vector(gens[0]))
        g, f = _cone_pair(
            gens,
            d,
            NotFullDim("cone generators do not span the ambient space"),
            NotPointed("the cone contains a line"),
        )
    else:
        facs = list(facets)
        d = len(as_vector(facs[0]))
        f, g = _cone_pair(
            facs,
            d,
            NotPointed("the cone contains a line"),
            NotFullDim("the cone is not full-dimensional"),
        )
    return PolyCone(g, f, lattice=lattice)


# -- triangulation ----------------------------------------------------------


def _pulling(points, facet_sets, top_rank, pivot):
    if pivot == "first":
        prio = list(range(len(points)))
    elif pivot == "last":
        prio = list(range(len(points)))[::-1]
    else:
        prio = list(pivot)
        if sorted(prio) != list(range(len(points))):
            raise ValueError("pivot order must be a permutation of the vertex indices")
    pos = {v: k for k, v in enumerate(prio)}
    rank_cache = {}

    def rk(S):
        if S not in rank_cache:
            rank_cache[S] = rank([points[i] for i in sorted(S)])
        return rank_cache[S]

    def tri(S, r):
        if len(S) == r:
            return [tuple(sorted(S))]
        v0 = min(S, key=pos.__getitem__)
        subs = set()
        for F in facet_sets:
            T = S & F
            if len(T) >= r - 1 and T != S and v0 not in T and rk(T) == r - 1:
                subs.add(T)
        out = []
        for T in sorted(subs, key=sorted):
            for s in tri(T, r - 1):
                out.append(tuple(sorted(s + (v0,))))
        return out

    return tri(frozenset(range(len(points))), top_rank)


def triangulate(body, pivot="first"):
    """Pulling triangulation of a polytope (simplices) or cone (simplicial cones).

    ``pivot`` fixes the order in which vertices are pulled: "first", "last",
    or an explicit permutation of vertex indices.  Different orders give
    different triangulations, which is what the independence checks use.
    """
    if isinstance(body, Polytope):
        n = body.n
        pts = [tuple(v) + (Fraction(1),) for v in body.vertices]
        if rank(pts) < n + 1:
            raise NotFullDim("cannot triangulate a lower-dimensional polytope")
        cells = _pulling(pts, body.incidence, n + 1, pivot)
        out = []
        nf = factorial(n)
        for c in cells:
            vs = tuple(body.vertices[i] for i in c)
            M = [tuple(a - b for a, b in zip(v, vs[0])) for v in vs[1:]]
            out.append(Simplex(vs, abs(det(M)) / nf))
        return out
    if isinstance(body, PolyCone):
        d = body.d
        if rank(body.generators) < d:
            raise NotFullDim("cannot triangulate a lower-dimensional cone")
        cells = _pulling(list(body.generators), body.incidence, d, pivot)
        out = []
        for c in cells:
            gs = tuple(body.generators[i] for i in c)
            out.append(SimplicialCone(gs, abs(det(list(gs)))))
        return out
    raise TypeError("triangulate expects a Polytope or PolyCone")


# -- cross sections ---------------------------------------------------------


def default_frame(chi):
    """Chart of the hyperplane {<y, chi> = 1}.

    Origin e_k / chi_k at the first coordinate of largest |chi_k|, basis
    e_j - (chi_j / chi_k) e_k for j != k.
    """
    chi = as_vector(chi)
    d = len(chi)
    k = max(range(d), key=lambda i: (abs(chi[i]), -i))
    if chi[k] == 0:
        raise ValueError("zero normal vector")
    origin = tuple(Fraction(int(i == k)) / chi[k] for i in range(d))
    basis = []
    for j in range(d):
        if j == k:
            continue
        basis.append(tuple(Fraction(int(i == j)) - (chi[j] / chi[k] if i == k else 0) for i in range(d)))
    return origin, tuple(basis)


def cross_section(cone: PolyCone, chi, origin=None, basis=None) -> Polytope:
    """The slice of ``cone`` by {<y, chi> = 1}, in affine chart coordinates.

    The chart is recorded as ``polytope.frame``; its ``measure`` is
    |det[origin, basis]|, the density relating chart Lebesgue measure to the
    cone-compatible measure on the slice.
    """
    chi = as_vector(chi)
    if len(chi) != cone.d:
        raise ValueError("normal vector has the wrong dimension")
    vals = [dot(g, chi) for g in cone.generators]
    if any(v <= 0 for v in vals):
        raise UnboundedSection("normal vector is not in the interior of the dual cone")
    if origin is None or basis is None:
        origin, basis = default_frame(chi)
    else:
        origin = as_vector(origin)
        basis = tuple(as_vector(b) for b in basis)
        if dot(origin, chi) != 1 or any(dot(b, chi) != 0 for b in basis):
            raise ValueError("frame does not parametrize the section hyperplane")
    measure = abs(det([origin] + list(basis)))
    frame = Frame(normal=chi, origin=origin, basis=basis, measure=measure, cone=cone)
    if cone.d == 1:
        raise NotFullDim("a one-dimensional cone has a point cross-section")
    pts = [frame.to_chart(tuple(x / v for x in g)) for g, v in zip(cone.generators, vals)]
    return build_polytope(vertices=pts, frame=frame)
