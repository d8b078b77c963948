"""Newton polytopes with exact integer facets, their face lattice, and the open
regions of the face topology (complements of unions of faces).

Everything is exact; hulls are found by brute force over subsets of the
support, which is fine for the small dimensions handled here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import combinations, product
from math import gcd
from typing import Iterable, Sequence

from .errors import ConfigurationError, InvalidRegion

Point = tuple[int, ...]

MAX_DIMENSION = 4


# ---------------------------------------------------------------------------- linear algebra


def _rref(rows: list[list[Fraction]], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    m = [list(r) for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(vectors: Sequence[Sequence[int]], ncols: int) -> int:
    if not vectors:
        return 0
    return len(_rref([[Fraction(x) for x in v] for v in vectors], ncols)[1])


def _primitive(v: Sequence[Fraction]) -> tuple[int, ...]:
    den = reduce(lambda a, b: a * b // gcd(a, b), (x.denominator for x in v), 1)
    ints = [int(x * den) for x in v]
    g = reduce(gcd, (abs(x) for x in ints), 0)
    return tuple(x // g for x in ints) if g else tuple(ints)


def integer_nullspace(rows: Sequence[Sequence[int]], ncols: int) -> list[tuple[int, ...]]:
    """Primitive integer basis of {a : row . a = 0 for every row}."""
    if not rows:
        return [tuple(1 if i == j else 0 for i in range(ncols)) for j in range(ncols)]
    red, pivots = _rref([[Fraction(x) for x in r] for r in rows], ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for r, pc in zip(red, pivots):
            v[pc] = -r[fc]
        basis.append(_primitive(v))
    return basis


def _dot(a: Sequence[int], b: Sequence[int]) -> int:
    return sum(x * y for x, y in zip(a, b))


def _sub(a: Sequence[int], b: Sequence[int]) -> Point:
    return tuple(x - y for x, y in zip(a, b))


# ---------------------------------------------------------------------------- faces


@dataclass(frozen=True)
class Face:
    """A nonempty face, identified by the set of facets containing it."""

    facets: frozenset
    vertices: tuple[Point, ...]
    dimension: int
    codimension: int

    def contains_face(self, other: "Face") -> bool:
        return self.facets <= other.facets

    def label(self) -> str:
        return "{" + ", ".join(str(v) for v in self.vertices) + "}"


@dataclass(frozen=True)
class Facet:
    """The inequality normal . x <= bound, with the normal inside the direction space."""

    normal: Point
    bound: int

    def value(self, x: Sequence[int]) -> int:
        return _dot(self.normal, x)


class NewtonPolytope:
    """Convex hull of a finite set of integer points."""

    def __init__(self, support: Iterable[Sequence[int]]):
        pts = sorted({tuple(int(c) for c in p) for p in support})
        if not pts:
            raise ConfigurationError("empty support")
        n = len(pts[0])
        if any(len(p) != n for p in pts):
            raise ConfigurationError("support points of different dimensions")
        if n > MAX_DIMENSION:
            raise ConfigurationError(f"ambient dimension {n} exceeds the supported maximum {MAX_DIMENSION}", dimension=n)
        self.support = pts
        self.ambient_dimension = n
        base = pts[0]
        diffs = [_sub(p, base) for p in pts[1:]]
        self.dimension = rank(diffs, n) if diffs else 0
        # affine hull: normal . x == value
        normals = integer_nullspace(diffs, n) if diffs else [tuple(1 if i == j else 0 for i in range(n)) for j in range(n)]
        self.equations = [(a, _dot(a, base)) for a in normals]
        self.facets = self._find_facets()
        self._build_faces()
        self._lattice_points = None

    # -- construction
    def _find_facets(self) -> list[Facet]:
        d, n = self.dimension, self.ambient_dimension
        if d == 0:
            return []
        eq_normals = [a for a, _ in self.equations]
        found: dict[tuple, Facet] = {}
        for subset in combinations(self.support, d):
            diffs = [_sub(p, subset[0]) for p in subset[1:]]
            if rank(diffs, n) != d - 1:
                continue
            ns = integer_nullspace(diffs + eq_normals, n)
            if len(ns) != 1:
                continue
            a = ns[0]
            c = _dot(a, subset[0])
            vals = [_dot(a, p) for p in self.support]
            if all(v <= c for v in vals):
                facet = Facet(a, c)
            elif all(v >= c for v in vals):
                facet = Facet(tuple(-x for x in a), -c)
            else:
                continue
            found[(facet.normal, facet.bound)] = facet
        return sorted(found.values(), key=lambda f: (f.normal, f.bound))

    def _build_faces(self):
        tight_sets = []
        for p in self.support:
            tight_sets.append(frozenset(self.tight_facets(p)))
        # A face is determined by the facets containing it; close the facet
        # point sets under intersection.
        facet_points = [frozenset(p for p, t in zip(self.support, tight_sets) if i in t) for i in range(len(self.facets))]
        faces: dict[frozenset, frozenset] = {frozenset(): frozenset(self.support)}
        frontier = [frozenset()]
        while frontier:
            nxt = []
            for key in frontier:
                pts = faces[key]
                for i, fp in enumerate(facet_points):
                    if i in key:
                        continue
                    inter = pts & fp
                    if not inter:
                        continue
                    closure = frozenset.intersection(*[tight_sets[self.support.index(p)] for p in inter])
                    if closure not in faces:
                        faces[closure] = inter
                        nxt.append(closure)
            frontier = nxt
        self.faces: list[Face] = []
        n = self.ambient_dimension
        for key, pts in faces.items():
            pts = sorted(pts)
            dim = rank([_sub(p, pts[0]) for p in pts[1:]], n) if len(pts) > 1 else 0
            verts = tuple(p for p in pts if self._is_vertex_of(p, key))
            self.faces.append(Face(key, verts, dim, self.dimension - dim))
        self.faces.sort(key=lambda F: (-F.codimension, F.vertices))
        self._face_by_key = {F.facets: F for F in self.faces}
        self.vertices = sorted(F.vertices[0] for F in self.faces if F.dimension == 0)

    def _is_vertex_of(self, p: Point, face_key: frozenset) -> bool:
        t = frozenset(self.tight_facets(p))
        if self.dimension == 0:
            return True
        return rank([self.facets[i].normal for i in t] + [a for a, _ in self.equations], self.ambient_dimension) == self.ambient_dimension

    # -- queries
    def tight_facets(self, x: Sequence[int], scale: int = 1) -> list[int]:
        """Indices of facets on which x (a point of scale*Delta) is tight."""
        return [i for i, f in enumerate(self.facets) if f.value(x) == f.bound * scale]

    def contains(self, x: Sequence[int], scale: int = 1) -> bool:
        """x in scale*Delta."""
        if any(_dot(a, x) != c * scale for a, c in self.equations):
            return False
        return all(f.value(x) <= f.bound * scale for f in self.facets)

    def minimal_face(self, x: Sequence[int], scale: int = 1) -> Face:
        """The face containing x/scale in its relative interior."""
        if not self.contains(x, scale):
            raise ConfigurationError("point is not in the polytope", point=tuple(x), scale=scale)
        return self._face_by_key[frozenset(self.tight_facets(x, scale))]

    def face_of(self, points: Iterable[Sequence[int]]) -> Face:
        """The smallest face containing the given points."""
        pts = [tuple(p) for p in points]
        common = frozenset(range(len(self.facets)))
        for p in pts:
            common &= frozenset(self.tight_facets(p))
        face = self._face_by_key.get(common)
        if face is None:
            raise InvalidRegion("points do not determine a face", points=pts)
        return face

    def face_by_vertices(self, vertices: Iterable[Sequence[int]]) -> Face:
        verts = tuple(sorted(tuple(v) for v in vertices))
        face = self.face_of(verts)
        if face.vertices != verts:
            raise InvalidRegion("the given vertices are not exactly the vertices of a face", vertices=verts)
        return face

    def lattice_points(self) -> list[Point]:
        """All lattice points of Delta, lexicographically."""
        if self._lattice_points is None:
            lo = [min(p[i] for p in self.support) for i in range(self.ambient_dimension)]
            hi = [max(p[i] for p in self.support) for i in range(self.ambient_dimension)]
            self._lattice_points = [x for x in product(*[range(a, b + 1) for a, b in zip(lo, hi)]) if self.contains(x)]
        return list(self._lattice_points)

    def scaled_lattice_points(self, k: int) -> list[Point]:
        """Lattice points of k*Delta."""
        lo = [k * min(p[i] for p in self.support) for i in range(self.ambient_dimension)]
        hi = [k * max(p[i] for p in self.support) for i in range(self.ambient_dimension)]
        return [x for x in product(*[range(a, b + 1) for a, b in zip(lo, hi)]) if self.contains(x, k)]

    def ordered(self, points: Iterable[Point]) -> list[Point]:
        """Order by codimension of the minimal face (descending), then lexicographically."""
        return sorted(points, key=lambda x: (-self.minimal_face(x).codimension, x))

    def to_dict(self) -> dict:
        return {
            "ambient_dimension": self.ambient_dimension,
            "dimension": self.dimension,
            "vertices": [list(v) for v in self.vertices],
            "equations": [{"normal": list(a), "value": c} for a, c in self.equations],
            "facets": [{"normal": list(f.normal), "bound": f.bound} for f in self.facets],
            "faces": [{"vertices": [list(v) for v in F.vertices], "dimension": F.dimension} for F in self.faces],
            "lattice_points": [list(x) for x in self.ordered(self.lattice_points())],
        }

    def __repr__(self):
        return f"NewtonPolytope(vertices={self.vertices}, dimension={self.dimension})"


def build_polytope(support: Iterable[Sequence[int]]) -> NewtonPolytope:
    return NewtonPolytope(support)


def interior_lattice_points(polytope: NewtonPolytope) -> list[Point]:
    """Lattice points lying on no facet, lexicographically."""
    return [x for x in polytope.lattice_points() if not polytope.tight_facets(x)]


def cone_membership(u0: int, u: Sequence[int], polytope: NewtonPolytope) -> bool:
    """(u0, u) lies in the cone over Delta, i.e. u in u0*Delta."""
    if u0 < 0:
        return False
    if u0 == 0:
        return all(x == 0 for x in u)
    return polytope.contains(u, u0)


# ---------------------------------------------------------------------------- regions


@dataclass
class Region:
    """An open subset of Delta: the complement of a union of faces."""

    parent: NewtonPolytope
    excluded: tuple[Face, ...]
    name: str = "custom"
    lattice_points: list[Point] = field(default_factory=list)

    def __post_init__(self):
        if not self.lattice_points:
            self.lattice_points = self.parent.ordered(x for x in self.parent.lattice_points() if self.contains(x))

    def contains(self, x: Sequence[int], scale: int = 1) -> bool:
        """x/scale lies in the region."""
        P = self.parent
        if scale <= 0 or not P.contains(x, scale):
            return False
        tight = frozenset(P.tight_facets(x, scale))
        return not any(tight >= E.facets for E in self.excluded)

    def contains_cone_point(self, v0: int, v: Sequence[int]) -> bool:
        """(v0, v) lies in the cone over the region."""
        return self.contains(v, v0)

    def closed_complement(self) -> list[Face]:
        """All faces contained in the complement."""
        return [F for F in self.parent.faces if any(F.facets >= E.facets for E in self.excluded)]

    def is_open(self) -> bool:
        # The complement is a union of the excluded faces by construction;
        # check that the lattice points agree with that description.
        pts = set(self.lattice_points)
        for x in self.parent.lattice_points():
            F = self.parent.minimal_face(x)
            inside = not any(F.facets >= E.facets for E in self.excluded)
            if inside != (x in pts):
                return False
        return True

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "excluded_faces": [[list(v) for v in E.vertices] for E in self.excluded],
            "lattice_points": [list(x) for x in self.lattice_points],
        }

    def __repr__(self):
        return f"Region({self.name}, points={self.lattice_points})"


def full_region(polytope: NewtonPolytope) -> Region:
    return Region(polytope, (), "full")


def interior_region(polytope: NewtonPolytope) -> Region:
    proper = tuple(F for F in polytope.faces if F.codimension > 0)
    return Region(polytope, proper, "interior")


def level_region(polytope: NewtonPolytope, level: int) -> Region:
    """Complement of the union of faces of codimension > level."""
    if not 0 <= level <= polytope.dimension:
        raise ConfigurationError(f"level must lie in 0..{polytope.dimension}", level=level)
    excluded = tuple(F for F in polytope.faces if F.codimension > level)
    return Region(polytope, excluded, f"level-{level}")


def one_vertex_region(polytope: NewtonPolytope, vertex: Sequence[int]) -> Region:
    """The open star of a vertex; valid only when its lattice points are the vertex alone."""
    v = tuple(vertex)
    if v not in polytope.vertices:
        raise InvalidRegion("not a vertex", point=v)
    star = frozenset(polytope.tight_facets(v))
    excluded = tuple(F for F in polytope.faces if not F.facets <= star)
    region = Region(polytope, excluded, f"vertex-{','.join(map(str, v))}")
    if region.lattice_points != [v]:
        raise InvalidRegion(
            "the open star of this vertex contains other lattice points",
            vertex=v,
            lattice_points=region.lattice_points,
        )
    return region


def faces_complement_region(polytope: NewtonPolytope, faces: Iterable[Iterable[Sequence[int]]]) -> Region:
    """Complement of the union of faces, each given by its vertex list."""
    excluded = tuple(polytope.face_by_vertices(vs) for vs in faces)
    return Region(polytope, excluded, "faces-complement")


def region_from_points(polytope: NewtonPolytope, points: Iterable[Sequence[int]]) -> Region:
    """The open region whose lattice points are exactly ``points``, if one exists."""
    target = {tuple(p) for p in points}
    excluded = tuple(
        F for F in polytope.faces if not any(polytope.contains(x) and frozenset(polytope.tight_facets(x)) >= F.facets for x in target)
    )
    region = Region(polytope, excluded, "points")
    if set(region.lattice_points) != target:
        raise InvalidRegion("these lattice points do not form an open region", points=sorted(target))
    return region


def all_open_regions(polytope: NewtonPolytope, max_proper_faces: int = 16) -> list[Region]:
    """Every open region with at least one lattice point, one per distinct closed complement.

    Closed sets of the face topology are unions of faces closed under taking
    subfaces; each is generated by the faces in an arbitrary subset.
    """
    proper = [F for F in polytope.faces if F.codimension > 0]
    if len(proper) > max_proper_faces:
        raise ConfigurationError("too many faces to enumerate open regions", faces=len(proper))
    seen: dict[frozenset, Region] = {}
    for mask in range(1 << len(proper)):
        gens = [proper[i] for i in range(len(proper)) if mask >> i & 1]
        closure = frozenset(F.facets for F in polytope.faces if any(F.facets >= E.facets for E in gens))
        if closure in seen:
            continue
        name = "full" if not gens else "minus " + " ".join(F.label() for F in gens)
        region = Region(polytope, tuple(gens), name)
        if region.lattice_points:
            seen[closure] = region
        else:
            seen[closure] = None
    return [r for r in seen.values() if r is not None]
