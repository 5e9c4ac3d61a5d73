"""Exact lattice-polytope geometry in dimension 3.

Everything here works over the integers and :class:`fractions.Fraction`;
there is no floating point anywhere in this module.
"""

from __future__ import annotations

import functools
import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

import numpy as np

Point = tuple[int, ...]
RationalPoint = tuple[Fraction, ...]

DIM = 3

# Primitive directions used to discard points that are midpoints of two others.
_MIDPOINT_DIRS = [
    v
    for v in itertools.product((-1, 0, 1), repeat=DIM)
    if any(v) and next(c for c in v if c) > 0
]


class GeometryError(ValueError):
    pass


def _sub(a: Sequence, b: Sequence) -> tuple:
    return tuple(x - y for x, y in zip(a, b))


def _dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


def _cross(a: Sequence[int], b: Sequence[int]) -> tuple[int, int, int]:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _primitive(v: Sequence[int]) -> tuple[int, ...]:
    g = 0
    for c in v:
        g = gcd(g, c)
    if g == 0:
        raise GeometryError("zero vector has no primitive form")
    return tuple(c // g for c in v)


def _lex_positive(v: tuple[int, ...]) -> tuple[int, ...]:
    lead = next(c for c in v if c)
    return v if lead > 0 else tuple(-c for c in v)


def rank(vectors: Iterable[Sequence]) -> int:
    """Rank of a list of rational vectors by fraction-exact elimination."""
    rows = [[Fraction(c) for c in v] for v in vectors]
    r = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(r + 1, len(rows)):
            f = rows[i][c] / rows[r][c]
            if f:
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        r += 1
    return r


def affine_dimension(points: Sequence[Sequence]) -> int:
    if len(points) <= 1:
        return 0
    base = points[0]
    return rank(_sub(p, base) for p in points[1:])


@dataclass(frozen=True, order=True)
class HalfSpace:
    """``normal . x <= offset`` (or ``<`` when ``strict``)."""

    normal: tuple[int, ...]
    offset: Fraction
    strict: bool = False

    def __post_init__(self):
        if not any(self.normal):
            raise GeometryError("halfspace normal must be nonzero")

    def satisfied(self, x: Sequence) -> bool:
        v = _dot(self.normal, x)
        return v < self.offset if self.strict else v <= self.offset

    def tight(self, x: Sequence) -> bool:
        return _dot(self.normal, x) == self.offset


@dataclass(frozen=True)
class ConvexLatticePolytope:
    """V-representation with a derived, canonicalized H-representation.

    Equalities of lower-dimensional polytopes are stored as two opposite
    halfspaces whose first member has a lexicographically positive normal.
    """

    vertices: tuple[Point, ...]
    halfspaces: tuple[HalfSpace, ...] = field(repr=False, compare=False)
    dim: int = field(compare=False, default=3)

    @property
    def ambient_dim(self) -> int:
        return len(self.vertices[0])

    def bbox(self) -> tuple[Point, Point]:
        arr = np.array(self.vertices, dtype=np.int64)
        return tuple(int(c) for c in arr.min(0)), tuple(int(c) for c in arr.max(0))

    def translate(self, v: Sequence[int]) -> ConvexLatticePolytope:
        verts = tuple(sorted(tuple(a + b for a, b in zip(p, v)) for p in self.vertices))
        hs = tuple(
            sorted(HalfSpace(h.normal, h.offset + _dot(h.normal, v), h.strict) for h in self.halfspaces)
        )
        return ConvexLatticePolytope(verts, hs, self.dim)

    def facets(self) -> list[HalfSpace]:
        """Inequalities that are not part of an equality pair."""
        keys = {(h.normal, h.offset) for h in self.halfspaces}
        return [
            h
            for h in self.halfspaces
            if (tuple(-c for c in h.normal), -h.offset) not in keys
        ]

    def to_json(self) -> dict:
        return {"vertices": [list(v) for v in self.vertices]}


def _supporting(normal, points) -> tuple[int, int] | None:
    vals = [_dot(normal, p) for p in points]
    return max(vals), min(vals)


def _prune_midpoints(pts: list[Point]) -> list[Point]:
    s = set(pts)
    out = []
    for p in pts:
        interior = False
        for v in _MIDPOINT_DIRS:
            if tuple(a + b for a, b in zip(p, v)) in s and tuple(a - b for a, b in zip(p, v)) in s:
                interior = True
                break
        if not interior:
            out.append(p)
    return out


def _halfspaces_3d(cand: list[Point]) -> set[HalfSpace]:
    hs: set[HalfSpace] = set()
    for a, b, c in itertools.combinations(cand, 3):
        n = _cross(_sub(b, a), _sub(c, a))
        if not any(n):
            continue
        n = _primitive(n)
        hi, lo = _supporting(n, cand)
        off = _dot(n, a)
        if off == hi:
            hs.add(HalfSpace(n, Fraction(off)))
        if off == lo:
            hs.add(HalfSpace(tuple(-x for x in n), Fraction(-off)))
    return hs


def _equalities(normals: list[tuple[int, ...]], p: Point) -> set[HalfSpace]:
    hs = set()
    for n in normals:
        n = _lex_positive(_primitive(n))
        off = _dot(n, p)
        hs.add(HalfSpace(n, Fraction(off)))
        hs.add(HalfSpace(tuple(-x for x in n), Fraction(-off)))
    return hs


def _bounds(directions, cand) -> set[HalfSpace]:
    hs = set()
    for m in directions:
        if not any(m):
            continue
        m = _primitive(m)
        hi, lo = _supporting(m, cand)
        hs.add(HalfSpace(m, Fraction(hi)))
        hs.add(HalfSpace(tuple(-x for x in m), Fraction(-lo)))
    return hs


def hull(points: Iterable[Sequence[int]]) -> ConvexLatticePolytope:
    """Convex hull of a finite set of lattice points in R^3."""
    pts = sorted({tuple(int(c) for c in p) for p in points})
    if not pts:
        raise GeometryError("hull of an empty point set")
    if any(len(p) != DIM for p in pts):
        raise GeometryError(f"all points must have dimension {DIM}")
    dim = affine_dimension(pts)
    cand = _prune_midpoints(pts) if len(pts) > 4 else pts
    a = cand[0]
    if dim == 3:
        hs = _halfspaces_3d(cand)
    elif dim == 2:
        b = next(p for p in cand if p != a)
        c = next(p for p in cand if any(_cross(_sub(b, a), _sub(p, a))))
        n = _primitive(_cross(_sub(b, a), _sub(c, a)))
        hs = _equalities([n], a)
        edge_normals = [_cross(n, _sub(q, p)) for p, q in itertools.combinations(cand, 2)]
        for m in edge_normals:
            m = _primitive(m)
            hi, lo = _supporting(m, cand)
            tight_hi = [p for p in cand if _dot(m, p) == hi]
            tight_lo = [p for p in cand if _dot(m, p) == lo]
            if affine_dimension(tight_hi) == 1:
                hs.add(HalfSpace(m, Fraction(hi)))
            if affine_dimension(tight_lo) == 1:
                hs.add(HalfSpace(tuple(-x for x in m), Fraction(-lo)))
    elif dim == 1:
        u = _primitive(_sub(next(p for p in cand if p != a), a))
        normals = [_cross(u, e) for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]
        normals = [n for n in normals if any(n)]
        chosen = [normals[0]]
        for n in normals[1:]:
            if rank(chosen + [n]) == 2:
                chosen.append(n)
                break
        hs = _equalities(chosen, a) | _bounds([u], cand)
    else:
        hs = _equalities([(1, 0, 0), (0, 1, 0), (0, 0, 1)], a)
    vertices = tuple(
        p for p in cand if rank([h.normal for h in hs if h.tight(p)] or [(0, 0, 0)]) == DIM
    )
    return ConvexLatticePolytope(vertices, tuple(sorted(hs)), dim)


def box(lo: Sequence[int], hi: Sequence[int]) -> ConvexLatticePolytope:
    return hull(itertools.product(*[(a, b) for a, b in zip(lo, hi)]))


def simplex(d: int, origin: Sequence[int] = (0, 0, 0)) -> ConvexLatticePolytope:
    """The lattice simplex {x >= origin, sum(x - origin) <= d}."""
    o = tuple(origin)
    pts = [o] + [tuple(o[i] + (d if i == j else 0) for i in range(DIM)) for j in range(DIM)]
    return hull(pts)


def lattice_points(P: ConvexLatticePolytope) -> list[Point]:
    """All integer points of the closed polytope, sorted lexicographically."""
    lo, hi = P.bbox()
    grids = np.meshgrid(*[np.arange(a, b + 1, dtype=np.int64) for a, b in zip(lo, hi)], indexing="ij")
    cand = np.stack([g.ravel() for g in grids], axis=1)
    A = np.array([h.normal for h in P.halfspaces], dtype=np.int64)
    # offsets of lattice polytopes are integers; floor keeps the test exact otherwise
    b = np.array([h.offset.numerator // h.offset.denominator for h in P.halfspaces], dtype=np.int64)
    ok = np.all(cand @ A.T <= b, axis=1)
    return [tuple(int(c) for c in row) for row in cand[ok]]


def contains(P: ConvexLatticePolytope, x: Sequence) -> bool:
    if len(x) != P.ambient_dim:
        raise GeometryError("dimension mismatch")
    return all(h.satisfied(x) for h in P.halfspaces)


# ---------------------------------------------------------------- intersection


def _normalize_row(coeffs: tuple[Fraction, ...], rhs: Fraction, strict: bool):
    lead = next((abs(c) for c in coeffs if c), None)
    if lead is None:
        return coeffs, rhs, strict
    return tuple(c / lead for c in coeffs), rhs / lead, strict


def _eliminate(system, var):
    pos, neg, zero = [], [], []
    for row in system:
        c = row[0][var]
        (pos if c > 0 else neg if c < 0 else zero).append(row)
    out = set(zero)
    for cp, rp, sp in pos:
        for cn, rn, sn in neg:
            a, b = cp[var], -cn[var]
            coeffs = tuple(b * x + a * y for x, y in zip(cp, cn))
            out.add(_normalize_row(coeffs, b * rp + a * rn, sp or sn))
    return out


def _var_bounds(system, var, assigned):
    """Tightest (value, strict) lower and upper bounds on ``var``."""
    lo, hi = None, None
    for coeffs, rhs, strict in system:
        rest = rhs - sum(coeffs[j] * v for j, v in assigned.items())
        c = coeffs[var]
        if c > 0:
            b = (rest / c, strict)
            if hi is None or b[0] < hi[0] or (b[0] == hi[0] and strict):
                hi = b
        elif c < 0:
            b = (rest / c, strict)
            if lo is None or b[0] > lo[0] or (b[0] == lo[0] and strict):
                lo = b
    return lo, hi


def _violated(rhs: Fraction, strict: bool) -> bool:
    return rhs <= 0 if strict else rhs < 0


def feasible_point(halfspaces: Iterable[HalfSpace]) -> RationalPoint | None:
    """A point satisfying every halfspace, by Fourier-Motzkin elimination.

    Strict inequalities are carried through the elimination, so the answer
    is exact for mixed systems. Returns ``None`` when the system is empty.
    """
    system = {
        _normalize_row(tuple(Fraction(c) for c in h.normal), Fraction(h.offset), h.strict) for h in halfspaces
    }
    for coeffs, rhs, strict in system:
        if not any(coeffs) and _violated(rhs, strict):
            return None
    stages = [system]
    for var in reversed(range(DIM)):
        system = _eliminate(system, var)
        for coeffs, rhs, strict in system:
            if not any(coeffs) and _violated(rhs, strict):
                return None
        system = {row for row in system if any(row[0])}
        stages.append(system)
    assigned: dict[int, Fraction] = {}
    for var in range(DIM):
        # stage DIM - 1 - var holds the system in variables 0..var
        lo, hi = _var_bounds(stages[DIM - 1 - var], var, assigned)
        if lo is not None and hi is not None:
            assigned[var] = (lo[0] + hi[0]) / 2
        elif lo is not None:
            assigned[var] = lo[0] + (1 if lo[1] else 0)
        elif hi is not None:
            assigned[var] = hi[0] - (1 if hi[1] else 0)
        else:
            assigned[var] = Fraction(0)
    return tuple(assigned[i] for i in range(DIM))


def _boxes_disjoint(P: ConvexLatticePolytope, Q: ConvexLatticePolytope) -> bool:
    (plo, phi), (qlo, qhi) = P.bbox(), Q.bbox()
    return any(a > d or c > b for a, b, c, d in zip(plo, phi, qlo, qhi))


def intersection_witness(P: ConvexLatticePolytope, Q: ConvexLatticePolytope) -> RationalPoint | None:
    if P.ambient_dim != Q.ambient_dim:
        raise GeometryError("dimension mismatch")
    if _boxes_disjoint(P, Q):
        return None
    return feasible_point(P.halfspaces + Q.halfspaces)


@functools.lru_cache(maxsize=65536)
def edges(P: ConvexLatticePolytope) -> tuple[tuple[int, ...], ...]:
    """Edge directions of a full-dimensional polytope."""
    fs = P.facets()
    out = set()
    for a, b in itertools.combinations(P.vertices, 2):
        tight = [h.normal for h in fs if h.tight(a) and h.tight(b)]
        if len(tight) >= 2 and rank(tight) == 2:
            out.add(_lex_positive(_primitive(_sub(b, a))))
    return tuple(sorted(out))


def separated(P: ConvexLatticePolytope, Q: ConvexLatticePolytope) -> bool:
    """Exact separating-axis test for two full-dimensional polytopes.

    Face normals and edge-edge cross products are complete for convex
    polytopes in R^3; closed sets are disjoint iff some axis separates strictly.
    """
    axes = [h.normal for h in P.facets()] + [h.normal for h in Q.facets()]
    axes += [c for e in edges(P) for f in edges(Q) if any(c := _cross(e, f))]
    for n in axes:
        pv = [_dot(n, v) for v in P.vertices]
        qv = [_dot(n, v) for v in Q.vertices]
        if max(pv) < min(qv) or max(qv) < min(pv):
            return True
    return False


def disjoint(P: ConvexLatticePolytope, Q: ConvexLatticePolytope) -> bool:
    if P.ambient_dim != Q.ambient_dim:
        raise GeometryError("dimension mismatch")
    if _boxes_disjoint(P, Q):
        return True
    if P.dim == 3 and Q.dim == 3:
        return separated(P, Q)
    return intersection_witness(P, Q) is None


# ---------------------------------------------------------------- export


def _facet_cycle(P: ConvexLatticePolytope, h: HalfSpace) -> list[int]:
    idx = [i for i, v in enumerate(P.vertices) if h.tight(v)]
    verts = [P.vertices[i] for i in idx]
    k = len(verts)
    centre = tuple(Fraction(sum(c), k) for c in zip(*verts))
    u = _sub(verts[0], centre)
    w = _cross(h.normal, u)
    coords = {i: (_dot(_sub(v, centre), u), _dot(_sub(v, centre), w)) for i, v in zip(idx, verts)}

    def half(p):
        x, y = p
        return 0 if (y > 0 or (y == 0 and x > 0)) else 1

    def cmp(i, j):
        a, b = coords[i], coords[j]
        if half(a) != half(b):
            return half(a) - half(b)
        cr = a[0] * b[1] - a[1] * b[0]
        return -1 if cr > 0 else 1 if cr < 0 else 0

    return sorted(idx, key=functools.cmp_to_key(cmp))


def faces(P: ConvexLatticePolytope) -> list[list[int]]:
    """Vertex-index cycles of the 2-faces, counter-clockwise seen from outside."""
    if P.dim == 3:
        return [_facet_cycle(P, h) for h in P.facets()]
    if P.dim == 2:
        eq = next(h for h in P.halfspaces if h not in P.facets())
        return [_facet_cycle(P, eq)]
    return []


def write_off(polytopes: Sequence[ConvexLatticePolytope]) -> str:
    """OFF text for a list of polytopes; shared vertices are merged."""
    verts = sorted({v for P in polytopes for v in P.vertices})
    index = {v: i for i, v in enumerate(verts)}
    face_lines = []
    for P in polytopes:
        for cyc in faces(P):
            ids = [index[P.vertices[i]] for i in cyc]
            face_lines.append(" ".join(map(str, [len(ids)] + ids)))
    lines = ["OFF", f"# cells {len(polytopes)}", f"{len(verts)} {len(face_lines)} 0"]
    lines += [" ".join(map(str, v)) for v in verts]
    lines += face_lines
    return "\n".join(lines) + "\n"


def dumps_polytope(P: ConvexLatticePolytope) -> str:
    return json.dumps(P.to_json(), sort_keys=True)
