"""Exact backtracking search for disjoint unit placements in a subdivided region."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterable, Sequence

from .certificates import (
    LIMIT_HOST,
    TANGENT_HOSTS,
    Certificate,
    Unit,
    UnitKind,
    is_corner_tetra,
)
from .degeneration import CellKind, Subdivision
from .geometry import Point, affine_dimension, disjoint
from .oracle import limit_precondition

DEFAULT_BUDGET = 10**8
TETRA_ONLY = frozenset(
    {UnitKind.TANGENT, UnitKind.LIMIT_CUBE, UnitKind.LIMIT_SIGMA, UnitKind.LIMIT_SEMICUBE}
)
ALL_KINDS = TETRA_ONLY | {UnitKind.CUBE_PAIR}
_KIND_ORDER = {k: i for i, k in enumerate(UnitKind)}


class Unsat(Exception):
    """The search space was exhausted without a solution."""


class BudgetExhausted(Exception):
    """The node budget ran out before the search finished."""

    def __init__(self, nodes: int, best: int | None = None):
        super().__init__(f"budget exhausted after {nodes} nodes")
        self.nodes = nodes
        self.best = best


@dataclass
class PackingProblem:
    region: Subdivision
    allowed_kinds: frozenset[UnitKind]
    target_contribution: int
    max_uncovered: int | None = None
    points: frozenset[Point] | None = None

    def __post_init__(self):
        self.allowed_kinds = frozenset(UnitKind(k) for k in self.allowed_kinds)
        if self.target_contribution < 0:
            raise ValueError("target_contribution must be >= 0")
        if not self.allowed_kinds:
            raise ValueError("allowed_kinds must be nonempty")


@dataclass
class PackingSolution:
    units: tuple[Unit, ...]
    uncovered: frozenset[Point]
    nodes_explored: int

    @property
    def contribution(self) -> int:
        return sum(u.contribution for u in self.units)

    def certificate(self, region: Subdivision) -> Certificate:
        return Certificate(region, self.units, self.contribution - 1)


def _corner_tetras(pts: frozenset[Point]) -> Iterable[frozenset[Point]]:
    for v in sorted(pts):
        for s in product((1, -1), repeat=3):
            q = [v] + [tuple(c + (s[i] if i == a else 0) for i, c in enumerate(v)) for a in range(3)]
            if all(p in pts for p in q):
                yield frozenset(q)


def _cell_units(idx: int, cell, kinds: frozenset[UnitKind]) -> list[Unit]:
    out = []
    pts = cell.points
    if UnitKind.CUBE_PAIR in kinds and cell.kind is CellKind.CUBE:
        out.append(Unit(UnitKind.CUBE_PAIR, idx, pts))
    if UnitKind.TANGENT in kinds and cell.kind in TANGENT_HOSTS:
        out.extend(Unit(UnitKind.TANGENT, idx, q) for q in set(_corner_tetras(pts)))
    for kind, host in LIMIT_HOST.items():
        if kind not in kinds or cell.kind is not host:
            continue
        a = cell.anchor
        local = tuple(sorted(tuple(c - o for c, o in zip(p, a)) for p in pts))
        for quad in combinations(sorted(pts), 4):
            if affine_dimension(list(quad)) != 3:
                continue
            lq = tuple(sorted(tuple(c - o for c, o in zip(p, a)) for p in quad))
            if limit_precondition(local, lq):
                out.append(Unit(kind, idx, frozenset(quad)))
    return out


def enumerate_candidate_units(
    region: Subdivision, kinds: Iterable[UnitKind], points: frozenset[Point] | None = None
) -> list[Unit]:
    """All legal units per cell, one per vertex set, tangent readings preferred."""
    kinds = frozenset(UnitKind(k) for k in kinds)
    best: dict[frozenset[Point], tuple] = {}
    for idx, cell in enumerate(region.cells):
        if points is not None and len(cell.points & points) < 4:
            continue
        for u in _cell_units(idx, cell, kinds):
            if points is not None and not u.vertex_set <= points:
                continue
            key = (cell.anchor, cell.orientation, _KIND_ORDER[u.kind], u.vertices, idx)
            prev = best.get(u.vertex_set)
            if prev is None or _prefer(key, prev[0]):
                best[u.vertex_set] = (key, u)
    return [u for _, u in sorted(best.values(), key=lambda t: t[0])]


def _prefer(new: tuple, old: tuple) -> bool:
    """Tangent beats limit; otherwise the lexicographically first reading wins."""
    nt, ot = new[2] == 0, old[2] == 0
    if nt != ot:
        return nt
    return new < old


class _Search:
    def __init__(self, region: Subdivision, cands: Sequence[Unit], points: Sequence[Point], budget: int):
        self.cands = list(cands)
        self.points = sorted(points)
        self.pidx = {p: i for i, p in enumerate(self.points)}
        self.verts = [[self.pidx[p] for p in u.vertices] for u in self.cands]
        self.masks = [sum(1 << i for i in v) for v in self.verts]
        self.covering: list[list[int]] = [[] for _ in self.points]
        for ci, vs in enumerate(self.verts):
            for i in vs:
                self.covering[i].append(ci)
        self.geoms = [u.geometry() for u in self.cands]
        self.lo = [g.bbox()[0] for g in self.geoms]
        self.conflict: dict[tuple[int, int], bool] = {}
        self.buckets: dict[Point, list[int]] = {}
        self.budget = budget
        self.nodes = 0
        self.order = "mrv"

    def clashes(self, ci: int) -> bool:
        x, y, z = self.lo[ci]
        for dx, dy, dz in product((-1, 0, 1), repeat=3):
            for cj in self.buckets.get((x + dx, y + dy, z + dz), ()):
                key = (ci, cj) if ci < cj else (cj, ci)
                hit = self.conflict.get(key)
                if hit is None:
                    hit = self.conflict[key] = not disjoint(self.geoms[ci], self.geoms[cj])
                if hit:
                    return True
        return False

    def place(self, ci: int) -> None:
        self.buckets.setdefault(self.lo[ci], []).append(ci)

    def unplace(self, ci: int) -> None:
        self.buckets[self.lo[ci]].pop()

    def tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetExhausted(self.nodes)

    def first_free(self, free: int) -> int:
        return (free & -free).bit_length() - 1

    def most_constrained(self, free: int) -> int:
        """Free point with the fewest still-placeable units; ties go to the smallest."""
        best, best_n = -1, None
        f = free
        while f:
            low = f & -f
            i = low.bit_length() - 1
            f ^= low
            n = 0
            for ci in self.covering[i]:
                m = self.masks[ci]
                if m & free == m:
                    n += 1
                    if best_n is not None and n >= best_n:
                        break
            if best_n is None or n < best_n:
                best, best_n = i, n
                if n == 0:
                    break
        return best

    def pick(self, free: int) -> int:
        return self.most_constrained(free) if self.order == "mrv" else self.first_free(free)


def _region_points(p: PackingProblem) -> list[Point]:
    pts = p.region.points
    return [q for q in pts if p.points is None or q in p.points]


def solve(p: PackingProblem, budget: int = DEFAULT_BUDGET, order: str = "mrv") -> PackingSolution:
    if budget <= 0:
        raise ValueError("budget must be positive")
    points = _region_points(p)
    cands = enumerate_candidate_units(p.region, p.allowed_kinds, frozenset(points))
    s = _Search(p.region, cands, points, budget)
    s.order = order
    spare = len(points) - 4 * p.target_contribution
    if spare < 0 or (p.max_uncovered is not None and spare > p.max_uncovered):
        raise Unsat("target incompatible with point count and uncovered budget")
    chosen: list[int] = []

    def dfs(free: int, need: int, skips: int) -> bool:
        s.tick()
        if need <= 0:
            return True
        if free.bit_count() < 4 * need:
            return False
        i = s.pick(free)
        for ci in s.covering[i]:
            m = s.masks[ci]
            if m & free != m or s.cands[ci].contribution > need or s.clashes(ci):
                continue
            chosen.append(ci)
            s.place(ci)
            if dfs(free & ~m, need - s.cands[ci].contribution, skips):
                return True
            s.unplace(ci)
            chosen.pop()
        if skips > 0:
            return dfs(free & ~(1 << i), need, skips - 1)
        return False

    if not dfs((1 << len(points)) - 1, p.target_contribution, spare):
        raise Unsat(f"no placement after {s.nodes} nodes")
    units = tuple(s.cands[ci] for ci in chosen)
    covered = set().union(*(u.vertex_set for u in units)) if units else set()
    return PackingSolution(units, frozenset(q for q in points if q not in covered), s.nodes)


@dataclass
class MaxResult:
    value: int
    exact: bool
    nodes: int
    units: tuple[Unit, ...] = field(default=())


def max_contribution(
    region: Subdivision,
    kinds: Iterable[UnitKind],
    budget: int = DEFAULT_BUDGET,
    points: frozenset[Point] | None = None,
) -> MaxResult:
    """Branch and bound for the largest total contribution."""
    prob = PackingProblem(region, frozenset(kinds), 0, None, points)
    pts = _region_points(prob)
    cands = enumerate_candidate_units(region, prob.allowed_kinds, frozenset(pts))
    s = _Search(region, cands, pts, budget)
    best = [0, ()]
    chosen: list[int] = []

    def dfs(free: int, got: int) -> None:
        s.tick()
        if got > best[0]:
            best[0], best[1] = got, tuple(chosen)
        if got + free.bit_count() // 4 <= best[0] or not free:
            return
        i = s.first_free(free)
        for ci in s.covering[i]:
            m = s.masks[ci]
            if m & free != m or s.clashes(ci):
                continue
            chosen.append(ci)
            s.place(ci)
            dfs(free & ~m, got + s.cands[ci].contribution)
            s.unplace(ci)
            chosen.pop()
        dfs(free & ~(1 << i), got)

    try:
        dfs((1 << len(pts)) - 1, 0)
    except BudgetExhausted:
        return MaxResult(best[0], False, s.nodes, tuple(s.cands[c] for c in best[1]))
    return MaxResult(best[0], True, s.nodes, tuple(s.cands[c] for c in best[1]))
