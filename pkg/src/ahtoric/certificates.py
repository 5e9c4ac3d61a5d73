"""Disjoint-unit certificates, their verifier, and the counting arithmetic."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from math import comb
from typing import Iterable, Sequence

from .degeneration import CellKind, Subdivision, check_regularity
from .geometry import ConvexLatticePolytope, Point, affine_dimension, disjoint, hull
from .oracle import limit_precondition


class UnitKind(str, Enum):
    TANGENT = "TangentTetra"
    LIMIT_CUBE = "LimitTetraInCube"
    LIMIT_SIGMA = "LimitTetraInSigma"
    LIMIT_SEMICUBE = "LimitTetraInSemicube"
    CUBE_PAIR = "SegreCubePair"


TETRA_KINDS = frozenset(
    {UnitKind.TANGENT, UnitKind.LIMIT_CUBE, UnitKind.LIMIT_SIGMA, UnitKind.LIMIT_SEMICUBE}
)
LIMIT_HOST = {
    UnitKind.LIMIT_CUBE: CellKind.CUBE,
    UnitKind.LIMIT_SIGMA: CellKind.SIGMA,
    UnitKind.LIMIT_SEMICUBE: CellKind.SEMICUBE,
}
TANGENT_HOSTS = frozenset({CellKind.CUBE, CellKind.SIGMA, CellKind.SEMICUBE, CellKind.CORNER_TETRA})


@dataclass(frozen=True)
class Unit:
    kind: UnitKind
    cell_index: int
    vertex_set: frozenset[Point]

    @property
    def contribution(self) -> int:
        return 2 if self.kind is UnitKind.CUBE_PAIR else 1

    @property
    def vertices(self) -> tuple[Point, ...]:
        return tuple(sorted(self.vertex_set))

    def geometry(self) -> ConvexLatticePolytope:
        return _unit_hull(self.vertices)

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "cell": self.cell_index, "vertices": [list(v) for v in self.vertices]}


_HULLS: dict[tuple[Point, ...], ConvexLatticePolytope] = {}


def _unit_hull(verts: tuple[Point, ...]) -> ConvexLatticePolytope:
    P = _HULLS.get(verts)
    if P is None:
        P = _HULLS[verts] = hull(verts)
    return P


def is_corner_tetra(pts: Iterable[Point]) -> bool:
    """{v, v +- e1, v +- e2, v +- e3}: a corner of some unit lattice cube."""
    pts = set(pts)
    if len(pts) != 4:
        return False
    for v in pts:
        others = pts - {v}
        axes = set()
        for w in others:
            diff = [a - b for a, b in zip(w, v)]
            nz = [i for i, c in enumerate(diff) if c]
            if len(nz) != 1 or abs(diff[nz[0]]) != 1:
                break
            axes.add(nz[0])
        else:
            if axes == {0, 1, 2}:
                return True
    return False


def unit_legality(unit: Unit, host: Subdivision) -> str | None:
    """``None`` when legal, else the reason."""
    if not 0 <= unit.cell_index < len(host.cells):
        return "cell index out of range"
    cell = host.cells[unit.cell_index]
    vs = unit.vertex_set
    if not vs <= cell.points:
        return "vertices not in host cell"
    if unit.kind is UnitKind.CUBE_PAIR:
        if cell.kind is not CellKind.CUBE or vs != cell.points:
            return "cube pair must be a whole cube cell"
        return None
    if len(vs) != 4 or affine_dimension(list(vs)) != 3:
        return "tetrahedron must have 4 affinely independent vertices"
    if unit.kind is UnitKind.TANGENT:
        if cell.kind not in TANGENT_HOSTS or not is_corner_tetra(vs):
            return "not a corner tetrahedron"
        return None
    if cell.kind is not LIMIT_HOST[unit.kind]:
        return f"{unit.kind.value} needs a {LIMIT_HOST[unit.kind].value} cell"
    a = cell.anchor
    local_cell = tuple(sorted(tuple(c - o for c, o in zip(p, a)) for p in cell.points))
    local_tetra = tuple(sorted(tuple(c - o for c, o in zip(p, a)) for p in vs))
    if not limit_precondition(local_cell, local_tetra):
        return "limit-projection precondition not certified"
    return None


@dataclass(frozen=True)
class Region:
    """A labelled set of lattice points used for per-region tallies."""

    label: str
    points: frozenset[Point]


@dataclass
class Certificate:
    host: Subdivision
    units: tuple[Unit, ...]
    claimed_secant_index: int
    d: int | None = None
    regions: tuple[Region, ...] = ()
    provenance: dict = field(default_factory=dict)

    @property
    def contributions(self) -> int:
        return sum(u.contribution for u in self.units)

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "claimed_k": self.claimed_secant_index,
            "units": [u.to_json() for u in self.units],
            "provenance": dict(sorted(self.provenance.items())),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def units_from_json(data: dict, host: Subdivision) -> tuple[Unit, ...]:
    return tuple(
        Unit(UnitKind(u["kind"]), int(u["cell"]), frozenset(tuple(v) for v in u["vertices"]))
        for u in data["units"]
    )


@dataclass
class VerificationReport:
    passed: bool
    reason: str = ""
    witness: tuple = ()
    claimed_k: int = -1
    contributions: int = 0
    units: int = 0
    uncovered: tuple[Point, ...] = ()
    region_tallies: dict = field(default_factory=dict)

    @property
    def span_dimension(self) -> int:
        return 4 * self.contributions - 1

    def to_json(self) -> dict:
        return {
            "pass": self.passed,
            "reason": self.reason,
            "witness": [list(w) if isinstance(w, tuple) else w for w in self.witness],
            "claimed_k": self.claimed_k,
            "contributions": self.contributions,
            "units": self.units,
            "span_dimension": self.span_dimension,
            "uncovered": [list(p) for p in self.uncovered],
            "region_tallies": self.region_tallies,
        }


def _overlapping_pairs(boxes: Sequence[tuple[Point, Point]]):
    order = sorted(range(len(boxes)), key=lambda i: boxes[i][0][0])
    active: list[int] = []
    for i in order:
        lo = boxes[i][0]
        active = [j for j in active if boxes[j][1][0] >= lo[0]]
        for j in active:
            (alo, ahi), (blo, bhi) = boxes[j], boxes[i]
            if all(a <= d and c <= b for a, b, c, d in zip(alo, ahi, blo, bhi)):
                yield (min(i, j), max(i, j))
        active.append(i)


def verify_certificate(c: Certificate, check_host: bool = True) -> VerificationReport:
    rep = VerificationReport(False, claimed_k=c.claimed_secant_index, units=len(c.units), contributions=c.contributions)
    if check_host:
        reg = check_regularity(c.host)
        if not reg.passed:
            rep.reason = f"host not regular: {reg.reason}"
            rep.witness = (reg.cell_index, reg.point)
            return rep
    for i, u in enumerate(c.units):
        why = unit_legality(u, c.host)
        if why:
            rep.reason = f"unit {i} illegal: {why}"
            rep.witness = (i,)
            return rep
    owner: dict[Point, int] = {}
    for i, u in enumerate(c.units):
        for p in sorted(u.vertex_set):
            if p in owner:
                rep.reason = "units share a vertex"
                rep.witness = (owner[p], i, p)
                return rep
            owner[p] = i
    geoms = [u.geometry() for u in c.units]
    for i, j in sorted(_overlapping_pairs([g.bbox() for g in geoms])):
        if not disjoint(geoms[i], geoms[j]):
            rep.reason = "unit polytopes intersect"
            rep.witness = (i, j)
            return rep
    if c.contributions != c.claimed_secant_index + 1:
        rep.reason = f"contributions {c.contributions} != claimed k + 1 = {c.claimed_secant_index + 1}"
        return rep
    rep.uncovered = tuple(p for p in c.host.points if p not in owner)
    for r in c.regions:
        us = {owner[p] for p in r.points if p in owner}
        rep.region_tallies[r.label] = {
            "points": len(r.points),
            "units": len(us),
            "contributions": sum(c.units[i].contribution for i in us),
            "uncovered": sum(1 for p in r.points if p not in owner),
        }
    rep.passed = True
    return rep


# ---------------------------------------------------------------- arithmetic


def n_plus_one(d: int) -> int:
    """n_d + 1 = floor((d+1)(d+2)(d+3)/24)."""
    return (d + 1) * (d + 2) * (d + 3) // 24


@dataclass(frozen=True)
class ExpectedDimension:
    d: int
    N_d: int
    n_d: int
    codim_class: int


def expected_dimension(d: int) -> ExpectedDimension:
    if d < 1:
        raise ValueError("d must be >= 1")
    N = comb(d + 3, 3) - 1
    m = n_plus_one(d)
    return ExpectedDimension(d, N, m - 1, (N + 1) - 4 * m)


def residue_codim(d: int) -> int:
    """Codimension of Sec_{n_d} by the residue of d mod 8."""
    if d % 2 == 1 or d % 8 == 6:
        return 0
    return {0: 1, 2: 2, 4: 3}[d % 8]


def alpha_plus_one(k: int, family: int) -> int:
    """alpha_k + 1 for the A_k blocks of the 10+8k and 12+8k families."""
    if k < 2:
        raise ValueError("A_k needs k >= 2")
    if family == 10:
        if k == 2:
            return 276
        squares = 35 + sum(range(3, 4 * (k - 2) + 2))
        return 8 * squares + 6 * (4 * (k - 2) + 2)
    if family == 12:
        if k == 2:
            return 362
        squares = 46 + sum(range(4, 4 * k - 5))
        return 8 * squares + 6 * (4 * k - 5)
    raise ValueError("family must be 10 or 12")


BLOCK_CONTRIBUTIONS = {
    "Delta1": 1,
    "cube": 2,
    "gamma7": 6,
    "Delta6": 21,
    "T5": 14,
    "T6": 21,
    "P7": 72,
    "C7": 128,
    "H9": 198,
    "P9": 110,
    "P11": 156,
    "P13": 210,
    "Tstar7": 28,
    "Tstar9": 42,
    "Tstar11": 56,
    "B8": 49,
    "B10": 63,
    "B12": 77,
    "Xi": 107,
}


def block_contribution(name: str, params: dict | None = None) -> int:
    if name == "A":
        params = params or {}
        return alpha_plus_one(int(params["k"]), int(params["family"]))
    try:
        return BLOCK_CONTRIBUTIONS[name]
    except KeyError:
        raise KeyError(f"unknown block {name!r}") from None


# ---------------------------------------------------------------- identities


@dataclass
class IdentityLine:
    d: int
    family: str
    formula: int
    required: int
    ok: bool
    flagged: bool = False
    note: str = ""


@dataclass
class IdentityReport:
    lines: list[IdentityLine]

    @property
    def passed(self) -> bool:
        return all(l.ok or l.flagged for l in self.lines)

    @property
    def flagged(self) -> list[IdentityLine]:
        return [l for l in self.lines if l.flagged]

    def line(self, d: int, family: str | None = None) -> IdentityLine:
        return next(l for l in self.lines if l.d == d and (family is None or l.family == family))


def layer7_points(d: int) -> int:
    """Lattice points of the height-7 slab at the base of Delta_d."""
    return comb(d + 3, 3) - comb(d - 5, 3)


def family_sum(d: int) -> tuple[str, int]:
    """The displayed S^7_d block sum for even d >= 14 (point counts)."""
    k, r = divmod(d - 6, 8)
    if r == 0:
        return "6+8k", k * (k - 1) // 2 * 128 + k * 72 + 2 * 21 + k * (14 + 21) + (k - 1) * 21
    k = (d - 8) // 8
    if d % 8 == 0 and k == 1:
        return "8+8k", 110 + 2 * 21 + 49
    if d % 8 == 0:
        return "8+8k", (
            198 + 4 * 72 + sum(i * 128 + 4 * 72 for i in range(1, k - 2)) + k * 72
            + (k - 1) * (14 + 21) + (k + 1) * 21 + 49
        )
    k = (d - 10) // 8 if d % 8 == 2 else (d - 12) // 8
    fam = 10 if d % 8 == 2 else 12
    tail = 63 if fam == 10 else 77
    if k == 1:
        # first recursion: P_11 / P_13 prism, two Delta_6 and the B block: P_11 / P_13 prism, two Delta_6 and the B block
        return f"{fam}+8k", (156 if fam == 10 else 210) + 2 * 21 + tail
    return f"{fam}+8k", (
        alpha_plus_one(k, fam) + 2 * (k - 2) * 128 + 2 * 72 + (k + 1) * 21 + tail + (k - 1) * (14 + 21)
    )


def explicit_8k_k2_sum() -> int:
    """H_9 + 2 P_7 + 3 Delta_6 + (T_5 + T_6) + B_8 for d = 24."""
    return 198 + 2 * 72 + 3 * 21 + (14 + 21) + 49


def check_identities(d_max: int) -> IdentityReport:
    if d_max < 5:
        raise ValueError("d_max must be >= 5")
    lines = []
    for d in range(7, d_max + 1, 2):
        req = n_plus_one(d) - n_plus_one(d - 2)
        lines.append(IdentityLine(d, "odd", (d + 1) ** 2 // 4, req, (d + 1) ** 2 // 4 == req))
    for d in range(14, d_max + 1, 2):
        fam, val = family_sum(d)
        req = n_plus_one(d) - n_plus_one(d - 8)
        cover = layer7_points(d)
        line = IdentityLine(d, fam, val, req, val == req and 4 * val == cover)
        if d == 24:
            line.flagged = not line.ok
            line.note = f"displayed sum {val} != {req}; explicit layout gives {explicit_8k_k2_sum()}"
            line.ok = explicit_8k_k2_sum() == req
        lines.append(line)
    return IdentityReport(lines)


# ---------------------------------------------------------------- claims


@dataclass
class Claim:
    k_range: str
    justification: str
    oracle_required: bool = False


def classify_all_k(d: int, certificate_verified: bool) -> list[Claim]:
    if not certificate_verified:
        raise ValueError("a verified certificate for n_d is required")
    e = expected_dimension(d)
    claims = [
        Claim(f"k < {e.n_d}", "monotonicity from the n_d certificate"),
        Claim(f"k = {e.n_d}", "disjoint-unit certificate"),
    ]
    if e.codim_class == 0:
        claims.append(Claim(f"k > {e.n_d}", "Sec_{n_d} already fills P^N"))
    elif e.codim_class == 1:
        claims.append(Claim(f"k > {e.n_d}", "hypersurface: one more tangent space spans P^N"))
    elif e.codim_class == 2:
        claims.append(Claim(f"k > {e.n_d}", "codim 2: projection to P^1 would make V degenerate"))
    else:
        claims.append(
            Claim(f"k = {e.n_d + 1}", "codim 3: extra tetrahedron near the three free points", oracle_required=True)
        )
        claims.append(Claim(f"k > {e.n_d + 1}", "fills P^N after k = n_d + 1"))
    return claims
