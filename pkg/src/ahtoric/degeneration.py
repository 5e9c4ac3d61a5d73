"""Unit-grid subdivisions of Delta_d, layers and blocks, with lifting functions."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

from .geometry import (
    ConvexLatticePolytope,
    Point,
    affine_dimension,
    box,
    contains,
    hull,
    lattice_points,
    simplex,
    write_off,
)

CUBE_CORNERS: tuple[Point, ...] = tuple(itertools.product((0, 1), repeat=3))


class CellKind(str, Enum):
    CUBE = "Cube"
    CORNER_TETRA = "CornerTetra"
    SIGMA = "SigmaBlock"
    SEMICUBE = "Semicube"
    CUSTOM = "Custom"


VERTEX_COUNTS = {CellKind.CUBE: 8, CellKind.CORNER_TETRA: 4, CellKind.SIGMA: 7, CellKind.SEMICUBE: 6}


class BlockError(ValueError):
    pass


class MissingLift(ValueError):
    pass


def corner_index(offset: Sequence[int]) -> int:
    """Orientation code of a unit-cube corner: bits (x, y, z)."""
    return offset[0] | (offset[1] << 1) | (offset[2] << 2)


def _classify(anchor: Point, verts: Sequence[Point]) -> tuple[CellKind, int]:
    local = {tuple(v - a for v, a in zip(p, anchor)) for p in verts}
    missing = [c for c in CUBE_CORNERS if c not in local]
    n = len(local)
    if n == 8:
        return CellKind.CUBE, 0
    if n == 7:
        return CellKind.SIGMA, corner_index(missing[0])
    if n == 6:
        a, b = missing
        if sum(x != y for x, y in zip(a, b)) == 1:
            return CellKind.SEMICUBE, corner_index(min(a, b))
    if n == 4:
        for c in local:
            nbrs = {tuple(c[j] ^ (j == i) for j in range(3)) for i in range(3)}
            if nbrs <= local:
                return CellKind.CORNER_TETRA, corner_index(c)
    return CellKind.CUSTOM, 0


@dataclass(frozen=True)
class Cell:
    kind: CellKind
    anchor: Point
    orientation: int
    geometry: ConvexLatticePolytope

    @cached_property
    def points(self) -> frozenset[Point]:
        return frozenset(lattice_points(self.geometry))

    @property
    def vertices(self) -> tuple[Point, ...]:
        return self.geometry.vertices

    def translate(self, v: Sequence[int]) -> Cell:
        return Cell(
            self.kind,
            tuple(a + b for a, b in zip(self.anchor, v)),
            self.orientation,
            self.geometry.translate(v),
        )


AffineForm = tuple[int, int, int, int]


def cube_form(anchor: Point) -> AffineForm:
    """Affine interpolation of |x|^2 on the unit cube at ``anchor``."""
    i, j, k = anchor
    return (1 + 2 * i, 1 + 2 * j, 1 + 2 * k, -(i + j + k + i * i + j * j + k * k))


def evaluate(form: AffineForm, p: Sequence[int]) -> int:
    return form[0] * p[0] + form[1] * p[1] + form[2] * p[2] + form[3]


@dataclass(frozen=True)
class Subdivision:
    ambient: ConvexLatticePolytope
    cells: tuple[Cell, ...]
    lift: tuple[AffineForm, ...] | None = None
    name: str = ""

    @cached_property
    def points(self) -> tuple[Point, ...]:
        return tuple(lattice_points(self.ambient))

    def counts(self) -> dict[CellKind, int]:
        out = {k: 0 for k in CellKind}
        for c in self.cells:
            out[c.kind] += 1
        return out

    def translate(self, v: Sequence[int]) -> Subdivision:
        return Subdivision(
            self.ambient.translate(v),
            tuple(c.translate(v) for c in self.cells),
            None if self.lift is None else tuple(_shift_form(f, v) for f in self.lift),
            self.name,
        )

    def with_lift(self, lift: Iterable[AffineForm] | None) -> Subdivision:
        return replace(self, lift=None if lift is None else tuple(lift))

    def cell_containing(self, pts: Iterable[Point]) -> int | None:
        pts = set(pts)
        for i, c in enumerate(self.cells):
            if pts <= c.points:
                return i
        return None

    def to_json(self) -> dict:
        return {
            "ambient": self.ambient.to_json(),
            "cells": [
                {
                    "kind": c.kind.value,
                    "anchor": list(c.anchor),
                    "orientation": c.orientation,
                    "vertices": [list(v) for v in c.vertices],
                }
                for c in self.cells
            ],
            "lift": []
            if self.lift is None
            else [{"cell_index": i, "form": list(f)} for i, f in enumerate(self.lift)],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def to_off(self) -> str:
        return write_off([c.geometry for c in self.cells])


def _shift_form(f: AffineForm, v: Sequence[int]) -> AffineForm:
    # g(x) = f(x - v)
    return (f[0], f[1], f[2], f[3] - f[0] * v[0] - f[1] * v[1] - f[2] * v[2])


def unit_grid_subdivision(region: ConvexLatticePolytope, name: str = "") -> Subdivision:
    """Intersect ``region`` with every unit lattice cube.

    Valid for regions whose facets cut unit cubes only along lattice
    diagonals, which holds for every region built in this package.
    """
    lo, hi = region.bbox()
    inside = set(lattice_points(region))
    cells = []
    for anchor in itertools.product(*[range(a, b) for a, b in zip(lo, hi)]):
        offs = tuple(
            off for off in CUBE_CORNERS if tuple(a + c for a, c in zip(anchor, off)) in inside
        )
        if len(offs) < 4:
            continue
        local = _local_cell(offs)
        if local is None:
            continue
        geom = local[2].translate(anchor)
        cells.append(Cell(local[0], anchor, local[1], geom))
    cells.sort(key=lambda c: (c.anchor, c.orientation))
    lift = tuple(cube_form(c.anchor) for c in cells)
    return Subdivision(region, tuple(cells), lift, name)


@lru_cache(maxsize=None)
def _local_cell(offs: tuple[Point, ...]):
    geom = hull(offs)
    if geom.dim < 3:
        return None
    kind, orient = _classify((0, 0, 0), geom.vertices)
    return kind, orient, geom


# ---------------------------------------------------------------- builders


def build_standard_subdivision(d: int) -> Subdivision:
    if d < 1:
        raise ValueError("d must be positive")
    return unit_grid_subdivision(simplex(d), f"Delta_{d}")


def layer_region(k: int, height: int = 1) -> ConvexLatticePolytope:
    """Slab {x >= 0, 0 <= z <= height, x1 + x2 + x3 <= k} of base side k."""
    if k < height:
        raise ValueError("layer base must be at least its height")
    pts = [(0, 0, 0), (k, 0, 0), (0, k, 0)]
    top = k - height
    pts += [(0, 0, height), (top, 0, height), (0, top, height)]
    return hull(pts)


def build_layer(k: int, height: int = 1) -> Subdivision:
    if k < 1:
        raise ValueError("k must be positive")
    return unit_grid_subdivision(layer_region(k, height), f"S{height}_{k}")


def prism_region(n: int, height: int = 7) -> ConvexLatticePolytope:
    """Triangle {x, y >= 0, x + y <= n} times [0, height]."""
    return hull([(0, 0, 0), (n, 0, 0), (0, n, 0), (0, 0, height), (n, 0, height), (0, n, height)])


def truncated_box_region(side: int, cut: int, height: int = 7) -> ConvexLatticePolytope:
    """[0, side]^2 x [0, height] intersected with x + y <= cut."""
    pts = [
        (x, y, z)
        for x in (0, side)
        for y in (0, side)
        for z in (0, height)
        if x + y <= cut
    ]
    for z in (0, height):
        pts += [(cut - side, side, z), (side, cut - side, z)]
    return hull(pts)


def stripe_region(s: int, x_lo: int, x_hi: int, height: int = 7) -> ConvexLatticePolytope:
    """Middle of the front stripe of S^7: s+1 <= x+y, x, y <= s, x+y+z <= s+height,
    restricted to x_lo <= x <= x_hi."""
    pts = []
    for x in range(x_lo, x_hi + 1):
        for y in range(max(0, s + 1 - x), s + 1):
            for z in range(0, s + height - x - y + 1):
                pts.append((x, y, z))
    return hull(pts)


def xi_region() -> ConvexLatticePolytope:
    pts = [
        (x, y, z)
        for x in (0, 7)
        for y in (0, 7)
        for z in (0, 7)
        if x + y + z <= 14
    ]
    pts += [(7, 7, 0), (7, 0, 7), (0, 7, 7)]
    return hull(pts)


# block name -> (description, params schema)
BLOCK_NAMES = (
    "Delta1",
    "cube",
    "gamma7",
    "Delta6",
    "T5",
    "T6",
    "P7",
    "P9",
    "P11",
    "P13",
    "C7",
    "H9",
    "Xi",
    "Tstar7",
    "Tstar9",
    "Tstar11",
    "B8",
    "B10",
    "B12",
    "A",
)

# s used to position the stripe-type blocks, and their x-extent
_STRIPE_BLOCKS = {
    "Tstar7": (9, 1, 6),
    "Tstar9": (11, 1, 8),
    "Tstar11": (13, 1, 10),
    "B8": (9, 1, 9),
    "B10": (11, 1, 11),
    "B12": (13, 1, 13),
}


def a_block_region(k: int, family: int) -> ConvexLatticePolytope:
    """A_k of the 10+8k / 12+8k families; only k = 2 is a convex block."""
    if family not in (10, 12):
        raise BlockError("family must be 10 or 12")
    if k != 2:
        raise BlockError("A_k geometry is reconstructed for k = 2 only")
    side = 11 if family == 10 else 13
    cut = 19 if family == 10 else 21
    return truncated_box_region(side, cut)


def block_region(name: str, params: dict | None = None) -> ConvexLatticePolytope:
    params = dict(params or {})
    if name == "Delta1":
        return simplex(1)
    if name == "cube":
        return box((0, 0, 0), (1, 1, 1))
    if name == "gamma7":
        return prism_region(1)
    if name in ("Delta6", "T6"):
        return simplex(6)
    if name == "T5":
        return simplex(5)
    if name in ("P7", "P9", "P11", "P13"):
        return prism_region(int(name[1:]))
    if name == "C7":
        return box((0, 0, 0), (7, 7, 7))
    if name == "H9":
        return truncated_box_region(9, 17)
    if name == "Xi":
        return xi_region()
    if name in _STRIPE_BLOCKS:
        s, lo, hi = _STRIPE_BLOCKS[name]
        return stripe_region(s, lo, hi)
    if name == "A":
        try:
            k, family = int(params["k"]), int(params["family"])
        except (KeyError, TypeError, ValueError) as exc:
            raise BlockError("A needs integer params k and family") from exc
        return a_block_region(k, family)
    raise BlockError(f"unknown block {name!r}")


def ambient_cells(region: ConvexLatticePolytope, d: int, name: str = "") -> Subdivision:
    """Cells of the standard subdivision of Delta_d meeting ``region`` in a solid.

    The stripe blocks sit against a cut of Delta_d; hosting them in the
    ambient cells keeps every cell a cube, a Sigma block or a corner.
    """
    inside = set(lattice_points(region))
    full = build_standard_subdivision(d)
    keep = [
        (c, f)
        for c, f in zip(full.cells, full.lift)
        if len(c.points & inside) >= 4 and affine_dimension(list(c.points & inside)) == 3
    ]
    return Subdivision(region, tuple(c for c, _ in keep), tuple(f for _, f in keep), name)


def build_block(name: str, params: dict | None = None) -> Subdivision:
    region = block_region(name, params)
    if name in _STRIPE_BLOCKS:
        return ambient_cells(region, _STRIPE_BLOCKS[name][0] + 7, name)
    label = name if name != "A" else f"A_{params['k']}^{params['family']}"
    return unit_grid_subdivision(region, label)


# ---------------------------------------------------------------- regularity


@dataclass
class RegularityReport:
    passed: bool
    reason: str = ""
    cell_index: int | None = None
    point: Point | None = None
    checked_pairs: int = 0

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "reason": self.reason,
            "cell_index": self.cell_index,
            "point": None if self.point is None else list(self.point),
            "checked_pairs": self.checked_pairs,
        }


def check_regularity(S: Subdivision) -> RegularityReport:
    """Exact check that the lift is a strictly convex certificate for ``S``.

    The lift is affine on each cell, so comparing each form against the
    heights at the vertices of the other cells suffices: a strict violation
    anywhere would show up at an extreme point of some cell.
    """
    if S.lift is None:
        raise MissingLift("subdivision has no lifting function")
    if len(S.lift) != len(S.cells):
        raise MissingLift("lift must assign one form per cell")
    height: dict[Point, int] = {}
    for ci, (cell, form) in enumerate(zip(S.cells, S.lift)):
        for p in sorted(cell.points):
            h = evaluate(form, p)
            if p in height and height[p] != h:
                return RegularityReport(False, "forms disagree on a shared face", ci, p)
            height.setdefault(p, h)
    verts = sorted({v for c in S.cells for v in c.vertices})
    V = np.array(verts, dtype=np.int64)
    H = np.array([height[v] for v in verts], dtype=np.int64)
    index = {v: i for i, v in enumerate(verts)}
    pairs = 0
    for ci, (cell, form) in enumerate(zip(S.cells, S.lift)):
        vals = V @ np.array(form[:3], dtype=np.int64) + form[3]
        mask = np.ones(len(verts), dtype=bool)
        for p in cell.points:
            if p in index:
                mask[index[p]] = False
        bad = np.nonzero(mask & (vals >= H))[0]
        pairs += int(mask.sum())
        if bad.size:
            return RegularityReport(False, "lift not strictly convex", ci, verts[int(bad[0])], pairs)
    return RegularityReport(True, "", None, None, pairs)
