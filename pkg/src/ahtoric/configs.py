"""Concrete certificates: odd layers, the even bases, the S^7 recursion and the blocks."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from typing import Iterable, Sequence

from .certificates import (
    Certificate,
    Region,
    Unit,
    UnitKind,
    expected_dimension,
    is_corner_tetra,
)
from .degeneration import (
    CellKind,
    Subdivision,
    build_block,
    build_layer,
    build_standard_subdivision,
)
from .geometry import Point
from .packing import TETRA_ONLY, PackingProblem, solve

VertexSet = frozenset[Point]
_LIMIT_FOR_CELL = {
    CellKind.CUBE: UnitKind.LIMIT_CUBE,
    CellKind.SIGMA: UnitKind.LIMIT_SIGMA,
    CellKind.SEMICUBE: UnitKind.LIMIT_SEMICUBE,
}


class ConfigError(ValueError):
    pass


@lru_cache(maxsize=None)
def standard(d: int) -> Subdivision:
    return build_standard_subdivision(d)


_INDEX: dict[int, tuple[Subdivision, dict[Point, int]]] = {}


def _anchor_index(S: Subdivision) -> dict[Point, int]:
    hit = _INDEX.get(id(S))
    if hit is None or hit[0] is not S:
        hit = _INDEX[id(S)] = (S, {c.anchor: i for i, c in enumerate(S.cells)})
    return hit[1]


def rehost(vs: VertexSet, host: Subdivision) -> Unit:
    """Read a vertex set as a unit of the cell it sits in."""
    anchor = tuple(min(p[i] for p in vs) for i in range(3))
    idx = _anchor_index(host).get(anchor)
    if idx is None:
        raise ConfigError(f"no host cell at {anchor}")
    cell = host.cells[idx]
    if len(vs) == 8:
        return Unit(UnitKind.CUBE_PAIR, idx, vs)
    if is_corner_tetra(vs) and cell.kind is not CellKind.CUSTOM:
        return Unit(UnitKind.TANGENT, idx, vs)
    kind = _LIMIT_FOR_CELL.get(cell.kind)
    if kind is None:
        raise ConfigError(f"{sorted(vs)} is not a legal unit of a {cell.kind.value} cell")
    return Unit(kind, idx, vs)


def shift(sets: Iterable[VertexSet], v: Sequence[int]) -> list[VertexSet]:
    return [frozenset(tuple(a + b for a, b in zip(p, v)) for p in s) for s in sets]


def assemble(
    host: Subdivision,
    parts: Sequence[tuple[str, Sequence[VertexSet], Iterable[Point]]],
    d: int | None = None,
    provenance: dict | None = None,
) -> Certificate:
    units: list[Unit] = []
    regions = []
    for label, sets, pts in parts:
        units.extend(rehost(s, host) for s in sets)
        regions.append(Region(label, frozenset(pts)))
    total = sum(u.contribution for u in units)
    return Certificate(host, tuple(units), total - 1, d, tuple(regions), dict(provenance or {}))


def vertex_sets(c: Certificate) -> list[VertexSet]:
    return [u.vertex_set for u in c.units]


# ---------------------------------------------------------------- odd degrees


def odd_layer_sets(k: int) -> list[VertexSet]:
    """Cubes on the even grid plus one corner tetrahedron per cut block."""
    if k < 3 or k % 2 == 0:
        raise ConfigError("odd layers need odd k >= 3")
    out = []
    for a in range(0, k, 2):
        for b in range(0, k - a, 2):
            if a + b + 3 <= k:
                out.append(frozenset((a + x, b + y, z) for x in (0, 1) for y in (0, 1) for z in (0, 1)))
            elif a + b == k - 1:
                out.append(frozenset({(a, b, 0), (a + 1, b, 0), (a, b + 1, 0), (a, b, 1)}))
    return out


def odd_layer_config(k: int) -> Certificate:
    S = build_layer(k)
    return assemble(S, [(f"S1_{k}", odd_layer_sets(k), S.points)], provenance={"builder": "odd_layer"})


def _layer_points(k: int, z0: int) -> list[Point]:
    return [(x, y, z0 + z) for z in (0, 1) for x in range(k + 1) for y in range(k + 1 - x - z)]


def odd_config(d: int) -> Certificate:
    if d < 5 or d % 2 == 0:
        raise ConfigError("odd_config needs odd d >= 5")
    parts = []
    for k in range(d, 2, -2):
        z0 = d - k
        parts.append((f"S1_{k}", shift(odd_layer_sets(k), (0, 0, z0)), _layer_points(k, z0)))
    apex = frozenset({(0, 0, d - 1), (1, 0, d - 1), (0, 1, d - 1), (0, 0, d)})
    parts.append(("Delta_1", [apex], apex))
    return assemble(standard(d), parts, d, {"builder": "odd"})


# ---------------------------------------------------------------- packing helpers


@lru_cache(maxsize=None)
def _packed(key: str) -> tuple[VertexSet, ...]:
    """Deterministic packings that the even configurations are glued from."""
    kind, _, arg = key.partition(":")
    if kind == "D6":
        S, target, mu, kinds, pts = standard(6), 21, 0, TETRA_ONLY, None
    elif kind == "layer":
        k = int(arg)
        S, target, mu, pts = build_layer(k), (len(_layer_points(k, 0)) - 1) // 4, 1, None
        kinds = frozenset({UnitKind.TANGENT}) if k == 8 else TETRA_ONLY
    elif kind == "gamma7":
        S, target, mu, kinds, pts = build_block("gamma7"), 6, 0, TETRA_ONLY, None
    elif kind == "chunk":
        name = arg
        x_lo, x_hi, s0 = CHUNKS[name]
        pts = frozenset(stripe_points(s0, x_lo, x_hi))
        S, target, mu, kinds = standard(s0 + 7), len(pts) // 4, 0, TETRA_ONLY
    else:
        raise ConfigError(f"unknown packing {key!r}")
    sol = solve(PackingProblem(S, kinds, target, mu, pts))
    return tuple(u.vertex_set for u in sol.units)


def d6_sets() -> list[VertexSet]:
    return list(_packed("D6"))


def layer_sets(k: int) -> list[VertexSet]:
    return list(_packed(f"layer:{k}"))


def gamma7_sets() -> list[VertexSet]:
    return list(_packed("gamma7"))


# ---------------------------------------------------------------- even bases


def _delta_points(n: int, v: Sequence[int] = (0, 0, 0)) -> list[Point]:
    return [
        (x + v[0], y + v[1], z + v[2])
        for x in range(n + 1)
        for y in range(n + 1 - x)
        for z in range(n + 1 - x - y)
    ]


def _base_parts(d: int) -> list[tuple[str, list[VertexSet], list[Point]]]:
    if d == 6:
        return [("Delta_6", d6_sets(), _delta_points(6))]
    if d == 8:
        lower = [(l, shift(s, (0, 0, 2)), [(p[0], p[1], p[2] + 2) for p in pts]) for l, s, pts in _base_parts(6)]
        return lower + [("S1_8", layer_sets(8), _layer_points(8, 0))]
    if d == 10:
        lower = [(l, shift(s, (0, 0, 2)), [(p[0], p[1], p[2] + 2) for p in pts]) for l, s, pts in _base_parts(8)]
        return lower + [("S1_10", layer_sets(10), _layer_points(10, 0))]
    if d == 12:
        lower = [(l, shift(s, (0, 0, 4)), [(p[0], p[1], p[2] + 4) for p in pts]) for l, s, pts in _base_parts(8)]
        return lower + [
            ("S1_10", shift(layer_sets(10), (0, 0, 2)), _layer_points(10, 2)),
            ("S1_12", layer_sets(12), _layer_points(12, 0)),
        ]
    raise ConfigError("even bases exist for d in {6, 8, 10, 12}")


def even_base_config(d: int) -> Certificate:
    return assemble(standard(d), _base_parts(d), d, {"builder": "even_base"})


# ---------------------------------------------------------------- S^7 recursion

# chunk name -> (x_lo, x_hi, s of the frame it is solved in)
CHUNKS = {
    "T5T6_head": (1, 7, 7),
    "Tstar7": (1, 6, 9),
    "Tstar9": (1, 8, 11),
    "Tstar11": (1, 10, 13),
    "Delta6_slot": (7, 9, 9),
    "T5T6_slot": (7, 11, 11),
}


def stripe_points(s: int, x_lo: int, x_hi: int) -> list[Point]:
    """Points of {x, y <= s, x + y >= s + 1, x + y + z <= s + 7} with x_lo <= x <= x_hi."""
    return [
        (x, y, z)
        for x in range(x_lo, x_hi + 1)
        for y in range(max(0, s + 1 - x), s + 1)
        for z in range(s + 8 - x - y)
    ]


def stripe_layout(d: int) -> list[str]:
    s = d - 7
    r = d % 8
    if r == 6:
        head = ["T5T6_head"]
    else:
        head = [{0: "Tstar7", 2: "Tstar9", 4: "Tstar11"}[r], "Delta6_slot"]
    width = sum(CHUNKS[c][1] - CHUNKS[c][0] + 1 for c in head)
    reps, rem = divmod(s - width, 8)
    if rem:
        raise ConfigError(f"stripe of d={d} does not tile")
    return head + ["T5T6_slot", "Delta6_slot"] * reps


def column_sets(cells: Iterable[tuple[int, int]], columns: Iterable[tuple[int, int, str]]) -> list[VertexSet]:
    """Height-7 columns over 2x2 point blocks: four cubes, or a gamma_7 when cut."""
    out: list[VertexSet] = []
    g = gamma7_sets()
    for a, b, shape in columns:
        if shape == "square":
            for c in range(0, 8, 2):
                out.append(frozenset((a + x, b + y, c + z) for x in (0, 1) for y in (0, 1) for z in (0, 1)))
        else:
            out.extend(shift(g, (a, b, 0)))
    return out


def prism_columns(xy: Iterable[tuple[int, int]]) -> list[tuple[int, int, str]]:
    """Classify the even-aligned 2x2 blocks of a planar point set."""
    xy = set(xy)
    cols = []
    for a, b in sorted({(x - x % 2, y - y % 2) for x, y in xy}):
        block = {(a + i, b + j) for i in (0, 1) for j in (0, 1)} & xy
        if len(block) == 4:
            cols.append((a, b, "square"))
        elif block == {(a, b), (a + 1, b), (a, b + 1)}:
            cols.append((a, b, "gamma7"))
        else:
            raise ConfigError(f"block at {(a, b)} is neither a square nor a gamma_7 triangle")
    return cols


def prism_parts(s: int, height: int = 7) -> tuple[list[VertexSet], list[Point]]:
    xy = [(x, y) for x in range(s + 1) for y in range(s + 1 - x)]
    sets = column_sets((), prism_columns(xy))
    return sets, [(x, y, z) for x, y in xy for z in range(height + 1)]


def stripe_parts(d: int) -> list[tuple[str, list[VertexSet], list[Point]]]:
    s = d - 7
    parts = []
    x = 1
    for name in stripe_layout(d):
        x_lo, x_hi, s0 = CHUNKS[name]
        t = x - x_lo
        v = (t, (s - s0) - t, 0)
        parts.append((f"{name}@x{x}", shift(_packed(f"chunk:{name}"), v), stripe_points(s, x, x + x_hi - x_lo)))
        x += x_hi - x_lo + 1
    return parts


def layer7_parts(d: int) -> list[tuple[str, list[VertexSet], list[Point]]]:
    s = d - 7
    prism, prism_pts = prism_parts(s)
    parts = [(f"P_{s}", prism, prism_pts)]
    for label, v in (("Delta6_y", (0, s + 1, 0)), ("Delta6_x", (s + 1, 0, 0))):
        parts.append((label, shift(d6_sets(), v), _delta_points(6, v)))
    return parts + stripe_parts(d)


def _even_parts(d: int) -> list[tuple[str, list[VertexSet], list[Point]]]:
    if d in (6, 8, 10, 12):
        return _base_parts(d)
    lower = [
        (f"{l}^{d - 8}" if "^" not in l else l, shift(sets, (0, 0, 8)), [(p[0], p[1], p[2] + 8) for p in pts])
        for l, sets, pts in _even_parts(d - 8)
    ]
    return lower + [(f"{l}^{d}", sets, pts) for l, sets, pts in layer7_parts(d)]


def recursive_config(d: int) -> Certificate:
    if d < 14 or d % 2:
        raise ConfigError("recursive_config needs even d >= 14")
    return assemble(standard(d), _even_parts(d), d, {"builder": "recursive"})


def build_certificate(d: int) -> Certificate:
    """The certificate for n_d, built from scratch."""
    if d < 5:
        raise ConfigError("d >= 5 required; d <= 4 cases are classical")
    if d % 2:
        return odd_config(d)
    if d <= 12:
        return even_base_config(d)
    return recursive_config(d)


# ---------------------------------------------------------------- blocks


def _block_parts(name: str, params: dict | None, S: Subdivision) -> list:
    pts = S.points
    if name == "Delta1":
        return [(name, [frozenset(pts)], pts)]
    if name == "cube":
        return [(name, [frozenset(pts)], pts)]
    if name == "gamma7":
        return [(name, gamma7_sets(), pts)]
    if name in ("Delta6", "T6"):
        return [(name, d6_sets(), pts)]
    if name == "T5":
        return [(name, vertex_sets(odd_config(5)), pts)]
    if name in ("P7", "P9", "P11", "P13", "C7", "H9", "A"):
        xy = sorted({(p[0], p[1]) for p in pts})
        return [(name, column_sets((), prism_columns(xy)), pts)]
    if name == "Xi":
        prism, prism_pts = prism_parts(7)
        rest = frozenset(pts) - frozenset(prism_pts)
        sol = solve(PackingProblem(S, TETRA_ONLY, len(rest) // 4, 0, rest))
        return [("P_7", prism, prism_pts), ("T5+T6", [u.vertex_set for u in sol.units], rest)]
    sol = solve(PackingProblem(S, TETRA_ONLY, len(pts) // 4, len(pts) % 4))
    return [(name, [u.vertex_set for u in sol.units], pts)]


def block_certificate(name: str, params: dict | None = None) -> Certificate:
    S = build_block(name, params)
    return assemble(S, _block_parts(name, params, S), provenance={"block": name, **(params or {})})


# ---------------------------------------------------------------- golden files


def certificate_json(c: Certificate) -> str:
    return json.dumps(c.to_json(), sort_keys=True, separators=(",", ":")) + "\n"


def golden_path(d: int):
    return resources.files("ahtoric") / "data" / f"cert_d{d:02d}.json"


def load_certificate(d: int) -> Certificate | None:
    """The shipped certificate for ``d``, or ``None`` when none is shipped."""
    from .certificates import units_from_json

    p = golden_path(d)
    if not p.is_file():
        return None
    data = json.loads(p.read_text())
    host = standard(d)
    return Certificate(host, units_from_json(data, host), int(data["claimed_k"]), d, (), data.get("provenance", {}))


def expected_units(d: int) -> int:
    return expected_dimension(d).n_d + 1
