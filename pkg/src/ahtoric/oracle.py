"""Finite-field rank computations: double-point interpolation and toric tangent spans.

A rank found for one random sample over F_p is a lower bound for the generic
rank, so full-rank outcomes are proofs; deficient outcomes are only observations.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from math import comb
from typing import Sequence

import numpy as np

from .geometry import Point, affine_dimension

DEFAULT_PRIME = 1_000_003
SECOND_PRIME = 2_147_483_647
DEFAULT_SEED = 42
DEFAULT_TRIALS = 4
MATRIX_CEILING = 3000
MAX_RESAMPLES = 16

# Classical defective Veronese cases, as (n, d, number of double points)
EXCEPTIONS_N_ANY_D2 = "d=2, 2..n points"
EXCEPTION_ROWS = ((2, 4, 5), (3, 4, 9), (4, 4, 14), (4, 3, 7))


class CeilingExceeded(ValueError):
    pass


def exceptional_points(n: int, d: int) -> set[int]:
    """Point counts for which L_{n,d}(2^m) is special."""
    out = set(range(2, n + 1)) if d == 2 else set()
    out |= {m for nn, dd, m in EXCEPTION_ROWS if (nn, dd) == (n, d)}
    return out


def rank_mod_p(A: np.ndarray, p: int) -> int:
    return prefix_ranks(A, p)[-1] if len(A) else 0


def prefix_ranks(A: np.ndarray, p: int) -> list[int]:
    """Rank of the first i+1 rows, for every i, over F_p."""
    A = np.array(A, dtype=np.int64) % p
    m = A.shape[0]
    out = []
    r = 0
    for i in range(m):
        nz = np.nonzero(A[i])[0]
        if nz.size:
            c = int(nz[0])
            inv = pow(int(A[i, c]), -1, p)
            A[i] = (A[i] * inv) % p
            if i + 1 < m:
                f = A[i + 1 :, c].copy()
                A[i + 1 :] = (A[i + 1 :] - (f[:, None] * A[i][None, :]) % p) % p
            r += 1
        out.append(r)
    return out


def degrevlex_exponents(n: int, d: int) -> list[tuple[int, ...]]:
    """Degree-d exponent vectors in n+1 variables, degrevlex order."""
    exps = [e for e in itertools.product(range(d + 1), repeat=n + 1) if sum(e) == d]

    def key(e):
        # degrevlex: larger power of the last variable sorts later
        return tuple(-c for c in reversed(e))

    return sorted(exps, key=key, reverse=True)


def _powers(x: np.ndarray, top: int, p: int) -> np.ndarray:
    out = np.ones((len(x), top + 1), dtype=np.int64)
    for j in range(1, top + 1):
        out[:, j] = (out[:, j - 1] * x) % p
    return out


def interpolation_matrix(n: int, d: int, pts: np.ndarray, p: int) -> np.ndarray:
    """Rows: the n+1 homogeneous partials of every degree-d monomial at each point.

    ``pts`` holds affine coordinates (x_1..x_n), x_0 = 1.
    """
    exps = np.array(degrevlex_exponents(n, d), dtype=np.int64)
    k1 = len(pts)
    hom = np.concatenate([np.ones((k1, 1), dtype=np.int64), pts % p], axis=1)
    pw = [_powers(hom[:, i], d, p) for i in range(n + 1)]
    M = np.zeros((k1 * (n + 1), len(exps)), dtype=np.int64)
    for a in range(n + 1):
        red = exps.copy()
        red[:, a] -= 1
        coeff = exps[:, a] % p
        valid = red[:, a] >= 0
        red[~valid, a] = 0
        val = np.ones((k1, len(exps)), dtype=np.int64)
        for i in range(n + 1):
            val = (val * pw[i][:, red[:, i]]) % p
        val = (val * coeff[None, :]) % p
        val[:, ~valid] = 0
        M[a::n + 1] = val
    return M


@dataclass(frozen=True)
class RankProblem:
    n: int
    d: int
    k: int
    prime: int = DEFAULT_PRIME
    seed: int = DEFAULT_SEED
    trials: int = DEFAULT_TRIALS

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.prime <= 2 * comb(self.n + self.d, self.d):
            raise ValueError("prime too small for the genericity margin")
        if self.k < 0:
            raise ValueError("secant index must be >= 0")

    @property
    def columns(self) -> int:
        return comb(self.n + self.d, self.n)

    @property
    def rows(self) -> int:
        return (self.n + 1) * (self.k + 1)

    @property
    def expected(self) -> int:
        return min(self.rows, self.columns)


@dataclass
class RankResult:
    n: int
    d: int
    k: int
    prime: int
    seed: int
    rank: int
    expected: int
    defect: int
    trials: int
    trial_ranks: list[int] = field(default_factory=list)
    resampled: int = 0

    def to_json(self) -> dict:
        return asdict(self)


def _sample_points(rng: np.random.Generator, count: int, n: int, p: int) -> tuple[np.ndarray, int]:
    resampled = 0
    while True:
        pts = rng.integers(0, p, size=(count, n), dtype=np.int64)
        if len({tuple(r) for r in pts.tolist()}) == count:
            return pts, resampled
        resampled += 1
        if resampled > MAX_RESAMPLES:
            raise RuntimeError("could not draw distinct sample points")


def interpolation_prefix_ranks(
    n: int, d: int, kmax: int, prime: int = DEFAULT_PRIME, seed: int = DEFAULT_SEED, trials: int = DEFAULT_TRIALS
) -> tuple[list[int], list[list[int]], int]:
    """Max-over-trials rank for every secant index 0..kmax from one sample per trial."""
    rng = np.random.default_rng(seed)
    per_trial = []
    resampled = 0
    for _ in range(trials):
        pts, r = _sample_points(rng, kmax + 1, n, prime)
        resampled += r
        pr = prefix_ranks(interpolation_matrix(n, d, pts, prime), prime)
        per_trial.append([pr[(n + 1) * (k + 1) - 1] for k in range(kmax + 1)])
    best = [max(t[k] for t in per_trial) for k in range(kmax + 1)]
    return best, per_trial, resampled


def interpolation_rank(problem: RankProblem) -> RankResult:
    if problem.columns > MATRIX_CEILING:
        raise CeilingExceeded(f"{problem.columns} columns exceed ceiling {MATRIX_CEILING}")
    best, per_trial, resampled = interpolation_prefix_ranks(
        problem.n, problem.d, problem.k, problem.prime, problem.seed, problem.trials
    )
    rank = best[problem.k]
    return RankResult(
        problem.n,
        problem.d,
        problem.k,
        problem.prime,
        problem.seed,
        rank,
        problem.expected,
        problem.expected - rank,
        problem.trials,
        [t[problem.k] for t in per_trial],
        resampled,
    )


@dataclass
class SweepRow:
    n: int
    d: int
    k: int
    points: int
    rank: int
    expected: int
    defect: int


def ah_sweep(
    n: int,
    d_max: int,
    prime: int = DEFAULT_PRIME,
    seed: int = DEFAULT_SEED,
    trials: int = DEFAULT_TRIALS,
    ceiling: int = MATRIX_CEILING,
) -> list[SweepRow]:
    """Defects of V_{n,d} for d <= d_max and every secant index up to ceil(N+1 / n+1)."""
    if not 1 <= n <= 4:
        raise ValueError("n must be in 1..4")
    rows = []
    for d in range(1, d_max + 1):
        cols = comb(n + d, n)
        if cols > ceiling:
            raise CeilingExceeded(f"V_{n},{d} needs {cols} columns")
        kmax = -(-cols // (n + 1))
        best, _, _ = interpolation_prefix_ranks(n, d, kmax, prime, seed, trials)
        for k in range(kmax + 1):
            exp = min((n + 1) * (k + 1), cols)
            rows.append(SweepRow(n, d, k, k + 1, best[k], exp, exp - best[k]))
    return rows


def sweep_exceptions(rows: Sequence[SweepRow]) -> set[tuple[int, int]]:
    """Nonzero-defect cells as (d, number of double points)."""
    return {(r.d, r.points) for r in rows if r.defect > 0}


def expected_exceptions(n: int, d_max: int) -> set[tuple[int, int]]:
    out = set()
    for d in range(1, d_max + 1):
        kmax = -(-comb(n + d, n) // (n + 1))
        out |= {(d, m) for m in exceptional_points(n, d) if m <= kmax + 1}
    return out


# ---------------------------------------------------------------- toric models


@dataclass(frozen=True)
class ToricModel:
    lattice_points: tuple[Point, ...]

    def __post_init__(self):
        if len(set(self.lattice_points)) != len(self.lattice_points):
            raise ValueError("lattice points must be distinct")

    @property
    def ambient_dim(self) -> int:
        return len(self.lattice_points) - 1


def tangent_rows(model: ToricModel, t: Sequence[int], p: int) -> np.ndarray:
    """Value and the three log-partials of the monomial map at a torus point."""
    E = np.array(model.lattice_points, dtype=np.int64)
    shift = E.min(axis=0)
    E = E - shift
    vals = np.ones(len(E), dtype=np.int64)
    for i in range(3):
        pw = _powers(np.array([t[i] % p], dtype=np.int64), int(E[:, i].max()), p)[0]
        vals = (vals * pw[E[:, i]]) % p
    rows = [vals]
    for i in range(3):
        rows.append((vals * ((E[:, i] + shift[i]) % p)) % p)
    return np.array(rows, dtype=np.int64)


def _torus_points(rng: np.random.Generator, count: int, p: int) -> np.ndarray:
    return rng.integers(1, p, size=(count, 3), dtype=np.int64)


def toric_tangent_span(
    model: ToricModel, points: Sequence[Sequence[int]], prime: int = DEFAULT_PRIME
) -> int:
    M = np.concatenate([tangent_rows(model, t, prime) for t in points], axis=0)
    return rank_mod_p(M, prime)


def random_tangent_span(
    model: ToricModel, count: int, prime: int = DEFAULT_PRIME, seed: int = DEFAULT_SEED
) -> int:
    rng = np.random.default_rng(seed)
    return toric_tangent_span(model, _torus_points(rng, count, prime).tolist(), prime)


def segre_corner_tangent(corner: Point) -> frozenset[Point]:
    """Coordinates spanned by the tangent space of (P^1)^3 at the torus-fixed
    point of ``corner``, from the exponents of the local chart at that point."""
    support = set()
    for m in itertools.product((0, 1), repeat=3):
        local = tuple(abs(a - b) for a, b in zip(m, corner))
        # value at the origin of the chart, then the three first partials
        if sum(local) == 0 or sum(local) == 1:
            support.add(m)
    return frozenset(support)


def segre_corner_tangent_check() -> bool:
    for c in itertools.product((0, 1), repeat=3):
        nbrs = {tuple(c[j] ^ (j == i) for j in range(3)) for i in range(3)}
        if segre_corner_tangent(c) != frozenset({c} | nbrs):
            return False
    return True


# ---------------------------------------------------------------- limit tetrahedra

CELL_VERTICES: dict[str, tuple[Point, ...]] = {
    "Cube": tuple(itertools.product((0, 1), repeat=3)),
    "SigmaBlock": tuple(c for c in itertools.product((0, 1), repeat=3) if c != (1, 1, 1)),
    "Semicube": tuple(c for c in itertools.product((0, 1), repeat=3) if c[:2] != (1, 1)),
}


@dataclass
class LimitCheck:
    passed: bool
    full_rank_trials: int
    trials: int
    target_rank: int


def limit_projection_check(
    cell_kind: str,
    tetra: Sequence[Point],
    prime: int = DEFAULT_PRIME,
    seed: int = DEFAULT_SEED,
    trials: int = 8,
    cell_vertices: Sequence[Point] | None = None,
) -> LimitCheck:
    """Does a general tangent P^3 of the cell's toric variety miss the centre
    spanned by the cell vertices off ``tetra``?"""
    verts = tuple(sorted(cell_vertices if cell_vertices is not None else CELL_VERTICES[cell_kind]))
    tetra = tuple(sorted(tuple(v) for v in tetra))
    if len(set(tetra)) != 4 or not set(tetra) <= set(verts) or affine_dimension(tetra) != 3:
        raise ValueError("tetrahedron is not legal in this cell")
    centre = [v for v in verts if v not in tetra]
    model = ToricModel(verts)
    E = np.zeros((len(centre), len(verts)), dtype=np.int64)
    for r, c in enumerate(centre):
        E[r, verts.index(c)] = 1
    rng = np.random.default_rng(seed)
    target = 4 + len(centre)
    ok = 0
    for t in _torus_points(rng, trials, prime).tolist():
        M = np.concatenate([tangent_rows(model, t, prime), E], axis=0)
        ok += rank_mod_p(M, prime) == target
    return LimitCheck(ok > 0, ok, trials, target)


@lru_cache(maxsize=None)
def limit_precondition(cell_vertices: tuple[Point, ...], tetra: tuple[Point, ...]) -> bool:
    """Cached ledger entry: cell and tetra in cell-local coordinates."""
    return limit_projection_check("Custom", tetra, cell_vertices=cell_vertices).passed


# ---------------------------------------------------------------- blocks


@dataclass
class BlockCheck:
    name: str
    claimed: int
    points: int
    oracle_rank: int | None
    agree: bool | None
    status: str


def certify_block_defectivity(
    name: str,
    params: dict | None = None,
    prime: int = DEFAULT_PRIME,
    seed: int = DEFAULT_SEED,
    ceiling: int = MATRIX_CEILING,
) -> BlockCheck:
    """Tangent spaces at ``block_contribution`` random points of the block's toric model."""
    from .certificates import block_contribution
    from .degeneration import build_block, build_layer

    if name.startswith("S1_"):
        k = int(name[3:])
        pts, claimed = build_layer(k).points, (k + 1) ** 2 // 4
    else:
        pts, claimed = build_block(name, params).points, block_contribution(name, params)
    if len(pts) > ceiling:
        return BlockCheck(name, claimed, len(pts), None, None, "oracle-skipped")
    r = random_tangent_span(ToricModel(tuple(pts)), claimed, prime, seed)
    agree = r == 4 * claimed
    return BlockCheck(name, claimed, len(pts), r, agree, "agree" if agree else "disagree")
