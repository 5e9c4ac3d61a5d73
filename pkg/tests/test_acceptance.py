"""End-to-end acceptance checks, one test per criterion.

Each test records a one-line verdict that the terminal summary prints,
whether or not the assertions that follow it hold.
"""

import subprocess
import sys
import time
from itertools import combinations
from math import comb

import pytest

from ahtoric.certificates import (
    TETRA_KINDS,
    UnitKind,
    block_contribution,
    check_identities,
    expected_dimension,
    n_plus_one,
    verify_certificate,
)
from ahtoric.configs import block_certificate, even_base_config, odd_config
from ahtoric.degeneration import (
    BLOCK_NAMES,
    CellKind,
    build_block,
    build_layer,
    build_standard_subdivision,
    check_regularity,
)
from ahtoric.oracle import (
    CELL_VERTICES,
    SECOND_PRIME,
    RankProblem,
    ah_sweep,
    interpolation_rank,
    limit_projection_check,
    sweep_exceptions,
)
from ahtoric.packing import TETRA_ONLY, PackingProblem, max_contribution, solve
from ahtoric.geometry import affine_dimension
from conftest import ACCEPTANCE

pytestmark = pytest.mark.acceptance


def record(n, ok, detail):
    ACCEPTANCE[n] = (bool(ok), detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def _block_params(name):
    if name == "A":
        return [{"k": 2, "family": 10}, {"k": 2, "family": 12}]
    return [None]


def test_criterion_01_subdivision_counts():
    t0 = time.perf_counter()
    bad = []
    for d in range(1, 15):
        n = build_standard_subdivision(d).counts()
        got = (n[CellKind.CUBE], n[CellKind.CORNER_TETRA], n[CellKind.SIGMA])
        if got != (comb(d, 3), d * (d + 1) // 2, d * (d - 1) // 2):
            bad.append(d)
    dt = time.perf_counter() - t0
    record(1, not bad and dt < 5, f"d <= 14 counts, mismatches {bad}, {dt:.2f}s (< 5s)")


def test_criterion_02_regularity():
    fails = [d for d in range(1, 15) if not check_regularity(build_standard_subdivision(d)).passed]
    for name in BLOCK_NAMES:
        for params in _block_params(name):
            if not check_regularity(build_block(name, params)).passed:
                fails.append(name)
    S = build_standard_subdivision(8)
    lift = list(S.lift)
    lift[len(lift) // 3] = (0, 0, 0, 0)
    mutant_caught = not check_regularity(S.with_lift(lift)).passed
    record(2, not fails and mutant_caught, f"irregular {fails}, zeroed form rejected {mutant_caught}")


def test_criterion_03_odd_certificates():
    notes = []
    for d in (5, 7, 9, 11, 13):
        c = odd_config(d)
        r = verify_certificate(c)
        if not (r.passed and r.claimed_k == expected_dimension(d).n_d and not r.uncovered):
            notes.append(d)
        if any(t["uncovered"] for t in r.region_tallies.values()):
            notes.append(f"{d}:layer")
    recursion = all(n_plus_one(d) == n_plus_one(d - 2) + (d + 1) ** 2 // 4 for d in range(7, 14, 2))
    record(3, not notes and recursion, f"failing degrees {notes}, recursion holds {recursion}")


def test_criterion_04_even_bases():
    want = {6: (21, 0), 8: (41, 1), 10: (71, 2), 12: (113, 3)}
    got, slow = {}, []
    for d, (units, _) in want.items():
        t0 = time.perf_counter()
        r = verify_certificate(even_base_config(d))
        if time.perf_counter() - t0 > 60:
            slow.append(d)
        got[d] = (r.contributions if r.passed else None, len(r.uncovered))
    s18 = verify_certificate(even_base_config(8)).region_tallies["S1_8"]["uncovered"]
    ok = all(got[d][0] == want[d][0] for d in want) and got[6][1] == 0 and got[12][1] == 3 and s18 == 1
    ok = ok and 4 * got[8][0] - 1 == 163 and not slow
    record(4, ok, f"(units, uncovered) {got}, S1_8 leaves {s18}, over 60s {slow}")


CATALOG = {
    "gamma7": 6, "P7": 72, "C7": 128, "H9": 198, "P11": 156, "P13": 210,
    "Tstar7": 28, "Tstar9": 42, "Tstar11": 56, "B8": 49, "B10": 63, "B12": 77,
}


def test_criterion_05_block_table():
    off = {}
    for name, value in CATALOG.items():
        r = verify_certificate(block_certificate(name))
        if not r.passed or r.contributions != value or block_contribution(name) != value:
            off[name] = r.contributions
    for fam, value in ((10, 276), (12, 362)):
        r = verify_certificate(block_certificate("A", {"k": 2, "family": fam}))
        if not r.passed or r.contributions != value:
            off[f"A^{fam}"] = r.contributions
    record(5, not off, f"{len(CATALOG) + 2} blocks, mismatches {off}")


def test_criterion_06_identities():
    rep = check_identities(40)
    spots = {22: 405, 26: 581, 34: 1029, 28: 681, 36: 1161, 40: 1449}
    seen = {d: rep.line(d).formula for d in spots}
    flag = rep.line(24)
    ok = rep.passed and seen == spots and flag.flagged and (flag.formula, flag.required) == (777, 489)
    record(6, ok, f"spot values {seen}, d=24 flagged {flag.flagged} ({flag.formula} vs {flag.required})")


def test_criterion_07_oracle_agreement():
    t0 = time.perf_counter()
    defective = []
    cases = 0
    for d in range(5, 11):
        for k in range(expected_dimension(d).n_d + 1):
            cases += 1
            if interpolation_rank(RankProblem(3, d, k, trials=4)).defect:
                defective.append((d, k))
    square = interpolation_rank(RankProblem(3, 5, 13)).rank
    dt = time.perf_counter() - t0
    record(7, not defective and square == 56 and dt < 600,
           f"{cases} cases, defective {defective}, (3,5,13) rank {square}, {dt:.1f}s (< 600s)")


def test_criterion_08_exception_table():
    want = {
        (3, 8): {(2, 2), (2, 3), (4, 9)},
        (2, 5): {(2, 2), (4, 5)},
        (4, 4): {(2, 2), (2, 3), (2, 4), (3, 7), (4, 14)},
    }
    ok, found = True, {}
    for (n, dmax), expected in want.items():
        a, b = ah_sweep(n, dmax), ah_sweep(n, dmax, prime=SECOND_PRIME)
        found[n] = sorted(sweep_exceptions(a))
        stable = [(x.d, x.k, x.defect) for x in a] == [(x.d, x.k, x.defect) for x in b]
        ok = ok and sweep_exceptions(a) == expected and stable
    record(8, ok, f"(d, points) exceptions {found}, stable across primes {ok}")


def test_criterion_09_limit_preconditions():
    failures, counts = [], {}
    for kind, rank in (("Cube", 8), ("SigmaBlock", 7), ("Semicube", 6)):
        verts = CELL_VERTICES[kind]
        quads = [q for q in combinations(verts, 4) if affine_dimension(q) == 3]
        counts[kind] = len(quads)
        for q in quads:
            res = limit_projection_check(kind, q, trials=8)
            if not (res.passed and res.target_rank == rank):
                failures.append((kind, q))
    record(9, not failures, f"tetrahedra checked {counts}, failures {len(failures)}")


def test_criterion_10_packing_regeneration():
    T = UnitKind.TANGENT
    runs = {
        "Delta6": (build_standard_subdivision(6), TETRA_ONLY, 21, 0),
        "S1_8": (build_layer(8), {T}, 20, 1),
        "S1_10": (build_layer(10), TETRA_KINDS, 30, 1),
        "gamma7": (build_block("gamma7"), TETRA_ONLY, 6, 0),
    }
    got = {}
    for name, (S, kinds, target, slack) in runs.items():
        sol = solve(PackingProblem(S, frozenset(kinds), target, slack))
        got[name] = (sol.contribution, len(sol.uncovered))
        assert verify_certificate(sol.certificate(S)).passed
    g = max_contribution(build_block("gamma7"), TETRA_ONLY)
    c = max_contribution(_cube(), TETRA_ONLY)
    ok = all(got[n][0] == runs[n][2] for n in runs) and got["S1_8"][1] <= 1
    ok = ok and g.exact and g.value == 6 and c.exact and c.value == 2
    record(10, ok, f"(contribution, uncovered) {got}, optimum gamma7 {g.value}, cube {c.value}")


def _cube():
    from ahtoric.degeneration import unit_grid_subdivision
    from ahtoric.geometry import box

    return unit_grid_subdivision(box((0, 0, 0), (1, 1, 1)))


def _sweep():
    t0 = time.perf_counter()
    p = subprocess.run(
        [sys.executable, "-m", "ahtoric.cli", "sweep", "--dmax", "22"],
        capture_output=True,
        timeout=1800,
    )
    return p, time.perf_counter() - t0


@pytest.mark.slow
def test_criterion_11_end_to_end():
    first, t1 = _sweep()
    second, t2 = _sweep()
    stable = first.stdout == second.stdout
    ok = first.returncode == 0 and second.returncode == 0 and stable and max(t1, t2) < 900
    record(11, ok, f"exit {first.returncode}/{second.returncode}, byte-stable {stable}, {t1:.0f}s and {t2:.0f}s (< 900s)")
