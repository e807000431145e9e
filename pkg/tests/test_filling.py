import itertools

import pytest
from gmpy2 import mpq

from cofill.cayley import build_ball, enumerate_relations
from cofill.errors import NotACycleError
from cofill.filling import (
    FillInfeasibleError,
    _branch_and_bound,
    ball_cells,
    cof,
    decompose_cycle,
    dehn_ab,
    dual_norm_check,
    fill_int,
    fill_real,
    stable_fill,
)
from cofill.foxcalc import GroupRingVec, boundary2, cycle_of_relation
from cofill.presentation import free_reduce, invert
from cofill.ratlp import LE, LPProblem, LPRow, OPTIMAL, solve_lp


# --- independent oracles ----------------------------------------------------


def winding_counts(word):
    """Winding number of each unit cell for a closed Z^2 lattice walk.

    Ray-casting: cell (i, j) counts signed crossings of vertical segments at
    x <= i across the horizontal line y = j + 1/2.  Independent of the ball
    and LP machinery; calibrated so the commutator square winds +1.
    """
    x = y = 0
    vertical = []  # (x, lower y, direction)
    xs, ys = [0], [0]
    for let in word:
        if abs(let) == 1:
            x += 1 if let > 0 else -1
        else:
            y0 = y
            y += 1 if let > 0 else -1
            vertical.append((x, min(y0, y), 1 if let > 0 else -1))
        xs.append(x)
        ys.append(y)
    assert x == 0 and y == 0, "not a closed walk"
    counts = {}
    for i in range(min(xs) - 1, max(xs) + 1):
        for j in range(min(ys) - 1, max(ys) + 1):
            w = sum(d for (vx, vy, d) in vertical if vx > i and vy == j)
            if w:
                counts[(i, j)] = w
    return counts


def winding_area(word):
    return sum(abs(v) for v in winding_counts(word).values())


def brute_force_integer_fill(z, ball, max_total):
    """Smallest sum|tau| over integer certificates with sum|tau| <= max_total,
    by direct enumeration; None if none exists in that range."""
    cells = ball_cells(ball)
    cycles = cells.cycles
    n = len(cycles)

    def search(budget, start, acc):
        if acc == z:
            return 0
        if budget == 0:
            return None
        for k in range(start, n):
            for s in (1, -1):
                cand = search(budget - 1, k, acc + cycles[k].scale(mpq(s)))
                if cand is not None:
                    return cand + 1
        return None

    for total in range(max_total + 1):
        used = search(total, 0, GroupRingVec())
        if used is not None:
            return total
    return None


def test_winding_oracle_calibration():
    assert winding_counts((1, 2, -1, -2)) == {(0, 0): 1}
    assert winding_counts((2, 1, -2, -1)) == {(0, 0): -1}
    assert winding_area((1, 1, 2, 2, -1, -1, -2, -2)) == 4


# --- fill_real / fill_int ---------------------------------------------------


def test_fill_real_commutator(z2_ball4):
    ball = z2_ball4
    z = cycle_of_relation((1, 2, -1, -2), 0, ball)
    report = fill_real(z, ball)
    assert report.value == 1
    assert report.certificate.terms == ((mpq(1), 0, 0),)
    assert report.truncated is False
    # independent oracle: no integer certificate of weight 0, one of weight 1
    assert brute_force_integer_fill(z, ball, 2) == 1


def test_fill_zero(z2_ball4):
    report = fill_real(GroupRingVec(), z2_ball4)
    assert report.value == 0 and report.certificate.terms == ()
    assert fill_int(GroupRingVec(), z2_ball4).value == 0


def test_fill_requires_cycle(z2_ball4):
    with pytest.raises(NotACycleError):
        fill_real(GroupRingVec({(0, 0): mpq(1)}), z2_ball4)


def test_fill_real_matches_winding_for_all_small_relations(z2_ball4):
    ball = z2_ball4
    pres = ball.presentation
    for w in enumerate_relations(ball, 8):
        z = cycle_of_relation(w, 0, ball)
        report = fill_real(z, ball, check_truncation=False)
        assert report.value == winding_area(w), pres.word_str(w)
        assert boundary2(report.certificate, ball) == z


def test_fill_real_k_squares(z2):
    pres, oracle = z2
    for k in (1, 2, 3):
        ball = build_ball(pres, oracle, 2 * k)
        w = pres.parse_word(f"a^{k} b^{k} a^-{k} b^-{k}")
        z = cycle_of_relation(w, 0, ball)
        assert fill_real(z, ball, check_truncation=False).value == k * k


def test_fill_int_examples(z2_ball4):
    ball = z2_ball4
    z = cycle_of_relation((1, 2, -1, -2), 0, ball)
    assert fill_int(z, ball).value == 1
    doubled = z.scale(mpq(2))
    report = fill_int(doubled, ball)
    assert report.value == 2
    assert brute_force_integer_fill(doubled, ball, 2) == 2
    with pytest.raises(ValueError):
        fill_int(z.scale(mpq(1, 2)), ball)


def test_fill_infeasible_with_verified_certificate():
    """The a^2 bigon in the Klein four-group graph is a cycle outside the
    span of the (ab)^2 relator cells: the fill must fail with an exact
    separating cochain."""
    from cofill.oracles import FiniteTableOracle
    from cofill.presentation import parse_presentation

    pres = parse_presentation("gens a b ; rels a b a b")
    table = [[i ^ j for j in range(4)] for i in range(4)]
    oracle = FiniteTableOracle(pres, table, [1, 2])
    ball = build_ball(pres, oracle, 2)
    z = cycle_of_relation((1, 1), 0, ball)
    with pytest.raises(FillInfeasibleError) as exc:
        fill_real(z, ball, check_truncation=False)
    assert exc.value.pairing != 0
    cells = ball_cells(ball)
    for cyc in cells.cycles:
        pairing = sum(exc.value.cochain.get(k, mpq(0)) * v
                      for k, v in cyc.entries.items())
        assert pairing == 0
    target = sum(exc.value.cochain.get(k, mpq(0)) * v for k, v in z.entries.items())
    assert target == exc.value.pairing != 0


def test_fill_truncation_flag(z2):
    pres, oracle = z2
    ball = build_ball(pres, oracle, 4)
    small = cycle_of_relation((1, 2, -1, -2), 0, ball)
    assert fill_real(small, ball).truncated is False
    big = cycle_of_relation(pres.parse_word("a^2 b^2 a^-2 b^-2"), 0, ball)
    assert fill_real(big, ball).truncated is True  # the walk exits B(3)


def test_stable_fill(z2_ball4):
    ball = z2_ball4
    rows = stable_fill((1, 2, -1, -2), ball, 3)
    assert rows == [(1, mpq(1)), (2, mpq(1)), (3, mpq(1))]
    for n in (1, 2, 3):
        z = cycle_of_relation((1, 2, -1, -2), 0, ball).scale(mpq(n))
        assert fill_int(z, ball).value / n >= mpq(1)
        assert fill_int(z, ball).value == n


def test_fill_scaling_homogeneity(z2_ball4):
    ball = z2_ball4
    z = cycle_of_relation(ball.presentation.parse_word("a^2 b a^-2 b^-1"), 0, ball)
    base = fill_real(z, ball, check_truncation=False).value
    for lam in (mpq(2), mpq(-3), mpq(5, 2)):
        assert fill_real(z.scale(lam), ball, check_truncation=False).value == abs(lam) * base


# --- branch and bound on synthetic systems ----------------------------------


ODD_CYCLE = [{0: mpq(1), 2: mpq(1)}, {0: mpq(1), 1: mpq(1)},
             {1: mpq(1), 2: mpq(1)}, {0: mpq(2), 1: mpq(2), 2: mpq(2)}]


def test_branch_and_bound_integer_infeasible():
    from cofill.errors import FillBudgetError

    b = {0: mpq(1), 1: mpq(1), 2: mpq(1)}
    # three columns: finite branch tree proves integer infeasibility
    assert _branch_and_bound(ODD_CYCLE[:3], b, budget=200) is None
    # the doubled fourth column admits unbounded fractional descent: the
    # node budget is the stopping rule there
    with pytest.raises(FillBudgetError):
        _branch_and_bound(ODD_CYCLE, b, budget=60)


def test_branch_and_bound_branches_to_integer_optimum():
    cols = ODD_CYCLE + [{0: mpq(1), 1: mpq(1), 2: mpq(1)}]
    b = {0: mpq(1), 1: mpq(1), 2: mpq(1)}
    value, x = _branch_and_bound(cols, b, budget=200)
    assert value == 1
    assert x[4] == 1 and all(v == 0 for v in x[:4])


# --- growth tables ----------------------------------------------------------


def test_dehn_free_group(free2):
    pres, oracle = free2
    table = dehn_ab(pres, oracle, 6, 3)
    assert all(r.value == 0 and r.witness is None for r in table.rows)


def test_dehn_z2(z2):
    pres, oracle = z2
    table = dehn_ab(pres, oracle, 8, 4)
    by_n = {r.n: r for r in table.rows}
    assert by_n[4].value == 1
    assert pres.word_str(by_n[4].witness) == "a b a^-1 b^-1"
    assert by_n[8].value == 4
    assert pres.word_str(by_n[8].witness) == "a^2 b^2 a^-2 b^-2"
    assert by_n[7].value == 2  # the 2x1 rectangle at length 6
    values = [r.value for r in table.rows]
    assert values == sorted(values)


def test_dehn_real_variant(z2):
    pres, oracle = z2
    real = dehn_ab(pres, oracle, 6, 3, real=True)
    by_n = {r.n: r for r in real.rows}
    assert by_n[6].value == 2
    assert real.kind == "dehn-real"


def test_cof_z2(z2):
    pres, oracle = z2
    table = cof(pres, oracle, 4, 3)
    by_n = {r.n: r for r in table.rows}
    assert by_n[4].value == mpq(1, 4)
    assert pres.word_str(by_n[4].witness) == "a b a^-1 b^-1"


def test_cof_surface(surface2, surface2_ball4):
    pres, oracle = surface2
    table = cof(pres, oracle, 8, 4, ball=surface2_ball4)
    assert table.rows[-1].value == mpq(1, 8)
    assert table.rows[-1].witness == pres.relators[0]


def test_growth_csv_format(z2):
    pres, oracle = z2
    table = cof(pres, oracle, 4, 3)
    csv = table.to_csv(pres)
    lines = csv.strip().split("\n")
    assert lines[0] == "n,value_num,value_den,witness,radius,truncated"
    assert lines[4] == "4,1,4,a b a^-1 b^-1,3,false"


def test_growth_sample_mode_marked_truncated(z2_ball5):
    ball = z2_ball5
    pres, oracle = ball.presentation, ball.oracle
    table = cof(pres, oracle, 8, 5, mode="sample", count=5, seed=3, ball=ball)
    assert all(r.truncated for r in table.rows)


# --- duality ----------------------------------------------------------------


def test_dual_check_commutator(z2_ball4):
    report = dual_norm_check((1, 2, -1, -2), z2_ball4)
    assert report.primal == report.dual == 1
    assert report.dual_route == "lp"


def test_dual_check_trivial_relation(z2_ball4):
    report = dual_norm_check((1, 2, -2, -1), z2_ball4)
    assert report.primal == report.dual == 0


def test_dual_check_certified_route(z2_ball4):
    report = dual_norm_check((1, 2, -1, -2), z2_ball4, dual_mode="certify")
    assert report.primal == report.dual == 1
    assert report.dual_route == "certified"


def test_dual_scaling(z2_ball4):
    """Scaling the dual bound to lambda scales the dual value to
    lambda * Delta^ab_R(w); checked with an independently built LP."""
    ball = z2_ball4
    z = cycle_of_relation(ball.presentation.parse_word("a^2 b a^-2 b^-1"), 0, ball)
    cells = ball_cells(ball)
    chord_row = cells.chord_row
    b = {}
    for key, v in z.entries.items():
        row = chord_row.get(ball.edge_id[key])
        if row is not None:
            b[row] = v
    base = fill_real(z, ball, check_truncation=False).value
    for lam in (mpq(1), mpq(3), mpq(1, 2)):
        rows = []
        for proj in cells.projections:
            rows.append(LPRow(dict(proj), LE, lam))
            rows.append(LPRow({r: -v for r, v in proj.items()}, LE, lam))
        sol = solve_lp(LPProblem(len(ball.chords), dict(b), rows, "max"))
        assert sol.status == OPTIMAL
        assert sol.objective == lam * base


def test_dual_check_random_relations(z2_ball5):
    ball = z2_ball5
    for w in enumerate_relations(ball, 10, mode="sample", count=20, seed=21):
        report = dual_norm_check(w, ball)
        assert report.primal == report.dual


# --- cycle decomposition ----------------------------------------------------


def test_decompose_single_square(z2_ball4):
    ball = z2_ball4
    z = cycle_of_relation((1, 2, -1, -2), 0, ball)
    out = decompose_cycle(z, ball)
    assert out == [(mpq(1), 0, (1, 2, -1, -2))]


def test_decompose_zero(z2_ball4):
    assert decompose_cycle(GroupRingVec(), z2_ball4) == []


def test_decompose_disjoint_translates(z2_ball4):
    ball = z2_ball4
    pres = ball.presentation
    sq = (1, 2, -1, -2)
    base1 = 0
    base2 = ball.vertex_index[pres.parse_word("a b")]
    z = cycle_of_relation(sq, base1, ball) + cycle_of_relation(sq, base2, ball).scale(mpq(2))
    out = decompose_cycle(z, ball)
    assert sorted((c, b) for c, b, _ in out) == [(mpq(1), base1), (mpq(2), base2)]
    total = GroupRingVec()
    for coeff, base, word in out:
        total = total + cycle_of_relation(word, base, ball).scale(coeff)
    assert total == z


def test_decompose_resums_and_is_relations(z2_ball5):
    ball = z2_ball5
    words = list(enumerate_relations(ball, 8, mode="sample", count=8, seed=5))
    z = GroupRingVec()
    for i, w in enumerate(words):
        z = z + cycle_of_relation(w, 0, ball).scale(mpq(i % 3 + 1, 2))
    total = GroupRingVec()
    for coeff, base, word in decompose_cycle(z, ball):
        assert coeff > 0
        assert ball.oracle.is_identity(word)
        assert ball.walk(base, word) == base
        total = total + cycle_of_relation(word, base, ball).scale(coeff)
    assert total == z


def test_decompose_requires_cycle(z2_ball4):
    with pytest.raises(NotACycleError):
        decompose_cycle(GroupRingVec({(0, 0): mpq(1)}), z2_ball4)
