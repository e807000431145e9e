"""Filling invariants on Cayley balls.

Everything here is ball-truncated: a value computed at radius r means "over
2-chains supported in B(r)", is exact as a rational, and is labeled with the
radius.  fill_real is the ell_1 LP over (vertex, relator) translates; fill_int
is its integer variant by branch-and-bound over the exact LP relaxation;
dual_norm_check exhibits the finite duality; decompose_cycle is the
cancellation trace that turns Farkas certificates into relation cycles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .cayley import CayleyBall, enumerate_relations
from .errors import CofillError, FillBudgetError, NotACycleError
from .foxcalc import (
    FillCertificate,
    GroupRingVec,
    boundary1,
    boundary2,
    cycle_of_relation,
)
from .oracles import Oracle
from .presentation import Presentation, Word, concat, free_reduce, word_key
from .ratlp import (
    EQ,
    GE,
    LE,
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    InternalSolverError,
    L1Infeasible,
    L1Result,
    LPProblem,
    LPRow,
    min_l1,
    solve_lp,
)
from .rationals import ONE, ZERO, Q, as_q, is_integral, q_int

EdgeKey = Tuple[int, int]


class FillInfeasibleError(CofillError):
    """The cycle is not a boundary of ball-supported 2-chains.

    For real fills this carries an exact certificate: an edge cochain
    vanishing on every translated relator cycle in the ball but not on the
    target.  For integer fills whose LP relaxation is feasible, infeasibility
    is established by exhausting the branch tree and there is no cochain.
    """

    def __init__(self, cochain: Dict[EdgeKey, Q], pairing: Q,
                 reason: str = "cycle has no filling inside the ball"):
        super().__init__(reason)
        self.cochain = cochain
        self.pairing = pairing


@dataclass
class FillReport:
    value: Q
    certificate: FillCertificate
    radius: int
    truncated: Optional[bool] = None  # None = stabilization not checked
    word: Optional[Word] = None


@dataclass
class GrowthRow:
    n: int
    value: Q
    witness: Optional[Word]
    radius: int
    truncated: bool


@dataclass
class GrowthTable:
    kind: str  # "dehn" | "dehn-real" | "cof"
    rows: List[GrowthRow]

    def __post_init__(self):
        for a, b in zip(self.rows, self.rows[1:]):
            if b.n <= a.n or b.value < a.value:
                raise ValueError("growth table must be increasing in n, nondecreasing in value")

    def to_csv(self, presentation: Presentation) -> str:
        lines = ["n,value_num,value_den,witness,radius,truncated"]
        for row in self.rows:
            witness = "" if row.witness is None else presentation.word_str(row.witness)
            lines.append(
                f"{row.n},{row.value.numerator},{row.value.denominator},"
                f"{witness},{row.radius},{'true' if row.truncated else 'false'}"
            )
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# cells (translated relator cycles) and chord coordinates
# ---------------------------------------------------------------------------


@dataclass
class _Cells:
    index: List[Tuple[int, int]]          # column -> (vertex, relator)
    cycles: List[GroupRingVec]
    projections: List[Dict[int, Q]]       # column -> chord-row sparse vector
    chord_row: Dict[int, int]             # edge id -> row


def ball_cells(ball: CayleyBall) -> _Cells:
    """All (vertex, relator) translates whose cycle fits in the ball, in
    (vertex, relator) order, with their chord-coordinate projections."""
    if ball._cell_cache is not None:
        return ball._cell_cache
    chord_row = {eid: i for i, eid in enumerate(ball.chords)}
    index: List[Tuple[int, int]] = []
    cycles: List[GroupRingVec] = []
    projections: List[Dict[int, Q]] = []
    for vid in range(ball.num_vertices):
        for j in range(ball.presentation.num_relators):
            try:
                z = cycle_of_relation(ball.presentation.relators[j], vid, ball)
            except CofillError:
                continue
            index.append((vid, j))
            cycles.append(z)
            projections.append(_project(z, ball, chord_row))
    cells = _Cells(index, cycles, projections, chord_row)
    ball._cell_cache = cells
    return cells


def _project(z: GroupRingVec, ball: CayleyBall, chord_row: Dict[int, int]) -> Dict[int, Q]:
    out: Dict[int, Q] = {}
    for key, v in z.entries.items():
        row = chord_row.get(ball.edge_id[key])
        if row is not None:
            out[row] = v
    return out


def _require_cycle(z: GroupRingVec, ball: CayleyBall) -> None:
    if boundary1(z, ball):
        raise NotACycleError("target chain is not a cycle")


def _solve_fill_lp(z: GroupRingVec, ball: CayleyBall) -> Tuple[L1Result, _Cells]:
    cells = ball_cells(ball)
    b = _project(z, ball, cells.chord_row)
    try:
        res = min_l1(cells.projections, b, len(ball.chords))
    except L1Infeasible as exc:
        cochain = {}
        for eid, row in cells.chord_row.items():
            v = exc.farkas.get(row)
            if v:
                src, gen, _ = ball.edges[eid]
                cochain[(src, gen)] = v
        pairing = sum((exc.farkas.get(r, ZERO) * v for r, v in b.items()), ZERO)
        raise FillInfeasibleError(cochain, pairing) from None
    return res, cells


def fill_real(z: GroupRingVec, ball: CayleyBall, check_truncation: bool = True,
              word: Optional[Word] = None) -> FillReport:
    """Ball-truncated Delta^ab_R: min sum|tau| with sum tau_i g_i I_{r_ji} = z.

    The certificate is re-verified (boundary2 equals the target exactly)
    before the report is emitted.  With check_truncation, the same fill is
    recomputed at radius r-1; a changed value sets the truncated flag.
    """
    _require_cycle(z, ball)
    res, cells = _solve_fill_lp(z, ball)
    terms = [(res.x[k], vid, j) for k, (vid, j) in enumerate(cells.index) if res.x[k] != 0]
    cert = FillCertificate.make(terms, z)
    if boundary2(cert, ball) != z:
        raise InternalSolverError("certificate does not reproduce the target")
    truncated = None
    if check_truncation:
        truncated = _changed_at_smaller_radius(z, ball, res.value, integer=False)
    return FillReport(value=res.value, certificate=cert, radius=ball.radius,
                      truncated=truncated, word=word)


def _changed_at_smaller_radius(z: GroupRingVec, ball: CayleyBall, value: Q,
                               integer: bool) -> bool:
    if ball.radius == 0:
        return False
    sub = ball.restricted(ball.radius - 1)
    for (vid, gen) in z.entries:
        if vid >= sub.num_vertices or (vid, gen) not in sub.edge_id:
            return True
    try:
        if integer:
            prev = fill_int(z, sub, check_truncation=False).value
        else:
            prev = fill_real(z, sub, check_truncation=False).value
    except (FillInfeasibleError, FillBudgetError):
        return True
    return prev != value


def fill_int(z: GroupRingVec, ball: CayleyBall, budget: int = 10000,
             check_truncation: bool = False, word: Optional[Word] = None) -> FillReport:
    """Minimal sum|tau| over integer certificates, by branch-and-bound with
    the exact LP relaxation as the bound ("with integer coefficients, we have
    a minimum").  Branching follows the most fractional variable, ties by
    lowest column index; depth-first, down branch first."""
    if not z.is_integral():
        raise ValueError("integer filling needs an integral target cycle")
    _require_cycle(z, ball)
    res, cells = _solve_fill_lp(z, ball)
    if all(v.denominator == 1 for v in res.x):
        terms = [(res.x[k], vid, j) for k, (vid, j) in enumerate(cells.index) if res.x[k] != 0]
        cert = FillCertificate.make(terms, z)
        if boundary2(cert, ball) != z:
            raise InternalSolverError("certificate does not reproduce the target")
        truncated = None
        if check_truncation:
            truncated = _changed_at_smaller_radius(z, ball, res.value, integer=True)
        return FillReport(value=res.value, certificate=cert, radius=ball.radius,
                          truncated=truncated, word=word)

    b = _project(z, ball, cells.chord_row)
    value_x = _branch_and_bound(cells.projections, b, budget)
    if value_x is None:
        raise FillInfeasibleError(
            {}, ZERO, "no integer filling inside the ball (branch tree exhausted)")
    best_value, best_x = value_x
    terms = [(best_x[k], vid, j) for k, (vid, j) in enumerate(cells.index) if best_x[k] != 0]
    cert = FillCertificate.make(terms, z)
    if boundary2(cert, ball) != z:
        raise InternalSolverError("certificate does not reproduce the target")
    truncated = None
    if check_truncation:
        truncated = _changed_at_smaller_radius(z, ball, best_value, integer=True)
    return FillReport(value=best_value, certificate=cert, radius=ball.radius,
                      truncated=truncated, word=word)


def _branch_and_bound(projections: Sequence[Dict[int, Q]], b: Dict[int, Q],
                      budget: int):
    """Integer ell_1 minimization over sparse columns; None if no integer
    solution exists (established by exhausting the branch tree)."""
    ncols = len(projections)
    base_rows: List[LPRow] = []
    touched = set(b)
    for proj in projections:
        touched.update(proj)
    for row in sorted(touched):
        coeffs = {}
        for k, proj in enumerate(projections):
            v = proj.get(row)
            if v:
                coeffs[2 * k] = v
                coeffs[2 * k + 1] = -v
        base_rows.append(LPRow(coeffs, EQ, b.get(row, ZERO)))
    objective = {i: ONE for i in range(2 * ncols)}
    bounds = [(ZERO, None)] * (2 * ncols)

    incumbent: Optional[Tuple[Q, List[Q]]] = None
    # node = consolidated integer bounds per net variable: {col: (lo, hi)}
    stack: List[Dict[int, Tuple[Optional[Q], Optional[Q]]]] = [{}]
    open_bounds: List[Q] = []
    nodes = 0
    while stack:
        var_bounds = stack.pop()
        nodes += 1
        if nodes > budget:
            lower = min(open_bounds) if open_bounds else ZERO
            upper = incumbent[0] if incumbent else None
            raise FillBudgetError(lower, upper,
                                  incumbent[1] if incumbent else None)
        extra = []
        for k in sorted(var_bounds):
            lo, hi = var_bounds[k]
            if lo is not None:
                extra.append(LPRow({2 * k: ONE, 2 * k + 1: -ONE}, GE, lo))
            if hi is not None:
                extra.append(LPRow({2 * k: ONE, 2 * k + 1: -ONE}, LE, hi))
        prob = LPProblem(2 * ncols, objective, base_rows + extra,
                         "min", list(bounds))
        sol = solve_lp(prob)
        if sol.status == INFEASIBLE:
            continue
        if sol.status != OPTIMAL:
            raise InternalSolverError("fill LP cannot be unbounded")
        lower = _ceil_q(sol.objective)
        if incumbent is not None and lower >= incumbent[0]:
            continue
        net = [sol.x[2 * k] - sol.x[2 * k + 1] for k in range(ncols)]
        frac_col = -1
        frac_dist = ZERO
        for k, v in enumerate(net):
            if v.denominator != 1:
                f = v - _floor_q(v)
                dist = min(f, 1 - f)
                if dist > frac_dist:
                    frac_dist = dist
                    frac_col = k
        if frac_col < 0:
            value = sum((abs(v) for v in net), ZERO)
            if incumbent is None or value < incumbent[0]:
                incumbent = (value, net)
            continue
        v = net[frac_col]
        lo0, hi0 = var_bounds.get(frac_col, (None, None))
        down = dict(var_bounds)
        down[frac_col] = (lo0, _floor_q(v))
        up = dict(var_bounds)
        up[frac_col] = (_floor_q(v) + 1, hi0)
        open_bounds.append(lower)
        # depth-first, down branch explored first
        stack.append(up)
        stack.append(down)
    return incumbent


def _floor_q(v: Q) -> Q:
    return as_q(v.numerator // v.denominator)


def _ceil_q(v: Q) -> Q:
    return as_q(-((-v.numerator) // v.denominator))


def stable_fill(w: Word, ball: CayleyBall, n_max: int) -> List[Tuple[int, Q]]:
    """(n, fill_real(I_{w^n})/n) for n = 1..n_max.

    Since I_{w^n} = n I_w, the sequence is constant by LP homogeneity; the
    operation exists to exhibit that and to compare against fill_int(w^n)/n.
    """
    out = []
    word = ()
    for n in range(1, n_max + 1):
        word = free_reduce(concat(word, w))
        z = cycle_of_relation(word, 0, ball) if word else GroupRingVec()
        value = fill_real(z, ball, check_truncation=False).value
        out.append((n, value / n))
    return out


# ---------------------------------------------------------------------------
# growth tables
# ---------------------------------------------------------------------------


def _relation_classes(ball: CayleyBall, n: int, mode: str, count, seed, budget):
    classes = list(enumerate_relations(ball, n, mode=mode, count=count,
                                       seed=seed, budget=budget))
    classes.sort(key=lambda w: (len(w), word_key(w)))
    return classes


def _growth_table(kind: str, presentation: Presentation, oracle: Oracle, n: int,
                  radius: int, mode: str, count, seed, budget, ball, fill_budget):
    from .cayley import build_ball

    if ball is None:
        ball = build_ball(presentation, oracle, radius)
    classes = _relation_classes(ball, n, mode, count, seed, budget)
    cache: Dict[str, Q] = {}
    per_class: List[Tuple[Word, Optional[Q]]] = []
    any_skipped = False
    for w in classes:
        z = cycle_of_relation(w, 0, ball)
        key = z.digest()
        if key in cache:
            fill_value = cache[key]
        else:
            try:
                if kind == "dehn":
                    fill_value = fill_int(z, ball, budget=fill_budget,
                                          check_truncation=False).value
                else:
                    fill_value = fill_real(z, ball, check_truncation=False).value
            except FillInfeasibleError:
                fill_value = None
                any_skipped = True
            cache[key] = fill_value
        if fill_value is None:
            per_class.append((w, None))
        elif kind == "cof":
            per_class.append((w, fill_value / len(w)))
        else:
            per_class.append((w, fill_value))

    sampled = mode != "exhaustive"
    rows = []
    best = ZERO
    witness: Optional[Word] = None
    skipped_so_far = False
    by_len: Dict[int, List[Tuple[Word, Optional[Q]]]] = {}
    for w, v in per_class:
        by_len.setdefault(len(w), []).append((w, v))
    for m in range(1, n + 1):
        for w, v in by_len.get(m, ()):
            if v is None:
                skipped_so_far = True
            elif v > best:
                best = v
                witness = w
        rows.append(GrowthRow(m, best, witness, ball.radius,
                              sampled or skipped_so_far))
    return GrowthTable(kind, rows)


def dehn_ab(presentation: Presentation, oracle: Oracle, n: int, radius: int,
            mode: str = "exhaustive", count=None, seed=None, real: bool = False,
            ball: Optional[CayleyBall] = None, enum_budget: int = 10**7,
            fill_budget: int = 10000) -> GrowthTable:
    """delta^ab(m) for m <= n: sup of the integer (or real, with real=True)
    filling over enumerated relation classes; lower-bound semantics under ball
    truncation."""
    kind = "dehn-real" if real else "dehn"
    return _growth_table(kind, presentation, oracle, n, radius, mode, count,
                         seed, enum_budget, ball, fill_budget)


def cof(presentation: Presentation, oracle: Oracle, n: int, radius: int,
        mode: str = "exhaustive", count=None, seed=None,
        ball: Optional[CayleyBall] = None, enum_budget: int = 10**7,
        fill_budget: int = 10000) -> GrowthTable:
    """Cof(m) = sup Delta^ab_R(w)/|w| over relations of length <= m."""
    return _growth_table("cof", presentation, oracle, n, radius, mode, count,
                         seed, enum_budget, ball, fill_budget)


# ---------------------------------------------------------------------------
# duality check
# ---------------------------------------------------------------------------


@dataclass
class DualCheckReport:
    primal: Q
    dual: Q
    cochain: Dict[EdgeKey, Q]
    dual_route: str  # "lp" (independent dual solve) or "certified"


def dual_norm_check(w: Word, ball: CayleyBall, dual_mode: str = "auto",
                    size_threshold: int = 20000) -> DualCheckReport:
    """Primal fill LP against the dual max a(I_w) s.t. |a(g I_rj)| <= 1.

    For moderate sizes the dual LP is solved independently and must agree
    with the primal value as an identical rational.  For large balls the
    optimal cochain is taken from the primal multipliers and certified
    instead: its feasibility is checked constraint by constraint and its
    objective equals the primal optimum, which bounds the dual from both
    sides by weak duality.  Either way both returned values are exact.
    """
    z = cycle_of_relation(w, 0, ball)
    _require_cycle(z, ball)
    res, cells = _solve_fill_lp(z, ball)
    primal = res.value

    chord_edges = {row: eid for eid, row in cells.chord_row.items()}
    witness: Dict[EdgeKey, Q] = {}
    for row, v in res.duals.items():
        src, gen, _ = ball.edges[chord_edges[row]]
        witness[(src, gen)] = v

    b = _project(z, ball, cells.chord_row)
    _certify_dual(witness, res.duals, cells, b, primal)

    ncols = len(cells.index)
    nchords = len(ball.chords)
    if dual_mode == "lp" or (dual_mode == "auto" and ncols * max(nchords, 1) <= size_threshold):
        dual_value, cochain = _solve_dual_lp(cells, b, nchords, ball, chord_edges)
        return DualCheckReport(primal, dual_value, cochain, "lp")
    pairing = sum((res.duals.get(r, ZERO) * v for r, v in b.items()), ZERO)
    return DualCheckReport(primal, pairing, witness, "certified")


def _certify_dual(witness, duals, cells: _Cells, b, primal) -> None:
    for proj in cells.projections:
        pairing = sum((duals.get(r, ZERO) * v for r, v in proj.items()), ZERO)
        if abs(pairing) > 1:
            raise InternalSolverError("dual witness violates a cell constraint")
    pairing = sum((duals.get(r, ZERO) * v for r, v in b.items()), ZERO)
    if pairing != primal:
        raise InternalSolverError("dual witness objective mismatch")


def _solve_dual_lp(cells: _Cells, b, nchords: int, ball, chord_edges):
    rows = []
    for proj in cells.projections:
        rows.append(LPRow(dict(proj), LE, ONE))
        rows.append(LPRow({r: -v for r, v in proj.items()}, LE, ONE))
    prob = LPProblem(nchords, dict(b), rows, "max")
    sol = solve_lp(prob)
    if sol.status != OPTIMAL:
        raise InternalSolverError("dual LP must be feasible and bounded here")
    cochain = {}
    for r, v in enumerate(sol.x):
        if v != 0:
            src, gen, _ = ball.edges[chord_edges[r]]
            cochain[(src, gen)] = v
    return sol.objective, cochain


# ---------------------------------------------------------------------------
# the cancellation decomposition
# ---------------------------------------------------------------------------


def decompose_cycle(x: GroupRingVec, ball: CayleyBall,
                    budget: int = 10**6) -> List[Tuple[Q, int, Word]]:
    """Express a cycle as a positive combination of relation cycles.

    Implements the inductive cancellation of the Hahn-Banach proof: start at
    a term of minimal |coefficient|, follow the flow (terms must cancel at
    every vertex), extract the first closed loop, subtract its extremal
    weight, recurse.  Each round zeroes at least one stored term, so the term
    count is weakly decreasing.  The output re-sums to x exactly, every word
    is a relation, and the decomposition is conservative: no cancellation
    between extracted cycles.
    """
    if boundary1(x, ball):
        raise NotACycleError("decompose_cycle needs a cycle")
    work: Dict[EdgeKey, Q] = dict(x.entries)
    out: List[Tuple[Q, int, Word]] = []
    steps = 0
    while work:
        start_key = min(work, key=lambda k: (abs(work[k]), k))
        vid, gen = start_key
        if work[start_key] > 0:
            v0 = vid
        else:
            v0 = ball.edges[ball.edge_id[start_key]][2]
        # trace: vertices visited, with positions for loop extraction
        path_vertices = [v0]
        pos = {v0: 0}
        path_steps: List[Tuple[int, EdgeKey, int]] = []  # (letter, key, dir)
        cur = v0
        while True:
            steps += 1
            if steps > budget:
                raise FillBudgetError(ZERO, None)
            nxt_step = _next_flow_step(cur, work, ball)
            if nxt_step is None:
                raise NotACycleError("flow conservation failed mid-trace")
            let, key, direction, nxt = nxt_step
            path_steps.append((let, key, direction))
            j = pos.get(nxt)
            if j is not None:
                loop = path_steps[j:]
                weight = min(abs(work[k]) for _, k, _ in loop)
                for _, k, d in loop:
                    work[k] -= weight * d
                    if work[k] == 0:
                        del work[k]
                word = tuple(l for l, _, _ in loop)
                out.append((weight, nxt, word))
                break
            pos[nxt] = len(path_vertices)
            path_vertices.append(nxt)
            cur = nxt
    return out


def _next_flow_step(cur: int, work: Dict[EdgeKey, Q], ball: CayleyBall):
    """First continuation following the flow out of cur, in letter order."""
    for gen in range(ball.presentation.num_generators):
        key = (cur, gen)
        v = work.get(key)
        if v is not None and v > 0:
            return gen + 1, key, 1, ball.edges[ball.edge_id[key]][2]
        eid = ball._in_by_gen.get((cur, gen))
        if eid is not None:
            src = ball.edges[eid][0]
            v = work.get((src, gen))
            if v is not None and v < 0:
                return -(gen + 1), (src, gen), -1, src
    return None
