"""Exact rational linear programming.

Two-phase primal simplex with Bland's anti-cycling rule on a dense tableau of
gmpy2 rationals: every optimum, dual vector, and Farkas certificate is exact,
and identical inputs pivot identically, so results are bit-for-bit
reproducible.  The ell_1 solver adds a sparse presolve (forced-variable
peeling) with an exact dual postsolution, because the filling instances are
dominated by rows that pin single variables.

Internal standard form is  min c.x  s.t.  A x = b, x >= 0.  The public
LPProblem layer maps senses, free variables, and bounds onto it and maps
duals and certificates back to the original rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import CofillError
from .rationals import ONE, ZERO, Q, as_q

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

LE, EQ, GE = "<=", "=", ">="


class InternalSolverError(CofillError):
    """An exact invariant of the solver failed; indicates a bug, not bad input."""


class L1Infeasible(CofillError):
    """The system Ax = b has no solution; carries an exact Farkas functional
    y with y.col = 0 for every column and y.b != 0."""

    def __init__(self, farkas: Dict[int, Q]):
        super().__init__("system is infeasible")
        self.farkas = farkas


# ---------------------------------------------------------------------------
# core simplex on the standard form
# ---------------------------------------------------------------------------


@dataclass
class SimplexResult:
    status: str
    x: Optional[List[Q]] = None
    y: Optional[List[Q]] = None          # duals, one per row as given
    objective: Optional[Q] = None
    farkas: Optional[List[Q]] = None     # y with y.A <= 0 (columnwise), y.b > 0
    iterations: int = 0


def _pivot(rows: List[List[Q]], cost_rows: List[List[Q]], basis: List[int],
           pr: int, pc: int) -> None:
    prow = rows[pr]
    piv = prow[pc]
    if piv != 1:
        inv = ONE / piv
        prow = [v * inv for v in prow]
        rows[pr] = prow
    for r, row in enumerate(rows):
        if r == pr:
            continue
        f = row[pc]
        if f:
            rows[r] = [a - f * b for a, b in zip(row, prow)]
    for i, row in enumerate(cost_rows):
        f = row[pc]
        if f:
            cost_rows[i] = [a - f * b for a, b in zip(row, prow)]
    basis[pr] = pc


def _run_phase(rows, cost_rows, basis, n_total, allowed, iteration_cap, it=0):
    """Bland-rule minimization on the active cost row (cost_rows[0])."""
    cost = cost_rows[0]
    while True:
        pc = -1
        for j in range(n_total):
            if allowed[j] and cost[j] < 0:
                pc = j
                break
        if pc < 0:
            return OPTIMAL, it
        pr = -1
        best = None
        for r, row in enumerate(rows):
            a = row[pc]
            if a > 0:
                ratio = row[-1] / a
                if best is None or ratio < best or (ratio == best and basis[r] < basis[pr]):
                    best = ratio
                    pr = r
        if pr < 0:
            return UNBOUNDED, it
        _pivot(rows, cost_rows, basis, pr, pc)
        cost = cost_rows[0]
        it += 1
        if it > iteration_cap:
            raise InternalSolverError("simplex iteration cap exceeded")


def standard_form_solve(matrix: Sequence[Sequence[Q]], b: Sequence[Q],
                        c: Sequence[Q]) -> SimplexResult:
    """Solve min c.x s.t. matrix.x = b, x >= 0 exactly.

    Returns duals y (c.x* = y.b exactly, asserted) on optimal, or a Farkas
    vector (y.A <= 0 columnwise, y.b > 0, asserted) on infeasible.
    """
    m = len(matrix)
    n = len(c)
    if any(len(row) != n for row in matrix):
        raise ValueError("row length mismatch")
    if len(b) != m:
        raise ValueError("rhs length mismatch")
    if m == 0:
        if any(cj < 0 for cj in c):
            return SimplexResult(UNBOUNDED)
        return SimplexResult(OPTIMAL, x=[ZERO] * n, y=[], objective=ZERO)

    flip = [(-1 if b[i] < 0 else 1) for i in range(m)]
    rows: List[List[Q]] = []
    for i in range(m):
        base = [as_q(v) if flip[i] > 0 else -as_q(v) for v in matrix[i]]
        art = [ONE if k == i else ZERO for k in range(m)]
        rhs = as_q(b[i]) if flip[i] > 0 else -as_q(b[i])
        rows.append(base + art + [rhs])
    n_total = n + m
    basis = [n + i for i in range(m)]

    # phase-1 cost: sum of artificials, expressed in reduced form for the
    # all-artificial basis; phase-2 cost carried along so its reduced costs
    # stay current.
    c1 = [ZERO] * (n_total + 1)
    for j in range(n):
        c1[j] = -sum((rows[i][j] for i in range(m)), ZERO)
    c1[-1] = -sum((rows[i][-1] for i in range(m)), ZERO)
    c2 = [as_q(v) for v in c] + [ZERO] * m + [ZERO]
    cost_rows = [c1, c2]

    cap = 10000 + 40 * (m + n)
    allowed = [True] * n_total
    status, it = _run_phase(rows, cost_rows, basis, n_total, allowed, cap)
    if status != OPTIMAL:
        raise InternalSolverError("phase 1 cannot be unbounded")

    w = -cost_rows[0][-1]  # current phase-1 objective
    if w > 0:
        y1 = [ZERO] * m
        for r in range(m):
            cb = ONE if basis[r] >= n else ZERO
            if cb:
                for i in range(m):
                    y1[i] += rows[r][n + i]
        # verify the certificate exactly
        ybi = sum((y1[i] * (as_q(b[i]) if flip[i] > 0 else -as_q(b[i])) for i in range(m)), ZERO)
        if ybi <= 0:
            raise InternalSolverError("farkas rhs check failed")
        for j in range(n):
            s = sum((y1[i] * rows_orig_entry(matrix, flip, i, j) for i in range(m)), ZERO)
            if s > 0:
                raise InternalSolverError("farkas column check failed")
        farkas = [y1[i] * flip[i] for i in range(m)]
        return SimplexResult(INFEASIBLE, farkas=farkas, iterations=it)

    # drive basic artificials out (or leave them on all-zero rows)
    for r in range(m):
        if basis[r] >= n:
            pc = -1
            for j in range(n):
                if rows[r][j] != 0:
                    pc = j
                    break
            if pc >= 0:
                _pivot(rows, cost_rows, basis, r, pc)

    for j in range(n, n_total):
        allowed[j] = False
    cost_rows = [cost_rows[1]]
    status, it = _run_phase(rows, cost_rows, basis, n_total, allowed, cap, it)
    if status == UNBOUNDED:
        return SimplexResult(UNBOUNDED, iterations=it)

    x = [ZERO] * n
    for r in range(m):
        if basis[r] < n:
            x[basis[r]] = rows[r][-1]
    y = [ZERO] * m
    for r in range(m):
        cb = c2[basis[r]] if basis[r] < n else ZERO
        if cb:
            for i in range(m):
                y[i] += cb * rows[r][n + i]
    obj = sum((as_q(c[j]) * x[j] for j in range(n)), ZERO)
    ydotb = sum((y[i] * (as_q(b[i]) if flip[i] > 0 else -as_q(b[i])) for i in range(m)), ZERO)
    if obj != ydotb:
        raise InternalSolverError("strong duality check failed")
    y_given = [y[i] * flip[i] for i in range(m)]
    return SimplexResult(OPTIMAL, x=x, y=y_given, objective=obj, iterations=it)


def rows_orig_entry(matrix, flip, i, j) -> Q:
    v = as_q(matrix[i][j])
    return v if flip[i] > 0 else -v


# ---------------------------------------------------------------------------
# general problems
# ---------------------------------------------------------------------------


@dataclass
class LPRow:
    coeffs: Dict[int, Q]
    sense: str
    rhs: Q

    def __post_init__(self):
        if self.sense not in (LE, EQ, GE):
            raise ValueError(f"bad sense {self.sense!r}")
        self.coeffs = {j: as_q(v) for j, v in self.coeffs.items() if as_q(v) != 0}
        self.rhs = as_q(self.rhs)


@dataclass
class LPProblem:
    """min or max of objective.x subject to rows and per-variable bounds.

    Bounds default to free (absent = unbounded, per the artifact convention);
    most callers in this package encode bounds as explicit rows so that Farkas
    certificates stay expressible in row multipliers.
    """

    num_vars: int
    objective: Dict[int, Q]
    rows: List[LPRow]
    direction: str = "min"
    bounds: Optional[List[Tuple[Optional[Q], Optional[Q]]]] = None

    def __post_init__(self):
        if self.direction not in ("min", "max"):
            raise ValueError("direction must be min or max")
        self.objective = {j: as_q(v) for j, v in self.objective.items() if as_q(v) != 0}
        for j in self.objective:
            if not 0 <= j < self.num_vars:
                raise ValueError("objective index out of range")
        for row in self.rows:
            for j in row.coeffs:
                if not 0 <= j < self.num_vars:
                    raise ValueError("row index out of range")
        if self.bounds is None:
            self.bounds = [(None, None)] * self.num_vars
        if len(self.bounds) != self.num_vars:
            raise ValueError("one bound pair per variable required")
        norm = []
        for lo, hi in self.bounds:
            lo = None if lo is None else as_q(lo)
            hi = None if hi is None else as_q(hi)
            if lo is not None and hi is not None and lo > hi:
                raise ValueError("inconsistent bounds lo > hi")
            norm.append((lo, hi))
        self.bounds = norm


@dataclass
class LPSolution:
    status: str
    x: Optional[List[Q]] = None
    y: Optional[List[Q]] = None
    objective: Optional[Q] = None
    farkas: Optional[List[Q]] = None
    iterations: int = 0


def solve_lp(problem: LPProblem) -> LPSolution:
    """Exact optimum via two-phase simplex with Bland's rule.

    Farkas multipliers (on infeasible) are reported against the original rows
    with the orientation y_i >= 0 on <=-rows and y_i <= 0 on >=-rows, so that
    verify_farkas can re-check them by pure aggregation.
    """
    nv = problem.num_vars
    # variable transforms: list of (kind, data)
    #   shift:  x = lo + u          cols (u,)
    #   nshift: x = hi - u          cols (u,)
    #   split:  x = u - v           cols (u, v)
    parts = []
    ncols = 0
    extra_rows: List[LPRow] = []
    for j in range(nv):
        lo, hi = problem.bounds[j]
        if lo is not None:
            parts.append(("shift", j, lo, ncols))
            if hi is not None:
                extra_rows.append(LPRow({j: ONE}, LE, hi))
            ncols += 1
        elif hi is not None:
            parts.append(("nshift", j, hi, ncols))
            ncols += 1
        else:
            parts.append(("split", j, ZERO, ncols))
            ncols += 2

    all_rows = list(problem.rows) + extra_rows
    n_orig_rows = len(problem.rows)
    m = len(all_rows)
    slack_of_row: List[Optional[int]] = [None] * m
    nslack = 0
    for i, row in enumerate(all_rows):
        if row.sense != EQ:
            slack_of_row[i] = ncols + nslack
            nslack += 1
    width = ncols + nslack

    def col_of(j: int) -> Tuple[int, int, Q]:
        kind, _, const, base = parts[j]
        if kind == "shift":
            return base, -1, const
        if kind == "nshift":
            return base, -2, const
        return base, base + 1, ZERO

    dense = [[ZERO] * width for _ in range(m)]
    b_vec = [ZERO] * m
    for i, row in enumerate(all_rows):
        rhs = row.rhs
        for j, a in row.coeffs.items():
            kind, _, const, base = parts[j]
            if kind == "shift":
                dense[i][base] += a
                rhs -= a * const
            elif kind == "nshift":
                dense[i][base] -= a
                rhs -= a * const
            else:
                dense[i][base] += a
                dense[i][base + 1] -= a
        s = slack_of_row[i]
        if s is not None:
            dense[i][s] = ONE if row.sense == LE else -ONE
        b_vec[i] = rhs

    sign = 1 if problem.direction == "min" else -1
    c_vec = [ZERO] * width
    obj_const = ZERO
    for j, cj in problem.objective.items():
        kind, _, const, base = parts[j]
        cj = sign * cj
        obj_const += cj * const
        if kind == "shift":
            c_vec[base] += cj
        elif kind == "nshift":
            c_vec[base] -= cj
        else:
            c_vec[base] += cj
            c_vec[base + 1] -= cj

    res = standard_form_solve(dense, b_vec, c_vec)
    if res.status == UNBOUNDED:
        return LPSolution(UNBOUNDED, iterations=res.iterations)
    if res.status == INFEASIBLE:
        farkas = [-res.farkas[i] for i in range(n_orig_rows)]
        return LPSolution(INFEASIBLE, farkas=farkas, iterations=res.iterations)

    x = [ZERO] * nv
    for kind, j, const, base in parts:
        if kind == "shift":
            x[j] = const + res.x[base]
        elif kind == "nshift":
            x[j] = const - res.x[base]
        else:
            x[j] = res.x[base] - res.x[base + 1]
    obj = sign * (res.objective + obj_const)
    y = [sign * res.y[i] for i in range(n_orig_rows)]
    return LPSolution(OPTIMAL, x=x, y=y, objective=obj, iterations=res.iterations)


def feasibility(problem: LPProblem) -> LPSolution:
    """Phase-one feasibility: Optimal with a point, or Infeasible with Farkas."""
    zero_obj = LPProblem(problem.num_vars, {}, problem.rows, "min", problem.bounds)
    return solve_lp(zero_obj)


def verify_farkas(problem: LPProblem, farkas: Sequence[Q]) -> bool:
    """Exact re-verification that the multipliers prove infeasibility.

    Requires y_i >= 0 on <=-rows and y_i <= 0 on >=-rows; aggregates to
    d.x <= r and checks min_{bounds} d.x > r.
    """
    if len(farkas) != len(problem.rows):
        return False
    d: Dict[int, Q] = {}
    r = ZERO
    for y, row in zip(farkas, problem.rows):
        y = as_q(y)
        if row.sense == LE and y < 0:
            return False
        if row.sense == GE and y > 0:
            return False
        if y == 0:
            continue
        r += y * row.rhs
        for j, a in row.coeffs.items():
            d[j] = d.get(j, ZERO) + y * a
    low = ZERO
    for j, dj in d.items():
        if dj == 0:
            continue
        lo, hi = problem.bounds[j]
        if dj > 0:
            if lo is None:
                return False
            low += dj * lo
        else:
            if hi is None:
                return False
            low += dj * hi
    return low > r


# ---------------------------------------------------------------------------
# ell_1 minimization with presolve
# ---------------------------------------------------------------------------


@dataclass
class L1Result:
    value: Q
    x: List[Q]
    duals: Dict[int, Q] = field(default_factory=dict)
    core_size: Tuple[int, int] = (0, 0)


def min_l1(columns: Sequence[Dict[int, Q]], b: Dict[int, Q], num_rows: int,
           use_presolve: bool = True) -> L1Result:
    """Solve min sum|x_j| s.t. sum_j x_j * columns[j] = b exactly.

    Columns and b are sparse over row indices 0..num_rows-1.  Returns the
    value, a minimizer (the Bland-determined vertex; minimizers are not unique
    in general), and optimal duals y with |y.col| <= 1 for every column and
    y.b = value.  Raises L1Infeasible with a verified Farkas functional when
    b is outside the column span.

    The presolve repeatedly peels rows that pin a single live variable; the
    dual postsolution assigns multipliers to peeled rows in reverse order so
    that complementary slackness holds on the full system.  Every invariant
    is re-verified exactly before returning.
    """
    cols = [{r: as_q(v) for r, v in col.items() if as_q(v) != 0} for col in columns]
    b = {r: as_q(v) for r, v in b.items() if as_q(v) != 0}
    for col in cols:
        for r in col:
            if not 0 <= r < num_rows:
                raise ValueError("row index out of range")
    for r in b:
        if not 0 <= r < num_rows:
            raise ValueError("rhs index out of range")

    ncols = len(cols)
    x: List[Optional[Q]] = [None] * ncols
    bcur = dict(b)
    row_cols: List[Dict[int, Q]] = [dict() for _ in range(num_rows)]
    for j, col in enumerate(cols):
        for r, v in col.items():
            row_cols[r][j] = v
    live_row = [True] * num_rows
    live_col = [True] * ncols
    ops: List[Tuple[str, int, int, Q]] = []  # (kind, row, col, coef)

    def lift_farkas(y: Dict[int, Q]) -> Dict[int, Q]:
        for kind, r, cj, coef in reversed(ops):
            if kind != "fix":
                continue
            v = ZERO
            for rr, a in cols[cj].items():
                v += y.get(rr, ZERO) * a
            if v != 0:
                y[r] = y.get(r, ZERO) - v / coef
        y = {r: v for r, v in y.items() if v != 0}
        for j, col in enumerate(cols):
            pairing = sum((y.get(r, ZERO) * a for r, a in col.items()), ZERO)
            if pairing != 0:
                raise InternalSolverError("farkas lift failed on a column")
        if sum((y.get(r, ZERO) * v for r, v in b.items()), ZERO) == 0:
            raise InternalSolverError("farkas lift lost the contradiction")
        return y

    if use_presolve:
        queue = [r for r in range(num_rows) if len(row_cols[r]) <= 1]
        queued = [False] * num_rows
        for r in queue:
            queued[r] = True
        qi = 0
        while qi < len(queue):
            r = queue[qi]
            qi += 1
            queued[r] = False
            if not live_row[r]:
                continue
            live = row_cols[r]
            if len(live) == 0:
                if bcur.get(r, ZERO) != 0:
                    raise L1Infeasible(lift_farkas({r: ONE}))
                live_row[r] = False
                ops.append(("drop", r, -1, ZERO))
                continue
            if len(live) > 1:
                continue
            (cj, coef), = live.items()
            val = bcur.get(r, ZERO) / coef
            x[cj] = val
            ops.append(("fix", r, cj, coef))
            live_row[r] = False
            live_col[cj] = False
            row_cols[r] = {}
            for rr, a in cols[cj].items():
                if rr == r or not live_row[rr]:
                    continue
                if val != 0:
                    bcur[rr] = bcur.get(rr, ZERO) - a * val
                row_cols[rr].pop(cj, None)
                if len(row_cols[rr]) <= 1 and not queued[rr]:
                    queue.append(rr)
                    queued[rr] = True
        # rows that became empty without entering the queue
        for r in range(num_rows):
            if live_row[r] and not row_cols[r]:
                if bcur.get(r, ZERO) != 0:
                    raise L1Infeasible(lift_farkas({r: ONE}))
                live_row[r] = False
                ops.append(("drop", r, -1, ZERO))

    core_rows = [r for r in range(num_rows) if live_row[r] and (row_cols[r] or bcur.get(r, ZERO) != 0)]
    core_cols = [j for j in range(ncols) if live_col[j] and cols[j]]
    y: Dict[int, Q] = {}

    if core_rows:
        rpos = {r: i for i, r in enumerate(core_rows)}
        mm = len(core_rows)
        nn = 2 * len(core_cols)
        dense = [[ZERO] * nn for _ in range(mm)]
        for k, j in enumerate(core_cols):
            for r, a in cols[j].items():
                if r in rpos:
                    i = rpos[r]
                    dense[i][2 * k] = a
                    dense[i][2 * k + 1] = -a
        bb = [bcur.get(r, ZERO) for r in core_rows]
        cc = [ONE] * nn
        res = standard_form_solve(dense, bb, cc)
        if res.status == INFEASIBLE:
            raise L1Infeasible(lift_farkas({r: res.farkas[i] for i, r in enumerate(core_rows)}))
        if res.status != OPTIMAL:
            raise InternalSolverError("ell_1 programs are bounded below by zero")
        for k, j in enumerate(core_cols):
            x[j] = res.x[2 * k] - res.x[2 * k + 1]
        for i, r in enumerate(core_rows):
            if res.y[i] != 0:
                y[r] = res.y[i]

    for j in range(ncols):
        if x[j] is None:
            x[j] = ZERO

    # dual postsolution through the peel in reverse
    for kind, r, cj, coef in reversed(ops):
        if kind == "drop":
            continue
        rest = ZERO
        for rr, a in cols[cj].items():
            if rr != r:
                rest += y.get(rr, ZERO) * a
        if x[cj] != 0:
            target = ONE if x[cj] > 0 else -ONE
        elif rest > ONE:
            target = ONE
        elif rest < -ONE:
            target = -ONE
        else:
            target = rest
        t = (target - rest) / coef
        if t != 0:
            y[r] = y.get(r, ZERO) + t

    value = sum((abs(v) for v in x), ZERO)

    # always-on exact verification
    resid = dict(b)
    for j, col in enumerate(cols):
        if x[j] == 0:
            continue
        for r, a in col.items():
            resid[r] = resid.get(r, ZERO) - a * x[j]
    if any(v != 0 for v in resid.values()):
        raise InternalSolverError("primal residual nonzero")
    for j, col in enumerate(cols):
        pairing = sum((y.get(r, ZERO) * a for r, a in col.items()), ZERO)
        if abs(pairing) > 1:
            raise InternalSolverError("dual infeasible after postsolution")
        if x[j] != 0 and pairing != (ONE if x[j] > 0 else -ONE):
            raise InternalSolverError("complementary slackness violated")
    ydotb = sum((y.get(r, ZERO) * v for r, v in b.items()), ZERO)
    if ydotb != value:
        raise InternalSolverError("duality gap in ell_1 solve")

    return L1Result(value=value, x=[as_q(v) for v in x], duals=y,
                    core_size=(len(core_rows), len(core_cols)))
