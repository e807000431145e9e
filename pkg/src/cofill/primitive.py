"""Bounded primitives of 2-cocycles.

A cocycle enters the system through its canonical-primitive edge data
alpha_0: values on ball edges, with coboundary freedom dm implied.  The
existence question "is there m with |alpha_0 + dm| <= F pointwise" is a
finite LP; its Farkas certificates decompose into relation cycles violating
the isoperimetric condition, which realizes the primitive-vs-inequality
equivalence exactly at the ball truncation.

Convention: the bound of the constraint attached to the stored edge
g --s--> gs is F(g), the tail of the stored (positive-direction) edge, and
the condition-(ii) right-hand side sums F over the stored-edge tails of the
walk's steps.  This is the alpha_0-form reading under which the equivalence
is an exact duality (the displayed index in the source statement is
ambiguous on negative letters).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .cayley import CayleyBall, enumerate_relations
from .errors import EscapesBallError, NotACycleError, NotExactError
from .filling import decompose_cycle
from .foxcalc import GroupRingVec, boundary1, cycle_of_relation
from .presentation import Word, word_key
from .ratlp import (
    EQ,
    INFEASIBLE,
    LE,
    OPTIMAL,
    InternalSolverError,
    LPProblem,
    LPRow,
    feasibility,
    verify_farkas,
)
from .rationals import INF, ONE, ZERO, Q, as_q

EdgeKey = Tuple[int, int]


@dataclass
class CocycleData:
    """Edge values alpha_0(g, s) on ball edges; absent keys read as zero."""

    alpha0: Dict[EdgeKey, Q]

    def __post_init__(self):
        self.alpha0 = {k: as_q(v) for k, v in self.alpha0.items() if as_q(v) != 0}
        self._norm_cache: Dict[int, Tuple[Dict[int, Q], List[int]]] = {}

    def value(self, key: EdgeKey) -> Q:
        return self.alpha0.get(key, ZERO)

    def pair(self, chain: GroupRingVec) -> Q:
        return sum((self.value(k) * v for k, v in chain.entries.items()), ZERO)


class BoundFunction:
    """Nonnegative rational bounds per index, with an +infinity marker.

    Used both for F on ball vertices and for f on complex cells; INF entries
    mean the corresponding constraint is omitted.
    """

    def __init__(self, values: Optional[Dict[int, object]] = None, default: object = INF):
        self.values: Dict[int, object] = {}
        for k, v in (values or {}).items():
            self.values[k] = self._check(v)
        self.default = self._check(default)

    @staticmethod
    def _check(v):
        if v is INF:
            return INF
        v = as_q(v)
        if v < 0:
            raise ValueError("bounds must be nonnegative")
        return v

    @classmethod
    def constant(cls, value) -> "BoundFunction":
        return cls({}, default=value)

    def get(self, key: int):
        return self.values.get(key, self.default)


# ---------------------------------------------------------------------------
# cocycle norm and condition (ii)
# ---------------------------------------------------------------------------


def cocycle_norm(cd: CocycleData, ball: CayleyBall) -> Tuple[Dict[int, Q], List[int]]:
    """||b||(g) = max_j |alpha_0(g I_{r_j})| per vertex.

    Vertices with some translate escaping the ball are omitted and returned
    in the flagged list.  Depends only on the cocycle: adding a coboundary dm
    changes each cycle sum by zero.
    """
    cached = cd._norm_cache.get(id(ball))
    if cached is not None:
        return cached
    norms: Dict[int, Q] = {}
    omitted: List[int] = []
    relators = ball.presentation.relators
    for vid in range(ball.num_vertices):
        best = ZERO
        ok = True
        for j in range(len(relators)):
            try:
                cyc = cycle_of_relation(relators[j], vid, ball)
            except EscapesBallError:
                ok = False
                break
            best = max(best, abs(cd.pair(cyc)))
        if ok:
            norms[vid] = best
        else:
            omitted.append(vid)
    cd._norm_cache[id(ball)] = (norms, omitted)
    return norms, omitted


def walk_sums(cd: CocycleData, F: BoundFunction, ball: CayleyBall, word: Word,
              base: int) -> Tuple[Q, object]:
    """(signed alpha_0 sum, F sum) along the walk, per stored-edge steps.

    The F sum is over the tails of the stored edges used by each step; it is
    INF when any step's bound is infinite.
    """
    lhs = ZERO
    rhs: object = ZERO
    cur = base
    for let in word:
        key, sign, cur = ball.traverse(cur, let)
        lhs += cd.value(key) * (ONE if sign > 0 else -ONE)
        if rhs is not INF:
            bound = F.get(key[0])
            rhs = INF if bound is INF else rhs + bound
    return lhs, rhs


@dataclass
class Violation:
    base: int
    word: Word
    lhs: Q
    rhs: Q


def check_condition_ii(cd: CocycleData, F: BoundFunction, ball: CayleyBall,
                       max_len: int, mode: str = "exhaustive",
                       count: Optional[int] = None, seed: Optional[int] = None,
                       enum_budget: int = 10**7) -> List[Violation]:
    """All (base, relation) pairs with |signed alpha_0 sum| > F sum.

    Relations come from enumerate_relations (so the check is a truncation in
    both length and radius); each class is tested translated to every base
    vertex whose walk stays in the ball.
    """
    classes = sorted(
        enumerate_relations(ball, max_len, mode=mode, count=count, seed=seed,
                            budget=enum_budget),
        key=lambda w: (len(w), word_key(w)),
    )
    violations: List[Violation] = []
    for w in classes:
        for base in range(ball.num_vertices):
            try:
                lhs, rhs = walk_sums(cd, F, ball, w, base)
            except EscapesBallError:
                continue
            if rhs is not INF and abs(lhs) > rhs:
                violations.append(Violation(base, w, lhs, rhs))
    return violations


# ---------------------------------------------------------------------------
# the primitive LP
# ---------------------------------------------------------------------------


@dataclass
class CertificateComponent:
    coefficient: Q
    base: int
    word: Word
    lhs: Q
    rhs: object  # Q or INF

    @property
    def violates(self) -> bool:
        return self.rhs is not INF and abs(self.lhs) > self.rhs


@dataclass
class PrimitiveResult:
    status: str  # "feasible" | "infeasible"
    m: Optional[Dict[int, Q]] = None
    farkas: Optional[List[Q]] = None
    farkas_cycle: Optional[GroupRingVec] = None
    components: List[CertificateComponent] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


def _primitive_problem(cd: CocycleData, F: BoundFunction, ball: CayleyBall):
    """Two <=-rows per constrained edge: |alpha_0(e) + m(head) - m(tail)| <= F(tail)."""
    rows: List[LPRow] = []
    constrained: List[int] = []
    for eid, (src, gen, dst) in enumerate(ball.edges):
        bound = F.get(src)
        if bound is INF:
            continue
        constrained.append(eid)
        alpha = cd.value((src, gen))
        coeffs: Dict[int, Q] = {}
        coeffs[dst] = coeffs.get(dst, ZERO) + ONE
        coeffs[src] = coeffs.get(src, ZERO) - ONE
        rows.append(LPRow(dict(coeffs), LE, bound - alpha))
        rows.append(LPRow({k: -v for k, v in coeffs.items()}, LE, bound + alpha))
    return LPProblem(ball.num_vertices, {}, rows, "min"), constrained


def find_primitive(cd: CocycleData, F: BoundFunction, ball: CayleyBall) -> PrimitiveResult:
    """Feasibility of |alpha_0(e) + dm(e)| <= F(tail e) over ball edges.

    Feasible: returns m with m(identity) = 0 (gauge fixed by translation; the
    system is invariant under adding constants).  Infeasible: returns verified
    Farkas multipliers, the weighted relation cycle they aggregate to, and its
    decomposition into relation cycles, at least one of which violates the
    walk inequality.
    """
    problem, constrained = _primitive_problem(cd, F, ball)
    sol = feasibility(problem)
    if sol.status == OPTIMAL:
        base = sol.x[0]
        m = {vid: sol.x[vid] - base for vid in range(ball.num_vertices)}
        for eid in constrained:
            src, gen, dst = ball.edges[eid]
            bound = F.get(src)
            if abs(cd.value((src, gen)) + m[dst] - m[src]) > bound:
                raise InternalSolverError("returned m violates a constraint")
        return PrimitiveResult("feasible", m=m)
    if sol.status != INFEASIBLE:
        raise InternalSolverError("feasibility LP cannot be unbounded")
    if not verify_farkas(problem, sol.farkas):
        raise InternalSolverError("farkas certificate failed to verify")

    cycle_entries: Dict[EdgeKey, Q] = {}
    weight = ZERO
    for k, eid in enumerate(constrained):
        src, gen, dst = ball.edges[eid]
        y_plus, y_minus = sol.farkas[2 * k], sol.farkas[2 * k + 1]
        net = y_plus - y_minus
        if net != 0:
            key = (src, gen)
            cycle_entries[key] = cycle_entries.get(key, ZERO) + net
        weight += (y_plus + y_minus) * F.get(src)
    z = GroupRingVec(cycle_entries)
    if boundary1(z, ball):
        raise InternalSolverError("farkas combination is not a cycle")
    if cd.pair(z) <= weight:
        raise InternalSolverError("farkas combination is not a contradiction")

    components = []
    any_violation = False
    for coeff, base, word in decompose_cycle(z, ball):
        lhs, rhs = walk_sums(cd, F, ball, word, base)
        comp = CertificateComponent(coeff, base, word, lhs, rhs)
        any_violation = any_violation or comp.violates
        components.append(comp)
    if not any_violation:
        raise InternalSolverError("certificate decomposed without a violating cycle")
    return PrimitiveResult("infeasible", farkas=list(sol.farkas),
                           farkas_cycle=z, components=components)


@dataclass
class Thm4Report:
    feasible: bool
    violations: List[Violation]
    primitive: PrimitiveResult
    agreement: bool
    truncation_note: Optional[str] = None


def check_thm4_equivalence(cd: CocycleData, F: BoundFunction, ball: CayleyBall,
                           max_len: int, mode: str = "exhaustive",
                           count: Optional[int] = None,
                           seed: Optional[int] = None) -> Thm4Report:
    """Run both sides of the equivalence and compare.

    Feasible must coincide with "no violation among enumerated relations";
    infeasible must come with a certificate decomposing into relation cycles
    at least one of which violates the inequality.  When the violating cycle
    lies outside the enumeration (too long), the disagreement is labeled as
    truncation rather than counted as one.
    """
    violations = check_condition_ii(cd, F, ball, max_len, mode=mode, count=count,
                                    seed=seed)
    prim = find_primitive(cd, F, ball)
    note = None
    if prim.feasible:
        agreement = not violations
    else:
        agreement = any(c.violates for c in prim.components)
        if agreement and not violations:
            note = ("violating certificate cycle lies outside the enumerated "
                    "relations (length or radius truncation)")
    return Thm4Report(prim.feasible, violations, prim, agreement, note)


# ---------------------------------------------------------------------------
# Question 2 on arbitrary finite complexes
# ---------------------------------------------------------------------------


class FiniteComplex:
    """Cell counts per dimension plus sparse integer boundary matrices.

    boundaries[q] maps q-cells to (q-1)-cells as triples (row, col, value);
    the composition of consecutive boundaries is checked to vanish at load.
    """

    def __init__(self, dims: Sequence[int], boundaries: Dict[int, List[Tuple[int, int, int]]]):
        self.dims = list(dims)
        self.boundaries = {int(q): [(int(r), int(c), int(v)) for r, c, v in trips]
                           for q, trips in boundaries.items()}
        for q, trips in self.boundaries.items():
            if not 1 <= q < len(self.dims):
                raise ValueError(f"boundary degree {q} out of range")
            for r, c, v in trips:
                if not (0 <= r < self.dims[q - 1] and 0 <= c < self.dims[q]):
                    raise ValueError(f"boundary {q} entry ({r},{c}) out of range")
        for q in self.boundaries:
            if q + 1 in self.boundaries:
                self._check_dd(q + 1)

    def _check_dd(self, q: int) -> None:
        lower = self.columns(q - 1) if q - 1 in self.boundaries else None
        if lower is None:
            return
        upper = self.columns(q)
        for c, col in enumerate(upper):
            acc: Dict[int, int] = {}
            for mid, v in col.items():
                for r, w in lower[mid].items():
                    acc[r] = acc.get(r, 0) + v * w
            if any(acc.values()):
                raise ValueError(f"boundary composition d{q-1} d{q} != 0 at cell {c}")

    def columns(self, q: int) -> List[Dict[int, int]]:
        cols: List[Dict[int, int]] = [dict() for _ in range(self.dims[q])]
        for r, c, v in self.boundaries.get(q, ()):
            if v:
                cols[c][r] = cols[c].get(r, 0) + v
        return cols

    @classmethod
    def from_json_dict(cls, data: dict) -> "FiniteComplex":
        return cls(data["dims"], {int(q): [tuple(t) for t in trips]
                                  for q, trips in data.get("boundaries", {}).items()})

    def to_json_dict(self) -> dict:
        return {"dims": list(self.dims),
                "boundaries": {str(q): [list(t) for t in trips]
                               for q, trips in sorted(self.boundaries.items())}}


@dataclass
class ComplexPrimitiveResult:
    status: str  # "feasible" | "infeasible"
    t: Optional[Dict[int, Q]] = None
    farkas: Optional[List[Q]] = None

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


def _consistent(rows: List[Tuple[Dict[int, Q], Q]]) -> bool:
    """Exact Gaussian elimination: does the sparse system have any solution?"""
    work = [(dict(c), as_q(r)) for c, r in rows]
    eliminated: List[Tuple[int, Dict[int, Q], Q]] = []
    for coeffs, rhs in work:
        for piv, pc, pr in eliminated:
            f = coeffs.get(piv)
            if f:
                for j, v in pc.items():
                    coeffs[j] = coeffs.get(j, ZERO) - f * v
                    if coeffs[j] == 0:
                        del coeffs[j]
                rhs -= f * pr
        coeffs = {j: v for j, v in coeffs.items() if v != 0}
        if not coeffs:
            if rhs != 0:
                return False
            continue
        piv = min(coeffs)
        inv = ONE / coeffs[piv]
        coeffs = {j: v * inv for j, v in coeffs.items()}
        eliminated.append((piv, coeffs, rhs * inv))
    return True


def complex_primitive(X: FiniteComplex, q: int, u: Dict[int, Q],
                      f: BoundFunction) -> ComplexPrimitiveResult:
    """Find t on (q-1)-cells with dt = u and |t| <= f, or a Farkas certificate.

    dt(c) = t(boundary of c), so the equality system is the transpose of the
    degree-q boundary matrix.  Exactness of u is verified first (ignoring
    bounds) and failures raise NotExactError, never Infeasible.
    """
    if q < 1 or q >= len(X.dims):
        raise ValueError(f"degree {q} out of range for the complex")
    if q not in X.boundaries:
        raise ValueError(f"complex has no degree-{q} boundary matrix")
    n_upper = X.dims[q]
    n_lower = X.dims[q - 1]
    u = {int(c): as_q(v) for c, v in u.items() if as_q(v) != 0}
    for c in u:
        if not 0 <= c < n_upper:
            raise ValueError("cochain index out of range")
    cols = X.columns(q)

    eq_rows: List[Tuple[Dict[int, Q], Q]] = []
    for c in range(n_upper):
        coeffs = {r: as_q(v) for r, v in cols[c].items()}
        eq_rows.append((coeffs, u.get(c, ZERO)))
    if not _consistent(eq_rows):
        raise NotExactError("dt = u has no solution: u is not exact")

    rows = [LPRow(dict(coeffs), EQ, rhs) for coeffs, rhs in eq_rows]
    for cell in range(n_lower):
        bound = f.get(cell)
        if bound is INF:
            continue
        rows.append(LPRow({cell: ONE}, LE, bound))
        rows.append(LPRow({cell: -ONE}, LE, bound))
    problem = LPProblem(n_lower, {}, rows, "min")
    sol = feasibility(problem)
    if sol.status == OPTIMAL:
        return ComplexPrimitiveResult("feasible", t={c: sol.x[c] for c in range(n_lower)})
    if sol.status != INFEASIBLE:
        raise InternalSolverError("feasibility LP cannot be unbounded")
    if not verify_farkas(problem, sol.farkas):
        raise InternalSolverError("farkas certificate failed to verify")
    return ComplexPrimitiveResult("infeasible", farkas=list(sol.farkas))
