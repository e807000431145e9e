"""Fox calculus and the chain complexes of the presentation 2-complex.

The free module R[G]^p is stored sparsely with one slot per (vertex, generator)
pair; under the edge dictionary (the slot e_s at g corresponds to the Cayley
edge g --s--> g*s) the same representation carries 1-chains, so the map eta
from group-ring vectors to edge chains is the identity here.  Everything is an
exact rational; there is no floating point in this module.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import EscapesBallError, NotARelationError, UnevaluablePairError
from .presentation import Word, concat, free_reduce, invert
from .rationals import ONE, ZERO, Q, as_q, q_str

SlotKey = Tuple[int, int]  # (vertex id, generator index)


class GroupRingVec:
    """Sparse rational element of R[G]^p, doubling as a 1-chain on ball edges."""

    __slots__ = ("entries",)

    def __init__(self, entries: Optional[Dict[SlotKey, Q]] = None):
        self.entries: Dict[SlotKey, Q] = {}
        if entries:
            for key, v in entries.items():
                v = as_q(v)
                if v != 0:
                    self.entries[key] = v

    def __bool__(self) -> bool:
        return bool(self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, GroupRingVec) and self.entries == other.entries

    def __hash__(self):
        return hash(frozenset(self.entries.items()))

    def __add__(self, other: "GroupRingVec") -> "GroupRingVec":
        out = dict(self.entries)
        for key, v in other.entries.items():
            out[key] = out.get(key, ZERO) + v
        return GroupRingVec(out)

    def __sub__(self, other: "GroupRingVec") -> "GroupRingVec":
        out = dict(self.entries)
        for key, v in other.entries.items():
            out[key] = out.get(key, ZERO) - v
        return GroupRingVec(out)

    def __neg__(self) -> "GroupRingVec":
        return GroupRingVec({k: -v for k, v in self.entries.items()})

    def scale(self, factor: Q) -> "GroupRingVec":
        factor = as_q(factor)
        return GroupRingVec({k: factor * v for k, v in self.entries.items()})

    def l1(self) -> Q:
        return sum((abs(v) for v in self.entries.values()), ZERO)

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self.entries.values())

    def sorted_items(self) -> List[Tuple[SlotKey, Q]]:
        return sorted(self.entries.items())

    def __repr__(self):
        inner = ", ".join(f"{k}:{q_str(v)}" for k, v in self.sorted_items())
        return f"GroupRingVec({{{inner}}})"

    def to_json(self, ball) -> list:
        pres = ball.presentation
        return [[pres.word_str(ball.vertex_words[vid]), pres.generators[gen], q_str(v)]
                for (vid, gen), v in self.sorted_items()]

    def digest(self) -> str:
        payload = ";".join(f"{vid},{gen},{q_str(v)}" for (vid, gen), v in self.sorted_items())
        return hashlib.sha256(payload.encode()).hexdigest()


class GroupRingScalar:
    """Sparse rational element of R[G] (vertex-indexed)."""

    __slots__ = ("entries",)

    def __init__(self, entries: Optional[Dict[int, Q]] = None):
        self.entries: Dict[int, Q] = {}
        if entries:
            for key, v in entries.items():
                v = as_q(v)
                if v != 0:
                    self.entries[key] = v

    def __bool__(self) -> bool:
        return bool(self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, GroupRingScalar) and self.entries == other.entries

    def l1(self) -> Q:
        return sum((abs(v) for v in self.entries.values()), ZERO)

    def __repr__(self):
        inner = ", ".join(f"{k}:{q_str(v)}" for k, v in sorted(self.entries.items()))
        return f"GroupRingScalar({{{inner}}})"


@dataclass(frozen=True)
class FillCertificate:
    """A finite combination sum_i tau_i * (g_i translate of relator j_i).

    Witnesses Delta^ab values: boundary2 of the certificate must reproduce the
    target 1-chain, and fill reports verify that before emission.  The target
    digest is kept for audit.
    """

    terms: Tuple[Tuple[Q, int, int], ...]  # (coefficient, vertex id, relator index)
    target_digest: Optional[str] = None

    @staticmethod
    def make(terms, target: Optional[GroupRingVec] = None) -> "FillCertificate":
        cleaned = tuple((as_q(t), vid, j) for t, vid, j in terms if as_q(t) != 0)
        return FillCertificate(cleaned, target.digest() if target is not None else None)

    def l1(self) -> Q:
        return sum((abs(t) for t, _, _ in self.terms), ZERO)

    def is_integral(self) -> bool:
        return all(t.denominator == 1 for t, _, _ in self.terms)

    def to_json(self, ball) -> list:
        pres = ball.presentation
        return [[q_str(t), pres.word_str(ball.vertex_words[vid]), j]
                for t, vid, j in self.terms]


# ---------------------------------------------------------------------------
# the maps theta, I_w, boundary_1, boundary_2
# ---------------------------------------------------------------------------


def fox_theta(word: Word, ball, base: int = 0) -> GroupRingVec:
    """theta([w]) by the prefix formula: +g_i e_{s_i} on positive letters,
    -g_{i+1} e_{s_i} on negative ones, with g_i the prefix before letter i."""
    entries: Dict[SlotKey, Q] = {}
    cur = base
    for let in word:
        gen = abs(let) - 1
        if let > 0:
            key = (cur, gen)
            entries[key] = entries.get(key, ZERO) + ONE
            nxt = ball.step(cur, let)
        else:
            nxt = ball.step(cur, let)
            if nxt is not None:
                key = (nxt, gen)
                entries[key] = entries.get(key, ZERO) - ONE
        if nxt is None:
            raise EscapesBallError("prefix escapes the ball")
        cur = nxt
    return GroupRingVec(entries)


def cycle_of_relation(word: Word, base: int, ball) -> GroupRingVec:
    """I_w at the given base vertex: the signed edge chain of the closed walk.

    Raises NotARelationError when the walk does not close up, and
    EscapesBallError when it leaves the ball.
    """
    entries: Dict[SlotKey, Q] = {}
    cur = base
    for let in word:
        key, sign, cur = ball.traverse(cur, let)
        entries[key] = entries.get(key, ZERO) + (ONE if sign > 0 else -ONE)
    if cur != base:
        raise NotARelationError("word does not close up at its base vertex")
    return GroupRingVec(entries)


def boundary1(x: GroupRingVec, ball) -> GroupRingScalar:
    """partial_1(g e_s) = g*s - g, extended linearly."""
    out: Dict[int, Q] = {}
    for (vid, gen), tau in x.entries.items():
        target = ball.step(vid, gen + 1)
        if target is None:
            raise EscapesBallError("boundary target escapes the ball")
        out[target] = out.get(target, ZERO) + tau
        out[vid] = out.get(vid, ZERO) - tau
    return GroupRingScalar(out)


def boundary2(cert: FillCertificate, ball) -> GroupRingVec:
    """Sum of tau_i times the g_i-translate of theta(r_{j_i})."""
    total = GroupRingVec()
    for tau, vid, j in cert.terms:
        relator = ball.presentation.relators[j]
        total = total + cycle_of_relation(relator, vid, ball).scale(tau)
    return total


def translate(x: GroupRingVec, g_vid: int, ball) -> GroupRingVec:
    """Left-translate by a ball vertex: g*(h, s) = (g h, s); raises on escape."""
    out: Dict[SlotKey, Q] = {}
    for (vid, gen), tau in x.entries.items():
        moved = ball.walk(g_vid, ball.vertex_words[vid])
        key = (moved, gen)
        out[key] = out.get(key, ZERO) + tau
    return GroupRingVec(out)


# ---------------------------------------------------------------------------
# bar-complex fragments (degree <= 2)
# ---------------------------------------------------------------------------


@dataclass
class BarCochain1:
    """A 1-cochain on pairs, stored through its edge restriction.

    Only the canonical-primitive data is materialized: a constant part, an
    optional vertex potential m contributing m(g1) - m(g0), and optional edge
    values alpha_0 that are evaluable only when the pair is a stored ball
    edge.  Pairs outside that domain raise UnevaluablePairError.
    """

    constant: Q = ZERO
    potential: Optional[Dict[int, Q]] = None
    edge_values: Optional[Dict[SlotKey, Q]] = None

    def evaluate(self, g0: int, g1: int, ball) -> Q:
        total = as_q(self.constant)
        if self.potential is not None:
            total += self.potential.get(g1, ZERO) - self.potential.get(g0, ZERO)
        if self.edge_values is not None:
            found = False
            for gen in range(ball.presentation.num_generators):
                if ball.step(g0, gen + 1) == g1:
                    total += self.edge_values.get((g0, gen), ZERO)
                    found = True
            if not found:
                raise UnevaluablePairError(
                    f"pair ({g0}, {g1}) is not a stored edge of the ball")
        return total


def bar_coboundary(a: BarCochain1, triple: Tuple[int, int, int], ball) -> Q:
    """da(g0, g1, g2) = a(g1, g2) - a(g0, g2) + a(g0, g1)."""
    g0, g1, g2 = triple
    return a.evaluate(g1, g2, ball) - a.evaluate(g0, g2, ball) + a.evaluate(g0, g1, ball)


def psi2(relator_index: int, ball) -> List[Tuple[int, int]]:
    """The cone chain over I_{r_j}: the bar 2-chain sum_i [g_i | s_i^eps_i],
    returned as (prefix vertex, signed letter) pairs with unit coefficients."""
    relator = ball.presentation.relators[relator_index]
    if not relator:
        raise ValueError("empty relator")
    out = []
    cur = 0
    for let in relator:
        out.append((cur, let))
        nxt = ball.step(cur, let)
        if nxt is None:
            raise EscapesBallError("relator prefix escapes the ball")
        cur = nxt
    return out


def chi1(g_vid: int, ball) -> GroupRingVec:
    """Fox-derivative chain of the canonical word nu(g)."""
    return fox_theta(ball.vertex_words[g_vid], ball, base=0)


def chi2(g_vid: int, h_vid: int, ball, budget: int = 10000) -> FillCertificate:
    """Integer filling of I over the relation nu(g) nu(h) nu(gh)^{-1}.

    chi_2([g|h]) needs a choice of decomposition; the deterministic choice
    here is the branch-and-bound integer filling (minimal within the ball).
    """
    from .filling import fill_int

    nu_g = ball.vertex_words[g_vid]
    nu_h = ball.vertex_words[h_vid]
    gh = ball.walk(g_vid, nu_h)
    word = free_reduce(concat(concat(nu_g, nu_h), invert(ball.vertex_words[gh])))
    if not word:
        return FillCertificate.make([], GroupRingVec())
    z = cycle_of_relation(word, 0, ball)
    report = fill_int(z, ball, budget=budget)
    return report.certificate
