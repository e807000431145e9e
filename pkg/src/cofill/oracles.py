"""Word-problem oracles producing canonical normal forms.

An oracle answers the word problem of a presentation by mapping every word to
a canonical representative; two words get the same normal form iff they are
equal in the group the oracle computes in.  All higher layers treat group
elements as opaque canonical words, which keeps Cayley-ball construction
oracle-agnostic.

Built-in kinds: FreeGroupOracle, AbelianizedOracle, DehnSmallCancellationOracle
(C'(1/6) presentations), FiniteTableOracle.  New oracles subclass Oracle and
implement normal_form; see cofill.groups.HeisenbergOracle for a worked example
of the extension point.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

from .presentation import (
    EMPTY,
    Presentation,
    Word,
    concat,
    exponent_vector,
    free_reduce,
    invert,
    letter_key,
    rotations,
)


class OracleError(ValueError):
    pass


class SmallCancellationError(OracleError):
    """The symmetrized relator set fails the C'(1/6) piece condition."""


class NormalFormCapExceeded(OracleError):
    """A Dehn-oracle normal form would need a canonical table beyond the cap."""


class Oracle:
    """Extension point: subclass and implement normal_form.

    normal_form must be idempotent and constant on group elements; everything
    else has workable defaults.
    """

    name = "abstract"

    def __init__(self, presentation: Presentation):
        self.presentation = presentation

    def normal_form(self, word: Word) -> Word:
        raise NotImplementedError

    def product_normal_form(self, canonical: Word, let: int) -> Word:
        """Normal form of (canonical word) * letter; hook for fast paths."""
        return self.normal_form(canonical + (let,))

    def prepare_radius(self, radius: int) -> None:
        """Warm any internal tables needed to resolve products within B(radius)."""

    def step_normal_form(self, canonical: Word, let: int) -> Optional[Word]:
        """Like product_normal_form, but may return None for "not resolvable
        within the prepared radius" (used by ball construction to mean the
        target is outside the ball)."""
        return self.product_normal_form(canonical, let)

    def is_identity(self, word: Word) -> bool:
        return self.normal_form(word) == EMPTY

    def equals(self, u: Word, v: Word) -> bool:
        return self.is_identity(concat(u, invert(v)))


class FreeGroupOracle(Oracle):
    """Free reduction is the normal form; valid when the group is free on S."""

    name = "free"

    def normal_form(self, word: Word) -> Word:
        return free_reduce(word)


def _xgcd(a: int, b: int):
    x, next_x = 1, 0
    y, next_y = 0, 1
    g, next_g = a, b
    while next_g:
        q = g // next_g
        x, next_x = next_x, x - q * next_x
        y, next_y = next_y, y - q * next_y
        g, next_g = next_g, g - q * next_g
    if g < 0:
        x, y, g = -x, -y, -g
    return x, y, g


def _column_hnf(columns: List[List[int]], nrows: int) -> List[Tuple[int, List[int]]]:
    """Echelon basis of the integer column lattice: list of (pivot_row, column).

    Pivot entries are positive and each column is zero above its pivot row, so
    reducing a vector against pivots in ascending row order yields a canonical
    coset representative.
    """
    work = [c[:] for c in columns if any(c)]
    pivots: List[Tuple[int, List[int]]] = []
    for row in range(nrows):
        active = [c for c in work if c[row] != 0]
        if not active:
            continue
        base = active[0]
        for other in active[1:]:
            a, b = base[row], other[row]
            if b % a == 0:
                q = -(b // a)
                for r in range(nrows):
                    other[r] += q * base[r]
            else:
                x, y, g = _xgcd(a, b)
                mbg, ag = -b // g, a // g
                for r in range(nrows):
                    aa, bb = base[r], other[r]
                    base[r] = x * aa + y * bb
                    other[r] = mbg * aa + ag * bb
        if base[row] < 0:
            for r in range(nrows):
                base[r] = -base[r]
        pivots.append((row, base))
        work = [c for c in work if c is not base and any(c)]
    return pivots


class AbelianizedOracle(Oracle):
    """Normal forms in the abelianization Z^p / <relator exponent vectors>.

    Canonical form is the exponent-sorted word a^e1 b^e2 ... with the exponent
    vector HNF-reduced against the relator lattice (so torsion quotients get
    correct representatives).  This is a word-problem oracle for G itself only
    when G is abelian.
    """

    name = "abelianized"

    def __init__(self, presentation: Presentation):
        super().__init__(presentation)
        p = presentation.num_generators
        cols = [list(exponent_vector(r, p)) for r in presentation.relators]
        self._pivots = _column_hnf(cols, p)

    def _reduce_vector(self, vec: List[int]) -> Tuple[int, ...]:
        for row, col in self._pivots:
            q = vec[row] // col[row]
            if q:
                for r in range(row, len(vec)):
                    vec[r] -= q * col[r]
        return tuple(vec)

    def normal_form(self, word: Word) -> Word:
        vec = self._reduce_vector(list(exponent_vector(word, self.presentation.num_generators)))
        out: List[int] = []
        for i, e in enumerate(vec):
            out.extend([i + 1 if e > 0 else -(i + 1)] * abs(e))
        return tuple(out)


class FiniteTableOracle(Oracle):
    """Word problem of a finite group given by its multiplication table.

    table[i][j] is the product of elements i and j; generator_images maps each
    presentation generator to an element index.  Group axioms and relator
    consistency are checked at construction.
    """

    name = "finite-table"

    def __init__(self, presentation: Presentation, table: Sequence[Sequence[int]],
                 generator_images: Sequence[int]):
        super().__init__(presentation)
        n = len(table)
        if any(len(row) != n for row in table):
            raise OracleError("multiplication table is not square")
        if len(generator_images) != presentation.num_generators:
            raise OracleError("one generator image required per generator")
        if any(not (0 <= g < n) for g in generator_images):
            raise OracleError("generator image out of range")
        self.table = [list(row) for row in table]
        identity = None
        for e in range(n):
            if all(self.table[e][x] == x and self.table[x][e] == x for x in range(n)):
                identity = e
                break
        if identity is None:
            raise OracleError("table has no identity")
        self.identity = identity
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    if self.table[self.table[a][b]][c] != self.table[a][self.table[b][c]]:
                        raise OracleError("table is not associative")
        self.inverse = [None] * n
        for a in range(n):
            for b in range(n):
                if self.table[a][b] == identity and self.table[b][a] == identity:
                    self.inverse[a] = b
            if self.inverse[a] is None:
                raise OracleError(f"element {a} has no inverse")
        self.generator_images = list(generator_images)
        for idx, rel in enumerate(presentation.relators):
            if self._fold(rel) != identity:
                raise OracleError(f"relator {idx} does not hold in the table")
        self._canonical = self._bfs_canonical_words()

    def _fold(self, word: Word) -> int:
        e = self.identity
        for let in word:
            img = self.generator_images[abs(let) - 1]
            if let < 0:
                img = self.inverse[img]
            e = self.table[e][img]
        return e

    def _bfs_canonical_words(self) -> Dict[int, Word]:
        letters = sorted(
            [l for i in range(self.presentation.num_generators) for l in (i + 1, -(i + 1))],
            key=letter_key,
        )
        canon: Dict[int, Word] = {self.identity: EMPTY}
        frontier = [self.identity]
        while frontier:
            new = []
            for e in frontier:
                for let in letters:
                    img = self.generator_images[abs(let) - 1]
                    if let < 0:
                        img = self.inverse[img]
                    t = self.table[e][img]
                    if t not in canon:
                        canon[t] = canon[e] + (let,)
                        new.append(t)
            frontier = new
        return canon

    def normal_form(self, word: Word) -> Word:
        e = self._fold(word)
        if e not in self._canonical:
            raise OracleError("element not generated by the generator images")
        return self._canonical[e]


def symmetrized_relators(presentation: Presentation) -> Tuple[Word, ...]:
    """All cyclic rotations of every relator and of its inverse, deduplicated."""
    seen = []
    seen_set = set()
    for rel in presentation.relators:
        for base in (rel, invert(rel)):
            for rot in rotations(base):
                if rot not in seen_set:
                    seen_set.add(rot)
                    seen.append(rot)
    return tuple(seen)


def check_small_cancellation(presentation: Presentation, denominator: int = 6) -> None:
    """Raise SmallCancellationError unless the presentation is C'(1/denominator).

    Pieces are enumerated as common prefixes of distinct symmetrized relators;
    proper-power relators fail outright (they overlap themselves).
    """
    if not presentation.relators:
        raise SmallCancellationError("no relators; use the free-group oracle")
    for idx, rel in enumerate(presentation.relators):
        for k, rot in enumerate(rotations(rel)):
            if k and rot == rel:
                raise SmallCancellationError(f"relator {idx} is a proper power")
    sym = symmetrized_relators(presentation)
    for i, u in enumerate(sym):
        for v in sym[i + 1:]:
            lcp = 0
            for a, b in zip(u, v):
                if a != b:
                    break
                lcp += 1
            if lcp and denominator * lcp >= min(len(u), len(v)):
                raise SmallCancellationError(
                    f"piece of length {lcp} violates C'(1/{denominator}) "
                    f"(relator length {min(len(u), len(v))})"
                )


class DehnSmallCancellationOracle(Oracle):
    """Dehn's algorithm plus a shortlex canonical table for C'(1/6) groups.

    Checked at construction.  Words reduce by replacing any subword that is
    more than half of a symmetrized relator with the inverse of its complement
    (Greendlinger: every nontrivial reduced relation contains one, so the empty
    word is reached iff the word is trivial).  Canonical forms come from an
    equality-tested BFS table of shortlex geodesic words, grown on demand up to
    normal_form_radius_cap.
    """

    name = "dehn"

    def __init__(self, presentation: Presentation, normal_form_radius_cap: int = 6,
                 max_elements: int = 10**6):
        super().__init__(presentation)
        check_small_cancellation(presentation)
        self.symmetrized = symmetrized_relators(presentation)
        self._by_first: Dict[int, List[Word]] = {}
        for u in self.symmetrized:
            self._by_first.setdefault(u[0], []).append(u)
        self.normal_form_radius_cap = normal_form_radius_cap
        self.max_elements = max_elements
        self._letters = sorted(
            [l for i in range(presentation.num_generators) for l in (i + 1, -(i + 1))],
            key=letter_key,
        )
        # canonical table state
        self._canon: List[Word] = [EMPTY]
        self._dist: List[int] = [0]
        self._index: Dict[Word, int] = {EMPTY: 0}
        self._buckets: Dict[Tuple[int, ...], List[int]] = {(0,) * presentation.num_generators: [0]}
        self._steps: Dict[Tuple[int, int], int] = {}
        self._built_radius = 0

    # -- Dehn reduction ----------------------------------------------------

    def dehn_reduce(self, word: Word) -> Word:
        w = free_reduce(word)
        changed = True
        while changed:
            changed = False
            n = len(w)
            for i in range(n):
                for u in self._by_first.get(w[i], ()):
                    m = 0
                    while m < len(u) and i + m < n and w[i + m] == u[m]:
                        m += 1
                    if 2 * m > len(u):
                        w = free_reduce(w[:i] + invert(u[m:]) + w[i + m:])
                        changed = True
                        break
                if changed:
                    break
        return w

    def is_identity(self, word: Word) -> bool:
        return self.dehn_reduce(word) == EMPTY

    # -- canonical table ---------------------------------------------------

    def _abelian(self, word: Word) -> Tuple[int, ...]:
        return exponent_vector(word, self.presentation.num_generators)

    def _locate(self, word: Word, dists: Optional[Tuple[int, ...]] = None) -> Optional[int]:
        for vid in self._buckets.get(self._abelian(word), ()):
            if dists is not None and self._dist[vid] not in dists:
                continue
            if self.is_identity(concat(word, invert(self._canon[vid]))):
                return vid
        return None

    def build_to_radius(self, radius: int) -> None:
        while self._built_radius < radius:
            d = self._built_radius
            frontier = [vid for vid in range(len(self._canon)) if self._dist[vid] == d]
            for vid in frontier:
                for let in self._letters:
                    if (vid, let) in self._steps:
                        continue
                    w = concat(self._canon[vid], (let,))
                    target = self._index.get(w)
                    if target is None:
                        target = self._locate(w, dists=(d - 1, d, d + 1))
                    if target is None:
                        if len(self._canon) >= self.max_elements:
                            raise OracleError("canonical table budget exceeded")
                        target = len(self._canon)
                        self._canon.append(w)
                        self._dist.append(d + 1)
                        self._index[w] = target
                        self._buckets.setdefault(self._abelian(w), []).append(target)
                    self._steps[(vid, let)] = target
                    self._steps[(target, -let)] = vid
            self._built_radius = d + 1
        # seal edges among boundary vertices of the built radius
        for vid in range(len(self._canon)):
            if self._dist[vid] != radius:
                continue
            for let in self._letters:
                if (vid, let) in self._steps:
                    continue
                w = concat(self._canon[vid], (let,))
                target = self._index.get(w)
                if target is None:
                    target = self._locate(w, dists=(radius - 1, radius))
                if target is not None:
                    self._steps[(vid, let)] = target
                    self._steps[(target, -let)] = vid

    def normal_form(self, word: Word) -> Word:
        w = self.dehn_reduce(word)
        if not w:
            return EMPTY
        if len(w) > self.normal_form_radius_cap:
            raise NormalFormCapExceeded(
                f"Dehn-reduced length {len(w)} exceeds cap {self.normal_form_radius_cap}"
            )
        self.build_to_radius(len(w))
        vid = self._locate(w)
        if vid is None:
            raise OracleError("canonical table lookup failed")  # unreachable
        return self._canon[vid]

    def product_normal_form(self, canonical: Word, let: int) -> Word:
        vid = self._index.get(canonical)
        if vid is not None:
            target = self._steps.get((vid, let))
            if target is not None:
                return self._canon[target]
        return self.normal_form(canonical + (let,))

    def prepare_radius(self, radius: int) -> None:
        self.build_to_radius(radius)

    def step_normal_form(self, canonical: Word, let: int) -> Optional[Word]:
        vid = self._index.get(canonical)
        if vid is not None and self._dist[vid] <= self._built_radius:
            target = self._steps.get((vid, let))
            # absent step from a sealed vertex means the target is outside
            # the built radius
            return None if target is None else self._canon[target]
        return self.normal_form(canonical + (let,))
