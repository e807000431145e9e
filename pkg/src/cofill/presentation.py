"""Finite presentations and free-group word algebra.

A word is a tuple of nonzero ints: generator i (0-based) is the letter i+1,
its inverse is -(i+1).  This keeps the ball-enumeration hot path on machine
ints.  Letters are ordered a < a^-1 < b < b^-1 < ... (see letter_key), which
fixes every lexicographic tie-break in the package.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence, Tuple

Word = Tuple[int, ...]

EMPTY: Word = ()

MAX_EXPONENT = 10**6  # cap on a^k expansion while parsing

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class PresentationError(ValueError):
    pass


class ParseError(PresentationError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def letter(gen_index: int, sign: int) -> int:
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return sign * (gen_index + 1)


def gen_of(let: int) -> int:
    return abs(let) - 1


def sign_of(let: int) -> int:
    return 1 if let > 0 else -1


def letter_pairs(word: Word) -> Iterator[Tuple[int, int]]:
    """Yield (generator-index, sign) pairs."""
    for let in word:
        yield gen_of(let), sign_of(let)


def make_word(pairs: Iterable[Tuple[int, int]]) -> Word:
    return tuple(letter(g, s) for g, s in pairs)


def letter_key(let: int) -> int:
    # a=0, a^-1=1, b=2, b^-1=3, ...
    return 2 * (abs(let) - 1) + (0 if let > 0 else 1)


def word_key(word: Word) -> Tuple[int, ...]:
    return tuple(letter_key(x) for x in word)


def shortlex_key(word: Word) -> Tuple[int, Tuple[int, ...]]:
    return (len(word), word_key(word))


def free_reduce(word: Sequence[int]) -> Word:
    """Cancel adjacent inverse pairs; idempotent and length-nonincreasing."""
    out: list[int] = []
    for let in word:
        if out and out[-1] == -let:
            out.pop()
        else:
            out.append(let)
    return tuple(out)


def invert(word: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(word))


def concat(u: Sequence[int], v: Sequence[int]) -> Word:
    """Concatenate and reduce the seam (inputs assumed reduced)."""
    out = list(u)
    for let in v:
        if out and out[-1] == -let:
            out.pop()
        else:
            out.append(let)
    return tuple(out)


def cyclic_reduce(word: Sequence[int]) -> Word:
    w = free_reduce(word)
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == -w[j - 1]:
        i += 1
        j -= 1
    return tuple(w[i:j])


def is_reduced(word: Sequence[int]) -> bool:
    return all(word[i] != -word[i + 1] for i in range(len(word) - 1))


def is_cyclically_reduced(word: Sequence[int]) -> bool:
    if not is_reduced(word):
        return False
    return len(word) < 2 or word[0] != -word[-1]


def power(word: Sequence[int], n: int) -> Word:
    if n < 0:
        return power(invert(word), -n)
    out: Word = EMPTY
    for _ in range(n):
        out = concat(out, word)
    return out


def exponent_vector(word: Sequence[int], num_gens: int) -> Tuple[int, ...]:
    vec = [0] * num_gens
    for let in word:
        vec[abs(let) - 1] += 1 if let > 0 else -1
    return tuple(vec)


def rotations(word: Word) -> Iterator[Word]:
    for k in range(len(word)):
        yield word[k:] + word[:k]


def canonical_cyclic(word: Word) -> Word:
    """Least rotation of word or of its inverse, under word_key order.

    This is the dedup key for relation classes: the quantities attached to a
    relation (|w|, Delta values, I_w up to translation) are invariant under
    rotation and inversion.
    """
    if not word:
        return EMPTY
    best = None
    for cand in (word, invert(word)):
        for rot in rotations(cand):
            k = word_key(rot)
            if best is None or k < best[0]:
                best = (k, rot)
    return best[1]


@dataclass(frozen=True)
class Presentation:
    """A finite presentation <generators | relators>.

    Relators must come in freely and cyclically reduced, nonempty.  Instances
    are immutable and shareable across threads.
    """

    generators: Tuple[str, ...]
    relators: Tuple[Word, ...] = ()

    def __post_init__(self):
        seen = set()
        for name in self.generators:
            if not _IDENT.match(name or ""):
                raise PresentationError(f"invalid generator name: {name!r}")
            if name in seen:
                raise PresentationError(f"duplicate generator name: {name!r}")
            seen.add(name)
        p = len(self.generators)
        for idx, rel in enumerate(self.relators):
            if not rel:
                raise PresentationError(f"relator {idx} is empty")
            if any(not (1 <= abs(x) <= p) for x in rel):
                raise PresentationError(f"relator {idx} uses an unknown generator")
            if not is_cyclically_reduced(rel):
                raise PresentationError(
                    f"relator {idx} is not freely and cyclically reduced"
                )

    @property
    def num_generators(self) -> int:
        return len(self.generators)

    @property
    def num_relators(self) -> int:
        return len(self.relators)

    def word_str(self, word: Word) -> str:
        """Render a word in the input grammar (runs compressed as name^k)."""
        if not word:
            return ""
        parts = []
        i = 0
        while i < len(word):
            j = i
            while j < len(word) and word[j] == word[i]:
                j += 1
            name = self.generators[abs(word[i]) - 1]
            exp = (j - i) * (1 if word[i] > 0 else -1)
            parts.append(name if exp == 1 else f"{name}^{exp}")
            i = j
        return " ".join(parts)

    def parse_word(self, text: str) -> Word:
        """Parse a whitespace-separated word; returns the freely reduced form."""
        return free_reduce(_parse_atoms(text, self.generators, line=1))


def _parse_atoms(text: str, generators: Sequence[str], line: int) -> list[int]:
    gen_index = {name: i for i, name in enumerate(generators)}
    letters: list[int] = []
    col = 1
    for raw in text.split(" "):
        tok = raw.strip()
        if not tok:
            col += len(raw) + 1
            continue
        m = re.match(r"([A-Za-z_][A-Za-z0-9_]*)(?:\^(-?\d+))?\Z", tok)
        if not m:
            raise ParseError(f"bad atom {tok!r}", line, col)
        name, exp_s = m.group(1), m.group(2)
        if name not in gen_index:
            raise ParseError(f"unknown generator {name!r}", line, col)
        exp = 1 if exp_s is None else int(exp_s)
        if abs(exp) > MAX_EXPONENT:
            raise ParseError(f"exponent {exp} exceeds cap {MAX_EXPONENT}", line, col)
        let = gen_index[name] + 1
        letters.extend([let if exp > 0 else -let] * abs(exp))
        col += len(raw) + 1
    return letters


def parse_presentation(text: str) -> Presentation:
    """Parse the line-oriented presentation grammar.

    `gens a b` declares generators; `rels w ; w ; ...` declares relators.
    Statements are separated by `;` or newlines; `#` starts a comment.
    Relators are freely and cyclically reduced; empty results are rejected.
    """
    generators: Optional[Tuple[str, ...]] = None
    relator_segments: list[Tuple[str, int, int]] = []  # (text, line, col)
    in_rels = False

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        code = raw_line.split("#", 1)[0]
        col = 1
        for seg in code.split(";"):
            stripped = seg.strip()
            offset = col + len(seg) - len(seg.lstrip())
            col += len(seg) + 1
            if not stripped:
                continue
            head, _, rest = stripped.partition(" ")
            if head == "gens":
                if generators is not None:
                    raise ParseError("duplicate gens statement", lineno, offset)
                names = rest.split()
                if not names:
                    raise ParseError("gens statement lists no generators", lineno, offset)
                generators = tuple(names)
                in_rels = False
            elif head == "rels":
                in_rels = True
                if rest.strip():
                    relator_segments.append((rest, lineno, offset))
            elif in_rels:
                relator_segments.append((stripped, lineno, offset))
            else:
                raise ParseError(f"expected 'gens' or 'rels', got {stripped!r}", lineno, offset)

    if generators is None:
        raise ParseError("no gens statement", 1, 1)

    try:
        probe = Presentation(generators)
    except PresentationError as exc:
        raise ParseError(str(exc), 1, 1) from exc

    relators = []
    for seg, lineno, offset in relator_segments:
        try:
            letters = _parse_atoms(seg, generators, line=lineno)
        except ParseError:
            raise
        rel = cyclic_reduce(free_reduce(letters))
        if not rel:
            raise ParseError(f"relator {seg!r} is empty after reduction", lineno, offset)
        relators.append(rel)
    del probe
    return Presentation(generators, tuple(relators))
