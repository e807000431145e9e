"""Built-in presentation library with matched default oracles.

Ships the groups the acceptance suite needs, so no external files are
required: z2, free2, surface2 (genus-2 surface group), heisenberg.  The
Heisenberg oracle doubles as the worked example of the oracle extension
point: a polynomial normal form a^i b^j c^k rather than one of the stock
kinds.
"""

from __future__ import annotations

from typing import Dict, Tuple

from .oracles import (
    AbelianizedOracle,
    DehnSmallCancellationOracle,
    FreeGroupOracle,
    Oracle,
    OracleError,
)
from .presentation import Presentation, Word, parse_presentation
from .primitive import FiniteComplex

Z2_TEXT = "gens a b ; rels a b a^-1 b^-1"
FREE2_TEXT = "gens a b ; rels"
SURFACE2_TEXT = "gens a b c d ; rels a b a^-1 b^-1 c d c^-1 d^-1"
HEISENBERG_TEXT = "gens a b c ; rels a b a^-1 b^-1 c^-1 ; a c a^-1 c^-1 ; b c b^-1 c^-1"


class HeisenbergOracle(Oracle):
    """Normal form a^i b^j c^k for <a,b,c | [a,b]=c, c central>.

    Folds letters left to right through the coordinates (i, j, k); moving a
    past b^j costs c^{-j}.  Relators are checked to fold to the identity.
    """

    name = "heisenberg"

    def __init__(self, presentation: Presentation):
        super().__init__(presentation)
        if presentation.num_generators != 3:
            raise OracleError("heisenberg oracle needs generators a, b, c")
        for idx, rel in enumerate(presentation.relators):
            if self._fold(rel) != (0, 0, 0):
                raise OracleError(f"relator {idx} does not hold in the Heisenberg group")

    @staticmethod
    def _fold(word: Word) -> Tuple[int, int, int]:
        i = j = k = 0
        for let in word:
            gen = abs(let) - 1
            s = 1 if let > 0 else -1
            if gen == 0:
                i += s
                k -= s * j
            elif gen == 1:
                j += s
            else:
                k += s
        return i, j, k

    def normal_form(self, word: Word) -> Word:
        i, j, k = self._fold(word)
        out = []
        out.extend([1 if i > 0 else -1] * abs(i))
        out.extend([2 if j > 0 else -2] * abs(j))
        out.extend([3 if k > 0 else -3] * abs(k))
        return tuple(out)


_BUILTINS = {
    "z2": (Z2_TEXT, AbelianizedOracle),
    "free2": (FREE2_TEXT, FreeGroupOracle),
    "surface2": (SURFACE2_TEXT, DehnSmallCancellationOracle),
    "heisenberg": (HEISENBERG_TEXT, HeisenbergOracle),
}

ORACLE_KINDS = {
    "free": FreeGroupOracle,
    "abelianized": AbelianizedOracle,
    "dehn": DehnSmallCancellationOracle,
}

_oracle_cache: Dict[str, Tuple[Presentation, Oracle]] = {}


def builtin_names():
    return sorted(_BUILTINS)


def builtin_group(name: str) -> Tuple[Presentation, Oracle]:
    """Presentation plus its matched default oracle; oracles are cached so
    that Dehn canonical tables are shared within a process."""
    if name not in _BUILTINS:
        raise KeyError(f"unknown builtin group {name!r} (have {', '.join(builtin_names())})")
    if name not in _oracle_cache:
        text, kind = _BUILTINS[name]
        pres = parse_presentation(text)
        _oracle_cache[name] = (pres, kind(pres))
    return _oracle_cache[name]


def make_oracle(kind: str, presentation: Presentation) -> Oracle:
    if kind not in ORACLE_KINDS:
        raise KeyError(f"unknown oracle kind {kind!r} (have {', '.join(sorted(ORACLE_KINDS))})")
    return ORACLE_KINDS[kind](presentation)


def octahedron_complex() -> FiniteComplex:
    """The octahedron 2-sphere: 6 vertices, 12 edges, 8 oriented triangles."""
    verts = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
    edges = []
    edge_index = {}
    for i in range(6):
        for j in range(i + 1, 6):
            if any(a + b != 0 for a, b in zip(verts[i], verts[j])):  # not antipodal
                edge_index[(i, j)] = len(edges)
                edges.append((i, j))
    faces = []
    for sx in (1, -1):
        for sy in (1, -1):
            for sz in (1, -1):
                x = 0 if sx > 0 else 1
                y = 2 if sy > 0 else 3
                z = 4 if sz > 0 else 5
                faces.append((x, y, z))
    b1 = []
    for eid, (i, j) in enumerate(edges):
        b1.append((j, eid, 1))
        b1.append((i, eid, -1))
    b2 = []
    for fid, (v0, v1, v2) in enumerate(faces):
        # simplicial boundary (v1,v2) - (v0,v2) + (v0,v1); faces come sorted
        for (a, b), sign in (((v1, v2), 1), ((v0, v2), -1), ((v0, v1), 1)):
            b2.append((edge_index[(a, b)], fid, sign))
    return FiniteComplex([6, 12, 8], {1: b1, 2: b2})
