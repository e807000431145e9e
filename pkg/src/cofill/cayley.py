"""Finite Cayley balls: construction, relation enumeration, cycle bases.

A ball B_S(r) holds every group element at word-metric distance <= r from the
identity, as canonical words supplied by the oracle.  Vertex numbering is BFS
order with same-level ties broken by shortlex canonical word, so balls are
deterministic and monotone: vertices(r) is a prefix of vertices(r+1).

Edges are stored once per positive generator: (src, gen, dst) means
src * gen = dst, and exists iff both endpoints lie in the ball.  Edge-keyed
payloads elsewhere in the package use the (src, gen) pair as the edge key.
"""

from __future__ import annotations

import random
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .errors import (
    BallBudgetError,
    EnumerationBudgetError,
    EscapesBallError,
)
from .oracles import Oracle
from .presentation import (
    EMPTY,
    Presentation,
    Word,
    canonical_cyclic,
    cyclic_reduce,
    free_reduce,
    letter_key,
    shortlex_key,
    word_key,
)

EdgeKey = Tuple[int, int]  # (src vertex id, generator index)


class CayleyBall:
    def __init__(self, presentation: Presentation, oracle: Oracle, radius: int,
                 vertex_words: List[Word], word_len: List[int],
                 edges: List[Tuple[int, int, int]]):
        self.presentation = presentation
        self.oracle = oracle
        self.radius = radius
        self.vertex_words = vertex_words
        self.word_len = word_len
        self.edges = edges
        self.vertex_index: Dict[Word, int] = {w: i for i, w in enumerate(vertex_words)}
        self.edge_id: Dict[EdgeKey, int] = {}
        self._in_by_gen: Dict[EdgeKey, int] = {}
        for eid, (src, gen, dst) in enumerate(edges):
            self.edge_id[(src, gen)] = eid
            self._in_by_gen[(dst, gen)] = eid
        self.tree_edge: List[Optional[int]] = [None] * len(vertex_words)
        self._assign_tree()
        tree_set = {e for e in self.tree_edge if e is not None}
        self.chords: List[int] = [e for e in range(len(edges)) if e not in tree_set]
        self._tree_chain_cache: Dict[int, Dict[EdgeKey, int]] = {}
        self._cell_cache = None

    def _assign_tree(self):
        # Re-derive BFS discovery edges: scan vertices in order, letters in
        # lex order, claim each undiscovered deeper neighbor.
        seen = [False] * len(self.vertex_words)
        seen[0] = True
        letters = _letter_order(self.presentation.num_generators)
        for vid in range(len(self.vertex_words)):
            for let in letters:
                nxt = self.step(vid, let)
                if nxt is None or seen[nxt]:
                    continue
                if self.word_len[nxt] == self.word_len[vid] + 1:
                    seen[nxt] = True
                    gen = abs(let) - 1
                    eid = self.edge_id[(vid, gen)] if let > 0 else self.edge_id[(nxt, gen)]
                    self.tree_edge[nxt] = eid

    @property
    def num_vertices(self) -> int:
        return len(self.vertex_words)

    def step(self, vid: int, let: int) -> Optional[int]:
        """Follow one letter; None when the edge is not in the ball."""
        gen = abs(let) - 1
        if let > 0:
            eid = self.edge_id.get((vid, gen))
            return None if eid is None else self.edges[eid][2]
        eid = self._in_by_gen.get((vid, gen))
        return None if eid is None else self.edges[eid][0]

    def traverse(self, vid: int, let: int) -> Tuple[EdgeKey, int, int]:
        """One step as (edge key, sign, next vertex); raises on escape."""
        gen = abs(let) - 1
        if let > 0:
            eid = self.edge_id.get((vid, gen))
            if eid is None:
                raise EscapesBallError(
                    f"no edge {self.presentation.generators[gen]} out of vertex {vid}")
            return (vid, gen), 1, self.edges[eid][2]
        eid = self._in_by_gen.get((vid, gen))
        if eid is None:
            raise EscapesBallError(
                f"no edge {self.presentation.generators[gen]} into vertex {vid}")
        src = self.edges[eid][0]
        return (src, gen), -1, src

    def walk(self, vid: int, word: Sequence[int]) -> int:
        for let in word:
            nxt = self.step(vid, let)
            if nxt is None:
                raise EscapesBallError("walk leaves the ball")
            vid = nxt
        return vid

    def tree_chain(self, vid: int) -> Dict[EdgeKey, int]:
        """Signed edge chain of the BFS-tree path from the identity to vid."""
        cached = self._tree_chain_cache.get(vid)
        if cached is not None:
            return cached
        chain: Dict[EdgeKey, int] = {}
        v = vid
        while v != 0:
            eid = self.tree_edge[v]
            src, gen, dst = self.edges[eid]
            if dst == v:
                chain[(src, gen)] = chain.get((src, gen), 0) + 1
                v = src
            else:
                chain[(src, gen)] = chain.get((src, gen), 0) - 1
                v = dst
        chain = {k: c for k, c in chain.items() if c}
        self._tree_chain_cache[vid] = chain
        return chain

    def to_json_dict(self) -> dict:
        return {
            "radius": self.radius,
            "vertices": [self.presentation.word_str(w) for w in self.vertex_words],
            "edges": [[src, self.presentation.generators[gen], dst]
                      for src, gen, dst in self.edges],
        }

    def restricted(self, radius: int) -> "CayleyBall":
        if radius >= self.radius:
            return self
        return build_ball(self.presentation, self.oracle, radius)


def _letter_order(num_gens: int) -> List[int]:
    return sorted((l for i in range(num_gens) for l in (i + 1, -(i + 1))), key=letter_key)


def build_ball(presentation: Presentation, oracle: Oracle, radius: int,
               max_vertices: int = 10**6) -> CayleyBall:
    """Breadth-first closure of the identity out to the given radius."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    oracle.prepare_radius(radius)
    letters = _letter_order(presentation.num_generators)

    root = oracle.normal_form(EMPTY)
    words: List[Word] = [root]
    index: Dict[Word, int] = {root: 0}
    dist: List[int] = [0]
    frontier = [0]
    for level in range(radius):
        pending: Dict[Word, None] = {}
        for vid in frontier:
            for let in letters:
                w = _step_word(oracle, words[vid], let)
                if w is None or w in index or w in pending:
                    continue
                pending[w] = None
        new_words = sorted(pending, key=shortlex_key)
        if len(words) + len(new_words) > max_vertices:
            raise BallBudgetError(
                f"ball would exceed {max_vertices} vertices at radius {level + 1}")
        frontier = []
        for w in new_words:
            index[w] = len(words)
            words.append(w)
            dist.append(level + 1)
            frontier.append(index[w])

    edges: List[Tuple[int, int, int]] = []
    for vid, w in enumerate(words):
        for gen in range(presentation.num_generators):
            t = _step_word(oracle, w, gen + 1)
            if t is None:
                continue
            tid = index.get(t)
            if tid is not None:
                edges.append((vid, gen, tid))
    return CayleyBall(presentation, oracle, radius, words, dist, edges)


def _step_word(oracle: Oracle, word: Word, let: int) -> Optional[Word]:
    return oracle.step_normal_form(word, let)


def _adjacency(ball: CayleyBall) -> List[List[Tuple[int, int]]]:
    adj: List[List[Tuple[int, int]]] = [[] for _ in range(ball.num_vertices)]
    for src, gen, dst in ball.edges:
        adj[src].append((gen + 1, dst))
        adj[dst].append((-(gen + 1), src))
    for lst in adj:
        lst.sort(key=lambda p: letter_key(p[0]))
    return adj


def enumerate_relations(ball: CayleyBall, max_len: int, mode: str = "exhaustive",
                        count: Optional[int] = None, seed: Optional[int] = None,
                        budget: int = 10**7) -> Iterator[Word]:
    """Freely and cyclically reduced closed walks at the identity, as classes.

    Classes are deduplicated up to cyclic rotation and inversion; the yielded
    representative is the canonical (least) form.  Walks are confined to the
    ball, so relations whose walks exit it are missed: results on a ball are a
    truncation, labeled by the radius.  Exhaustive mode performs a pruned DFS
    and yields each class once; sample mode runs a seeded loop-erased random
    walk and yields up to `count` distinct classes.
    """
    if mode == "exhaustive":
        return _enumerate_exhaustive(ball, max_len, budget)
    if mode == "sample":
        if count is None or seed is None:
            raise ValueError("sample mode needs count and seed")
        return _enumerate_sample(ball, max_len, count, seed, budget)
    raise ValueError(f"unknown mode {mode!r}")


def _identity_representative(word: Word, ball: CayleyBall) -> Optional[Word]:
    """Least rotation of the class that walks at the identity inside the ball.

    Yielded representatives must satisfy the module contract (the walk at the
    identity stays in the ball); the canonical least rotation itself can
    escape small balls, in which case the next walkable rotation is used.
    """
    candidates = set()
    for base in (word, _invert(word)):
        for k in range(len(base)):
            candidates.add(base[k:] + base[:k])
    for cand in sorted(candidates, key=word_key):
        cur = 0
        for let in cand:
            cur = ball.step(cur, let)
            if cur is None:
                break
        if cur == 0:
            return cand
    return None


def _invert(word: Word) -> Word:
    return tuple(-x for x in reversed(word))


def _enumerate_exhaustive(ball: CayleyBall, max_len: int, budget: int) -> Iterator[Word]:
    adj = _adjacency(ball)
    dist = ball.word_len
    seen = set()
    path: List[int] = []
    # stack of (vertex, iterator over adjacency)
    stack = [(0, iter(adj[0]))]
    visits = 0
    while stack:
        vid, it = stack[-1]
        advanced = False
        for let, nxt in it:
            if path and let == -path[-1]:
                continue
            depth = len(path) + 1
            if depth + dist[nxt] > max_len:
                continue
            visits += 1
            if visits > budget:
                raise EnumerationBudgetError(f"walk budget {budget} exceeded")
            path.append(let)
            if nxt == 0:
                word = tuple(path)
                if word[0] != -word[-1]:
                    key = canonical_cyclic(word)
                    if key not in seen:
                        seen.add(key)
                        rep = _identity_representative(key, ball)
                        assert rep is not None  # the walked word qualifies
                        yield rep
            if depth < max_len:
                stack.append((nxt, iter(adj[nxt])))
            else:
                path.pop()
            advanced = True
            break
        if not advanced:
            stack.pop()
            if path:
                path.pop()


def _enumerate_sample(ball: CayleyBall, max_len: int, count: int, seed: int,
                      budget: int) -> Iterator[Word]:
    adj = _adjacency(ball)
    rng = random.Random(seed)
    seen = set()
    yielded = 0
    steps = 0
    while yielded < count and steps < budget:
        vertices = [0]
        pos = {0: 0}
        letters: List[int] = []
        while len(letters) < max_len and steps < budget:
            steps += 1
            cur = vertices[-1]
            options = adj[cur]
            if letters:
                filtered = [p for p in options if p[0] != -letters[-1]]
                options = filtered or options
            let, nxt = options[rng.randrange(len(options))]
            j = pos.get(nxt)
            if j is None:
                pos[nxt] = len(vertices)
                vertices.append(nxt)
                letters.append(let)
                continue
            loop = tuple(letters[j:]) + (let,)
            # erase the loop, keep walking from the revisited vertex
            for v in vertices[j + 1:]:
                del pos[v]
            vertices = vertices[: j + 1]
            letters = letters[:j]
            word = cyclic_reduce(free_reduce(loop))
            if word and len(word) <= max_len:
                key = canonical_cyclic(word)
                if key not in seen:
                    seen.add(key)
                    rep = _identity_representative(key, ball)
                    if rep is not None:
                        yielded += 1
                        yield rep
                        if yielded >= count:
                            return
    return


def cycle_basis(ball: CayleyBall):
    """Fundamental cycles of the non-tree edges over the BFS spanning tree.

    Returns |E| - |V| + 1 integer chains forming a basis of ker(boundary1) on
    the ball; used for Farkas post-processing and completeness arguments.
    """
    from .foxcalc import GroupRingVec

    basis = []
    for eid in ball.chords:
        src, gen, dst = ball.edges[eid]
        chain = dict(ball.tree_chain(src))
        chain[(src, gen)] = chain.get((src, gen), 0) + 1
        for key, c in ball.tree_chain(dst).items():
            chain[key] = chain.get(key, 0) - c
        basis.append(GroupRingVec(chain))
    return basis
