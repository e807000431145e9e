import pytest

from cofill.cayley import build_ball, cycle_basis, enumerate_relations
from cofill.errors import BallBudgetError, EnumerationBudgetError
from cofill.foxcalc import GroupRingVec, boundary1
from cofill.groups import builtin_group
from cofill.presentation import canonical_cyclic, cyclic_reduce, free_reduce
from cofill.rationals import Q


def lattice_relation_classes(max_len):
    """Independent oracle: closed non-backtracking walks on the Z^2 lattice,
    confined only by length, as canonical rotation/inversion classes."""
    moves = {1: (1, 0), -1: (-1, 0), 2: (0, 1), -2: (0, -1)}
    classes = set()

    def dfs(pos, path):
        if len(path) >= 1 and pos == (0, 0):
            if path[0] != -path[-1]:
                classes.add(canonical_cyclic(tuple(path)))
        if len(path) == max_len:
            return
        for let, (dx, dy) in moves.items():
            if path and let == -path[-1]:
                continue
            nxt = (pos[0] + dx, pos[1] + dy)
            if abs(nxt[0]) + abs(nxt[1]) > max_len - len(path) - 1:
                continue
            path.append(let)
            dfs(nxt, path)
            path.pop()

    dfs((0, 0), [])
    return classes


def test_ball_sizes_z2(z2):
    pres, oracle = z2
    # ell_1 ball in Z^2 has 2r^2 + 2r + 1 lattice points
    for r in range(5):
        ball = build_ball(pres, oracle, r)
        assert ball.num_vertices == 2 * r * r + 2 * r + 1


def test_ball_radius1_z2(z2):
    pres, oracle = z2
    ball = build_ball(pres, oracle, 1)
    names = {pres.word_str(w) for w in ball.vertex_words}
    assert names == {"", "a", "a^-1", "b", "b^-1"}
    # the radius-1 ball is a star: 4 edges, no cycles
    assert len(ball.edges) == 4
    assert cycle_basis(ball) == []


def test_ball_sizes_free2(free2):
    pres, oracle = free2
    # 4-regular tree: 1, 4, 12, 36 vertices per level
    ball = build_ball(pres, oracle, 2)
    assert ball.num_vertices == 17
    assert len(ball.chords) == 0


def test_ball_monotone_prefix(z2):
    pres, oracle = z2
    small = build_ball(pres, oracle, 3)
    big = build_ball(pres, oracle, 5)
    assert big.vertex_words[: small.num_vertices] == small.vertex_words
    assert big.word_len[: small.num_vertices] == small.word_len


def test_ball_edges_well_formed(z2_ball4):
    ball = z2_ball4
    oracle = ball.oracle
    for src, gen, dst in ball.edges:
        product = oracle.normal_form(ball.vertex_words[src] + (gen + 1,))
        assert product == ball.vertex_words[dst]
        assert abs(ball.word_len[src] - ball.word_len[dst]) <= 1
    assert ball.word_len[0] == 0


def test_ball_deterministic(surface2):
    pres, oracle = surface2
    b1 = build_ball(pres, oracle, 3)
    b2 = build_ball(pres, oracle, 3)
    assert b1.vertex_words == b2.vertex_words
    assert b1.edges == b2.edges


def test_ball_budget():
    pres, oracle = builtin_group("free2")
    with pytest.raises(BallBudgetError):
        build_ball(pres, oracle, 4, max_vertices=20)


def test_enumerate_free_group_empty(free2):
    pres, oracle = free2
    ball = build_ball(pres, oracle, 3)
    assert list(enumerate_relations(ball, 6)) == []


def test_enumerate_z2_against_lattice_oracle(z2):
    pres, oracle = z2
    # radius = max_len so no relation is lost to the ball boundary
    for max_len in (4, 6, 8):
        ball = build_ball(pres, oracle, max_len)
        got = set(enumerate_relations(ball, max_len))
        expected = lattice_relation_classes(max_len)
        assert got == expected


def test_enumerate_z2_small_counts(z2):
    pres, oracle = z2
    ball = build_ball(pres, oracle, 4)
    assert [pres.word_str(w) for w in enumerate_relations(ball, 4)] == ["a b a^-1 b^-1"]
    # at length 6 the two rectangle boundaries join the commutator class
    six = sorted(pres.word_str(w) for w in enumerate_relations(ball, 6))
    assert six == ["a b a^-1 b^-1", "a b^2 a^-1 b^-2", "a^2 b a^-2 b^-1"]


def test_enumerated_relations_are_relations(z2_ball4):
    ball = z2_ball4
    for w in enumerate_relations(ball, 8):
        assert ball.oracle.is_identity(w)
        assert cyclic_reduce(free_reduce(w)) == w
        assert ball.walk(0, w) == 0


def test_enumerate_budget(z2):
    pres, oracle = z2
    ball = build_ball(pres, oracle, 6)
    with pytest.raises(EnumerationBudgetError):
        list(enumerate_relations(ball, 12, budget=100))


def test_sample_mode_reproducible(z2_ball5):
    ball = z2_ball5
    a = list(enumerate_relations(ball, 10, mode="sample", count=25, seed=11))
    b = list(enumerate_relations(ball, 10, mode="sample", count=25, seed=11))
    assert a == b
    assert len(a) == 25
    assert len(set(a)) == 25
    for w in a:
        assert ball.oracle.is_identity(w)
        assert 0 < len(w) <= 10
    c = list(enumerate_relations(ball, 10, mode="sample", count=25, seed=12))
    assert a != c


def test_sample_mode_needs_count_and_seed(z2_ball4):
    with pytest.raises(ValueError):
        list(enumerate_relations(z2_ball4, 6, mode="sample"))


def test_cycle_basis_z2(z2):
    pres, oracle = z2
    ball = build_ball(pres, oracle, 2)
    basis = cycle_basis(ball)
    assert len(basis) == len(ball.edges) - ball.num_vertices + 1 == 4
    for chain in basis:
        assert not boundary1(chain, ball)
        assert chain.is_integral()


def test_cycle_basis_spans_relations(z2_ball4):
    """Every enumerated relation cycle equals the integer combination of
    fundamental cycles read off its chord coordinates (exact linear solve)."""
    from cofill.foxcalc import cycle_of_relation

    ball = z2_ball4
    basis = cycle_basis(ball)
    chord_pos = {eid: i for i, eid in enumerate(ball.chords)}
    for w in enumerate_relations(ball, 8):
        z = cycle_of_relation(w, 0, ball)
        combo = GroupRingVec()
        for key, v in z.entries.items():
            pos = chord_pos.get(ball.edge_id[key])
            if pos is not None:
                combo = combo + basis[pos].scale(v)
        assert combo == z


def test_ball_json_dump(z2):
    pres, oracle = z2
    ball = build_ball(pres, oracle, 1)
    data = ball.to_json_dict()
    assert data["radius"] == 1
    assert data["vertices"][0] == ""
    assert all(len(e) == 3 for e in data["edges"])
