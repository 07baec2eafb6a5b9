import itertools
from collections import deque

import pytest
from hypothesis import given, strategies as st

from gromolab import graph_space as gs
from gromolab.graph_space import CayleySpace, ResourceError, TableParseError

F2 = CayleySpace.parse("free:2")
Z2 = CayleySpace.parse("abelian:2")


def cyclic_table(n, gens="1"):
    rows = [",".join(str((i + j) % n) for j in range(n)) for i in range(n)]
    return "\n".join([f"n={n} k={len(gens.split())}", *rows, gens])


def s3_table():
    perms = list(itertools.permutations(range(3)))
    idx = {p: i for i, p in enumerate(perms)}
    rows = []
    for p in perms:
        rows.append(",".join(str(idx[tuple(p[q[i]] for i in range(3))]) for q in perms))
    # a transposition and a 3-cycle
    gens = f"{idx[(1, 0, 2)]} {idx[(1, 2, 0)]}"
    return "\n".join(["n=6 k=2", *rows, gens])


def brute_ball(space, R):
    """Plain BFS over the neighbour function, independent of the library's counters."""
    seen = {space.identity(): 0}
    todo = deque([space.identity()])
    while todo:
        g = todo.popleft()
        if seen[g] == R:
            continue
        for s in space.generators():
            h = space.mul(g, s)
            if h not in seen:
                seen[h] = seen[g] + 1
                todo.append(h)
    return len(seen)


def test_reduce_and_invert():
    assert gs.reduce_word("aAbBa") == "a"
    assert gs.reduce_word("abBA") == ""
    assert gs.invert_word("abC") == "cBA"
    assert gs.alphabet(3) == "aAbBcC"


@pytest.mark.parametrize("k", [1, 2, 3])
def test_free_ball_counts(k):
    G = CayleySpace.parse(f"free:{k}")
    for R in range(7):
        want = 1 + 2 * k * ((2 * k - 1) ** R - 1) // (2 * k - 2) if k > 1 else 2 * R + 1
        assert G.ball_count("", R) == want
        assert G.ball_count("", R, method="bfs") == want


def test_free2_counts_to_twelve():
    spheres = F2.sphere_counts_bfs("", 12)
    assert [sum(spheres[: R + 1]) for R in range(13)] == [2 * 3**R - 1 for R in range(13)]


def test_abelian_counts():
    Z1 = CayleySpace.parse("abelian:1")
    assert Z1.ball_count((0,), 5) == 11
    for R in range(8):
        assert Z2.ball_count((0, 0), R) == 2 * R * R + 2 * R + 1
        assert Z2.ball_count((0, 0), R, method="bfs") == brute_ball(Z2, R)
    Z3 = CayleySpace.parse("abelian:3")
    for R in range(5):
        assert Z3.ball_count(None, R) == brute_ball(Z3, R)


def test_open_ball_count():
    assert F2.open_ball_count("", 2) == 5
    assert F2.open_ball_count("", 2.5) == 17
    assert F2.open_ball_count("", 0) == 0


def test_word_distance_examples():
    assert F2.word_distance("ab", "ab") == 0
    assert F2.word_distance("a", "b") == 2
    assert Z2.word_distance((3, 0), (0, 4)) == 7
    assert gs.word_distance(F2, "aab", "aB") == 3


@given(st.text("aAbB", max_size=6), st.text("aAbB", max_size=6))
def test_word_distance_matches_bfs(u, v):
    assert F2.word_distance(u, v) == F2.bfs_distance(u, v)


def test_geodesic_examples():
    assert F2.graph_geodesic("ab", "ab") == ["ab"]
    assert [F2.format(g) for g in F2.graph_geodesic("a", "b")] == ["a", "e", "b"]
    assert Z2.graph_geodesic((0, 0), (1, 1)) == [(0, 0), (1, 0), (1, 1)]


@given(st.text("aAbB", max_size=7), st.text("aAbB", max_size=7))
def test_geodesics_are_paths_of_minimal_length(u, v):
    path = F2.graph_geodesic(u, v)
    assert len(path) == F2.word_distance(u, v) + 1
    assert all(F2.word_distance(p, q) == 1 for p, q in zip(path, path[1:]))


def test_geodesic_point_floors():
    assert F2.geodesic_point("", "aab", 1.7) == "a"
    assert F2.geodesic_point("", "aab", 3) == "aab"


def test_cyclic_table():
    G = CayleySpace.from_table_text(cyclic_table(6))
    assert [G.ball_count(None, R) for R in range(5)] == [1, 3, 5, 6, 6]
    assert G.word_distance(0, 3) == 3
    assert len(G.graph_geodesic(0, 3)) == 4


def test_s3_table():
    G = CayleySpace.from_table_text(s3_table())
    assert G.ball_count(None, 10) == 6
    for R in range(4):
        assert G.ball_count(None, R) == brute_ball(G, R)
    e = G.identity()
    for g in range(6):
        assert G.mul(g, G.inv(g)) == e


def test_table_errors():
    with pytest.raises(TableParseError):
        CayleySpace.from_table_text("n=2\n0,1\n1,0\n1")
    with pytest.raises(TableParseError):
        CayleySpace.from_table_text("n=2 k=1\n0,1\n1,1\n1")
    # rows are permutations but the operation is not associative
    bad = "n=3 k=1\n0,1,2\n1,0,2\n2,2,0\n1"
    with pytest.raises(TableParseError):
        CayleySpace.from_table_text(bad)
    with pytest.raises(TableParseError):
        CayleySpace.parse("table:/no/such/file")


def test_bad_descriptors():
    for desc in ("free:x", "torus:2", "free"):
        with pytest.raises(ValueError):
            CayleySpace.parse(desc)
    with pytest.raises(ValueError):
        F2.element("ac")


def test_vertex_budget():
    G = CayleySpace.parse("free:2", budget=1000)
    with pytest.raises(ResourceError):
        G.ball_count("", 10, method="bfs")


def test_ball_order_is_length_lex():
    ball = F2.ball("", 2)
    assert ball[:5] == ["", "a", "A", "b", "B"]
    assert len(ball) == 17
    keys = [gs.length_lex_key(w) for w in ball]
    assert keys == sorted(keys)


def test_handle_is_exact_metric():
    h = F2.handle()
    assert h.exact and h.distance("ab", "AB") == 4
