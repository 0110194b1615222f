import pytest
from hypothesis import given, settings, strategies as st

from dischull.treecore import (
    LEFT, RIGHT, PlanarTree, SubtreeSelection, TreeError, canonical_form, crossing_pairs,
    child_order_matches_embedding, cut_subtrees, embed_planar, from_parent_list, glue_at_root,
    glue_maps, pellicle, pellicle_point, point_tree, reattach, tree_from_json, tree_to_json,
)

from oracles import face_walk, seg_intersect


def path_tree():
    # root 0 -> a=1 -> b=2
    return embed_planar(from_parent_list([None, 0, 1]))


def star(k):
    return embed_planar(from_parent_list([None] + [0] * k))


@st.composite
def random_trees(draw, max_edges=50):
    n = draw(st.integers(1, max_edges))
    parents = [None] + [draw(st.integers(0, i)) for i in range(n)]
    return embed_planar(from_parent_list(parents))


def oracle_events(tree):
    edges = [(tree.parent[e], e) for e in tree.edges]
    return face_walk(tree.pos, edges, tree.root, tree.gap_angle)


def test_single_edge_pellicle():
    t = embed_planar(from_parent_list([None, 0]))
    assert pellicle(t).events == ((1, LEFT), (1, RIGHT))


def test_star_pellicle_matches_face_walk():
    t = star(3)
    expected = [(1, "L"), (1, "R"), (2, "L"), (2, "R"), (3, "L"), (3, "R")]
    assert oracle_events(t) == expected
    assert list(pellicle(t).events) == expected


def test_path_pellicle_matches_face_walk():
    t = path_tree()
    expected = [(1, "L"), (2, "L"), (2, "R"), (1, "R")]
    assert oracle_events(t) == expected
    assert list(pellicle(t).events) == expected


def test_point_tree_pellicle_is_degenerate():
    t = point_tree()
    w = pellicle(t)
    assert w.events == ()
    assert tuple(pellicle_point(t, w, 0.3)) == (0.0, 0.0)


def test_punctured_endpoints_are_root_sides():
    t = embed_planar(from_parent_list([None, 0, 0, 1, 1, 2]))
    w = pellicle(t)
    roots = t.children[t.root]
    assert w.events[0] == (roots[0], LEFT)
    assert w.events[-1] == (roots[-1], RIGHT)
    assert tuple(pellicle_point(t, w, 0.0)) == tuple(pellicle_point(t, w, 1.0)) == t.pos[t.root]


@settings(max_examples=60, deadline=None)
@given(random_trees())
def test_pellicle_invariants(t):
    w = pellicle(t)
    assert len(w) == 2 * t.n_edges
    seen = {}
    for e, side in w.events:
        seen.setdefault(e, []).append(side)
    assert all(v == [LEFT, RIGHT] for v in seen.values())
    assert set(seen) == set(t.edges)
    # consecutive events share a vertex
    for (e, s), (f, r) in zip(w.events, w.events[1:]):
        end = e if s == LEFT else t.parent[e]
        start = t.parent[f] if r == LEFT else f
        assert end == start
    # vertex of degree k is visited k times along the closed walk
    visits = {}
    for e, s in w.events:
        start = t.parent[e] if s == LEFT else e
        visits[start] = visits.get(start, 0) + 1
    for v in t.children:
        assert visits.get(v, 0) == t.degree(v)


@settings(max_examples=60, deadline=None)
@given(random_trees())
def test_pellicle_agrees_with_rotation_system(t):
    assert list(pellicle(t).events) == oracle_events(t)


@settings(max_examples=40, deadline=None)
@given(random_trees())
def test_embedding_has_no_crossings(t):
    assert crossing_pairs(t) == []
    assert child_order_matches_embedding(t)
    # second opinion from the plain oracle on non-adjacent edges
    segs = [(t.parent[e], e) for e in t.edges]
    for i, (a, b) in enumerate(segs):
        for c, d in segs[i + 1:]:
            if {a, b} & {c, d}:
                continue
            assert not seg_intersect(t.pos[a], t.pos[b], t.pos[c], t.pos[d])


def test_embed_trivial_cases():
    p = embed_planar(point_tree(pos=None))
    assert p.pos == {0: (0.0, 0.0)}
    e = embed_planar(from_parent_list([None, 0]))
    assert e.pos[0] == (0.0, 0.0)
    assert e.pos[1] == pytest.approx((1.0, 0.0))


def test_embed_is_deterministic():
    t = from_parent_list([None, 0, 0, 1, 2, 2, 4])
    assert embed_planar(t).pos == embed_planar(t).pos


def test_glue_singleton_is_identity():
    t = path_tree()
    assert glue_at_root([t]) is t


def test_glue_two_edges_gives_concatenated_pellicle():
    a = embed_planar(from_parent_list([None, 0]))
    b = embed_planar(from_parent_list([None, 0]))
    g, maps = glue_maps([a, b])
    assert canonical_form(g) == canonical_form(star(2))
    expect = [(maps[0][e], s) for e, s in pellicle(a).events] + \
             [(maps[1][e], s) for e, s in pellicle(b).events]
    assert list(pellicle(g).events) == expect


@pytest.mark.parametrize("k", [1, 2, 5, 9])
def test_glue_k_edges_length(k):
    one = embed_planar(from_parent_list([None, 0]))
    assert len(pellicle(glue_at_root([one] * k))) == 2 * k


@settings(max_examples=30, deadline=None)
@given(st.lists(random_trees(max_edges=8), min_size=1, max_size=4))
def test_glue_pellicle_is_concatenation(ts):
    g, maps = glue_maps(ts)
    expect = []
    for t, m in zip(ts, maps):
        expect += [(m[e], s) for e, s in pellicle(t).events]
    assert list(pellicle(g).events) == expect
    assert crossing_pairs(g) == []


def test_cut_whole_tree():
    t = path_tree()
    kept, res = cut_subtrees(t, t.children.keys())
    assert kept.children == t.children and res == []


def test_cut_path():
    t = path_tree()
    kept, res = cut_subtrees(t, {0, 1})
    assert kept.edges == [1]
    assert len(res) == 1 and res[0].root == 1 and res[0].edges == [2]


def test_cut_star_keep_root_only():
    t = star(2)
    kept, res = cut_subtrees(t, {0})
    assert kept.n_edges == 0
    assert [r.root for r in res] == [0, 0]
    assert [r.edges for r in res] == [[1], [2]]


def test_cut_rejects_non_closed_selection():
    with pytest.raises(TreeError):
        cut_subtrees(path_tree(), {0, 2})
    with pytest.raises(TreeError):
        cut_subtrees(path_tree(), SubtreeSelection({1, 2}))


@settings(max_examples=50, deadline=None)
@given(random_trees(max_edges=20), st.randoms(use_true_random=False))
def test_cut_reattach_round_trip(t, rnd):
    kept = {t.root}
    for v in t.vertices:
        if v != t.root and t.parent[v] in kept and rnd.random() < 0.6:
            kept.add(v)
    k, res = cut_subtrees(t, kept)
    edges = set(k.edges)
    for r in res:
        assert not edges & set(r.edges)
        edges |= set(r.edges)
    assert edges == set(t.edges)
    back = reattach(k, res)
    assert back.children == t.children


def test_simple_predicate():
    assert path_tree().is_simple
    assert not star(2).is_simple
    assert not point_tree().is_simple


def test_malformed_trees_rejected():
    with pytest.raises(TreeError):
        PlanarTree(0, {0: (1,), 1: (0,)})
    with pytest.raises(TreeError):
        PlanarTree(0, {0: (1,), 1: (), 2: ()})


def test_json_round_trip():
    t = embed_planar(from_parent_list([None, 0, 0, 2]))
    obj = tree_to_json(t)
    assert obj["schema"] == "disc-hull/1"
    back = tree_from_json(obj)
    assert back.children == t.children and back.pos == t.pos
