from __future__ import annotations

import pytest

from wnu_counterexample.digraph import (
    arc_consistent_lists,
    compute_levels,
    count_homomorphisms,
    enumerate_homomorphisms,
    extension_profiles,
    is_core,
    level_shift_is_constant,
    naive_homomorphisms,
    net_length,
    undirected_components,
)
from wnu_counterexample.errors import ConstructionError, InputError
from wnu_counterexample.models import Digraph, OrientedPath
from wnu_counterexample.translation import build_P, build_Q


def dg(vertices, arcs):
    return Digraph(tuple(vertices), frozenset(arcs))


def _key(f):
    return tuple(sorted(f.items()))


def test_oriented_path_heights():
    p = OrientedPath(("a", "b", "c", "d"), (1, -1, 1))
    assert p.heights() == {"a": 0, "b": 1, "c": 0, "d": 1}
    assert p.arcs() == [("a", "b"), ("c", "b"), ("c", "d")]
    assert net_length(p) == 1


def test_oriented_path_rejects_repeats():
    with pytest.raises(ConstructionError):
        OrientedPath(("a", "b", "a"), (1, 1))


def test_p_and_q_paths_have_net_length_seven():
    assert net_length(build_P("0", ("0", "0", "0", "1", "0"))) == 7
    assert net_length(build_P("2", ("2", "2", "2", "2", "0"))) == 7
    for i in range(1, 6):
        assert net_length(build_Q(i)) == 7


def test_unknown_arc_endpoint():
    with pytest.raises(InputError):
        dg(["a"], [("a", "b")])


def test_levels_of_a_zigzag():
    g = dg("abc", [("a", "b"), ("c", "b")])
    res = compute_levels(g)
    assert res.balanced
    assert res.levels == {"a": 0, "b": 1, "c": 0}


def test_directed_cycle_is_unbalanced():
    res = compute_levels(dg("abc", [("a", "b"), ("b", "c"), ("c", "a")]))
    assert not res.balanced
    assert res.witness is not None


def test_levels_per_component():
    g = dg("abcd", [("a", "b"), ("d", "c")])
    res = compute_levels(g)
    assert res.levels == {"a": 0, "b": 1, "c": 1, "d": 0}
    assert undirected_components(g) == [("a", "b"), ("c", "d")]


def test_example1_h_levels(ex1):
    tr = ex1.translation
    res = compute_levels(tr.H)
    assert res.balanced
    assert {res.levels[a] for a in ex1.domain} == {0}
    assert {res.levels[r] for r in tr.rows} == {7}
    assert max(res.levels.values()) == 7


def test_enumerate_matches_naive_on_small_graph():
    g = dg("xyz", [("x", "y"), ("z", "y")])
    h = dg("abc", [("a", "b"), ("b", "c"), ("a", "c")])
    ours = sorted(map(_key, enumerate_homomorphisms(g, h)))
    oracle = sorted(map(_key, naive_homomorphisms(g, h)))
    assert ours == oracle
    assert count_homomorphisms(g, h) == len(oracle)


def test_enumerate_respects_lists_pins_and_limit():
    g = dg("xy", [("x", "y")])
    h = dg("abc", [("a", "b"), ("a", "c"), ("b", "c")])
    assert count_homomorphisms(g, h) == 3
    assert count_homomorphisms(g, h, limit=2) == 2
    assert enumerate_homomorphisms(g, h, pinned={"x": "b"}) == [{"x": "b", "y": "c"}]
    assert enumerate_homomorphisms(g, h, lists={"y": ["b"]}) == [{"x": "a", "y": "b"}]
    with pytest.raises(InputError):
        enumerate_homomorphisms(g, h, pinned={"w": "a"})


def test_projection_collapses_extensions():
    g = dg("xy", [("x", "y")])
    h = dg("abc", [("a", "b"), ("a", "c"), ("b", "c")])
    assert enumerate_homomorphisms(g, h, project_onto=["x"]) == [{"x": "a"}, {"x": "b"}]


def test_loops_need_loops():
    g = dg("x", [("x", "x")])
    assert count_homomorphisms(g, dg("ab", [("a", "b")])) == 0
    assert count_homomorphisms(g, dg("ab", [("a", "b"), ("b", "b")])) == 1


def test_arc_consistent_lists_prune_by_level():
    g = dg("xy", [("x", "y")])
    h = dg("abc", [("a", "b"), ("b", "c")])
    assert arc_consistent_lists(g, h) == {"x": frozenset("ab"), "y": frozenset("bc")}


def test_q_copy_maps_into_matching_p_path():
    q = build_Q(4).to_digraph()
    assert count_homomorphisms(q, build_P("1", ("0", "0", "0", "1", "0")).to_digraph()) == 1
    assert count_homomorphisms(q, build_P("0", ("0", "0", "0", "1", "0")).to_digraph()) == 0


def test_example1_has_exactly_one_homomorphism(ex1):
    tr = ex1.translation
    homs = enumerate_homomorphisms(tr.G, tr.H, limit=2)
    assert len(homs) == 1
    assert {homs[0][x] for x in tr.var_vertices} == {"2"}
    assert level_shift_is_constant(tr.G, tr.H, homs[0])


def test_extension_profiles_on_a_tree():
    g = dg("xyz", [("x", "y"), ("z", "y")])
    h = dg("abcd", [("a", "c"), ("b", "c"), ("b", "d")])
    profiles = extension_profiles(g, h, {}, [{"x": "a"}, {"x": "b"}])
    assert profiles[0]["y"] == frozenset("c")
    assert profiles[0]["z"] == frozenset("ab")
    assert profiles[1]["y"] == frozenset("cd")


def test_extension_profiles_dead_projection():
    g = dg("xy", [("x", "y")])
    h = dg("ab", [("a", "b")])
    assert extension_profiles(g, h, {}, [{"x": "b"}]) == [{"x": frozenset(), "y": frozenset()}]


def test_extension_profiles_on_a_cycle_are_exact():
    # 4-cycle x->y<-z->w<-x is not a forest, so each value is decided by search
    g = dg("xyzw", [("x", "y"), ("z", "y"), ("z", "w"), ("x", "w")])
    h = dg("abcd", [("a", "c"), ("b", "c"), ("b", "d")])
    prof = extension_profiles(g, h, {}, [{}])[0]
    oracle = naive_homomorphisms(g, h)
    for v in g.vertices:
        assert prof[v] == frozenset(f[v] for f in oracle)


def test_core_check():
    assert is_core(dg("abc", [("a", "b"), ("b", "c")])).is_core
    res = is_core(dg("abc", [("a", "b"), ("c", "b")]))
    assert not res.is_core
    assert res.endomorphism is not None
