from __future__ import annotations

import logging

import numpy as np
import pytest

from wnu_counterexample.catalog import BA_TABLES, B_TABLES, DELTA, GREEK, TOP_PAIR_TABLES
from wnu_counterexample.consistency import (
    build_microstructure,
    component_families_are_maltsev,
    decompose_lists,
    enforce_23_consistency,
    enforce_arc_consistency,
    initial_state,
    verify_23_consistent,
)
from wnu_counterexample.digraph import naive_homomorphisms
from wnu_counterexample.errors import InputError
from wnu_counterexample.models import Digraph

VARIABLES = [f"x{k}" for k in range(1, 7)]


def dg(vertices, arcs):
    return Digraph(tuple(vertices), frozenset(arcs))


def test_initial_state_shape():
    g = dg("xy", [("x", "y")])
    h = dg("abc", [("a", "b"), ("b", "c")])
    st = initial_state(g, h)
    assert st.lists == {"x": frozenset("ab"), "y": frozenset("bc")}
    assert st.binary("x", "y") == frozenset({("a", "b"), ("b", "c")})
    assert st.binary("y", "x") == frozenset({("b", "a"), ("c", "b")})
    assert st.binary("x", "x") == frozenset({("a", "a"), ("b", "b")})
    assert np.array_equal(st.matrix, st.matrix.T)


def test_enforcement_detects_odd_cycle_into_edge():
    # an undirected 3-cycle has no homomorphism to a single symmetric edge
    g = dg("xyz", [("x", "y"), ("y", "z"), ("z", "x")])
    h = dg("ab", [("a", "b"), ("b", "a")])
    assert naive_homomorphisms(g, h) == []
    st = enforce_23_consistency(g, h)
    assert not st.consistent


def test_enforcement_keeps_solutions():
    g = dg("xyzw", [("x", "y"), ("z", "y"), ("z", "w")])
    h = dg("abcd", [("a", "c"), ("b", "c"), ("b", "d")])
    st = enforce_23_consistency(g, h)
    assert st.consistent
    for f in naive_homomorphisms(g, h):
        for v in g.vertices:
            for w in g.vertices:
                assert (f[v], f[w]) in st.binary(v, w)
    assert verify_23_consistent(st, g, h).ok


def test_arc_consistency_can_empty_a_list():
    g = dg("xyz", [("x", "y"), ("y", "z")])
    h = dg("ab", [("a", "b")])
    lists = enforce_arc_consistency(g, h)
    assert any(not vals for vals in lists.values())


def test_state_edits_do_not_touch_the_original(ex1_state):
    before = ex1_state.size()
    smaller = ex1_state.without("x1", "0")
    assert "0" not in smaller.unary("x1")
    assert ex1_state.size() == before
    with pytest.raises(InputError):
        smaller.without("x1", "0")
    with pytest.raises(InputError):
        ex1_state.node_index("nope", "0")


def test_example1_fixpoint_is_consistent(ex1, ex1_state):
    tr = ex1.translation
    assert ex1_state.consistent
    assert verify_23_consistent(ex1_state, tr.G, tr.H).ok


def test_starting_family_is_not_yet_closed(ex1):
    tr = ex1.translation
    assert not verify_23_consistent(initial_state(tr.G, tr.H), tr.G, tr.H).ok


def test_example1_unary_lists(ex1, ex1_state):
    tr = ex1.translation
    for x in VARIABLES:
        assert ex1_state.unary(x) == frozenset("012")
    for t in tr.t_vertices:
        assert ex1_state.unary(t) == frozenset(GREEK.values())
    for v, sigma in tr.sigma.items():
        assert ex1_state.unary(v) == sigma.image()


def test_example1_binary_lists(ex1, ex1_state):
    tr = ex1.translation
    for i, x in enumerate(VARIABLES):
        for y in VARIABLES[i + 1:]:
            assert ex1_state.binary(x, y) == DELTA
    for (t, u), name in TOP_PAIR_TABLES.items():
        assert ex1_state.binary(t, u) == B_TABLES[name]
    # t1 is joined to x1 by a Q1 copy and not joined to x4
    assert ex1_state.binary("t1", "x1") == BA_TABLES["P1"]
    assert ex1_state.binary("t1", "x4") == BA_TABLES["DELTA_BA"]
    assert ex1_state.binary("t4", "x3") == BA_TABLES["P4"]


def test_verify_names_an_unsupported_pair(ex1, ex1_state):
    tr = ex1.translation
    broken = ex1_state.with_pair("x1", "x2", "0", "2")
    res = verify_23_consistent(broken, tr.G, tr.H)
    assert not res.ok
    assert "no support" in res.detail


def test_verify_rejects_asymmetric_lists(ex1, ex1_state):
    tr = ex1.translation
    broken = ex1_state.copy()
    i, j = broken.node_index("x1", "0"), broken.node_index("x2", "1")
    broken.matrix[i, j] = False
    assert verify_23_consistent(broken, tr.G, tr.H).detail == "binary lists not converse-symmetric"


def test_reenforcing_the_fixpoint_changes_nothing(ex1, ex1_state):
    tr = ex1.translation
    again = enforce_23_consistency(tr.G, tr.H, state=ex1_state)
    assert np.array_equal(again.matrix, ex1_state.matrix)


def test_reenforcing_the_fixpoint_takes_one_pass(ex1, ex1_state, caplog):
    tr = ex1.translation
    with caplog.at_level(logging.DEBUG, logger="wnu_counterexample.consistency"):
        enforce_23_consistency(tr.G, tr.H, state=ex1_state)
    passes = [r.getMessage() for r in caplog.records if r.getMessage().startswith("pass ")]
    pairs = int(np.count_nonzero(ex1_state.matrix))
    assert passes == [f"pass 1: {len(tr.G)} revision(s), {pairs} -> {pairs} compatible node pairs"]


def test_example1_microstructure_splits_in_two(ex1_state, ex1_family):
    ms = build_microstructure(ex1_state)
    comps = decompose_lists(ms)
    assert len(comps) == 2
    # the component of the all-2 solution uses only 2 on the variables
    small = [c for c in comps if c["x1"] == frozenset("2")]
    assert len(small) == 1
    assert all(len(vals) == 1 for vals in small[0].values())
    assert set(small[0]) == set(ex1_state.vertices)
    assert component_families_are_maltsev(ex1_family.ops, comps).ok
    assert ms.to_networkx().number_of_nodes() == ms.node_count


def test_lists_df(ex1_state):
    df = ex1_state.lists_df()
    assert list(df.columns) == ["vertex", "size", "values"]
    assert df.set_index("vertex").loc["x1", "values"] == "0 1 2"


@pytest.mark.slow
def test_example1_fixpoint_is_order_independent(ex1, ex1_state, order_seeds):
    tr = ex1.translation
    assert len(order_seeds) >= 10
    for seed in order_seeds:
        shuffled = enforce_23_consistency(tr.G, tr.H, order_seed=seed)
        assert np.array_equal(shuffled.matrix, ex1_state.matrix)
