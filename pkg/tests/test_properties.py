"""Property-based checks of the search, consistency and algebra layers against brute force."""
from __future__ import annotations

import itertools
import os

import numpy as np
from hypothesis import given, strategies as st

from wnu_counterexample.consistency import enforce_23_consistency, verify_23_consistent
from wnu_counterexample.digraph import compute_levels, enumerate_homomorphisms, naive_homomorphisms
from wnu_counterexample.models import Digraph, FiniteDomain, Operation, OrientedPath, Relation, Template
from wnu_counterexample.structures import check_operation_properties, check_polymorphism, gf2_rank

SEED_BASE = int(os.environ.get("WNU_SEED", "0"))
TERNARY = list(itertools.product("012", repeat=3))


@st.composite
def digraphs(draw, max_vertices):
    n = draw(st.integers(min_value=1, max_value=max_vertices))
    names = [f"v{i}" for i in range(n)]
    pairs = list(itertools.product(names, repeat=2))
    arcs = draw(st.sets(st.sampled_from(pairs), max_size=len(pairs)))
    return Digraph(tuple(names), frozenset(arcs))


def _key(f):
    return tuple(sorted(f.items()))


@given(digraphs(6), digraphs(3))
def test_search_agrees_with_brute_force(g, h):
    ours = sorted(map(_key, enumerate_homomorphisms(g, h)))
    assert ours == sorted(map(_key, naive_homomorphisms(g, h)))


@given(digraphs(6), digraphs(3), st.integers(min_value=1, max_value=6))
def test_projection_agrees_with_brute_force(g, h, k):
    onto = list(g.vertices[:k])
    ours = {_key(f) for f in enumerate_homomorphisms(g, h, project_onto=onto)}
    oracle = {_key({v: f[v] for v in onto}) for f in naive_homomorphisms(g, h)}
    assert ours == oracle


@given(digraphs(6), digraphs(3))
def test_23_consistency_is_sound(g, h):
    state = enforce_23_consistency(g, h)
    homs = naive_homomorphisms(g, h)
    if homs:
        assert state.consistent
    if not state.consistent:
        assert homs == []
        return
    assert verify_23_consistent(state, g, h).ok
    for f in homs:
        for v, w in itertools.product(g.vertices, repeat=2):
            assert (f[v], f[w]) in state.binary(v, w)


@given(digraphs(6), digraphs(3))
def test_23_fixpoint_does_not_depend_on_order(g, h):
    base = enforce_23_consistency(g, h)
    for seed in range(SEED_BASE, SEED_BASE + 10):
        other = enforce_23_consistency(g, h, order_seed=seed)
        assert other.consistent == base.consistent
        if base.consistent:
            assert np.array_equal(other.matrix, base.matrix)


@given(st.lists(st.sampled_from("012"), min_size=27, max_size=27))
def test_idempotent_cyclic_implies_wnu(draws):
    table = {}
    for args in TERNARY:
        if len(set(args)) == 1:
            table[args] = args[0]
            continue
        rep = min(args[k:] + args[:k] for k in range(3))
        table[args] = draws[TERNARY.index(rep)]
    props = check_operation_properties(Operation(("0", "1", "2"), 3, table))
    assert props.idempotent and props.cyclic
    assert props.wnu


@given(
    st.sets(st.tuples(st.sampled_from("01"), st.sampled_from("01"))),
    st.lists(st.sampled_from("01"), min_size=4, max_size=4),
)
def test_polymorphism_check_agrees_with_brute_force(rows, outs):
    rel = Relation("R", 2, frozenset(rows))
    table = dict(zip(itertools.product("01", repeat=2), outs))
    op = Operation(("0", "1"), 2, table)
    oracle = all(
        (table[(r[0], s[0])], table[(r[1], s[1])]) in rel.tuples
        for r in rel.tuples
        for s in rel.tuples
    )
    assert check_polymorphism(op, Template(FiniteDomain(("0", "1")), (rel,))).ok == oracle


@given(st.lists(st.lists(st.integers(0, 1), min_size=4, max_size=4), min_size=2, max_size=5))
def test_gf2_rank_ignores_dependent_rows(rows):
    extra = [a ^ b for a, b in zip(rows[0], rows[1])]
    assert gf2_rank(rows + [extra]) == gf2_rank(rows)
    assert gf2_rank(rows) <= 4


@given(st.lists(st.sampled_from([1, -1]), min_size=1, max_size=8))
def test_oriented_paths_are_balanced(directions):
    names = [f"p{i}" for i in range(len(directions) + 1)]
    path = OrientedPath(tuple(names), tuple(directions))
    res = compute_levels(path.to_digraph())
    assert res.balanced
    heights = path.heights()
    lo = min(heights.values())
    assert res.levels == {v: h - lo for v, h in heights.items()}
