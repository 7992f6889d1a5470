from __future__ import annotations

import pytest

from wnu_counterexample.catalog import (
    B_TABLES,
    DERIVED,
    EXAMPLES,
    STATED,
    TRIVIAL,
    load_example,
    relation_R1,
    relation_R2,
)
from wnu_counterexample.errors import InputError
from wnu_counterexample.structures import project_relation, solve_instance


def test_relation_sizes():
    assert len(relation_R1()) == 5
    assert len(relation_R2()) == 14


def test_bridge_relation_is_everything_but_2_2():
    e = project_relation(relation_R2(), (1, 5), "E")
    assert len(e) == 8
    assert ("2", "2") not in e


@pytest.mark.parametrize("name,expected", [("1", "example1"), ("example2", "example2"), (" 2X ", "example2x")])
def test_load_example_aliases(name, expected):
    assert load_example(name).name == expected


def test_load_example_unknown():
    with pytest.raises(InputError):
        load_example("3")


def test_expected_values_are_tagged():
    for build in set(EXAMPLES.values()):
        bundle = build()
        for key, exp in bundle.expected.items():
            assert exp.tag in (STATED, DERIVED, TRIVIAL), key
            assert exp.citation, key


def test_top_tables_are_symmetric_relations():
    for name, pairs in B_TABLES.items():
        assert pairs == frozenset((b, a) for a, b in pairs), name


def test_example2_has_two_solutions(ex2):
    sols = solve_instance(ex2.csp_template, ex2.instance)
    assert len(sols) == 2
    assert {s["x1"] for s in sols} == {"2"}
    assert {s["x0"] for s in sols} == {"0", "1"}


def test_example2_extended_has_eight_solutions(ex2x):
    sols = solve_instance(ex2x.csp_template, ex2x.instance)
    assert len(sols) == 8
    right = [f"x{k}" for k in range(1, 7)]
    left = [x + "'" for x in right]
    assert {s[x] for s in sols for x in right} == {"2"}
    assert {s[x] for s in sols for x in left} == {"0", "1"}
