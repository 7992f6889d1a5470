from __future__ import annotations

import pytest

from wnu_counterexample.errors import InputError
from wnu_counterexample.load import (
    parse_digraph,
    parse_instance,
    parse_lists,
    parse_operation,
    parse_relations,
    read_digraph,
    state_from_lists,
)

RELATIONS = """\
# parity on bits
domain 0 1
relation EVEN 3
0 0 0
0 1 1
1 0 1
1 1 0
relation NEQ 2
0 1
1 0
"""


def test_parse_relations():
    tmpl = parse_relations(RELATIONS)
    assert tmpl.domain.elements == ("0", "1")
    assert [r.name for r in tmpl.relations] == ["EVEN", "NEQ"]
    assert len(tmpl.relation("EVEN")) == 4


@pytest.mark.parametrize(
    "text",
    [
        "relation R 2\n0 1\n",
        "domain 0 1\n0 1\n",
        "domain 0 1\nrelation R 2\n0 1 1\n",
        "domain 0 1\nrelation R two\n",
        "domain 0 1\ndomain 0 1\n",
        "domain 0 1\nrelation R 1\n2\n",
    ],
)
def test_parse_relations_errors(text):
    with pytest.raises(InputError):
        parse_relations(text)


def test_parse_operation():
    op = parse_operation("arity 2\n0 0 -> 0\n0 1 -> 1\n1 0 -> 1\n1 1 -> 0\n")
    assert op.carrier == ("0", "1")
    assert op("1", "1") == "0"


@pytest.mark.parametrize(
    "text",
    [
        "0 0 -> 0\n",
        "arity 2\n0 0 0\n",
        "arity 1\n0 -> 0\n0 -> 1\n1 -> 1\n",
        "arity 2\n0 0 -> 0\n1 1 -> 1\n",
    ],
)
def test_parse_operation_errors(text):
    with pytest.raises(InputError):
        parse_operation(text)


def test_parse_instance():
    inst = parse_instance("R1 x1 x2 x3\nR2 x3 x4 x5  # last\n")
    assert inst.variables == ("x1", "x2", "x3", "x4", "x5")
    assert inst.constraints[1] == ("R2", ("x3", "x4", "x5"))
    with pytest.raises(InputError):
        parse_instance("R1\n")


def test_parse_digraph():
    g = parse_digraph("v a\nv b\ne a b\np a var:a\n")
    assert g.vertices == ("a", "b")
    assert g.arcs == frozenset({("a", "b")})
    assert g.provenance == {"a": "var:a"}


@pytest.mark.parametrize("text", ["v a\nv a\n", "v a\ne a b\n", "x a\n"])
def test_parse_digraph_errors(text):
    with pytest.raises(InputError):
        parse_digraph(text)


def test_parse_lists_and_rebuild():
    unary, binary = parse_lists("L x 0 1\nL y 1\nP x y 0,1 1,1\n")
    assert unary == {"x": frozenset("01"), "y": frozenset("1")}
    st = state_from_lists(unary, binary)
    assert st.binary("y", "x") == frozenset({("1", "0"), ("1", "1")})
    assert st.binary("x", "x") == frozenset({("0", "0"), ("1", "1")})
    assert st.consistent
    with pytest.raises(InputError):
        parse_lists("P x y 0-1\n")
    with pytest.raises(InputError):
        state_from_lists(unary, binary, vertices=["x", "z"])


def test_missing_file(tmp_path):
    with pytest.raises(InputError):
        read_digraph(str(tmp_path / "nope.dg"))
