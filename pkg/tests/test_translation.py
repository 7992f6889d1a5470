from __future__ import annotations

import pytest

from wnu_counterexample.catalog import A, GREEK, SIGMA_SAMPLE
from wnu_counterexample.errors import InputError
from wnu_counterexample.structures import project_relation, relation_from_strings
from wnu_counterexample.translation import (
    GadgetSpec,
    aux_vertex_count,
    build_gadget,
    build_G,
    build_H,
    build_P,
    build_Q,
    compute_sigma,
    pp_relation,
    probe_census,
    row_label,
)


def test_row_label():
    assert row_label(("0", "1", "2")) == "012"
    assert row_label(("10", "2")) == "10,2"


def test_p_path_shape():
    p = build_P("0", ("0", "1"), "r")
    assert p.start == "0" and p.end == "r"
    # one single arc for the matching coordinate, a zigzag for the other
    assert len(p.vertices) == 2 + 1 + 1 + 3


def test_q_path_rejects_bad_coordinate():
    with pytest.raises(InputError):
        build_Q(6)


def test_example1_sizes(ex1):
    tr = ex1.translation
    assert len(tr.H) == 198
    assert len(tr.H) - 3 - 5 == aux_vertex_count(A, ex1.relation) == 190
    assert len(tr.G) == 178
    assert len(tr.var_vertices) == 6
    assert set(tr.t_vertices) == {"t1", "t2", "t3", "t4"}


def test_example2_sizes(ex2):
    tr = ex2.translation
    assert aux_vertex_count(A, ex2.relation) == 532
    assert len(tr.H) == 549
    assert len(tr.G) == 208
    assert tr.group_of("x0") == "bridge"
    assert tr.group_of("x1") == "pyramid"


def test_example2_extended_sizes(ex2x):
    tr = ex2x.translation
    assert len(tr.var_vertices) == 12
    assert len(tr.t_vertices) == 9
    assert len(tr.G) == 385
    assert tr.group_of("x3'") == "left"
    assert tr.group_of("t0") == "bridge"


def test_h_provenance(ex1):
    prov = ex1.translation.H.provenance
    assert prov["0"] == "elem"
    assert prov["α"] == "row"
    assert prov["u:0:α:0"] == "P:0:α:h1"


def test_row_names_must_not_collide():
    rel = relation_from_strings("R", ["01", "10"])
    with pytest.raises(InputError):
        build_H(A, rel, {("0", "1"): "0", ("1", "0"): "b"})


def test_gadget_spec_validation():
    with pytest.raises(InputError):
        GadgetSpec("t", (1, 2), ("x",))
    with pytest.raises(InputError):
        GadgetSpec("t", (1, 1), ("x", "y"))


def test_build_g_rejects_undeclared_variable():
    with pytest.raises(InputError):
        build_G([GadgetSpec("t", (1,), ("x",))], variables=["y"])


def test_gadget_legs():
    gadget = build_gadget((1, 2), ("x", "y"), t="t")
    # two Q copies of 14 interior vertices, the endpoints and the top
    assert len(gadget.digraph) == 2 * 14 + 3
    leg = gadget.legs["t:Q2:v0"]
    assert (leg.t, leg.coord, leg.endpoint, leg.height) == ("t", 2, "y", 1)


def test_probe_census_example1(ex1):
    census = probe_census(A, ex1.relation, (1, 2, 3, 4), ex1.row_names)
    assert len(census) == 60
    assert all(r.ok for r in census)
    assert sum(r.count for r in census) == 4 * 5


def test_gadget_defines_projection_uniquely(ex1):
    tr = ex1.translation
    gadget = build_gadget((1, 2, 4), ("y1", "y2", "y3"))
    counts = pp_relation(tr.H, gadget)
    assert set(counts) == project_relation(ex1.relation, (1, 2, 4)).tuples
    assert set(counts.values()) == {1}


def test_sigma_sample(ex1):
    v, image = SIGMA_SAMPLE
    sigma = compute_sigma(ex1.translation, v)
    assert sigma.is_injective()
    assert sigma.image() == image
    assert sigma.inverse()["α"] == "u:0:α:2"


def test_sigma_on_tops_is_identity(ex1):
    sigma = ex1.translation.sigma["t1"]
    assert sigma.mapping == {name: name for name in GREEK.values()}


def test_sigma_refuses_variables(ex1):
    with pytest.raises(InputError):
        compute_sigma(ex1.translation, "x1")
