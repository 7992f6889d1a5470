"""
The three example instances, built from literal data, plus the values
each one is expected to reproduce.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from .errors import InputError
from .models import FiniteDomain, Instance, Operation, Relation, Row, Template
from .structures import phi_operation, project_relation, relation_from_strings
from .translation import GadgetSpec, TranslationResult, translate

STATED = "STATED"
DERIVED = "DERIVED"
TRIVIAL = "TRIVIAL"

A = FiniteDomain(("0", "1", "2"))
BLOCKS: Tuple[Tuple[str, ...], ...] = (("0", "1"), ("2",))

GREEK = {
    "00010": "α",
    "01100": "β",
    "10100": "γ",
    "11010": "δ",
    "22220": "τ",
}


@dataclass(frozen=True)
class Expected:
    """An expected value with where it comes from."""
    value: Any
    tag: str
    citation: str


@dataclass
class ExampleBundle:
    name: str
    domain: FiniteDomain
    relation: Relation
    csp_template: Template
    instance: Instance
    phi: Operation
    gadgets: Tuple[GadgetSpec, ...]
    row_names: Optional[Mapping[Row, str]]
    var_groups: Dict[str, str]
    translation: TranslationResult
    expected: Dict[str, Expected] = field(default_factory=dict)

    @property
    def template(self) -> Template:
        """The single-relation template the digraph encodes."""
        return Template(self.domain, (self.relation,))

    def expect(self, key: str) -> Optional[Expected]:
        return self.expected.get(key)


# -----------------------------
# Literal data
# -----------------------------
def _pairs(*blocks: Sequence[str]) -> FrozenSet[Tuple[str, str]]:
    out = set()
    for block in blocks:
        out.update(itertools.product(block, repeat=2))
    return frozenset(out)


def _cross(left: Sequence[str], right: Sequence[str]) -> FrozenSet[Tuple[str, str]]:
    return frozenset(itertools.product(left, right))


TAU = frozenset({("τ", "τ")})

B_TABLES: Dict[str, FrozenSet[Tuple[str, str]]] = {
    "E1": _pairs("αβ", "γδ") | TAU,
    "E2": _pairs("αγ", "βδ") | TAU,
    "E3": _pairs("αδ", "βγ") | TAU,
    "E34": _cross("αδ", "βγ") | _cross("βγ", "αδ") | TAU,
}

BA_TABLES: Dict[str, FrozenSet[Tuple[str, str]]] = {
    "P1": frozenset({("α", "0"), ("β", "0"), ("γ", "1"), ("δ", "1"), ("τ", "2")}),
    "P2": frozenset({("α", "0"), ("β", "1"), ("γ", "0"), ("δ", "1"), ("τ", "2")}),
    "P3": frozenset({("α", "0"), ("β", "1"), ("γ", "1"), ("δ", "0"), ("τ", "2")}),
    "P4": frozenset({("α", "1"), ("β", "0"), ("γ", "0"), ("δ", "1"), ("τ", "2")}),
    "DELTA_BA": _cross("αβγδ", "01") | frozenset({("τ", "2")}),
}

DELTA = _cross("01", "01") | frozenset({("2", "2")})

# top-vertex pairs of the first example and the table between them
TOP_PAIR_TABLES: Dict[Tuple[str, str], str] = {
    ("t1", "t2"): "E1",
    ("t1", "t3"): "E2",
    ("t2", "t3"): "E3",
    ("t3", "t4"): "E1",
    ("t2", "t4"): "E2",
    ("t1", "t4"): "E34",
}

SIGMA_SAMPLE = (
    "t3:Q1:v2R",
    frozenset({"u:0:α:2", "u:0:β:2R", "u:1:γ:2", "u:1:δ:2R", "u:2:τ:2"}),
)

PYRAMID = (
    ("t1", (1, 2, 3), ("x1", "x2", "x3")),
    ("t2", (1, 2, 3), ("x1", "x5", "x6")),
    ("t3", (1, 2, 3), ("x4", "x2", "x6")),
    ("t4", (1, 2, 4), ("x4", "x5", "x3")),
)


def relation_R1() -> Relation:
    return relation_from_strings("R", GREEK)


def relation_R2() -> Relation:
    rows = [r[:4] + c for r in ("00010", "01100", "10100", "11010") for c in "012"]
    rows += ["22220", "22221"]
    return relation_from_strings("R", rows)


def _pyramid(group: str, suffix: str = "", coords: Optional[Tuple[int, ...]] = None) -> List[GadgetSpec]:
    specs = []
    for t, cs, ends in PYRAMID:
        specs.append(
            GadgetSpec(t + suffix, coords or cs, tuple(x + suffix for x in ends), group)
        )
    return specs


def _csp_constraints(suffix: str = "", left: bool = False) -> List[Tuple[str, Tuple[str, ...]]]:
    last = "R1" if left else "R2"
    names = ["R1", "R1", "R1", last]
    scopes = [("x1", "x2", "x3"), ("x1", "x5", "x6"), ("x2", "x4", "x6"), ("x3", "x4", "x5")]
    return [(n, tuple(x + suffix for x in s)) for n, s in zip(names, scopes)]


def _variables(suffix: str = "") -> List[str]:
    return [f"x{k}{suffix}" for k in range(1, 7)]


# -----------------------------
# Bundles
# -----------------------------
def example1() -> ExampleBundle:
    """One 5-ary relation with four rows over {0,1} and the all-2 row; a unique solution."""
    rel = relation_R1()
    r1 = project_relation(rel, (1, 2, 3), "R1")
    r2 = project_relation(rel, (1, 2, 4), "R2")
    instance = Instance.from_constraints(_csp_constraints(), _variables())
    gadgets = tuple(_pyramid("main"))
    row_names = {tuple(k): v for k, v in GREEK.items()}
    tr = translate(A, rel, gadgets, row_names, _variables())
    expected = {
        "relation_size": Expected(5, STATED, "five rows of the 5-ary relation"),
        "maltsev_pairs": Expected(frozenset({("2", "0"), ("2", "1")}), STATED, "phi(b,b,a) != a iff a=2 and b in {0,1}"),
        "endomorphisms": Expected(1, STATED, "the template has no nontrivial endomorphisms"),
        "csp_solutions": Expected(1, STATED, "the constant map to 2 is the unique solution"),
        "paths": Expected(15, STATED, "15 pairwise disjoint oriented paths"),
        "net_length": Expected(7, STATED, "paths of net length 7"),
        "h_vertices": Expected(198, DERIVED, "3 elements + 5 rows + auxiliary vertices"),
        "h_aux": Expected(190, STATED, "190 auxiliary vertices"),
        "g_vertices": Expected(178, DERIVED, "6 variables + 4 tops + 12 copies of 14 interior vertices"),
        "probe_triples": Expected(60, DERIVED, "3 elements x 4 coordinates x 5 rows"),
        "gadget_unique": Expected(True, STATED, "a unique gadget homomorphism per tuple of the relation"),
        "phi_B_sample": Expected((("α", "β", "γ"), "δ"), DERIVED, "coordinatewise phi on the rows alpha, beta, gamma"),
        "homomorphisms": Expected(1, STATED, "exactly one homomorphism from G to H"),
        "solutions": Expected(1, STATED, "the unique solution"),
        "components": Expected(2, STATED, "the microstructure disconnects into two components"),
        "variable_lists": Expected(frozenset(A.elements), STATED, "L(x_i) = {0,1,2} after enforcement"),
        "top_lists": Expected(frozenset(GREEK.values()), STATED, "L(t_j) = B"),
        "sigma_sample": Expected(SIGMA_SAMPLE, STATED, "list of the worked vertex on the Q1 copy from x4 to t3"),
        "variable_pairs": Expected(DELTA, STATED, "L(x_i, x_j) = Delta"),
        "top_pairs": Expected(TOP_PAIR_TABLES, STATED, "L(t_j, t_k) in E1, E2, E3, E34"),
        "block_partition": Expected(BLOCKS, STATED, "partition 01|2 is semilattice block Mal'tsev"),
        "all_fatal": Expected(True, STATED, "every step-4 deletion is disjoint from the unique solution"),
    }
    return ExampleBundle(
        name="example1",
        domain=A,
        relation=rel,
        csp_template=Template(A, (r1, r2)),
        instance=instance,
        phi=phi_operation(),
        gadgets=gadgets,
        row_names=row_names,
        var_groups={},
        translation=tr,
        expected=expected,
    )


def _bridge_template(rel: Relation) -> Template:
    e = project_relation(rel, (1, 5), "E")
    r1 = project_relation(rel, (1, 2, 3), "R1")
    r2 = project_relation(rel, (1, 2, 4), "R2")
    return Template(A, (e, r1, r2))


def example2() -> ExampleBundle:
    """The 14-row relation with a bridge constraint E(x0, x1); two solutions."""
    rel = relation_R2()
    variables = ["x0"] + _variables()
    constraints = [("E", ("x0", "x1"))] + _csp_constraints()
    gadgets = (GadgetSpec("t0", (5, 1), ("x0", "x1"), "bridge"),) + tuple(_pyramid("pyramid"))
    var_groups = {x: "pyramid" for x in _variables()}
    tr = translate(A, rel, gadgets, None, variables, var_groups)
    expected = {
        "relation_size": Expected(14, STATED, "the 14 listed 5-tuples"),
        "maltsev_pairs": Expected(frozenset({("2", "0"), ("2", "1")}), STATED, "same phi as the first example"),
        "csp_solutions": Expected(2, STATED, "exactly two solutions"),
        "paths": Expected(42, STATED, "42 pairwise disjoint oriented paths"),
        "net_length": Expected(7, STATED, "paths of net length 7"),
        "h_aux": Expected(532, DERIVED, "construction rule: 42*6 + 2*140"),
        "h_aux_stated": Expected(672, STATED, "672 auxiliary vertices"),
        "h_vertices": Expected(549, DERIVED, "3 elements + 14 rows + 532 auxiliary vertices"),
        "g_vertices": Expected(208, DERIVED, "7 variables + 5 tops + 14 copies of 14 interior vertices"),
        "solutions": Expected(2, STATED, "exactly two homomorphisms, determined by their values on x0..x6"),
        "homomorphisms": Expected(32, DERIVED, "tops of the pyramid may end in 22220 or 22221"),
        "components": Expected(1, STATED, "the microstructure graph is highly connected"),
        "fatal_variables": Expected(
            frozenset((x, "2") for x in _variables()), STATED,
            "deleting 2 from any of x1..x6 loses all solutions",
        ),
        "safe_group": Expected("bridge", STATED, "a deletion on the path from x1 to x0 keeps a solution"),
    }
    return ExampleBundle(
        name="example2",
        domain=A,
        relation=rel,
        csp_template=_bridge_template(rel),
        instance=Instance.from_constraints(constraints, variables),
        phi=phi_operation(),
        gadgets=gadgets,
        row_names=None,
        var_groups=var_groups,
        translation=tr,
        expected=expected,
    )


def example2_extended() -> ExampleBundle:
    """Second example with a consistent parity pyramid attached on the left; 8 solutions."""
    rel = relation_R2()
    right, left = _variables(), _variables("'")
    variables = right + left
    constraints = _csp_constraints() + [("E", ("x1'", "x1"))] + _csp_constraints("'", left=True)
    gadgets = (
        tuple(_pyramid("right"))
        + (GadgetSpec("t0", (5, 1), ("x1'", "x1"), "bridge"),)
        + tuple(_pyramid("left", "'", (1, 2, 3)))
    )
    var_groups = {x: "right" for x in right}
    var_groups.update({x: "left" for x in left})
    tr = translate(A, rel, gadgets, None, variables, var_groups)
    expected = {
        "csp_solutions": Expected(8, STATED, "the new system has 8 solutions"),
        "solutions": Expected(8, STATED, "the new system has 8 solutions"),
        "right_value": Expected("2", STATED, "all solutions equal 2 on x1..x6"),
        "left_values": Expected(frozenset({"0", "1"}), STATED, "solutions are in {0,1} on x1'..x6'"),
        "kernel_dimension": Expected(3, DERIVED, "rank 3 for the four left parity equations"),
        "variables": Expected(12, DERIVED, "x1..x6 and x1'..x6'"),
        "variables_stated": Expected(13, STATED, "13 variables in the extended system"),
        "tops": Expected(9, DERIVED, "four tops per pyramid and the bridge"),
        "g_vertices": Expected(385, DERIVED, "12 variables + 9 tops + 26 copies of 14 interior vertices"),
        "safe_group": Expected("left", STATED, "the violation can be removed from any left-pyramid variable"),
        "preserved": Expected(8, STATED, "all 8 solutions survive a left-pyramid deletion"),
        "fatal_group": Expected("right", STATED, "but not from any right-pyramid variable"),
    }
    return ExampleBundle(
        name="example2x",
        domain=A,
        relation=rel,
        csp_template=_bridge_template(rel),
        instance=Instance.from_constraints(constraints, variables),
        phi=phi_operation(),
        gadgets=gadgets,
        row_names=None,
        var_groups=var_groups,
        translation=tr,
        expected=expected,
    )


EXAMPLES = {
    "1": example1,
    "example1": example1,
    "2": example2,
    "example2": example2,
    "2x": example2_extended,
    "example2x": example2_extended,
}


def load_example(name: str) -> ExampleBundle:
    try:
        build = EXAMPLES[str(name).strip().lower()]
    except KeyError:
        raise InputError(f"unknown example {name!r}; expected one of 1, 2, 2x") from None
    return build()
