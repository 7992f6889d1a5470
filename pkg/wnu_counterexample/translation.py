from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from .digraph import enumerate_homomorphisms
from .errors import ConstructionError, InputError
from .models import Digraph, FiniteDomain, OrientedPath, Relation, Row

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GadgetSpec:
    """Copies of Q_{coords[k]} from endpoints[k] into a shared top vertex t."""
    t: str
    coords: Tuple[int, ...]
    endpoints: Tuple[str, ...]
    group: str = "main"

    def __post_init__(self) -> None:
        coords = tuple(int(c) for c in self.coords)
        endpoints = tuple(self.endpoints)
        if len(coords) != len(endpoints):
            raise InputError(f"gadget {self.t}: {len(coords)} coordinates for {len(endpoints)} endpoints")
        if len(set(coords)) != len(coords):
            raise InputError(f"gadget {self.t}: coordinates must be distinct, got {coords}")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "endpoints", endpoints)


@dataclass(frozen=True)
class Leg:
    """Position of a G-vertex on a Q copy: the copy's top t, coordinate, endpoint and Q-vertex."""
    t: str
    coord: int
    endpoint: str
    q_vertex: str
    height: int


@dataclass(frozen=True)
class SigmaMap:
    """Row name -> H-vertex; the image of one G-vertex under each row's unique Q->P map."""
    vertex: str
    mapping: Mapping[str, str] = field(hash=False)

    def image(self) -> FrozenSet[str]:
        return frozenset(self.mapping.values())

    def is_injective(self) -> bool:
        return len(self.image()) == len(self.mapping)

    def inverse(self) -> Dict[str, str]:
        if not self.is_injective():
            raise ConstructionError(f"sigma at {self.vertex} is not injective")
        return {v: k for k, v in self.mapping.items()}


@dataclass
class TranslationResult:
    H: Digraph
    G: Digraph
    domain: FiniteDomain
    relation: Relation
    rows: Dict[str, Row]
    var_vertices: Dict[str, str]
    t_vertices: Dict[str, str]
    legs: Dict[str, Leg]
    groups: Dict[str, str]
    gadgets: Tuple[GadgetSpec, ...]
    sigma: Dict[str, SigmaMap] = field(default_factory=dict)

    @property
    def row_names(self) -> Tuple[str, ...]:
        return tuple(self.rows)

    @property
    def arity(self) -> int:
        return self.relation.arity

    def is_variable(self, v: str) -> bool:
        return v in self.var_vertices.values()

    def is_top(self, v: str) -> bool:
        return v in self.t_vertices.values()

    def group_of(self, v: str) -> str:
        return self.groups.get(v, "main")


# -----------------------------
# Paths
# -----------------------------
def row_label(row: Row) -> str:
    if all(len(x) == 1 for x in row):
        return "".join(row)
    return ",".join(row)


def build_P(a: str, row: Row, name: Optional[str] = None) -> OrientedPath:
    """
    a -> u0 -> ... -> uk -> row. Segment i is a single arc when row[i] == a,
    else the zigzag u(i-1) -> u(iL) <- u(i-1 R) -> u(i).
    """
    name = name or row_label(row)

    def u(s: object) -> str:
        return f"u:{a}:{name}:{s}"

    vertices = [a, u(0)]
    directions = [1]
    for i in range(1, len(row) + 1):
        if row[i - 1] == a:
            vertices.append(u(i))
            directions.append(1)
        else:
            vertices += [u(f"{i}L"), u(f"{i - 1}R"), u(i)]
            directions += [1, -1, 1]
    vertices.append(name)
    directions.append(1)
    return OrientedPath(tuple(vertices), tuple(directions))


def build_Q(i: int, arity: int = 5, prefix: str = "", b: str = "b", t: str = "t") -> OrientedPath:
    """
    b -> v0 -> ... -> vk -> t with a single arc at segment i and zigzags elsewhere.
    """
    if not 1 <= i <= arity:
        raise InputError(f"coordinate {i} out of range 1..{arity}")

    def v(s: object) -> str:
        return f"{prefix}v{s}"

    vertices = [b, v(0)]
    directions = [1]
    for j in range(1, arity + 1):
        if j == i:
            vertices.append(v(j))
            directions.append(1)
        else:
            vertices += [v(f"{j}L"), v(f"{j - 1}R"), v(j)]
            directions += [1, -1, 1]
    vertices.append(t)
    directions.append(1)
    return OrientedPath(tuple(vertices), tuple(directions))


def _named_rows(rel: Relation, row_names: Optional[Mapping[Row, str]]) -> Dict[str, Row]:
    rows: Dict[str, Row] = {}
    for row in rel.sorted_tuples():
        name = row_names[row] if row_names else row_label(row)
        if name in rows:
            raise InputError(f"row name {name!r} used twice")
        rows[name] = row
    return rows


def build_H(domain: FiniteDomain, rel: Relation, row_names: Optional[Mapping[Row, str]] = None) -> Digraph:
    """Union of the |domain|*|R| paths P(a, row); paths share only their endpoints."""
    if not rel.tuples:
        raise InputError(f"relation {rel.name} is empty")
    rows = _named_rows(rel, row_names)
    clash = set(rows) & set(domain.elements)
    if clash:
        raise InputError(f"row names collide with domain elements: {sorted(clash)}")
    vertices: List[str] = list(domain.elements) + list(rows)
    prov = {a: "elem" for a in domain.elements}
    prov.update({name: "row" for name in rows})
    arcs = set()
    for a in domain.elements:
        for name, row in rows.items():
            path = build_P(a, row, name)
            heights = path.heights()
            for v in path.vertices[1:-1]:
                if v in prov:
                    raise ConstructionError(f"paths are not interior-disjoint at {v}")
                vertices.append(v)
                prov[v] = f"P:{a}:{name}:h{heights[v]}"
            arcs.update(path.arcs())
    h = Digraph(tuple(vertices), frozenset(arcs), prov)
    log.info("built H: %d vertices, %d arcs", len(h.vertices), len(h.arcs))
    return h


def aux_vertex_count(domain: FiniteDomain, rel: Relation) -> int:
    """Closed form: each path has k+1 spine vertices plus 2 per mismatched coordinate."""
    k = rel.arity
    return sum(
        k + 1 + 2 * sum(1 for x in row if x != a)
        for a in domain.elements
        for row in rel.tuples
    )


# -----------------------------
# Gadgets + G
# -----------------------------
@dataclass(frozen=True)
class Gadget:
    digraph: Digraph
    spec: GadgetSpec
    legs: Mapping[str, Leg] = field(hash=False)


def _copy_label(t: str, i: int) -> str:
    return f"{t}:Q{i}:"


def build_gadget(
    coords: Sequence[int],
    endpoints: Sequence[str],
    t: str = "t",
    arity: int = 5,
    group: str = "main",
) -> Gadget:
    spec = GadgetSpec(t, tuple(coords), tuple(endpoints), group)
    vertices: Dict[str, None] = {}
    arcs = set()
    prov: Dict[str, str] = {}
    legs: Dict[str, Leg] = {}
    for x in spec.endpoints:
        vertices.setdefault(x, None)
        prov[x] = f"var:{x}"
    vertices.setdefault(t, None)
    prov[t] = f"t:{t}:{group}"
    for i, x in zip(spec.coords, spec.endpoints):
        prefix = _copy_label(t, i)
        path = build_Q(i, arity, prefix=prefix, b=x, t=t)
        plain = build_Q(i, arity)
        heights = plain.heights()
        for v, q in zip(path.vertices[1:-1], plain.vertices[1:-1]):
            vertices[v] = None
            legs[v] = Leg(t, i, x, q, heights[q])
            prov[v] = f"q:{t}:Q{i}:{q}:h{heights[q]}"
        arcs.update(path.arcs())
    return Gadget(Digraph(tuple(vertices), frozenset(arcs), prov), spec, legs)


def build_G(
    gadgets: Sequence[GadgetSpec],
    arity: int = 5,
    variables: Optional[Sequence[str]] = None,
) -> Tuple[Digraph, Dict[str, Leg]]:
    """Glue gadget copies at shared variable vertices; returns G and the leg table."""
    if variables is None:
        seen: Dict[str, None] = {}
        for spec in gadgets:
            for x in spec.endpoints:
                seen.setdefault(x, None)
        variables = list(seen)
    tops = [spec.t for spec in gadgets]
    if len(set(tops)) != len(tops):
        raise InputError(f"gadget top labels must be distinct: {tops}")
    if set(tops) & set(variables):
        raise InputError("gadget top labels collide with variables")

    vertices: List[str] = list(variables) + tops
    prov: Dict[str, str] = {x: f"var:{x}" for x in variables}
    arcs = set()
    legs: Dict[str, Leg] = {}
    for spec in gadgets:
        missing = [x for x in spec.endpoints if x not in prov]
        if missing:
            raise InputError(f"gadget {spec.t}: undeclared variable {missing[0]!r}")
        piece = build_gadget(spec.coords, spec.endpoints, spec.t, arity, spec.group)
        prov[spec.t] = piece.digraph.provenance[spec.t]
        for v in piece.digraph.vertices:
            if v in piece.legs:
                if v in legs:
                    raise ConstructionError(f"Q copy vertex {v} appears twice")
                vertices.append(v)
                prov[v] = piece.digraph.provenance[v]
        legs.update(piece.legs)
        arcs.update(piece.digraph.arcs)
    return Digraph(tuple(vertices), frozenset(arcs), prov), legs


# -----------------------------
# Probe homomorphisms + sigma
# -----------------------------
@lru_cache(maxsize=None)
def _probe_homs(i: int, a: str, row: Row, name: str, arity: int) -> Tuple[Tuple[Tuple[str, str], ...], ...]:
    q = build_Q(i, arity).to_digraph()
    p = build_P(a, row, name).to_digraph()
    homs = enumerate_homomorphisms(q, p)
    return tuple(tuple(sorted(f.items())) for f in homs)


@dataclass(frozen=True)
class ProbeCensusRow:
    a: str
    i: int
    row: str
    expected: int
    count: int
    surjective: bool

    @property
    def ok(self) -> bool:
        return self.count == self.expected and (self.count == 0 or self.surjective)


def probe_census(
    domain: FiniteDomain,
    rel: Relation,
    coords: Sequence[int],
    row_names: Optional[Mapping[Row, str]] = None,
) -> List[ProbeCensusRow]:
    """Hom count and surjectivity of Q_i -> P(a, row) for every (a, i, row)."""
    rows = _named_rows(rel, row_names)
    out: List[ProbeCensusRow] = []
    for a in domain.elements:
        for i in coords:
            for name, row in rows.items():
                homs = _probe_homs(i, a, row, name, rel.arity)
                target = set(build_P(a, row, name).vertices)
                surjective = all({v for _, v in f} == target for f in homs) and bool(homs)
                out.append(ProbeCensusRow(a, i, name, int(row[i - 1] == a), len(homs), surjective))
    return out


def compute_sigma(tr: TranslationResult, vbar: str) -> SigmaMap:
    if tr.is_variable(vbar):
        raise InputError(f"{vbar} is a variable vertex; sigma is defined off the variables")
    if tr.is_top(vbar):
        return SigmaMap(vbar, {name: name for name in tr.rows})
    if vbar not in tr.legs:
        raise InputError(f"{vbar} is not a vertex of G")
    leg = tr.legs[vbar]
    mapping: Dict[str, str] = {}
    for name, row in tr.rows.items():
        a = row[leg.coord - 1]
        homs = _probe_homs(leg.coord, a, row, name, tr.arity)
        if len(homs) != 1:
            raise ConstructionError(
                f"expected a unique Q{leg.coord} -> P({a},{name}) homomorphism, found {len(homs)}"
            )
        mapping[name] = dict(homs[0])[leg.q_vertex]
    return SigmaMap(vbar, mapping)


def translate(
    domain: FiniteDomain,
    rel: Relation,
    gadgets: Sequence[GadgetSpec],
    row_names: Optional[Mapping[Row, str]] = None,
    variables: Optional[Sequence[str]] = None,
    var_groups: Optional[Mapping[str, str]] = None,
) -> TranslationResult:
    """Build H, G, the leg table and every sigma map for one gadget list."""
    rows = _named_rows(rel, row_names)
    h = build_H(domain, rel, row_names)
    g, legs = build_G(gadgets, rel.arity, variables)
    for spec in gadgets:
        bad = [c for c in spec.coords if not 1 <= c <= rel.arity]
        if bad:
            raise InputError(f"gadget {spec.t}: coordinate {bad[0]} out of range 1..{rel.arity}")
    var_names = [v for v in g.vertices if g.provenance[v].startswith("var:")]
    groups: Dict[str, str] = {}
    for spec in gadgets:
        groups[spec.t] = spec.group
        for x in spec.endpoints:
            groups.setdefault(x, spec.group)
    groups.update(var_groups or {})
    for v, leg in legs.items():
        groups[v] = groups[leg.t]

    tr = TranslationResult(
        H=h,
        G=g,
        domain=domain,
        relation=rel,
        rows=rows,
        var_vertices={x: x for x in var_names},
        t_vertices={spec.t: spec.t for spec in gadgets},
        legs=legs,
        groups=groups,
        gadgets=tuple(gadgets),
    )
    tr.sigma = {v: compute_sigma(tr, v) for v in g.vertices if not tr.is_variable(v)}
    log.info("built G: %d vertices (%d variables, %d gadgets)", len(g.vertices), len(var_names), len(gadgets))
    return tr


def pp_relation(h: Digraph, gadget: Gadget) -> Dict[Tuple[str, ...], int]:
    """Projection of Hom(gadget, h) onto the endpoints, with extension counts."""
    counts: Dict[Tuple[str, ...], int] = {}
    for f in enumerate_homomorphisms(gadget.digraph, h):
        key = tuple(f[x] for x in gadget.spec.endpoints)
        counts[key] = counts.get(key, 0) + 1
    return dict(sorted(counts.items()))
