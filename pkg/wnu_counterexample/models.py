from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Tuple
import hashlib
import itertools

import networkx as nx

from .errors import ConstructionError, InputError

Row = Tuple[str, ...]
Arc = Tuple[str, str]


@dataclass(frozen=True)
class FiniteDomain:
    """Ordered, duplicate-free set of element labels."""
    elements: Tuple[str, ...]

    def __post_init__(self) -> None:
        elements = tuple(str(e) for e in self.elements)
        if len(set(elements)) != len(elements):
            raise InputError(f"duplicate domain elements: {elements}")
        object.__setattr__(self, "elements", elements)

    def __iter__(self) -> Iterator[str]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, x: object) -> bool:
        return x in self.elements


@dataclass(frozen=True)
class Relation:
    """A named finite relation; tuples are stored as a frozenset of label tuples."""
    name: str
    arity: int
    tuples: FrozenSet[Row]

    def __post_init__(self) -> None:
        if self.arity < 1:
            raise InputError(f"relation {self.name}: arity must be positive, got {self.arity}")
        tuples = frozenset(tuple(str(x) for x in t) for t in self.tuples)
        for t in tuples:
            if len(t) != self.arity:
                raise InputError(f"relation {self.name}: tuple {t} has length {len(t)}, expected {self.arity}")
        object.__setattr__(self, "tuples", tuples)

    def sorted_tuples(self) -> List[Row]:
        return sorted(self.tuples)

    def renamed(self, name: str) -> "Relation":
        return Relation(name, self.arity, self.tuples)

    def __len__(self) -> int:
        return len(self.tuples)

    def __contains__(self, t: object) -> bool:
        return t in self.tuples


@dataclass(frozen=True)
class Template:
    """Relational structure: a domain plus named relations over it."""
    domain: FiniteDomain
    relations: Tuple[Relation, ...] = ()

    def __post_init__(self) -> None:
        relations = tuple(self.relations)
        names = [r.name for r in relations]
        if len(set(names)) != len(names):
            raise InputError(f"duplicate relation names: {names}")
        for rel in relations:
            for t in rel.tuples:
                bad = [x for x in t if x not in self.domain]
                if bad:
                    raise InputError(f"relation {rel.name}: {bad[0]!r} is not a domain element")
        object.__setattr__(self, "relations", relations)

    def relation(self, name: str) -> Relation:
        for rel in self.relations:
            if rel.name == name:
                return rel
        raise InputError(f"unknown relation {name!r}; template has {[r.name for r in self.relations]}")


@dataclass(frozen=True)
class Instance:
    """CSP instance: ordered variables and (relation name, scope) constraints."""
    variables: Tuple[str, ...]
    constraints: Tuple[Tuple[str, Tuple[str, ...]], ...] = ()

    def __post_init__(self) -> None:
        variables = tuple(self.variables)
        if len(set(variables)) != len(variables):
            raise InputError(f"duplicate variables: {variables}")
        constraints = tuple((str(name), tuple(scope)) for name, scope in self.constraints)
        declared = set(variables)
        for name, scope in constraints:
            missing = [v for v in scope if v not in declared]
            if missing:
                raise InputError(f"constraint {name}{scope}: undeclared variable {missing[0]!r}")
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "constraints", constraints)

    @classmethod
    def from_constraints(
        cls,
        constraints: Iterable[Tuple[str, Iterable[str]]],
        variables: Optional[Iterable[str]] = None,
    ) -> "Instance":
        cons = [(name, tuple(scope)) for name, scope in constraints]
        if variables is None:
            seen: Dict[str, None] = {}
            for _, scope in cons:
                for v in scope:
                    seen.setdefault(v, None)
            variables = list(seen)
        return cls(tuple(variables), tuple(cons))

    def check_against(self, tmpl: Template) -> None:
        for name, scope in self.constraints:
            rel = tmpl.relation(name)
            if len(scope) != rel.arity:
                raise InputError(f"constraint {name}{scope}: arity {len(scope)} != {rel.arity}")


@dataclass(frozen=True)
class Operation:
    """Total finite operation given by its table over an ordered carrier."""
    carrier: Tuple[str, ...]
    arity: int
    table: Mapping[Row, str] = field(hash=False)

    def __post_init__(self) -> None:
        carrier = tuple(str(x) for x in self.carrier)
        if len(set(carrier)) != len(carrier):
            raise InputError(f"duplicate carrier elements: {carrier}")
        if self.arity < 1:
            raise InputError("operation arity must be positive")
        table = {tuple(k): str(v) for k, v in self.table.items()}
        members = set(carrier)
        for args in itertools.product(carrier, repeat=self.arity):
            if args not in table:
                raise InputError(f"operation table is not total: missing {args}")
        for args, out in table.items():
            if len(args) != self.arity or not members.issuperset(args):
                raise InputError(f"operation table entry {args} outside carrier^{self.arity}")
            if out not in members:
                raise InputError(f"operation output {out!r} at {args} outside carrier")
        object.__setattr__(self, "carrier", carrier)
        object.__setattr__(self, "table", table)

    def __call__(self, *args: str) -> str:
        return self.table[tuple(args)]

    def restrict(self, subset: Iterable[str]) -> "Operation":
        """Restriction to a subset of the carrier; the subset must be closed."""
        keep = set(subset)
        carrier = tuple(x for x in self.carrier if x in keep)
        if len(carrier) != len(keep):
            raise InputError(f"restriction to {sorted(keep)} leaves the carrier")
        table: Dict[Row, str] = {}
        for args in itertools.product(carrier, repeat=self.arity):
            out = self.table[args]
            if out not in keep:
                raise ConstructionError(f"subset {sorted(keep)} not closed: op{args} = {out}")
            table[args] = out
        return Operation(carrier, self.arity, table)

    def relabel(self, mapping: Mapping[str, str]) -> "Operation":
        """Transport the operation along an injective relabelling of the carrier."""
        images = [mapping[x] for x in self.carrier]
        if len(set(images)) != len(images):
            raise ConstructionError("relabelling is not injective")
        table = {
            tuple(mapping[a] for a in args): mapping[out] for args, out in self.table.items()
        }
        return Operation(tuple(images), self.arity, table)

    def with_entry(self, args: Iterable[str], value: str) -> "Operation":
        table = dict(self.table)
        table[tuple(args)] = value
        return Operation(self.carrier, self.arity, table)


@dataclass(frozen=True)
class PolymorphismCheck:
    """Verdict of a polymorphism test; on failure carries the first violation."""
    ok: bool
    relation: Optional[str] = None
    inputs: Tuple[Row, ...] = ()
    output: Optional[Row] = None


@dataclass(frozen=True)
class OperationProperties:
    idempotent: bool
    cyclic: bool
    wnu: bool
    maltsev_pairs: FrozenSet[Tuple[str, str]]


@dataclass(frozen=True)
class VerifyResult:
    """Generic pass/fail verdict with an optional witness."""
    ok: bool
    witness: Optional[Any] = None
    detail: str = ""


@dataclass(frozen=True)
class Digraph:
    """Finite digraph; provenance tags are carried along but ignored by equality."""
    vertices: Tuple[str, ...]
    arcs: FrozenSet[Arc]
    provenance: Mapping[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        vertices = tuple(str(v) for v in self.vertices)
        if len(set(vertices)) != len(vertices):
            raise InputError("duplicate vertex labels")
        known = set(vertices)
        arcs = frozenset((str(u), str(v)) for u, v in self.arcs)
        for u, v in arcs:
            if u not in known or v not in known:
                raise InputError(f"arc ({u}, {v}) references an unknown vertex")
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "arcs", arcs)
        object.__setattr__(self, "provenance", dict(self.provenance))

    def __len__(self) -> int:
        return len(self.vertices)

    @cached_property
    def succ(self) -> Dict[str, FrozenSet[str]]:
        out: Dict[str, set] = {v: set() for v in self.vertices}
        for u, v in self.arcs:
            out[u].add(v)
        return {v: frozenset(s) for v, s in out.items()}

    @cached_property
    def pred(self) -> Dict[str, FrozenSet[str]]:
        inn: Dict[str, set] = {v: set() for v in self.vertices}
        for u, v in self.arcs:
            inn[v].add(u)
        return {v: frozenset(s) for v, s in inn.items()}

    @cached_property
    def index(self) -> Dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    def has_loops(self) -> bool:
        return any(u == v for u, v in self.arcs)

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        for v in self.vertices:
            g.add_node(v, provenance=self.provenance.get(v))
        g.add_edges_from(sorted(self.arcs))
        return g

    def induced(self, keep: Iterable[str]) -> "Digraph":
        keep_set = set(keep)
        vertices = tuple(v for v in self.vertices if v in keep_set)
        arcs = frozenset((u, v) for u, v in self.arcs if u in keep_set and v in keep_set)
        prov = {v: t for v, t in self.provenance.items() if v in keep_set}
        return Digraph(vertices, arcs, prov)

    def to_text(self) -> str:
        """Canonical serialisation: vertices in order, sorted arcs, then provenance."""
        lines = [f"v {v}" for v in self.vertices]
        lines += [f"e {u} {v}" for u, v in sorted(self.arcs)]
        lines += [f"p {v} {self.provenance[v]}" for v in self.vertices if v in self.provenance]
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha1(self.to_text().encode("utf-8")).hexdigest()[:12]


@dataclass(frozen=True)
class OrientedPath:
    """Vertex sequence with per-step direction (+1 forward arc, -1 backward arc)."""
    vertices: Tuple[str, ...]
    directions: Tuple[int, ...]

    def __post_init__(self) -> None:
        vertices = tuple(self.vertices)
        directions = tuple(int(d) for d in self.directions)
        if len(directions) != len(vertices) - 1:
            raise ConstructionError("a path needs exactly one direction per step")
        if any(d not in (1, -1) for d in directions):
            raise ConstructionError(f"directions must be +1/-1, got {directions}")
        if len(set(vertices)) != len(vertices):
            raise ConstructionError("path vertices must be distinct")
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "directions", directions)

    @property
    def start(self) -> str:
        return self.vertices[0]

    @property
    def end(self) -> str:
        return self.vertices[-1]

    def heights(self) -> Dict[str, int]:
        """Height of every vertex above the start, following the directions."""
        out = {self.vertices[0]: 0}
        h = 0
        for v, d in zip(self.vertices[1:], self.directions):
            h += d
            out[v] = h
        return out

    def arcs(self) -> List[Arc]:
        out: List[Arc] = []
        for (u, v), d in zip(zip(self.vertices, self.vertices[1:]), self.directions):
            out.append((u, v) if d == 1 else (v, u))
        return out

    def to_digraph(self) -> Digraph:
        return Digraph(self.vertices, frozenset(self.arcs()))


@dataclass(frozen=True)
class LevelResult:
    """Outcome of level computation; `witness` is an arc closing an unbalanced cycle."""
    balanced: bool
    levels: Mapping[str, int] = field(default_factory=dict)
    witness: Optional[Arc] = None
