from __future__ import annotations

from pathlib import Path
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .consistency import ConsistencyState
from .errors import InputError
from .models import Digraph, FiniteDomain, Instance, Operation, Relation, Template


def _lines(text: str) -> Iterator[Tuple[int, List[str]]]:
    """Non-empty lines with '#' comments stripped, as (line number, fields)."""
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line.split()


def _read(path: str) -> str:
    p = Path(path)
    if not p.exists():
        raise InputError(f"file not found: {path}")
    return p.read_text(encoding="utf-8")


def parse_relations(text: str) -> Template:
    domain: Optional[Tuple[str, ...]] = None
    relations: List[Relation] = []
    name: Optional[str] = None
    arity = 0
    rows: List[Tuple[str, ...]] = []

    def close() -> None:
        if name is not None:
            relations.append(Relation(name, arity, frozenset(rows)))

    for no, fields in _lines(text):
        head = fields[0]
        if head == "domain":
            if domain is not None:
                raise InputError(f"line {no}: second domain line")
            domain = tuple(fields[1:])
        elif head == "relation":
            if len(fields) != 3 or not fields[2].isdigit():
                raise InputError(f"line {no}: expected 'relation NAME ARITY'")
            close()
            name, arity, rows = fields[1], int(fields[2]), []
        else:
            if name is None:
                raise InputError(f"line {no}: tuple before any relation header")
            if len(fields) != arity:
                raise InputError(f"line {no}: tuple of length {len(fields)} in relation {name} of arity {arity}")
            rows.append(tuple(fields))
    close()
    if domain is None:
        raise InputError("relation file has no domain line")
    return Template(FiniteDomain(domain), tuple(relations))


def parse_operation(text: str, carrier: Optional[Sequence[str]] = None) -> Operation:
    """`arity N` then `x1 .. xN -> y` lines; the carrier defaults to labels in first-seen order."""
    arity: Optional[int] = None
    table: Dict[Tuple[str, ...], str] = {}
    seen: Dict[str, None] = {}
    for no, fields in _lines(text):
        if fields[0] == "arity":
            if len(fields) != 2 or not fields[1].isdigit():
                raise InputError(f"line {no}: expected 'arity N'")
            arity = int(fields[1])
            continue
        if arity is None:
            raise InputError(f"line {no}: table entry before the arity line")
        if len(fields) != arity + 2 or fields[arity] != "->":
            raise InputError(f"line {no}: expected {arity} arguments, '->' and a value")
        args, out = tuple(fields[:arity]), fields[arity + 1]
        if args in table and table[args] != out:
            raise InputError(f"line {no}: conflicting entry for {' '.join(args)}")
        table[args] = out
        for x in args + (out,):
            seen.setdefault(x, None)
    if arity is None:
        raise InputError("operation file has no arity line")
    return Operation(tuple(carrier) if carrier else tuple(seen), arity, table)


def parse_instance(text: str) -> Instance:
    constraints = []
    for no, fields in _lines(text):
        if len(fields) < 2:
            raise InputError(f"line {no}: a constraint needs a relation name and a scope")
        constraints.append((fields[0], tuple(fields[1:])))
    return Instance.from_constraints(constraints)


def parse_digraph(text: str) -> Digraph:
    vertices: Dict[str, None] = {}
    arcs = []
    prov: Dict[str, str] = {}
    for no, fields in _lines(text):
        kind = fields[0]
        if kind == "v" and len(fields) == 2:
            if fields[1] in vertices:
                raise InputError(f"line {no}: duplicate vertex {fields[1]!r}")
            vertices[fields[1]] = None
        elif kind == "e" and len(fields) == 3:
            arcs.append((fields[1], fields[2]))
        elif kind == "p" and len(fields) == 3:
            prov[fields[1]] = fields[2]
        else:
            raise InputError(f"line {no}: expected 'v LABEL', 'e FROM TO' or 'p LABEL TAG'")
    for u, w in arcs:
        for x in (u, w):
            if x not in vertices:
                raise InputError(f"arc ({u}, {w}) uses undeclared vertex {x!r}")
    return Digraph(tuple(vertices), frozenset(arcs), prov)


def parse_lists(text: str) -> Tuple[Dict[str, FrozenSet[str]], Dict[Tuple[str, str], FrozenSet[Tuple[str, str]]]]:
    """`L v a b ..` and `P v w a,b ..` lines; pairs are returned as written."""
    unary: Dict[str, FrozenSet[str]] = {}
    binary: Dict[Tuple[str, str], FrozenSet[Tuple[str, str]]] = {}
    for no, fields in _lines(text):
        if fields[0] == "L" and len(fields) >= 2:
            unary[fields[1]] = frozenset(fields[2:])
        elif fields[0] == "P" and len(fields) >= 3:
            pairs = []
            for item in fields[3:]:
                parts = item.split(",")
                if len(parts) != 2:
                    raise InputError(f"line {no}: malformed pair {item!r}")
                pairs.append((parts[0], parts[1]))
            binary[(fields[1], fields[2])] = frozenset(pairs)
        else:
            raise InputError(f"line {no}: expected an 'L' or 'P' line")
    return unary, binary


def state_from_lists(
    unary: Dict[str, FrozenSet[str]],
    binary: Dict[Tuple[str, str], FrozenSet[Tuple[str, str]]],
    vertices: Optional[Sequence[str]] = None,
) -> ConsistencyState:
    """Rebuild a symmetric state; a pair missing from `binary` gets the empty list."""
    order = tuple(vertices) if vertices is not None else tuple(unary)
    missing = [v for v in order if v not in unary]
    if missing:
        raise InputError(f"no unary list for {missing[0]!r}")
    values = tuple(tuple(sorted(unary[v])) for v in order)
    n = sum(len(vals) for vals in values)
    state = ConsistencyState(order, values, np.zeros((n, n), dtype=bool))
    for v in order:
        for a in unary[v]:
            i = state.node_index(v, a)
            state.matrix[i, i] = True
    for (v, w), pairs in binary.items():
        if v == w:
            continue
        for a, b in pairs:
            i, j = state.node_index(v, a), state.node_index(w, b)
            state.matrix[i, j] = state.matrix[j, i] = True
    state.consistent = all(values)
    return state


def read_relations(path: str) -> Template:
    return parse_relations(_read(path))


def read_operation(path: str, carrier: Optional[Sequence[str]] = None) -> Operation:
    return parse_operation(_read(path), carrier)


def read_instance(path: str) -> Instance:
    return parse_instance(_read(path))


def read_digraph(path: str) -> Digraph:
    return parse_digraph(_read(path))


def read_lists(path: str, vertices: Optional[Sequence[str]] = None) -> ConsistencyState:
    unary, binary = parse_lists(_read(path))
    return state_from_lists(unary, binary, vertices)
