from __future__ import annotations

import itertools
import logging
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConstructionError, InputError
from .models import (
    Instance,
    Operation,
    OperationProperties,
    PolymorphismCheck,
    Relation,
    Row,
    Template,
    VerifyResult,
)

log = logging.getLogger(__name__)

MAX_ENDOMORPHISM_DOMAIN = 10


# -----------------------------
# Relations
# -----------------------------
def project_relation(rel: Relation, coords: Sequence[int], name: Optional[str] = None) -> Relation:
    """
    Project a relation onto 1-based coordinates (duplicates collapse).
    """
    coords = tuple(int(c) for c in coords)
    if not coords:
        raise InputError("projection needs at least one coordinate")
    for c in coords:
        if not 1 <= c <= rel.arity:
            raise InputError(f"coordinate {c} out of range 1..{rel.arity} for relation {rel.name}")
    if name is None:
        identity = coords == tuple(range(1, rel.arity + 1))
        name = rel.name if identity else f"{rel.name}_{''.join(str(c) for c in coords)}"
    tuples = frozenset(tuple(t[c - 1] for c in coords) for t in rel.tuples)
    return Relation(name, len(coords), tuples)


# -----------------------------
# Operations
# -----------------------------
def operation_from_rule(carrier: Sequence[str], arity: int, rule: Callable[..., str]) -> Operation:
    table = {args: str(rule(*args)) for args in itertools.product(tuple(carrier), repeat=arity)}
    return Operation(tuple(carrier), arity, table)


def parity_operation(carrier: Sequence[str] = ("0", "1")) -> Operation:
    """m(x,y,z) = x + y + z mod 2 on a two-element carrier."""
    lo, hi = carrier
    bit = {lo: 0, hi: 1}
    back = {0: lo, 1: hi}
    return operation_from_rule(carrier, 3, lambda x, y, z: back[(bit[x] + bit[y] + bit[z]) % 2])


def phi_operation() -> Operation:
    """
    The ternary operation on {0,1,2}: parity on {0,1}; otherwise the three
    cyclic patterns (2,a,b), (b,2,a), (a,b,2) -> a for a in {0,1}; and 2 on (2,2,2).

    The table is materialised from the case rules and every entry is written
    through a conflict check, so overlapping patterns raise immediately.
    """
    elements = ("0", "1", "2")
    table: Dict[Row, str] = {}

    def put(args: Row, value: str) -> None:
        prev = table.get(args)
        if prev is not None and prev != value:
            raise ConstructionError(f"phi is ill-defined at {args}: {prev} vs {value}")
        table[args] = value

    for args in itertools.product("01", repeat=3):
        put(args, str(sum(int(x) for x in args) % 2))
    for a in "01":
        for b in elements:
            put(("2", a, b), a)
            put((b, "2", a), a)
            put((a, b, "2"), a)
    put(("2", "2", "2"), "2")
    return Operation(elements, 3, table)


def derived_binary(op: Operation) -> Operation:
    """f(x, y) = op(x, ..., x, y)."""
    n = op.arity
    return operation_from_rule(op.carrier, 2, lambda x, y: op.table[(x,) * (n - 1) + (y,)])


def check_polymorphism(op: Operation, tmpl: Template) -> PolymorphismCheck:
    if set(op.carrier) != set(tmpl.domain.elements):
        raise InputError(
            f"operation carrier {op.carrier} does not match template domain {tmpl.domain.elements}"
        )
    for rel in tmpl.relations:
        rows = rel.sorted_tuples()
        for combo in itertools.product(rows, repeat=op.arity):
            out = tuple(op.table[col] for col in zip(*combo))
            if out not in rel.tuples:
                log.debug("relation %s not closed: %s -> %s", rel.name, combo, out)
                return PolymorphismCheck(False, rel.name, tuple(combo), out)
    return PolymorphismCheck(True)


def check_operation_properties(op: Operation) -> OperationProperties:
    if op.arity < 2:
        raise InputError("property checks need arity >= 2")
    n = op.arity
    c = op.carrier
    t = op.table

    idempotent = all(t[(x,) * n] == x for x in c)
    cyclic = all(t[args] == t[args[1:] + args[:1]] for args in t)

    def near_unanimous(x: str, y: str) -> bool:
        outs = {t[tuple(y if k == j else x for k in range(n))] for j in range(n)}
        return len(outs) == 1

    wnu = all(near_unanimous(x, y) for x in c for y in c)
    maltsev = frozenset((a, b) for a in c for b in c if t[(b,) * (n - 1) + (a,)] != a)
    return OperationProperties(idempotent, cyclic, wnu, maltsev)


# -----------------------------
# Endomorphisms + solving
# -----------------------------
def enumerate_endomorphisms(tmpl: Template) -> List[Dict[str, str]]:
    elements = tmpl.domain.elements
    if len(elements) > MAX_ENDOMORPHISM_DOMAIN:
        raise InputError(
            f"domain of size {len(elements)} is too large for endomorphism enumeration "
            f"(limit {MAX_ENDOMORPHISM_DOMAIN})"
        )
    maps: List[Dict[str, str]] = []
    for images in itertools.product(elements, repeat=len(elements)):
        f = dict(zip(elements, images))
        if all(
            tuple(f[x] for x in row) in rel.tuples
            for rel in tmpl.relations
            for row in rel.tuples
        ):
            maps.append(f)
    return maps


def solve_instance(tmpl: Template, inst: Instance, limit: Optional[int] = None) -> List[Dict[str, str]]:
    """
    All solutions by backtracking in variable order; a constraint is checked
    as soon as its last variable is assigned.
    """
    inst.check_against(tmpl)
    order = inst.variables
    pos = {v: i for i, v in enumerate(order)}
    checks: List[List[Tuple[frozenset, Tuple[str, ...]]]] = [[] for _ in order]
    for name, scope in inst.constraints:
        rel = tmpl.relation(name)
        checks[max(pos[v] for v in scope)].append((rel.tuples, scope))

    solutions: List[Dict[str, str]] = []
    assignment: Dict[str, str] = {}

    def extend(i: int) -> None:
        if i == len(order):
            solutions.append(dict(assignment))
            return
        v = order[i]
        for a in tmpl.domain.elements:
            if limit is not None and len(solutions) >= limit:
                break
            assignment[v] = a
            if all(tuple(assignment[u] for u in scope) in tuples for tuples, scope in checks[i]):
                extend(i + 1)
        assignment.pop(v, None)

    extend(0)
    return solutions


# -----------------------------
# Block structure + linear algebra over GF(2)
# -----------------------------
def check_block_maltsev(
    op: Operation, tmpl: Template, partition: Sequence[Sequence[str]]
) -> VerifyResult:
    """
    Semilattice block Mal'tsev test for a ternary op: the partition is
    invariant, op is Mal'tsev on each block, and f(x,y)=op(x,x,y) is a
    polymorphism acting as a semilattice on the blocks.
    """
    if op.arity != 3:
        raise InputError("block Mal'tsev check expects a ternary operation")
    blocks = [tuple(b) for b in partition]
    block_of: Dict[str, int] = {}
    for i, block in enumerate(blocks):
        for x in block:
            if x in block_of:
                raise InputError(f"element {x!r} appears in two blocks")
            block_of[x] = i
    if set(block_of) != set(op.carrier):
        raise InputError("partition does not cover the carrier")

    seen: Dict[Tuple[int, ...], int] = {}
    for args, out in op.table.items():
        key = tuple(block_of[a] for a in args)
        if seen.setdefault(key, block_of[out]) != block_of[out]:
            return VerifyResult(False, (args, out), "partition is not invariant")

    for block in blocks:
        for x, y in itertools.product(block, repeat=2):
            if op(x, y, y) != x or op(y, y, x) != x:
                return VerifyResult(False, (x, y), f"not Mal'tsev on block {block}")

    f = derived_binary(op)
    poly = check_polymorphism(f, tmpl)
    if not poly.ok:
        return VerifyResult(False, poly, "derived binary operation is not a polymorphism")

    rep = [b[0] for b in blocks]
    k = len(blocks)

    def q(i: int, j: int) -> int:
        return block_of[f(rep[i], rep[j])]

    for i in range(k):
        if q(i, i) != i:
            return VerifyResult(False, blocks[i], "quotient is not idempotent")
        for j in range(k):
            if q(i, j) != q(j, i):
                return VerifyResult(False, (blocks[i], blocks[j]), "quotient is not commutative")
            for m in range(k):
                if q(q(i, j), m) != q(i, q(j, m)):
                    return VerifyResult(False, (blocks[i], blocks[j], blocks[m]), "quotient is not associative")
    return VerifyResult(True)


def gf2_rank(rows: Sequence[Sequence[int]]) -> int:
    if not rows:
        return 0
    m = np.array(rows, dtype=np.uint8) % 2
    rank = 0
    n_rows, n_cols = m.shape
    for col in range(n_cols):
        pivots = np.flatnonzero(m[rank:, col])
        if pivots.size == 0:
            continue
        p = rank + int(pivots[0])
        m[[rank, p]] = m[[p, rank]]
        hits = np.flatnonzero(m[:, col])
        for r in hits:
            if r != rank:
                m[r] ^= m[rank]
        rank += 1
        if rank == n_rows:
            break
    return rank


def parity_kernel_dimension(inst: Instance, parity_relations: Iterable[str]) -> int:
    """
    Kernel dimension of the homogeneous GF(2) system read off the parity
    constraints of `inst` (one equation per constraint over its scope).
    """
    names = set(parity_relations)
    col = {v: i for i, v in enumerate(inst.variables)}
    rows = []
    for name, scope in inst.constraints:
        if name not in names:
            continue
        row = [0] * len(inst.variables)
        for v in scope:
            row[col[v]] ^= 1
        rows.append(row)
    return len(inst.variables) - gf2_rank(rows)


def relation_from_strings(name: str, rows: Iterable[str]) -> Relation:
    """Build a relation from digit strings such as "00010" (one char per entry)."""
    tuples = [tuple(r) for r in rows]
    arity = len(tuples[0]) if tuples else 1
    return Relation(name, arity, frozenset(tuples))
