"""
Multi-sorted polymorphism family on the consistent lists, the step-4
deletion criterion, and exact safe/fatal classification of deletions.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .consistency import ConsistencyState, enforce_23_consistency
from .digraph import enumerate_homomorphisms, extension_profiles
from .errors import ConstructionError, InputError
from .models import Operation, Row, VerifyResult
from .structures import check_operation_properties
from .translation import TranslationResult, compute_sigma

log = logging.getLogger(__name__)

Candidate = Tuple[str, str, str]


# -----------------------------
# The family
# -----------------------------
def build_phi_B(rows: Mapping[str, Row], phi: Operation) -> Operation:
    """phi acting on row names: phi_B(l, m, n) is the row equal to coordinatewise phi."""
    by_value = {row: name for name, row in rows.items()}
    names = tuple(rows)
    table: Dict[Row, str] = {}
    for combo in itertools.product(names, repeat=phi.arity):
        out = tuple(phi.table[col] for col in zip(*(rows[n] for n in combo)))
        if out not in by_value:
            raise ConstructionError(f"relation not closed under phi: {combo} -> {''.join(out)}")
        table[combo] = by_value[out]
    return Operation(names, phi.arity, table)


@dataclass
class MultiSortedFamily:
    """One operation per G-vertex, on the carrier L(v)."""
    ops: Dict[str, Operation]

    def __getitem__(self, v: str) -> Operation:
        return self.ops[v]

    def __iter__(self) -> Iterator[str]:
        return iter(self.ops)

    def __len__(self) -> int:
        return len(self.ops)

    def carriers(self) -> Dict[str, frozenset]:
        return {v: frozenset(op.carrier) for v, op in self.ops.items()}

    def with_op(self, v: str, op: Operation) -> "MultiSortedFamily":
        ops = dict(self.ops)
        ops[v] = op
        return MultiSortedFamily(ops)

    def check_idempotent_cyclic(self) -> VerifyResult:
        for v, op in self.ops.items():
            props = check_operation_properties(op)
            if not (props.idempotent and props.cyclic):
                return VerifyResult(False, v, "operation is not idempotent and cyclic")
        return VerifyResult(True)


def build_family(
    tr: TranslationResult,
    state: ConsistencyState,
    phi: Operation,
    phi_B: Optional[Operation] = None,
    strict: bool = True,
) -> MultiSortedFamily:
    """
    phi on variable lists, phi_B on the top vertices, and phi_B transported
    along sigma on every other vertex.

    With `strict`, a list that differs from the sigma image (or from the
    row set at a top vertex) raises; otherwise the operation is restricted
    to the part of the image that survived in the list.
    """
    if phi_B is None:
        phi_B = build_phi_B(tr.rows, phi)
    ops: Dict[str, Operation] = {}
    for v in tr.G.vertices:
        lst = state.unary(v)
        if not lst:
            raise ConstructionError(f"empty list at {v}; enforce consistency first")
        if tr.is_variable(v):
            ops[v] = phi.restrict(lst)
            continue
        sigma = tr.sigma.get(v) or compute_sigma(tr, v)
        image = sigma.image()
        if not sigma.is_injective():
            raise ConstructionError(f"sigma at {v} is not injective")
        if image != lst:
            if strict:
                raise ConstructionError(
                    f"list at {v} differs from the sigma image: "
                    f"{len(lst)} value(s) vs {len(image)}, {len(lst ^ image)} mismatched"
                )
            inverse = sigma.inverse()
            ops[v] = phi_B.restrict(inverse[a] for a in lst & image).relabel(sigma.mapping)
            continue
        ops[v] = phi_B.relabel(sigma.mapping) if not tr.is_top(v) else phi_B
    log.info("built multi-sorted family on %d vertices", len(ops))
    return MultiSortedFamily(ops)


def check_sigma_isomorphism(family: MultiSortedFamily, tr: TranslationResult, phi_B: Operation) -> VerifyResult:
    """
    Recompute sigma and check sigma(phi_B(l, m, n)) = phi_v(sigma l, sigma m, sigma n)
    for every non-variable vertex and every triple of rows.
    """
    names = tuple(tr.rows)
    for v in tr.G.vertices:
        if tr.is_variable(v):
            continue
        sigma = compute_sigma(tr, v).mapping
        op = family[v]
        for combo in itertools.product(names, repeat=phi_B.arity):
            left = sigma[phi_B.table[combo]]
            right = op.table[tuple(sigma[n] for n in combo)]
            if left != right:
                return VerifyResult(False, (v, combo), f"sigma is not a homomorphism at {v}")
    return VerifyResult(True)


# -----------------------------
# Multi-sorted verification
# -----------------------------
def _scope_pairs(tr: Optional[TranslationResult], state: ConsistencyState, scope: str) -> Iterator[Tuple[str, str]]:
    if scope == "all":
        yield from itertools.combinations(state.vertices, 2)
        return
    if scope != "anchors":
        raise InputError(f"unknown scope {scope!r}; expected 'all' or 'anchors'")
    if tr is None:
        raise InputError("scope 'anchors' needs the translation")
    order = {v: k for k, v in enumerate(state.vertices)}
    pairs = set()
    anchors = list(tr.var_vertices.values()) + list(tr.t_vertices.values())
    for u, w in itertools.combinations(anchors, 2):
        pairs.add((u, w))
    for u, w in tr.G.arcs:
        pairs.add((u, w))
    for v, leg in tr.legs.items():
        pairs.add((leg.t, v))
        pairs.add((leg.endpoint, v))
    for u, w in sorted(pairs, key=lambda p: (order[p[0]], order[p[1]])):
        if u != w:
            yield (u, w) if order[u] < order[w] else (w, u)


def _op_array(op: Operation, vals: Sequence[str]) -> np.ndarray:
    """Table of op as an index array over `vals` (which may carry extra dead values)."""
    pos = {a: i for i, a in enumerate(vals)}
    live = [a for a in vals if a in op.carrier]
    out = np.full((len(vals),) * op.arity, -1, dtype=np.int64)
    for args in itertools.product(live, repeat=op.arity):
        out[tuple(pos[a] for a in args)] = pos[op.table[args]]
    return out


def verify_multisorted(
    family: MultiSortedFamily,
    state: ConsistencyState,
    scope: str = "all",
    tr: Optional[TranslationResult] = None,
) -> VerifyResult:
    """
    The family preserves every binary list: for all (v, v'), applying
    (phi_v, phi_v') to three pairs of L(v, v') lands in L(v, v').

    `scope="anchors"` restricts the pairs to variables and tops, arcs of G
    and vertices on a Q copy against its endpoints.
    """
    for v in state.vertices:
        if v not in family.ops:
            return VerifyResult(False, v, "family has no operation here")
        if frozenset(family[v].carrier) != state.unary(v):
            return VerifyResult(False, v, "carrier differs from the unary list")
    values = dict(zip(state.vertices, state.values))
    tables = {v: _op_array(family[v], values[v]) for v in state.vertices}
    arity = {v: family[v].arity for v in state.vertices}
    checked = 0
    for v, w in _scope_pairs(tr, state, scope):
        block = state.matrix[state.span(v), state.span(w)]
        pv, pw = np.nonzero(block)
        if pv.size == 0:
            continue
        n = arity[v]
        if arity[w] != n:
            return VerifyResult(False, (v, w), "arities differ")
        rest_v = np.meshgrid(*([pv] * (n - 1)), indexing="ij")
        rest_w = np.meshgrid(*([pw] * (n - 1)), indexing="ij")
        checked += 1
        # one slice per first argument keeps memory at p^(n-1)
        for first in range(pv.size):
            out_v = tables[v][(np.full_like(rest_v[0], pv[first]),) + tuple(rest_v)]
            out_w = tables[w][(np.full_like(rest_w[0], pw[first]),) + tuple(rest_w)]
            ok = block[out_v, out_w]
            if ok.all():
                continue
            idx = (first,) + tuple(int(k) for k in np.argwhere(~ok)[0])
            va, wa = values[v], values[w]
            triple = tuple((va[pv[k]], wa[pw[k]]) for k in idx)
            image = (va[out_v[idx[1:]]], wa[out_w[idx[1:]]])
            return VerifyResult(False, (v, w, triple, image), f"({v},{w}) list not preserved")
    log.debug("multi-sorted check: %d pair(s) verified", checked)
    return VerifyResult(True)


# -----------------------------
# Step 4
# -----------------------------
def step4_candidates(
    family: MultiSortedFamily, state: Optional[ConsistencyState] = None
) -> List[Candidate]:
    """(v, a, b) with phi_v(b, ..., b, a) != a, ordered by vertex label, a, b."""
    out: List[Candidate] = []
    for v in sorted(family):
        alive = state.unary(v) if state is not None else None
        for a, b in sorted(check_operation_properties(family[v]).maltsev_pairs):
            if alive is None or a in alive:
                out.append((v, a, b))
    return out


def candidate_values(candidates: Iterable[Candidate]) -> List[Tuple[str, str]]:
    """Distinct (vertex, value) deletions, first-seen order."""
    seen: Dict[Tuple[str, str], None] = {}
    for v, a, _ in candidates:
        seen.setdefault((v, a), None)
    return list(seen)


# -----------------------------
# Deletion verdicts
# -----------------------------
@dataclass(frozen=True)
class DeletionVerdict:
    vertex: str
    value: str
    group: str
    solutions_before: int
    solutions_after: int
    lists_emptied: Optional[bool] = None
    method: str = "simulate"

    def __post_init__(self) -> None:
        if self.solutions_after > self.solutions_before:
            raise ConstructionError(
                f"deleting {self.value} at {self.vertex} created solutions "
                f"({self.solutions_before} -> {self.solutions_after})"
            )

    @property
    def fatal(self) -> bool:
        return self.solutions_before > 0 and self.solutions_after == 0

    @property
    def safe(self) -> bool:
        return not self.fatal

    @property
    def verdict(self) -> str:
        return "fatal" if self.fatal else "safe"


def solution_projections(tr: TranslationResult, lists: Mapping[str, Iterable[str]]) -> List[Dict[str, str]]:
    """Distinct restrictions to the variable vertices of homomorphisms G -> H within `lists`."""
    return enumerate_homomorphisms(tr.G, tr.H, lists=lists, project_onto=list(tr.var_vertices.values()))


def count_solutions(tr: TranslationResult, lists: Mapping[str, Iterable[str]]) -> int:
    return len(solution_projections(tr, lists))


def simulate_deletion(
    tr: TranslationResult,
    state: ConsistencyState,
    vertex: str,
    value: str,
    *,
    solutions_before: Optional[int] = None,
    order_seed: Optional[int] = None,
) -> DeletionVerdict:
    """Delete value from L(vertex), re-enforce (2,3)-consistency and count what survives."""
    if value not in state.unary(vertex):
        raise InputError(f"{value!r} is not in L({vertex})")
    if solutions_before is None:
        solutions_before = count_solutions(tr, state.lists)
    shrunk = enforce_23_consistency(tr.G, tr.H, state=state.without(vertex, value), order_seed=order_seed)
    if not shrunk.consistent:
        after, emptied = 0, True
    else:
        after, emptied = count_solutions(tr, shrunk.lists), False
    log.debug("delete %s from L(%s): %d -> %d", value, vertex, solutions_before, after)
    return DeletionVerdict(vertex, value, tr.group_of(vertex), solutions_before, after, emptied, "simulate")


@dataclass
class DeletionCensus:
    verdicts: List[DeletionVerdict] = field(default_factory=list)
    method: str = "census"

    def safe(self) -> List[DeletionVerdict]:
        return [d for d in self.verdicts if d.safe]

    def fatal(self) -> List[DeletionVerdict]:
        return [d for d in self.verdicts if d.fatal]

    def restricted_to(self, vertices: Iterable[str]) -> "DeletionCensus":
        keep = set(vertices)
        return DeletionCensus([d for d in self.verdicts if d.vertex in keep], self.method)

    def by_group(self) -> Dict[str, Dict[str, int]]:
        out: Dict[str, Dict[str, int]] = {}
        for d in self.verdicts:
            bucket = out.setdefault(d.group, {"safe": 0, "fatal": 0})
            bucket[d.verdict] += 1
        return dict(sorted(out.items()))

    def census_df(self) -> pd.DataFrame:
        cols = ["vertex", "value", "group", "solutions_before", "solutions_after", "lists_emptied", "verdict"]
        rows = [
            {
                "vertex": d.vertex,
                "value": d.value,
                "group": d.group,
                "solutions_before": d.solutions_before,
                "solutions_after": d.solutions_after,
                "lists_emptied": d.lists_emptied,
                "verdict": d.verdict,
            }
            for d in self.verdicts
        ]
        return pd.DataFrame(rows, columns=cols)


def classify_all_deletions(
    tr: TranslationResult,
    state: ConsistencyState,
    family: MultiSortedFamily,
    *,
    method: str = "census",
    candidates: Optional[Sequence[Tuple[str, str]]] = None,
    order_seed: Optional[int] = None,
) -> DeletionCensus:
    """
    Verdict for every step-4 deletion (v, a).

    "census" decides all candidates from the solution projections: a
    deletion keeps projection p alive iff some homomorphism extending p
    avoids a at v. "simulate" re-enforces consistency per candidate.
    """
    if method not in ("census", "simulate"):
        raise InputError(f"unknown method {method!r}; expected 'census' or 'simulate'")
    todo = list(candidates) if candidates is not None else candidate_values(step4_candidates(family, state))
    lists = state.lists
    projections = solution_projections(tr, lists)
    before = len(projections)
    verdicts: List[DeletionVerdict] = []

    if method == "simulate":
        for v, a in todo:
            verdicts.append(simulate_deletion(tr, state, v, a, solutions_before=before, order_seed=order_seed))
    else:
        profiles = extension_profiles(tr.G, tr.H, lists, projections)
        for v, a in todo:
            if a not in lists[v]:
                raise InputError(f"{a!r} is not in L({v})")
            after = sum(1 for prof in profiles if prof[v] - {a})
            verdicts.append(DeletionVerdict(v, a, tr.group_of(v), before, after, None, "census"))

    census = DeletionCensus(verdicts, method)
    log.info(
        "deletion census (%s): %d candidate(s), %d safe, %d fatal",
        method, len(verdicts), len(census.safe()), len(census.fatal()),
    )
    return census
