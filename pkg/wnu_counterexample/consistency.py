from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import pandas as pd

from .digraph import arc_consistent_lists
from .errors import ConstructionError, InputError
from .models import Digraph, Operation, VerifyResult
from .structures import check_operation_properties

log = logging.getLogger(__name__)

Node = Tuple[str, str]


@dataclass
class ConsistencyState:
    """
    Unary and binary lists of a digraph instance g -> h.

    Every (vertex, value) candidate is a node; `matrix[i, j]` says the value
    pair of nodes i and j is in L(v, v'). Nodes are grouped by vertex
    (`offsets`), a node is alive iff its diagonal entry is set, and the
    matrix is kept symmetric. Dead nodes stay in place with empty rows.
    """
    vertices: Tuple[str, ...]
    values: Tuple[Tuple[str, ...], ...]
    matrix: np.ndarray = field(repr=False)
    consistent: bool = True

    def __post_init__(self) -> None:
        offsets = [0]
        for vals in self.values:
            offsets.append(offsets[-1] + len(vals))
        self._offsets = tuple(offsets)
        self._pos = {v: k for k, v in enumerate(self.vertices)}

    # -- geometry
    def span(self, v: str) -> slice:
        if v not in self._pos:
            raise InputError(f"unknown vertex {v!r}")
        k = self._pos[v]
        return slice(self._offsets[k], self._offsets[k + 1])

    @property
    def offsets(self) -> Tuple[int, ...]:
        return self._offsets

    @property
    def nodes(self) -> List[Node]:
        return [(v, a) for v, vals in zip(self.vertices, self.values) for a in vals]

    def node_index(self, v: str, a: str) -> int:
        if v not in self._pos:
            raise InputError(f"unknown vertex {v!r}")
        vals = self.values[self._pos[v]]
        if a not in vals:
            raise InputError(f"{a!r} was never a candidate for {v!r}")
        return self._offsets[self._pos[v]] + vals.index(a)

    # -- views
    def alive(self) -> np.ndarray:
        return self.matrix.diagonal().copy()

    def unary(self, v: str) -> FrozenSet[str]:
        live = self.matrix.diagonal()[self.span(v)]
        return frozenset(a for a, ok in zip(self.values[self._pos[v]], live) if ok)

    @property
    def lists(self) -> Dict[str, FrozenSet[str]]:
        return {v: self.unary(v) for v in self.vertices}

    def binary(self, v: str, w: str) -> FrozenSet[Tuple[str, str]]:
        block = self.matrix[self.span(v), self.span(w)]
        va, wa = self.values[self._pos[v]], self.values[self._pos[w]]
        rows, cols = np.nonzero(block)
        return frozenset((va[i], wa[j]) for i, j in zip(rows.tolist(), cols.tolist()))

    def empty_vertices(self) -> List[str]:
        return [v for v in self.vertices if not self.unary(v)]

    def size(self) -> int:
        return int(self.matrix.diagonal().sum())

    def lists_df(self) -> pd.DataFrame:
        rows = []
        for v in self.vertices:
            vals = sorted(self.unary(v))
            rows.append({"vertex": v, "size": len(vals), "values": " ".join(vals)})
        return pd.DataFrame(rows)

    # -- edits (all return new states)
    def copy(self) -> "ConsistencyState":
        return replace(self, matrix=self.matrix.copy())

    def without(self, v: str, a: str) -> "ConsistencyState":
        """Clone with value a deleted from L(v)."""
        i = self.node_index(v, a)
        if not self.matrix[i, i]:
            raise InputError(f"{a!r} is not in L({v})")
        out = self.copy()
        out.matrix[i, :] = False
        out.matrix[:, i] = False
        out.consistent = not out.empty_vertices()
        return out

    def with_pair(self, v: str, w: str, a: str, b: str, present: bool = True) -> "ConsistencyState":
        """Clone with (a, b) added to or removed from L(v, w) (and the converse)."""
        i, j = self.node_index(v, a), self.node_index(w, b)
        out = self.copy()
        out.matrix[i, j] = present
        out.matrix[j, i] = present
        return out


# -----------------------------
# Arc consistency
# -----------------------------
def enforce_arc_consistency(
    g: Digraph, h: Digraph, initial: Optional[Mapping[str, Sequence[str]]] = None
) -> Dict[str, FrozenSet[str]]:
    lists = arc_consistent_lists(g, h, initial)
    empty = [v for v, vals in lists.items() if not vals]
    if empty:
        log.info("arc consistency emptied %d list(s), first %s", len(empty), empty[0])
    return lists


# -----------------------------
# (2,3)-consistency
# -----------------------------
def initial_state(
    g: Digraph, h: Digraph, lists: Optional[Mapping[str, Sequence[str]]] = None
) -> ConsistencyState:
    """
    Starting family: arc-consistent unary lists, full products for
    non-adjacent pairs, arcs of h for adjacent pairs, identity on the diagonal.
    """
    unary = enforce_arc_consistency(g, h, lists)
    values = tuple(tuple(sorted(unary[v])) for v in g.vertices)
    n = sum(len(vals) for vals in values)
    state = ConsistencyState(tuple(g.vertices), values, np.ones((n, n), dtype=bool))
    m = state.matrix
    for v in g.vertices:
        s = state.span(v)
        k = s.stop - s.start
        m[s, s] = np.eye(k, dtype=bool)
    h_arcs = h.arcs
    for u, w in sorted(g.arcs):
        if u == w:
            continue
        su, sw = state.span(u), state.span(w)
        vu, vw = values[state._pos[u]], values[state._pos[w]]
        block = np.array([[(a, b) in h_arcs for b in vw] for a in vu], dtype=bool).reshape(len(vu), len(vw))
        m[su, sw] &= block
        m[sw, su] &= block.T
    state.consistent = all(values)
    return state


def enforce_23_consistency(
    g: Digraph,
    h: Digraph,
    lists: Optional[Mapping[str, Sequence[str]]] = None,
    *,
    state: Optional[ConsistencyState] = None,
    order_seed: Optional[int] = None,
    max_passes: int = 1000,
) -> ConsistencyState:
    """
    Greatest (2,3)-consistent family below the starting state.

    A revision through vertex w keeps the pair of nodes (i, j) only if some
    value c of w is compatible with both. With A the node columns of w,
    the supported pairs are exactly the nonzero entries of A @ A.T, so a
    revision is one matrix product. A vertex is revised again only after
    its columns change; passes repeat until no vertex is stale.
    `order_seed` shuffles the through-vertex order.
    """
    st = state.copy() if state is not None else initial_state(g, h, lists)
    if not st.consistent:
        return st
    m = st.matrix
    n = m.shape[0]
    order = list(range(len(st.vertices)))
    if order_seed is not None:
        random.Random(order_seed).shuffle(order)
    starts = np.array(st.offsets[:-1])
    spans = [(st.offsets[k], st.offsets[k + 1]) for k in range(len(st.vertices))]
    buf = np.empty((n, n), dtype=np.float32)
    stale = np.ones(len(st.vertices), dtype=bool)

    total = int(np.count_nonzero(m))
    for sweep in range(1, max_passes + 1):
        revised = 0
        for k in order:
            if not stale[k]:
                continue
            stale[k] = False
            revised += 1
            lo, hi = spans[k]
            before = m.copy()
            cols = m[:, lo:hi].astype(np.float32)
            np.matmul(cols, cols.T, out=buf)
            m &= buf > 0
            live = m.diagonal()
            if not live.all():
                dead = ~live
                m[dead, :] = False
                m[:, dead] = False
                if not np.logical_or.reduceat(m.diagonal(), starts).all():
                    st.consistent = False
                    log.info("(2,3) enforcement emptied a list in pass %d", sweep)
                    return st
            changed = np.any(before != m, axis=0)
            if changed.any():
                stale |= np.logical_or.reduceat(changed, starts)
        now = int(np.count_nonzero(m))
        log.debug("pass %d: %d revision(s), %d -> %d compatible node pairs", sweep, revised, total, now)
        total = now
        if not stale.any():
            break
    else:
        raise ConstructionError(f"(2,3) enforcement did not settle within {max_passes} passes")
    log.info("(2,3) fixpoint: %d values over %d vertices", st.size(), len(st.vertices))
    return st


def verify_23_consistent(state: ConsistencyState, g: Digraph, h: Digraph) -> VerifyResult:
    """
    Check every closure condition of a (2,3)-consistent family without
    modifying it. The witness names the first failing condition.
    """
    m = state.matrix
    live = m.diagonal()
    if not np.array_equal(m, m.T):
        i, j = map(int, np.argwhere(m != m.T)[0])
        return VerifyResult(False, (state.nodes[i], state.nodes[j]), "binary lists not converse-symmetric")
    if not state.consistent or state.empty_vertices():
        return VerifyResult(False, state.empty_vertices()[:1], "empty unary list")
    dead_rows = np.flatnonzero(~live & m.any(axis=1))
    if dead_rows.size:
        return VerifyResult(False, state.nodes[int(dead_rows[0])], "pair uses a value outside the unary list")
    for v in state.vertices:
        s = state.span(v)
        block = m[s, s]
        if not np.array_equal(block, np.diag(np.diagonal(block))):
            return VerifyResult(False, v, "diagonal list is not the identity on L(v)")
    for u, w in sorted(g.arcs):
        for a, b in state.binary(u, w):
            if (a, b) not in h.arcs:
                return VerifyResult(False, (u, w, a, b), "pair on an arc of g is not an arc of h")
    nodes = state.nodes
    as_float = m.astype(np.float64)
    for w in state.vertices:
        s = state.span(w)
        support = as_float[:, s] @ as_float[s, :]
        holes = np.argwhere(m & (support == 0))
        if holes.size:
            i, j = map(int, holes[0])
            (v, a), (v2, b) = nodes[i], nodes[j]
            return VerifyResult(False, (v, v2, a, b, w), f"pair ({a},{b}) on ({v},{v2}) has no support at {w}")
    return VerifyResult(True)


# -----------------------------
# Microstructure
# -----------------------------
@dataclass
class MicrostructureGraph:
    """Graph on live (vertex, value) nodes; edges are the binary lists between distinct vertices."""
    vertices: Tuple[str, ...]
    nodes: Tuple[Node, ...]
    adjacency: np.ndarray = field(repr=False)

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return int(np.count_nonzero(np.triu(self.adjacency, 1)))

    def edges(self) -> Iterator[Tuple[Node, Node]]:
        for i, j in np.argwhere(np.triu(self.adjacency, 1)):
            yield self.nodes[int(i)], self.nodes[int(j)]

    def to_networkx(self) -> nx.Graph:
        ms = nx.Graph()
        ms.add_nodes_from(self.nodes)
        ms.add_edges_from(self.edges())
        return ms

    def components(self) -> List[Tuple[Node, ...]]:
        """Connected components by frontier expansion, ordered by first node."""
        n = len(self.nodes)
        unseen = np.ones(n, dtype=bool)
        comps: List[Tuple[Node, ...]] = []
        for start in range(n):
            if not unseen[start]:
                continue
            reached = np.zeros(n, dtype=bool)
            reached[start] = True
            frontier = reached.copy()
            while frontier.any():
                step = self.adjacency[frontier].any(axis=0) & ~reached
                reached |= step
                frontier = step
            unseen &= ~reached
            comps.append(tuple(self.nodes[i] for i in np.flatnonzero(reached)))
        return comps


def build_microstructure(state: ConsistencyState) -> MicrostructureGraph:
    if state.size() == 0:
        raise InputError("microstructure of an empty state")
    live = np.flatnonzero(state.alive())
    adjacency = state.matrix[np.ix_(live, live)].copy()
    np.fill_diagonal(adjacency, False)
    all_nodes = state.nodes
    return MicrostructureGraph(state.vertices, tuple(all_nodes[i] for i in live), adjacency)


def decompose_lists(ms: MicrostructureGraph) -> List[Dict[str, FrozenSet[str]]]:
    """One sub-list family per connected component (vertices may get empty sublists)."""
    families: List[Dict[str, FrozenSet[str]]] = []
    for comp in ms.components():
        bucket: Dict[str, set] = {v: set() for v in ms.vertices}
        for v, a in comp:
            bucket[v].add(a)
        families.append({v: frozenset(vals) for v, vals in bucket.items()})
    return families


def component_families_are_maltsev(
    ops: Mapping[str, Operation], families: Sequence[Mapping[str, FrozenSet[str]]]
) -> VerifyResult:
    """
    Each microstructure component, with every operation restricted to its
    sublist, has no step-4 violation. Vertices with an empty sublist are skipped.
    """
    for k, family in enumerate(families):
        for v, sub in family.items():
            if not sub:
                continue
            try:
                op = ops[v].restrict(sub)
            except ConstructionError as exc:
                return VerifyResult(False, (k, v), f"component {k}: {exc}")
            bad = check_operation_properties(op).maltsev_pairs
            if bad:
                a, b = min(bad)
                return VerifyResult(False, (k, v, a, b), f"component {k}: Mal'tsev violation at {v}")
    return VerifyResult(True)
