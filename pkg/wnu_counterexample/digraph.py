from __future__ import annotations

import itertools
import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

import networkx as nx

from .errors import InputError
from .models import Digraph, LevelResult, OrientedPath

log = logging.getLogger(__name__)

Domains = Dict[str, Set[str]]


def net_length(p: OrientedPath) -> int:
    return sum(p.directions)


def compute_levels(g: Digraph) -> LevelResult:
    """
    Level function per weakly connected component (minimum 0), or an
    unbalanced verdict with the arc that closes a non-zero cycle.
    """
    levels: Dict[str, int] = {}
    for comp in undirected_components(g):
        local = {comp[0]: 0}
        stack = [comp[0]]
        while stack:
            u = stack.pop()
            steps = [(w, local[u] + 1, (u, w)) for w in sorted(g.succ[u])]
            steps += [(w, local[u] - 1, (w, u)) for w in sorted(g.pred[u])]
            for w, expected, arc in steps:
                if w in local:
                    if local[w] != expected:
                        return LevelResult(False, {}, arc)
                else:
                    local[w] = expected
                    stack.append(w)
        lo = min(local.values())
        levels.update({v: h - lo for v, h in local.items()})
    return LevelResult(True, {v: levels[v] for v in g.vertices})


def undirected_components(g: Digraph) -> List[Tuple[str, ...]]:
    """Weakly connected components, each sorted, ordered by least label."""
    comps = [tuple(sorted(c)) for c in nx.weakly_connected_components(g.to_networkx())]
    return sorted(comps, key=lambda c: c[0])


def level_shift_is_constant(g: Digraph, h: Digraph, f: Mapping[str, str]) -> bool:
    """For balanced g, h: level(f(v)) - level(v) is constant on each component of g."""
    lg, lh = compute_levels(g), compute_levels(h)
    if not (lg.balanced and lh.balanced):
        raise InputError("level shift is only defined for balanced digraphs")
    for comp in undirected_components(g):
        shifts = {lh.levels[f[v]] - lg.levels[v] for v in comp}
        if len(shifts) != 1:
            return False
    return True


# -----------------------------
# Arc consistency core
# -----------------------------
def _initial_domains(
    g: Digraph,
    h: Digraph,
    lists: Optional[Mapping[str, Iterable[str]]] = None,
    pinned: Optional[Mapping[str, str]] = None,
) -> Domains:
    everything = set(h.vertices)
    domains: Domains = {}
    for v in g.vertices:
        if lists is not None and v in lists:
            domains[v] = set(lists[v]) & everything
        else:
            domains[v] = set(everything)
    for v, a in (pinned or {}).items():
        if v not in domains:
            raise InputError(f"pinned vertex {v!r} is not a vertex of g")
        domains[v] = {a} & domains[v]
    loops = {a for a, b in h.arcs if a == b}
    for u, w in g.arcs:
        if u == w:
            domains[u] &= loops
    return domains


def propagate(g: Digraph, h: Digraph, domains: Domains, changed: Optional[Iterable[str]] = None) -> bool:
    """
    Shrink `domains` in place to the greatest arc-consistent sub-family.

    `changed` seeds the work queue (all vertices when omitted). Returns False
    as soon as a domain becomes empty.
    """
    hs, hp = h.succ, h.pred
    queue = deque(g.vertices if changed is None else changed)
    queued = set(queue)
    if any(not domains[v] for v in g.vertices):
        return False
    while queue:
        u = queue.popleft()
        queued.discard(u)
        du = domains[u]
        for nbrs, table in ((g.succ[u], hs), (g.pred[u], hp)):
            if not nbrs:
                continue
            support: Set[str] = set()
            for a in du:
                support |= table[a]
            for w in nbrs:
                dw = domains[w]
                if dw <= support:
                    continue
                dw &= support
                if not dw:
                    return False
                if w not in queued:
                    queue.append(w)
                    queued.add(w)
    return True


def arc_consistent_lists(
    g: Digraph, h: Digraph, lists: Optional[Mapping[str, Iterable[str]]] = None
) -> Dict[str, frozenset]:
    domains = _initial_domains(g, h, lists)
    propagate(g, h, domains)
    return {v: frozenset(domains[v]) for v in g.vertices}


# -----------------------------
# Homomorphism search
# -----------------------------
def _copy(domains: Domains) -> Domains:
    return {v: set(d) for v, d in domains.items()}


def _branch(g: Digraph, h: Digraph, domains: Domains, branch_on: Sequence[str]) -> Iterator[Domains]:
    """
    Depth-first search with forward checking (arc consistency after every
    choice). Yields the domains at each leaf where `branch_on` is fixed.
    Smallest list first, ties by label; values ascending by label.
    """
    open_vertices = [v for v in branch_on if len(domains[v]) > 1]
    if not open_vertices:
        yield domains
        return
    v = min(open_vertices, key=lambda u: (len(domains[u]), u))
    for a in sorted(domains[v]):
        child = _copy(domains)
        child[v] = {a}
        if propagate(g, h, child, [v]):
            yield from _branch(g, h, child, branch_on)


def enumerate_homomorphisms(
    g: Digraph,
    h: Digraph,
    limit: Optional[int] = None,
    pinned: Optional[Mapping[str, str]] = None,
    lists: Optional[Mapping[str, Iterable[str]]] = None,
    project_onto: Optional[Sequence[str]] = None,
) -> List[Dict[str, str]]:
    """
    Homomorphisms g -> h extending `pinned` and respecting `lists`.

    With `project_onto`, returns the distinct restrictions of homomorphisms
    to those vertices instead (branching on them first, then checking that
    each completed restriction extends).
    """
    domains = _initial_domains(g, h, lists, pinned)
    if not propagate(g, h, domains):
        return []
    out: List[Dict[str, str]] = []
    if project_onto is None:
        for leaf in _branch(g, h, domains, g.vertices):
            out.append({v: next(iter(leaf[v])) for v in g.vertices})
            if limit is not None and len(out) >= limit:
                break
        return out

    onto = list(project_onto)
    for leaf in _branch(g, h, domains, onto):
        if next(_branch(g, h, leaf, g.vertices), None) is None:
            continue
        out.append({v: next(iter(leaf[v])) for v in onto})
        if limit is not None and len(out) >= limit:
            break
    log.debug("hom search %d -> %d vertices: %d result(s)", len(g), len(h), len(out))
    return out


def count_homomorphisms(g: Digraph, h: Digraph, **kwargs) -> int:
    return len(enumerate_homomorphisms(g, h, **kwargs))


def naive_homomorphisms(g: Digraph, h: Digraph) -> List[Dict[str, str]]:
    """Brute force over |V(h)|^|V(g)| maps; the oracle for small cases."""
    found = []
    for images in itertools.product(h.vertices, repeat=len(g.vertices)):
        f = dict(zip(g.vertices, images))
        if all((f[u], f[v]) in h.arcs for u, v in g.arcs):
            found.append(f)
    return found


def extension_profiles(
    g: Digraph,
    h: Digraph,
    lists: Mapping[str, Iterable[str]],
    projections: Sequence[Mapping[str, str]],
) -> List[Dict[str, frozenset]]:
    """
    For each projection p (a partial map on g), the set of values each vertex
    takes in some homomorphism extending p within `lists`.

    When g minus the pinned vertices is a forest, arc consistency is exact and
    one propagation per projection suffices; otherwise every (vertex, value)
    is decided by a bounded search.
    """
    profiles: List[Dict[str, frozenset]] = []
    for p in projections:
        domains = _initial_domains(g, h, lists, p)
        if not propagate(g, h, domains):
            profiles.append({v: frozenset() for v in g.vertices})
            continue
        if _is_forest_outside(g, p.keys()):
            profiles.append({v: frozenset(domains[v]) for v in g.vertices})
            continue
        exact: Dict[str, frozenset] = {}
        for v in g.vertices:
            keep = []
            for a in sorted(domains[v]):
                trial = _copy(domains)
                trial[v] = {a}
                if propagate(g, h, trial, [v]) and next(_branch(g, h, trial, g.vertices), None) is not None:
                    keep.append(a)
            exact[v] = frozenset(keep)
        profiles.append(exact)
    return profiles


def _is_forest_outside(g: Digraph, pinned: Iterable[str]) -> bool:
    fixed = set(pinned)
    free = [v for v in g.vertices if v not in fixed]
    if not free:
        return True
    und = nx.Graph()
    und.add_nodes_from(free)
    for u, w in g.arcs:
        if u in fixed or w in fixed:
            continue
        if u == w:
            return False
        und.add_edge(u, w)
    return nx.is_forest(und)


# -----------------------------
# Core check (long-running)
# -----------------------------
@dataclass(frozen=True)
class CoreResult:
    is_core: bool
    missed_vertex: Optional[str] = None
    endomorphism: Optional[Dict[str, str]] = None


def is_core(h: Digraph) -> CoreResult:
    """
    h is a core iff no endomorphism misses a vertex; tries to avoid each
    vertex in turn.
    """
    for v in h.vertices:
        rest = [a for a in h.vertices if a != v]
        found = enumerate_homomorphisms(h, h, limit=1, lists={u: rest for u in h.vertices})
        if found:
            return CoreResult(False, v, found[0])
        log.debug("no endomorphism avoids %s", v)
    return CoreResult(True)
