"""
End-to-end verification of one example bundle.

Checks run in dependency order (template, translation, consistency,
family, step 4, decomposition, deletions) and are collected into a
`ClaimReport`. A stage that raises is recorded as FAIL and the stages
depending on it are skipped.
"""
from __future__ import annotations

import io
import logging
from contextlib import contextmanager
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional

import pandas as pd
from pydantic import BaseModel, ConfigDict

from .catalog import BA_TABLES, B_TABLES, STATED, ExampleBundle, Expected
from .consistency import (
    ConsistencyState,
    build_microstructure,
    component_families_are_maltsev,
    decompose_lists,
    enforce_23_consistency,
    initial_state,
    verify_23_consistent,
)
from .deletion import (
    DeletionCensus,
    MultiSortedFamily,
    build_family,
    build_phi_B,
    check_sigma_isomorphism,
    classify_all_deletions,
    solution_projections,
    step4_candidates,
    verify_multisorted,
)
from .digraph import compute_levels, count_homomorphisms, enumerate_homomorphisms, net_length
from .errors import InputError, WnuError
from .models import Instance
from .structures import (
    check_block_maltsev,
    check_operation_properties,
    check_polymorphism,
    enumerate_endomorphisms,
    parity_kernel_dimension,
    project_relation,
    solve_instance,
)
from .translation import aux_vertex_count, build_gadget, build_P, pp_relation, probe_census

log = logging.getLogger(__name__)

# above this many G-vertices the multi-sorted check defaults to anchor pairs
ALL_PAIRS_LIMIT = 200
HOM_COUNT_LIMIT = 10_000


class Status(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    FLAG = "FLAG"


class ClaimResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str
    title: str
    status: Status
    tag: str = ""
    citation: str = ""
    expected: Optional[str] = None
    observed: Optional[str] = None
    witness: Optional[str] = None


class ClaimReport(BaseModel):
    example: str
    results: List[ClaimResult] = []

    @property
    def ok(self) -> bool:
        return all(r.status != Status.FAIL for r in self.results)

    def counts(self) -> Dict[str, int]:
        out = {s.value: 0 for s in Status}
        for r in self.results:
            out[r.status.value] += 1
        return out

    def failures(self) -> List[ClaimResult]:
        return [r for r in self.results if r.status == Status.FAIL]

    def to_df(self) -> pd.DataFrame:
        cols = list(ClaimResult.model_fields)
        return pd.DataFrame([r.model_dump(mode="json") for r in self.results], columns=cols)

    def to_tsv(self) -> str:
        buf = io.StringIO()
        self.to_df().to_csv(buf, sep="\t", index=False, lineterminator="\n")
        return buf.getvalue()

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)

    def to_text(self) -> str:
        lines = [f"claims for {self.example}"]
        for r in self.results:
            lines.append(f"{r.status.value:<5} {r.id}  {r.title}")
            if r.status != Status.PASS:
                if r.citation:
                    lines.append(f"      [{r.tag}] {r.citation}")
                lines.append(f"      expected: {r.expected}")
                lines.append(f"      observed: {r.observed}")
                if r.witness:
                    lines.append(f"      witness:  {r.witness}")
        c = self.counts()
        lines.append(f"{c['PASS']} passed, {c['FAIL']} failed, {c['FLAG']} flagged")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str = "text") -> str:
        if fmt == "text":
            return self.to_text()
        if fmt == "tsv":
            return self.to_tsv()
        if fmt == "json":
            return self.to_json() + "\n"
        raise InputError(f"unknown format {fmt!r}; expected text, tsv or json")


def fmt_value(value: Any) -> str:
    """Deterministic rendering: sets and dicts are sorted."""
    if isinstance(value, (set, frozenset)):
        return "{" + ", ".join(fmt_value(v) for v in sorted(value, key=repr)) + "}"
    if isinstance(value, dict):
        items = sorted(value.items(), key=lambda kv: repr(kv[0]))
        return "{" + ", ".join(f"{fmt_value(k)}: {fmt_value(v)}" for k, v in items) + "}"
    if isinstance(value, tuple):
        return "(" + ", ".join(fmt_value(v) for v in value) + ")"
    return str(value)


class _Recorder:
    def __init__(self, bundle: ExampleBundle) -> None:
        self.bundle = bundle
        self.results: List[ClaimResult] = []

    def add(
        self,
        cid: str,
        title: str,
        ok: bool,
        *,
        observed: Any = None,
        expected: Any = None,
        key: Optional[str] = None,
        witness: Any = None,
        flag: bool = False,
    ) -> bool:
        exp: Optional[Expected] = self.bundle.expect(key) if key else None
        if exp is not None and expected is None:
            expected = exp.value
        status = Status.PASS if ok else (Status.FLAG if flag else Status.FAIL)
        self.results.append(
            ClaimResult(
                id=cid,
                title=title,
                status=status,
                tag=exp.tag if exp else "",
                citation=exp.citation if exp else "",
                expected=None if expected is None else fmt_value(expected),
                observed=None if observed is None else fmt_value(observed),
                witness=None if witness is None else fmt_value(witness),
            )
        )
        if status == Status.FAIL:
            log.warning("%s failed: %s", cid, title)
        return ok

    def compare(self, cid: str, title: str, key: str, observed: Any, witness: Any = None) -> bool:
        exp = self.bundle.expect(key)
        if exp is None:
            return True
        return self.add(cid, title, observed == exp.value, observed=observed, key=key, witness=witness)

    @contextmanager
    def stage(self, cid: str, title: str) -> Iterator[None]:
        try:
            yield
        except WnuError as exc:
            self.add(cid, title, False, observed="error", witness=str(exc))
            raise _StageFailed(cid) from exc
        self.add(cid, title, True)


class _StageFailed(Exception):
    pass


# -----------------------------
# Stages
# -----------------------------
def _template_checks(rec: _Recorder) -> None:
    b = rec.bundle
    props = check_operation_properties(b.phi)
    rec.add(
        "template.phi-properties",
        "phi is idempotent, cyclic and a WNU",
        props.idempotent and props.cyclic and props.wnu,
        observed={"idempotent": props.idempotent, "cyclic": props.cyclic, "wnu": props.wnu},
    )
    rec.compare("template.maltsev-pairs", "phi(b,b,a) != a exactly for these (a,b)", "maltsev_pairs", props.maltsev_pairs)
    rec.compare("template.relation-size", "size of the encoded relation", "relation_size", len(b.relation))
    for tmpl, cid, label in (
        (b.template, "relation", "encoded relation"),
        (b.csp_template, "csp", "CSP template"),
    ):
        poly = check_polymorphism(b.phi, tmpl)
        rec.add(
            f"template.polymorphism.{cid}",
            f"phi preserves the {label}",
            poly.ok,
            witness=None if poly.ok else (poly.relation, poly.inputs, poly.output),
        )
    if b.expect("block_partition"):
        part = b.expect("block_partition").value
        res = check_block_maltsev(b.phi, b.template, part)
        rec.add("template.block-maltsev", "semilattice block Mal'tsev for 01|2", res.ok, witness=res.witness)
    if b.expect("endomorphisms"):
        rec.compare("template.endomorphisms", "the template has only the identity endomorphism",
                    "endomorphisms", len(enumerate_endomorphisms(b.template)))

    sols = solve_instance(b.csp_template, b.instance)
    rec.compare("template.csp-solutions", "solutions of the CSP instance", "csp_solutions", len(sols))
    if b.expect("right_value"):
        right = [v for v, g in b.var_groups.items() if g == "right"]
        left = [v for v, g in b.var_groups.items() if g == "left"]
        seen = {s[v] for s in sols for v in right}
        rec.compare("template.right-values", "every solution is 2 on the right pyramid", "right_value",
                    next(iter(seen)) if len(seen) == 1 else seen)
        rec.compare("template.left-values", "solutions take values in {0,1} on the left pyramid", "left_values",
                    frozenset(s[v] for s in sols for v in left))
        left_inst = Instance.from_constraints(
            [(n, s) for n, s in b.instance.constraints if set(s) <= set(left)], left
        )
        rec.compare("template.kernel-dimension", "kernel dimension of the left parity system", "kernel_dimension",
                    parity_kernel_dimension(left_inst, ["R1", "R2"]))


def _translation_checks(rec: _Recorder) -> None:
    b = rec.bundle
    tr = b.translation
    rec.compare("translation.paths", "number of P paths", "paths", len(b.domain) * len(b.relation))
    lengths = {net_length(build_P(a, row, name)) for a in b.domain for name, row in tr.rows.items()}
    rec.compare("translation.net-length", "every P path has the same net length", "net_length",
                next(iter(lengths)) if len(lengths) == 1 else lengths)
    aux = len(tr.H) - len(b.domain) - len(b.relation)
    rec.add("translation.aux-formula", "auxiliary vertices match the closed-form count",
            aux == aux_vertex_count(b.domain, b.relation), observed=aux,
            expected=aux_vertex_count(b.domain, b.relation))
    rec.compare("translation.aux", "auxiliary vertices of H", "h_aux", aux)
    stated = b.expect("h_aux_stated")
    if stated is not None:
        rec.add("translation.aux-stated", "stated auxiliary count differs from the construction rule",
                aux == stated.value, observed=aux, key="h_aux_stated", flag=True)
    rec.compare("translation.h-vertices", "vertices of H", "h_vertices", len(tr.H))
    rec.compare("translation.g-vertices", "vertices of G", "g_vertices", len(tr.G))
    rec.compare("translation.variables", "variable vertices of G", "variables", len(tr.var_vertices))
    stated = b.expect("variables_stated")
    if stated is not None:
        rec.add("translation.variables-stated", "stated variable count differs from the drawn gadgets",
                len(tr.var_vertices) == stated.value, observed=len(tr.var_vertices), key="variables_stated",
                flag=True)
    rec.compare("translation.tops", "top vertices of G", "tops", len(tr.t_vertices))

    lh, lg = compute_levels(tr.H), compute_levels(tr.G)
    rec.add("translation.balanced", "H and G are balanced", lh.balanced and lg.balanced,
            witness=lh.witness or lg.witness)
    if lh.balanced:
        top = b.expect("net_length").value if b.expect("net_length") else tr.arity + 2
        heights = {lh.levels[a] for a in b.domain} | {lh.levels[r] for r in tr.rows}
        ok = all(lh.levels[a] == 0 for a in b.domain) and all(lh.levels[r] == top for r in tr.rows)
        rec.add("translation.levels", "elements sit at level 0 and rows at the top level", ok, observed=heights)

    coords = sorted({c for spec in b.gadgets for c in spec.coords})
    census = probe_census(b.domain, b.relation, coords, b.row_names)
    bad = [r for r in census if not r.ok]
    rec.add("translation.probe-uniqueness",
            "Q_i maps into P(a,row) iff row[i]=a, and then uniquely and onto",
            not bad, observed=len(census), witness=bad[0] if bad else None)
    rec.compare("translation.probe-triples", "(a, i, row) triples examined", "probe_triples", len(census))

    unique = bool(b.expect("gadget_unique"))
    for coords_k in sorted({spec.coords for spec in b.gadgets}):
        ends = tuple(f"y{k}" for k in range(len(coords_k)))
        gadget = build_gadget(coords_k, ends, arity=tr.arity)
        counts = pp_relation(tr.H, gadget)
        target = project_relation(b.relation, coords_k).tuples
        label = "".join(str(c) for c in coords_k)
        rec.add(f"translation.gadget-{label}", f"gadget on coordinates {label} defines the projection",
                set(counts) == set(target), observed=len(counts), expected=len(target))
        if unique:
            rec.add(f"translation.gadget-{label}-unique", "each tuple extends to one gadget homomorphism",
                    all(n == 1 for n in counts.values()), key="gadget_unique",
                    observed=max(counts.values(), default=0))


def _solution_checks(rec: _Recorder) -> List[Dict[str, str]]:
    b = rec.bundle
    tr = b.translation
    projections = solution_projections(tr, {})
    rec.compare("homs.solutions", "distinct solutions of G -> H on the variables", "solutions", len(projections))
    csp = solve_instance(b.csp_template, b.instance)
    key = lambda s: tuple(sorted(s.items()))
    rec.add("homs.match-csp", "solutions of G -> H restrict to the CSP solutions",
            sorted(map(key, projections)) == sorted(map(key, csp)), observed=len(projections), expected=len(csp))
    full = b.expect("homomorphisms")
    if full is not None:
        n = count_homomorphisms(tr.G, tr.H, limit=HOM_COUNT_LIMIT)
        stated = b.expect("solutions")
        if full.tag != STATED and stated is not None and stated.value != full.value:
            rec.add("homs.full-count", "full homomorphisms differ from the stated solution count",
                    n == stated.value, observed=n, expected=stated.value, key="homomorphisms", flag=True)
        rec.compare("homs.count", "homomorphisms G -> H", "homomorphisms", n)
    return projections


def _consistency_checks(
    rec: _Recorder,
    projections: List[Dict[str, str]],
    order_seed: Optional[int],
    given: Optional[ConsistencyState] = None,
) -> ConsistencyState:
    b = rec.bundle
    tr = b.translation
    start = initial_state(tr.G, tr.H)
    rec.add("consistency.not-trivial", "the starting lists are not yet (2,3)-consistent",
            not verify_23_consistent(start, tr.G, tr.H).ok)
    with rec.stage("consistency.enforce", "(2,3)-consistency leaves every list nonempty"):
        state = given if given is not None else enforce_23_consistency(tr.G, tr.H, state=start, order_seed=order_seed)
        if not state.consistent:
            raise InputError(f"empty list at {state.empty_vertices()[:1]}")
    check = verify_23_consistent(state, tr.G, tr.H)
    rec.add("consistency.verify", "the fixpoint passes the independent (2,3) check", check.ok,
            witness=check.witness)
    inside = all(p[v] in state.unary(v) for p in projections for v in p)
    rec.add("consistency.solutions-inside", "every solution survives enforcement", inside)

    variables = list(tr.var_vertices.values())
    if b.expect("variable_lists"):
        lists = {state.unary(x) for x in variables}
        rec.compare("lists.variables", "unary lists of the variables", "variable_lists",
                    next(iter(lists)) if len(lists) == 1 else lists)
    if b.expect("top_lists"):
        lists = {state.unary(t) for t in tr.t_vertices}
        rec.compare("lists.tops", "unary lists of the tops", "top_lists",
                    next(iter(lists)) if len(lists) == 1 else lists)
    mismatch = [v for v, s in tr.sigma.items() if s.image() != state.unary(v) or not s.is_injective()]
    rec.add("lists.sigma-images", "every other list is the bijective image of sigma", not mismatch,
            observed=len(tr.sigma) - len(mismatch), expected=len(tr.sigma), witness=mismatch[:1] or None)
    if b.expect("sigma_sample"):
        v, _ = b.expect("sigma_sample").value
        rec.compare("lists.sigma-sample", f"list of {v}", "sigma_sample", (v, state.unary(v)))
    if b.expect("variable_pairs"):
        _binary_list_checks(rec, state)
    return state


def _binary_list_checks(rec: _Recorder, state: ConsistencyState) -> None:
    b = rec.bundle
    tr = b.translation
    variables = list(tr.var_vertices.values())
    delta = b.expect("variable_pairs").value
    bad = [(x, y) for i, x in enumerate(variables) for y in variables[i + 1:] if state.binary(x, y) != delta]
    rec.add("lists.variable-pairs", "L(x_i, x_j) is Delta for i != j", not bad, key="variable_pairs",
            observed=len(variables) * (len(variables) - 1) // 2 - len(bad), witness=bad[:1] or None)

    ends = {(leg.t, leg.endpoint): leg.coord for leg in tr.legs.values()}
    bad = []
    for t in tr.t_vertices:
        for x in variables:
            table = f"P{ends[(t, x)]}" if (t, x) in ends else "DELTA_BA"
            if state.binary(t, x) != BA_TABLES[table]:
                bad.append((t, x, table))
    rec.add("lists.top-variable", "L(t, x) is P_i on a Q_i copy and Delta_BA otherwise", not bad,
            witness=bad[:1] or None)

    bad = [(t, u, name) for (t, u), name in b.expect("top_pairs").value.items() if state.binary(t, u) != B_TABLES[name]]
    rec.add("lists.top-pairs", "L(t_j, t_k) matches E1, E2, E3, E34", not bad, key="top_pairs",
            observed=len(b.expect("top_pairs").value) - len(bad), witness=bad[:1] or None)

    bad = []
    for v, leg in tr.legs.items():
        graph = frozenset(tr.sigma[v].mapping.items())
        if state.binary(leg.t, v) != graph:
            bad.append(v)
    rec.add("lists.top-copy", "L(t, v) is the graph of sigma on every Q copy vertex", not bad,
            witness=bad[:1] or None)


def _family_checks(rec: _Recorder, state: ConsistencyState, scope: str) -> MultiSortedFamily:
    b = rec.bundle
    tr = b.translation
    with rec.stage("family.build", "phi_B and the per-vertex family are well defined"):
        phi_B = build_phi_B(tr.rows, b.phi)
        family = build_family(tr, state, b.phi, phi_B)
    if b.expect("phi_B_sample"):
        args, _ = b.expect("phi_B_sample").value
        rec.compare("family.phi-B-sample", "phi_B on three rows", "phi_B_sample", (args, phi_B(*args)))
    res = family.check_idempotent_cyclic()
    rec.add("family.idempotent-cyclic", "every operation of the family is idempotent and cyclic", res.ok,
            witness=res.witness)
    iso = check_sigma_isomorphism(family, tr, phi_B)
    rec.add("family.sigma-isomorphism", "sigma is an isomorphism from phi_B onto each list", iso.ok,
            witness=iso.witness)
    res = verify_multisorted(family, state, scope=scope, tr=tr)
    rec.add(f"family.multisorted-{scope}", "the family preserves the binary lists", res.ok, witness=res.witness)
    return family


def _step4_checks(rec: _Recorder, state: ConsistencyState, family: MultiSortedFamily) -> None:
    b = rec.bundle
    tr = b.translation
    cands = step4_candidates(family, state)
    with_cand = {v for v, _, _ in cands}
    missing = [v for v in tr.G.vertices if v not in with_cand]
    rec.add("step4.every-list", "every list has a Mal'tsev violation", not missing,
            observed=len(with_cand), expected=len(tr.G), witness=missing[:1] or None)
    if b.expect("homomorphisms") and b.expect("homomorphisms").value == 1:
        h = enumerate_homomorphisms(tr.G, tr.H, limit=2)[0]
        off = [(v, a) for v, a, _ in cands if a != h[v]]
        rec.add("step4.solution-values", "every violating value is the unique solution's value", not off,
                observed=len({(v, a) for v, a, _ in cands}), witness=off[:1] or None)


def _decomposition_checks(rec: _Recorder, state: ConsistencyState, family: MultiSortedFamily) -> None:
    ms = build_microstructure(state)
    comps = decompose_lists(ms)
    rec.compare("decomposition.components", "connected components of the microstructure", "components", len(comps))
    if len(comps) > 1:
        res = component_families_are_maltsev(family.ops, comps)
        rec.add("decomposition.maltsev", "each component is in the Mal'tsev case", res.ok, witness=res.witness)


def _census_checks(rec: _Recorder, state: ConsistencyState, family: MultiSortedFamily, method: str) -> DeletionCensus:
    b = rec.bundle
    tr = b.translation
    census = classify_all_deletions(tr, state, family, method=method)
    variables = set(tr.var_vertices.values())
    on_vars = census.restricted_to(variables)
    if b.expect("all_fatal"):
        rec.compare("deletion.all-fatal", "every step-4 deletion loses the solution", "all_fatal",
                    not census.safe(), witness=[(d.vertex, d.value) for d in census.safe()][:1] or None)
    if b.expect("fatal_variables"):
        fatal = frozenset((d.vertex, d.value) for d in on_vars.fatal())
        rec.compare("deletion.fatal-variables", "fatal deletions on the variables", "fatal_variables", fatal)
    if b.expect("safe_group"):
        group = b.expect("safe_group").value
        members = [d for d in census.verdicts if d.group == group]
        ok = bool(members) and all(d.safe for d in members)
        rec.add(f"deletion.safe-{group}", f"every deletion in the {group} group keeps a solution", ok,
                key="safe_group", observed=len(members),
                witness=[(d.vertex, d.value) for d in members if d.fatal][:1] or None)
    if b.expect("preserved"):
        group = b.expect("safe_group").value
        kept = {d.solutions_after for d in on_vars.verdicts if d.group == group}
        rec.compare("deletion.preserved", f"solutions left after a {group} variable deletion", "preserved",
                    next(iter(kept)) if len(kept) == 1 else kept)
    if b.expect("fatal_group"):
        group = b.expect("fatal_group").value
        members = [d for d in on_vars.verdicts if d.group == group]
        ok = bool(members) and all(d.fatal for d in members)
        rec.add(f"deletion.fatal-{group}", f"variable deletions in the {group} group lose every solution", ok,
                key="fatal_group", observed=len(members))
    off_vars = [d for d in census.verdicts if d.vertex not in variables]
    if off_vars and census.safe() and not b.expect("all_fatal"):
        rec.add("deletion.off-variables", "non-variable candidates summarised by group", False,
                observed=census.restricted_to(v for v in tr.G.vertices if v not in variables).by_group(),
                flag=True)
    return census


def verify_all(
    bundle: ExampleBundle,
    *,
    census: bool = True,
    scope: Optional[str] = None,
    method: str = "census",
    order_seed: Optional[int] = None,
    state: Optional[ConsistencyState] = None,
) -> ClaimReport:
    """
    Run every check for `bundle`; the report is deterministic for a given
    bundle. A precomputed (2,3) fixpoint can be passed as `state`.
    """
    if not isinstance(bundle, ExampleBundle):
        raise InputError("verify_all expects an ExampleBundle")
    rec = _Recorder(bundle)
    tr = bundle.translation
    if scope is None:
        scope = "all" if len(tr.G) <= ALL_PAIRS_LIMIT else "anchors"
    log.info("verifying %s (scope=%s, census=%s)", bundle.name, scope, census)
    try:
        _template_checks(rec)
        _translation_checks(rec)
        projections = _solution_checks(rec)
        state = _consistency_checks(rec, projections, order_seed, state)
        family = _family_checks(rec, state, scope)
        _step4_checks(rec, state, family)
        _decomposition_checks(rec, state, family)
        if census:
            _census_checks(rec, state, family, method)
    except _StageFailed as exc:
        log.warning("stopped after %s", exc)
    return ClaimReport(example=bundle.name, results=rec.results)
