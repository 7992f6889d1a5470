from __future__ import annotations

import itertools
import os
from typing import List

import pandas as pd

from .consistency import ConsistencyState
from .models import Digraph, Instance, Operation, Template
from .translation import TranslationResult


def ensure_dir(path: str) -> None:
    os.makedirs(path, exist_ok=True)


def _write(out_dir: str, name: str, text: str) -> str:
    ensure_dir(out_dir)
    p = os.path.join(out_dir, name)
    with open(p, "w", encoding="utf-8") as f:
        f.write(text)
    return p


# -----------------------------
# Text formats
# -----------------------------
def format_relations(tmpl: Template) -> str:
    lines = ["domain " + " ".join(tmpl.domain.elements)]
    for rel in tmpl.relations:
        lines.append(f"relation {rel.name} {rel.arity}")
        lines += [" ".join(t) for t in rel.sorted_tuples()]
    return "\n".join(lines) + "\n"


def format_operation(op: Operation) -> str:
    lines = [f"arity {op.arity}"]
    for args in itertools.product(op.carrier, repeat=op.arity):
        lines.append(f"{' '.join(args)} -> {op.table[args]}")
    return "\n".join(lines) + "\n"


def format_instance(inst: Instance) -> str:
    return "".join(f"{name} {' '.join(scope)}\n" for name, scope in inst.constraints)


def format_lists(state: ConsistencyState) -> str:
    """L lines in vertex order, then P lines for v before w in vertex order."""
    lines: List[str] = []
    for v in state.vertices:
        lines.append(" ".join(["L", v] + sorted(state.unary(v))))
    for v, w in itertools.combinations(state.vertices, 2):
        pairs = sorted(state.binary(v, w))
        lines.append(" ".join(["P", v, w] + [f"{a},{b}" for a, b in pairs]))
    return "\n".join(lines) + "\n"


def provenance_df(tr: TranslationResult) -> pd.DataFrame:
    rows = []
    for v in tr.G.vertices:
        leg = tr.legs.get(v)
        if tr.is_variable(v):
            kind = "variable"
        elif tr.is_top(v):
            kind = "top"
        else:
            kind = "copy"
        rows.append(
            {
                "vertex": v,
                "kind": kind,
                "group": tr.group_of(v),
                "gadget": leg.t if leg else (v if kind == "top" else ""),
                "coord": leg.coord if leg else "",
                "endpoint": leg.endpoint if leg else "",
                "q_vertex": leg.q_vertex if leg else "",
                "height": leg.height if leg else "",
            }
        )
    return pd.DataFrame(rows)


# -----------------------------
# Writers
# -----------------------------
def write_digraph(out_dir: str, g: Digraph, name: str) -> str:
    return _write(out_dir, name, g.to_text())


def write_relations(out_dir: str, tmpl: Template, name: str = "template.rel") -> str:
    return _write(out_dir, name, format_relations(tmpl))


def write_operation(out_dir: str, op: Operation, name: str = "phi.op") -> str:
    return _write(out_dir, name, format_operation(op))


def write_instance(out_dir: str, inst: Instance, name: str = "instance.inst") -> str:
    return _write(out_dir, name, format_instance(inst))


def write_lists(out_dir: str, state: ConsistencyState, name: str = "lists.txt") -> str:
    return _write(out_dir, name, format_lists(state))


def write_provenance(out_dir: str, tr: TranslationResult, name: str = "provenance.tsv") -> str:
    ensure_dir(out_dir)
    p = os.path.join(out_dir, name)
    provenance_df(tr).to_csv(p, sep="\t", index=False, lineterminator="\n")
    return p
