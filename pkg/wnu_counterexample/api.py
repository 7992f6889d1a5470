from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from .catalog import ExampleBundle, load_example
from .claims import ClaimReport, verify_all
from .consistency import ConsistencyState, build_microstructure, decompose_lists, enforce_23_consistency
from .deletion import DeletionCensus, MultiSortedFamily, build_family, classify_all_deletions
from .errors import InputError
from .export import (
    provenance_df,
    write_digraph,
    write_instance,
    write_lists,
    write_operation,
    write_provenance,
    write_relations,
)

log = logging.getLogger(__name__)


@dataclass
class ExampleRun:
    bundle: ExampleBundle
    state: Optional[ConsistencyState] = None
    family: Optional[MultiSortedFamily] = None
    census: Optional[DeletionCensus] = None
    report: Optional[ClaimReport] = None

    @property
    def name(self) -> str:
        return self.bundle.name

    def _need_state(self) -> ConsistencyState:
        if self.state is None:
            raise InputError(f"{self.name}: consistency has not been enforced")
        return self.state

    def lists_df(self) -> pd.DataFrame:
        df = self._need_state().lists_df()
        groups = self.bundle.translation
        df["group"] = [groups.group_of(v) for v in df["vertex"]]
        return df

    def components_df(self) -> pd.DataFrame:
        families = decompose_lists(build_microstructure(self._need_state()))
        rows: List[Dict[str, Any]] = []
        for k, family in enumerate(families):
            sizes = [len(vals) for vals in family.values()]
            rows.append(
                {
                    "component": k,
                    "nodes": sum(sizes),
                    "vertices_covered": sum(1 for n in sizes if n),
                    "max_sublist": max(sizes, default=0),
                }
            )
        return pd.DataFrame(rows)

    def census_df(self) -> pd.DataFrame:
        if self.census is None:
            raise InputError(f"{self.name}: no deletion census was run")
        return self.census.census_df()

    def provenance_df(self) -> pd.DataFrame:
        return provenance_df(self.bundle.translation)

    def claims_df(self) -> pd.DataFrame:
        if self.report is None:
            raise InputError(f"{self.name}: claims were not verified")
        return self.report.to_df()

    def export(self, out_dir: str) -> List[str]:
        """Write the build artifacts, plus the lists file when a state is present."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        b = self.bundle
        tr = b.translation
        paths = [
            write_digraph(str(out), tr.H, "H.dg"),
            write_digraph(str(out), tr.G, "G.dg"),
            write_relations(str(out), b.template, "template.rel"),
            write_relations(str(out), b.csp_template, "csp.rel"),
            write_operation(str(out), b.phi, "phi.op"),
            write_instance(str(out), b.instance, "instance.inst"),
            write_provenance(str(out), tr, "provenance.tsv"),
        ]
        if self.state is not None:
            paths.append(write_lists(str(out), self.state, "lists.txt"))
        return paths


def run_example(
    name: str,
    *,
    enforce: bool = True,
    census: bool = False,
    verify: bool = False,
    method: str = "census",
    scope: Optional[str] = None,
    order_seed: Optional[int] = None,
) -> ExampleRun:
    """
    Build an example and run the requested stages: enforcement, the
    deletion census (needs enforcement) and the claim report.
    """
    run = ExampleRun(load_example(name))
    tr = run.bundle.translation
    if enforce or census:
        run.state = enforce_23_consistency(tr.G, tr.H, order_seed=order_seed)
        if not run.state.consistent:
            log.warning("%s: (2,3)-consistency emptied a list", run.name)
    if census and run.state is not None and run.state.consistent:
        run.family = build_family(tr, run.state, run.bundle.phi)
        run.census = classify_all_deletions(tr, run.state, run.family, method=method, order_seed=order_seed)
    if verify:
        run.report = verify_all(
            run.bundle, census=census, scope=scope, method=method, order_seed=order_seed, state=run.state
        )
    return run
