# Demo: build an example, write its files and print the claim report
# Run from repo root:
#   python notebooks/01_demo_claims.py example1

import sys
from pathlib import Path

from wnu_counterexample.api import run_example

if __name__ == "__main__":
    if len(sys.argv) < 2:
        print("Usage: python notebooks/01_demo_claims.py example1|example2|example2x")
        raise SystemExit(1)
    name = sys.argv[1]
    out = Path("outputs") / name
    run = run_example(name, census=True, verify=True)
    run.export(str(out))

    print(run.report.render())
    print("\nLists per group:")
    print(run.lists_df().groupby("group")["size"].describe())
    print("\nFiles at:", out)
