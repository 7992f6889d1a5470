# Demo: summarise a deletion census (pandas only)
# Run after the CLI wrote one:
#   wnu-counterexample fkr-step4 --example 2 --classify-all --format tsv > outputs/census2.tsv
#   python notebooks/02_deletion_census.py outputs/census2.tsv

import sys

import pandas as pd

if __name__ == "__main__":
    if len(sys.argv) < 2:
        print("Usage: python notebooks/02_deletion_census.py outputs/census.tsv")
        raise SystemExit(1)

    df = pd.read_csv(sys.argv[1], sep="\t", dtype={"vertex": str, "value": str})
    print(f"{len(df)} candidate deletions on {df['vertex'].nunique()} vertices\n")

    table = pd.crosstab(df["group"], df["verdict"])
    print(table.to_string())

    # a deletion that loses solutions without reaching zero is still safe
    lossy = df[(df["verdict"] == "safe") & (df["solutions_after"] < df["solutions_before"])]
    print(f"\nsafe but lossy: {len(lossy)}")

    variables = df[df["vertex"].str.fullmatch(r"x\d+'?")]
    if not variables.empty:
        print("\nVariable vertices:")
        print(variables[["vertex", "value", "solutions_before", "solutions_after", "verdict"]].to_string(index=False))
