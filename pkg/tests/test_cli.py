from __future__ import annotations

from pathlib import Path

import pytest
from typer.testing import CliRunner

from wnu_counterexample.cli import app

runner = CliRunner()


@pytest.fixture(scope="module")
def built(tmp_path_factory):
    out = tmp_path_factory.mktemp("example1")
    result = runner.invoke(app, ["build", "--example", "1", "--out", str(out)])
    assert result.exit_code == 0, result.output
    return out


def test_build_writes_artifacts(built):
    for name in ("H.dg", "G.dg", "template.rel", "csp.rel", "phi.op", "instance.inst", "provenance.tsv"):
        assert (built / name).exists(), name


def test_homs_from_built_files(built):
    result = runner.invoke(app, ["homs", "--g", str(built / "G.dg"), "--h", str(built / "H.dg")])
    assert result.exit_code == 0
    assert "1 homomorphism" in result.output
    assert "homomorphisms" not in result.output


def test_homs_projection(built):
    result = runner.invoke(
        app, ["homs", "--g", str(built / "G.dg"), "--h", str(built / "H.dg"), "--project", "x1,x2"]
    )
    assert result.exit_code == 0
    assert "1 homomorphism (projected onto 2 vertices)" in result.output


def test_homs_unknown_projection_vertex(built):
    result = runner.invoke(
        app, ["homs", "--g", str(built / "G.dg"), "--h", str(built / "H.dg"), "--project", "x9"]
    )
    assert result.exit_code == 2


def test_check_template(built):
    result = runner.invoke(
        app,
        [
            "check",
            "--relations", str(built / "csp.rel"),
            "--operation", str(built / "phi.op"),
            "--instance", str(built / "instance.inst"),
            "--block", "01|2",
        ],
    )
    assert result.exit_code == 0, result.output
    assert "polymorphism: yes" in result.output
    assert "(2,0), (2,1)" in result.output
    assert "instance: 1 solution" in result.output
    assert "block Mal'tsev: yes" in result.output


def test_check_rejects_non_polymorphism(tmp_path):
    rel = tmp_path / "even.rel"
    rel.write_text("domain 0 1\nrelation EVEN 3\n0 0 0\n0 1 1\n1 0 1\n1 1 0\n", encoding="utf-8")
    op = tmp_path / "maj.op"
    lines = ["arity 3"]
    for x in "01":
        for y in "01":
            for z in "01":
                lines.append(f"{x} {y} {z} -> {x if x in (y, z) else y}")
    op.write_text("\n".join(lines) + "\n", encoding="utf-8")
    result = runner.invoke(app, ["check", "--relations", str(rel), "--operation", str(op)])
    assert result.exit_code == 1
    assert "polymorphism: no" in result.output


def test_consistency_writes_lists(built, tmp_path):
    out = tmp_path / "lists.txt"
    result = runner.invoke(
        app, ["consistency", "--g", str(built / "G.dg"), "--h", str(built / "H.dg"), "--out", str(out)]
    )
    assert result.exit_code == 0, result.output
    assert "Consistent." in result.output
    first = Path(out).read_text(encoding="utf-8").splitlines()[0]
    assert first == "L x1 0 1 2"


def test_missing_input_file_exits_2(tmp_path):
    result = runner.invoke(app, ["homs", "--g", str(tmp_path / "a.dg"), "--h", str(tmp_path / "b.dg")])
    assert result.exit_code == 2


def test_claims_example1():
    result = runner.invoke(app, ["claims", "example1"])
    assert result.exit_code == 0, result.output
    assert "claims for example1" in result.output
    assert "0 failed" in result.output


def test_claims_json_without_census():
    result = runner.invoke(app, ["claims", "1", "--json", "--no-census"])
    assert result.exit_code == 0
    assert '"example": "example1"' in result.output
    assert "deletion." not in result.output


def test_claims_unknown_example():
    result = runner.invoke(app, ["claims", "example9"])
    assert result.exit_code == 2


def test_claims_bad_format():
    result = runner.invoke(app, ["claims", "1", "--format", "xml"])
    assert result.exit_code == 2


def test_deletion_step_command_name():
    names = {cmd.name for cmd in app.registered_commands}
    assert "fkr-step4" in names
    assert "step4" not in names


def test_step4_single_deletion():
    result = runner.invoke(app, ["fkr-step4", "--example", "1", "--delete", "x1:2"])
    assert result.exit_code == 0, result.output
    assert "delete 2 at x1: fatal (1 -> 0 solutions)" in result.output


def test_step4_deletion_with_colons_in_the_vertex():
    result = runner.invoke(app, ["fkr-step4", "--example", "1", "--delete", "t3:Q1:v2R:u:2:τ:2", "--format", "tsv"])
    assert result.exit_code == 0, result.output
    assert result.output.splitlines()[1].split("\t")[:2] == ["t3:Q1:v2R", "u:2:τ:2"]
    assert result.output.strip().endswith("fatal")
    result = runner.invoke(app, ["fkr-step4", "--example", "1", "--delete", "t1:2"])
    assert result.exit_code == 2


def test_step4_classify_all_tsv():
    result = runner.invoke(app, ["fkr-step4", "--example", "1", "--classify-all", "--format", "tsv"])
    assert result.exit_code == 0, result.output
    lines = result.output.strip().splitlines()
    assert lines[0].startswith("vertex\tvalue\tgroup")
    assert len(lines) == 179
    assert all(line.endswith("fatal") for line in lines[1:])


def test_step4_lists_candidates():
    result = runner.invoke(app, ["fkr-step4", "--example", "1"])
    assert result.exit_code == 0
    assert "on 178 vertices" in result.output
