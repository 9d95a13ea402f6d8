import csv
import io
import json
from pathlib import Path

from eqchase.cli import main

DATA = Path(__file__).parent / "data"
THM2 = str(DATA / "thm2.rules")
AA = str(DATA / "aa.facts")


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_validate_ok(capsys):
    code, out, _ = run(capsys, "validate", THM2, "--facts", AA)
    assert code == 0
    assert out.strip() == "ok"


def test_validate_reports_violations(capsys, tmp_path):
    bad = tmp_path / "bad.rules"
    bad.write_text("A(X) -> exists W . R(X,W) .\nUnknown(a) .\n")
    code, out, _ = run(capsys, "validate", str(bad))
    assert code == 1
    assert "does not occur" in out


def test_validate_parse_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "broken.rules"
    bad.write_text("A( .\n")
    code, _, err = run(capsys, "validate", str(bad))
    assert code == 1
    assert "broken.rules:1:" in err


def test_chase_terminates_exit_zero(capsys):
    code, out, _ = run(capsys, "chase", THM2, "--facts", AA)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[:-1] == ["A(a)", "B(a)", "R(a,a)"]
    assert "terminated" in lines[-1]


def test_chase_limit_exit_code(capsys, tmp_path):
    # the standard axiomatisation of thm2 diverges, so cap the depth
    code, out, _ = run(capsys, "axiomatise", THM2, "--kind", "st")
    st_file = tmp_path / "st.rules"
    st_file.write_text(out)
    code, out, _ = run(
        capsys, "chase", str(st_file), "--facts", AA, "--max-depth", "6", "--format", "json"
    )
    assert code == 2
    doc = json.loads(out)
    assert doc["outcome"] == "limit-exceeded"
    assert doc["limit"] == "max_term_depth"
    assert doc["max_term_depth"] == 6


def test_chase_json_deterministic_with_no_timing(capsys):
    outs = []
    for _ in range(2):
        code, out, _ = run(
            capsys, "chase", THM2, "--facts", AA, "--format", "json", "--no-timing"
        )
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1]
    assert "elapsed_ms" not in outs[0]


def test_query_subcommand(capsys):
    code, out, _ = run(
        capsys,
        "query",
        THM2,
        "--facts",
        AA,
        "--query",
        "? exists X, Y . R(X,Y), B(Y) .",
        "--query",
        "? exists X . C(X) .",
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("entailed:")
    assert lines[1].startswith("not-entailed:")


def test_query_requires_queries(capsys):
    code, _, err = run(capsys, "query", THM2, "--facts", AA)
    assert code == 1
    assert "no queries" in err


def test_axiomatise_st_roundtrips(capsys):
    code, out, _ = run(capsys, "axiomatise", THM2, "--kind", "st")
    assert code == 0
    from eqchase import parse

    program = parse("".join(l + "\n" for l in out.splitlines() if not l.startswith("%")))
    assert len(program.rules) == 11


def test_axiomatise_sing_all(capsys):
    code, out, _ = run(capsys, "axiomatise", str(DATA / "thm4.rules"), "--kind", "sing-all", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert len(doc) == 4
    assert all(d["kind"] == "singularisation" for d in doc)


def test_check_all_json(capsys):
    code, out, _ = run(
        capsys, "check", THM2, "--notion", "all", "--format", "json", "--no-timing"
    )
    assert code == 0
    doc = json.loads(out)
    assert [d["notion"] for d in doc] == ["emfa", "mfa-st", "mfa-sing"]
    assert [d["verdict"] for d in doc] == ["acyclic", "cyclic", "acyclic"]
    assert doc[1]["witness"]["term"]
    assert all("elapsed_ms" not in d for d in doc)
    # byte-identical on a second run
    code, out2, _ = run(
        capsys, "check", THM2, "--notion", "all", "--format", "json", "--no-timing"
    )
    assert out2 == out


def test_check_single_notion_text(capsys):
    code, out, _ = run(capsys, "check", str(DATA / "ex4.rules"), "--notion", "emfa")
    assert code == 0
    assert out.startswith("emfa: cyclic")


def test_check_csv_format(capsys):
    code, out, _ = run(
        capsys, "check", THM2, "--notion", "all", "--format", "csv", "--no-timing"
    )
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["notion", "verdict", "set_size", "elapsed_ms", "steps"]
    assert len(rows) == 4


def test_bench_writes_csv(capsys, tmp_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    for name in ("thm2", "thm4", "ex3", "ex4"):
        (corpus / f"{name}.rules").write_text((DATA / f"{name}.rules").read_text())
    out_csv = tmp_path / "results.csv"
    code, _, _ = run(capsys, "bench", str(corpus), "--out", str(out_csv), "--no-timing")
    assert code == 0
    rows = list(csv.reader(out_csv.open()))
    assert rows[0] == [
        "id", "n_tgd_exist", "n_egd",
        "emfa_verdict", "emfa_ms", "mfa_st_verdict", "mfa_st_ms",
        "mfa_sing_verdict", "mfa_sing_ms",
    ]
    by_id = {r[0]: r for r in rows[1:]}
    assert set(by_id) == {"thm2", "thm4", "ex3", "ex4"}
    assert by_id["thm2"][1:3] == ["1", "1"]
    assert by_id["thm2"][3] == "acyclic" and by_id["thm2"][5] == "cyclic"
    assert by_id["ex4"][3] == "cyclic" and by_id["ex4"][7] == "acyclic"
    assert all(r[4] == "0" for r in rows[1:])  # --no-timing zeroes the ms columns


def test_bench_skips_bad_files(capsys, tmp_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    (corpus / "good.rules").write_text((DATA / "thm2.rules").read_text())
    (corpus / "bad.rules").write_text("A( .\n")
    code, out, err = run(capsys, "bench", str(corpus))
    assert code == 1
    assert "skipping bad.rules" in err
    assert "good" in out


def test_missing_file_is_internal_error_not_crash(capsys):
    code, _, err = run(capsys, "chase", "no-such-file.rules")
    assert code == 3
    assert "internal error" in err
