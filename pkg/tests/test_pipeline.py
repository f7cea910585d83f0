import json
import subprocess
import sys

import pytest

from helpers import CORPUS, corpus_files, frozen_oracle
from racerlite.cli import main
from racerlite.corpus import classify, read_expectation, run_corpus
from racerlite.pipeline import EXIT_CODES, RunConfig, Verdict, run
from racerlite.report import SCHEMA_VERSION, emit_report

FIG4 = CORPUS / "fig4_escaping_local.c"
FIG5A = CORPUS / "fig5a_alloc_in_child.c"
FIG5B = CORPUS / "fig5b_atomic_restore.c"


# -- configuration --------------------------------------------------------------


@pytest.mark.parametrize(
    "kw",
    [{"mode": "sideways"}, {"backend": "magic"}, {"context_depth": -1}, {"unfold": -2}, {"threshold": 0},
     {"format": "xml"}],
)
def test_run_config_rejects(kw):
    with pytest.raises(ValueError):
        RunConfig(**kw)


def test_run_config_defaults():
    c = RunConfig()
    assert (c.mode, c.backend, c.context_depth, c.unfold, c.threshold) == ("combined", "interp", 1, 1, 3)


def test_race_verdict_needs_reports():
    with pytest.raises(ValueError):
        Verdict("race")


# -- verdicts --------------------------------------------------------------------


@pytest.mark.parametrize("path,status", [(FIG4, "race"), (FIG5A, "unknown"), (FIG5B, "unknown")])
def test_combined_figures(path, status):
    assert run(RunConfig(), path).status == status


def test_over_locked_counter_race_free():
    assert run(RunConfig(mode="over"), CORPUS / "counter_locked.c").status == "race_free"


def test_under_without_must_is_unknown_with_notes():
    v = run(RunConfig(mode="under"), FIG5B)
    assert v.status == "unknown"
    v = run(RunConfig(mode="under"), CORPUS / "conditional_lock.c")
    assert v.status == "unknown" and not v.reports
    assert any(d.startswith("under: possible race on g") for d in v.diagnostics)


def test_active_waiting_short_circuits():
    v = run(RunConfig(), CORPUS / "busy_wait_flag.c")
    assert v.status == "unknown" and not v.phases
    assert any("active waiting" in d for d in v.diagnostics)


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.name)
def test_combined_consistent_with_phases(path):
    v = run(RunConfig(), path)
    if v.status == "race":
        assert v.phases["under"].detection.must
        assert all(r.classification == "must" for r in v.reports)
    if v.status == "race_free":
        assert not v.phases["over"].detection.reports
        assert not frozen_oracle()[path.name]["race"]


def test_deterministic_bytes():
    a = emit_report(run(RunConfig(), FIG4), "json")
    b = emit_report(run(RunConfig(), FIG4), "json")
    assert a == b


# -- reports ---------------------------------------------------------------------


def test_json_race_free():
    d = json.loads(emit_report(run(RunConfig(mode="over"), CORPUS / "counter_locked.c"), "json"))
    assert d["verdict"] == "race_free" and d["races"] == []
    assert d["schema_version"] == SCHEMA_VERSION
    assert "timings" not in d


def test_json_fig4():
    d = json.loads(emit_report(run(RunConfig(), FIG4), "json", timings=True))
    (race,) = d["races"]
    assert race["class"] == "must" and race["base"] == "main::data"
    assert {a["thread"] for a in race["accesses"]} <= {"t1", "t2"}
    for a in race["accesses"]:
        assert set(a) == {"file", "line", "thread", "kind", "lockset_may", "lockset_must"}
    assert d["timings"]


def test_json_unknown_notes():
    d = json.loads(emit_report(run(RunConfig(), CORPUS / "busy_wait_flag.c"), "json"))
    assert d["verdict"] == "unknown" and d["notes"]


def test_text_report():
    text = emit_report(run(RunConfig(), FIG4), "text").decode()
    assert text.startswith("verdict: race\n")
    assert "must-race on main::data" in text


def test_bad_report_format():
    with pytest.raises(ValueError):
        emit_report(Verdict("unknown"), "yaml")


# -- command line ----------------------------------------------------------------


def test_cli_exit_codes(capsys):
    assert main(["analyze", str(FIG4)]) == EXIT_CODES["race"] == 1
    assert main(["analyze", "--mode", "over", str(CORPUS / "counter_locked.c")]) == 0
    assert main(["analyze", str(FIG5B)]) == 2
    capsys.readouterr()


def test_cli_errors(tmp_path, capsys):
    bad = tmp_path / "bad.c"
    bad.write_text("int main( {")
    assert main(["analyze", str(bad)]) == 3
    assert main(["analyze", str(tmp_path / "missing.c")]) == 3
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"lock": [{"name": "f"}], "unlock": [{"name": "f"}]}))
    assert main(["analyze", "--config", str(cfg), str(FIG4)]) == 3
    assert main(["analyze", "--lock-threshold", "0", str(FIG4)]) == 3
    assert "error" in capsys.readouterr().err


def test_cli_json_and_dumps(tmp_path, capsys):
    dot, ls = tmp_path / "g.dot", tmp_path / "ls.txt"
    code = main(["analyze", "--format", "json", "--dump-thread-graph", str(dot), "--dump-locksets", str(ls), str(FIG5B)])
    out = json.loads(capsys.readouterr().out)
    assert code == 2 and out["verdict"] == "unknown"
    assert dot.read_text().startswith("digraph")
    assert "must=" in ls.read_text()


def test_cli_oracle(capsys):
    assert main(["oracle", str(FIG4), "--max-steps", "100"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["race"] and d["exhausted"]


def test_cli_corpus(tmp_path, capsys):
    for name in ("fig4_escaping_local.c", "counter_locked.c"):
        (tmp_path / name).write_text((CORPUS / name).read_text())
    assert main(["corpus", str(tmp_path)]) == 0
    assert "TP=1" in capsys.readouterr().out


def test_cli_entry_point():
    r = subprocess.run([sys.executable, "-m", "racerlite.cli", "analyze", "--format", "json", str(FIG4)],
                       capture_output=True, text=True)
    assert r.returncode == 1
    assert json.loads(r.stdout)["verdict"] == "race"


# -- corpus runner -----------------------------------------------------------------


def test_headers(tmp_path):
    f = tmp_path / "a.c"
    f.write_text("// expect: race_free\n// allow: unknown\nint main() { return 0; }\n")
    e = read_expectation(f)
    assert e.expect == "race_free" and e.allow == ("unknown",)
    f.write_text("int main() { return 0; }\n")
    assert read_expectation(f) is None


@pytest.mark.parametrize(
    "expect,verdict,outcome",
    [("race", "race", "TP"), ("race", "race_free", "FN"), ("race_free", "race_free", "TN"),
     ("race_free", "race", "FP"), ("race", "unknown", "unknown"), ("race_free", "error", "error")],
)
def test_classify(expect, verdict, outcome):
    assert classify(expect, verdict) == outcome


def test_empty_corpus(tmp_path):
    res = run_corpus(tmp_path)
    assert res.rows == [] and res.exit_code == 0


def test_false_negative_fails(tmp_path):
    (tmp_path / "x.c").write_text("// expect: race\nint g; int main() { g = 1; return 0; }\n")
    (tmp_path / "skip.c").write_text("int main() { return 0; }\n")
    res = run_corpus(tmp_path, RunConfig(mode="over"))
    assert [r.outcome for r in res.rows] == ["FN"]
    assert res.exit_code == 1 and len(res.skipped) == 1


def test_full_corpus_matches_expectations():
    serial = run_corpus(CORPUS)
    assert serial.exit_code == 0, serial.table()
    parallel = run_corpus(CORPUS, jobs=2)
    assert [(r.file, r.verdict) for r in parallel.rows] == [(r.file, r.verdict) for r in serial.rows]
