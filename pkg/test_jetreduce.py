"""
Tests for the command-line driver
"""

import io
import json
import sys
import tempfile
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

import pytest

from jetcore import PreconditionError
from jetreduce import (EXIT_FAILED, EXIT_OK, EXIT_USAGE, JetReduceOrchestrator, RunConfig,
                       build_parser, main)
from report import validate_report
from testkit import run_all

FIXTURES = Path(__file__).parent / "fixtures"
MECHANICS = str(FIXTURES / "mechanics.jet")
HARMONIC = str(FIXTURES / "harmonic.jet")


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


def orchestrator(command: str, path: str = MECHANICS, **kwargs) -> JetReduceOrchestrator:
    return JetReduceOrchestrator(RunConfig(command, [path], quiet=True, **kwargs))


def test_mechanics_document_runs_clean():
    code, out, _ = run_cli("run", MECHANICS, "--quiet")
    assert code == EXIT_OK
    assert out.rstrip().endswith("✅ verdict: pass")


def test_potential_document_runs_clean():
    code, _, _ = run_cli("run", str(FIXTURES / "potential.jet"), "--quiet")
    assert code == EXIT_OK


def test_failed_relation_exits_one():
    code, out, _ = run_cli("verify_momap", HARMONIC, "--momap", "momentum", "--quiet")
    assert code == EXIT_FAILED
    assert "❌ relation | momentum: i=1" in out


def test_json_report_validates():
    code, out, err = run_cli("verify_momap", MECHANICS, "--momap", "energy", "--format", "json")
    assert code == EXIT_OK
    payload = json.loads(out)
    validate_report(payload)
    assert payload["command"] == "verify_momap"
    assert payload["verdict"] == "pass"
    assert "🔍 Loading" in err


def test_missing_file_is_a_usage_error():
    code, _, err = run_cli("el", str(FIXTURES / "missing.jet"))
    assert code == EXIT_USAGE
    assert "❌" in err
    code, _, _ = run_cli("el")
    assert code == EXIT_USAGE


def test_parse_errors_report_positions():
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "bad.jet"
        path.write_text("theory p {\n    base 1 coords [t];\n    fields q[1];\n"
                        "    lagrangian = q_t^x;\n}\n", encoding="utf-8")
        code, _, err = run_cli("el", str(path))
    assert code == EXIT_USAGE
    assert f"{path}:4:" in err
    assert "malformed power" in err


def test_unknown_selection_is_a_usage_error():
    code, _, err = run_cli("verify_momap", MECHANICS, "--momap", "spin", "--quiet")
    assert code == EXIT_USAGE
    assert "unknown momap 'spin'" in err


def test_el_report_entries():
    report = orchestrator("el").execute()
    subjects = [r.subject for r in report.results]
    assert subjects == ["particle: EL", "particle: γ", "particle: ω",
                        "particle: δL = EL - dγ", "particle: dω = 0"]
    assert report.results[0].value == "-q1_tt·δq1∧dt + -q2_tt·δq2∧dt + -q3_tt·δq3∧dt"
    assert report.passed


def test_symmetry_of_time_translation():
    report = orchestrator("symmetry", action="time_translation").execute()
    noether = [r for r in report.results if r.kind == "noether"]
    assert noether[0].value == "not strictly vertical"
    manifest = [r for r in report.results if r.kind == "manifest"]
    assert manifest[0].value == "manifest (vertical + horizontal)"
    assert report.passed


def test_symmetry_of_translations_reports_currents():
    report = orchestrator("symmetry", action="translation").execute()
    assert [r.status for r in report.results if r.kind == "noether"] == ["pass"] * 3
    hamiltonian = [r.value for r in report.results if r.kind == "hamiltonian"]
    assert hamiltonian == ["i_χω = -dμ holds for μ = -j"] * 3


def test_zero_locus_classification_table():
    report = orchestrator("zero_locus").cmd_zero_locus("momentum")
    table = report.tables["zero locus of translation"]
    verdicts = dict(zip(table["field"], table["in Z"]))
    assert verdicts == {"line": "yes", "rest": "yes", "parabola": "no", "line_grid": "yes"}
    assert all(r.status == "pass" for r in report.results if r.kind == "oracle")


def test_zero_locus_with_no_fields_is_empty():
    report = orchestrator("zero_locus").cmd_zero_locus("momentum", [])
    assert report.results == []
    assert report.tables["zero locus of translation"].empty
    assert report.passed


def test_selftest_with_empty_suite_list_is_a_noop():
    code, out, _ = run_cli("selftest", "--suites", "--quiet")
    assert code == EXIT_OK
    assert "verdict: pass" in out


def test_selftest_detects_injected_fault():
    code, out, _ = run_cli("selftest", "--suites", "normalize idempotent", "--forms", "3",
                           "--fault", "leibniz-sign", "--quiet")
    assert code == EXIT_FAILED
    assert "❌ fault | leibniz-sign: d_h²(δu∧δw) = 0" in out


def test_latex_output():
    code, out, _ = run_cli("el", MECHANICS, "--format", "latex", "--quiet")
    assert code == EXIT_OK
    assert out.startswith(r"\begin{tabular}{lll}")
    assert r"\mathrm{EL} = " in out


def test_run_config_validation():
    with pytest.raises(PreconditionError):
        RunConfig("explode")
    with pytest.raises(PreconditionError):
        RunConfig("el", format="yaml")


def test_flags_override_config():
    args = build_parser().parse_args(["zero_locus", MECHANICS, "--tol", "1e-8", "--jet-order", "5"])
    config = RunConfig.from_args(args, {"numeric": {"tolerance": 1e-4, "step": 1e-2},
                                        "jet_order": 3})
    assert config.tolerance == 1e-8
    assert config.step == 1e-2
    assert config.jet_order == 5
    assert RunConfig.from_args(build_parser().parse_args(["run", MECHANICS]), {}).jet_order is None


def test_jet_order_flag_reaches_parser():
    o = orchestrator("el", jet_order=3)
    assert o.load().theories["particle"].space.order == 3


if __name__ == "__main__":
    sys.exit(0 if run_all(globals(), "COMMAND-LINE TESTS") else 1)
