"""
Report Model and Formatting
Result entries collected by the command runners and their text, JSON
and LaTeX renderings.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import jsonschema
import pandas as pd

SCHEMA_PATH = Path(__file__).resolve().parent / "report_schema.json"
FORMATS = ("text", "json", "latex")

PASS, FAIL, INFO = "pass", "fail", "info"
STATUS_ICONS = {PASS: "✅", FAIL: "❌", INFO: "📊"}


@dataclass
class ResultEntry:
    kind: str
    subject: str
    status: str
    residual: Optional[Union[str, float]] = None
    value: Optional[Union[str, float, bool]] = None
    latex: Optional[str] = None

    def to_dict(self) -> Dict:
        out = {"kind": self.kind, "subject": self.subject, "status": self.status}
        if self.residual is not None:
            out["residual"] = self.residual
        if self.value is not None:
            out["value"] = self.value
        return out


@dataclass
class Report:
    command: str
    inputs: List[str]
    results: List[ResultEntry] = field(default_factory=list)
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)

    def add(self, kind: str, subject: str, passed: Optional[bool] = None,
            residual=None, value=None, latex: Optional[str] = None) -> ResultEntry:
        """Record an entry; passed=None marks it informational"""
        status = INFO if passed is None else (PASS if passed else FAIL)
        if isinstance(residual, float):
            residual = float(f"{residual:.6e}")
        entry = ResultEntry(kind, subject, status, residual, value, latex)
        self.results.append(entry)
        return entry

    @property
    def passed(self) -> bool:
        return all(r.status != FAIL for r in self.results)

    @property
    def verdict(self) -> str:
        return PASS if self.passed else FAIL

    def to_dict(self) -> Dict:
        return {"command": self.command, "inputs": list(self.inputs),
                "results": [r.to_dict() for r in self.results], "verdict": self.verdict}


def load_schema() -> Dict:
    with open(SCHEMA_PATH, "r", encoding="utf-8") as f:
        return json.load(f)


def validate_report(payload: Dict) -> None:
    jsonschema.validate(instance=payload, schema=load_schema())


def _latex_escape(text: str) -> str:
    for a, b in (("\\", r"\textbackslash{}"), ("_", r"\_"), ("&", r"\&"), ("%", r"\%"),
                 ("#", r"\#")):
        text = text.replace(a, b)
    return text


class ReportFormatter:
    """Renders a Report as status lines, schema-checked JSON, or a LaTeX table"""

    def __init__(self, style: str = "text"):
        if style not in FORMATS:
            raise ValueError(f"unknown output format {style!r}; choose from {', '.join(FORMATS)}")
        self.style = style

    def format(self, report: Report) -> str:
        return getattr(self, f"format_{self.style}")(report)

    def format_text(self, report: Report) -> str:
        lines = [f"📊 {report.command.upper()}: {', '.join(report.inputs) or '-'}", "=" * 50]
        for r in report.results:
            line = f"{STATUS_ICONS[r.status]} {r.kind} | {r.subject}"
            if r.residual is not None:
                line += f" | residual {r.residual}"
            lines.append(line)
            if r.value is not None:
                lines.append(f"   {r.value}")
        for title, table in report.tables.items():
            lines += ["", f"🔍 {title}", table.to_string(index=False) if not table.empty else "(empty)"]
        lines += ["=" * 50, f"{STATUS_ICONS[report.verdict]} verdict: {report.verdict}"]
        return "\n".join(lines)

    def format_json(self, report: Report) -> str:
        payload = report.to_dict()
        validate_report(payload)
        return json.dumps(payload, indent=2, ensure_ascii=False)

    def format_latex(self, report: Report) -> str:
        lines = [r"\begin{tabular}{lll}", r"\hline",
                 r"kind & subject & result \\", r"\hline"]
        for r in report.results:
            if r.latex is not None:
                result = f"${r.latex}$"
            elif r.value is not None:
                result = _latex_escape(str(r.value))
            else:
                result = r.status
            lines.append(f"{_latex_escape(r.kind)} & {_latex_escape(r.subject)} & {result} \\\\")
        lines += [r"\hline", f"\\multicolumn{{3}}{{l}}{{verdict: {report.verdict}}} \\\\",
                  r"\end{tabular}"]
        return "\n".join(lines)


def main():
    """Render a sample report in every format"""
    report = Report("el", ["fixtures/mechanics.jet"])
    report.add("form", "EL", value="-q1_tt·δq1∧dt")
    report.add("identity", "δL = EL - dγ", True)
    for style in FORMATS:
        print(ReportFormatter(style).format(report))
        print()


if __name__ == "__main__":
    main()
