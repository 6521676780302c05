"""
JetReduce Orchestrator
Command-line driver that loads a theory document, runs the requested
computations and checks, and renders text, JSON or LaTeX reports.
"""

import argparse
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from bicomplex import BigradedForm, Bicomplex
from config_loader import load_config
from dsl import CheckDecl, DslError, Document, FieldDecl, parse_file
from jetcore import JetReduceError, PreconditionError, VerificationError, ZeroLocusError
from lft import (MultisymplecticData, TheoryDef, invariance_report, is_manifest,
                 is_noether_symmetry, noether_current, premultisymplectic)
from linfty import ActionSpec, MomentumMapSpec, verify_momap
from obstruction import check_obstruction
from reduction import (classification_table, exactness_oracle_n1, invariance_check,
                       zero_locus_check)
from report import FORMATS, Report, ReportFormatter
from selftest import FAULTS, fault_demo, run_suites

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3
COMMANDS = ("el", "symmetry", "verify_momap", "zero_locus", "selftest", "run")

FORM_LATEX = {"EL": r"\mathrm{EL}", "γ": r"\gamma", "ω": r"\omega"}


@dataclass
class RunConfig:
    """One command with its inputs and the merged file/env/flag settings"""
    command: str
    inputs: List[str] = field(default_factory=list)
    format: str = "text"
    tolerance: float = 1e-6
    step: float = 1e-3
    richardson_band: Tuple[float, float] = (3.2, 4.8)
    jet_order: Optional[int] = None
    seed: int = 0
    forms: int = 200
    characteristics: int = 20
    theory: Optional[str] = None
    action: Optional[str] = None
    momap: Optional[str] = None
    fields: Optional[List[str]] = None
    suites: Optional[List[str]] = None
    fault: Optional[str] = None
    quiet: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise PreconditionError(f"unknown command {self.command!r}")
        if self.format not in FORMATS:
            raise PreconditionError(f"unknown output format {self.format!r}")

    @classmethod
    def from_args(cls, args: argparse.Namespace, config: Dict) -> "RunConfig":
        numeric = config.get("numeric", {})
        selftest = config.get("selftest", {})

        def pick(flag, fallback):
            return fallback if flag is None else flag

        return cls(
            command=args.command,
            inputs=[args.file] if args.file else [],
            format=pick(args.format, config.get("output", {}).get("format", "text")),
            tolerance=pick(args.tol, numeric.get("tolerance", 1e-6)),
            step=pick(args.step, numeric.get("step", 1e-3)),
            richardson_band=tuple(numeric.get("richardson_band", (3.2, 4.8))),
            jet_order=pick(args.jet_order, config.get("jet_order")),
            seed=pick(args.seed, selftest.get("seed", 0)),
            forms=pick(args.forms, selftest.get("forms", 200)),
            characteristics=pick(args.characteristics, selftest.get("characteristics", 20)),
            theory=args.theory,
            action=args.action,
            momap=args.momap,
            fields=args.field,
            suites=args.suites,
            fault=args.fault,
            quiet=args.quiet,
        )


def _residual(bc: Bicomplex, form: BigradedForm) -> Optional[str]:
    return None if form.is_zero else bc.render(form)


def _select(named: Dict[str, object], wanted: Optional[str], kind: str) -> List:
    if wanted is None:
        return list(named.values())
    if wanted not in named:
        raise PreconditionError(f"unknown {kind} {wanted!r}; declared: {', '.join(named) or 'none'}")
    return [named[wanted]]


class JetReduceOrchestrator:
    def __init__(self, config: RunConfig, document: Optional[Document] = None):
        """Initialize the orchestrator with a run configuration"""
        self.config = config
        self.document = document
        self._data: Dict[str, MultisymplecticData] = {}
        self.stream = sys.stderr if config.format == "json" else sys.stdout

    def log(self, message: str):
        if not self.config.quiet:
            print(message, file=self.stream)

    def load(self) -> Document:
        if self.document is None:
            if not self.config.inputs:
                raise PreconditionError(f"{self.config.command} needs an input document")
            self.log(f"🔍 Loading {self.config.inputs[0]}")
            self.document = parse_file(self.config.inputs[0], self.config.jet_order)
            counts = ", ".join(f"{v} {k}" for k, v in self.document.counts().items() if v)
            self.log(f"✅ Parsed {counts or 'an empty document'}")
        return self.document

    def data_for(self, theory: TheoryDef) -> MultisymplecticData:
        if theory.name not in self._data:
            self._data[theory.name] = premultisymplectic(theory)
        return self._data[theory.name]

    # --- commands ---------------------------------------------------------------

    def execute(self) -> Report:
        c = self.config
        if c.command == "el":
            return self.cmd_el(c.theory)
        if c.command == "symmetry":
            return self.cmd_symmetry(c.theory, c.action)
        if c.command == "verify_momap":
            return self.cmd_verify_momap(c.momap)
        if c.command == "zero_locus":
            return self.cmd_zero_locus(c.momap, c.fields)
        if c.command == "selftest":
            return self.cmd_selftest(c.seed, c.suites)
        return self.cmd_run()

    def cmd_el(self, theory: Optional[str] = None) -> Report:
        """EL, gamma, omega and the identity delta L = EL - d gamma"""
        doc = self.load()
        report = Report("el", self.config.inputs)
        for t in _select(doc.theories, theory, "theory"):
            self._el(report, t)
        return report

    def cmd_symmetry(self, theory: Optional[str] = None, action: Optional[str] = None) -> Report:
        """Noether / manifest classification and currents of each action generator"""
        doc = self.load()
        report = Report("symmetry", self.config.inputs)
        for a in _select(doc.actions, action, "action"):
            t = doc.theory_of(a.name)
            if theory is not None and t.name != theory:
                if action is not None:
                    raise PreconditionError(f"action {a.name} does not act on {theory}")
                continue
            self._symmetry(report, t, a)
        return report

    def cmd_verify_momap(self, momap: Optional[str] = None) -> Report:
        """Every momentum-map relation, cross-checked against the obstruction complex"""
        doc = self.load()
        report = Report("verify_momap", self.config.inputs)
        for m in _select(doc.momaps, momap, "momap"):
            self._verify(report, m)
            if not m.local:
                self._obstruction(report, m.action, m)
        return report

    def cmd_zero_locus(self, momap: Optional[str] = None,
                       fields: Optional[Sequence[str]] = None) -> Report:
        """Classification of concrete fields against each momentum map's zero locus"""
        doc = self.load()
        report = Report("zero_locus", self.config.inputs)
        for m in _select(doc.momaps, momap, "momap"):
            theory = doc.theory_of(m.action.name)
            if fields is None:
                decls = [d for d in doc.fields.values() if d.theory == theory.name]
            else:
                decls = [d for name in fields for d in _select(doc.fields, name, "field")]
            self._zero_locus(report, m, decls)
        return report

    def cmd_selftest(self, seed: Optional[int] = None, suites: Optional[Sequence[str]] = None) -> Report:
        """Randomized bicomplex and cochain identities; optional injected fault"""
        seed = self.config.seed if seed is None else seed
        report = Report("selftest", [f"seed={seed}"])
        if suites is not None and not suites:
            return report
        self.log(f"🔍 Running invariant suites with seed {seed}")
        for r in run_suites(seed, self.config.forms, self.config.characteristics, suites,
                            self.config.fault):
            report.add("suite", r.name, r.passed, residual=r.example,
                       value=f"{r.trials} trials, {r.failures} failures, {r.seconds:.2f}s")
        if self.config.fault is not None:
            form, residual = fault_demo(self.config.fault)
            report.add("fault", f"{self.config.fault}: d_h²({form}) = 0", residual == "0",
                       residual=None if residual == "0" else residual)
        return report

    def cmd_run(self) -> Report:
        """Execute the document's check blocks in order"""
        doc = self.load()
        report = Report("run", self.config.inputs)
        for check in doc.checks:
            self.log(f"🔍 check {check.name}")
            self._run_check(report, doc, check)
        return report

    def _run_check(self, report: Report, doc: Document, check: CheckDecl):
        args = check.args
        if check.check == "el":
            self._el(report, doc.theories[args[0]])
        elif check.check == "symmetry":
            self._symmetry(report, doc.theories[args[0]], doc.actions[args[1]])
        elif check.check == "verify_momap":
            self._verify(report, doc.momaps[args[0]])
        elif check.check == "obstruction":
            momap = doc.momaps[args[1]] if len(args) > 1 else None
            self._obstruction(report, doc.actions[args[0]], momap)
        elif check.check == "zero_locus":
            self._zero_locus(report, doc.momaps[args[0]], [doc.fields[f] for f in args[1:]])
        elif check.check == "invariance":
            self._invariance(report, doc.momaps[args[0]], doc.fields[args[1]])

    # --- report builders ------------------------------------------------------------

    def _el(self, report: Report, theory: TheoryDef):
        bc = theory.bicomplex
        data = self.data_for(theory)
        for label, form in (("EL", data.el), ("γ", data.gamma), ("ω", data.omega)):
            report.add("form", f"{theory.name}: {label}", value=bc.render(form),
                       latex=f"{FORM_LATEX[label]} = {bc.render(form, 'latex')}")
        identity = bc.d_v(data.lagrangian) - data.el + bc.d_h(data.gamma)
        report.add("identity", f"{theory.name}: δL = EL - dγ", identity.is_zero,
                   residual=_residual(bc, identity))
        closure = bc.d(data.omega)
        report.add("identity", f"{theory.name}: dω = 0", closure.is_zero,
                   residual=_residual(bc, closure))

    def _generators(self, action: ActionSpec) -> Dict[str, object]:
        if action.algebra.local:
            return {action.slots.groups[0].name: action.field_for(0)}
        return dict(zip(action.algebra.basis, action.basis_fields()))

    def _symmetry(self, report: Report, theory: TheoryDef, action: ActionSpec):
        bc = theory.bicomplex
        data = self.data_for(theory)
        generators = self._generators(action)
        for entry in invariance_report(theory, generators, data):
            report.add("invariance", f"{action.name}({entry.label}): L_X ω = 0",
                       entry.preserves_omega, residual=_residual(bc, entry.omega))
        for label, chi in generators.items():
            subject = f"{action.name}({label})"
            manifest = is_manifest(theory, chi, data)
            verdict = "manifest" if manifest.manifest else "not manifest"
            report.add("manifest", subject, value=f"{verdict} ({manifest.decomposition})")
            if not chi.is_vertical:
                report.add("noether", subject, value="not strictly vertical")
                continue
            result = is_noether_symmetry(theory, chi)
            image = ", ".join(f"E_{k}: {v}" for k, v in result.euler_image.items())
            report.add("noether", subject, result.is_symmetry, residual=image or None,
                       value=f"α = {bc.render(result.alpha)}" if result.is_symmetry else None)
            if result.is_symmetry:
                current = noether_current(theory, chi, result.alpha, data)
                report.add("current", subject, value=f"j = {bc.render(current.current)}")
                candidate = current.momentum_candidate
                sign = "none" if candidate is None else ("+j" if candidate.sign > 0 else "-j")
                report.add("hamiltonian", subject, value=f"i_χω = -dμ holds for μ = {sign}")

    def _verify(self, report: Report, momap: MomentumMapSpec):
        theory = self.document.theory_of(momap.action.name)
        bc = theory.bicomplex
        result = verify_momap(bc, momap, self.data_for(theory).omega)
        for r in result.relations:
            report.add("relation", f"{momap.name}: i={r.i} {r.wedge}", r.passed,
                       residual=_residual(bc, r.residual))
        report.tables[f"relations of {momap.name}"] = result.table(bc)

    def _obstruction(self, report: Report, action: ActionSpec, momap: Optional[MomentumMapSpec]):
        theory = self.document.theory_of(action.name)
        if action.algebra.local:
            report.add("obstruction", action.name, value="skipped for local actions")
            return
        obstruction = check_obstruction(theory.bicomplex, action, self.data_for(theory).omega, momap)
        report.add("obstruction", f"{action.name}: d̄ω̄ = 0", obstruction.closed)
        if momap is not None:
            report.add("obstruction", f"{momap.name}: d̄μ̄ = ω̄", obstruction.primitive)
            report.add("obstruction", f"{momap.name}: agrees with relation check",
                       obstruction.consistent)

    def _zero_locus(self, report: Report, momap: MomentumMapSpec, decls: Sequence[FieldDecl]):
        theory = self.document.theory_of(momap.action.name)
        bc = theory.bicomplex
        if momap.local:
            report.add("zero locus", momap.name, value="skipped for local actions")
            return
        gamma = self.data_for(theory).gamma
        algebra = momap.action.algebra
        reports, oracle = [], {}
        for decl in decls:
            phi = decl.sample(theory.space)
            z = zero_locus_check(bc, phi, momap, gamma, self.config.tolerance)
            reports.append(z)
            failing = [name for name, ok in (("(i)", z.passes_i), ("(ii)", z.passes_ii)) if not ok]
            report.add("zero locus", f"{decl.name} / {momap.action.name}",
                       value="in Z" if z.passed else f"not in Z, condition {' '.join(failing)} fails")
            if bc.space.dim == 1 and algebra.is_abelian and phi.is_closed:
                exact = exactness_oracle_n1(bc, momap, phi)
                oracle[(decl.name, momap.action.name)] = exact
                report.add("oracle", f"{decl.name} / {momap.action.name}", exact == z.passed)
        report.tables[f"zero locus of {momap.action.name}"] = classification_table(
            reports, oracle if oracle else None)

    def _invariance(self, report: Report, momap: MomentumMapSpec, decl: FieldDecl):
        theory = self.document.theory_of(momap.action.name)
        c = self.config
        phi = decl.sample(theory.space)
        for k, label in enumerate(momap.action.algebra.basis):
            subject = f"{decl.name} along {label}"
            try:
                inv = invariance_check(theory.bicomplex, phi, k, momap, self.data_for(theory).gamma,
                                       c.step, c.tolerance, c.richardson_band)
            except ZeroLocusError as e:
                report.add("invariance", subject, False, value=str(e))
                return
            ratios = [e.ratio for e in inv.entries if e.ratio is not None]
            report.add("invariance", subject, inv.passed, residual=inv.max_residual,
                       value=f"Richardson ratios {', '.join(f'{r:.2f}' for r in ratios) or 'exact'}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jetreduce",
        description="Variational bicomplex, homotopy momentum maps and zero-locus checks")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("file", nargs="?", help="theory document (.jet)")
    parser.add_argument("--format", choices=FORMATS)
    parser.add_argument("--tol", type=float, help="numeric tolerance")
    parser.add_argument("--step", type=float, help="finite-difference step")
    parser.add_argument("--jet-order", type=int, help="override the jet truncation order")
    parser.add_argument("--seed", type=int, help="seed for the self-test suites")
    parser.add_argument("--forms", type=int, help="random forms per self-test suite")
    parser.add_argument("--characteristics", type=int, help="random characteristics per suite")
    parser.add_argument("--suites", nargs="*", help="self-test suites to run (none for a no-op)")
    parser.add_argument("--fault", choices=FAULTS, help="inject a bicomplex fault into the self-test")
    parser.add_argument("--theory", help="restrict to one theory")
    parser.add_argument("--action", help="restrict to one action")
    parser.add_argument("--momap", help="restrict to one momentum map")
    parser.add_argument("--field", action="append", help="field to classify (repeatable)")
    parser.add_argument("--config", help="configuration file")
    parser.add_argument("--quiet", action="store_true", help="suppress status lines")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig.from_args(args, load_config(args.config))
    except JetReduceError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
    orchestrator = JetReduceOrchestrator(config)
    try:
        report = orchestrator.execute()
        output = ReportFormatter(config.format).format(report)
    except DslError as e:
        for d in e.diagnostics:
            print(f"❌ {config.inputs[0]}:{d}", file=sys.stderr)
        return EXIT_USAGE
    except VerificationError as e:
        print(f"❌ internal verification failure: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except (JetReduceError, OSError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
    print(output)
    return EXIT_OK if report.passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
