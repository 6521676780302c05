"""
Theory Description Language
Regex lexer, recursive-descent parser and canonical printer for documents
declaring theories, Lie algebras, actions, momentum maps, concrete fields
and checks.
"""

import re
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import sympy
from sympy.printing.precedence import precedence
from sympy.printing.str import StrPrinter

from bicomplex import BigradedForm, Generator, JetVectorField, wedge
from jetcore import (FIELD, ExpressionError, FieldGroup, FieldSample, JetReduceError, JetSpace)
from lft import TheoryDef
from linfty import ActionSpec, LieAlgebraSpec, MomentumMapSpec, SlotParameters, sort_with_sign

DEFAULT_JET_ORDER = 4

TOKEN_SPECS = [
    ("comment", r"#[^\n]*"),
    ("newline", r"\n"),
    ("space", r"[ \t\r]+"),
    ("int", r"\d+"),
    ("name", r"[A-Za-z][A-Za-z0-9_]*"),
    ("op", r"\^\^|->|[-+*/^=]"),
    ("punct", r"[(){}\[\],;:]"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{kind}>{pattern})" for kind, pattern in TOKEN_SPECS))

DECLARATIONS = ("theory", "algebra", "action", "momap", "field", "check")

# argument kinds per check; "?" optional, "*" any number
CHECKS = {
    "el": ("theory",),
    "symmetry": ("theory", "action"),
    "verify_momap": ("momap",),
    "obstruction": ("action", "momap?"),
    "zero_locus": ("momap", "field*"),
    "invariance": ("momap", "field"),
}

TRANSCENDENTAL = {"sin": sympy.sin, "cos": sympy.cos, "exp": sympy.exp}


# --- diagnostics ----------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


@dataclass(frozen=True)
class Diagnostic:
    line: int
    column: int
    message: str
    expected: Tuple[str, ...] = ()
    length: int = 1

    @classmethod
    def at(cls, token: Token, message: str, expected: Sequence[str] = ()) -> "Diagnostic":
        return cls(token.line, token.column, message, tuple(expected), max(len(token.text), 1))

    def __str__(self):
        text = f"{self.line}:{self.column}: {self.message}"
        if self.expected:
            text += f" (expected {', '.join(self.expected)})"
        return text


class DslError(JetReduceError):
    """Lexical, syntax, resolution or arity/degree error with source positions"""

    def __init__(self, diagnostics: List[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


def describe(token: Token) -> str:
    return "end of input" if token.kind == "eof" else repr(token.text)


def tokenize(text: str) -> List[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise DslError([Diagnostic(line, pos - line_start + 1,
                                       f"unexpected character {text[pos]!r}")])
        kind, value = m.lastgroup, m.group()
        if kind == "newline":
            line, line_start = line + 1, m.end()
        elif kind not in ("space", "comment"):
            tokens.append(Token(kind if kind in ("int", "name") else value, value,
                                line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# --- document model ---------------------------------------------------------------

@dataclass
class TheoryDecl:
    theory: TheoryDef

    @property
    def name(self) -> str:
        return self.theory.name


@dataclass
class AlgebraDecl:
    algebra: LieAlgebraSpec

    @property
    def name(self) -> str:
        return self.algebra.name


@dataclass
class ActionDecl:
    action: ActionSpec
    theory: str

    @property
    def name(self) -> str:
        return self.action.name


@dataclass
class MomapDecl:
    momap: MomentumMapSpec

    @property
    def name(self) -> str:
        return self.momap.name


@dataclass
class FieldDecl:
    """A concrete field, closed-form or sampled from closed forms on a grid"""
    name: str
    theory: str
    components: Dict[str, sympy.Expr]
    box: Optional[Tuple[Tuple[sympy.Rational, sympy.Rational], ...]] = None
    points: Optional[int] = None

    def sample(self, space: JetSpace) -> FieldSample:
        phi = FieldSample.closed(self.name, self.components)
        if self.box is None:
            return phi
        return phi.sample(space, [(float(lo), float(hi)) for lo, hi in self.box], self.points)


@dataclass
class CheckDecl:
    check: str
    args: Tuple[str, ...]

    @property
    def name(self) -> str:
        return f"{self.check}({', '.join(self.args)})"


Declaration = Union[TheoryDecl, AlgebraDecl, ActionDecl, MomapDecl, FieldDecl, CheckDecl]


@dataclass
class Document:
    declarations: List[Declaration] = field(default_factory=list)

    def _named(self, cls) -> Dict[str, Declaration]:
        return {d.name: d for d in self.declarations if isinstance(d, cls)}

    @property
    def theories(self) -> Dict[str, TheoryDef]:
        return {k: d.theory for k, d in self._named(TheoryDecl).items()}

    @property
    def algebras(self) -> Dict[str, LieAlgebraSpec]:
        return {k: d.algebra for k, d in self._named(AlgebraDecl).items()}

    @property
    def actions(self) -> Dict[str, ActionSpec]:
        return {k: d.action for k, d in self._named(ActionDecl).items()}

    @property
    def momaps(self) -> Dict[str, MomentumMapSpec]:
        return {k: d.momap for k, d in self._named(MomapDecl).items()}

    @property
    def fields(self) -> Dict[str, FieldDecl]:
        return self._named(FieldDecl)

    @property
    def checks(self) -> List[CheckDecl]:
        return [d for d in self.declarations if isinstance(d, CheckDecl)]

    def theory_of(self, name: str) -> TheoryDef:
        """Theory an action, momentum map or field lives on"""
        momaps = self.momaps
        if name in momaps:
            name = momaps[name].action.name
        actions = self._named(ActionDecl)
        if name in actions:
            return self.theories[actions[name].theory]
        fields = self.fields
        if name in fields:
            return self.theories[fields[name].theory]
        return self.theories[name]

    def counts(self) -> Dict[str, int]:
        return {"theory": len(self.theories), "algebra": len(self.algebras),
                "action": len(self.actions), "momap": len(self.momaps),
                "field": len(self.fields), "check": len(self.checks)}


# --- parser ------------------------------------------------------------------------

@dataclass
class ExprContext:
    """Names an expression may use and whether form generators are allowed"""
    names: Dict[str, sympy.Expr]
    space: Optional[JetSpace] = None
    forms: bool = False
    transcendental: bool = False


def _is_form(value) -> bool:
    return isinstance(value, BigradedForm)


def _as_form(value) -> BigradedForm:
    return value if _is_form(value) else BigradedForm.scalar(value)


def _binary(op: str, a, b):
    if op == "/":
        if _is_form(b):
            raise ExpressionError("division by a form")
        if b == 0:
            raise ZeroDivisionError("division by zero")
        return a * (sympy.Integer(1) / b) if _is_form(a) else sympy.sympify(a) / b
    if _is_form(a) or _is_form(b):
        a, b = _as_form(a), _as_form(b)
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        return wedge(a, b)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    return a * b


def _match_signature(signature: Sequence[str], n: int) -> Optional[List[str]]:
    kinds: List[str] = []
    for kind in signature:
        base = kind.rstrip("?*")
        if kind.endswith("*"):
            kinds += [base] * max(n - len(kinds), 0)
        elif kind.endswith("?"):
            if len(kinds) < n:
                kinds.append(base)
        else:
            kinds.append(base)
    return kinds if len(kinds) == n else None


class Parser:
    """Recursive descent over the token list; declarations resolve in order"""

    def __init__(self, text: str, jet_order: Optional[int] = None):
        self.tokens = tokenize(text)
        self.pos = 0
        self.jet_order = jet_order
        self.doc = Document()
        self.kinds: Dict[str, str] = {}
        self.objects: Dict[str, object] = {}
        self.action_theory: Dict[str, str] = {}

    # token helpers

    @property
    def token(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.token
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def fail(self, message: str, token: Optional[Token] = None, expected: Sequence[str] = ()):
        raise DslError([Diagnostic.at(token or self.token, message, expected)])

    def expect(self, kind: str) -> Token:
        if self.token.kind != kind:
            self.fail(f"unexpected {describe(self.token)}", expected=(kind,))
        return self.advance()

    def at_keyword(self, word: str) -> bool:
        return self.token.kind == "name" and self.token.text == word

    def keyword(self, word: str) -> Token:
        if not self.at_keyword(word):
            self.fail(f"unexpected {describe(self.token)}", expected=(word,))
        return self.advance()

    @contextmanager
    def building(self, token: Token):
        """Report construction failures of domain objects at ``token``"""
        try:
            yield
        except DslError:
            raise
        except (JetReduceError, ValueError, TypeError, ZeroDivisionError,
                KeyError, IndexError) as e:
            raise DslError([Diagnostic.at(token, str(e))]) from e

    # names

    def declare(self, token: Token, kind: str, obj):
        if token.text in self.kinds:
            self.fail(f"duplicate name {token.text!r}", token)
        self.kinds[token.text] = kind
        self.objects[token.text] = obj

    def lookup(self, token: Token, kind: str):
        if self.kinds.get(token.text) != kind:
            known = tuple(n for n, k in self.kinds.items() if k == kind)
            self.fail(f"unknown {kind} {token.text!r}", token, expected=known)
        return self.objects[token.text]

    def name_list(self) -> List[Token]:
        self.expect("[")
        names = []
        if self.token.kind != "]":
            names.append(self.expect("name"))
            while self.token.kind == ",":
                self.advance()
                names.append(self.expect("name"))
        self.expect("]")
        return names

    def rational(self) -> sympy.Rational:
        sign = 1
        if self.token.kind == "-":
            self.advance()
            sign = -1
        num = int(self.expect("int").text)
        if self.token.kind != "/":
            return sympy.Integer(sign * num)
        slash = self.advance()
        den = int(self.expect("int").text)
        if den == 0:
            self.fail("division by zero", slash)
        return sympy.Rational(sign * num, den)

    def rational_rows(self) -> List[List[sympy.Rational]]:
        self.expect("[")
        rows = []
        while True:
            self.expect("[")
            row = [self.rational()]
            while self.token.kind == ",":
                self.advance()
                row.append(self.rational())
            self.expect("]")
            rows.append(row)
            if self.token.kind != ",":
                break
            self.advance()
        self.expect("]")
        return rows

    # expressions

    def expression(self, ctx: ExprContext):
        value = self.term(ctx)
        while self.token.kind in ("+", "-"):
            op = self.advance()
            rhs = self.term(ctx)
            with self.building(op):
                value = _binary(op.kind, value, rhs)
        return value

    def term(self, ctx: ExprContext):
        value = self.unary(ctx)
        while self.token.kind in ("*", "/", "^^"):
            op = self.advance()
            if op.kind == "^^" and not ctx.forms:
                self.fail("wedge outside a form expression", op)
            rhs = self.unary(ctx)
            with self.building(op):
                value = _binary(op.kind, value, rhs)
        return value

    def unary(self, ctx: ExprContext):
        if self.token.kind == "-":
            self.advance()
            return -self.unary(ctx)
        return self.power(ctx)

    def power(self, ctx: ExprContext):
        base = self.atom(ctx)
        if self.token.kind != "^":
            return base
        caret = self.advance()
        sign = 1
        if self.token.kind == "-":
            self.advance()
            sign = -1
        if self.token.kind != "int":
            self.fail("malformed power", caret, expected=("integer exponent",))
        exponent = sign * int(self.advance().text)
        if _is_form(base):
            self.fail("powers of forms are not defined", caret)
        if exponent < 0 and base == 0:
            self.fail("division by zero", caret)
        with self.building(caret):
            return base ** exponent

    def atom(self, ctx: ExprContext):
        tok = self.token
        if tok.kind == "int":
            self.advance()
            return sympy.Integer(int(tok.text))
        if tok.kind == "(":
            self.advance()
            value = self.expression(ctx)
            self.expect(")")
            return value
        if tok.kind == "name":
            self.advance()
            if self.token.kind == "(":
                return self.call(tok, ctx)
            if tok.text not in ctx.names:
                self.fail(f"undeclared name {tok.text!r}", tok)
            return ctx.names[tok.text]
        self.fail(f"unexpected {describe(tok)}", tok, expected=("number", "name", "("))

    def call(self, name: Token, ctx: ExprContext):
        if ctx.forms and name.text in ("d", "v"):
            self.expect("(")
            arg = self.expect("name")
            self.expect(")")
            return self.generator(name.text, arg, ctx.space)
        self.expect("(")
        args = [self.expression(ctx)]
        while self.token.kind == ",":
            self.advance()
            args.append(self.expression(ctx))
        self.expect(")")
        if any(_is_form(a) for a in args):
            self.fail("function arguments must be scalars", name)
        if ctx.transcendental and name.text in TRANSCENDENTAL:
            if len(args) != 1:
                self.fail(f"{name.text} takes one argument", name)
            return TRANSCENDENTAL[name.text](args[0])
        if ctx.space is None:
            self.fail(f"undeclared function {name.text!r}", name)
        with self.building(name):
            return ctx.space.function(name.text)(*args)

    def generator(self, kind: str, arg: Token, space: JetSpace) -> BigradedForm:
        if kind == "d":
            if arg.text not in space.base_names:
                self.fail(f"{arg.text!r} is not a base coordinate", arg, expected=space.base_names)
            return BigradedForm.generator(Generator.dx(space.base_names.index(arg.text)))
        sym = space.names.get(arg.text)
        var = space.jet_var(sym) if sym is not None else None
        if var is None or var.kind != FIELD:
            self.fail(f"{arg.text!r} is not a field jet coordinate", arg)
        return BigradedForm.generator(Generator.contact(var.index, var.multi))

    def scalar(self, ctx: ExprContext) -> sympy.Expr:
        return sympy.sympify(self.expression(ctx))

    def form(self, ctx: ExprContext) -> BigradedForm:
        return _as_form(self.expression(ctx))

    # declarations

    def parse_document(self) -> Document:
        handlers = {"theory": self.parse_theory, "algebra": self.parse_algebra,
                    "action": self.parse_action, "momap": self.parse_momap,
                    "field": self.parse_field, "check": self.parse_check}
        while self.token.kind != "eof":
            tok = self.token
            handler = handlers.get(tok.text) if tok.kind == "name" else None
            if handler is None:
                self.fail(f"unexpected {describe(tok)}", tok, expected=DECLARATIONS)
            self.doc.declarations.append(handler())
        return self.doc

    def group_list(self) -> List[FieldGroup]:
        groups = []
        while True:
            name = self.expect("name")
            if self.token.kind != "[":
                self.fail(f"unexpected {describe(self.token)}", expected=("[",))
            if self.tokens[self.pos + 1].kind == "int":
                self.advance()
                size = self.advance()
                self.expect("]")
                if int(size.text) < 1:
                    self.fail("a field group needs at least one component", size)
                groups.append(FieldGroup.vector(name.text, int(size.text)))
            else:
                groups.append(FieldGroup(name.text, tuple(t.text for t in self.name_list())))
            if self.token.kind != ",":
                break
            self.advance()
        self.expect(";")
        return groups

    def parse_theory(self) -> TheoryDecl:
        self.keyword("theory")
        name = self.expect("name")
        self.expect("{")
        self.keyword("base")
        dims = self.expect("int")
        self.keyword("coords")
        coords = [t.text for t in self.name_list()]
        if int(dims.text) != len(coords):
            self.fail(f"base dimension {dims.text} but {len(coords)} coordinates", dims)
        self.expect(";")
        self.keyword("fields")
        fields = self.group_list()
        params = []
        if self.at_keyword("params"):
            self.advance()
            params = self.group_list()
        functions = {}
        if self.at_keyword("functions"):
            self.advance()
            while True:
                fname = self.expect("name")
                self.expect("(")
                functions[fname.text] = int(self.expect("int").text)
                self.expect(")")
                if self.token.kind != ",":
                    break
                self.advance()
            self.expect(";")
        order = DEFAULT_JET_ORDER
        if self.at_keyword("order"):
            self.advance()
            order = int(self.expect("int").text)
            self.expect(";")
        if self.jet_order is not None:
            order = self.jet_order
        with self.building(name):
            space = JetSpace(coords, fields, params, order=order, functions=functions)
        ctx = ExprContext(dict(space.names), space)
        self.keyword("lagrangian")
        self.expect("=")
        density = self.scalar(ctx)
        self.expect(";")
        boundary = omega = None
        form_ctx = ExprContext(dict(space.names), space, forms=True)
        if self.at_keyword("gamma"):
            self.advance()
            self.expect("=")
            boundary = self.form(form_ctx)
            self.expect(";")
        if self.at_keyword("omega"):
            self.advance()
            self.expect("=")
            omega = self.form(form_ctx)
            self.expect(";")
        self.expect("}")
        with self.building(name):
            theory = TheoryDef(name.text, space, density, boundary, omega)
        self.declare(name, "theory", theory)
        return TheoryDecl(theory)

    def parse_algebra(self) -> AlgebraDecl:
        self.keyword("algebra")
        name = self.expect("name")
        self.expect("{")
        self.keyword("basis")
        basis = [t.text for t in self.name_list()]
        self.expect(";")
        symbols = {b: sympy.Symbol(b) for b in basis}
        brackets: Dict[Tuple[str, str], Dict[str, sympy.Rational]] = {}
        if self.at_keyword("brackets"):
            self.advance()
            self.expect("{")
            while self.token.kind == "[":
                opening = self.advance()
                a = self.basis_name(basis)
                self.expect(",")
                b = self.basis_name(basis)
                self.expect("]")
                if (a, b) in brackets or (b, a) in brackets:
                    self.fail(f"bracket [{a}, {b}] given twice", opening)
                self.expect("=")
                start = self.token
                value = self.scalar(ExprContext(symbols))
                self.expect(";")
                brackets[(a, b)] = self.linear_combination(value, symbols, start)
            self.expect("}")
        kappa = None
        if self.at_keyword("kappa"):
            self.advance()
            kappa = self.rational_rows()
            self.expect(";")
        local = False
        if self.at_keyword("local"):
            self.advance()
            self.expect(";")
            local = True
        self.expect("}")
        with self.building(name):
            algebra = LieAlgebraSpec.from_brackets(name.text, basis, brackets, local, kappa)
        self.declare(name, "algebra", algebra)
        return AlgebraDecl(algebra)

    def basis_name(self, basis: Sequence[str]) -> str:
        tok = self.expect("name")
        if tok.text not in basis:
            self.fail(f"{tok.text!r} is not a basis element", tok, expected=basis)
        return tok.text

    def linear_combination(self, value: sympy.Expr, symbols: Dict[str, sympy.Symbol],
                           start: Token) -> Dict[str, sympy.Rational]:
        value = sympy.expand(value)
        coefficients = {b: value.coeff(s) for b, s in symbols.items()}
        rest = sympy.expand(value - sum(c * symbols[b] for b, c in coefficients.items()))
        if rest != 0 or not all(c.is_Rational for c in coefficients.values()):
            self.fail("bracket values must be rational combinations of basis elements", start)
        return {b: c for b, c in coefficients.items() if c != 0}

    def parse_action(self) -> ActionDecl:
        self.keyword("action")
        name = self.expect("name")
        self.keyword("of")
        algebra_tok = self.expect("name")
        algebra: LieAlgebraSpec = self.lookup(algebra_tok, "algebra")
        self.keyword("on")
        theory_tok = self.expect("name")
        theory: TheoryDef = self.lookup(theory_tok, "theory")
        self.expect("{")
        space = theory.space
        slots = None
        keys: Sequence[str] = algebra.basis
        if algebra.local:
            with self.building(algebra_tok):
                slots = SlotParameters(space, algebra)
            if slots.count == 0:
                self.fail(f"local algebra {algebra.name} needs parameter groups on {theory.name}",
                          algebra_tok)
            keys = (slots.groups[0].name,)
        ctx = ExprContext(dict(space.names), space)
        fields: Dict[str, JetVectorField] = {}
        while self.token.kind == "name":
            key = self.advance()
            if key.text not in keys:
                self.fail(f"{key.text!r} is not a generator of {algebra.name}", key, expected=keys)
            if key.text in fields:
                self.fail(f"{key.text} assigned twice", key)
            self.expect("->")
            vertical, horizontal = self.vector_field(space, ctx)
            self.expect(";")
            with self.building(key):
                fields[key.text] = JetVectorField.build(space, vertical, horizontal, label=key.text)
        self.expect("}")
        with self.building(name):
            action = ActionSpec(name.text, algebra, fields, slots)
        self.declare(name, "action", action)
        self.action_theory[name.text] = theory.name
        return ActionDecl(action, theory.name)

    def vector_field(self, space: JetSpace, ctx: ExprContext):
        self.expect("(")
        vertical: Dict[str, sympy.Expr] = {}
        horizontal: Dict[str, sympy.Expr] = {}
        if self.token.kind != ")":
            while True:
                comp = self.expect("name")
                if comp.text in space.field_names:
                    target = vertical
                elif comp.text in space.base_names:
                    target = horizontal
                else:
                    self.fail(f"{comp.text!r} is neither a field component nor a base coordinate",
                              comp, expected=space.field_names + space.base_names)
                if comp.text in target:
                    self.fail(f"{comp.text} assigned twice", comp)
                self.expect(":")
                target[comp.text] = self.scalar(ctx)
                if self.token.kind != ",":
                    break
                self.advance()
        self.expect(")")
        return vertical, horizontal

    def parse_momap(self) -> MomapDecl:
        self.keyword("momap")
        name = self.expect("name")
        self.keyword("for")
        action_tok = self.expect("name")
        action: ActionSpec = self.lookup(action_tok, "action")
        theory: TheoryDef = self.objects[self.action_theory[action.name]]
        self.expect("{")
        space = theory.space
        n = theory.omega.degree - 1 if theory.omega is not None else space.dim
        ctx = ExprContext(dict(space.names), space, forms=True)
        components: Dict[int, Dict[Tuple[int, ...], BigradedForm]] = {}
        while self.at_keyword("mu"):
            mu = self.advance()
            arity_tok = self.expect("int")
            k = int(arity_tok.text)
            if not 1 <= k <= n:
                self.fail(f"arity {k} outside 1..{n}", arity_tok)
            self.expect(":")
            pattern = [self.expect("name")]
            while self.token.kind == "^":
                self.advance()
                pattern.append(self.expect("name"))
            if len(pattern) != k:
                self.fail(f"mu {k} needs a wedge of {k} elements, got {len(pattern)}", arity_tok)
            key, sign = self.wedge_key(action, pattern)
            self.expect("->")
            value = self.form(ctx)
            self.expect(";")
            with self.building(mu):
                degree = value.degree
            if degree is not None and degree != n - k:
                self.fail(f"mu {k} must take values of degree {n - k}, got {degree}", mu)
            if key in components.get(k, {}):
                self.fail(f"mu {k} on {' ^ '.join(t.text for t in pattern)} given twice", mu)
            components.setdefault(k, {})[key] = value * sign
        self.expect("}")
        with self.building(name):
            momap = MomentumMapSpec(name.text, action, components)
        self.declare(name, "momap", momap)
        return MomapDecl(momap)

    def wedge_key(self, action: ActionSpec, pattern: List[Token]) -> Tuple[Tuple[int, ...], int]:
        algebra = action.algebra
        if algebra.local:
            expected = [g.name for g in action.slots.groups[:len(pattern)]]
            if [t.text for t in pattern] != expected or len(expected) < len(pattern):
                self.fail("local components are keyed by the leading parameter slots", pattern[0],
                          expected=(" ^ ".join(expected),))
            return tuple(range(len(pattern))), 1
        indices = []
        for tok in pattern:
            if tok.text not in algebra.basis:
                self.fail(f"{tok.text!r} is not a basis element of {algebra.name}", tok,
                          expected=algebra.basis)
            indices.append(algebra.index(tok.text))
        sign, key = sort_with_sign(indices)
        if not sign:
            self.fail("repeated basis element in wedge", pattern[0])
        return key, sign

    def parse_field(self) -> FieldDecl:
        self.keyword("field")
        name = self.expect("name")
        self.keyword("on")
        theory_tok = self.expect("name")
        theory: TheoryDef = self.lookup(theory_tok, "theory")
        space = theory.space
        self.expect("{")
        box = points = None
        if self.at_keyword("grid"):
            grid = self.advance()
            rows = self.rational_rows()
            if len(rows) != space.dim or any(len(r) != 2 or r[0] >= r[1] for r in rows):
                self.fail(f"grid box needs {space.dim} increasing intervals", grid)
            box = tuple((lo, hi) for lo, hi in rows)
            self.keyword("points")
            points_tok = self.expect("int")
            points = int(points_tok.text)
            if points < space.order + 3:
                self.fail(f"at least {space.order + 3} points needed for jet order {space.order}",
                          points_tok)
            self.expect(";")
        ctx = ExprContext(dict(zip(space.base_names, space.base_symbols)), transcendental=True)
        given: Dict[str, sympy.Expr] = {}
        while self.token.kind == "name":
            comp = self.advance()
            if comp.text not in space.field_names:
                self.fail(f"{comp.text!r} is not a field component of {theory.name}", comp,
                          expected=space.field_names)
            if comp.text in given:
                self.fail(f"{comp.text} assigned twice", comp)
            self.expect("=")
            given[comp.text] = self.scalar(ctx)
            self.expect(";")
        self.expect("}")
        missing = [c for c in space.field_names if c not in given]
        if missing:
            self.fail(f"field {name.text} leaves {', '.join(missing)} undefined", name)
        decl = FieldDecl(name.text, theory.name, {c: given[c] for c in space.field_names}, box, points)
        self.declare(name, "field", decl)
        return decl

    def parse_check(self) -> CheckDecl:
        self.keyword("check")
        check = self.expect("name")
        if check.text not in CHECKS:
            self.fail(f"unknown check {check.text!r}", check, expected=tuple(CHECKS))
        self.expect("(")
        args = []
        if self.token.kind != ")":
            args.append(self.expect("name"))
            while self.token.kind == ",":
                self.advance()
                args.append(self.expect("name"))
        self.expect(")")
        self.expect(";")
        kinds = _match_signature(CHECKS[check.text], len(args))
        if kinds is None:
            self.fail(f"{check.text} takes ({', '.join(CHECKS[check.text])})", check)
        for tok, kind in zip(args, kinds):
            self.lookup(tok, kind)
        if check.text == "symmetry" and self.action_theory[args[1].text] != args[0].text:
            self.fail(f"action {args[1].text} does not act on {args[0].text}", args[1])
        return CheckDecl(check.text, tuple(t.text for t in args))


def parse(text: str, jet_order: Optional[int] = None) -> Document:
    """Document for ``text``; raises DslError with positioned diagnostics"""
    parser = Parser(text, jet_order)
    try:
        return parser.parse_document()
    except RecursionError:
        raise DslError([Diagnostic.at(parser.token, "expression nested too deeply")]) from None


def parse_file(path, jet_order: Optional[int] = None) -> Document:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise DslError([Diagnostic(1, 1, f"{path} is not UTF-8 text: {e.reason}")]) from e
    return parse(text, jet_order)


# --- printer -------------------------------------------------------------------------

class DslPrinter(StrPrinter):
    """sympy's str printer with ^ for integer powers"""

    def _print_Pow(self, expr, rational=False):
        base, exponent = expr.as_base_exp()
        if exponent.is_Integer and exponent < 0:
            return "1/(%s)" % self._print(base ** -exponent)
        return "%s^%s" % (self.parenthesize(base, precedence(expr), strict=True),
                          self._print(exponent))


_PRINTER = DslPrinter()


def format_expr(expr) -> str:
    return _PRINTER.doprint(sympy.sympify(expr))


def _generator_text(space: JetSpace, g: Generator) -> str:
    if g.is_vertical:
        return f"v({space.jet_name(space.field_names[g.index], g.multi)})"
    return f"d({space.base_names[g.index]})"


def format_form(space: JetSpace, f: BigradedForm) -> str:
    if f.is_zero:
        return "0"
    parts = []
    for gens, coeff in f.terms.items():
        if not gens:
            text = format_expr(coeff)
            parts.append(f"({text})" if coeff.is_Add else text)
            continue
        wedge_text = " ^^ ".join(_generator_text(space, g) for g in gens)
        if coeff == 1:
            parts.append(wedge_text)
        elif coeff == -1:
            parts.append(f"-{wedge_text}")
        else:
            parts.append(f"({format_expr(coeff)}) * {wedge_text}")
    text = parts[0]
    for p in parts[1:]:
        text += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
    return text


def _group_text(group: FieldGroup) -> str:
    size = len(group.components)
    if group.components == FieldGroup.vector(group.name, size).components:
        return f"{group.name}[{size}]"
    return f"{group.name}[{', '.join(group.components)}]"


def _rows_text(rows) -> str:
    return "[" + ", ".join("[" + ", ".join(str(x) for x in row) + "]" for row in rows) + "]"


def _print_theory(decl: TheoryDecl, doc: Document) -> List[str]:
    theory, space = decl.theory, decl.theory.space
    lines = [f"theory {theory.name} {{",
             f"    base {space.dim} coords [{', '.join(space.base_names)}];",
             f"    fields {', '.join(_group_text(g) for g in space.field_groups)};"]
    if space.param_groups:
        lines.append(f"    params {', '.join(_group_text(g) for g in space.param_groups)};")
    if space.function_arities:
        lines.append("    functions " + ", ".join(f"{k}({v})" for k, v in
                                                  space.function_arities.items()) + ";")
    lines.append(f"    order {space.order};")
    lines.append(f"    lagrangian = {format_expr(theory.density)};")
    if theory.gamma is not None:
        lines.append(f"    gamma = {format_form(space, theory.gamma)};")
    if theory.omega is not None:
        lines.append(f"    omega = {format_form(space, theory.omega)};")
    return lines + ["}"]


def _print_algebra(decl: AlgebraDecl, doc: Document) -> List[str]:
    algebra = decl.algebra
    lines = [f"algebra {algebra.name} {{", f"    basis [{', '.join(algebra.basis)}];"]
    if algebra.structure:
        lines.append("    brackets {")
        for (i, j), values in algebra.structure.items():
            if i < j:
                value = sum(c * sympy.Symbol(algebra.basis[k]) for k, c in values.items())
                lines.append(f"        [{algebra.basis[i]}, {algebra.basis[j]}] = {format_expr(value)};")
        lines.append("    }")
    if algebra.kappa is not None:
        lines.append(f"    kappa {_rows_text(algebra.kappa)};")
    if algebra.local:
        lines.append("    local;")
    return lines + ["}"]


def _vector_field_text(space: JetSpace, X: JetVectorField) -> str:
    parts = [f"{c}: {format_expr(q)}" for c, q in zip(space.field_names, X.characteristic) if q != 0]
    parts += [f"{c}: {format_expr(v)}" for c, v in zip(space.base_names, X.horizontal) if v != 0]
    return "(" + ", ".join(parts) + ")"


def _print_action(decl: ActionDecl, doc: Document) -> List[str]:
    action = decl.action
    space = doc.theories[decl.theory].space
    lines = [f"action {action.name} of {action.algebra.name} on {decl.theory} {{"]
    keys = list(action.fields) if action.algebra.local else action.algebra.basis
    for key in keys:
        lines.append(f"    {key} -> {_vector_field_text(space, action.fields[key])};")
    return lines + ["}"]


def _print_momap(decl: MomapDecl, doc: Document) -> List[str]:
    momap = decl.momap
    space = doc.theory_of(momap.action.name).space
    lines = [f"momap {momap.name} for {momap.action.name} {{"]
    for k in sorted(momap.components):
        for key, value in sorted(momap.components[k].items()):
            if momap.local:
                labels = [g.name for g in momap.action.slots.groups[:k]]
            else:
                labels = [momap.action.algebra.basis[a] for a in key]
            lines.append(f"    mu {k}: {' ^ '.join(labels)} -> {format_form(space, value)};")
    return lines + ["}"]


def _print_field(decl: FieldDecl, doc: Document) -> List[str]:
    lines = [f"field {decl.name} on {decl.theory} {{"]
    if decl.box is not None:
        lines.append(f"    grid {_rows_text(decl.box)} points {decl.points};")
    for comp, expr in decl.components.items():
        lines.append(f"    {comp} = {format_expr(expr)};")
    return lines + ["}"]


def _print_check(decl: CheckDecl, doc: Document) -> List[str]:
    return [f"check {decl.name};"]


_PRINTERS = {TheoryDecl: _print_theory, AlgebraDecl: _print_algebra, ActionDecl: _print_action,
             MomapDecl: _print_momap, FieldDecl: _print_field, CheckDecl: _print_check}


def print_document(doc: Document) -> str:
    """Canonical text; parse(print_document(doc)) == doc"""
    blocks = ["\n".join(_PRINTERS[type(d)](d, doc)) for d in doc.declarations]
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def main():
    """Parse a small document and print its canonical form"""
    text = """
    theory particle {
        base 1 coords [t];
        fields q[3];
        functions V(3);
        lagrangian = 1/2*(q1_t^2 + q2_t^2 + q3_t^2) - V(q1, q2, q3);
    }
    algebra R3 { basis [e1, e2, e3]; }
    action translation of R3 on particle {
        e1 -> (q1: 1); e2 -> (q2: 1); e3 -> (q3: 1);
    }
    """
    doc = parse(text)
    print("📊 DOCUMENT")
    print("=" * 50)
    for kind, count in doc.counts().items():
        print(f"{kind:>8}: {count}")
    print()
    print(print_document(doc))


if __name__ == "__main__":
    main()
