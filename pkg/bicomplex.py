"""
Variational Bicomplex
Bigraded forms on truncated jet space: wedge algebra, horizontal and
vertical differentials, jet vector fields, contraction and Lie derivative.

Generators dx^mu and du^a_I are odd. Wedges are kept in one canonical order
(vertical generators first by descending jet order, then field, then
multi-index; horizontal generators after them by base index) with the sign
of the reordering absorbed into the coefficient.
"""

import functools
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple, Union

import sympy

from jetcore import (FIELD, JetOrderOverflow, JetSpace, ExpressionError, MultiIndex,
                     DegreeError, FieldGroup, normalize, total_derivative,
                     total_derivative_multi)

PROLONGATION_CACHE_SIZE = 4096

HORIZONTAL = "h"
VERTICAL = "v"


@dataclass(frozen=True)
class Generator:
    """dx^mu (horizontal) or the contact form du^a_I (vertical)"""
    kind: str
    index: int
    multi: Optional[MultiIndex] = None

    @classmethod
    def dx(cls, mu: int) -> "Generator":
        return cls(HORIZONTAL, mu)

    @classmethod
    def contact(cls, a: int, multi: MultiIndex) -> "Generator":
        return cls(VERTICAL, a, multi)

    @property
    def is_vertical(self) -> bool:
        return self.kind == VERTICAL

    def sort_key(self) -> tuple:
        if self.is_vertical:
            return (0, -self.multi.order, self.index, tuple(-e for e in self.multi.exponents))
        return (1, 0, self.index, ())

    def shifted(self, mu: int) -> "Generator":
        return Generator(VERTICAL, self.index, self.multi.raised(mu))

    def label(self, space: JetSpace, style: str = "text") -> str:
        if self.is_vertical:
            name = space.jet_name(space.field_names[self.index], self.multi)
            return f"\\delta {_latex_name(name)}" if style == "latex" else f"δ{name}"
        name = space.base_names[self.index]
        return f"d{name}"


def _latex_name(name: str) -> str:
    root, sep, suffix = name.partition("_")
    return f"{root}_{{{suffix}}}" if sep else name


def canonical_order(gens: Tuple[Generator, ...]) -> Tuple[int, Tuple[Generator, ...]]:
    """Sign of the sorting permutation and the sorted tuple; sign 0 on a repeated generator"""
    if len(set(gens)) < len(gens):
        return 0, ()
    keys = [g.sort_key() for g in gens]
    inversions = sum(1 for i in range(len(keys)) for j in range(i + 1, len(keys))
                     if keys[i] > keys[j])
    return (-1) ** inversions, tuple(sorted(gens, key=Generator.sort_key))


class BigradedForm:
    """
    Sum of coefficient x wedge-of-generators terms.

    ``terms`` maps canonically ordered generator tuples to nonzero
    normalized sympy coefficients. Values are immutable once built.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[Tuple[Generator, ...], object]] = None):
        self.terms = _collect((tuple(k), v) for k, v in (terms or {}).items())

    @classmethod
    def _canonical(cls, terms: Dict[Tuple[Generator, ...], sympy.Expr]) -> "BigradedForm":
        form = cls.__new__(cls)
        form.terms = terms
        return form

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[Tuple[Generator, ...], object]]) -> "BigradedForm":
        return cls._canonical(_collect(pairs))

    @classmethod
    def zero(cls) -> "BigradedForm":
        return cls._canonical({})

    @classmethod
    def scalar(cls, expr) -> "BigradedForm":
        return cls({(): expr})

    @classmethod
    def generator(cls, gen: Generator) -> "BigradedForm":
        return cls({(gen,): 1})

    # --- algebra ----------------------------------------------------------

    def __add__(self, other):
        other = _as_form(other)
        return BigradedForm.from_pairs(list(self.terms.items()) + list(other.terms.items()))

    __radd__ = __add__

    def __neg__(self):
        return BigradedForm._canonical({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-_as_form(other))

    def __rsub__(self, other):
        return _as_form(other) - self

    def __mul__(self, other):
        if isinstance(other, BigradedForm):
            return wedge(self, other)
        return self.map_coefficients(lambda c: c * other)

    def __rmul__(self, other):
        if isinstance(other, BigradedForm):
            return wedge(other, self)
        return self.map_coefficients(lambda c: other * c)

    def __eq__(self, other):
        if isinstance(other, (int, sympy.Expr)):
            other = BigradedForm.scalar(other)
        if not isinstance(other, BigradedForm):
            return NotImplemented
        return (self - other).is_zero

    __hash__ = None

    def __bool__(self):
        return not self.is_zero

    def __repr__(self):
        return f"BigradedForm({len(self.terms)} terms, bidegrees={self.bidegrees()})"

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def map_coefficients(self, fn) -> "BigradedForm":
        return BigradedForm.from_pairs((k, fn(v)) for k, v in self.terms.items())

    def xreplace(self, mapping: Dict) -> "BigradedForm":
        return self.map_coefficients(lambda c: c.xreplace(mapping))

    # --- grading ----------------------------------------------------------

    @staticmethod
    def bidegree_of(gens: Tuple[Generator, ...]) -> Tuple[int, int]:
        p = sum(1 for g in gens if g.is_vertical)
        return p, len(gens) - p

    def bidegrees(self) -> List[Tuple[int, int]]:
        return sorted({self.bidegree_of(k) for k in self.terms})

    def component(self, p: int, q: int) -> "BigradedForm":
        return BigradedForm._canonical({k: v for k, v in self.terms.items()
                                        if self.bidegree_of(k) == (p, q)})

    def total_degrees(self) -> List[int]:
        return sorted({len(k) for k in self.terms})

    @property
    def degree(self) -> Optional[int]:
        """Total degree; None for the zero form"""
        degrees = self.total_degrees()
        if not degrees:
            return None
        if len(degrees) > 1:
            raise DegreeError(f"form mixes total degrees {degrees}")
        return degrees[0]

    def horizontal_part(self) -> "BigradedForm":
        """Terms without contact generators"""
        return BigradedForm._canonical({k: v for k, v in self.terms.items()
                                        if not any(g.is_vertical for g in k)})

    def coefficient(self, gens: Tuple[Generator, ...]) -> sympy.Expr:
        sign, key = canonical_order(tuple(gens))
        return sign * self.terms.get(key, sympy.Integer(0))

    @property
    def free_symbols(self) -> set:
        out = set()
        for v in self.terms.values():
            out |= v.free_symbols
        return out


def _collect(pairs) -> Dict[Tuple[Generator, ...], sympy.Expr]:
    acc = defaultdict(lambda: sympy.Integer(0))
    for gens, coeff in pairs:
        sign, key = canonical_order(gens)
        if sign:
            acc[key] += sign * sympy.sympify(coeff)
    out = {}
    for key in sorted(acc, key=lambda k: tuple(g.sort_key() for g in k)):
        value = sympy.expand(acc[key])
        if value != 0:
            out[key] = value
    return out


def _as_form(value) -> BigradedForm:
    if isinstance(value, BigradedForm):
        return value
    return BigradedForm.scalar(value)


def wedge(f: BigradedForm, g: BigradedForm) -> BigradedForm:
    f, g = _as_form(f), _as_form(g)
    return BigradedForm.from_pairs((kf + kg, cf * cg)
                                   for kf, cf in f.terms.items()
                                   for kg, cg in g.terms.items())


def wedge_all(forms: Iterable[BigradedForm]) -> BigradedForm:
    out = BigradedForm.scalar(1)
    for f in forms:
        out = wedge(out, f)
    return out


@dataclass(frozen=True)
class JetVectorField:
    """
    pr(Q) + v^mu D_mu: an evolutionary field with characteristic Q^a plus the
    Cartan lift of a base vector field with components v^mu(x).
    """
    characteristic: Tuple[sympy.Expr, ...]
    horizontal: Tuple[sympy.Expr, ...]
    label: str = field(default="", compare=False)

    @classmethod
    def build(cls, space: JetSpace, vertical: Optional[Dict[Union[int, str], object]] = None,
              horizontal: Optional[Dict[Union[int, str], object]] = None,
              label: str = "") -> "JetVectorField":
        Q = [sympy.Integer(0)] * len(space.field_names)
        for key, expr in (vertical or {}).items():
            a = space.field_index(key) if isinstance(key, str) else key
            Q[a] = normalize(expr, space)
        v = [sympy.Integer(0)] * space.dim
        for key, expr in (horizontal or {}).items():
            mu = space.base_names.index(key) if isinstance(key, str) else key
            value = normalize(expr, space)
            if not value.free_symbols <= set(space.base_symbols):
                raise ExpressionError(
                    f"horizontal component {space.base_names[mu]} of {label or 'field'} "
                    f"depends on jet variables")
            v[mu] = value
        return cls(tuple(Q), tuple(v), label)

    @classmethod
    def zero(cls, space: JetSpace, label: str = "0") -> "JetVectorField":
        return cls.build(space, label=label)

    @property
    def is_vertical(self) -> bool:
        return all(v == 0 for v in self.horizontal)

    @property
    def is_horizontal(self) -> bool:
        return all(q == 0 for q in self.characteristic)

    @property
    def is_zero(self) -> bool:
        return self.is_vertical and self.is_horizontal

    def vertical_part(self) -> "JetVectorField":
        return JetVectorField(self.characteristic,
                              tuple(sympy.Integer(0) for _ in self.horizontal), self.label)

    def horizontal_part(self) -> "JetVectorField":
        return JetVectorField(tuple(sympy.Integer(0) for _ in self.characteristic),
                              self.horizontal, self.label)

    def __add__(self, other: "JetVectorField") -> "JetVectorField":
        return JetVectorField(tuple(sympy.expand(a + b) for a, b in zip(self.characteristic, other.characteristic)),
                              tuple(sympy.expand(a + b) for a, b in zip(self.horizontal, other.horizontal)),
                              self.label)

    def scale(self, c) -> "JetVectorField":
        return JetVectorField(tuple(sympy.expand(c * q) for q in self.characteristic),
                              tuple(sympy.expand(c * v) for v in self.horizontal), self.label)

    def __neg__(self):
        return self.scale(-1)

    def xreplace(self, mapping: Dict) -> "JetVectorField":
        return JetVectorField(tuple(sympy.expand(q.xreplace(mapping)) for q in self.characteristic),
                              tuple(sympy.expand(v.xreplace(mapping)) for v in self.horizontal),
                              self.label)

    def decomposition(self) -> str:
        if self.is_zero:
            return "zero"
        if self.is_vertical:
            return "strictly vertical"
        if self.is_horizontal:
            return "strictly horizontal"
        return "vertical + horizontal"


@dataclass
class ProlongationReport:
    label: str
    decomposition: str
    vertical_ok: bool
    horizontal_ok: bool
    tested: int
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.vertical_ok and self.horizontal_ok


class Bicomplex:
    """
    Differentials and contractions over one jet space.

    Holds a bounded per-instance LRU cache of D_I Q^a, keyed by
    (field, component, multi-index).
    """

    def __init__(self, space: JetSpace, fault: Optional[str] = None,
                 cache_size: int = PROLONGATION_CACHE_SIZE):
        self.space = space
        self.fault = fault
        self.prolong = functools.lru_cache(maxsize=cache_size)(self._prolong)

    # --- building blocks ----------------------------------------------------

    def dx(self, mu: int) -> BigradedForm:
        return BigradedForm.generator(Generator.dx(mu))

    def delta(self, component: Union[int, str], multi: Optional[MultiIndex] = None) -> BigradedForm:
        a = self.space.field_index(component) if isinstance(component, str) else component
        return BigradedForm.generator(Generator.contact(a, multi or MultiIndex.zero(self.space.dim)))

    def volume(self) -> BigradedForm:
        return BigradedForm.from_pairs([(tuple(Generator.dx(mu) for mu in range(self.space.dim)), 1)])

    def interior_volume(self, mu: int) -> BigradedForm:
        """i_{d/dx^mu} vol = (-1)^mu dx^0 ^ ... (omit mu) ... ^ dx^{n-1}, zero-based mu"""
        gens = tuple(Generator.dx(nu) for nu in range(self.space.dim) if nu != mu)
        return BigradedForm.from_pairs([(gens, (-1) ** mu)])

    def top_coefficient(self, f: BigradedForm) -> sympy.Expr:
        """Coefficient of vol in f"""
        if self.space.dim == 0:
            return sympy.Integer(0)
        return f.coefficient(tuple(Generator.dx(mu) for mu in range(self.space.dim)))

    def function_form(self, expr) -> BigradedForm:
        return BigradedForm.scalar(normalize(expr, self.space))

    # --- differentials -------------------------------------------------------

    def d_h(self, f: BigradedForm) -> BigradedForm:
        pairs = []
        n = self.space.dim
        for gens, c in f.terms.items():
            for mu in range(n):
                Dc = total_derivative(self.space, c, mu)
                if Dc != 0:
                    pairs.append(((Generator.dx(mu),) + gens, Dc))
            for j, g in enumerate(gens):
                if not g.is_vertical:
                    continue
                sign = 1 if self.fault == "leibniz-sign" else (-1) ** j
                for mu in range(n):
                    if g.multi.order + 1 > self.space.order:
                        raise JetOrderOverflow(
                            f"d_h of {g.label(self.space)} exceeds truncation order {self.space.order}")
                    new = gens[:j] + (g.shifted(mu), Generator.dx(mu)) + gens[j + 1:]
                    pairs.append((new, -sign * c))
        return BigradedForm.from_pairs(pairs)

    def d_v(self, f: BigradedForm) -> BigradedForm:
        pairs = []
        for gens, c in f.terms.items():
            for s in self.space.jets_of_kind(c, FIELD):
                var = self.space.jet_var(s)
                coeff = sympy.diff(c, s)
                if coeff != 0:
                    pairs.append(((Generator.contact(var.index, var.multi),) + gens, coeff))
        return BigradedForm.from_pairs(pairs)

    def d(self, f: BigradedForm) -> BigradedForm:
        """Total differential d_h + d_v"""
        return self.d_h(f) + self.d_v(f)

    # --- vector fields --------------------------------------------------------

    def _prolong(self, X: JetVectorField, a: int, multi: MultiIndex) -> sympy.Expr:
        return total_derivative_multi(self.space, X.characteristic[a], multi)

    def _contract_generator(self, X: JetVectorField, g: Generator) -> sympy.Expr:
        if g.is_vertical:
            return self.prolong(X, g.index, g.multi)
        return X.horizontal[g.index]

    def contract(self, X: JetVectorField, f: BigradedForm) -> BigradedForm:
        pairs = []
        for gens, c in f.terms.items():
            for j, g in enumerate(gens):
                value = self._contract_generator(X, g)
                if value != 0:
                    pairs.append((gens[:j] + gens[j + 1:], (-1) ** j * c * value))
        return BigradedForm.from_pairs(pairs)

    def contract_all(self, fields: Iterable[JetVectorField], f: BigradedForm) -> BigradedForm:
        """i_{X_k} ... i_{X_1} f for fields given in the order X_1, ..., X_k"""
        for X in fields:
            f = self.contract(X, f)
        return f

    def lie_derivative(self, X: JetVectorField, f: BigradedForm) -> BigradedForm:
        return self.contract(X, self.d(f)) + self.d(self.contract(X, f))

    def evaluate(self, X: JetVectorField, expr) -> sympy.Expr:
        """X acting on a function: pr(Q)(e) + v^mu D_mu e"""
        return self.contract(X, self.d(BigradedForm.scalar(expr))).coefficient(())

    def evolutionary_bracket(self, X: JetVectorField, Y: JetVectorField) -> JetVectorField:
        """[X, Y] for fields of the form pr(Q) + v^mu D_mu with base-only v; pr(Q) commutes with D_mu"""
        XV, YV = X.vertical_part(), Y.vertical_part()
        Q = tuple(sympy.expand(self.evaluate(XV, qy) - self.evaluate(YV, qx))
                  for qx, qy in zip(X.characteristic, Y.characteristic))
        v = []
        for mu in range(self.space.dim):
            term = sum((X.horizontal[nu] * sympy.diff(Y.horizontal[mu], self.space.base_symbol(nu))
                        - Y.horizontal[nu] * sympy.diff(X.horizontal[mu], self.space.base_symbol(nu))
                        for nu in range(self.space.dim)), sympy.Integer(0))
            v.append(sympy.expand(term))
        return JetVectorField(Q, tuple(v), f"[{X.label},{Y.label}]")

    def prolongation_check(self, X: JetVectorField) -> ProlongationReport:
        """
        Confirm [i_prQ, d_h] = 0 for the vertical part and [i_v, d_v] = 0 for
        the horizontal part on the generators and low-order jet functions.
        """
        space = self.space
        tests = [self.dx(mu) for mu in range(space.dim)]
        for a in range(len(space.field_names)):
            for m in space.multi:
                if m.order < space.order:
                    tests.append(self.delta(a, m))
                    tests.append(BigradedForm.scalar(space.field_symbol(a, m)))
        V, H = X.vertical_part(), X.horizontal_part()
        failures = []
        tested = 0
        for f in tests:
            try:
                vertical = self.contract(V, self.d_h(f)) + self.d_h(self.contract(V, f))
                horizontal = self.contract(H, self.d_v(f)) + self.d_v(self.contract(H, f))
            except JetOrderOverflow:
                continue
            tested += 1
            if not vertical.is_zero:
                failures.append(f"vertical part on {self.render(f)}: {self.render(vertical)}")
            if not horizontal.is_zero:
                failures.append(f"horizontal part on {self.render(f)}: {self.render(horizontal)}")
        return ProlongationReport(
            label=X.label,
            decomposition=X.decomposition(),
            vertical_ok=not any(x.startswith("vertical") for x in failures),
            horizontal_ok=not any(x.startswith("horizontal") for x in failures),
            tested=tested,
            failures=failures,
        )

    # --- rendering ------------------------------------------------------------

    def render(self, f: BigradedForm, style: str = "text") -> str:
        return render(self.space, f, style)


def render(space: JetSpace, f: BigradedForm, style: str = "text") -> str:
    """Deterministic plain-text or LaTeX rendering, terms in canonical generator order"""
    if f.is_zero:
        return "0"
    wedge_sym = " \\wedge " if style == "latex" else "∧"
    parts = []
    for gens, c in f.terms.items():
        coeff = sympy.latex(c) if style == "latex" else sympy.sstr(c)
        if isinstance(c, sympy.Add):
            coeff = f"\\left({coeff}\\right)" if style == "latex" else f"({coeff})"
        basis = wedge_sym.join(g.label(space, style) for g in gens)
        if not basis:
            parts.append(coeff)
        elif c == 1:
            parts.append(basis)
        elif c == -1:
            parts.append(f"-{basis}")
        else:
            joiner = " " if style == "latex" else "·"
            parts.append(f"{coeff}{joiner}{basis}")
    return " + ".join(parts)


def main():
    """Print the particle boundary and symplectic pieces"""
    space = JetSpace(["t"], [FieldGroup.vector("q", 3)], functions={"V": 3})
    bc = Bicomplex(space)
    t1 = MultiIndex((1,))
    gamma = sum((BigradedForm.scalar(space.field_symbol(a, t1)) * bc.delta(a) for a in range(3)),
                BigradedForm.zero())
    print("📊 BICOMPLEX DEMO")
    print("=" * 50)
    print(f"γ      = {bc.render(gamma)}")
    print(f"d_v γ  = {bc.render(bc.d_v(gamma))}")
    print(f"d_h γ  = {bc.render(bc.d_h(gamma))}")
    translation = JetVectorField.build(space, {"q1": 1}, label="∂/∂q1")
    print(f"ι d_vγ = {bc.render(bc.contract(translation, bc.d_v(gamma)))}")
    report = bc.prolongation_check(translation)
    print(f"{'✅' if report.passed else '❌'} {report.label}: {report.decomposition}")


if __name__ == "__main__":
    main()
