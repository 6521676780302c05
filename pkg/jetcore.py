"""
Jet Space Kernel
Jet coordinates, expression normalization, partial and total derivatives,
and substitution of jets along concrete fields.

Every expression in the symbolic layer is a sympy expression in expanded
canonical form with exact rational coefficients. Structural equality of two
normalized expressions decides mathematical equality for the polynomial
class used throughout (jets, declared potentials, rationals).
"""

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy


class JetReduceError(Exception):
    """Base class for every error raised by the jetreduce modules"""


class ExpressionError(JetReduceError):
    """Expression outside the supported class (real exponents, undeclared names)"""


class JetOrderOverflow(JetReduceError):
    """A derivative left the configured jet truncation"""


class FieldSampleError(JetReduceError):
    """A field sample cannot supply what a substitution needs"""


class VerificationError(JetReduceError):
    """An identity that must hold by construction failed"""


class HomotopyError(JetReduceError):
    """The homotopy operator cannot be applied to the given density"""


class LieAlgebraError(JetReduceError):
    """Structure constants or an action are inconsistent"""


class DegreeError(JetReduceError):
    """Degree or arity bookkeeping was violated"""


class PreconditionError(JetReduceError):
    """An operation was called outside its domain"""


class ZeroLocusError(JetReduceError):
    """A field expected to lie in the homotopy zero locus does not"""


BASE = "base"
FIELD = "field"
PARAM = "param"


@dataclass(frozen=True, order=True)
class MultiIndex:
    """Exponents of a mixed partial derivative, one entry per base coordinate"""
    exponents: Tuple[int, ...]

    @classmethod
    def zero(cls, dim: int) -> "MultiIndex":
        return cls((0,) * dim)

    @classmethod
    def unit(cls, dim: int, mu: int) -> "MultiIndex":
        return cls.zero(dim).raised(mu)

    @property
    def order(self) -> int:
        return sum(self.exponents)

    def raised(self, mu: int) -> "MultiIndex":
        exps = list(self.exponents)
        exps[mu] += 1
        return MultiIndex(tuple(exps))

    def lowered(self, mu: int) -> "MultiIndex":
        if self.exponents[mu] == 0:
            raise ValueError(f"cannot lower index {mu} of {self.exponents}")
        exps = list(self.exponents)
        exps[mu] -= 1
        return MultiIndex(tuple(exps))

    def first_index(self) -> Optional[int]:
        for mu, e in enumerate(self.exponents):
            if e > 0:
                return mu
        return None

    def steps(self) -> List[int]:
        """Base indices to differentiate by, in lexicographic order"""
        out = []
        for mu, e in enumerate(self.exponents):
            out.extend([mu] * e)
        return out


@dataclass(frozen=True)
class JetVar:
    """A coordinate on the truncated jet space: x^mu, u^a_I or a parameter jet"""
    kind: str
    index: int
    multi: Optional[MultiIndex] = None


class FunctionSymbol:
    """
    Uninterpreted function of jet variables with registered partials.

    Partials are again FunctionSymbols named by their sorted derivative
    indices (V, V_1, V_12, ...), so mixed partials commute by construction.
    """

    def __init__(self, root: str, arity: int, indices: Tuple[int, ...] = (),
                 family: Optional[Dict[Tuple[int, ...], "FunctionSymbol"]] = None):
        self.root = root
        self.arity = arity
        self.indices = tuple(sorted(indices))
        self.family = family if family is not None else {}
        self.family[self.indices] = self
        self.func = _sympy_function(self)

    @property
    def name(self) -> str:
        if not self.indices:
            return self.root
        return f"{self.root}_" + "".join(str(i + 1) for i in self.indices)

    def partial(self, i: int) -> "FunctionSymbol":
        if not 0 <= i < self.arity:
            raise ExpressionError(f"{self.name} has no argument {i + 1}")
        key = tuple(sorted(self.indices + (i,)))
        if key not in self.family:
            FunctionSymbol(self.root, self.arity, key, self.family)
        return self.family[key]

    def __call__(self, *args):
        if len(args) != self.arity:
            raise ExpressionError(f"{self.name} expects {self.arity} arguments, got {len(args)}")
        return self.func(*args)

    def __repr__(self):
        return f"FunctionSymbol({self.name}/{self.arity})"


def _sympy_function(symbol: FunctionSymbol):
    def fdiff(self, argindex=1):
        return symbol.partial(argindex - 1).func(*self.args)

    return type(symbol.name, (sympy.Function,),
                {"fdiff": fdiff, "nargs": symbol.arity, "_jet_symbol": symbol})


# one family per (name, arity) so equal declarations give equal expressions
_FUNCTION_FAMILIES: Dict[Tuple[str, int], FunctionSymbol] = {}


def declare_function(root: str, arity: int) -> FunctionSymbol:
    key = (root, arity)
    if key not in _FUNCTION_FAMILIES:
        _FUNCTION_FAMILIES[key] = FunctionSymbol(root, arity)
    return _FUNCTION_FAMILIES[key]


def function_symbol_of(app) -> Optional[FunctionSymbol]:
    return getattr(app.func, "_jet_symbol", None)


@dataclass(frozen=True)
class FieldGroup:
    """A named bundle component: the group name plus its component names"""
    name: str
    components: Tuple[str, ...]

    @classmethod
    def vector(cls, name: str, dim: int) -> "FieldGroup":
        if dim == 1:
            return cls(name, (name,))
        return cls(name, tuple(f"{name}{k}" for k in range(1, dim + 1)))


def multi_indices(dim: int, max_order: int) -> List[MultiIndex]:
    """All multi-indices of length dim and order <= max_order, by order then lexicographic"""
    found = [MultiIndex(e) for e in itertools.product(range(max_order + 1), repeat=dim)
             if sum(e) <= max_order]
    return sorted(found, key=lambda m: (m.order, tuple(-e for e in m.exponents)))


class JetSpace:
    """
    Coordinates of a truncated jet space J^N(F) over an n-dimensional base.

    Field jets u^a_I and parameter jets X^k_I are sympy Symbols named
    ``name_<coords>`` (q1_t, q1_tt, A1x_y). Parameter jets describe fixed
    sections of a parameter bundle: total derivatives move them but they
    carry no vertical generators.
    """

    def __init__(self, base: Sequence[str], fields: Sequence[FieldGroup],
                 params: Sequence[FieldGroup] = (), order: int = 4,
                 functions: Optional[Dict[str, int]] = None):
        if order < 0:
            raise PreconditionError("jet order must be non-negative")
        self.base_names = tuple(base)
        self.field_groups = tuple(fields)
        self.param_groups = tuple(params)
        self.order = order
        self.function_arities = dict(functions or {})
        self.dim = len(self.base_names)
        self.field_names = tuple(c for g in self.field_groups for c in g.components)
        self.param_names = tuple(c for g in self.param_groups for c in g.components)

        self._var_of: Dict[sympy.Symbol, JetVar] = {}
        self._symbol_of: Dict[JetVar, sympy.Symbol] = {}
        self.names: Dict[str, sympy.Symbol] = {}

        self.base_symbols = tuple(self._register(name, JetVar(BASE, mu))
                                  for mu, name in enumerate(self.base_names))
        self.multi = multi_indices(self.dim, order)
        for kind, names in ((FIELD, self.field_names), (PARAM, self.param_names)):
            for a, comp in enumerate(names):
                for m in self.multi:
                    self._register(self.jet_name(comp, m), JetVar(kind, a, m))

        self.functions: Dict[str, FunctionSymbol] = {
            name: declare_function(name, arity) for name, arity in self.function_arities.items()
        }

    def _register(self, name: str, var: JetVar) -> sympy.Symbol:
        if name in self.names:
            raise ExpressionError(f"duplicate coordinate name {name!r}")
        sym = sympy.Symbol(name)
        self._var_of[sym] = var
        self._symbol_of[var] = sym
        self.names[name] = sym
        return sym

    def jet_name(self, component: str, multi: MultiIndex) -> str:
        if multi.order == 0:
            return component
        return component + "_" + "".join(self.base_names[mu] for mu in multi.steps())

    def signature(self) -> tuple:
        return (self.base_names, self.field_groups, self.param_groups, self.order,
                tuple(sorted(self.function_arities.items())))

    def __eq__(self, other):
        return isinstance(other, JetSpace) and self.signature() == other.signature()

    def __hash__(self):
        return hash(self.signature())

    def __contains__(self, sym) -> bool:
        return sym in self._var_of

    # --- lookups -----------------------------------------------------------

    def jet_var(self, sym) -> Optional[JetVar]:
        return self._var_of.get(sym)

    def base_symbol(self, mu: int) -> sympy.Symbol:
        return self.base_symbols[mu]

    def field_symbol(self, a: Union[int, str], multi: Optional[MultiIndex] = None) -> sympy.Symbol:
        return self._lookup(FIELD, a, multi)

    def param_symbol(self, k: Union[int, str], multi: Optional[MultiIndex] = None) -> sympy.Symbol:
        return self._lookup(PARAM, k, multi)

    def _lookup(self, kind: str, index, multi) -> sympy.Symbol:
        names = self.field_names if kind == FIELD else self.param_names
        if isinstance(index, str):
            if index not in names:
                raise ExpressionError(f"undeclared {kind} component {index!r}")
            index = names.index(index)
        multi = multi or MultiIndex.zero(self.dim)
        var = JetVar(kind, index, multi)
        if var not in self._symbol_of:
            raise JetOrderOverflow(
                f"{names[index]} jet of order {multi.order} exceeds truncation order {self.order}")
        return self._symbol_of[var]

    def symbol(self, var: JetVar) -> sympy.Symbol:
        if var.kind == BASE:
            return self.base_symbols[var.index]
        return self._lookup(var.kind, var.index, var.multi)

    def field_index(self, name: str) -> int:
        return self.field_names.index(name)

    def shift(self, sym, mu: int) -> sympy.Symbol:
        """The jet coordinate u_{I+mu} for u_I"""
        var = self._var_of[sym]
        if var.kind == BASE:
            raise ExpressionError("base coordinates have no jet shift")
        return self._lookup(var.kind, var.index, var.multi.raised(mu))

    def function(self, name: str) -> FunctionSymbol:
        """Resolve a declared function or one of its registered partials (V, V_1, V_12)"""
        root, _, suffix = name.partition("_")
        if root not in self.functions:
            raise ExpressionError(f"undeclared function {name!r}")
        sym = self.functions[root]
        if suffix:
            if not suffix.isdigit():
                raise ExpressionError(f"malformed partial name {name!r}")
            for ch in suffix:
                sym = sym.partial(int(ch) - 1)
        return sym

    def jets_of_kind(self, expr, kind: str) -> List[sympy.Symbol]:
        return sorted((s for s in expr.free_symbols
                       if s in self._var_of and self._var_of[s].kind == kind),
                      key=lambda s: s.name)

    def max_jet_order(self, expr, kind: str = FIELD) -> int:
        orders = [self._var_of[s].multi.order for s in self.jets_of_kind(expr, kind)]
        return max(orders, default=-1)

    def vertical_names(self) -> List[str]:
        return [self.jet_name(c, m) for c in self.field_names for m in self.multi]


# --- expression layer ---------------------------------------------------------

def normalize(raw, space: Optional[JetSpace] = None) -> sympy.Expr:
    """Canonical expanded form; rejects real exponents, floats and undeclared names"""
    expr = sympy.sympify(raw)
    if expr.atoms(sympy.Float):
        raise ExpressionError(f"floating point coefficient in {expr}")
    for p in expr.atoms(sympy.Pow):
        if not p.exp.is_Integer:
            raise ExpressionError(f"non-integer exponent in {p}")
    for app in expr.atoms(sympy.Function):
        if function_symbol_of(app) is None:
            raise ExpressionError(f"unsupported function {app.func}")
    if space is not None:
        unknown = sorted(s.name for s in expr.free_symbols if s not in space)
        if unknown:
            raise ExpressionError(f"undeclared variable(s): {', '.join(unknown)}")
    return sympy.expand(expr)


def partial(expr, var) -> sympy.Expr:
    """Formal partial derivative; jets are independent, declared functions use their partials"""
    return sympy.expand(sympy.diff(expr, var))


def total_derivative(space: JetSpace, expr, mu: int) -> sympy.Expr:
    """D_mu = d/dx^mu + sum u_{I+mu} d/du_I, over field and parameter jets"""
    expr = sympy.sympify(expr)
    result = sympy.diff(expr, space.base_symbol(mu))
    for sym in expr.free_symbols:
        var = space.jet_var(sym)
        if var is None or var.kind == BASE:
            continue
        coeff = sympy.diff(expr, sym)
        if coeff != 0:
            result += space.shift(sym, mu) * coeff
    return sympy.expand(result)


def total_derivative_multi(space: JetSpace, expr, multi: MultiIndex) -> sympy.Expr:
    for mu in multi.steps():
        expr = total_derivative(space, expr, mu)
    return sympy.expand(expr)


# --- concrete fields ------------------------------------------------------------

@dataclass
class FieldSample:
    """
    A concrete field: closed-form component expressions in the base
    coordinates, or samples on a uniform rectangular grid.
    """
    label: str
    closed_form: Dict[str, sympy.Expr] = field(default_factory=dict)
    grid: Dict[str, np.ndarray] = field(default_factory=dict)
    box: Tuple[Tuple[float, float], ...] = ()

    @classmethod
    def closed(cls, label: str, components: Dict[str, object]) -> "FieldSample":
        return cls(label, closed_form={k: sympy.sympify(v) for k, v in components.items()})

    @classmethod
    def sampled(cls, label: str, arrays: Dict[str, np.ndarray],
                box: Sequence[Tuple[float, float]]) -> "FieldSample":
        arrays = {k: np.asarray(v, dtype=float) for k, v in arrays.items()}
        shapes = {a.shape for a in arrays.values()}
        if len(shapes) > 1:
            raise FieldSampleError(f"grid components of {label} have different shapes {shapes}")
        if shapes and len(next(iter(shapes))) != len(box):
            raise FieldSampleError(f"grid of {label} does not match its bounding box")
        return cls(label, grid=arrays, box=tuple((float(lo), float(hi)) for lo, hi in box))

    @property
    def is_closed(self) -> bool:
        return bool(self.closed_form)

    @property
    def shape(self) -> Tuple[int, ...]:
        return next(iter(self.grid.values())).shape

    @property
    def spacing(self) -> Tuple[float, ...]:
        return tuple((hi - lo) / (n - 1) for (lo, hi), n in zip(self.box, self.shape))

    def axes(self) -> List[np.ndarray]:
        return [np.linspace(lo, hi, n) for (lo, hi), n in zip(self.box, self.shape)]

    def coordinates(self) -> List[np.ndarray]:
        return np.meshgrid(*self.axes(), indexing="ij")

    def sample(self, space: JetSpace, box: Sequence[Tuple[float, float]],
               points: int) -> "FieldSample":
        """Grid version of a closed-form field"""
        if not self.is_closed:
            return self
        axes = [np.linspace(lo, hi, points) for lo, hi in box]
        mesh = np.meshgrid(*axes, indexing="ij")
        arrays = {}
        for name, expr in self.closed_form.items():
            fn = sympy.lambdify(space.base_symbols, expr, "numpy")
            arrays[name] = np.broadcast_to(np.asarray(fn(*mesh), dtype=float), mesh[0].shape).copy()
        return FieldSample.sampled(self.label, arrays, box)


def grid_derivative(values: np.ndarray, spacing: Sequence[float], multi: MultiIndex) -> np.ndarray:
    """Central differences of order 2, one-sided second-order stencils at the boundary"""
    out = values
    for mu in multi.steps():
        if out.shape[mu] < 3:
            raise FieldSampleError(f"grid axis {mu} has {out.shape[mu]} points; need at least 3")
        out = np.gradient(out, spacing[mu], axis=mu, edge_order=2)
    return out


def substitute_jet(space: JetSpace, expr, phi: FieldSample):
    """
    Evaluate an expression along the jet prolongation of a field.

    Closed-form fields give a sympy expression in the base coordinates;
    grid fields give an array on the grid.
    """
    expr = sympy.sympify(expr)
    jets = space.jets_of_kind(expr, FIELD)
    needed = {space.field_names[space.jet_var(s).index] for s in jets}
    source = phi.closed_form if phi.is_closed else phi.grid
    missing = sorted(needed - set(source))
    if missing:
        raise FieldSampleError(f"field {phi.label} lacks component(s) {', '.join(missing)}")

    if phi.is_closed:
        replacements = {}
        for s in jets:
            var = space.jet_var(s)
            value = phi.closed_form[space.field_names[var.index]]
            for mu in var.multi.steps():
                value = sympy.diff(value, space.base_symbol(mu))
            replacements[s] = value
        return expr.xreplace(replacements)

    if space.dim != len(phi.shape):
        raise FieldSampleError(f"grid of {phi.label} has {len(phi.shape)} axes, base has {space.dim}")
    max_order = max((space.jet_var(s).multi.order for s in jets), default=0)
    if any(n < max_order + 3 for n in phi.shape):
        raise FieldSampleError(
            f"grid of {phi.label} too coarse for derivatives of order {max_order}")
    if expr.atoms(sympy.Function) - expr.atoms(sympy.sin, sympy.cos, sympy.exp):
        unbound = {str(a.func) for a in expr.atoms(sympy.Function) if function_symbol_of(a)}
        if unbound:
            raise FieldSampleError(f"unbound function symbol(s) {', '.join(sorted(unbound))}")
    values = [grid_derivative(phi.grid[space.field_names[space.jet_var(s).index]],
                              phi.spacing, space.jet_var(s).multi) for s in jets]
    coords = phi.coordinates()
    fn = sympy.lambdify(list(space.base_symbols) + jets, expr, "numpy")
    result = np.asarray(fn(*coords, *values), dtype=float)
    return np.broadcast_to(result, phi.shape).copy()


def main():
    """Demonstrate the kernel on the particle coordinates"""
    space = JetSpace(["t"], [FieldGroup.vector("q", 3)], functions={"V": 3})
    q = [space.field_symbol(a) for a in range(3)]
    qd = [space.field_symbol(a, MultiIndex((1,))) for a in range(3)]
    V = space.functions["V"](*q)
    print("📊 JET KERNEL DEMO")
    print("=" * 50)
    print(f"normalize((q1 + q1_t)^2) = {normalize((q[0] + qd[0]) ** 2, space)}")
    print(f"D_t(q1*q1_t)            = {total_derivative(space, q[0] * qd[0], 0)}")
    print(f"D_t(V(q))               = {total_derivative(space, V, 0)}")
    phi = FieldSample.closed("line", {"q1": space.base_symbol(0), "q2": 2 * space.base_symbol(0),
                                      "q3": 0})
    print(f"q1*q2_t along {phi.label}     = {substitute_jet(space, q[0] * space.field_symbol(1, MultiIndex((1,))), phi)}")


if __name__ == "__main__":
    main()
