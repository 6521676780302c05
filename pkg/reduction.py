"""
Homotopy Zero Locus
Pullback of jet-space forms along concrete fields, the two membership
conditions of the zero locus, charges on slices, infinitesimal invariance
of the locus, and numeric fixtures (RK4 trajectories, Richardson steps).
"""

import itertools
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import sympy

from bicomplex import BigradedForm, Bicomplex, JetVectorField
from jetcore import (FieldSample, FieldSampleError, MultiIndex, PreconditionError,
                     ZeroLocusError, grid_derivative, substitute_jet)
from linfty import MomentumMapSpec, sort_with_sign

_trapezoid = getattr(np, "trapezoid", None) or np.trapz

# grid points trimmed at each end before taking numeric residuals
EDGE = 3

Value = Union[sympy.Expr, np.ndarray]


@dataclass
class BaseForm:
    """A form on the base: base-index tuples to coefficients (expressions or arrays)"""
    values: Dict[Tuple[int, ...], Value]
    closed: bool


def pullback_form(bc: Bicomplex, f: BigradedForm, phi: FieldSample) -> BaseForm:
    """Contact generators pull back to zero; jets are replaced by derivatives of phi"""
    values = {}
    for gens, c in f.horizontal_part().terms.items():
        key = tuple(g.index for g in gens)
        values[key] = substitute_jet(bc.space, c, phi)
    return BaseForm(values, phi.is_closed)


def base_derivative(bc: Bicomplex, form: BaseForm, phi: FieldSample) -> BaseForm:
    """Exterior derivative on the base"""
    space = bc.space
    out: Dict[Tuple[int, ...], Value] = {}
    for key, value in form.values.items():
        for mu in range(space.dim):
            s, new = sort_with_sign((mu,) + key)
            if not s:
                continue
            if form.closed:
                term = sympy.diff(value, space.base_symbol(mu))
            else:
                term = grid_derivative(value, phi.spacing, MultiIndex.unit(space.dim, mu))
            out[new] = out.get(new, 0) + s * term
    return BaseForm(out, form.closed)


def _interior(values: np.ndarray) -> np.ndarray:
    index = tuple(slice(EDGE, -EDGE) if n > 2 * EDGE else slice(None) for n in values.shape)
    return values[index]


def _max_abs(value) -> float:
    arr = np.asarray(value, dtype=float)
    if arr.ndim:
        arr = _interior(arr)
    return float(np.max(np.abs(arr))) if arr.size else 0.0


def _term_scale(bc: Bicomplex, f: BigradedForm, phi: FieldSample) -> float:
    """Largest magnitude among the additive terms of f pulled back along a grid field"""
    scale = 0.0
    for c in f.horizontal_part().terms.values():
        for term in sympy.Add.make_args(c):
            scale = max(scale, _max_abs(substitute_jet(bc.space, term, phi)))
    return scale


@dataclass
class Residual:
    value: object
    passed: bool


@dataclass
class SliceSpec:
    """The slice {x^axis = value}, cooriented by +d/dx^axis when sign is +1"""
    axis: int
    value: float
    sign: int = 1
    box: Optional[Tuple[Tuple[float, float], ...]] = None


@dataclass
class ZeroLocusReport:
    field_label: str
    action: str
    mode: str
    tol: Optional[float]
    condition_i: Dict[str, Residual] = field(default_factory=dict)
    condition_ii: Dict[str, Residual] = field(default_factory=dict)

    @property
    def passes_i(self) -> bool:
        return all(r.passed for r in self.condition_i.values())

    @property
    def passes_ii(self) -> bool:
        return all(r.passed for r in self.condition_ii.values())

    @property
    def passed(self) -> bool:
        return self.passes_i and self.passes_ii


def _symbolic_zero(value) -> Tuple[bool, sympy.Expr]:
    simplified = sympy.simplify(sympy.expand(value))
    return simplified == 0, simplified


def _condition_forms(bc: Bicomplex, momap: MomentumMapSpec, gamma: BigradedForm):
    """mu_1(a) per basis element and i_{xi_a} i_{xi_b} d_v gamma per pair"""
    action = momap.action
    if action.algebra.local:
        raise PreconditionError("zero-locus checks are defined for global actions")
    basis = action.algebra.basis
    delta_gamma = bc.d_v(gamma)
    first = {basis[a]: momap.value(1, (a,)) for a in range(len(basis))}
    second = {}
    for a, b in itertools.combinations(range(len(basis)), 2):
        xi_a = action.field_for(a).vertical_part()
        xi_b = action.field_for(b).vertical_part()
        second[f"{basis[a]},{basis[b]}"] = bc.contract(xi_a, bc.contract(xi_b, delta_gamma))
    return first, second


def zero_locus_check(bc: Bicomplex, phi: FieldSample, momap: MomentumMapSpec,
                     gamma: BigradedForm, tol: float = 1e-6) -> ZeroLocusReport:
    """
    Membership of phi in the homotopy zero locus: (i) the pulled-back
    mu_1(a) are closed on the base; (ii) the pulled-back
    i_{xi_a} i_{xi_b} d_v gamma vanish. Closed-form fields are decided
    exactly; grid fields against tol relative to the largest contributing
    term (never below tol itself).
    """
    first, second = _condition_forms(bc, momap, gamma)
    mode = "symbolic" if phi.is_closed else "numeric"
    report = ZeroLocusReport(phi.label, momap.action.name, mode, None if phi.is_closed else tol)
    for label, form in first.items():
        derived = base_derivative(bc, pullback_form(bc, form, phi), phi)
        report.condition_i[label] = _judge(bc, derived, phi, form, tol)
    for label, form in second.items():
        report.condition_ii[label] = _judge(bc, pullback_form(bc, form, phi), phi, form, tol)
    return report


def _judge(bc: Bicomplex, pulled: BaseForm, phi: FieldSample, source: BigradedForm,
           tol: float) -> Residual:
    if pulled.closed:
        residuals = []
        ok = True
        for value in pulled.values.values():
            zero, simplified = _symbolic_zero(value)
            ok = ok and zero
            if not zero:
                residuals.append(simplified)
        return Residual(sympy.Add(*residuals) if residuals else sympy.Integer(0), ok)
    worst = max((_max_abs(v) for v in pulled.values.values()), default=0.0)
    threshold = tol * max(_term_scale(bc, source, phi), 1.0)
    return Residual(worst, worst <= threshold)


def charge(bc: Bicomplex, j: BigradedForm, phi: FieldSample, sigma: SliceSpec):
    """Integral of the pulled-back current over a cooriented slice"""
    space = bc.space
    n = space.dim
    if not 0 <= sigma.axis < n:
        raise FieldSampleError(f"slice axis {sigma.axis} outside base of dimension {n}")
    key = tuple(mu for mu in range(n) if mu != sigma.axis)
    pulled = pullback_form(bc, j, phi)
    orientation = sigma.sign * (-1) ** sigma.axis
    value = pulled.values.get(key)
    if value is None:
        return sympy.Integer(0) if phi.is_closed else 0.0
    x = space.base_symbol(sigma.axis)

    if phi.is_closed:
        restricted = value.subs(x, sigma.value)
        if n == 1:
            return sympy.simplify(orientation * restricted)
        if sigma.box is None:
            raise FieldSampleError("closed-form charges over a slice need its bounding box")
        for mu in key:
            lo, hi = sigma.box[mu]
            restricted = sympy.integrate(restricted, (space.base_symbol(mu), lo, hi))
        return sympy.simplify(orientation * restricted)

    lo, hi = phi.box[sigma.axis]
    if not lo <= sigma.value <= hi:
        raise FieldSampleError(f"slice {space.base_names[sigma.axis]}={sigma.value} outside [{lo}, {hi}]")
    axes = phi.axes()
    values = np.broadcast_to(np.asarray(value, dtype=float), phi.shape)
    h = phi.spacing[sigma.axis]
    position = (sigma.value - lo) / h
    i = min(int(np.floor(position)), phi.shape[sigma.axis] - 2)
    w = position - i
    restricted = ((1 - w) * np.take(values, i, axis=sigma.axis)
                  + w * np.take(values, i + 1, axis=sigma.axis))
    remaining = [axes[mu] for mu in key]
    for ax in reversed(remaining):
        restricted = _trapezoid(restricted, ax, axis=-1)
    return float(orientation * restricted)


# --- invariance -------------------------------------------------------------

def richardson_derivative(F: Callable[[float], np.ndarray], h: float):
    """
    Central differences of F at 0 with steps h, h/2, h/4. Returns the
    finest estimate and the ratio of successive differences, or None when
    those differences are at roundoff level.
    """
    estimates = []
    for step in (h, h / 2, h / 4):
        estimates.append((np.asarray(F(step), dtype=float) - np.asarray(F(-step), dtype=float))
                         / (2 * step))
    coarse = float(np.max(np.abs(estimates[0] - estimates[1])))
    fine = float(np.max(np.abs(estimates[1] - estimates[2])))
    scale = max(1.0, float(np.max(np.abs(estimates[2]))))
    if fine <= 1e-9 * scale:
        return estimates[2], None
    return estimates[2], coarse / fine


@dataclass
class InvarianceEntry:
    condition: str
    subject: str
    symbolic: Optional[bool]
    numeric_residual: float
    ratio: Optional[float]
    passed: bool


@dataclass
class InvarianceReport:
    field_label: str
    direction: str
    entries: List[InvarianceEntry]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def max_residual(self) -> float:
        return max((e.numeric_residual for e in self.entries), default=0.0)


def _flow(bc: Bicomplex, phi0: FieldSample, xi: JetVectorField, eps) -> FieldSample:
    """phi0 + eps * (Q_c along j phi0)"""
    space = bc.space
    source = phi0.closed_form if phi0.is_closed else phi0.grid
    moved = {}
    for a, name in enumerate(space.field_names):
        if name not in source:
            continue
        shift = substitute_jet(space, xi.characteristic[a], phi0)
        moved[name] = source[name] + eps * shift
    if phi0.is_closed:
        return FieldSample.closed(f"{phi0.label}+flow", moved)
    return FieldSample.sampled(f"{phi0.label}+flow", moved, phi0.box)


def _condition_values(bc: Bicomplex, phi: FieldSample, first, second) -> Dict[Tuple[str, str], List]:
    out = {}
    for label, form in first.items():
        pulled = base_derivative(bc, pullback_form(bc, form, phi), phi)
        out[("i", label)] = list(pulled.values.values())
    for label, form in second.items():
        out[("ii", label)] = list(pullback_form(bc, form, phi).values.values())
    return out


def invariance_check(bc: Bicomplex, phi0: FieldSample, c: int, momap: MomentumMapSpec,
                     gamma: BigradedForm, step: float = 1e-3, tol: float = 1e-6,
                     band: Sequence[float] = (3.2, 4.8),
                     box: Optional[Sequence[Tuple[float, float]]] = None,
                     points: int = 41) -> InvarianceReport:
    """
    First variation of both zero-locus conditions along phi0 + s * xi_c.
    Closed-form fields are differentiated in s exactly and also by central
    differences on a sample grid; grid fields by central differences only.
    """
    if not zero_locus_check(bc, phi0, momap, gamma, tol).passed:
        raise ZeroLocusError(f"{phi0.label} is not in the zero locus of {momap.action.name}")
    space = bc.space
    action = momap.action
    xi = action.field_for(c).vertical_part()
    first, second = _condition_forms(bc, momap, gamma)
    entries = []

    if phi0.is_closed:
        s = sympy.Dummy("s")
        moved = _condition_values(bc, _flow(bc, phi0, xi, s), first, second)
        box = box or tuple((0.0, 2.0) for _ in range(space.dim))
        mesh = np.meshgrid(*[np.linspace(lo, hi, points) for lo, hi in box], indexing="ij")
        for (cond, label), values in moved.items():
            symbolic = all(_symbolic_zero(sympy.diff(v, s).subs(s, 0))[0] for v in values)
            fns = [sympy.lambdify(list(space.base_symbols) + [s], v, "numpy") for v in values]

            def F(eps, fns=fns):
                return np.stack([np.broadcast_to(np.asarray(fn(*mesh, eps), dtype=float),
                                                 mesh[0].shape) for fn in fns]) if fns else np.zeros(1)

            estimate, ratio = richardson_derivative(F, step)
            residual = float(np.max(np.abs(estimate))) if estimate.size else 0.0
            ok = symbolic and residual < tol and (ratio is None or band[0] <= ratio <= band[1])
            entries.append(InvarianceEntry(cond, label, symbolic, residual, ratio, ok))
        return InvarianceReport(phi0.label, action.algebra.basis[c], entries)

    def F_grid(eps):
        values = _condition_values(bc, _flow(bc, phi0, xi, eps), first, second)
        return {k: np.stack([_interior(np.broadcast_to(np.asarray(v, dtype=float), phi0.shape))
                             for v in vs]) if vs else np.zeros(1) for k, vs in values.items()}

    cache = {}

    def evaluate(eps):
        if eps not in cache:
            cache[eps] = F_grid(eps)
        return cache[eps]

    base = evaluate(0.0)
    for key in base:
        scale = max(1.0, float(np.max(np.abs(base[key]))))
        estimate, ratio = richardson_derivative(lambda eps, key=key: evaluate(eps)[key], step)
        residual = float(np.max(np.abs(estimate)))
        ok = residual < tol * scale and (ratio is None or band[0] <= ratio <= band[1])
        entries.append(InvarianceEntry(key[0], key[1], None, residual, ratio, ok))
    return InvarianceReport(phi0.label, action.algebra.basis[c], entries)


def exactness_oracle_n1(bc: Bicomplex, momap: MomentumMapSpec, phi: FieldSample) -> bool:
    """
    One-dimensional base and abelian algebra: the pulled-back mu_1(a) are
    exact up to constants iff f(t) - f(t0) vanishes, computed as the
    antiderivative of df/dt from t0 = 0.
    """
    algebra = momap.action.algebra
    if bc.space.dim != 1 or not algebra.is_abelian or algebra.local or not phi.is_closed:
        raise PreconditionError("the exactness oracle needs n = 1, an abelian global algebra "
                                "and a closed-form field")
    t = bc.space.base_symbol(0)
    tau = sympy.Dummy("tau")
    for a in range(algebra.dim):
        pulled = pullback_form(bc, momap.value(1, (a,)), phi).values.get((), sympy.Integer(0))
        rate = sympy.diff(pulled, t).subs(t, tau)
        if not _symbolic_zero(sympy.integrate(rate, (tau, 0, t)))[0]:
            return False
    return True


# --- fixtures -----------------------------------------------------------------

def integrate_newton(label: str, names: Sequence[str], grad_V: Callable[[np.ndarray], np.ndarray],
                     q0: Sequence[float], v0: Sequence[float], t_span: Tuple[float, float],
                     points: int) -> FieldSample:
    """RK4 samples of q'' = -grad V(q) on a uniform grid"""
    t = np.linspace(t_span[0], t_span[1], points)
    h = t[1] - t[0]
    q = np.zeros((points, len(q0)))
    v = np.zeros_like(q)
    q[0], v[0] = q0, v0

    def rhs(state_q, state_v):
        return state_v, -np.asarray(grad_V(state_q), dtype=float)

    for k in range(points - 1):
        k1q, k1v = rhs(q[k], v[k])
        k2q, k2v = rhs(q[k] + h / 2 * k1q, v[k] + h / 2 * k1v)
        k3q, k3v = rhs(q[k] + h / 2 * k2q, v[k] + h / 2 * k2v)
        k4q, k4v = rhs(q[k] + h * k3q, v[k] + h * k3v)
        q[k + 1] = q[k] + h / 6 * (k1q + 2 * k2q + 2 * k3q + k4q)
        v[k + 1] = v[k] + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return FieldSample.sampled(label, {name: q[:, a] for a, name in enumerate(names)}, [t_span])


def classification_table(reports: Sequence[ZeroLocusReport],
                         oracle: Optional[Dict[Tuple[str, str], bool]] = None) -> pd.DataFrame:
    rows = []
    for r in reports:
        row = {
            "field": r.field_label,
            "action": r.action,
            "mode": r.mode,
            "condition (i)": "pass" if r.passes_i else "fail",
            "condition (ii)": "pass" if r.passes_ii else "fail",
            "in Z": "yes" if r.passed else "no",
        }
        if oracle is not None:
            verdict = oracle.get((r.field_label, r.action))
            row["oracle"] = "-" if verdict is None else ("exact" if verdict else "not exact")
        rows.append(row)
    columns = ["field", "action", "mode", "condition (i)", "condition (ii)", "in Z"]
    if oracle is not None:
        columns.append("oracle")
    return pd.DataFrame(rows, columns=columns)


def main():
    """Classify the mechanics corpus fields"""
    from corpus import Mechanics
    mech = Mechanics(potential="free")
    reports = []
    for momap in (mech.translation_momap, mech.rotation_momap):
        for phi in mech.paths().values():
            reports.append(zero_locus_check(mech.bicomplex, phi, momap, mech.data.gamma))
    print("📊 HOMOTOPY ZERO LOCUS: free particle")
    print("=" * 50)
    print(classification_table(reports).to_string(index=False))


if __name__ == "__main__":
    main()
