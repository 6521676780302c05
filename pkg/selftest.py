"""
Randomized Invariant Suites
Seeded random forms, vector fields and cochains checked against the
identities of the variational bicomplex and of the obstruction complex.
"""

import itertools
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy

from bicomplex import BigradedForm, Bicomplex, Generator, JetVectorField, wedge, wedge_all
from corpus import so3
from jetcore import FieldGroup, JetSpace, MultiIndex, normalize, total_derivative
from obstruction import CochainSum, GCochain, d_bar, d_g

FAULTS = ("leibniz-sign",)


@dataclass
class SuiteResult:
    name: str
    trials: int
    failures: int = 0
    example: Optional[str] = None
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.failures == 0


def selftest_space() -> JetSpace:
    """Two fields over a two-dimensional base, truncated at order 3"""
    return JetSpace(["x", "y"], [FieldGroup.vector("u", 1), FieldGroup.vector("w", 1)], order=3)


class FormSampler:
    """
    Random polynomial coefficients in jets up to ``coefficient_order`` and
    random wedges of dx and contact generators up to ``contact_order``.
    """

    def __init__(self, space: JetSpace, rng: np.random.Generator,
                 coefficient_order: int = 1, contact_order: int = 1):
        self.space = space
        self.rng = rng
        multis = [m for m in space.multi if m.order <= coefficient_order]
        self.variables = list(space.base_symbols) + [
            space.field_symbol(a, m) for a in range(len(space.field_names)) for m in multis]
        self.generators = [Generator.dx(mu) for mu in range(space.dim)] + [
            Generator.contact(a, m) for a in range(len(space.field_names))
            for m in space.multi if m.order <= contact_order]

    def scalar(self, variables: Optional[Sequence[sympy.Symbol]] = None) -> sympy.Expr:
        pool = list(variables if variables is not None else self.variables)
        total = sympy.Integer(0)
        for _ in range(int(self.rng.integers(1, 4))):
            coeff = int(self.rng.choice([-3, -2, -1, 1, 2, 3]))
            k = int(self.rng.integers(0, 3))
            picks = [pool[int(i)] for i in self.rng.integers(0, len(pool), size=k)]
            total += coeff * sympy.Mul(*picks)
        return sympy.expand(total)

    def form(self, degree: Optional[int] = None) -> BigradedForm:
        if degree is None:
            degree = int(self.rng.integers(0, 4))
        pairs = []
        for _ in range(int(self.rng.integers(1, 4))):
            idx = self.rng.choice(len(self.generators), size=degree, replace=False)
            pairs.append((tuple(self.generators[int(i)] for i in idx), self.scalar()))
        return BigradedForm.from_pairs(pairs)

    def evolutionary(self, order: int = 1) -> JetVectorField:
        pool = list(self.space.base_symbols) + [
            self.space.field_symbol(a, m) for a in range(len(self.space.field_names))
            for m in self.space.multi if m.order <= order]
        Q = {a: self.scalar(pool) for a in range(len(self.space.field_names))}
        return JetVectorField.build(self.space, Q, label="Q")

    def vector_field(self, order: int = 1) -> JetVectorField:
        """Evolutionary part plus a Cartan lift with base-only components"""
        X = self.evolutionary(order)
        v = {mu: self.scalar(self.space.base_symbols) for mu in range(self.space.dim)}
        return X + JetVectorField.build(self.space, horizontal=v, label="v")


def _degree(f: BigradedForm) -> int:
    return f.degree or 0


class SuiteRunner:
    """Runs the named suites against one bicomplex and seed"""

    def __init__(self, seed: int = 0, forms: int = 200, characteristics: int = 20,
                 fault: Optional[str] = None):
        if fault is not None and fault not in FAULTS:
            raise ValueError(f"unknown fault {fault!r}")
        self.seed = seed
        self.forms = forms
        self.characteristics = characteristics
        self.space = selftest_space()
        self.bc = Bicomplex(self.space, fault=fault)
        self.suites: Dict[str, Callable[[FormSampler], Tuple[int, List[BigradedForm]]]] = {
            "d_h² = 0": self.dh_squared,
            "d_v² = 0": self.dv_squared,
            "d_h d_v + d_v d_h = 0": self.anticommute,
            "wedge Leibniz": self.wedge_leibniz,
            "contraction Leibniz": self.contraction_leibniz,
            "[i_prQ, d_h] = 0": self.prolongation,
            "L_X d = d L_X": self.lie_commutes,
            "normalize idempotent": self.normalize_idempotent,
            "D_mu Leibniz": self.total_derivative_leibniz,
            "D_x D_y = D_y D_x": self.total_derivatives_commute,
            "d_g² = 0": self.ce_squared,
            "d̄² = 0": self.total_squared,
        }

    def run(self, names: Optional[Sequence[str]] = None) -> List[SuiteResult]:
        selected = list(self.suites) if names is None else list(names)
        results = []
        for i, name in enumerate(selected):
            if name not in self.suites:
                raise KeyError(f"unknown suite {name!r}")
            sampler = FormSampler(self.space, np.random.default_rng([self.seed, i]))
            start = time.perf_counter()
            trials, residuals = self.suites[name](sampler)
            result = SuiteResult(name, trials, seconds=time.perf_counter() - start)
            nonzero = [r for r in residuals if not r.is_zero]
            result.failures = len(nonzero)
            if nonzero:
                result.example = self.bc.render(nonzero[0])
            results.append(result)
        return results

    # --- bicomplex identities ---------------------------------------------------

    def dh_squared(self, s: FormSampler):
        return self.forms, [self.bc.d_h(self.bc.d_h(s.form())) for _ in range(self.forms)]

    def dv_squared(self, s: FormSampler):
        return self.forms, [self.bc.d_v(self.bc.d_v(s.form())) for _ in range(self.forms)]

    def anticommute(self, s: FormSampler):
        out = []
        for _ in range(self.forms):
            f = s.form()
            out.append(self.bc.d_h(self.bc.d_v(f)) + self.bc.d_v(self.bc.d_h(f)))
        return self.forms, out

    def wedge_leibniz(self, s: FormSampler):
        out = []
        for _ in range(self.forms):
            f, g = s.form(int(s.rng.integers(0, 3))), s.form(int(s.rng.integers(0, 2)))
            lhs = self.bc.d(wedge(f, g))
            rhs = wedge(self.bc.d(f), g) + wedge(f, self.bc.d(g)) * (-1) ** _degree(f)
            out.append(lhs - rhs)
        return self.forms, out

    def contraction_leibniz(self, s: FormSampler):
        out = []
        for _ in range(self.forms):
            X = s.vector_field()
            f, g = s.form(int(s.rng.integers(1, 3))), s.form(int(s.rng.integers(1, 3)))
            lhs = self.bc.contract(X, wedge(f, g))
            rhs = wedge(self.bc.contract(X, f), g) + wedge(f, self.bc.contract(X, g)) * (-1) ** _degree(f)
            out.append(lhs - rhs)
        return self.forms, out

    def prolongation(self, s: FormSampler):
        out = []
        for _ in range(self.characteristics):
            Q = s.evolutionary(order=1)
            for _ in range(3):
                f = s.form()
                out.append(self.bc.contract(Q, self.bc.d_h(f)) + self.bc.d_h(self.bc.contract(Q, f)))
        return len(out), out

    def lie_commutes(self, s: FormSampler):
        out = []
        for _ in range(self.characteristics):
            X = s.vector_field(order=0)
            f = s.form()
            out.append(self.bc.lie_derivative(X, self.bc.d(f)) - self.bc.d(self.bc.lie_derivative(X, f)))
        return len(out), out

    # --- expression layer ---------------------------------------------------------

    def normalize_idempotent(self, s: FormSampler):
        out = []
        for _ in range(self.forms):
            e = normalize(s.scalar(), self.space)
            out.append(BigradedForm.scalar(normalize(e, self.space) - e))
        return self.forms, out

    def total_derivative_leibniz(self, s: FormSampler):
        out = []
        for _ in range(self.forms):
            a, b = s.scalar(), s.scalar()
            mu = int(s.rng.integers(0, self.space.dim))
            D = lambda e: total_derivative(self.space, e, mu)
            out.append(BigradedForm.scalar(D(a * b) - D(a) * b - a * D(b)))
        return self.forms, out

    def total_derivatives_commute(self, s: FormSampler):
        out = []
        for _ in range(self.forms):
            a = s.scalar()
            xy = total_derivative(self.space, total_derivative(self.space, a, 0), 1)
            yx = total_derivative(self.space, total_derivative(self.space, a, 1), 0)
            out.append(BigradedForm.scalar(xy - yx))
        return self.forms, out

    # --- obstruction complex --------------------------------------------------------

    def _cochain(self, s: FormSampler, arity: int) -> GCochain:
        return GCochain(arity, {idx: s.form(int(s.rng.integers(0, 2)))
                                for idx in itertools.combinations(range(3), arity)})

    def ce_squared(self, s: FormSampler):
        algebra = so3()
        out = []
        for _ in range(self.characteristics):
            c = self._cochain(s, int(s.rng.integers(1, 3)))
            twice = d_g(d_g(c, algebra), algebra)
            out.extend(twice.values.values())
        return self.characteristics, out

    def total_squared(self, s: FormSampler):
        algebra = so3()
        out = []
        for _ in range(self.characteristics):
            p = int(s.rng.integers(1, 3))
            total = CochainSum({p: self._cochain(s, p)})
            twice = d_bar(d_bar(total, algebra, self.bc), algebra, self.bc)
            out.extend(v for c in twice.parts.values() for v in c.values.values())
        return self.characteristics, out


def run_suites(seed: int = 0, forms: int = 200, characteristics: int = 20,
               names: Optional[Sequence[str]] = None, fault: Optional[str] = None) -> List[SuiteResult]:
    return SuiteRunner(seed, forms, characteristics, fault).run(names)


def fault_demo(fault: str = "leibniz-sign") -> Tuple[str, str]:
    """d_h² of du ^ dw under an injected sign fault; returns (form, residual) renderings"""
    bc = Bicomplex(selftest_space(), fault=fault)
    zero = MultiIndex.zero(2)
    f = wedge_all([bc.delta(0, zero), bc.delta(1, zero)])
    return bc.render(f), bc.render(bc.d_h(bc.d_h(f)))


def main():
    """Run every suite on a small sample"""
    print("🔍 BICOMPLEX SELF-TEST (seed 0)")
    print("=" * 50)
    for r in run_suites(seed=0, forms=25, characteristics=5):
        icon = "✅" if r.passed else "❌"
        print(f"{icon} {r.name:<24} {r.trials:>4} trials  {r.seconds:.2f}s")
    form, residual = fault_demo()
    print()
    print(f"📊 injected leibniz-sign fault: d_h²({form}) = {residual}")


if __name__ == "__main__":
    main()
