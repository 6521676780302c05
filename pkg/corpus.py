"""
Worked-Example Corpus
The particle in a potential with its translation, rotation and time
translation symmetries; Chern-Simons theory with its gauge symmetry,
expanded componentwise; and the classical phase space T*R^3 with the
rotation action.
"""

from functools import cached_property
from typing import Dict, List

import sympy

from bicomplex import BigradedForm, Bicomplex, Generator, JetVectorField
from jetcore import FieldGroup, FieldSample, JetSpace, MultiIndex
from lft import LieValuedForm, TheoryDef, premultisymplectic
from linfty import ActionSpec, LieAlgebraSpec, MomentumMapSpec, SlotParameters
from reduction import integrate_newton

POTENTIALS = ("symbolic", "free", "harmonic")

# [e_a, e_b] = -eps_abc e_c, the bracket for which a -> (q -> a x q) is a homomorphism
SO3_BRACKETS = {
    ("e1", "e2"): {"e3": -1},
    ("e2", "e3"): {"e1": -1},
    ("e3", "e1"): {"e2": -1},
}


def so3(name: str = "so3", local: bool = False) -> LieAlgebraSpec:
    identity = [[1 if i == j else 0 for j in range(3)] for i in range(3)]
    return LieAlgebraSpec.from_brackets(name, ["e1", "e2", "e3"], SO3_BRACKETS, local=local,
                                         kappa=identity)


def cross(a: List, b: List) -> List:
    return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]


class Mechanics:
    """A particle in R^3 with Lagrangian 1/2 |q'|^2 - V(q)"""

    def __init__(self, potential: str = "symbolic", order: int = 4):
        if potential not in POTENTIALS:
            raise ValueError(f"potential must be one of {POTENTIALS}")
        self.potential_kind = potential
        functions = {"V": 3} if potential == "symbolic" else {}
        self.space = JetSpace(["t"], [FieldGroup.vector("q", 3)], order=order, functions=functions)
        self.bicomplex = Bicomplex(self.space)
        self.t = self.space.base_symbol(0)
        self.q = [self.space.field_symbol(a) for a in range(3)]
        self.qd = [self.space.field_symbol(a, MultiIndex((1,))) for a in range(3)]
        self.qdd = [self.space.field_symbol(a, MultiIndex((2,))) for a in range(3)]
        if potential == "symbolic":
            self.V = self.space.functions["V"](*self.q)
            self.grad_V = [self.space.functions["V"].partial(i)(*self.q) for i in range(3)]
        elif potential == "free":
            self.V = sympy.Integer(0)
            self.grad_V = [sympy.Integer(0)] * 3
        else:
            self.V = sum(x ** 2 for x in self.q) / 2
            self.grad_V = list(self.q)
        self.density = sum(v ** 2 for v in self.qd) / 2 - self.V
        self.theory = TheoryDef(f"particle_{potential}", self.space, self.density)

    @cached_property
    def data(self):
        return premultisymplectic(self.theory)

    # --- expected forms -------------------------------------------------------

    def expected_el(self) -> BigradedForm:
        bc = self.bicomplex
        return sum((bc.delta(a) * bc.dx(0) * -(self.qdd[a] + self.grad_V[a]) for a in range(3)),
                   BigradedForm.zero())

    def expected_gamma(self) -> BigradedForm:
        bc = self.bicomplex
        return sum((bc.delta(a) * self.qd[a] for a in range(3)), BigradedForm.zero())

    def expected_omega(self) -> BigradedForm:
        bc = self.bicomplex
        t1 = MultiIndex((1,))
        return self.expected_el() + sum((bc.delta(a, t1) * bc.delta(a) for a in range(3)),
                                        BigradedForm.zero())

    # --- symmetries -------------------------------------------------------------

    @cached_property
    def translation_algebra(self) -> LieAlgebraSpec:
        return LieAlgebraSpec.abelian("R3", ["e1", "e2", "e3"])

    @cached_property
    def rotation_algebra(self) -> LieAlgebraSpec:
        return so3()

    @cached_property
    def time_algebra(self) -> LieAlgebraSpec:
        return LieAlgebraSpec.abelian("R", ["e"])

    @cached_property
    def translation(self) -> ActionSpec:
        fields = {f"e{a + 1}": JetVectorField.build(self.space, {a: 1}, label=f"∂/∂q{a + 1}")
                  for a in range(3)}
        return ActionSpec("translation", self.translation_algebra, fields)

    @cached_property
    def rotation(self) -> ActionSpec:
        fields = {}
        for i in range(3):
            e = [1 if k == i else 0 for k in range(3)]
            Q = cross(e, self.q)
            fields[f"e{i + 1}"] = JetVectorField.build(self.space, dict(enumerate(Q)),
                                                       label=f"e{i + 1}×q")
        return ActionSpec("rotation", self.rotation_algebra, fields)

    @cached_property
    def time_translation(self) -> ActionSpec:
        chi = JetVectorField.build(self.space, {a: -self.qd[a] for a in range(3)}, {0: 1},
                                   label="ξ+∂̂t")
        return ActionSpec("time_translation", self.time_algebra, {"e": chi})

    @cached_property
    def translation_momap(self) -> MomentumMapSpec:
        return MomentumMapSpec("momentum", self.translation,
                               {1: {(a,): BigradedForm.scalar(self.qd[a]) for a in range(3)}})

    @cached_property
    def rotation_momap(self) -> MomentumMapSpec:
        L = cross(self.q, self.qd)
        return MomentumMapSpec("angular_momentum", self.rotation,
                               {1: {(a,): BigradedForm.scalar(L[a]) for a in range(3)}})

    @cached_property
    def time_momap(self) -> MomentumMapSpec:
        energy = sum(v ** 2 for v in self.qd) / 2 + self.V
        return MomentumMapSpec("energy", self.time_translation,
                               {1: {(0,): BigradedForm.scalar(-energy)}})

    def actions(self) -> Dict[str, ActionSpec]:
        return {a.name: a for a in (self.translation, self.rotation, self.time_translation)}

    def momaps(self) -> Dict[str, MomentumMapSpec]:
        return {m.action.name: m for m in (self.translation_momap, self.rotation_momap,
                                          self.time_momap)}

    # --- concrete fields ----------------------------------------------------------

    def path(self, label: str, components) -> FieldSample:
        return FieldSample.closed(label, {f"q{a + 1}": c for a, c in enumerate(components)})

    def paths(self) -> Dict[str, FieldSample]:
        t = self.t
        shapes = {
            "line": (t, 2 * t, 3 * t),
            "diagonal": (t, t, t),
            "parabola": (t ** 2, 0, 0),
            "circle": (sympy.cos(t), sympy.sin(t), 0),
            "rest": (1, 2, 3),
        }
        return {label: self.path(label, c) for label, c in shapes.items()}

    def harmonic_trajectory(self, points: int = 2001, t_span=(0.0, 2.0)) -> FieldSample:
        """RK4 solution of q'' = -q starting on an ellipse"""
        return integrate_newton("harmonic_rk4", self.space.field_names, lambda q: q,
                                [1.0, 0.0, 0.5], [0.0, 2.0, 0.0], t_span, points)


class ChernSimons:
    """
    Chern-Simons theory on R^3 for a Lie algebra with invariant form kappa,
    expanded componentwise: A^alpha = A^alpha_mu dx^mu and
    L = kappa(dA, A) + 1/3 kappa([A, A], A). Gauge parameters live in the
    slots X, Y, Z, W.
    """

    SLOTS = ("X", "Y", "Z", "W")

    def __init__(self, algebra: LieAlgebraSpec, order: int = 3):
        if not algebra.local or algebra.kappa is None:
            raise ValueError("Chern-Simons needs a local algebra with an invariant form")
        self.algebra = algebra
        base = ["x", "y", "z"]
        m = algebra.dim
        fields = [FieldGroup(f"A{a + 1}", tuple(f"A{a + 1}{c}" for c in base)) for a in range(m)]
        params = [FieldGroup(s, tuple(f"{s}{k + 1}" for k in range(m))) for s in self.SLOTS]
        self.space = JetSpace(base, fields, params, order=order)
        self.bicomplex = bc = Bicomplex(self.space)
        self.slots = SlotParameters(self.space, algebra)

        self.A = LieValuedForm(algebra, [
            sum((bc.dx(mu) * self.space.field_symbol(f"A{a + 1}{c}") for mu, c in enumerate(base)),
                BigradedForm.zero())
            for a in range(m)])
        self.dA = self.A.d(bc)
        self.AA = self.A.bracket(self.A)
        lagrangian = self.dA.pair(self.A) + self.AA.pair(self.A) * sympy.Rational(1, 3)
        self.theory = TheoryDef(f"chern_simons_{algebra.name}", self.space,
                                bc.top_coefficient(lagrangian))

    @cached_property
    def data(self):
        return premultisymplectic(self.theory)

    def parameter(self, slot: int) -> LieValuedForm:
        return LieValuedForm.from_scalars(self.algebra, self.slots.vector(slot))

    def curvature(self) -> LieValuedForm:
        return self.dA + self.AA.scale(sympy.Rational(1, 2))

    def expected_el(self) -> BigradedForm:
        return self.A.delta(self.bicomplex).pair(self.curvature()) * 2

    def expected_gamma(self) -> BigradedForm:
        return self.A.delta(self.bicomplex).pair(self.A)

    def expected_omega(self) -> BigradedForm:
        dA = self.A.delta(self.bicomplex)
        return self.expected_el() + dA.pair(dA)

    @cached_property
    def gauge(self) -> ActionSpec:
        """Q_X = dX + [A, X] on the first parameter slot"""
        bc = self.bicomplex
        X = self.parameter(0)
        Q = X.d(bc) + self.A.bracket(X)
        vertical = {}
        for a in range(self.algebra.dim):
            for mu, c in enumerate(self.space.base_names):
                vertical[f"A{a + 1}{c}"] = Q.components[a].coefficient((Generator.dx(mu),))
        template = JetVectorField.build(self.space, vertical, label="dX+[A,X]")
        return ActionSpec("gauge", self.algebra, {self.SLOTS[0]: template}, self.slots)

    def noether_alpha(self) -> BigradedForm:
        """kappa(A, dX)"""
        return self.A.pair(self.parameter(0).d(self.bicomplex))

    def current(self) -> BigradedForm:
        """2 kappa(A, dX) + kappa([A, A], X)"""
        X = self.parameter(0)
        return self.A.pair(X.d(self.bicomplex)) * 2 + self.AA.pair(X)

    @cached_property
    def momap(self) -> MomentumMapSpec:
        bc = self.bicomplex
        X, Y, Z = (self.parameter(j) for j in range(3))
        mu1 = -self.current()
        mu2 = X.pair(Y.d(bc)) * 2
        mu3 = X.pair(Y.bracket(Z)) * 2
        return MomentumMapSpec("chern_simons", self.gauge,
                               {1: {(0,): mu1}, 2: {(0, 1): mu2}, 3: {(0, 1, 2): mu3}})


class PhaseSpace:
    """T*R^3 as a jet-free space over a point, omega = dp_i ^ dq^i, rotation action"""

    def __init__(self):
        self.space = JetSpace([], [FieldGroup.vector("q", 3), FieldGroup.vector("p", 3)], order=0)
        self.bicomplex = bc = Bicomplex(self.space)
        self.q = [self.space.field_symbol(f"q{a + 1}") for a in range(3)]
        self.p = [self.space.field_symbol(f"p{a + 1}") for a in range(3)]
        omega = sum((bc.delta(f"p{a + 1}") * bc.delta(f"q{a + 1}") for a in range(3)),
                    BigradedForm.zero())
        self.theory = TheoryDef("phase_space", self.space, 0, omega=omega)

    @cached_property
    def data(self):
        return premultisymplectic(self.theory)

    @cached_property
    def rotation(self) -> ActionSpec:
        fields = {}
        for i in range(3):
            e = [1 if k == i else 0 for k in range(3)]
            vertical = {f"q{a + 1}": v for a, v in enumerate(cross(e, self.q))}
            vertical.update({f"p{a + 1}": v for a, v in enumerate(cross(e, self.p))})
            fields[f"e{i + 1}"] = JetVectorField.build(self.space, vertical, label=f"e{i + 1}")
        return ActionSpec("rotation", so3(), fields)

    @cached_property
    def momap(self) -> MomentumMapSpec:
        L = cross(self.q, self.p)
        return MomentumMapSpec("angular_momentum", self.rotation,
                               {1: {(a,): BigradedForm.scalar(L[a]) for a in range(3)}})


def main():
    """Print the corpus premultisymplectic forms"""
    mech = Mechanics()
    cs = ChernSimons(LieAlgebraSpec.abelian("u1", ["T1"], local=True, kappa=[[1]]), order=2)
    print("📊 EXAMPLE CORPUS")
    print("=" * 50)
    print(f"particle ω      = {mech.bicomplex.render(mech.data.omega)}")
    print(f"Chern-Simons L  = {cs.theory.density}")
    print(f"Chern-Simons γ  = {cs.bicomplex.render(cs.data.gamma)}")


if __name__ == "__main__":
    main()
