"""
Obstruction Double Complex
Lie-algebra cochains with values in jet-space forms, the differentials
d_g and d_X, bar maps, and the closedness / primitivity checks that decide
whether an action admits a given homotopy momentum map.
"""

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import pandas as pd

from bicomplex import BigradedForm, Bicomplex
from jetcore import PreconditionError
from linfty import (ActionSpec, LieAlgebraSpec, MomentumMapSpec, sign_of, sort_with_sign,
                    verify_momap)


@dataclass
class GCochain:
    """Alternating map from basis wedges of length ``arity`` to forms"""
    arity: int
    values: Dict[Tuple[int, ...], BigradedForm] = field(default_factory=dict)

    def __post_init__(self):
        self.values = {k: v for k, v in sorted(self.values.items()) if not v.is_zero}
        for key in self.values:
            if len(key) != self.arity or list(key) != sorted(set(key)):
                raise PreconditionError(f"cochain keys must be increasing {self.arity}-tuples")

    def value(self, indices) -> BigradedForm:
        s, key = sort_with_sign(tuple(indices))
        if not s:
            return BigradedForm.zero()
        return self.values.get(key, BigradedForm.zero()) * s

    @property
    def is_zero(self) -> bool:
        return not self.values

    def __add__(self, other: "GCochain") -> "GCochain":
        if other.arity != self.arity:
            raise PreconditionError("cannot add cochains of different arity")
        keys = set(self.values) | set(other.values)
        return GCochain(self.arity, {k: self.values.get(k, BigradedForm.zero())
                                     + other.values.get(k, BigradedForm.zero()) for k in keys})

    def scale(self, c) -> "GCochain":
        return GCochain(self.arity, {k: v * c for k, v in self.values.items()})

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other: "GCochain") -> "GCochain":
        return self + (-other)


class CochainSum:
    """Formal sum of cochains of different arities"""

    def __init__(self, parts: Optional[Dict[int, GCochain]] = None):
        self.parts: Dict[int, GCochain] = {}
        for p, c in sorted((parts or {}).items()):
            if not c.is_zero:
                self.parts[p] = c

    def component(self, p: int) -> GCochain:
        return self.parts.get(p, GCochain(p))

    def arities(self) -> List[int]:
        return sorted(self.parts)

    def __add__(self, other: "CochainSum") -> "CochainSum":
        keys = set(self.parts) | set(other.parts)
        return CochainSum({p: self.component(p) + other.component(p) for p in keys})

    def __neg__(self):
        return CochainSum({p: -c for p, c in self.parts.items()})

    def __sub__(self, other: "CochainSum") -> "CochainSum":
        return self + (-other)

    @property
    def is_zero(self) -> bool:
        return not self.parts


def d_g(c: GCochain, algebra: LieAlgebraSpec) -> GCochain:
    """(d_g c)(a) = c(delta_CE a)"""
    values = {}
    for idx in itertools.combinations(range(algebra.dim), c.arity + 1):
        total = BigradedForm.zero()
        for key, coeff in algebra.ce_boundary(idx).items():
            total = total + c.value(key) * coeff
        values[idx] = total
    return GCochain(c.arity + 1, values)


def d_X(c: GCochain, bc: Bicomplex) -> GCochain:
    """(d_X c)(a) = (-1)^p d(c(a))"""
    return GCochain(c.arity, {k: bc.d(v) * (-1) ** c.arity for k, v in c.values.items()})


def d_bar(total: CochainSum, algebra: LieAlgebraSpec, bc: Bicomplex) -> CochainSum:
    out = CochainSum()
    for c in total.parts.values():
        out = out + CochainSum({c.arity + 1: d_g(c, algebra)}) + CochainSum({c.arity: d_X(c, bc)})
    return out


@dataclass
class BarMap:
    components: Dict[int, GCochain]
    total: CochainSum


def bar_map(bc: Bicomplex, beta: BigradedForm, action: ActionSpec) -> BarMap:
    """beta_i(a_1..a_i) = i_{rho(a_i)}...i_{rho(a_1)} beta, assembled as sum (-1)^{i-1} beta_i"""
    if action.algebra.local:
        raise PreconditionError("bar maps are computed for global actions")
    m = max(beta.total_degrees(), default=0)
    components = {}
    total = CochainSum()
    for i in range(1, m + 1):
        values = {idx: bc.contract_all([action.field_for(a) for a in idx], beta)
                  for idx in itertools.combinations(range(action.algebra.dim), i)}
        components[i] = GCochain(i, values)
        total = total + CochainSum({i: components[i].scale((-1) ** (i - 1))})
    return BarMap(components, total)


def mu_bar(momap: MomentumMapSpec) -> CochainSum:
    """sum -(-1)^{i(i+1)/2} mu_i"""
    return CochainSum({i: GCochain(i, values).scale(-sign_of(i))
                       for i, values in momap.components.items()})


def extract_momap(nu: CochainSum, action: ActionSpec, name: str = "extracted") -> MomentumMapSpec:
    """Components mu_i = -(-1)^{i(i+1)/2} nu_i of a primitive nu of the bar map of omega"""
    return MomentumMapSpec(name, action, {i: dict(c.scale(-sign_of(i)).values)
                                          for i, c in nu.parts.items()})


@dataclass
class ObstructionReport:
    action: str
    closed: bool
    closure: CochainSum
    primitive: Optional[bool] = None
    primitive_residual: Optional[CochainSum] = None
    momap_passed: Optional[bool] = None

    @property
    def consistent(self) -> bool:
        """Primitivity and the relation-by-relation check agree"""
        return self.primitive is None or self.primitive == self.momap_passed

    def table(self) -> pd.DataFrame:
        rows = []
        for label, total in (("d̄ω̄", self.closure), ("d̄μ̄ - ω̄", self.primitive_residual)):
            if total is None:
                continue
            for p in total.arities():
                rows.append({"check": label, "arity": p,
                             "nonzero values": len(total.component(p).values)})
        return pd.DataFrame(rows, columns=["check", "arity", "nonzero values"])


def check_obstruction(bc: Bicomplex, action: ActionSpec, omega: BigradedForm,
                      momap: Optional[MomentumMapSpec] = None) -> ObstructionReport:
    """
    Closedness of the bar map of omega under d_g + d_X and, for a supplied
    momentum map, primitivity d̄μ̄ = ω̄ cross-checked against verify_momap.
    """
    algebra = action.algebra
    bar = bar_map(bc, omega, action)
    closure = d_bar(bar.total, algebra, bc)
    report = ObstructionReport(action.name, closure.is_zero, closure)
    if momap is not None:
        residual = d_bar(mu_bar(momap), algebra, bc) - bar.total
        report.primitive = residual.is_zero
        report.primitive_residual = residual
        report.momap_passed = verify_momap(bc, momap, omega).passed
    return report


def main():
    """Closedness of the free-particle ω under translations"""
    from corpus import Mechanics
    mech = Mechanics(potential="free")
    report = check_obstruction(mech.bicomplex, mech.translation, mech.data.omega, mech.translation_momap)
    print("📊 OBSTRUCTION CHECK: translation")
    print("=" * 50)
    print(f"{'✅' if report.closed else '❌'} d̄ω̄ = 0")
    print(f"{'✅' if report.primitive else '❌'} d̄μ̄ = ω̄")
    print(f"{'✅' if report.consistent else '❌'} agrees with relation check")


if __name__ == "__main__":
    main()
