"""
Lagrangian Field Theory Layer
Euler-Lagrange form, boundary form, premultisymplectic form, Noether and
manifest symmetry checks, Noether currents and Lie-algebra-valued forms.
"""

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import sympy

from bicomplex import BigradedForm, Bicomplex, JetVectorField, wedge
from jetcore import (FIELD, PARAM, FieldGroup, HomotopyError, JetSpace, JetVar, MultiIndex,
                     PreconditionError, VerificationError, normalize, total_derivative,
                     total_derivative_multi)


@dataclass
class TheoryDef:
    """
    A local Lagrangian L = density * vol on a truncated jet space.

    ``gamma`` overrides the integration-by-parts boundary form. ``omega``
    supplies the closed form directly for jet-free phase spaces (base
    dimension 0), where no Lagrangian picture exists.
    """
    name: str
    space: JetSpace
    density: sympy.Expr = sympy.Integer(0)
    gamma: Optional[BigradedForm] = None
    omega: Optional[BigradedForm] = None
    bicomplex: Bicomplex = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.density = normalize(self.density, self.space)
        self.bicomplex = Bicomplex(self.space)

    @property
    def dim(self) -> int:
        return self.space.dim

    def lagrangian(self) -> BigradedForm:
        if self.space.dim == 0:
            return BigradedForm.zero()
        return self.bicomplex.volume() * self.density


@dataclass
class MultisymplecticData:
    el: BigradedForm
    gamma: BigradedForm
    omega: BigradedForm
    lagrangian: BigradedForm

    @property
    def lepage(self) -> BigradedForm:
        return self.lagrangian + self.gamma


def euler_operator(space: JetSpace, expr, a: int, kind: str = FIELD) -> sympy.Expr:
    """E_a(f) = sum_I (-D)_I df/du^a_I"""
    total = sympy.Integer(0)
    for s in space.jets_of_kind(expr, kind):
        var = space.jet_var(s)
        if var.index != a:
            continue
        term = total_derivative_multi(space, sympy.diff(expr, s), var.multi)
        total += (-1) ** var.multi.order * term
    return sympy.expand(total)


def integrate_by_parts(space: JetSpace, coefficients: Dict[sympy.Symbol, sympy.Expr],
                       kind: str = FIELD):
    """
    Rewrite sum c_I du_I ^ vol as sum E_a du^a ^ vol - d_h(sum_mu B^mu ^ i_mu vol).

    Keys are processed from the highest jet order down; c du_{J+mu} moves
    to -D_mu(c) du_J with mu the first nonzero index. Returns the source
    coefficients E_a and, per base index mu, the flux coefficients of du_J.
    """
    work: Dict[Tuple[int, MultiIndex], sympy.Expr] = defaultdict(lambda: sympy.Integer(0))
    for s, c in coefficients.items():
        var = space.jet_var(s)
        work[(var.index, var.multi)] += c
    source: Dict[int, sympy.Expr] = defaultdict(lambda: sympy.Integer(0))
    flux: List[Dict[Tuple[int, MultiIndex], sympy.Expr]] = [
        defaultdict(lambda: sympy.Integer(0)) for _ in range(space.dim)]
    while work:
        key = max(work, key=lambda k: (k[1].order, k[0], k[1].exponents))
        a, I = key
        c = sympy.expand(work.pop(key))
        if c == 0:
            continue
        if I.order == 0:
            source[a] += c
            continue
        mu = I.first_index()
        J = I.lowered(mu)
        flux[mu][(a, J)] += c
        work[(a, J)] -= total_derivative(space, c, mu)
    return dict(source), [dict(f) for f in flux]


def euler_lagrange(theory: TheoryDef) -> BigradedForm:
    space, bc = theory.space, theory.bicomplex
    if space.dim == 0:
        return BigradedForm.zero()
    out = BigradedForm.zero()
    for a in range(len(space.field_names)):
        E = euler_operator(space, theory.density, a)
        if E != 0:
            out = out + bc.delta(a) * bc.volume() * E
    return out


def boundary_form(theory: TheoryDef) -> BigradedForm:
    """gamma with d_v L = EL - d_h gamma, verified before returning"""
    space, bc = theory.space, theory.bicomplex
    if space.dim == 0:
        return theory.gamma if theory.gamma is not None else BigradedForm.zero()
    if theory.gamma is not None:
        gamma = theory.gamma
    else:
        coefficients = {s: sympy.diff(theory.density, s)
                        for s in space.jets_of_kind(theory.density, FIELD)}
        _, flux = integrate_by_parts(space, coefficients)
        gamma = BigradedForm.zero()
        for mu, entries in enumerate(flux):
            for (a, J), c in entries.items():
                gamma = gamma + bc.delta(a, J) * bc.interior_volume(mu) * c
    residual = bc.d_v(theory.lagrangian()) - euler_lagrange(theory) + bc.d_h(gamma)
    if not residual.is_zero:
        raise VerificationError(
            f"δL - EL + dγ = {bc.render(residual)} for theory {theory.name}")
    return gamma


def premultisymplectic(theory: TheoryDef) -> MultisymplecticData:
    bc = theory.bicomplex
    el = euler_lagrange(theory)
    gamma = boundary_form(theory)
    if theory.omega is not None:
        omega = theory.omega
    else:
        omega = el + bc.d_v(gamma)
        lepage = theory.lagrangian() + gamma
        if not (bc.d(lepage) - omega).is_zero:
            raise VerificationError(f"d(L+γ) differs from EL + δγ for theory {theory.name}")
    closure = bc.d(omega)
    if not closure.is_zero:
        raise VerificationError(f"ω is not closed for theory {theory.name}: {bc.render(closure)}")
    return MultisymplecticData(el=el, gamma=gamma, omega=omega, lagrangian=theory.lagrangian())


# --- horizontal homotopy ------------------------------------------------------

def _homotopy_stage(bc: Bicomplex, f: sympy.Expr, kind: str) -> BigradedForm:
    space = bc.space
    jets = space.jets_of_kind(f, kind)
    if not jets:
        return BigradedForm.zero()
    if not f.is_polynomial(*jets):
        raise HomotopyError(f"density is not polynomial in the {kind} jets: {f}")
    _, flux = integrate_by_parts(space, {s: sympy.diff(f, s) for s in jets}, kind)
    lam = sympy.Dummy("lam")
    alpha = BigradedForm.zero()
    for mu, entries in enumerate(flux):
        P = sum((c * space.symbol(JetVar(kind, a, J)) for (a, J), c in entries.items()),
                sympy.Integer(0))
        P = sympy.expand(P)
        if P == 0:
            continue
        scaled = P.xreplace({s: lam * s for s in space.jets_of_kind(P, kind)})
        A = sympy.integrate(sympy.expand(scaled / lam), (lam, 0, 1))
        if A.has(sympy.Integral) or A.has(lam):
            raise HomotopyError(f"homotopy integral did not close for {P}")
        alpha = alpha + bc.interior_volume(mu) * sympy.expand(A)
    return alpha


def _base_primitive(bc: Bicomplex, g: sympy.Expr) -> BigradedForm:
    space = bc.space
    n = space.dim
    lam = sympy.Dummy("lam")
    scaled = g.xreplace({x: lam * x for x in space.base_symbols})
    h = sympy.integrate(sympy.expand(lam ** (n - 1) * scaled), (lam, 0, 1))
    if h.has(sympy.Integral):
        raise HomotopyError(f"cannot integrate base density {g}")
    alpha = BigradedForm.zero()
    for mu in range(n):
        alpha = alpha + bc.interior_volume(mu) * sympy.expand(space.base_symbol(mu) * h)
    return alpha


def horizontal_primitive(bc: Bicomplex, density) -> BigradedForm:
    """
    alpha with d_h alpha = density * vol, for densities in the kernel of
    the Euler operator. Fields, then parameter jets, then the base.
    """
    space = bc.space
    if space.dim == 0:
        raise PreconditionError("horizontal primitives need a base of positive dimension")
    rest = normalize(density, space)
    alpha = BigradedForm.zero()
    for kind in (FIELD, PARAM):
        zeroed = sympy.expand(rest.xreplace({s: 0 for s in space.jets_of_kind(rest, kind)}))
        part = sympy.expand(rest - zeroed)
        if part != 0:
            alpha = alpha + _homotopy_stage(bc, part, kind)
        rest = zeroed
    if rest != 0:
        alpha = alpha + _base_primitive(bc, rest)
    if not (bc.d_h(alpha) - bc.volume() * normalize(density, space)).is_zero:
        raise VerificationError("homotopy primitive does not reproduce the density")
    return alpha


# --- symmetries -----------------------------------------------------------------

@dataclass
class NoetherResult:
    label: str
    is_symmetry: bool
    alpha: Optional[BigradedForm]
    variation: BigradedForm
    euler_image: Dict[str, sympy.Expr] = field(default_factory=dict)


def is_noether_symmetry(theory: TheoryDef, chi: JetVectorField,
                        alpha: Optional[BigradedForm] = None) -> NoetherResult:
    """Decide whether L_chi L is d_h-exact and build the primitive alpha"""
    space, bc = theory.space, theory.bicomplex
    if not chi.is_vertical:
        raise PreconditionError(f"{chi.label or 'field'} is not strictly vertical")
    variation = bc.lie_derivative(chi, theory.lagrangian())
    if alpha is not None:
        ok = (bc.d_h(alpha) - variation).is_zero
        return NoetherResult(chi.label, ok, alpha if ok else None, variation)

    f = bc.top_coefficient(variation)
    image = {}
    for a, name in enumerate(space.field_names):
        E = euler_operator(space, f, a)
        if E != 0:
            image[name] = E
    if not image:
        f0 = sympy.expand(f.xreplace({s: 0 for s in space.jets_of_kind(f, FIELD)}))
        for k, name in enumerate(space.param_names):
            E = euler_operator(space, f0, k, PARAM)
            if E != 0:
                image[name] = E
    if image:
        return NoetherResult(chi.label, False, None, variation, image)
    primitive = horizontal_primitive(bc, f) if f != 0 else BigradedForm.zero()
    return NoetherResult(chi.label, True, primitive, variation)


@dataclass
class CurrentCandidate:
    sign: int
    form: BigradedForm
    passed: bool
    residual: BigradedForm


@dataclass
class NoetherCurrent:
    label: str
    current: BigradedForm
    conservation_residual: BigradedForm
    candidates: List[CurrentCandidate]

    @property
    def momentum_candidate(self) -> Optional[CurrentCandidate]:
        """The sign choice for which the current satisfies i_chi omega = -d mu"""
        for c in self.candidates:
            if c.passed:
                return c
        return None


def noether_current(theory: TheoryDef, chi: JetVectorField, alpha: BigradedForm,
                    data: Optional[MultisymplecticData] = None) -> NoetherCurrent:
    """j = alpha - i_chi gamma with d_h j = i_chi EL verified"""
    bc = theory.bicomplex
    data = data or premultisymplectic(theory)
    j = alpha - bc.contract(chi, data.gamma)
    residual = bc.d_h(j) - bc.contract(chi, data.el)
    if not residual.is_zero:
        raise VerificationError(
            f"current of {chi.label} is not conserved: {bc.render(residual)}")
    candidates = []
    contracted = bc.contract(chi, data.omega)
    for sign in (1, -1):
        mu = j * sign
        r = contracted + bc.d(mu)
        candidates.append(CurrentCandidate(sign, mu, r.is_zero, r))
    return NoetherCurrent(chi.label, j, residual, candidates)


@dataclass
class ManifestReport:
    label: str
    manifest: bool
    decomposition: str
    decomposition_ok: bool
    lepage_variation: BigradedForm


def is_manifest(theory: TheoryDef, chi: JetVectorField,
                data: Optional[MultisymplecticData] = None) -> ManifestReport:
    bc = theory.bicomplex
    data = data or premultisymplectic(theory)
    prolongation = bc.prolongation_check(chi)
    variation = bc.lie_derivative(chi, data.lepage)
    return ManifestReport(chi.label, prolongation.passed and variation.is_zero,
                          prolongation.decomposition, prolongation.passed, variation)


@dataclass
class InvarianceEntry:
    label: str
    omega: BigradedForm
    lagrangian: BigradedForm
    lepage: BigradedForm

    @property
    def preserves_omega(self) -> bool:
        return self.omega.is_zero


def invariance_report(theory: TheoryDef, fields: Dict[str, JetVectorField],
                      data: Optional[MultisymplecticData] = None) -> List[InvarianceEntry]:
    """L_X omega, L_X L and L_X (L + gamma) for each field of an action"""
    bc = theory.bicomplex
    data = data or premultisymplectic(theory)
    entries = []
    for label, X in fields.items():
        entries.append(InvarianceEntry(
            label,
            omega=bc.lie_derivative(X, data.omega),
            lagrangian=bc.lie_derivative(X, data.lagrangian),
            lepage=bc.lie_derivative(X, data.lepage),
        ))
    return entries


# --- Lie-algebra-valued forms --------------------------------------------------------

class LieValuedForm:
    """
    A g-valued form expanded against a basis: one BigradedForm per basis
    element. Brackets use the algebra's structure constants, pairings its
    invariant form kappa.
    """

    def __init__(self, algebra, components: Sequence[BigradedForm]):
        if len(components) != algebra.dim:
            raise PreconditionError(
                f"{algebra.name} has dimension {algebra.dim}, got {len(components)} components")
        self.algebra = algebra
        self.components = tuple(components)

    @classmethod
    def from_scalars(cls, algebra, exprs: Sequence) -> "LieValuedForm":
        return cls(algebra, [BigradedForm.scalar(e) for e in exprs])

    def __add__(self, other: "LieValuedForm") -> "LieValuedForm":
        return LieValuedForm(self.algebra, [a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "LieValuedForm") -> "LieValuedForm":
        return LieValuedForm(self.algebra, [a - b for a, b in zip(self.components, other.components)])

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c) -> "LieValuedForm":
        return LieValuedForm(self.algebra, [f * c for f in self.components])

    def d(self, bc: Bicomplex) -> "LieValuedForm":
        """Spacetime differential, componentwise d_h"""
        return LieValuedForm(self.algebra, [bc.d_h(f) for f in self.components])

    def delta(self, bc: Bicomplex) -> "LieValuedForm":
        """Field variation, componentwise d_v"""
        return LieValuedForm(self.algebra, [bc.d_v(f) for f in self.components])

    def bracket(self, other: "LieValuedForm") -> "LieValuedForm":
        m = self.algebra.dim
        out = [BigradedForm.zero() for _ in range(m)]
        for a in range(m):
            for b in range(m):
                if self.components[a].is_zero or other.components[b].is_zero:
                    continue
                structure = self.algebra.bracket(a, b)
                if not structure:
                    continue
                product = wedge(self.components[a], other.components[b])
                for c, value in structure.items():
                    out[c] = out[c] + product * value
        return LieValuedForm(self.algebra, out)

    def pair(self, other: "LieValuedForm") -> BigradedForm:
        kappa = self.algebra.kappa
        out = BigradedForm.zero()
        for a in range(self.algebra.dim):
            for b in range(self.algebra.dim):
                if kappa[a][b] != 0:
                    out = out + wedge(self.components[a], other.components[b]) * kappa[a][b]
        return out

    def contract(self, bc: Bicomplex, X: JetVectorField) -> "LieValuedForm":
        return LieValuedForm(self.algebra, [bc.contract(X, f) for f in self.components])

    def xreplace(self, mapping: Dict) -> "LieValuedForm":
        return LieValuedForm(self.algebra, [f.xreplace(mapping) for f in self.components])

    def __eq__(self, other):
        return (isinstance(other, LieValuedForm)
                and all(a == b for a, b in zip(self.components, other.components)))

    __hash__ = None


def main():
    """Print the particle premultisymplectic data"""
    space = JetSpace(["t"], [FieldGroup.vector("q", 3)], functions={"V": 3})
    q = [space.field_symbol(a) for a in range(3)]
    qd = [space.field_symbol(a, MultiIndex((1,))) for a in range(3)]
    density = sum(v ** 2 for v in qd) / 2 - space.functions["V"](*q)
    theory = TheoryDef("particle", space, density)
    data = premultisymplectic(theory)
    bc = theory.bicomplex
    print("📊 PARTICLE IN A POTENTIAL")
    print("=" * 50)
    print(f"EL = {bc.render(data.el)}")
    print(f"γ  = {bc.render(data.gamma)}")
    print(f"ω  = {bc.render(data.omega)}")


if __name__ == "__main__":
    main()
