"""
Tests for the Lagrangian layer: EL, boundary and premultisymplectic forms,
Noether and manifest symmetries, currents
"""

import sys

import pytest
import sympy

from bicomplex import BigradedForm
from corpus import ChernSimons, Mechanics, PhaseSpace, so3
from jetcore import MultiIndex, PreconditionError, VerificationError, total_derivative
from lft import (LieValuedForm, TheoryDef, euler_operator, horizontal_primitive, invariance_report,
                 is_manifest, is_noether_symmetry, noether_current, premultisymplectic)
from linfty import LieAlgebraSpec
from testkit import run_all


def test_particle_golden_forms():
    mech = Mechanics("symbolic")
    data = mech.data
    assert data.el == mech.expected_el()
    assert data.gamma == mech.expected_gamma()
    assert data.omega == mech.expected_omega()


def test_free_particle_rendering():
    mech = Mechanics("free")
    bc = mech.bicomplex
    assert bc.render(mech.data.el) == "-q1_tt·δq1∧dt + -q2_tt·δq2∧dt + -q3_tt·δq3∧dt"
    assert bc.render(mech.data.gamma) == "q1_t·δq1 + q2_t·δq2 + q3_t·δq3"


def test_euler_operator_with_potential():
    mech = Mechanics("symbolic")
    V = mech.space.functions["V"]
    E = euler_operator(mech.space, mech.density, 0)
    assert sympy.expand(E + mech.qdd[0] + V.partial(0)(*mech.q)) == 0


def test_variational_identity_and_closure():
    for potential in ("free", "harmonic", "symbolic"):
        mech = Mechanics(potential)
        bc = mech.bicomplex
        data = mech.data
        assert (bc.d_v(data.lagrangian) - data.el + bc.d_h(data.gamma)).is_zero
        assert bc.d(data.omega).is_zero
        assert bc.d(data.lepage) == data.omega


def test_inconsistent_boundary_form_is_reported():
    mech = Mechanics("free")
    theory = TheoryDef("wrong_gamma", mech.space, mech.density, gamma=BigradedForm.zero())
    with pytest.raises(VerificationError):
        premultisymplectic(theory)


def test_phase_space_uses_given_omega():
    ps = PhaseSpace()
    data = ps.data
    assert data.el.is_zero
    assert data.lagrangian.is_zero
    assert data.omega.degree == 2


def test_translations_are_noether_for_free_particle():
    mech = Mechanics("free")
    for chi in mech.translation.basis_fields():
        result = is_noether_symmetry(mech.theory, chi)
        assert result.is_symmetry
        assert result.alpha.is_zero


def test_translation_fails_for_harmonic_potential():
    mech = Mechanics("harmonic")
    result = is_noether_symmetry(mech.theory, mech.translation.field_for(0))
    assert not result.is_symmetry
    assert result.alpha is None
    assert result.euler_image == {"q1": -1}


def test_rotation_is_noether_in_central_potential():
    mech = Mechanics("harmonic")
    for chi in mech.rotation.basis_fields():
        assert is_noether_symmetry(mech.theory, chi).is_symmetry


def test_supplied_primitive_is_checked():
    mech = Mechanics("free")
    chi = mech.translation.field_for(0)
    assert is_noether_symmetry(mech.theory, chi, BigradedForm.zero()).is_symmetry
    wrong = BigradedForm.scalar(mech.q[0])
    assert not is_noether_symmetry(mech.theory, chi, wrong).is_symmetry


def test_noether_requires_vertical_field():
    mech = Mechanics("free")
    with pytest.raises(PreconditionError):
        is_noether_symmetry(mech.theory, mech.time_translation.field_for(0))


def test_translation_current_and_momentum_sign():
    mech = Mechanics("free")
    chi = mech.translation.field_for(0)
    current = noether_current(mech.theory, chi, BigradedForm.zero(), mech.data)
    assert current.current == BigradedForm.scalar(-mech.qd[0])
    assert current.conservation_residual.is_zero
    candidate = current.momentum_candidate
    assert candidate.sign == -1
    assert candidate.form == BigradedForm.scalar(mech.qd[0])


def test_time_translation_is_manifest():
    mech = Mechanics("symbolic")
    report = is_manifest(mech.theory, mech.time_translation.field_for(0), mech.data)
    assert report.manifest
    assert report.decomposition == "vertical + horizontal"


def test_harmonic_translation_is_not_manifest():
    mech = Mechanics("harmonic")
    assert not is_manifest(mech.theory, mech.translation.field_for(0), mech.data).manifest


def test_invariance_report():
    mech = Mechanics("harmonic")
    rotation = invariance_report(mech.theory, dict(zip(mech.rotation_algebra.basis,
                                                       mech.rotation.basis_fields())))
    assert all(e.preserves_omega for e in rotation)
    translation = invariance_report(mech.theory, {"e1": mech.translation.field_for(0)}, mech.data)
    assert not translation[0].preserves_omega


def test_horizontal_primitive_of_total_derivative():
    mech = Mechanics("free")
    bc = mech.bicomplex
    density = total_derivative(mech.space, mech.q[0] * mech.qd[0], 0)
    alpha = horizontal_primitive(bc, density)
    assert bc.d_h(alpha) == bc.volume() * density


def test_lie_valued_forms():
    u1 = LieAlgebraSpec.abelian("u1", ["T1"], local=True, kappa=[[1]])
    cs = ChernSimons(u1, order=2)
    assert all(c.is_zero for c in cs.AA.components)
    algebra = so3(local=True)
    bc = cs.bicomplex
    x = LieValuedForm(algebra, [bc.dx(0), BigradedForm.zero(), BigradedForm.zero()])
    y = LieValuedForm(algebra, [BigradedForm.zero(), bc.dx(1), BigradedForm.zero()])
    assert x.bracket(y) == LieValuedForm(algebra, [BigradedForm.zero(), BigradedForm.zero(),
                                                   bc.dx(0) * bc.dx(1) * -1])
    assert x.pair(x).is_zero


def test_chern_simons_golden_forms_abelian():
    u2 = LieAlgebraSpec.abelian("u2", ["T1", "T2"], local=True, kappa=[[1, 0], [0, 1]])
    cs = ChernSimons(u2, order=2)
    assert cs.data.el == cs.expected_el()
    assert cs.data.gamma == cs.expected_gamma()
    assert cs.data.omega == cs.expected_omega()


def test_chern_simons_golden_forms_so3():
    cs = ChernSimons(so3(local=True), order=2)
    assert cs.data.el == cs.expected_el()
    assert cs.data.gamma == cs.expected_gamma()


def assert_gauge_is_noether_not_manifest(cs):
    chi = cs.gauge.field_for(0)
    result = is_noether_symmetry(cs.theory, chi)
    assert result.is_symmetry
    assert cs.bicomplex.d_h(result.alpha) == result.variation
    assert result.alpha == cs.noether_alpha()
    current = noether_current(cs.theory, chi, result.alpha, cs.data)
    assert current.current == cs.current()
    assert current.conservation_residual.is_zero
    assert not is_manifest(cs.theory, chi, cs.data).manifest


def test_chern_simons_gauge_is_noether_abelian():
    u1 = LieAlgebraSpec.abelian("u1", ["T1"], local=True, kappa=[[1]])
    assert_gauge_is_noether_not_manifest(ChernSimons(u1, order=2))


def test_chern_simons_gauge_is_noether_so3():
    assert_gauge_is_noether_not_manifest(ChernSimons(so3(local=True), order=2))


if __name__ == "__main__":
    sys.exit(0 if run_all(globals(), "LAGRANGIAN LAYER TESTS") else 1)
