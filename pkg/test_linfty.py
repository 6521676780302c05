"""
Tests for Lie algebras, actions and homotopy momentum map verification
"""

import sys

import pytest

from bicomplex import BigradedForm
from corpus import SO3_BRACKETS, ChernSimons, Mechanics, PhaseSpace, so3
from jetcore import DegreeError, LieAlgebraError
from linfty import (ActionSpec, HamiltonianPair, LieAlgebraSpec, MomentumMapSpec, bracket_defect,
                    canonical_momap, hamiltonian_check, l_bracket, sign_of, sort_with_sign,
                    verify_momap)
from testkit import run_all


def test_signs():
    assert [sign_of(i) for i in range(1, 5)] == [-1, -1, 1, 1]
    assert sort_with_sign((2, 0, 1)) == (1, (0, 1, 2))
    assert sort_with_sign((1, 0)) == (-1, (0, 1))
    assert sort_with_sign((1, 1))[0] == 0


def test_structure_constants_are_completed_antisymmetrically():
    algebra = so3()
    assert algebra.bracket(1, 0) == {2: 1}
    assert not algebra.is_abelian
    assert LieAlgebraSpec.abelian("R2", ["a", "b"]).is_abelian


def test_chevalley_eilenberg_boundary():
    algebra = so3()
    assert algebra.ce_boundary((0, 1)) == {(2,): 1}
    assert algebra.ce_boundary((0,)) == {}


def test_jacobi_violation_rejected():
    with pytest.raises(LieAlgebraError):
        LieAlgebraSpec.from_brackets("bad", ["a", "b", "c"],
                                     {("a", "b"): {"a": 1}, ("b", "c"): {"b": 1}})


def test_non_invariant_form_rejected():
    with pytest.raises(LieAlgebraError):
        LieAlgebraSpec.from_brackets("so3", ["e1", "e2", "e3"], SO3_BRACKETS,
                                     kappa=[[1, 0, 0], [0, 2, 0], [0, 0, 1]])


def test_unknown_basis_in_bracket():
    with pytest.raises(LieAlgebraError):
        LieAlgebraSpec.from_brackets("bad", ["a"], {("a", "z"): {"a": 1}})


def test_action_must_cover_basis():
    mech = Mechanics("free")
    with pytest.raises(LieAlgebraError):
        ActionSpec("partial", mech.translation_algebra, {"e1": mech.translation.field_for(0)})


def test_rotation_action_is_a_homomorphism():
    mech = Mechanics("free")
    bc = mech.bicomplex
    assert mech.rotation.check_bracket_compatibility(bc) == []
    flipped = LieAlgebraSpec.from_brackets(
        "so3_flipped", ["e1", "e2", "e3"],
        {k: {b: -c for b, c in v.items()} for k, v in SO3_BRACKETS.items()})
    wrong = ActionSpec("rotation", flipped, mech.rotation.fields)
    assert len(wrong.check_bracket_compatibility(bc)) == 3


def test_mechanics_momentum_maps_pass():
    free = Mechanics("free")
    for momap in (free.translation_momap, free.rotation_momap):
        report = verify_momap(free.bicomplex, momap, free.data.omega)
        assert report.passed, momap.name
        assert report.n == 1
    symbolic = Mechanics("symbolic")
    assert verify_momap(symbolic.bicomplex, symbolic.time_momap, symbolic.data.omega).passed


def test_sign_flipped_mutants_fail():
    free = Mechanics("free")
    symbolic = Mechanics("symbolic")
    cases = [(free, free.translation_momap), (free, free.rotation_momap),
             (symbolic, symbolic.time_momap)]
    for mech, momap in cases:
        mutant = momap.negated(1, (0,))
        report = verify_momap(mech.bicomplex, mutant, mech.data.omega)
        assert not report.passed
        assert any(not r.residual.is_zero for r in report.relations)


def test_harmonic_translation_has_no_momentum_map():
    mech = Mechanics("harmonic")
    assert not verify_momap(mech.bicomplex, mech.translation_momap, mech.data.omega).passed
    assert verify_momap(mech.bicomplex, mech.rotation_momap, mech.data.omega).passed
    assert verify_momap(mech.bicomplex, mech.time_momap, mech.data.omega).passed


def test_relation_table():
    mech = Mechanics("free")
    report = verify_momap(mech.bicomplex, mech.rotation_momap, mech.data.omega)
    table = report.table(mech.bicomplex)
    assert list(table.columns) == ["i", "wedge", "status", "residual"]
    assert len(table) == 3 + 3
    assert set(table["status"]) == {"pass"}


def test_phase_space_angular_momentum():
    ps = PhaseSpace()
    assert verify_momap(ps.bicomplex, ps.momap, ps.data.omega).passed
    assert not verify_momap(ps.bicomplex, ps.momap.negated(1, (2,)), ps.data.omega).passed


def test_hamiltonian_pairs_and_brackets():
    mech = Mechanics("free")
    bc, omega = mech.bicomplex, mech.data.omega
    pairs = [HamiltonianPair(mech.rotation_momap.value(1, (a,)), mech.rotation.field_for(a))
             for a in range(3)]
    assert all(hamiltonian_check(bc, p, omega).passed for p in pairs)
    assert l_bracket(bc, 1, [pairs[0]], omega).is_zero
    assert l_bracket(bc, 2, pairs[:2], omega) == BigradedForm.scalar(-mech.rotation_momap.value(1, (2,)).coefficient(()))
    assert l_bracket(bc, 3, pairs, omega).is_zero
    assert bracket_defect(bc, mech.rotation_momap, 0, 1, omega).is_zero


def test_bracket_arity_checked():
    mech = Mechanics("free")
    pair = HamiltonianPair(mech.translation_momap.value(1, (0,)), mech.translation.field_for(0))
    with pytest.raises(DegreeError):
        l_bracket(mech.bicomplex, 2, [pair], mech.data.omega)


def test_component_arity_checked():
    mech = Mechanics("free")
    bad = MomentumMapSpec("bad", mech.translation,
                          {2: {(0, 1): BigradedForm.scalar(mech.q[0])}})
    with pytest.raises(DegreeError):
        verify_momap(mech.bicomplex, bad, mech.data.omega)


def test_canonical_momap_for_manifest_actions():
    free = Mechanics("free")
    canonical = canonical_momap(free.bicomplex, free.translation, free.data.lepage, 1)
    for a in range(3):
        assert canonical.value(1, (a,)) == free.translation_momap.value(1, (a,))
    symbolic = Mechanics("symbolic")
    energy = canonical_momap(symbolic.bicomplex, symbolic.time_translation, symbolic.data.lepage, 1)
    assert energy.value(1, (0,)) == symbolic.time_momap.value(1, (0,))


def test_restricted_rotation_is_abelian():
    mech = Mechanics("free")
    restricted = mech.rotation.restrict(["e3"])
    assert restricted.algebra.is_abelian
    assert restricted.algebra.dim == 1


def test_chern_simons_abelian_momap():
    u2 = LieAlgebraSpec.abelian("u2", ["T1", "T2"], local=True, kappa=[[1, 0], [0, 1]])
    cs = ChernSimons(u2, order=2)
    report = verify_momap(cs.bicomplex, cs.momap, cs.data.omega)
    assert report.n == 3
    assert report.passed
    assert not verify_momap(cs.bicomplex, cs.momap.negated(2, (0, 1)), cs.data.omega).passed


def test_chern_simons_so3_momap():
    cs = ChernSimons(so3(local=True), order=2)
    assert cs.gauge.check_bracket_compatibility(cs.bicomplex) == []
    report = verify_momap(cs.bicomplex, cs.momap, cs.data.omega)
    assert report.passed
    assert bracket_defect(cs.bicomplex, cs.momap, 0, 1, cs.data.omega).is_zero


if __name__ == "__main__":
    sys.exit(0 if run_all(globals(), "MOMENTUM MAP TESTS") else 1)
