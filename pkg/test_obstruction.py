"""
Tests for the obstruction double complex
"""

import sys

import pytest

from bicomplex import BigradedForm
from corpus import ChernSimons, Mechanics, PhaseSpace, so3
from jetcore import PreconditionError
from obstruction import (CochainSum, GCochain, bar_map, check_obstruction, d_bar, d_g, d_X, mu_bar,
                         extract_momap)
from testkit import run_all


def sample_cochain(mech, arity):
    q, qd = mech.q, mech.qd
    forms = [BigradedForm.scalar(q[0] * qd[1]), mech.bicomplex.delta(2) * q[1],
             BigradedForm.scalar(qd[2] ** 2)]
    keys = [(0,), (1,), (2,)] if arity == 1 else [(0, 1), (0, 2), (1, 2)]
    return GCochain(arity, dict(zip(keys, forms)))


def test_cochain_values_are_alternating():
    mech = Mechanics("free")
    c = sample_cochain(mech, 2)
    assert c.value((1, 0)) == -c.value((0, 1))
    assert c.value((1, 1)).is_zero


def test_cochain_keys_validated():
    with pytest.raises(PreconditionError):
        GCochain(2, {(1, 0): BigradedForm.scalar(1)})
    with pytest.raises(PreconditionError):
        GCochain(1, {(0,): BigradedForm.scalar(1)}) + GCochain(2)


def test_differentials_square_to_zero():
    mech = Mechanics("free")
    algebra = so3()
    bc = mech.bicomplex
    for arity in (1, 2):
        c = sample_cochain(mech, arity)
        assert d_g(d_g(c, algebra), algebra).is_zero
        assert d_X(d_X(c, bc), bc).is_zero
        total = CochainSum({arity: c})
        assert d_bar(d_bar(total, algebra, bc), algebra, bc).is_zero


def test_free_particle_actions_are_unobstructed():
    mech = Mechanics("free")
    for action, momap in ((mech.translation, mech.translation_momap),
                          (mech.rotation, mech.rotation_momap)):
        report = check_obstruction(mech.bicomplex, action, mech.data.omega, momap)
        assert report.closed
        assert report.primitive
        assert report.momap_passed
        assert report.consistent


def test_time_translation_primitive():
    mech = Mechanics("symbolic")
    report = check_obstruction(mech.bicomplex, mech.time_translation, mech.data.omega, mech.time_momap)
    assert report.closed and report.primitive and report.consistent


def test_harmonic_translation_is_obstructed():
    mech = Mechanics("harmonic")
    report = check_obstruction(mech.bicomplex, mech.translation, mech.data.omega, mech.translation_momap)
    assert not report.closed
    assert not report.primitive
    assert report.momap_passed is False
    assert report.consistent


def test_sign_flipped_momap_is_not_a_primitive():
    mech = Mechanics("free")
    mutant = mech.rotation_momap.negated(1, (1,))
    report = check_obstruction(mech.bicomplex, mech.rotation, mech.data.omega, mutant)
    assert report.closed
    assert not report.primitive
    assert report.consistent


def test_phase_space_angular_momentum():
    ps = PhaseSpace()
    report = check_obstruction(ps.bicomplex, ps.rotation, ps.data.omega, ps.momap)
    assert report.closed and report.primitive and report.consistent


def test_extraction_inverts_mu_bar():
    mech = Mechanics("free")
    extracted = extract_momap(mu_bar(mech.rotation_momap), mech.rotation)
    for a in range(3):
        assert extracted.value(1, (a,)) == mech.rotation_momap.value(1, (a,))


def test_bar_map_components():
    mech = Mechanics("free")
    bar = bar_map(mech.bicomplex, mech.data.omega, mech.translation)
    assert sorted(bar.components) == [1, 2]
    assert bar.components[1].value((0,)) == mech.bicomplex.contract(mech.translation.field_for(0),
                                                                    mech.data.omega)


def test_bar_map_needs_global_action():
    from linfty import LieAlgebraSpec
    cs = ChernSimons(LieAlgebraSpec.abelian("u1", ["T1"], local=True, kappa=[[1]]), order=2)
    with pytest.raises(PreconditionError):
        bar_map(cs.bicomplex, cs.data.omega, cs.gauge)


def test_report_table():
    mech = Mechanics("free")
    report = check_obstruction(mech.bicomplex, mech.translation, mech.data.omega, mech.translation_momap)
    assert list(report.table().columns) == ["check", "arity", "nonzero values"]
    assert report.table().empty


if __name__ == "__main__":
    sys.exit(0 if run_all(globals(), "OBSTRUCTION COMPLEX TESTS") else 1)
