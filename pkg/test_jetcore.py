"""
Tests for the jet space kernel
"""

import sys

import numpy as np
import pytest
import sympy

from jetcore import (ExpressionError, FieldGroup, FieldSample, FieldSampleError, JetOrderOverflow,
                     JetSpace, MultiIndex, PreconditionError, declare_function, grid_derivative,
                     multi_indices, normalize, partial, substitute_jet, total_derivative,
                     total_derivative_multi)
from testkit import run_all


def particle(order=4):
    return JetSpace(["t"], [FieldGroup.vector("q", 3)], order=order, functions={"V": 3})


def plane():
    return JetSpace(["x", "y"], [FieldGroup.vector("u", 1)], order=3)


def test_multi_index_arithmetic():
    m = MultiIndex.zero(2).raised(0).raised(1).raised(1)
    assert m.exponents == (1, 2)
    assert m.order == 3
    assert m.steps() == [0, 1, 1]
    assert m.lowered(1) == MultiIndex((1, 1))
    assert MultiIndex.unit(2, 1) == MultiIndex((0, 1))
    with pytest.raises(ValueError):
        MultiIndex((0, 1)).lowered(0)


def test_multi_indices_are_ordered_by_order():
    found = multi_indices(2, 2)
    assert len(found) == 6
    assert [m.order for m in found] == sorted(m.order for m in found)
    assert found[0] == MultiIndex((0, 0))


def test_jet_names():
    space = particle()
    assert space.field_names == ("q1", "q2", "q3")
    assert space.field_symbol("q2", MultiIndex((2,))).name == "q2_tt"
    assert plane().field_symbol("u", MultiIndex((1, 2))).name == "u_xyy"
    assert FieldGroup.vector("u", 1).components == ("u",)


def test_jet_order_overflow():
    space = particle(order=2)
    with pytest.raises(JetOrderOverflow):
        space.field_symbol(0, MultiIndex((3,)))
    with pytest.raises(JetOrderOverflow):
        total_derivative(space, space.field_symbol(0, MultiIndex((2,))), 0)


def test_negative_order_rejected():
    with pytest.raises(PreconditionError):
        JetSpace(["t"], [FieldGroup.vector("q", 1)], order=-1)


def test_duplicate_coordinate_names_rejected():
    with pytest.raises(ExpressionError):
        JetSpace(["t"], [FieldGroup("q", ("q", "q"))])


def test_normalize_expands_and_validates():
    space = particle()
    q1, q1_t = space.field_symbol(0), space.field_symbol(0, MultiIndex((1,)))
    assert normalize((q1 + q1_t) ** 2, space) == q1 ** 2 + 2 * q1 * q1_t + q1_t ** 2
    with pytest.raises(ExpressionError):
        normalize(sympy.Float(0.5) * q1, space)
    with pytest.raises(ExpressionError):
        normalize(q1 ** sympy.Rational(1, 2), space)
    with pytest.raises(ExpressionError):
        normalize(sympy.Symbol("w"), space)
    with pytest.raises(ExpressionError):
        normalize(sympy.sin(q1), space)


def test_total_derivative_chain_rule():
    space = particle()
    t = space.base_symbol(0)
    q1 = space.field_symbol(0)
    q1_t = space.field_symbol(0, MultiIndex((1,)))
    q1_tt = space.field_symbol(0, MultiIndex((2,)))
    assert total_derivative(space, q1 * q1_t, 0) == q1_t ** 2 + q1 * q1_tt
    assert total_derivative(space, t * q1, 0) == q1 + t * q1_t
    assert total_derivative_multi(space, q1, MultiIndex((3,))).name == "q1_ttt"


def test_total_derivative_of_declared_function():
    space = particle()
    V = space.functions["V"]
    q = [space.field_symbol(a) for a in range(3)]
    qd = [space.field_symbol(a, MultiIndex((1,))) for a in range(3)]
    expected = sum(V.partial(i)(*q) * qd[i] for i in range(3))
    assert total_derivative(space, V(*q), 0) == sympy.expand(expected)


def test_mixed_partials_commute():
    V = declare_function("W", 2)
    assert V.partial(0).partial(1) is V.partial(1).partial(0)
    assert V.partial(0).partial(1).name == "W_12"
    with pytest.raises(ExpressionError):
        V.partial(2)


def test_function_lookup_by_partial_name():
    space = particle()
    assert space.function("V_12") is space.functions["V"].partial(0).partial(1)
    with pytest.raises(ExpressionError):
        space.function("U")


def test_total_derivatives_commute_in_two_dimensions():
    space = plane()
    u = space.field_symbol(0)
    u_x = space.field_symbol(0, MultiIndex((1, 0)))
    expr = u * u_x + space.base_symbol(1) * u
    xy = total_derivative(space, total_derivative(space, expr, 0), 1)
    yx = total_derivative(space, total_derivative(space, expr, 1), 0)
    assert xy == yx


def test_substitute_closed_form():
    space = particle()
    t = space.base_symbol(0)
    phi = FieldSample.closed("parabola", {"q1": t ** 2, "q2": 0, "q3": 0})
    expr = space.field_symbol(0, MultiIndex((1,))) * space.field_symbol(0)
    assert sympy.expand(substitute_jet(space, expr, phi) - 2 * t ** 3) == 0


def test_substitute_grid_matches_closed_form():
    space = particle()
    t = space.base_symbol(0)
    phi = FieldSample.closed("line", {"q1": t, "q2": 2 * t, "q3": 3 * t})
    grid = phi.sample(space, [(0.0, 1.0)], 21)
    expr = space.field_symbol(1, MultiIndex((1,))) * space.field_symbol(0)
    values = substitute_jet(space, expr, grid)
    assert np.allclose(values, 2 * np.linspace(0, 1, 21))


def test_substitute_missing_component():
    space = particle()
    phi = FieldSample.closed("partial", {"q1": 1})
    with pytest.raises(FieldSampleError):
        substitute_jet(space, space.field_symbol(1), phi)


def test_grid_derivative_is_second_order():
    x = np.linspace(0.0, 1.0, 101)
    values = x ** 2
    first = grid_derivative(values, (x[1] - x[0],), MultiIndex((1,)))
    assert np.allclose(first, 2 * x, atol=1e-10)


def test_grid_too_coarse():
    space = particle()
    phi = FieldSample.sampled("short", {"q1": np.zeros(4), "q2": np.zeros(4), "q3": np.zeros(4)},
                              [(0.0, 1.0)])
    with pytest.raises(FieldSampleError):
        substitute_jet(space, space.field_symbol(0, MultiIndex((2,))), phi)


def test_sampled_shapes_must_agree():
    with pytest.raises(FieldSampleError):
        FieldSample.sampled("bad", {"q1": np.zeros(5), "q2": np.zeros(6)}, [(0.0, 1.0)])


def test_partial_treats_jets_as_independent():
    space = particle()
    q1 = space.field_symbol(0)
    q1_t = space.field_symbol(0, MultiIndex((1,)))
    assert partial(q1 * q1_t**2, q1_t) == sympy.expand(2 * q1 * q1_t)
    assert partial(q1 * q1_t**2, q1) == q1_t**2
    V = space.functions["V"]
    q = [space.field_symbol(a) for a in range(3)]
    assert partial(V(*q), q[1]) == V.partial(1)(*q)


if __name__ == "__main__":
    sys.exit(0 if run_all(globals(), "JET KERNEL TESTS") else 1)
