import itertools
from fractions import Fraction

import pytest

from toda.expr import Ring, parse
from toda.hierarchy import base_level, curl
from toda.lattice import flow_field
from toda.symmetry import (
    bracket_jacobi_residual, commutator_table, eta15_summary, lie_bracket, lie_derivative,
    master_residual, prolongation_residual, symmetry_field,
)
from toda.tensors import SigmaMatrix, VectorField
from toda import reference


@pytest.mark.parametrize("n", range(2, 7))
@pytest.mark.parametrize("kind", range(1, 6))
def test_master_equation(kind, n):
    assert master_residual(symmetry_field(kind, n)).is_zero()


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("kind", range(1, 6))
def test_second_half_is_total_derivative_of_first(kind, n):
    assert prolongation_residual(symmetry_field(kind, n)).is_zero()


def test_printed_eta1():
    assert symmetry_field(1, 2) == reference.vector(reference.ETA1_N2, 2)
    assert symmetry_field(1, 3) == reference.vector(reference.ETA1_N3, 3)


def test_field_examples():
    for n in (2, 4):
        eta3 = symmetry_field(3, n)
        assert all(c == parse("t", n) for c in eta3[:n])
        assert all(c == 1 for c in eta3[n:])
    assert symmetry_field(2, 3)[1] == parse("2 - t/2*x5", 3)
    with pytest.raises(ValueError):
        symmetry_field(6, 2)


def test_perturbed_field_is_not_a_symmetry():
    bad = symmetry_field(3, 2).replace(3, 2)
    res = master_residual(bad)
    assert not res[0].is_zero()


def test_bracket_examples():
    for n in range(2, 7):
        e1, e2 = symmetry_field(1, n), symmetry_field(2, n)
        assert lie_bracket(e1, e2) == e1 * Fraction(1, 2)
    e3, e4 = symmetry_field(3, 3), symmetry_field(4, 3)
    assert lie_bracket(e3, e4).is_zero()
    assert lie_bracket(e3, e3).is_zero()


@pytest.mark.parametrize("n", [2, 3])
def test_bracket_antisymmetry_and_jacobi(n):
    etas = [symmetry_field(k, n) for k in range(1, 6)]
    for A, B in itertools.combinations(etas, 2):
        assert lie_bracket(A, B) == -lie_bracket(B, A)
    for A, B, C in itertools.combinations(etas, 3):
        assert bracket_jacobi_residual(A, B, C).is_zero()


@pytest.mark.parametrize("n", range(2, 7))
def test_commutator_table(n):
    report = commutator_table(n)
    assert len([e for e in report if "reading" not in e]) == 25
    assert all(e["status"] != "fail" for e in report)
    summary = eta15_summary(report)[n]
    assert summary["averaged over j (n eta1^j -> sum_j eta1^j)"] is True
    assert not any(v for k, v in summary.items() if k.startswith("fixed"))


def test_lie_derivative_examples():
    l0 = base_level(2).l
    assert lie_derivative(symmetry_field(1, 2), l0) == reference.one_form(reference.L1)
    assert lie_derivative(symmetry_field(4, 3), base_level(3).l).is_zero()
    H0 = base_level(2).H
    assert lie_derivative(symmetry_field(2, 2), H0) == -H0


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("kind", range(1, 6))
def test_lie_derivative_of_sigma_is_antisymmetric(kind, n):
    s1 = curl(lie_derivative(symmetry_field(1, n), base_level(n).l))
    out = lie_derivative(symmetry_field(kind, n), s1)
    assert isinstance(out, SigmaMatrix)


@pytest.mark.parametrize("n", [2, 3])
def test_lie_derivative_commutes_with_curl(n):
    eta = symmetry_field(1, n)
    l0 = base_level(n).l
    assert lie_derivative(eta, curl(l0)) == curl(lie_derivative(eta, l0))
    l1 = lie_derivative(eta, l0)
    assert lie_derivative(eta, curl(l1)) == curl(lie_derivative(eta, l1))


def test_scalar_lie_is_directional_derivative():
    R = Ring(2)
    X = VectorField([1, 0, R.x(3), 0], 2)
    phi = R.x(1) * R.x(3)
    assert lie_derivative(X, phi) == R.x(3) + R.x(1) * R.x(3)
