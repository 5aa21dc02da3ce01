from fractions import Fraction

import numpy as np
import pytest

from toda import reference as ref
from toda.errors import GaugeError, NotHamiltonianError, SingularStructureError
from toda.expr import Ring, parse
from toda.hierarchy import (
    HierarchyLevel, base_level, closedness_residual, curl, downward_chain, downward_level,
    equations_of_motion_residual, eta2_chain, eta5_chain, gauge_lambda, hamiltonian_recover,
    inverse_symmetry_check, lambda_equation_residual, lambda_master_residual, level_from_json,
    level_to_json, lift, poisson_jacobi_exact, poisson_jacobi_numeric, strong_symmetry, upward,
    verify_lambda_relation, well_conditioned_states, with_scalar_part,
)
from toda.lattice import flow_derivative, flow_field, total_momentum
from toda.symmetry import symmetry_field
from toda.tensors import Matrix, OneForm, SigmaMatrix


@pytest.fixture(scope="module")
def up2():
    return upward(2, 1, 3)


@pytest.fixture(scope="module")
def low2(up2):
    return downward_level(up2[1].lambda_op, up2[0].sigma)


def test_gauge_lambda_examples():
    assert gauge_lambda(2) == parse("-t/2*(x3^2 + x4^2) - t*E1 + x3 + 3*x4", 2)
    lam3 = gauge_lambda(3)
    assert lam3.terms[(0, 0, 0, 0, 0, 1, 0, 0, 0)] == 5
    for n in range(2, 6):
        assert lambda_equation_residual(n, gauge_lambda(n)).is_zero()


def test_base_level_examples():
    lev = base_level(2)
    assert lev.l == ref.one_form(ref.L0)
    assert lev.sigma == SigmaMatrix.canonical(2)
    assert lev.l.eval([0, 0, 0, 0], 0) == pytest.approx([0, 0, 1, 3])
    for n in (3, 4):
        assert base_level(n).sigma == SigmaMatrix.canonical(n)


def test_curl_of_gradient_vanishes():
    R = Ring(2)
    assert curl(OneForm.gradient(R.x(1) * R.x(3))).is_zero()


def test_scalar_part_definition(up2):
    f = flow_field(2)
    for lev in up2:
        assert lev.l0 == -lev.l.contract(f)


def test_lift_examples():
    assert lift(base_level(3), symmetry_field(4, 3)).l.is_zero()
    for n in (2, 3, 4):
        R = Ring(n)
        P, t = total_momentum(n), R.t
        l1 = lift(base_level(n), symmetry_field(5, n)).l
        assert l1 == OneForm([2 * P] * n + [-2 * t * P + n * n] * n, n)


def test_strong_symmetry_examples(up2):
    L1 = strong_symmetry(up2[1].sigma, up2[0].sigma)
    assert L1 == ref.matrix(ref.LAMBDA1)
    assert L1.eval([0, 0, 0, 0]) == pytest.approx(np.array([[0, 0, 0, 1], [0, 0, -1, 0], [0, -1, 0, 0], [1, 0, 0, 0]]))
    assert strong_symmetry(up2[2].sigma, up2[1].sigma) == L1 * Fraction(3, 2)
    assert strong_symmetry(up2[3].sigma, up2[2].sigma) == L1 * 2
    assert Matrix(L1.entries, 2) @ up2[0].sigma == up2[1].sigma


def test_strong_symmetry_singular():
    lev = lift(base_level(2), symmetry_field(5, 2))
    with pytest.raises(SingularStructureError):
        strong_symmetry(base_level(2).sigma, lev.sigma)


def test_recovered_hamiltonians(up2):
    assert up2[1].H == parse(ref.H1, 2)
    assert up2[2].H == parse(ref.H2, 2)
    assert up2[3].H == parse(ref.H3, 2)


def test_verify_mode(up2):
    H1 = parse(ref.H1, 2)
    assert hamiltonian_recover(up2[1], "verify", H1) == H1
    with pytest.raises(NotHamiltonianError):
        hamiltonian_recover(up2[1], "verify", H1 + Ring(2).x(1))


def test_gauge_error_for_time_dependent_potential():
    R = Ring(2)
    lev = HierarchyLevel(0, with_scalar_part(OneForm([R.t, 0, 0, 0], 2)), SigmaMatrix([[0] * 4] * 4, 2))
    with pytest.raises(GaugeError):
        hamiltonian_recover(lev)


def test_gauge_error_for_time_dependent_brackets():
    R = Ring(2)
    l = with_scalar_part(OneForm([R.t * R.x(2), 0, 0, 0], 2))
    with pytest.raises(GaugeError):
        hamiltonian_recover(HierarchyLevel(0, l, curl(l)))


def test_lambda_relation_examples(up2):
    L1 = up2[1].lambda_op
    assert verify_lambda_relation(L1, up2[0].H, up2[1].H)["status"] == "pass"
    assert verify_lambda_relation(L1 * Fraction(3, 2), up2[1].H, up2[2].H)["status"] == "pass"
    assert verify_lambda_relation(Matrix.identity(2), up2[0].H, up2[0].H)["status"] == "pass"
    bad = verify_lambda_relation(L1, up2[1].H, up2[2].H)
    assert bad["status"] == "fail" and len(bad["residual"]) == 4


def test_downward_level_examples(low2):
    assert low2.sigma[0, 2] == parse("x4/(x3*x4 - E1)", 2)
    assert low2.sigma == ref.sigma(ref.SIGMA_M1)
    assert low2.H == parse("x3 + x4", 2)
    sf = [v.eval([0, 0, 1, 2], 0) for v in low2.sigma @ flow_field(2)]
    assert sf == pytest.approx([0, 0, -1, -1])


def test_downward_level_one_form(low2):
    # the rational one-form reproduces the momentum Hamiltonian but not the brackets
    assert low2.l == ref.one_form(ref.L_M1)
    assert low2.notes["one_form_generates_H"] is True
    assert low2.notes["curl_matches_sigma"] is False


def test_downward_level_singular():
    with pytest.raises(SingularStructureError):
        downward_level(Matrix([[0] * 4] * 4, 2), base_level(2).sigma)


def test_downward_chain(up2):
    levels, report = downward_chain(up2[:3])
    assert [e["status"] for e in report] == ["pass", "pass"]
    assert [e["scale"] for e in report] == ["3", "3"]
    assert levels[1].l == ref.one_form(ref.LP0)
    assert levels[0].sigma == up2[1].sigma * 3


@pytest.mark.parametrize("n", range(2, 6))
def test_inverse_symmetry(n):
    s0 = base_level(n).sigma
    rep = inverse_symmetry_check(symmetry_field(3, n), symmetry_field(1, n), s0)
    assert rep["status"] == "pass" and rep["reduced_status"] == "pass" and rep["reduced_equals_full"]


def test_inverse_symmetry_negative_control():
    s0 = base_level(2).sigma
    rep = inverse_symmetry_check(symmetry_field(4, 2), symmetry_field(1, 2), s0)
    assert rep["status"] == "fail" and rep["residual"]


@pytest.mark.parametrize("n", [2, 3, 4])
def test_eta5_chain(n):
    levels, report = eta5_chain(n)
    assert all(e["status"] == "pass" for e in report)
    P = total_momentum(n)
    assert levels[1].H == 2 * n * P * P
    if n == 2:
        assert all(c == 8 * P for c in levels[1].l[:2])


def test_eta4_annihilates():
    lev = base_level(3)
    assert lift(lev, symmetry_field(4, 3)).l.is_zero()
    from toda.symmetry import lie_derivative
    assert lie_derivative(symmetry_field(4, 3), lev.H).is_zero()


def test_eta2_chain():
    chain = eta2_chain(3, 4)
    for m, H in enumerate(chain):
        assert H == chain[0] * (-1) ** m


@pytest.mark.parametrize("n", [2, 3])
def test_closedness_and_time_independence(n):
    for lev in upward(n, 1, 3, recover=False):
        assert closedness_residual(lev.sigma) == []
        if lev.k <= 2:
            assert all(not v.depends_on("t") for row in lev.sigma.entries for v in row)


def test_equations_of_motion_and_conservation(up2, low2):
    f = flow_field(2)
    for lev in list(up2) + [low2]:
        assert all(v.is_zero() for v in equations_of_motion_residual(lev.sigma, lev.H))
        assert flow_derivative(lev.H, f).is_zero()


def test_jacobi_exact(up2):
    for lev in up2:
        assert poisson_jacobi_exact(lev.sigma) == []


def test_jacobi_numeric(up2):
    X = well_conditioned_states(up2[2].sigma, 100, seed=7)
    assert poisson_jacobi_numeric(up2[2].sigma, X) < 1e-9


def test_jacobi_detects_a_bad_structure(rng):
    R = Ring(2)
    # constant-rank antisymmetric matrix whose inverse is not Poisson
    s = SigmaMatrix([[0, R.x(3), 0, 0], [-R.x(3), 0, 0, 1], [0, 0, 0, R.x(1)], [0, -1, -R.x(1), 0]], 2)
    assert closedness_residual(s) != []
    assert poisson_jacobi_exact(s) != []
    assert poisson_jacobi_numeric(s, rng.uniform(0.5, 1, size=(5, 4))) > 1e-6


def test_lambda_master_equation(up2):
    assert lambda_master_residual(up2[1].lambda_op).is_zero()
    assert lambda_master_residual(up2[2].lambda_op).is_zero()


def test_level_json_roundtrip(up2, low2):
    for lev in (up2[2], low2):
        back = level_from_json(level_to_json(lev))
        assert back.sigma == lev.sigma and back.H == lev.H and back.l == lev.l
