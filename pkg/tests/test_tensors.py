import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toda import linalg
from toda.errors import DomainError, SingularStructureError
from toda.expr import Expr, RationalExpr, Ring
from toda.tensors import Matrix, OneForm, SigmaMatrix, VectorField
from conftest import exprs

R = Ring(2)
x1, x3, x4, E1 = R.x(1), R.x(3), R.x(4), R.E(1)


def test_sigma_must_be_antisymmetric():
    with pytest.raises(DomainError):
        SigmaMatrix([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]], 2)


def test_canonical_block():
    S = SigmaMatrix.canonical(2)
    assert S.to_text() == [["0", "0", "1", "0"], ["0", "0", "0", "1"], ["-1", "0", "0", "0"], ["0", "-1", "0", "0"]]
    assert S.det() == 1


def test_component_count():
    with pytest.raises(DomainError):
        VectorField([x1, x3, x4], 2)


def test_inverse_of_polynomial_matrix():
    M = Matrix([[x3, 0, 0, E1], [0, x4, -E1, 0], [0, -1, x3, 0], [1, 0, 0, x4]], 2)
    inv = M.inverse()
    assert M @ inv == Matrix.identity(2)
    assert inv @ M == Matrix.identity(2)


def test_singular_inverse():
    M = Matrix([[x3, x3, 0, 0], [x4, x4, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], 2)
    assert M.det().is_zero()
    with pytest.raises(SingularStructureError):
        M.inverse()


@settings(max_examples=25, deadline=None)
@given(st.lists(exprs(n=2, max_terms=2, max_degree=2), min_size=16, max_size=16), st.integers(0, 2 ** 31))
def test_det_matches_numpy(entries, seed):
    rows = [entries[4 * i: 4 * i + 4] for i in range(4)]
    d = linalg.det(rows)
    rng = np.random.default_rng(seed)
    x, t = rng.uniform(-0.5, 0.5, 4), 0.3
    num = np.array([[e.eval(x, t) for e in r] for r in rows])
    want = np.linalg.det(num)
    assert abs(d.eval(x, t) - want) <= 1e-9 * max(1.0, np.abs(num).max() ** 4)


@settings(max_examples=25, deadline=None)
@given(st.lists(exprs(n=2, max_terms=2, max_degree=2), min_size=16, max_size=16))
def test_adjugate_identity(entries):
    rows = [entries[4 * i: 4 * i + 4] for i in range(4)]
    M = Matrix(rows, 2)
    d = M.det()
    prod = M @ M.adjugate()
    assert prod == Matrix.identity(2) * d


def test_one_form_contract_and_gradient():
    phi = x1 * x3
    g = OneForm.gradient(phi)
    assert g.to_text() == ["x3", "0", "x1", "0"]
    v = VectorField([1, 0, 0, 0], 2)
    assert g.contract(v) == x3


def test_rational_entries_allowed():
    l = OneForm([x3 / (x3 * x4 - E1), 0, 0, 0], 2)
    assert isinstance(l[0], RationalExpr)
    assert l.eval([0, 0, 1, 2]) == pytest.approx([1.0, 0, 0, 0])
