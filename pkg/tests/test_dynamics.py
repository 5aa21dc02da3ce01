import io

import numpy as np
import pytest

from toda.dynamics import (
    Trajectory, TransportConfig, conservation_report, integrate, isospectral_drift, read_csv,
    solve, spectrum, symmetry_transport_test, to_csv,
)
from toda.errors import DomainError, SingularEvaluationError, StiffnessError
from toda.expr import Ring
from toda.hierarchy import downward_level, upward
from toda.lattice import PhaseState, hamiltonian0, second_order_residual, total_momentum
from toda.symmetry import symmetry_field
from toda.tensors import Matrix

X0 = [0.3, -0.2, 0.7, -0.4]


@pytest.fixture(scope="module")
def up2():
    return upward(2, 1, 3)


def test_reflection_symmetry_from_rest():
    tr = integrate(2, [0, 0, 0, 0], 10, 1e-10)
    assert np.max(np.abs(tr.states[:, 0] + tr.states[:, 1])) < 1e-12


def test_momentum_conserved():
    tr = integrate(2, [0, 0, 1, 1], 10, 1e-10)
    P = tr.states[:, 2] + tr.states[:, 3]
    assert np.max(np.abs(P - 2)) < 1e-10


@pytest.mark.parametrize("seed", range(3))
def test_energy_drift(seed):
    x0 = np.random.default_rng(seed).uniform(-1, 1, 4)
    tr = integrate(2, x0, 10, 1e-10)
    assert conservation_report(tr, [hamiltonian0(2)])[0] < 1e-8


def test_conservation_examples(up2):
    tr = integrate(2, X0, 10, 1e-10)
    low = downward_level(up2[1].lambda_op, up2[0].sigma)
    d = conservation_report(tr, {"H0": up2[0].H, "H-1": low.H, "x1": Ring(2).x(1)})
    assert d["H0"] < 1e-8
    assert d["H-1"] < 1e-10
    assert d["x1"] > 0.5


def test_all_hamiltonians_conserved(up2):
    tr = integrate(2, X0, 10, 1e-10)
    low = downward_level(up2[1].lambda_op, up2[0].sigma)
    drifts = conservation_report(tr, [lev.H for lev in up2] + [low.H])
    assert max(drifts) < 1e-6


def test_drift_scales_with_tolerance():
    d = [conservation_report(integrate(2, X0, 10, tol), [hamiltonian0(2)])[0] for tol in (1e-6, 1e-8, 1e-10)]
    for a, b in zip(d, d[1:]):
        assert 10 < a / b < 1000


def test_rk4_fourth_order():
    H = hamiltonian0(2)
    a = conservation_report(integrate(2, X0, 10, method="rk4", h=0.1), [H])[0]
    b = conservation_report(integrate(2, X0, 10, method="rk4", h=0.05), [H])[0]
    assert 8 <= a / b <= 32


def test_second_order_residual_along_trajectory():
    tr = integrate(3, [0.1, 0, -0.3, 0.5, 0, -0.2], 5, 1e-10)
    assert second_order_residual(3, tr).max() < 1e-8
    with pytest.raises(DomainError):
        second_order_residual(2, tr)


def test_trajectory_metadata():
    tr = integrate(2, X0, 2, 1e-8)
    assert tr.method == "rk45" and tr.meta["accepted"] == len(tr) - 1
    assert np.all(np.diff(tr.times) > 0)
    assert tr.times[-1] == pytest.approx(2.0)
    assert tr.samples[0].time == 0.0


def test_bad_inputs():
    with pytest.raises(DomainError):
        integrate(2, [0, 0, 0], 1)
    with pytest.raises(DomainError):
        integrate(2, X0, -1)
    with pytest.raises(DomainError):
        integrate(2, X0, 1, tol=0)
    with pytest.raises(DomainError):
        integrate(2, X0, 1, method="rk4")


def test_stiffness_error():
    # dy/dt = y^2 blows up at t = 1
    with pytest.raises(StiffnessError):
        solve(lambda t, y: y * y, [1.0], 2.0, tol=1e-8)


def test_isospectral_examples(up2):
    L1 = up2[1].lambda_op
    tr = integrate(2, [0, 0, 1, -1], 10, 1e-10)
    assert isospectral_drift(tr, L1) < 1e-6
    ev = np.sort_complex(spectrum(L1, PhaseState(np.zeros(4))))
    assert ev == pytest.approx([-1, -1, 1, 1])
    const = Matrix([[1, 2, 0, 0], [0, 3, 0, 0], [0, 0, 4, 0], [0, 0, 0, 5]], 2)
    assert isospectral_drift(tr, const) == 0.0


def test_isospectral_all_singular():
    R = Ring(2)
    # total momentum stays zero from rest
    M = Matrix([[1 / (R.x(3) + R.x(4)), 0, 0, 0]] + [[0] * 4] * 3, 2)
    tr = integrate(2, [0, 0, 0, 0], 1, 1e-8)
    with pytest.raises(SingularEvaluationError):
        isospectral_drift(tr, M)


def test_transport_examples():
    ok = symmetry_transport_test(2, symmetry_field(1, 2), X0, TransportConfig(1e-6, 5.0))
    assert ok["mismatch_over_eps2"] < 1e3
    shift = symmetry_transport_test(2, symmetry_field(4, 2), X0, TransportConfig(1e-6, 5.0))
    assert shift["max_mismatch"] < 1e-12


def test_transport_negative_control():
    bad = symmetry_field(3, 2).replace(3, 2)
    r = [symmetry_transport_test(2, bad, X0, TransportConfig(e, 5.0))["mismatch_over_eps2"] for e in (1e-4, 1e-6)]
    assert r[1] / r[0] == pytest.approx(100, rel=0.05)


def test_transport_config_validation():
    with pytest.raises(DomainError):
        TransportConfig(0.0)
    with pytest.raises(DomainError):
        TransportConfig(1e-6, 0.0)


def test_csv_roundtrip():
    tr = integrate(2, X0, 1, 1e-8)
    text = to_csv(tr)
    assert text.splitlines()[0] == "t,x1,x2,x3,x4"
    assert text.splitlines()[1] == "0,0.29999999999999999,-0.20000000000000001,0.69999999999999996,-0.40000000000000002"
    t, X = read_csv(io.StringIO(text))
    assert np.array_equal(t, tr.times) and np.array_equal(X, tr.states)


def test_trajectory_rejects_unordered_times():
    with pytest.raises(DomainError):
        Trajectory(np.array([0.0, 0.0]), np.zeros((2, 4)), np.zeros((2, 4)), "rk4")
