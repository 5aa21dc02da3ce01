"""The open Toda chain in first-order form.

Phase coordinates are ``x = (q^1..q^n, p_1..p_n)`` with ``x^{n+j} = p_j``.  The
flow is

    dq^j/dt = p_j,     dp_j/dt = E_{j-1} - E_j,

with the boundary atoms ``E_0`` and ``E_n`` identically zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError
from .expr import Expr, Ring
from .tensors import OneForm, VectorField


@dataclass(frozen=True)
class LatticeConfig:
    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise DomainError(f"lattice needs n >= 2 particles, got {self.n!r}")

    @property
    def ring(self) -> Ring:
        return Ring(int(self.n))

    @property
    def dim(self) -> int:
        return 2 * self.n


def as_config(cfg) -> LatticeConfig:
    return cfg if isinstance(cfg, LatticeConfig) else LatticeConfig(int(cfg))


@dataclass(frozen=True)
class PhaseState:
    """Point ``(x^1..x^{2n})`` at time ``time``; positions first, then momenta."""

    x: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 1 or x.size % 2 or x.size < 4:
            raise DomainError(f"phase state needs 2n >= 4 coordinates, got shape {x.shape}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "time", float(self.time))

    @property
    def n(self) -> int:
        return self.x.size // 2

    @property
    def q(self) -> np.ndarray:
        return self.x[: self.n]

    @property
    def p(self) -> np.ndarray:
        return self.x[self.n:]


@dataclass(frozen=True)
class SecondOrderState:
    q: np.ndarray
    qdot: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        qd = np.asarray(self.qdot, dtype=float)
        if q.shape != qd.shape or q.ndim != 1:
            raise DomainError("q and qdot must be 1-d arrays of equal length")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "qdot", qd)

    def to_phase(self) -> PhaseState:
        # p_j = dL/d(qdot^j) = qdot^j
        return PhaseState(np.concatenate([self.q, self.qdot]), self.time)


def flow_field(cfg) -> VectorField:
    cfg = as_config(cfg)
    n, R = cfg.n, cfg.ring
    comps = [R.p(j) for j in range(1, n + 1)]
    comps += [R.E(j - 1) - R.E(j) for j in range(1, n + 1)]
    return VectorField(comps, n)


def hamiltonian0(cfg) -> Expr:
    cfg = as_config(cfg)
    n, R = cfg.n, cfg.ring
    H = R.zero
    for j in range(1, n + 1):
        H = H + R.p(j) ** 2 / 2
    for i in range(1, n):
        H = H + R.E(i)
    return H


def total_momentum(cfg) -> Expr:
    cfg = as_config(cfg)
    R = cfg.ring
    P = R.zero
    for j in range(1, cfg.n + 1):
        P = P + R.p(j)
    return P


def total_position(cfg) -> Expr:
    cfg = as_config(cfg)
    R = cfg.ring
    Q = R.zero
    for j in range(1, cfg.n + 1):
        Q = Q + R.q(j)
    return Q


def flow_derivative(phi, f: VectorField):
    """Lie derivative of a scalar along ``f``: ``sum_a f^a d(phi)/dx^a``."""
    acc = Expr(f.n)
    for a, fa in enumerate(f, start=1):
        if fa.is_zero():
            continue
        acc = acc + fa * phi.diff(a)
    return acc


def toda_rhs(x: np.ndarray) -> np.ndarray:
    """Numeric flow for ``x`` of shape ``(2n,)`` or ``(2n, m)``."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0] // 2
    q, p = x[:n], x[n:]
    E = np.exp(q[:-1] - q[1:])
    force = np.zeros_like(p)
    force[1:] += E
    force[:-1] -= E
    return np.concatenate([p, force])


def toda_rhs_offset(x: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """``f(x + delta) - f(x)`` evaluated without cancellation.

    The atom increments use ``E_j(x) * expm1(delta_j - delta_{j+1})`` so a
    small offset keeps its full relative precision.
    """
    n = x.shape[0] // 2
    q, dq, dp = x[:n], delta[:n], delta[n:]
    dE = np.exp(q[:-1] - q[1:]) * np.expm1(dq[:-1] - dq[1:])
    dforce = np.zeros_like(dp)
    dforce[1:] += dE
    dforce[:-1] -= dE
    return np.concatenate([dp, dforce])


def newton_residual(cfg, q: np.ndarray, qddot: np.ndarray) -> np.ndarray:
    """``qddot^k - E_{k-1} + E_k`` at one configuration."""
    cfg = as_config(cfg)
    q = np.asarray(q, dtype=float)
    qddot = np.asarray(qddot, dtype=float)
    if q.shape != (cfg.n,) or qddot.shape != (cfg.n,):
        raise DomainError(f"expected {cfg.n} positions and accelerations")
    E = np.exp(q[:-1] - q[1:])
    force = np.zeros(cfg.n)
    force[1:] += E
    force[:-1] -= E
    return qddot - force


def second_order_residual(cfg, traj) -> np.ndarray:
    """Per-sample max-norm of the second-order equations along ``traj``.

    Accelerations come from the recorded momentum derivatives and velocities
    from the recorded position derivatives; the kinematic relation
    ``qdot = p`` is checked at the same time.
    """
    cfg = as_config(cfg)
    if traj.n != cfg.n:
        raise DomainError(f"trajectory has n={traj.n}, config has n={cfg.n}")
    n = cfg.n
    out = np.empty(len(traj.times))
    for k, (x, dx) in enumerate(zip(traj.states, traj.derivatives)):
        dyn = newton_residual(cfg, x[:n], dx[n:])
        kin = dx[:n] - x[n:]
        out[k] = max(np.max(np.abs(dyn)), np.max(np.abs(kin)))
    return out


@dataclass(frozen=True)
class FirstOrderLagrangian:
    """``L = l_a xdot^a + l_0``; the velocities ``xdot^a`` stay formal."""

    one_form: OneForm
    l0: Expr

    def on_shell(self, f: VectorField) -> Expr:
        """Value with ``xdot = f`` substituted."""
        return self.one_form.contract(f) + self.l0

    def momenta(self) -> list[Expr]:
        """``dL/d xdot^j`` for the position velocities."""
        return list(self.one_form.components[: self.one_form.n])


@dataclass(frozen=True)
class SecondOrderLagrangian:
    """``L(q, qdot)`` stored in the phase ring with ``qdot^j`` in the slot ``x^{n+j}``."""

    expr: Expr
    n: int = field(default=0)

    def momenta(self) -> list[Expr]:
        return [self.expr.diff(self.n + j) for j in range(1, self.n + 1)]

    def eval(self, state: SecondOrderState) -> float:
        return self.expr.eval(state.to_phase())


def lagrangians(cfg) -> tuple[SecondOrderLagrangian, FirstOrderLagrangian]:
    cfg = as_config(cfg)
    n, R = cfg.n, cfg.ring
    L2 = R.zero
    for k in range(1, n + 1):
        L2 = L2 + R.p(k) ** 2 / 2
    for k in range(1, n):
        L2 = L2 - R.E(k)
    l = OneForm([R.p(j) for j in range(1, n + 1)] + [0] * n, n)
    return SecondOrderLagrangian(L2, n), FirstOrderLagrangian(l, -hamiltonian0(cfg))
