"""Numerical integration of the Toda flow and trajectory-level checks.

Two explicit integrators are provided: classical fixed-step RK4 and the
Dormand-Prince 5(4) embedded pair with local error control.  Every accepted
step is recorded, together with the right-hand side at that point, so that
residual checks can reuse the derivatives without re-evaluating the flow.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DomainError, SingularEvaluationError, StiffnessError
from .lattice import PhaseState, as_config, toda_rhs, toda_rhs_offset
from .tensors import VectorField

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass
class Trajectory:
    """Accepted samples of one integration, in time order."""

    times: np.ndarray
    states: np.ndarray       # (m, 2n)
    derivatives: np.ndarray  # (m, 2n)
    method: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.states.ndim != 2 or self.states.shape[1] % 2:
            raise DomainError("states must have shape (m, 2n)")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise DomainError("trajectory times must increase strictly")

    @property
    def n(self) -> int:
        return self.states.shape[1] // 2

    def __len__(self):
        return len(self.times)

    @property
    def samples(self) -> list[PhaseState]:
        return [PhaseState(x, t) for t, x in zip(self.times, self.states)]

    @property
    def final(self) -> PhaseState:
        return PhaseState(self.states[-1], self.times[-1])


@dataclass(frozen=True)
class TransportConfig:
    epsilon: float = 1e-6
    T: float = 5.0
    tol: float = 1e-12

    def __post_init__(self):
        if self.epsilon == 0:
            raise DomainError("epsilon must be nonzero")
        if not self.T > 0:
            raise DomainError("horizon T must be positive")
        if not self.tol > 0:
            raise DomainError("tolerance must be positive")


def _rk4(rhs, t0, y0, T, h):
    steps = max(1, int(np.ceil(T / h - 1e-12)))
    h = T / steps
    ts = t0 + h * np.arange(steps + 1)
    ys = np.empty((steps + 1, y0.size))
    ds = np.empty_like(ys)
    y = y0.copy()
    ys[0] = y
    for i in range(steps):
        k1 = rhs(ts[i], y)
        ds[i] = k1
        k2 = rhs(ts[i] + h / 2, y + h / 2 * k1)
        k3 = rhs(ts[i] + h / 2, y + h / 2 * k2)
        k4 = rhs(ts[i] + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        ys[i + 1] = y
    ds[-1] = rhs(ts[-1], y)
    return ts, ys, ds, {"h": h, "accepted": steps, "rejected": 0}


def _rk45(rhs, t0, y0, T, rtol, atol, h0=None):
    t_end = t0 + T
    y = y0.copy()
    t = t0
    k = np.empty((7, y0.size))
    k[0] = rhs(t, y)
    h = h0 if h0 is not None else min(T, 0.01 * (rtol ** 0.2) / max(1e-3, np.max(np.abs(k[0]))) + 1e-3)
    h_min = 1e-12 * T
    ts, ys, ds = [t], [y.copy()], [k[0].copy()]
    accepted = rejected = 0
    while t < t_end:
        h = min(h, t_end - t)
        if h < h_min and t_end - t > h_min:
            raise StiffnessError(f"step size {h:.3g} fell below {h_min:.3g} at t={t:.6g}")
        for s in range(1, 7):
            k[s] = rhs(t + _C[s] * h, y + h * np.dot(_A[s], k[:s]))
        y_new = y + h * np.dot(_B5, k)
        err = h * np.dot(_E, k)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        e = float(np.max(np.abs(err) / scale))
        if not np.isfinite(e):
            rejected += 1
            h /= 2
            continue
        if e <= 1.0:
            t_new = t + h if t_end - (t + h) > 1e-14 * max(1.0, abs(t_end)) else t_end
            t, y = t_new, y_new
            k[0] = k[6]  # first-same-as-last
            ts.append(t)
            ys.append(y.copy())
            ds.append(k[0].copy())
            accepted += 1
            h *= min(5.0, 0.9 * (1.0 / max(e, 1e-10)) ** 0.2)
        else:
            rejected += 1
            h /= 2
    return np.array(ts), np.array(ys), np.array(ds), {"accepted": accepted, "rejected": rejected}


def solve(rhs: Callable, y0, T: float, *, t0: float = 0.0, method: str = "rk45", tol: float = 1e-10,
          h: float | None = None, atol=None) -> tuple:
    """Integrate ``dy/dt = rhs(t, y)``; returns ``(times, states, derivatives, meta)``."""
    if not T > 0:
        raise DomainError("horizon T must be positive")
    y0 = np.asarray(y0, dtype=float)
    if method == "rk4":
        if h is None:
            raise DomainError("rk4 needs a step size h")
        if not h > 0:
            raise DomainError("step size must be positive")
        ts, ys, ds, meta = _rk4(rhs, t0, y0, T, h)
    elif method == "rk45":
        if not tol > 0:
            raise DomainError("tolerance must be positive")
        atol = tol if atol is None else np.asarray(atol, dtype=float)
        ts, ys, ds, meta = _rk45(rhs, t0, y0, T, tol, atol, h)
        meta["tol"] = tol
    else:
        raise DomainError(f"unknown method {method!r}")
    return ts, ys, ds, meta


def integrate(cfg, x0, T: float, tol: float = 1e-10, method: str = "rk45", h: float | None = None) -> Trajectory:
    """Trajectory of the Toda flow from ``x0`` over ``[t0, t0 + T]``."""
    cfg = as_config(cfg)
    state = x0 if isinstance(x0, PhaseState) else PhaseState(np.asarray(x0, dtype=float))
    if state.n != cfg.n:
        raise DomainError(f"x0 has {state.x.size} coordinates, expected {2 * cfg.n}")
    ts, ys, ds, meta = solve(lambda t, y: toda_rhs(y), state.x, T, t0=state.time, method=method, tol=tol, h=h)
    return Trajectory(ts, ys, ds, method, meta)


def _evaluator(q):
    f = q.lambdify()
    return lambda traj: np.asarray(f(traj.states.T, traj.times), dtype=float)


def conservation_report(traj: Trajectory, quantities) -> dict | list:
    """``max_t |Q(t) - Q(0)| / max(1, |Q(0)|)`` for each quantity.

    ``quantities`` is a sequence (a list of drifts is returned) or a mapping
    from names (a dict is returned).
    """
    named = isinstance(quantities, Mapping)
    items = quantities.items() if named else enumerate(quantities)
    out = {}
    for key, q in items:
        if q.n != traj.n:
            raise DomainError(f"quantity has n={q.n}, trajectory has n={traj.n}")
        vals = _evaluator(q)(traj)
        out[key] = float(np.max(np.abs(vals - vals[0])) / max(1.0, abs(vals[0])))
    return out if named else [out[i] for i in range(len(out))]


def _field_evaluator(eta: VectorField):
    fs = [c.lambdify() for c in eta]

    def ev(X, t):
        return np.array([np.broadcast_to(f(X, t), np.shape(t)) for f in fs])

    return ev


def symmetry_transport_test(cfg, eta: VectorField, x0, tc: TransportConfig = TransportConfig()) -> dict:
    """Compare the flow of ``x0 + eps eta(x0)`` with ``x(t) + eps eta(x(t), t)``.

    The offset ``delta = x' - x`` is integrated together with ``x`` using the
    cancellation-free difference of the flow, so its error is relative to
    ``eps`` rather than to ``|x|``.  The reported mismatch is
    ``max_t |delta(t) - eps eta(x(t), t)| / eps^2``; it stays bounded for a
    symmetry and grows like ``1/eps`` otherwise.
    """
    cfg = as_config(cfg)
    state = x0 if isinstance(x0, PhaseState) else PhaseState(np.asarray(x0, dtype=float))
    if state.n != cfg.n or eta.n != cfg.n:
        raise DomainError("field, state and config disagree on n")
    m = 2 * cfg.n
    eps = tc.epsilon
    ev = _field_evaluator(eta)
    d0 = eps * ev(state.x, state.time)

    def rhs(t, y):
        x, d = y[:m], y[m:]
        return np.concatenate([toda_rhs(x), toda_rhs_offset(x, d)])

    atol = np.concatenate([np.full(m, tc.tol), np.full(m, tc.tol * abs(eps))])
    ts, ys, _, meta = solve(rhs, np.concatenate([state.x, d0]), tc.T, t0=state.time, tol=tc.tol, atol=atol)
    X, D = ys[:, :m], ys[:, m:]
    target = eps * ev(X.T, ts).T
    mismatch = np.max(np.abs(D - target), axis=1)
    return {
        "epsilon": eps,
        "T": tc.T,
        "max_mismatch": float(np.max(mismatch)),
        "mismatch_over_eps2": float(np.max(mismatch) / eps ** 2),
        "samples": len(ts),
        "meta": meta,
    }


def _match(ref: np.ndarray, cur: np.ndarray) -> float:
    """Largest distance after pairing each reference eigenvalue with its nearest unused one."""
    free = list(range(len(cur)))
    worst = 0.0
    for r in ref:
        d = [abs(cur[i] - r) for i in free]
        j = int(np.argmin(d))
        worst = max(worst, d[j])
        free.pop(j)
    return worst


def isospectral_drift(traj: Trajectory, Lambda, report: bool = False):
    """Largest eigenvalue deviation of ``Lambda`` from its value at the first sample.

    Samples where an entry cannot be evaluated are skipped; with
    ``report=True`` a dict with the drift and the skipped count is returned.
    """
    m = Lambda.size
    fns = [[Lambda[a, b].lambdify() for b in range(m)] for a in range(m)]
    ref = None
    drift, skipped = 0.0, 0
    for t, x in zip(traj.times, traj.states):
        try:
            M = np.array([[float(fns[a][b](x, t)) for b in range(m)] for a in range(m)])
        except SingularEvaluationError:
            skipped += 1
            continue
        ev = np.linalg.eigvals(M)
        if ref is None:
            ref = ev
            continue
        drift = max(drift, _match(ref, ev))
    if ref is None:
        raise SingularEvaluationError("Lambda is singular at every sample")
    if report:
        return {"drift": drift, "skipped": skipped, "samples": len(traj.times)}
    return drift


def spectrum(Lambda, state: PhaseState) -> np.ndarray:
    return np.linalg.eigvals(Lambda.eval(state.x, state.time))


def to_csv(traj: Trajectory, fh=None) -> str | None:
    """Rows ``t,x1..x{2n}`` with 17 significant digits."""
    buf = io.StringIO() if fh is None else fh
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"x{a}" for a in range(1, 2 * traj.n + 1)])
    for t, x in zip(traj.times, traj.states):
        w.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in x])
    return buf.getvalue() if fh is None else None


def read_csv(fh) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`to_csv`; returns ``(times, states)``."""
    r = csv.reader(fh)
    header = next(r)
    if header[0] != "t" or len(header) % 2 != 1:
        raise DomainError("not a trajectory CSV")
    rows = np.array([[float(v) for v in row] for row in r if row])
    return rows[:, 0], rows[:, 1:]
