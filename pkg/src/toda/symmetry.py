"""Symmetry fields of the Toda flow and the Lie-derivative calculus on them.

The five fields are generated from closed formulas valid for every ``n``:

* ``eta1`` -- the quadratic, explicitly time-dependent generator of the
  upward hierarchy;
* ``eta2`` -- a scaling-type symmetry, ``eta2^j = j - t p_j / 2``;
* ``eta3`` -- ``(t, .., t, 1, .., 1)``, a Galilean boost;
* ``eta4`` -- ``(1, .., 1, 0, .., 0)``, a rigid translation;
* ``eta5`` -- ``(Q, .., Q, P, .., P)`` with ``Q``, ``P`` the summed positions
  and momenta.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .errors import DomainError
from .expr import Expr, RationalExpr
from .lattice import as_config, flow_derivative, flow_field
from .tensors import Matrix, OneForm, SigmaMatrix, VectorField, simplify

__all__ = [
    "symmetry_field",
    "master_residual",
    "lie_bracket",
    "lie_derivative",
    "lie_derivative_mixed",
    "commutator_table",
    "bracket_jacobi_residual",
    "prolongation_residual",
    "VectorField",
    "OneForm",
    "SigmaMatrix",
]


def _eta1(cfg) -> VectorField:
    n, R = cfg.n, cfg.ring
    p, E, t = R.p, R.E, R.t
    half = Fraction(1, 2)
    pos, mom = [], []
    for j in range(1, n + 1):
        c = (n + 1 - j) * p(j)
        for k in range(1, j):
            c = c - half * p(k)
        for k in range(j + 1, n + 1):
            c = c + half * p(k)
        c = c + t * half * (p(j) ** 2 + E(j - 1) + E(j))
        pos.append(c)

        left = p(j - 1) + p(j) if j > 1 else p(j)
        right = p(j) + p(j + 1) if j < n else p(j)
        m = half * p(j) ** 2 + (n + 2 - j) * E(j - 1) - (n - j) * E(j)
        m = m + t * half * left * E(j - 1) - t * half * right * E(j)
        mom.append(m)
    return VectorField(pos + mom, n)


def _eta2(cfg) -> VectorField:
    n, R = cfg.n, cfg.ring
    half = Fraction(1, 2)
    pos = [j - half * R.t * R.p(j) for j in range(1, n + 1)]
    mom = [-half * R.p(j) - half * R.t * (R.E(j - 1) - R.E(j)) for j in range(1, n + 1)]
    return VectorField(pos + mom, n)


def _eta3(cfg) -> VectorField:
    n, R = cfg.n, cfg.ring
    return VectorField([R.t] * n + [R.one] * n, n)


def _eta4(cfg) -> VectorField:
    n = cfg.n
    return VectorField([1] * n + [0] * n, n)


def _eta5(cfg) -> VectorField:
    n, R = cfg.n, cfg.ring
    Q, P = R.zero, R.zero
    for i in range(1, n + 1):
        Q = Q + R.q(i)
        P = P + R.p(i)
    return VectorField([Q] * n + [P] * n, n)


_BUILDERS: dict[int, Callable] = {1: _eta1, 2: _eta2, 3: _eta3, 4: _eta4, 5: _eta5}


def symmetry_field(kind: int, cfg) -> VectorField:
    if kind not in _BUILDERS:
        raise DomainError(f"symmetry kind must be 1..5, got {kind!r}")
    return _BUILDERS[kind](as_config(cfg))


def _sum(terms, n):
    acc = Expr(n)
    for v in terms:
        acc = acc + v
    return acc


def _same_n(*objs):
    ns = {o.n for o in objs}
    if len(ns) > 1:
        raise DomainError(f"objects of different lattice sizes: {sorted(ns)}")
    return ns.pop()


def lie_bracket(A: VectorField, B: VectorField) -> VectorField:
    """``[A, B]^a = A^b d_b B^a - B^b d_b A^a``."""
    n = _same_n(A, B)
    m = 2 * n
    dB = [[B[a].diff(b + 1) for b in range(m)] for a in range(m)]
    dA = [[A[a].diff(b + 1) for b in range(m)] for a in range(m)]
    out = []
    for a in range(m):
        acc = Expr(n)
        for b in range(m):
            if not A[b].is_zero() and not dB[a][b].is_zero():
                acc = acc + A[b] * dB[a][b]
            if not B[b].is_zero() and not dA[a][b].is_zero():
                acc = acc - B[b] * dA[a][b]
        out.append(simplify(acc))
    return VectorField(out, n)


def _scalar_lie(X: VectorField, phi):
    acc = Expr(X.n)
    for a, xa in enumerate(X, start=1):
        if xa.is_zero():
            continue
        d = phi.diff(a)
        if not d.is_zero():
            acc = acc + xa * d
    return simplify(acc)


def _jacobian(X: VectorField):
    m = len(X)
    return [[X[c].diff(a + 1) for a in range(m)] for c in range(m)]  # J[c][a] = d_a X^c


def _one_form_lie(X: VectorField, w: OneForm) -> OneForm:
    n = _same_n(X, w)
    m = 2 * n
    J = _jacobian(X)
    out = []
    for a in range(m):
        acc = _scalar_lie(X, w[a])
        for b in range(m):
            if not w[b].is_zero() and not J[b][a].is_zero():
                acc = acc + w[b] * J[b][a]
        out.append(simplify(acc))
    return OneForm(out, n)


def _two_tensor_lie(X: VectorField, S: Matrix) -> list[list]:
    n = _same_n(X, S)
    m = 2 * n
    J = _jacobian(X)
    out = []
    for a in range(m):
        row = []
        for b in range(m):
            acc = _scalar_lie(X, S[a, b])
            for c in range(m):
                if not J[c][a].is_zero() and not S[c, b].is_zero():
                    acc = acc + S[c, b] * J[c][a]
                if not J[c][b].is_zero() and not S[a, c].is_zero():
                    acc = acc + S[a, c] * J[c][b]
            row.append(simplify(acc))
        out.append(row)
    return out


def lie_derivative_mixed(X: VectorField, M: Matrix) -> Matrix:
    """Lie derivative of a (1,1) tensor ``M_a^b`` (row index lower)."""
    n = _same_n(X, M)
    m = 2 * n
    J = _jacobian(X)
    out = []
    for a in range(m):
        row = []
        for b in range(m):
            acc = _scalar_lie(X, M[a, b])
            for c in range(m):
                if not J[c][a].is_zero() and not M[c, b].is_zero():
                    acc = acc + M[c, b] * J[c][a]
                if not J[b][c].is_zero() and not M[a, c].is_zero():
                    acc = acc - M[a, c] * J[b][c]
            row.append(simplify(acc))
        out.append(row)
    return Matrix(out, n)


def lie_derivative(X: VectorField, target):
    """Lie derivative along ``X``; the rule is picked from the target's type.

    Scalars, vector fields, one-forms and antisymmetric two-forms are
    supported; a plain :class:`Matrix` is treated as a covariant 2-tensor.
    Explicit time dependence of ``X`` is never differentiated.
    """
    if isinstance(target, (Expr, RationalExpr)):
        _same_n(X, target)
        return _scalar_lie(X, target)
    if isinstance(target, VectorField):
        return lie_bracket(X, target)
    if isinstance(target, OneForm):
        return _one_form_lie(X, target)
    if isinstance(target, SigmaMatrix):
        return SigmaMatrix(_two_tensor_lie(X, target), target.n)
    if isinstance(target, Matrix):
        return Matrix(_two_tensor_lie(X, target), target.n)
    raise TypeError(f"no Lie derivative rule for {type(target).__name__}")


def master_residual(eta: VectorField, f: VectorField | None = None) -> VectorField:
    """``d(eta)/dt + [f, eta]``; zero exactly when ``eta`` is a symmetry of ``f``."""
    if f is None:
        f = flow_field(eta.n)
    _same_n(eta, f)
    br = lie_bracket(f, eta)
    return VectorField([simplify(e.diff("t") + b) for e, b in zip(eta, br)], eta.n)


def prolongation_residual(eta: VectorField, f: VectorField | None = None) -> VectorField:
    """``eta^{n+j} - D_t eta^j`` for ``j = 1..n``, where ``D_t`` is the total flow derivative.

    Returned as a length-``2n`` field whose momentum half is zero.
    """
    n = eta.n
    if f is None:
        f = flow_field(n)
    comps = []
    for j in range(n):
        total = eta[j].diff("t") + flow_derivative(eta[j], f)
        comps.append(simplify(eta[n + j] - total))
    return VectorField(comps + [0] * n, n)


def bracket_jacobi_residual(A, B, C) -> VectorField:
    return (
        lie_bracket(lie_bracket(A, B), C)
        + lie_bracket(lie_bracket(B, C), A)
        + lie_bracket(lie_bracket(C, A), B)
    )


# ---------------------------------------------------------------------------
# commutator table
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Relation:
    """One printed commutation relation ``[eta_m, eta_k] = rhs``."""

    m: int
    k: int
    label: str
    rhs: Callable  # (cfg, etas) -> VectorField


def _table(n: int) -> list[Relation]:
    h = Fraction(1, 2)
    return [
        Relation(1, 2, "1/2 eta1", lambda c, e: h * e[1]),
        Relation(2, 3, "1/2 eta3", lambda c, e: h * e[3]),
        Relation(3, 1, "3/2 (n+1) eta4 - 2 eta2",
                 lambda c, e: Fraction(3 * (c.n + 1), 2) * e[4] - 2 * e[2]),
        Relation(3, 5, "n eta3", lambda c, e: c.n * e[3]),
        Relation(4, 5, "n eta4", lambda c, e: c.n * e[4]),
        Relation(2, 5, "1/2 n (n+1) eta4", lambda c, e: Fraction(c.n * (c.n + 1), 2) * e[4]),
    ]


def eta15_candidate(cfg, etas, j_of_component: Callable[[int], int]) -> VectorField:
    """Right-hand side of the printed ``[eta1, eta5]`` row for a choice of ``j``.

    ``j_of_component(a)`` gives the free index ``j`` used in component ``a``
    (1-based); the formula is
    ``n eta1^j eta4^a + n eta1^{n+j} (1 - eta4^a) + eta5^{n+j} (2 eta2^a - 3/2 (n+1) eta4^a)``.
    """
    n = cfg.n
    e1, e2, e4, e5 = etas[1], etas[2], etas[4], etas[5]
    comps = []
    for a in range(1, 2 * n + 1):
        j = j_of_component(a)
        if not 1 <= j <= n:
            raise DomainError(f"free index j={j} outside 1..{n}")
        four = e4[a - 1]
        v = (
            n * e1[j - 1] * four
            + n * e1[n + j - 1] * (1 - four)
            + e5[n + j - 1] * (2 * e2[a - 1] - Fraction(3 * (n + 1), 2) * four)
        )
        comps.append(v)
    return VectorField(comps, n)


def eta15_readings(cfg, etas) -> dict[str, VectorField]:
    """Candidate right-hand sides of the ``[eta1, eta5]`` row, keyed by reading."""
    n = cfg.n
    out = {}
    for j in range(1, n + 1):
        out[f"fixed j={j}"] = eta15_candidate(cfg, etas, lambda a, j=j: j)
    out["j = particle index of component a"] = eta15_candidate(cfg, etas, lambda a: (a - 1) % n + 1)
    # n eta1^j read as the sum over j, i.e. the average of the fixed-j readings
    acc = out["fixed j=1"]
    for j in range(2, n + 1):
        acc = acc + out[f"fixed j={j}"]
    out["averaged over j (n eta1^j -> sum_j eta1^j)"] = acc * Fraction(1, n)
    return out


def _entry(relation: str, n: int, residual: VectorField, reading: str | None = None) -> dict:
    ok = residual.is_zero()
    e = {"relation": relation, "n": n, "status": "pass" if ok else "fail"}
    if reading is not None:
        e["reading"] = reading
    if not ok:
        e["residual"] = residual.to_text()
    return e


def commutator_table(cfg) -> list[dict]:
    """Compute every ``[eta_m, eta_k]`` and compare it with the relation table.

    Pairs absent from the table (in either order) are expected to commute.
    The ``[eta1, eta5]`` row carries a free index ``j``; it is checked under
    each fixed ``j``, under ``j`` equal to the particle index of the component,
    with ``n eta1^j`` averaged into ``sum_j eta1^j``, and under the reading that
    it holds for every ``j`` simultaneously.  Reading entries have status
    ``info`` and a boolean ``holds``; one summary entry per ordered pair lists
    the readings that hold and passes iff there is at least one.
    """
    cfg = as_config(cfg)
    n = cfg.n
    etas = {k: symmetry_field(k, cfg) for k in range(1, 6)}
    brackets = {(m, k): lie_bracket(etas[m], etas[k]) for m in range(1, 6) for k in range(1, 6)}
    expected: dict[tuple[int, int], tuple[str, VectorField]] = {}
    for rel in _table(n):
        rhs = rel.rhs(cfg, etas)
        expected[(rel.m, rel.k)] = (rel.label, rhs)
        expected[(rel.k, rel.m)] = (f"-({rel.label})", -rhs)

    report = []
    for m in range(1, 6):
        for k in range(1, 6):
            name = f"[eta{m},eta{k}]"
            if {m, k} == {1, 5}:
                sign = 1 if (m, k) == (1, 5) else -1
                relation = f"{name} = {'' if sign > 0 else '-'}printed [eta1,eta5] row"
                fixed_ok, holding = [], []
                for label, rhs in eta15_readings(cfg, etas).items():
                    res = brackets[(m, k)] - sign * rhs
                    entry = _entry(relation, n, res, label)
                    entry["holds"] = entry.pop("status") == "pass"
                    entry["status"] = "info"
                    report.append(entry)
                    if label.startswith("fixed"):
                        fixed_ok.append(entry["holds"])
                    if entry["holds"]:
                        holding.append(label)
                every = "holds for every j"
                report.append({"relation": relation, "n": n, "reading": every, "status": "info",
                               "holds": all(fixed_ok)})
                if all(fixed_ok):
                    holding.append(every)
                report.append({"relation": relation, "n": n, "readings_holding": holding,
                               "status": "pass" if holding else "fail"})
                continue
            label, rhs = expected.get((m, k), ("0", None))
            res = brackets[(m, k)] if rhs is None else brackets[(m, k)] - rhs
            report.append(_entry(f"{name} = {label}", n, res))
    return report


def eta15_summary(report: list[dict]) -> dict:
    """Which readings of the ``[eta1, eta5]`` row hold, per lattice size."""
    out: dict = {}
    for e in report:
        if "reading" in e and e["relation"].startswith("[eta1,eta5]"):
            out.setdefault(e["n"], {})[e["reading"]] = e["holds"]
    return out
