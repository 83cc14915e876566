"""LP and cone backends plus certification of dispatch points."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Protocol

import cvxpy as cp
import numpy as np
from scipy.optimize import linprog

from .dispatch import LINE_NEG_SIGN, LINE_POS_SIGN, ModelAnnotations, QcqpModel
from .errors import SolverError
from .ingest import SolverOptions
from .rlt import LiftedLp, LiftedSolution, extract

log = logging.getLogger(__name__)

OPTIMAL, INFEASIBLE, UNBOUNDED, ITERATION_LIMIT, ERROR = (
    "optimal", "infeasible", "unbounded", "iteration_limit", "error")


@dataclass(frozen=True, eq=False)
class SolveResult:
    status: str
    backend: str
    solve_time: float
    x_star: np.ndarray | None = None
    objective: float | None = None
    message: str = ""
    lifted: LiftedSolution | None = None
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if (self.status == OPTIMAL) != (self.objective is not None):
            raise ValueError("objective must be present exactly when status is optimal")

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    def require_optimal(self) -> SolveResult:
        if not self.optimal:
            raise SolverError(f"{self.backend}: {self.status} ({self.message})")
        return self


class LpBackend(Protocol):
    name: str

    def solve(self, lp: LiftedLp, options: SolverOptions) -> SolveResult: ...


class HighsBackend:
    """Dual simplex through :func:`scipy.optimize.linprog`."""

    name = "highs"
    _status = {0: OPTIMAL, 1: ITERATION_LIMIT, 2: INFEASIBLE, 3: UNBOUNDED, 4: ERROR}

    def solve(self, lp: LiftedLp, options: SolverOptions) -> SolveResult:
        opts = {
            "primal_feasibility_tolerance": options.lp_tolerance,
            "dual_feasibility_tolerance": options.lp_tolerance,
            "time_limit": options.time_limit,
            "presolve": True,
        }
        t0 = time.perf_counter()
        res = linprog(lp.c, A_ub=lp.A_ub, b_ub=lp.b_ub, A_eq=lp.A_eq, b_eq=lp.b_eq,
                      bounds=np.column_stack([lp.lb, lp.ub]), method="highs-ds", options=opts)
        elapsed = time.perf_counter() - t0
        status = self._status.get(res.status, ERROR)
        if status != OPTIMAL:
            return SolveResult(status, self.name, elapsed, message=res.message)
        z = np.asarray(res.x, dtype=float)
        sol = extract(lp, z, float(res.fun) + lp.c0)
        return SolveResult(OPTIMAL, self.name, elapsed, sol.x_star, sol.objective, res.message, sol)


_BACKENDS: dict[str, LpBackend] = {"highs": HighsBackend()}


def register_backend(backend: LpBackend) -> None:
    """Make an external LP solver adapter selectable by ``backend.name``."""
    _BACKENDS[backend.name] = backend


def get_backend(name: str) -> LpBackend:
    try:
        return _BACKENDS[name]
    except KeyError:
        raise SolverError(f"unknown LP backend {name!r}; available: {sorted(_BACKENDS)}") from None


def solve_lifted(lp: LiftedLp, options: SolverOptions | None = None) -> SolveResult:
    options = options or SolverOptions()
    return get_backend(options.lp_backend).solve(lp, options)


_CVX_STATUS = {
    cp.OPTIMAL: OPTIMAL,
    cp.INFEASIBLE: INFEASIBLE,
    cp.UNBOUNDED: UNBOUNDED,
    cp.USER_LIMIT: ITERATION_LIMIT,
    cp.OPTIMAL_INACCURATE: ERROR,
    cp.INFEASIBLE_INACCURATE: INFEASIBLE,
    cp.UNBOUNDED_INACCURATE: UNBOUNDED,
}


def solve_cone_reference(model: QcqpModel, ann: ModelAnnotations,
                         options: SolverOptions | None = None) -> SolveResult:
    """Solve the convex restatement with one second-order cone per line direction.

    Linear rows (including the sign rows) are taken from ``model``; each
    squared line row is replaced by ``k ||F'(m_w - s e)|| <= r`` with
    ``S0 = F F'``.
    """
    options = options or SolverOptions()
    G = model.n_gen
    x = cp.Variable(model.n)
    p, alpha = x[:G], x[G:]
    c1 = np.diag(model.Q0)[:G]
    objective = cp.sum(cp.multiply(c1, cp.square(p))) + model.b0 @ x + model.c0

    lin = [r for r in model.ineqs if r.Q is None]
    cons = []
    if lin:
        cons.append(np.array([r.b for r in lin]) @ x <= np.array([r.c for r in lin]))
    cons.append(np.array([r.b for r in model.eqs]) @ x == np.array([r.c for r in model.eqs]))
    cons += [x >= model.lower, x <= model.upper]

    F = ann.sigma0_factor
    e = np.ones(F.shape[0])
    Fe = F.T @ e
    for ld in ann.lines:
        s = ld.m_g @ alpha
        q = ld.m_g @ p
        r_pos = ld.t_pos - q + ann.mu_s * s
        r_neg = ld.t_neg + q - ann.mu_s * s
        if F.size and (np.any(Fe) or np.any(F.T @ ld.m_w)):
            spread = ld.k * cp.norm(F.T @ ld.m_w - s * Fe, 2)
            cons += [spread <= r_pos, spread <= r_neg]
        else:
            cons += [r_pos >= 0, r_neg >= 0]

    prob = cp.Problem(cp.Minimize(objective), cons)
    tol = options.cone_tolerance
    t0 = time.perf_counter()
    try:
        prob.solve(solver=cp.CLARABEL, tol_gap_abs=tol, tol_gap_rel=tol, tol_feas=tol,
                   tol_ktratio=1e-7, max_iter=500, time_limit=options.time_limit)
    except cp.SolverError as exc:
        return SolveResult(ERROR, "cone", time.perf_counter() - t0, message=str(exc))
    elapsed = time.perf_counter() - t0
    status = _CVX_STATUS.get(prob.status, ERROR)
    if status != OPTIMAL:
        return SolveResult(status, "cone", elapsed, message=str(prob.status))
    xv = np.asarray(x.value, dtype=float)
    notes = []
    for row in model.ineqs:
        if row.tag.kind in (LINE_POS_SIGN, LINE_NEG_SIGN) and row.value(xv) > -1e-7:
            notes.append(f"sign row {row.tag} binds; cone optimum may differ from the squared form")
    for note in notes:
        log.info(note)
    return SolveResult(OPTIMAL, "cone", elapsed, xv, float(prob.value), str(prob.status), notes=tuple(notes))


@dataclass
class CertificationReport:
    max_violation: float
    violations: list[tuple[str, float]] = field(default_factory=list)
    by_kind: dict[str, float] = field(default_factory=dict)
    tol: float = 1e-6

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol

    def as_dict(self) -> dict:
        return {"passed": self.passed, "tol": self.tol, "max_violation": self.max_violation,
                "by_kind": self.by_kind, "violations": [[t, v] for t, v in self.violations]}


def certify(x: np.ndarray, model: QcqpModel, tol: float = 1e-6) -> CertificationReport:
    """Evaluate every model row and bound at ``x`` (no lifting)."""
    x = np.asarray(x, dtype=float)
    if x.size != model.n:
        raise ValueError(f"point has dimension {x.size}, model has {model.n}")
    amounts: list[tuple[str, str, float]] = []
    for row in model.ineqs:
        amounts.append((row.tag.kind, str(row.tag), max(0.0, row.value(x))))
    for row in model.eqs:
        amounts.append((row.tag.kind, str(row.tag), abs(row.value(x))))
    lo = np.maximum(model.lower - x, 0.0)
    hi = np.maximum(x - model.upper, 0.0)
    for j in range(model.n):
        amounts.append(("bound", f"bound[{j}]", max(lo[j], hi[j])))
    by_kind: dict[str, float] = {}
    for kind, _, v in amounts:
        by_kind[kind] = max(by_kind.get(kind, 0.0), v)
    worst = max((v for _, _, v in amounts), default=0.0)
    bad = sorted(((name, v) for _, name, v in amounts if v > tol), key=lambda t: -t[1])
    return CertificationReport(worst, bad, by_kind, tol)


__all__ = [
    "SolveResult", "HighsBackend", "register_backend", "get_backend",
    "solve_lifted", "solve_cone_reference", "certify", "CertificationReport",
]
