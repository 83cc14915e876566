"""Lift the dispatch QCQP to an LP over ``(x, X)`` with bound-factor rows.

Column layout: the ``n`` entries of ``x`` followed by one column per entry of
the upper triangle of ``X`` in row-major order, so ``X_ij`` and ``X_ji`` share
a column.  For each pair ``i <= j`` the four McCormick rows are

    X_ij >= l_i x_j + l_j x_i - l_i l_j
    X_ij >= u_i x_j + u_j x_i - u_i u_j
    X_ij <= l_i x_j + u_j x_i - l_i u_j
    X_ij <= u_i x_j + l_j x_i - u_i l_j

On the diagonal the last two coincide; ``dedupe_diagonal`` keeps only one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .dispatch import QcqpModel
from .errors import AssemblyError

MC_LL, MC_UU, MC_LU, MC_UL = "rlt_ll", "rlt_uu", "rlt_lu", "rlt_ul"


def triu_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n)


def pair_column(n: int) -> np.ndarray:
    """``(n, n)`` array mapping ``(i, j)`` to the LP column holding ``X_ij``."""
    iu, ju = triu_pairs(n)
    cols = np.empty((n, n), dtype=int)
    cols[iu, ju] = n + np.arange(iu.size)
    cols[ju, iu] = cols[iu, ju]
    return cols


def lift_quadratic(Q: np.ndarray) -> np.ndarray:
    """Coefficients over the ``X`` columns such that ``coef @ triu(X) == Q o X``.

    Off-diagonal pairs collect ``Q_ij + Q_ji``.
    """
    n = Q.shape[0]
    iu, ju = triu_pairs(n)
    coef = Q[iu, ju] + Q[ju, iu]
    diag = iu == ju
    coef[diag] = Q[iu[diag], ju[diag]]
    return coef


@dataclass(frozen=True, eq=False)
class LiftedLp:
    """``min c'z + c0`` s.t. ``A_ub z <= b_ub``, ``A_eq z = b_eq``, ``lb <= z <= ub``."""

    n: int
    c: np.ndarray
    c0: float
    A_ub: sp.csr_matrix
    b_ub: np.ndarray
    A_eq: sp.csr_matrix
    b_eq: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    row_kinds: tuple[str, ...]
    eq_kinds: tuple[str, ...]
    n_model_rows: int
    n_rlt_rows: int

    @property
    def n_cols(self) -> int:
        return self.c.size

    @property
    def n_pairs(self) -> int:
        return self.n * (self.n + 1) // 2

    def pack(self, x: np.ndarray, X: np.ndarray) -> np.ndarray:
        iu, ju = triu_pairs(self.n)
        return np.concatenate([x, X[iu, ju]])

    def unpack(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        n = self.n
        iu, ju = triu_pairs(n)
        X = np.empty((n, n))
        X[iu, ju] = z[n:]
        X[ju, iu] = z[n:]
        return z[:n].copy(), X

    def objective(self, z: np.ndarray) -> float:
        return float(self.c @ z + self.c0)


@dataclass(frozen=True, eq=False)
class LiftedSolution:
    x_star: np.ndarray
    X_star: np.ndarray
    objective: float
    rank1_gap: float


def mccormick_rows(lower: np.ndarray, upper: np.ndarray, dedupe_diagonal: bool = True):
    """Sparse ``(A, b, kinds)`` for all bound-factor rows over ``(x, triu X)``."""
    n = lower.size
    iu, ju = triu_pairs(n)
    xcol = n + np.arange(iu.size)
    li, lj, ui, uj = lower[iu], lower[ju], upper[iu], upper[ju]
    # (sign on X, coef on x_j, coef on x_i, rhs); row: sX*X + cj*x_j + ci*x_i <= rhs
    forms = [
        (MC_LL, -1.0, li, lj, li * lj),
        (MC_UU, -1.0, ui, uj, ui * uj),
        (MC_LU, 1.0, -li, -uj, -li * uj),
        (MC_UL, 1.0, -ui, -lj, -ui * lj),
    ]
    rows, cols, vals, rhs, kinds = [], [], [], [], []
    r0 = 0
    diag = iu == ju
    for kind, sX, cj, ci, b in forms:
        keep = np.ones(iu.size, dtype=bool)
        if dedupe_diagonal and kind == MC_UL:
            keep = ~diag
        m = int(keep.sum())
        r = r0 + np.arange(m)
        rows += [r, r, r]
        cols += [xcol[keep], ju[keep], iu[keep]]
        vals += [np.full(m, sX), cj[keep], ci[keep]]
        rhs.append(b[keep])
        kinds += [kind] * m
        r0 += m
    A = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(r0, n + iu.size)).tocsr()
    A.sum_duplicates()
    return A, np.concatenate(rhs), kinds


def lift(model: QcqpModel, dedupe_diagonal: bool = True) -> LiftedLp:
    n = model.n
    for name, bound in (("lower", model.lower), ("upper", model.upper)):
        bad = np.flatnonzero(~np.isfinite(bound))
        if bad.size:
            raise AssemblyError(f"x[{bad[0]}] has no finite {name} bound; McCormick rows need both")
    n_pairs = n * (n + 1) // 2
    ncol = n + n_pairs

    c = np.concatenate([model.b0, lift_quadratic(model.Q0)])

    def linear_row(row) -> np.ndarray:
        coef = np.zeros(ncol)
        coef[:n] = row.b
        if row.Q is not None:
            coef[n:] = lift_quadratic(row.Q)
        return coef

    M = np.array([linear_row(r) for r in model.ineqs]).reshape(len(model.ineqs), ncol)
    A_model = sp.csr_matrix(M)
    A_model.eliminate_zeros()
    b_model = np.array([r.c for r in model.ineqs])
    A_rlt, b_rlt, rlt_kinds = mccormick_rows(model.lower, model.upper, dedupe_diagonal)

    E = np.array([linear_row(r) for r in model.eqs]).reshape(len(model.eqs), ncol)
    A_eq = sp.csr_matrix(E)
    A_eq.eliminate_zeros()

    lb = np.concatenate([model.lower, np.full(n_pairs, -np.inf)])
    ub = np.concatenate([model.upper, np.full(n_pairs, np.inf)])
    return LiftedLp(
        n=n, c=c, c0=model.c0,
        A_ub=sp.vstack([A_model, A_rlt]).tocsr(), b_ub=np.concatenate([b_model, b_rlt]),
        A_eq=A_eq, b_eq=np.array([r.c for r in model.eqs]),
        lb=lb, ub=ub,
        row_kinds=tuple(r.tag.kind for r in model.ineqs) + tuple(rlt_kinds),
        eq_kinds=tuple(r.tag.kind for r in model.eqs),
        n_model_rows=len(model.ineqs), n_rlt_rows=len(rlt_kinds),
    )


def rank1_gap(x: np.ndarray, X: np.ndarray) -> float:
    return float(np.max(np.abs(X - np.outer(x, x)))) if x.size else 0.0


def extract(lp: LiftedLp, z: np.ndarray, objective: float | None = None) -> LiftedSolution:
    x, X = lp.unpack(np.asarray(z, dtype=float))
    Z = lp.objective(z) if objective is None else float(objective)
    return LiftedSolution(x, X, Z, rank1_gap(x, X))
