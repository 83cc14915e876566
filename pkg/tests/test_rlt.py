import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grccrtd.dispatch import QcqpModel
from grccrtd.errors import AssemblyError
from grccrtd.ingest import SolverOptions
from grccrtd.pipeline import build_model, run, with_config
from grccrtd.rlt import MC_LL, MC_UL, extract, lift, lift_quadratic, mccormick_rows, pair_column, rank1_gap
from grccrtd.solvers import solve_lifted
from oracles import line_residuals_direct, objective_direct
from conftest import fixture_study


def scalar_model(lower=0.0, upper=1.0):
    return QcqpModel(1, 1, np.array([[1.0]]), np.zeros(1), 0.0, (), (), np.array([lower]), np.array([upper]))


def test_scalar_envelope():
    A, b, kinds = mccormick_rows(np.array([0.0]), np.array([1.0]))
    rows = {(tuple(A.toarray()[r]), b[r]) for r in range(A.shape[0])}
    # columns (x, X): -X <= 0, 2x - X <= 1, X - x <= 0
    assert rows == {((0.0, -1.0), 0.0), ((2.0, -1.0), 1.0), ((-1.0, 1.0), 0.0)}
    assert len(kinds) == 3


def test_counts_for_ten_columns():
    lo, hi = np.zeros(10), np.ones(10)
    A, _, kinds = mccormick_rows(lo, hi, dedupe_diagonal=False)
    assert A.shape == (220, 10 + 55)
    A, _, kinds = mccormick_rows(lo, hi, dedupe_diagonal=True)
    assert A.shape[0] == 220 - 10
    assert kinds.count(MC_UL) == 45 and kinds.count(MC_LL) == 55


def test_symmetric_column_map():
    cols = pair_column(4)
    assert np.array_equal(cols, cols.T)
    assert sorted(set(cols.ravel())) == list(range(4, 4 + 10))


def test_lift_quadratic_identity():
    rng = np.random.default_rng(0)
    Q = rng.normal(size=(5, 5))
    Q = Q + Q.T
    x = rng.normal(size=5)
    iu, ju = np.triu_indices(5)
    assert lift_quadratic(Q) @ np.outer(x, x)[iu, ju] == pytest.approx(x @ Q @ x, rel=1e-12)


@given(st.lists(st.floats(min_value=-3, max_value=3), min_size=6, max_size=6),
       st.lists(st.floats(min_value=0, max_value=1), min_size=6, max_size=6))
@settings(max_examples=60, deadline=None)
def test_rank1_points_satisfy_rlt_rows(lows, t):
    lower = np.array(lows)
    upper = lower + 1.5
    x = lower + np.array(t) * (upper - lower)
    A, b, _ = mccormick_rows(lower, upper)
    iu, ju = np.triu_indices(6)
    z = np.concatenate([x, np.outer(x, x)[iu, ju]])
    assert np.all(A @ z <= b + 1e-9)


def test_unbounded_entry_is_fatal():
    with pytest.raises(AssemblyError, match=r"x\[0\]"):
        lift(scalar_model(upper=np.inf))


def test_extract_scalar_gap():
    lp = lift(scalar_model())
    sol = extract(lp, np.array([0.5, 0.5]))
    assert sol.rank1_gap == pytest.approx(0.25)
    assert rank1_gap(np.array([0.3]), np.array([[0.09]])) == pytest.approx(0.0, abs=1e-15)


def test_scalar_toy_solves_to_zero():
    res = solve_lifted(lift(scalar_model())).require_optimal()
    assert res.objective == pytest.approx(0.0, abs=1e-9)
    assert res.x_star[0] == pytest.approx(0.0, abs=1e-9)


def test_lifted_rows_at_rank_one(fixture_name):
    study = fixture_study(fixture_name)
    model, _ = build_model(study)
    lp = lift(model)
    rng = np.random.default_rng(4)
    line_rows = [k for k, kind in enumerate(lp.row_kinds) if kind.startswith("line_") and "sign" not in kind]
    tags = [r.tag for r in model.ineqs if r.Q is not None]
    for _ in range(10):
        x = model.lower + rng.random(model.n) * (model.upper - model.lower)
        z = lp.pack(x, np.outer(x, x))
        assert lp.objective(z) == pytest.approx(objective_direct(study.case, x), rel=1e-9)
        direct = line_residuals_direct(study.case, study.cfg, x)
        vals = lp.A_ub[line_rows] @ z - lp.b_ub[line_rows]
        for v, tag in zip(vals, tags):
            ref = direct[tag.index][0 if tag.kind == "line_pos" else 1]
            assert v == pytest.approx(ref, rel=1e-9, abs=1e-9)


def test_rlt_rows_feasible_for_qcqp_feasible_point(case3):
    res = run(case3, "cone")
    model, _ = build_model(case3)
    lp = lift(model)
    x = res.result.x_star
    z = lp.pack(x, np.outer(x, x))
    assert np.max(lp.A_ub @ z - lp.b_ub) <= 1e-7
    assert np.max(np.abs(lp.A_eq @ z - lp.b_eq)) <= 1e-9


def test_dedupe_keeps_optimum(case3):
    a = run(case3, "rlt")
    b = run(with_config(case3, solver=SolverOptions(dedupe_diagonal=False)), "rlt")
    assert a.lp.A_ub.shape[0] < b.lp.A_ub.shape[0]
    assert a.objective == pytest.approx(b.objective, abs=1e-8)


def test_row_counts_deterministic(case3):
    m1, _ = build_model(case3)
    l1, l2 = lift(m1), lift(m1)
    assert l1.A_ub.shape == l2.A_ub.shape and l1.row_kinds == l2.row_kinds
    n = m1.n
    assert l1.n_cols == n + n * (n + 1) // 2


def test_lifted_equality_rows_have_no_products(case3):
    model, _ = build_model(case3)
    lp = lift(model)
    assert lp.A_eq[:, model.n:].nnz == 0
    assert lp.eq_kinds == ("balance", "pf_sum")
