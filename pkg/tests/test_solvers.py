from dataclasses import replace

import numpy as np
import pytest

from grccrtd.errors import SolverError
from grccrtd.ingest import SolverOptions
from grccrtd.pipeline import CONE, RLT, build_model, make_study, run, with_config
from grccrtd.rlt import lift
from grccrtd.solvers import (INFEASIBLE, OPTIMAL, HighsBackend, SolveResult, certify, get_backend,
                             register_backend, solve_cone_reference, solve_lifted)
from oracles import dc_dispatch_cost
from conftest import fixture_run, fixture_study


def overloaded(study):
    case = study.case
    cap = case.gen_array("p_max").sum() + case.wind_forecast.sum()
    loads = tuple(d * 1.5 * cap / case.load_vector.sum() for d in case.loads)
    return make_study(replace(case, loads=loads), study.cfg)


def test_result_invariant():
    with pytest.raises(ValueError):
        SolveResult(OPTIMAL, "x", 0.0)
    with pytest.raises(ValueError):
        SolveResult(INFEASIBLE, "x", 0.0, objective=1.0)
    with pytest.raises(SolverError, match="infeasible"):
        SolveResult(INFEASIBLE, "x", 0.0).require_optimal()


def test_relaxation_ordering(fixture_name):
    lp = fixture_run(fixture_name, RLT)
    cone = fixture_run(fixture_name, CONE)
    assert lp.result.optimal and cone.result.optimal
    assert lp.objective <= cone.objective + 1e-6


def test_cone_solution_certifies(fixture_name):
    cert = fixture_run(fixture_name, CONE).certification
    assert cert.passed, cert.violations[:3]


def test_lp_certification_is_recorded(case3):
    res = fixture_run("case3", RLT)
    assert res.certification.max_violation >= 0.0
    if res.certification.passed:
        assert res.objective == pytest.approx(fixture_run("case3", CONE).objective, rel=1e-6)


def test_infeasible_fixture(case3):
    st = overloaded(case3)
    assert run(st, RLT).result.status == INFEASIBLE
    assert run(st, CONE).result.status == INFEASIBLE
    assert run(st, RLT).certification is None


def test_certify_reports_participation_shortfall(case3):
    model, _ = build_model(case3)
    G = model.n_gen
    x = np.concatenate([[1.2, 0.0], np.full(G, 0.45)])
    rep = certify(x, model)
    assert rep.by_kind["pf_sum"] == pytest.approx(0.1)
    assert ("pf_sum", pytest.approx(0.1)) in [(t, v) for t, v in rep.violations]
    assert not rep.passed


def test_certify_dimension(case3):
    model, _ = build_model(case3)
    with pytest.raises(ValueError):
        certify(np.zeros(3), model)


def test_tighter_line_risk_raises_cost(case3):
    base = run(case3, CONE).objective
    tight = run(with_config(case3, eps_line=(0.05,) * case3.case.n_line), CONE).objective
    assert tight >= base - 1e-7


def test_zero_uncertainty_cone_matches_dc_dispatch(fixture_name):
    res = fixture_run(fixture_name, CONE, "risk_neutral")
    ref = dc_dispatch_cost(fixture_study(fixture_name, "risk_neutral").case)
    assert res.result.optimal
    assert res.objective == pytest.approx(ref, rel=1e-7)


def test_deterministic_repeat(case3):
    a, b = run(case3, RLT), run(case3, RLT)
    assert a.result.status == b.result.status
    assert a.objective == pytest.approx(b.objective, abs=1e-9)
    assert np.array_equal(a.result.x_star, b.result.x_star)


def test_backend_registry(case3):
    with pytest.raises(SolverError, match="unknown LP backend"):
        get_backend("nope")

    class Recording(HighsBackend):
        name = "recording"
        calls = 0

        def solve(self, lp, options):
            Recording.calls += 1
            return super().solve(lp, options)

    register_backend(Recording())
    model, _ = build_model(case3)
    res = solve_lifted(lift(model), SolverOptions(lp_backend="recording"))
    assert Recording.calls == 1 and res.optimal


def test_solve_time_recorded(case3):
    model, ann = build_model(case3)
    res = solve_cone_reference(model, ann)
    assert res.solve_time > 0 and res.backend == "cone"
