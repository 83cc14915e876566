import numpy as np
import pytest

from grccrtd.lpformat import column_names, objective_offset, write_lp
from grccrtd.pipeline import RLT, build_model, run
from grccrtd.rlt import lift
from conftest import fixture_study


def test_header_and_sections(case3):
    model, _ = build_model(case3)
    lp = lift(model)
    text = write_lp(lp)
    for section in ("Minimize", "Subject To", "Bounds", "End"):
        assert f"\n{section}\n" in "\n" + text
    assert objective_offset(text) == lp.c0
    names = column_names(lp)
    assert len(names) == lp.n_cols == len(set(names))
    assert text.count(" <= ") >= lp.A_ub.shape[0]


@pytest.mark.parametrize("name", ["case3", "case5", "case14"])
def test_round_trip_through_highs(name, tmp_path):
    highspy = pytest.importorskip("highspy")
    study = fixture_study(name)
    res = run(study, RLT)
    path = tmp_path / "model.lp"
    text = write_lp(res.lp)
    path.write_text(text)
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    # near-zero products from the shift factors are dropped with a warning
    assert h.readModel(str(path)) in (highspy.HighsStatus.kOk, highspy.HighsStatus.kWarning)
    h.run()
    assert h.getModelStatus() == highspy.HighsModelStatus.kOptimal
    z = h.getInfo().objective_function_value + objective_offset(text)
    assert z == pytest.approx(res.objective, rel=1e-6)
