import math

import numpy as np
import pytest

import auxetikit as ak


def test_shapes():
    assert ak.shapes() == ["rect", "diamond", "oval", "peanut"]


def test_solid_cell_matches_base_stiffness():
    h = ak.homogenize("rect", 0.0, 0.0, E=1.0, nu=0.25, n=16)
    assert h["c11"] == pytest.approx(1.2, rel=1e-12)
    assert h["c12"] == pytest.approx(0.4, rel=1e-12)
    assert h["c33"] == pytest.approx(0.4, rel=1e-12)
    assert h["nu_eff"] == pytest.approx(1.0 / 3.0)
    np.testing.assert_allclose(h["full"], ak.base_stiffness(1.0, 0.25), atol=1e-12)


def test_perforated_cell_is_softer_and_linear_in_E():
    a = ak.homogenize("oval", 0.2, 0.4, E=1.0, nu=0.3, n=32)
    b = ak.homogenize("oval", 0.2, 0.4, E=3500.0, nu=0.3, n=32)
    assert 0.0 < a["c11"] < ak.base_stiffness(1.0, 0.3)[0, 0]
    assert b["c11"] == pytest.approx(3500.0 * a["c11"], rel=1e-12)


def test_validation_errors():
    with pytest.raises(ak.ValidationError):
        ak.homogenize("rect", 0.6, 0.5, n=16)
    with pytest.raises(ValueError):
        ak.homogenize("hexagon", 0.1, 0.2, n=16)
    with pytest.raises(ak.ConvergenceError):
        ak.homogenize("rect", 0.3, 0.5, n=16, tol=1e-300)


def test_rasterize():
    grid = ak.rasterize("rect", 0.3, 0.5, 64)
    assert grid.shape == (64, 64)
    assert grid.dtype == np.uint8
    assert 1.0 - grid.mean() == pytest.approx(4 * 0.3 * 0.5, abs=4 / 64)
    assert ak.geometry_svg("peanut", 0.2, 0.5).startswith("<svg")


def test_generate_train_predict_inverse(tmp_path):
    ds = ak.generate("rect", 60, n=16, seed=3)
    assert len(ds) == 60
    assert ds.rows.shape == (60, 6)
    assert ds.meta["grid_n"] == 16
    path = tmp_path / "rect.csv"
    ds.save(str(path))
    back = ak.Dataset.load(str(path))
    assert back.fingerprint() == ds.fingerprint()

    models = [ak.fit_forest(ds, t, n_trees=10) for t in ("c11", "c12", "c33")]
    assert models[0].target == "c11"
    x = ds.rows[:5, :3]
    np.testing.assert_array_equal(models[0].predict_many(x), [models[0].predict(*r) for r in x])
    assert models[0].surrogate_predict(0.1, 0.4, 0.3) == models[0].surrogate_predict(0.4, 0.1, 0.3)

    model_path = tmp_path / "rect_c11.json"
    models[0].save(str(model_path))
    assert ak.ForestModel.load(str(model_path)).to_json() == models[0].to_json()

    model, scores = ak.train_and_evaluate(ds, "c11", n_trees=10)
    assert scores["n_test"] == 6
    assert scores["r2_test"] <= 1.0

    r = ak.inverse(*models, nu=0.3, c11=1000.0, c12=50.0, E=3500.0, eval_count=2000)
    assert r["evaluations"] >= 2000
    assert r["d_rel"] + r["D_rel"] < 1.0
    assert isinstance(r["feasible"], bool)


def test_sweep():
    s = ak.sweep("rect", d_rel=0.2, D_min=0.1, D_max=0.7, step=0.3, n=16)
    assert list(s["D_rel"]) == [0.1, 0.4, 0.7]
    assert np.all(np.diff(s["c11_over_E"]) < 0)
    assert s["onset"] is None or 0.1 <= s["onset"] <= 0.7
    assert all(math.isfinite(v) for v in s["nu_eff"])
