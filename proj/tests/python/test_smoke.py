import json
import math

import pytest

import convlab


def test_aic_level_is_flat():
    values = [convlab.truth_prob_analytic("AIC", 0.0, n) for n in (10, 100, 1000)]
    assert values[0] == pytest.approx(math.erf(1.0), abs=1e-12)
    assert max(values) - min(values) < 1e-12
    assert convlab.truth_prob_analytic(1.96, 0.0, 100) == pytest.approx(0.95, abs=5e-4)


def test_mc_matches_analytic():
    p, se = convlab.truth_prob_mc("BIC", 0.0, 100, trials=20000, seed=3)
    assert abs(p - convlab.truth_prob_analytic("BIC", 0.0, 100)) <= 4 * se + 1e-4
    assert convlab.truth_prob_mc("BIC", 0.0, 100, trials=20000, seed=3) == (p, se)


def test_bad_inputs_raise():
    with pytest.raises(ValueError):
        convlab.truth_prob_analytic("CIA", 0.0, 10)
    with pytest.raises(ValueError):
        convlab.truth_prob_analytic("BIC", 0.0, 1)
    with pytest.raises(convlab.ConfigError, match="ratio"):
        convlab.validate_config('{"lineworld": {"ratio": 2}}')


def test_mstar_converges_and_is_stable():
    recs = convlab.mstar_check([-0.3, 0.0, 0.25], horizon=60)
    assert [r["status"] for r in recs] == ["CONVERGES"] * 3
    assert all(r["stable"] for r in recs)
    w = convlab.refute_uniform(0.1)
    assert w["verdict"] != ("SIMPLE" if w["theta"] == 0 else "COMPLEX")


def test_score_sheet_pattern():
    sheet = convlab.perrin_score_sheet("WAY2", step=0.1)
    assert sheet["ae"]["pass"] and sheet["maximal"]["pass"]
    assert not sheet["stable"]["pass"]


def test_regime_experiment_shape():
    s = convlab.regime_experiment("poly", [1, -2, 0.5], sigma=1.0, max_degree=4, n=100, reps=100, seed=2)
    assert 0.0 <= s["correct_bic"] <= 1.0
    assert s["mean_excess_aic"] >= 0.0


def test_run_writes_outputs(tmp_path):
    cfg = json.dumps({"experiment": "gaussian", "seed": 1,
                      "gaussian": {"trials": 2000, "n_ladder": [10, 100]}})
    assert convlab.validate_config(cfg)["seed"] == 1
    result = convlab.run(cfg, str(tmp_path))
    assert result["violations"] == []
    assert (tmp_path / "summary.json").exists()
    assert (tmp_path / "manifest.json").exists()
