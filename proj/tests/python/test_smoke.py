import os

import numpy as np
import pytest

import _robustmct as rm

DATA = os.environ.get("ROBUSTMCT_DATA", "data/clin_synthetic.csv")


def normal_sample(seed=0, shift=0.0):
    rng = np.random.default_rng(seed)
    groups = [("0", rng.normal(0.0, 1.0, 15))]
    for g, mu in enumerate([0.0, 0.5, shift], start=1):
        groups.append((str(g), rng.normal(mu, 1.0, 15)))
    return rm.GroupedSample(groups)


def test_grouped_sample_accessors():
    s = normal_sample()
    assert s.num_groups == 4
    assert s.total_n == 60
    assert s.label(0) == "0"
    assert s.values(2).shape == (15,)
    assert len(s.means()) == 4


def test_dunnett_basic_shapes_and_monotone_p():
    s = normal_sample(seed=3, shift=2.0)
    res = rm.dunnett_test(s)
    assert len(res.labels) == 3
    assert res.p_adjusted.shape == (3,)
    assert res.df == 56
    # the shifted group should have the smallest adjusted p
    assert res.p_adjusted[2] == min(res.p_adjusted)
    assert res.p_adjusted[2] < 0.01
    # intervals bracket the estimates
    assert np.all(res.lower <= res.estimates)
    assert np.all(res.estimates <= res.upper)


def test_variance_variants_run():
    s = normal_sample(seed=5, shift=1.0)
    for variance in ("pooled", "satterthwaite", "sandwich"):
        res = rm.dunnett_test(s, variance=variance)
        assert np.all(np.isfinite(res.p_adjusted))
    with pytest.raises(ValueError):
        rm.dunnett_test(s, variance="bogus")


def test_robust_downweights_outliers():
    rng = np.random.default_rng(11)
    ctrl = rng.normal(0, 1, 15)
    trt = rng.normal(1.5, 1, 15)
    trt[0] += 40.0  # gross outlier inflates the pooled variance
    s = rm.GroupedSample([("0", ctrl), ("1", trt)])
    rob = rm.robust_dunnett(s)
    dun = rm.dunnett_test(s)
    assert rob.p_adjusted[0] < dun.p_adjusted[0]


def test_npar_effect_scale():
    s = normal_sample(seed=7, shift=2.0)
    res = rm.npar_dunnett(s)
    # relative effects live in the unit interval
    assert np.all(res.estimates >= 0) and np.all(res.estimates <= 1)
    assert res.estimates[2] > 0.5


def test_mlt_and_colr():
    s = normal_sample(seed=13, shift=1.5)
    model = rm.fit_mlt(s)
    assert model.converged
    res = rm.mlt_dunnett(model, df=s.total_n - s.num_groups)
    assert res.p_adjusted[2] < 0.05
    colr = rm.colr_dunnett(s)
    assert colr["odds_ratio"][2] > 1.0
    assert colr["or_lower"][2] <= colr["odds_ratio"][2] <= colr["or_upper"][2]


def test_load_samples_and_outlier_story():
    samples = rm.load_samples(DATA, "dose", "0", ["creat_kinase"])
    assert len(samples) == 1
    s = samples[0]
    assert s.num_groups == 6
    dun = rm.dunnett_test(s)
    rob = rm.robust_dunnett(s)
    # classical Dunnett is masked by outlier-inflated pooled variance,
    # the robust test is not
    assert dun.p_adjusted[4] > 0.3
    assert rob.p_adjusted[4] < 0.01


def test_mmm_joint():
    samples = rm.load_samples(DATA, "dose", "0", ["creat_kinase", "alt"])
    res = rm.mmm_dunnett(samples, ["ck", "alt"])
    assert len(res.labels) == 10
    assert any(lab.startswith("ck:") for lab in res.labels)


def test_simulation_deterministic():
    kwargs = dict(runs=100, seed=9, procedures=["dun"], rows=["h0-normal-xi1-n10"])
    a = rm.run_simulation(**kwargs)
    b = rm.run_simulation(**kwargs)
    assert len(a) == 1
    cell = a[0]["procedures"]["dun"]
    assert cell["completed"] == 100
    assert cell["rejections"] == b[0]["procedures"]["dun"]["rejections"]


def test_errors_are_pythonic():
    with pytest.raises(ValueError):
        rm.GroupedSample([("0", np.zeros(3))])  # needs a treatment group
    with pytest.raises(ValueError):
        rm.load_samples("/nonexistent.csv", "dose", "0", ["y"])
    tied = rm.GroupedSample([("0", np.full(5, 2.0)), ("1", np.full(5, 2.0))])
    with pytest.raises(ValueError):
        rm.npar_dunnett(tied)
