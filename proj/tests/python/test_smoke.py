import math

import pytest

import ccpd


def test_softplus_and_contrast():
    assert ccpd.softplus_half(0.0) == 0.0
    assert ccpd.contrastive_value([0.0] * 3, [0.0] * 4) == 0.0
    g = ccpd.contrastive_gradient([0.0], [0.0])
    assert g == pytest.approx([0.25, -0.25])
    value, tau = ccpd.max_statistic([(10, -1.0), (11, 0.5), (12, 0.2)], t=22, margin=10)
    assert (value, tau) == (0.5, 11)
    with pytest.raises(ccpd.EmptyRange):
        ccpd.max_statistic([(10, 1.0)], t=15, margin=10)


def test_fit_and_evaluate():
    spec = ccpd.DiscriminatorSpec("poly:1", epochs=30)
    assert spec.label == "poly:1"
    assert ccpd.features(spec, 0.5) == [1.0, 0.5]
    f = ccpd.fit(spec, [1.0] * 10, [-1.0] * 10, seed=0)
    assert f.achieved_value > 0.0
    assert f(1.0) > f(-1.0)
    with pytest.raises(ccpd.UnsupportedFamily):
        ccpd.features(ccpd.DiscriminatorSpec("mlp"), 0.1)


def test_detector_runs():
    stream = ccpd.generate_example(1, seed=3)
    assert len(stream) == 100
    config = ccpd.DetectorConfig(threshold=math.inf, spec=ccpd.DiscriminatorSpec("poly:1", epochs=10))
    result = ccpd.run(stream[:40], config)
    assert result.stopping_time is None
    assert len(result.trace) == 20
    assert all(s >= 0.0 for _, s, _ in result.trace)

    det = ccpd.Detector(ccpd.DetectorConfig(threshold=0.5, spec=ccpd.DiscriminatorSpec("poly:1", epochs=20)))
    alarm = None
    for i in range(60):
        alarm = det.step(0.0 if i < 30 else 3.0)
        if alarm:
            break
    assert alarm is not None and alarm[0] > 30
    with pytest.raises(ccpd.AlreadyAlarmed):
        det.step(0.0)


def test_divergences():
    assert ccpd.js_divergence(ccpd.Gaussian(0, 0.1), ccpd.Gaussian(0, 0.1)) == pytest.approx(0.0, abs=1e-8)
    assert ccpd.js_divergence(ccpd.Uniform(0, 1), ccpd.Uniform(2, 3)) == pytest.approx(math.log(2), abs=1e-8)
    assert ccpd.js_lower_bound_check([0.02], [0.01])
    report = ccpd.verify_lemma1(ccpd.Gaussian(0, 0.1), ccpd.Gaussian(0.1, 0.1), 50, 100, mc_reps=2000, seed=1)
    assert abs(report["z"]) <= 4


def test_calibrate_small():
    spec = ccpd.DiscriminatorSpec("poly:1", epochs=10)
    z = ccpd.calibrate(0.0, 0.1, spec, n=40, reps=3, rank=1, seed=2)
    assert z >= 0.0
    with pytest.raises(ccpd.DegenerateReference):
        ccpd.calibrate(0.0, 0.0, spec, n=40)
