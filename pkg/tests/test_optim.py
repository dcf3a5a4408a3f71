import math

import numpy as np
import pytest

import drlearn.optim as optim_mod
from drlearn import (
    CHI2,
    GradientEstimate,
    OptimizerConfig,
    RngState,
    StepSchedule,
    SyntheticSpec,
    full_gradient,
    make_synthetic,
    pssg_batch_size,
    run_fsg,
    run_gssg,
    run_pssg,
    run_sgd,
    split_train_test,
)
from drlearn.losses import LOGISTIC


def split_data(n=128, d=3, sep=2.0, seed=0, test_fraction=0.25):
    data = make_synthetic(SyntheticSpec(n=n, d=d, class_sep=sep, seed=seed))
    return split_train_test(data, test_fraction, RngState(seed + 1000))


def test_step_schedule_values():
    s = StepSchedule.diminishing(5000.0, 5000.0)
    assert s.at(0) == 1.0
    assert s.at(5000) == 0.5
    c = StepSchedule.constant(0.25)
    assert c.at(0) == c.at(10**6) == 0.25
    with pytest.raises(ValueError):
        StepSchedule("warmup")
    with pytest.raises(ValueError):
        StepSchedule.diminishing(1.0, 0.0)
    with pytest.raises(ValueError):
        StepSchedule.constant(math.inf)


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(method="adam")
    with pytest.raises(ValueError):
        OptimizerConfig(method="gssg", rho=0.0)
    cfg = OptimizerConfig(method="gssg", r=0.2)
    with pytest.raises(ValueError):
        cfg.validate_for("gssg")  # r outside (1/4, 1/2)
    cfg2 = OptimizerConfig(method="gssg", step=StepSchedule.constant(0.1))
    with pytest.raises(ValueError):
        cfg2.validate_for("gssg")  # needs diminishing steps
    cfg3 = OptimizerConfig(method="pssg", nu=1.0)
    with pytest.raises(ValueError):
        cfg3.validate_for("pssg")


def test_default_schedules_per_method():
    assert OptimizerConfig(method="gssg").step.kind == "diminishing"
    assert OptimizerConfig(method="sgd").step.kind == "diminishing"
    assert OptimizerConfig(method="pssg").step.kind == "constant"
    assert OptimizerConfig(method="fsg").step.kind == "constant"


def test_zero_step_keeps_parameters_constant():
    train, test = split_data(n=32)
    cfg = OptimizerConfig(
        method="gssg", step=StepSchedule.diminishing(a=0.0, b=5000.0), max_iters=20, seed=3, eval_every=5
    )
    theta, trace = run_gssg(cfg, train, test)
    theta0 = RngState(3).split(2)[0].gen.uniform(-1.0, 1.0, train.d)
    np.testing.assert_array_equal(theta, theta0)


def test_gssg_deterministic_trajectory():
    train, test = split_data(n=64)
    cfg = OptimizerConfig(method="gssg", max_iters=40, seed=7, eval_every=10)
    theta_a, trace_a = run_gssg(cfg, train, test)
    theta_b, trace_b = run_gssg(cfg, train, test)
    np.testing.assert_array_equal(theta_a, theta_b)
    for ra, rb in zip(trace_a.records, trace_b.records):
        assert ra.iteration == rb.iteration
        assert ra.cumulative_samples == rb.cumulative_samples
        assert ra.train_robust_loss_estimate == rb.train_robust_loss_estimate
        assert ra.test_misclassification == rb.test_misclassification


def test_trace_invariants():
    train, test = split_data(n=64)
    cfg = OptimizerConfig(method="sgd", batch_m=4, max_iters=55, seed=1, eval_every=10)
    _, trace = run_sgd(cfg, train, test)
    iters = [r.iteration for r in trace.records]
    cums = [r.cumulative_samples for r in trace.records]
    walls = [r.wall_clock_s for r in trace.records]
    assert iters == sorted(iters) and len(set(iters)) == len(iters)
    assert all(b > a for a, b in zip(cums, cums[1:]))
    assert all(b >= a for a, b in zip(walls, walls[1:]))
    assert all(0.0 <= r.test_misclassification <= 1.0 for r in trace.records)
    assert trace.records[-1].iteration == 55  # final iteration always recorded


def test_pssg_batch_growth():
    assert pssg_batch_size(0, 10, 1.001, 1000) == 10
    # first t with ceil(10 * 1.001^t) >= 1000, from the closed-form solve
    t_hit = math.ceil(math.log(999 / 10 + 1e-12) / math.log(1.001))
    while pssg_batch_size(t_hit - 1, 10, 1.001, 1000) >= 1000:
        t_hit -= 1
    while pssg_batch_size(t_hit, 10, 1.001, 1000) < 1000:
        t_hit += 1
    assert pssg_batch_size(t_hit, 10, 1.001, 1000) == 1000
    assert pssg_batch_size(t_hit - 1, 10, 1.001, 1000) < 1000
    assert t_hit == 4607
    assert all(
        pssg_batch_size(t + 1, 10, 1.001, 1000) >= pssg_batch_size(t, 10, 1.001, 1000)
        for t in range(0, 5000, 97)
    )


def test_pssg_with_full_start_matches_fsg():
    train, test = split_data(n=32)
    common = dict(step=StepSchedule.constant(0.05), max_iters=10, seed=5, eval_every=5)
    theta_p, _ = run_pssg(OptimizerConfig(method="pssg", m0=32, nu=1.001, **common), train, test)
    theta_f, _ = run_fsg(OptimizerConfig(method="fsg", **common), train, test)
    np.testing.assert_array_equal(theta_p, theta_f)


def test_fsg_single_step_composition():
    # one step from theta0 must equal theta0 - gamma * weighted_grad(P*)
    train, test = split_data(n=32)
    gamma = 0.05
    cfg = OptimizerConfig(method="fsg", step=StepSchedule.constant(gamma), max_iters=1, seed=9)
    theta, _ = run_fsg(cfg, train, test)
    theta0 = RngState(9).split(2)[0].gen.uniform(-1.0, 1.0, train.d)
    g, _ = full_gradient(theta0, train, cfg.rho, CHI2, check_rho=False)
    np.testing.assert_allclose(theta, theta0 - gamma * g, atol=1e-12)


def test_fsg_objective_nonincreasing_on_small_convex_instance():
    data = make_synthetic(SyntheticSpec(n=16, d=2, class_sep=2.0, seed=2))
    cfg = OptimizerConfig(
        method="fsg", rho=0.05, step=StepSchedule.constant(0.01), max_iters=60, seed=2, eval_every=1,
        eval_full_loss=True,
    )
    _, trace = run_fsg(cfg, data, data)
    losses = [r.train_robust_loss_estimate for r in trace.records]
    assert all(b <= a + 1e-10 for a, b in zip(losses, losses[1:]))


def test_sgd_first_update_matches_fsg_with_full_batch():
    train, test = split_data(n=32)
    gamma0 = 0.07
    sgd_cfg = OptimizerConfig(
        method="sgd", batch_m=32, step=StepSchedule.diminishing(a=gamma0, b=1.0), max_iters=1, seed=4
    )
    fsg_cfg = OptimizerConfig(method="fsg", step=StepSchedule.constant(gamma0), max_iters=1, seed=4)
    theta_s, _ = run_sgd(sgd_cfg, train, test)
    theta_f, _ = run_fsg(fsg_cfg, train, test)
    np.testing.assert_allclose(theta_s, theta_f, atol=1e-15)


def test_gssg_stationarity_trend():
    # running min of the exact squared gradient norm should drop over a run
    train, test = split_data(n=256, d=3, sep=1.0, seed=6)
    cfg = OptimizerConfig(method="gssg", rho=0.05, c=0.1, max_iters=800, seed=6, eval_every=100)
    checkpoints = {}

    real_giles = optim_mod.giles_grad
    norms = []

    def spy(theta, *args, **kwargs):
        est = real_giles(theta, *args, **kwargs)
        if len(norms) % 100 == 0:
            g, _ = full_gradient(theta, train, cfg.rho, CHI2, check_rho=False)
            checkpoints[len(norms)] = float(g @ g)
        norms.append(0)
        return est

    optim_mod.giles_grad = spy
    try:
        run_gssg(cfg, train, test)
    finally:
        optim_mod.giles_grad = real_giles
    keys = sorted(checkpoints)
    running_min = np.minimum.accumulate([checkpoints[k] for k in keys])
    assert running_min[-1] < running_min[0]


def test_non_finite_iterate_aborts_with_diagnostic(monkeypatch):
    train, test = split_data(n=16)

    def exploding(theta, *args, **kwargs):
        return GradientEstimate(
            g=np.full(train.d, np.inf), samples_used=1, inner_solves=1, wall_clock_s=0.0, loss_estimate=0.0
        )

    monkeypatch.setattr(optim_mod, "giles_grad", exploding)
    cfg = OptimizerConfig(method="gssg", max_iters=5, seed=1)
    with pytest.raises(RuntimeError, match="non-finite iterate"):
        run_gssg(cfg, train, test)


def test_eval_full_loss_records_exact_robust_loss():
    train, test = split_data(n=32)
    cfg = OptimizerConfig(
        method="fsg", step=StepSchedule.constant(0.05), max_iters=4, seed=8, eval_every=2, eval_full_loss=True
    )
    theta, trace = run_fsg(cfg, train, test)
    _, obj = full_gradient(theta, train, cfg.rho, CHI2, check_rho=False)
    assert trace.final.train_robust_loss_estimate == pytest.approx(obj, rel=1e-12)
