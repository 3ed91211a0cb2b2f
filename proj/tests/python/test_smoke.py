"""Smoke tests for the python bindings."""

import math

import pytest

import revkin


def demo_config():
    regions = [
        revkin.Region("r1", revkin.KineticParams(0.9, 0.50, 0.08, 0.02)),
        revkin.Region("r2", revkin.KineticParams(0.6, 0.35, 0.15, 0.05)),
        revkin.Region("r3", revkin.KineticParams(1.1, 0.60, 0.22, 0.08)),
        revkin.Region("r4", revkin.KineticParams(0.4, 0.25, 0.30, 0.10)),
        revkin.Region("r5", revkin.KineticParams(0.8, 0.45, 0.38, 0.12)),
        revkin.Region("r6", revkin.KineticParams(1.3, 0.70, 0.45, 0.15)),
        revkin.Region("r7", revkin.KineticParams(0.5, 0.30, 0.55, 0.15)),
    ]
    cp = revkin.PolyexpInput([(1.0, -0.05), (0.5, -0.3), (-0.2, -1.0), (0.1, -3.0)])
    return revkin.Configuration(regions, cp)


def log_grid(start, end, count):
    lo, hi = math.log(start), math.log(end)
    return [math.exp(lo + (hi - lo) * i / (count - 1)) for i in range(count)]


def test_alphas_identities():
    params = revkin.KineticParams(0.5, 0.4, 0.3, 0.1)
    alphas = revkin.compute_alphas(params)
    assert abs(alphas.alpha1 + alphas.alpha2 + 0.8) < 1e-12
    assert abs(alphas.alpha1 * alphas.alpha2 - 0.04) < 1e-12
    assert alphas.alpha2 < -0.4 < alphas.alpha1 < 0.0


def test_degenerate_params_raise():
    with pytest.raises(ValueError):
        revkin.compute_alphas(revkin.KineticParams(1.0, 2.0, 0.0, 2.0))


def test_closed_form_matches_oracle():
    config = demo_config()
    params = config.regions[0].params
    cp = config.input
    grid = log_grid(0.25, 60.0, 12)
    oracle = revkin.integrate_at(params, lambda s: revkin.eval_cp(cp, s), grid, 1e-3)
    for t, ref in zip(grid, oracle):
        val = revkin.eval_ct_closed_form(params, cp, t)
        assert abs(val - ref) <= 1e-6 * max(1.0, abs(ref))


def test_expansion_evaluates_like_closed_form():
    config = demo_config()
    params = config.regions[2].params
    sum_ = revkin.expand_configuration(params, config.input)
    for t in (0.5, 7.0, 42.0):
        direct = revkin.eval_ct_closed_form(params, config.input, t)
        assert abs(revkin.eval_sum(sum_, t) - direct) <= 1e-12 * max(1.0, abs(direct))


def test_simulate_and_csv_round_trip():
    config = demo_config()
    table = revkin.simulate_tacs(config, log_grid(0.25, 60.0, 16))
    assert len(table.curves) == 7
    back = revkin.TacTable.from_csv(table.to_csv())
    assert back.time_grid == table.time_grid
    assert back.curves[3].values == table.curves[3].values


def test_richness_and_witness_checks():
    config = demo_config()
    assert revkin.check_region_richness(config).satisfied
    report = revkin.check_assumption_A(config)
    assert report.satisfied
    assert len(report.witnesses) == 4


def test_fit_joint_from_warm_start_converges():
    config = demo_config()
    tacs = revkin.simulate_tacs(config, log_grid(0.25, 60.0, 16))
    options = revkin.FitOptions()
    options.p = 4
    options.n_starts = 1
    options.max_iters = 50
    fit = revkin.fit_joint(tacs, options, [config])
    assert fit.converged
    eq = revkin.equivalence_up_to_scale(config, fit.config, 1e-6)
    assert eq.equivalent
    assert abs(eq.zeta - 1.0) < 1e-6


def test_sample_count_guard():
    config = demo_config()
    tacs = revkin.simulate_tacs(config, log_grid(0.25, 60.0, 15))
    options = revkin.FitOptions()
    options.p = 4
    with pytest.raises(ValueError):
        revkin.fit_joint(tacs, options)


def test_resolve_scale_round_trip():
    config = demo_config()
    f = revkin.AttenuationBiexp(0.6, -0.05, -0.8)
    wb = [
        revkin.WbSample(s, revkin.eval_cp(config.input, s) / revkin.eval_attenuation(f, s))
        for s in (1.0, 5.0, 20.0, 50.0)
    ]
    tacs = revkin.simulate_tacs(config, log_grid(0.25, 60.0, 16))
    options = revkin.FitOptions()
    options.p = 4
    options.n_starts = 1
    options.max_iters = 50
    fit = revkin.fit_joint(tacs, options, [config])
    resolved = revkin.resolve_scale(fit, wb)
    assert abs(resolved.zeta - 1.0) < 1e-6
    assert abs(resolved.f.a - 0.6) < 1e-5


def test_json_round_trip():
    config = demo_config()
    back = revkin.Configuration.from_json(config.to_json())
    assert back.n_regions == 7
    assert back.input.terms[0].mu == -0.05
