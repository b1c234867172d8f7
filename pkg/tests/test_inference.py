"""Model density oracles, sampler behavior, and posterior containers."""

import math
import warnings

import numpy as np
import pytest

from bytecode_energy.errors import DataError, UnknownLevel
from bytecode_energy.inference import (
    ModelSpec,
    NonConvergenceWarning,
    PosteriorModel,
    fit,
    log_posterior,
    param_names,
    posterior_mean_mu,
    prior_predictive,
)

from conftest import synthetic_crossed_dataset, true_key_mean

RATE = 1e3


def oracle_log_density(data, theta, spec, device_sampled=True):
    """Independent reimplementation: plain sums of scalar log densities."""
    cats = ["alpha", "beta", "gamma"] + (["delta"] if device_sampled else [])
    level_sets = spec.level_sets
    sds = [math.exp(u) for u in theta["log_sd"]]
    effects = {}
    for ci, cat in enumerate(cats):
        effects[cat] = {
            lv: theta["mu"][ci] + sds[ci] * theta["z"][ci][j]
            for j, lv in enumerate(level_sets[cat])
        }
    if not device_sampled:
        effects["delta"] = {lv: 0.0 for lv in level_sets["delta"]}
    sigma = math.exp(theta["log_sigma"])

    lp = 0.0
    for (s, o, t, d), values in data.items():
        m = (effects["alpha"][s] + effects["beta"][o]
             + effects["gamma"][t] + effects["delta"][d])
        for v in values:
            lp += (-0.5 * math.log(2 * math.pi) - math.log(sigma)
                   - 0.5 * ((v - m) / sigma) ** 2)
    for ci in range(len(cats)):
        for zj in theta["z"][ci]:
            lp += -0.5 * math.log(2 * math.pi) - 0.5 * zj * zj
        mu = theta["mu"][ci]
        lp += (-0.5 * math.log(2 * math.pi)
               - math.log(spec.hyper_mean_scale)
               - 0.5 * ((mu - spec.hyper_mean_loc) / spec.hyper_mean_scale) ** 2)
        u = theta["log_sd"][ci]
        lp += math.log(spec.rate_category_sd) - spec.rate_category_sd * math.exp(u) + u
    u = theta["log_sigma"]
    lp += math.log(spec.rate_sigma) - spec.rate_sigma * math.exp(u) + u
    return lp


TOY_SPEC = ModelSpec(sizes=("s",), operations=("o",), dtypes=("t",),
                     devices=("d1", "d2"))
TOY_THETA = {
    "z": [[0.3], [-0.2], [0.1], [0.5, -0.4]],
    "mu": [0.004, 0.005, 0.006, 0.0055],
    "log_sd": [math.log(2e-3), math.log(1e-3), math.log(5e-4), math.log(8e-4)],
    "log_sigma": math.log(1.5e-8),
}
TOY_DATA = {
    ("s", "o", "t", "d1"): [1.0e-8, 2.0e-8],
    ("s", "o", "t", "d2"): [3.0e-8],
}


def test_log_posterior_matches_hand_oracle():
    lp = log_posterior(TOY_THETA, TOY_DATA, TOY_SPEC)
    oracle = oracle_log_density(TOY_DATA, TOY_THETA, TOY_SPEC)
    assert math.isclose(lp, oracle, rel_tol=1e-12)


def test_log_posterior_single_device_excludes_device_effect():
    spec = ModelSpec(sizes=("s1", "s2"), operations=("o",), dtypes=("t",),
                     devices=("d1",))
    theta = {
        "z": [[0.2, -0.7], [0.4], [-0.1]],
        "mu": [0.004, 0.005, 0.006],
        "log_sd": [math.log(1e-3)] * 3,
        "log_sigma": math.log(2e-8),
    }
    data = {
        ("s1", "o", "t", "d1"): [1.5e-8],
        ("s2", "o", "t", "d1"): [2.5e-8, 0.5e-8],
    }
    lp = log_posterior(theta, data, spec)
    oracle = oracle_log_density(data, theta, spec, device_sampled=False)
    assert math.isclose(lp, oracle, rel_tol=1e-12)


def test_log_posterior_empty_dataset_is_prior_only():
    lp = log_posterior(TOY_THETA, {}, TOY_SPEC)
    oracle = oracle_log_density({}, TOY_THETA, TOY_SPEC)
    assert math.isclose(lp, oracle, rel_tol=1e-12)


def test_single_observation_at_its_mean_adds_normalizer_only():
    sigma = math.exp(TOY_THETA["log_sigma"])
    # reconstruct the key mean exactly as the model does
    m = sum(TOY_THETA["mu"][ci] + math.exp(TOY_THETA["log_sd"][ci]) * z
            for ci, z in [(0, 0.3), (1, -0.2), (2, 0.1), (3, 0.5)])
    with_obs = log_posterior(TOY_THETA, {("s", "o", "t", "d1"): [m]}, TOY_SPEC)
    prior_only = log_posterior(TOY_THETA, {}, TOY_SPEC)
    assert math.isclose(with_obs - prior_only,
                        -math.log(sigma * math.sqrt(2 * math.pi)),
                        rel_tol=1e-9)


def test_log_posterior_accepts_pattern_keys():
    from bytecode_energy.catalog import PatternKey, PatternTriple

    key = PatternKey(PatternTriple("addition", "int", "constant"), "d1")
    tuple_data = {("constant", "addition", "int", "d1"): [1e-8]}
    spec = ModelSpec.from_keys(tuple_data)
    theta = {"z": [[0.1]] * 3, "mu": [0.005] * 3,
             "log_sd": [math.log(1e-3)] * 3, "log_sigma": math.log(1e-8)}
    assert log_posterior(theta, {key: [1e-8]}, spec) == log_posterior(
        theta, tuple_data, spec)


def test_spec_from_keys_sorts_levels():
    spec = ModelSpec.from_keys(TOY_DATA)
    assert spec.devices == ("d1", "d2")
    assert spec.device_effect_sampled


def test_spec_rejects_empty_levels_and_bad_rates():
    with pytest.raises(DataError):
        ModelSpec(sizes=(), operations=("o",), dtypes=("t",), devices=("d",))
    with pytest.raises(DataError):
        ModelSpec(sizes=("s",), operations=("o",), dtypes=("t",),
                  devices=("d",), rate_sigma=0.0)


def test_param_names_cover_effects_and_hyperparameters():
    names = param_names(TOY_SPEC)
    assert names[0] == "sigma"
    assert "delta[d2]" in names
    assert "mu[delta]" in names and "sd[delta]" in names
    single = ModelSpec(sizes=("s",), operations=("o",), dtypes=("t",),
                       devices=("d1",))
    assert not any("delta" in n for n in param_names(single))


def test_fit_requires_two_chains():
    with pytest.raises(DataError):
        fit(TOY_DATA, chains=1, warmup=10, draws=10)


def test_fit_rejects_levels_missing_from_spec():
    with pytest.raises(DataError):
        fit({("sX", "o", "t", "d1"): [1e-8, 2e-8]}, spec=TOY_SPEC,
            chains=2, warmup=5, draws=5)


def test_fit_is_deterministic_given_seed():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonConvergenceWarning)
        a = fit(TOY_DATA, chains=2, warmup=50, draws=50, seed=9)
        b = fit(TOY_DATA, chains=2, warmup=50, draws=50, seed=9)
    assert np.array_equal(a.draws, b.draws)
    assert a.summaries == b.summaries


def test_fit_is_exchangeable_in_key_order():
    data, _, _ = synthetic_crossed_dataset(seed=1, n_sizes=2, n_ops=2,
                                           n_types=2, obs_per_key=10)
    reordered = dict(reversed(list(data.items())))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonConvergenceWarning)
        a = fit(data, chains=2, warmup=50, draws=50, seed=2)
        b = fit(reordered, chains=2, warmup=50, draws=50, seed=2)
    assert a.meta["dataset_digest"] == b.meta["dataset_digest"]
    assert np.array_equal(a.draws, b.draws)


def test_fit_warns_when_gates_fail():
    with pytest.warns(NonConvergenceWarning):
        model = fit(TOY_DATA, chains=2, warmup=0, draws=8, seed=0)
    assert not model.meta["converged"]
    assert model.meta["gate_failures"]


@pytest.fixture(scope="module")
def recovery_fit():
    data, effects, sigma = synthetic_crossed_dataset(seed=5)
    model = fit(data, chains=4, warmup=1000, draws=1000, seed=3)
    return data, effects, sigma, model


def test_fit_converges_on_synthetic_data(recovery_fit):
    _, _, _, model = recovery_fit
    assert model.meta["converged"]
    for name, s in model.summaries.items():
        if s["rhat"] is None:
            continue
        assert s["rhat"] < 1.01, name
        assert s["ess"] > 400, name


def test_fit_recovers_key_means_and_noise(recovery_fit):
    data, effects, sigma, model = recovery_fit
    assert abs(model.sigma_mean() - sigma) < 0.1 * sigma
    se = sigma / math.sqrt(30)
    for key in data:
        truth = true_key_mean(effects, key)
        assert abs(model.mean_mu(key) - truth) < 5 * se, key


def test_fit_meta_records_run_configuration(recovery_fit):
    _, _, _, model = recovery_fit
    meta = model.meta
    assert meta["chains"] == 4
    assert meta["warmup"] == 1000
    assert meta["draws_per_chain"] == 1000
    assert meta["seed"] == 3
    assert meta["device_effect_sampled"] is True
    assert len(meta["dataset_digest"]) == 64


def test_mu_draws_mean_matches_summary_sum(recovery_fit):
    data, _, _, model = recovery_fit
    key = next(iter(data))
    draws = model.mu_draws(key)
    assert draws.shape == (4 * 1000,)
    assert math.isclose(draws.mean(), model.mean_mu(key), rel_tol=1e-9)


def test_save_load_round_trip(recovery_fit, tmp_path):
    _, _, _, model = recovery_fit
    path = tmp_path / "model.json"
    model.save(path)
    loaded = PosteriorModel.load(path)
    assert loaded.summaries.keys() == model.summaries.keys()
    for name in model.summaries:
        for field in ("mean", "sd", "mcse", "ess", "rhat"):
            assert loaded.summaries[name][field] == pytest.approx(
                model.summaries[name][field], rel=1e-12)
    assert np.allclose(loaded.draws, model.draws)


def test_load_rejects_tampered_summaries(recovery_fit, tmp_path):
    _, _, _, model = recovery_fit
    obj = model.to_json_dict()
    first = next(iter(obj["summaries"]))
    obj["summaries"][first]["mean"] *= 1.01
    with pytest.raises(DataError):
        PosteriorModel.from_json_dict(obj)


def test_summary_only_model_has_no_draws(recovery_fit, tmp_path):
    _, _, _, model = recovery_fit
    path = tmp_path / "summary.json"
    model.save(path, include_draws=False)
    loaded = PosteriorModel.load(path)
    assert not loaded.has_draws()
    assert loaded.mu_draws(("s0", "o0", "t0", "device1")) is None


def test_single_device_fixes_device_effect_at_zero():
    data, _, _ = synthetic_crossed_dataset(seed=7, n_sizes=2, n_ops=3,
                                           n_types=2, devices=("device1",),
                                           obs_per_key=20)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonConvergenceWarning)
        model = fit(data, chains=2, warmup=200, draws=200, seed=1)
    s = model.summaries["delta[device1]"]
    assert s == {"mean": 0.0, "sd": 0.0, "mcse": 0.0, "ess": None,
                 "rhat": None}
    assert not any("delta" in n for n in model.draw_names)
    assert model.meta["device_effect_sampled"] is False
    assert model.mean_mu(("s0", "o0", "t0", "device1")) == pytest.approx(
        model.summaries["alpha[s0]"]["mean"]
        + model.summaries["beta[o0]"]["mean"]
        + model.summaries["gamma[t0]"]["mean"])


def test_prior_predictive_moments():
    spec = ModelSpec.from_catalog(["device1", "device2"])
    draws = prior_predictive(spec, 100_000, seed=0)
    assert draws.shape == (100_000,)
    # Sum of four Normal(0.006, 0.001) hyper-means.
    assert abs(draws.mean() - 0.024) < 0.0005
    # Per category: hyper scale^2 + E[sd^2] = 1e-6 + 2e-6; noise adds 2e-6.
    analytic_sd = math.sqrt(4 * 3e-6 + 2e-6)
    assert abs(draws.std(ddof=1) - analytic_sd) < 0.05 * analytic_sd
    assert ((draws >= 0.0) & (draws <= 0.050)).mean() >= 0.99


def test_prior_predictive_empty_and_deterministic():
    spec = ModelSpec.from_catalog(["device1"])
    assert prior_predictive(spec, 0).size == 0
    a = prior_predictive(spec, 100, seed=4)
    b = prior_predictive(spec, 100, seed=4)
    assert np.array_equal(a, b)


def test_posterior_mean_mu_degenerate_sum():
    model = PosteriorModel(
        levels={"alpha": ["s"], "beta": ["o"], "gamma": ["t"], "delta": ["d"]},
        summaries={
            "alpha[s]": {"mean": 1.0, "sd": 0.0},
            "beta[o]": {"mean": 2.0, "sd": 0.0},
            "gamma[t]": {"mean": 3.0, "sd": 0.0},
            "delta[d]": {"mean": 4.0, "sd": 0.0},
            "sigma": {"mean": 0.5, "sd": 0.0},
        },
    )
    assert posterior_mean_mu(model, ("s", "o", "t", "d")) == 10.0


def test_posterior_mean_mu_unknown_level(bundled_model):
    with pytest.raises(UnknownLevel):
        posterior_mean_mu(bundled_model,
                          ("constant", "addition", "int", "device9"))
