import numpy as np
import pytest

from conftest import coordination_env, random_env, random_model
from zeitgeist import catalog, config
from zeitgeist.games import MonitoringStructure, StageEnv
from zeitgeist.learning import Policy, SimConfig


def test_dense_env_round_trip_is_bit_exact(tmp_path):
    env = coordination_env()
    path = tmp_path / "env.yaml"
    config.save_env(env, path)
    back = config.load_env(path)
    assert back.strategies == env.strategies
    assert back.consequences == env.consequences
    assert back.situations == env.situations
    assert np.array_equal(back.utility, env.utility)
    for k1, k2 in zip(back.kernels, env.kernels):
        assert np.array_equal(k1.table, k2.table)
    assert back.monitoring.is_perfect()


def test_noisy_monitoring_round_trip(tmp_path):
    base = coordination_env()
    env = StageEnv(strategies=base.strategies, consequences=base.consequences,
                   situations=base.situations, kernels=list(base.kernels),
                   utility=base.utility,
                   monitoring=MonitoringStructure.noisy(base.strategies, 0.9))
    path = tmp_path / "env.yaml"
    config.save_env(env, path)
    back = config.load_env(path)
    assert not back.monitoring.is_perfect()
    assert np.array_equal(back.monitoring.rows, env.monitoring.rows)


def test_builder_env_round_trip_reruns_construction(tmp_path):
    spec = catalog.CournotSpec(10.0, 2.0, 1.0, 0.5)
    env, _, _ = catalog.build_cournot_discrete(spec, np.linspace(0, 8, 41), 80, 2.0)
    path = tmp_path / "env.yaml"
    config.save_env(env, path)
    doc = config.read_document(path)
    # computed kernels persist as the builder call, not as tables
    assert doc["builder"] == "cournot_discrete"
    assert "kernels" not in doc
    back = config.load_env(path)
    assert back.strategies == env.strategies
    assert np.array_equal(back.utility, env.utility)
    assert np.array_equal(back.kernel(0).payoff_matrix(back.utility),
                          env.kernel(0).payoff_matrix(env.utility))
    assert back.meta["cost"] == env.meta["cost"]
    assert back.meta["intercept_step"] == env.meta["intercept_step"]


def test_computed_kernels_need_a_builder_stamp(tmp_path):
    spec = catalog.CournotSpec(10.0, 2.0, 1.0, 0.5)
    env, _, _ = catalog.build_cournot_discrete(spec, np.linspace(0, 8, 41), 80, 2.0)
    bare = StageEnv(strategies=env.strategies, consequences=env.consequences,
                    situations=env.situations, kernels=list(env.kernels),
                    utility=env.utility)
    with pytest.raises(config.ConfigError, match="builder"):
        config.env_to_dict(bare)


def test_builder_model_round_trip(tmp_path):
    spec = catalog.InvestmentSpec(1.0, 5.5, 12.0)
    _, _, model_b, _ = catalog.build_investment_game(spec)
    path = tmp_path / "model.yaml"
    config.save_model(model_b, path)
    back = config.load_model(path)
    assert back.label == model_b.label
    assert back.kernel_labels == model_b.kernel_labels
    assert back.n_params == model_b.n_params
    for k1, k2 in zip(back.kernels, model_b.kernels):
        assert np.array_equal(k1.table, k2.table)


def test_dense_model_round_trip_keeps_conjectures(tmp_path):
    rng = np.random.default_rng(4)
    env = random_env(rng)
    model = random_model(rng, env, 3, "sample")
    path = tmp_path / "model.yaml"
    config.save_model(model, path)
    back = config.load_model(path)
    assert back.label == model.label
    assert not back.strategic_certainty_form
    for p1, p2 in zip(back.params, model.params):
        assert p1.conj_a == p2.conj_a
        assert p1.kernel_index == p2.kernel_index
        assert np.array_equal(p1.kernel.table, p2.kernel.table)


def test_certainty_form_round_trip(tmp_path):
    spec = catalog.CournotSpec(10.0, 2.0, 1.0, 0.5)
    _, model_a, _ = catalog.build_cournot_discrete(
        spec, np.linspace(0, 8, 41), 80, 2.0)
    assert model_a.strategic_certainty_form
    path = tmp_path / "model.yaml"
    config.save_model(model_a, path)
    back = config.load_model(path)
    assert back.strategic_certainty_form
    assert back.kernel_labels == model_a.kernel_labels


def test_sim_round_trip_with_all_options(tmp_path):
    cfg = SimConfig(n_agents=50, shares=(1.0 / 3.0, 2.0 / 3.0), horizon=250,
                    seed=99, tau=0.97,
                    policy=Policy(burn_in=7, eps0=0.2, kappa=40.0),
                    prior_a=np.array([0.25, 0.75]),
                    prior_b=np.array([0.1, 0.2, 0.7]),
                    q=(0.3, 0.7), situation_period=25)
    path = tmp_path / "sim.yaml"
    config.save_sim(cfg, path)
    back = config.load_sim(path)
    assert back.n_agents == cfg.n_agents
    assert back.shares == cfg.shares
    assert back.horizon == cfg.horizon and back.seed == cfg.seed
    assert back.tau == cfg.tau
    assert back.policy == cfg.policy
    assert np.array_equal(back.prior_a, cfg.prior_a)
    assert np.array_equal(back.prior_b, cfg.prior_b)
    assert back.q == cfg.q
    assert back.situation_period == cfg.situation_period


def test_sim_defaults(tmp_path):
    path = tmp_path / "sim.yaml"
    path.write_text("kind: sim\nn_agents: 10\nshares: [0.5, 0.5]\n"
                    "horizon: 5\nseed: 1\n")
    cfg = config.load_sim(path)
    assert cfg.tau == 0.99
    assert cfg.policy == Policy()
    assert cfg.prior_a is None and cfg.q is None


def test_missing_file_is_a_config_error(tmp_path):
    missing = tmp_path / "nope.yaml"
    with pytest.raises(config.ConfigError, match="nope.yaml"):
        config.load_env(missing)


def test_yaml_syntax_error_carries_line_number(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("kind: env\nstrategies: [a, b\n")
    with pytest.raises(config.ConfigError, match=r"broken\.yaml:\d+"):
        config.read_document(path)


def test_non_mapping_document_rejected(tmp_path):
    path = tmp_path / "list.yaml"
    path.write_text("- 1\n- 2\n")
    with pytest.raises(config.ConfigError, match="mapping"):
        config.read_document(path)


def test_kind_mismatch_rejected(tmp_path):
    env = coordination_env()
    path = tmp_path / "env.yaml"
    config.save_env(env, path)
    with pytest.raises(config.ConfigError, match="kind"):
        config.load_model(path)


def test_unknown_builder_lists_choices():
    with pytest.raises(config.ConfigError, match="two_situation"):
        config.env_from_dict({"kind": "env", "builder": "nope"}, "doc")


def test_builder_without_requested_role():
    with pytest.raises(config.ConfigError, match="component"):
        config.env_from_dict(
            {"kind": "env", "builder": "two_situation", "role": "model_a"}, "doc")


def test_model_validation_errors():
    k = [[[1.0, 0.0], [0.0, 1.0]], [[0.0, 1.0], [1.0, 0.0]]]
    base = {"kind": "model", "label": "m", "kernels": [k],
            "kernel_labels": ["k0", "extra"]}
    with pytest.raises(config.ConfigError, match="kernel_labels"):
        config.model_from_dict(base, "doc")
    with pytest.raises(config.ConfigError, match="out of range"):
        config.model_from_dict(
            {"kind": "model", "kernels": [k],
             "params": [{"conj_a": [0, 0], "kernel": 3}]}, "doc")
    with pytest.raises(config.ConfigError, match="two entries"):
        config.model_from_dict(
            {"kind": "model", "kernels": [k],
             "params": [{"conj_a": [0, 0, 0], "kernel": 0}]}, "doc")


def test_errors_carry_a_single_location_prefix(tmp_path):
    path = tmp_path / "sim.yaml"
    path.write_text("kind: sim\nn_agents: 10\nshares: [0.5, 0.5]\n"
                    "horizon: 5\nseed: 1\ntau: 1.5\n")
    with pytest.raises(config.ConfigError) as err:
        config.load_sim(path)
    msg = str(err.value)
    assert msg.count(str(path)) == 1
    assert "tau" in msg
