import math

import numpy as np
import pytest
from scipy.special import rel_entr

from conftest import coordination_env, random_env, random_model
from zeitgeist.games import DenseKernel
from zeitgeist.inference import (
    DataContext,
    kl_divergence,
    kl_minimizers,
    kl_profile_tables,
    minimizer_set,
    scale_kl,
    weighted_kl,
)
from zeitgeist.models import Parameter, minimal_correct_model, singleton_model


def test_kl_hand_value():
    got = kl_divergence([0.4, 0.6], [0.1, 0.9])
    want = 0.4 * math.log(4.0) + 0.6 * math.log(2.0 / 3.0)
    assert got == pytest.approx(want, abs=1e-15)


def test_kl_matches_scipy_on_random_pairs():
    rng = np.random.default_rng(3)
    for _ in range(100):
        m = int(rng.integers(2, 7))
        p = rng.dirichlet(np.ones(m))
        q = rng.dirichlet(np.ones(m))
        assert kl_divergence(p, q) == pytest.approx(rel_entr(p, q).sum(),
                                                    abs=1e-12)


def test_kl_identity_and_nonnegativity():
    rng = np.random.default_rng(4)
    for _ in range(200):
        p = rng.dirichlet(np.ones(4))
        assert kl_divergence(p, p) == pytest.approx(0.0, abs=1e-14)
        q = rng.dirichlet(np.ones(4))
        assert kl_divergence(p, q) >= 0.0


def test_kl_support_mismatch():
    assert kl_divergence([0.5, 0.5, 0.0], [0.5, 0.0, 0.5]) == np.inf
    # q may have extra support without penalty
    assert np.isfinite(kl_divergence([1.0, 0.0], [0.5, 0.5]))


def test_scale_kl_zero_weight_keeps_infinity():
    assert scale_kl(0.0, np.inf) == np.inf
    assert scale_kl(0.0, 123.4) == 0.0
    assert scale_kl(0.25, np.inf) == np.inf
    assert scale_kl(0.5, 2.0) == pytest.approx(1.0)


def test_minimizer_set_relative_cut():
    vals = np.array([1.0, 1.0 + 1e-12, 2.0])
    idx, all_inf = minimizer_set(vals)
    assert list(idx) == [0, 1]
    assert not all_inf
    idx, all_inf = minimizer_set(np.array([np.inf, np.inf]))
    assert list(idx) == [0, 1]
    assert all_inf


def test_data_context_profiles():
    ctx_a = DataContext(0, (0.3, 0.7), 0, (0, 1, 2, 3))
    own, cross = ctx_a.profiles()
    assert own == (0, 0, 0, 0.3)
    assert cross == (1, 2, 1, 0.7)
    ctx_b = DataContext(1, (0.3, 0.7), 0, (0, 1, 2, 3))
    own, cross = ctx_b.profiles()
    assert own == (3, 3, 1, 0.7)
    assert cross == (2, 1, 0, 0.3)
    with pytest.raises(ValueError):
        DataContext(2, (0.5, 0.5), 0, (0, 0, 0, 0))
    with pytest.raises(ValueError):
        DataContext(0, (0.5, 0.6), 0, (0, 0, 0, 0))


def test_weighted_kl_zero_for_truth():
    env = coordination_env()
    model = minimal_correct_model(env)
    ctx = DataContext(0, (0.5, 0.5), 0, (0, 0, 1, 1))
    vals = [weighted_kl(p, ctx, env) for p in model.params]
    assert min(vals) == pytest.approx(0.0, abs=1e-12)


def test_kl_minimizers_pick_data_matching_parameter():
    env = coordination_env()
    # one correct kernel and one that swaps the coordination outcomes
    wrong = np.zeros((2, 2, 3))
    wrong[0, 0, 1] = 1.0
    wrong[1, 1, 0] = 1.0
    wrong[0, 1, 2] = 1.0
    wrong[1, 0, 2] = 1.0
    truth = DenseKernel(env.kernels[0].table.copy())
    from zeitgeist.models import Model
    model = Model("pair", [
        Parameter((None, None), truth, 0, "right"),
        Parameter((None, None), DenseKernel(wrong), 1, "swapped"),
    ], strategic_certainty_form=False,
        kernels=[truth, DenseKernel(wrong)], kernel_labels=["right", "swapped"])
    res = kl_minimizers(model, DataContext(0, (1.0, 0.0), 0, (0, 0, 0, 0)), env)
    assert list(res.indices) == [0]
    assert not res.all_infinite


def test_kl_minimizers_all_infinite_flagged():
    env = coordination_env()
    # kernel that rules out the observed consequence entirely
    impossible = np.zeros((2, 2, 3))
    impossible[..., 2] = 1.0
    k = DenseKernel(impossible)
    from zeitgeist.models import Model
    model = Model("impossible", [Parameter((None, None), k, 0, "never")],
                  strategic_certainty_form=False, kernels=[k],
                  kernel_labels=["never"])
    res = kl_minimizers(model, DataContext(0, (1.0, 0.0), 0, (0, 0, 0, 0)), env)
    assert res.all_infinite
    assert list(res.indices) == [0]


def test_profile_tables_match_direct_evaluation():
    rng = np.random.default_rng(11)
    env = random_env(rng, n_strategies=3, n_consequences=4)
    model = random_model(rng, env, 4, "m")
    table = kl_profile_tables(model, env, 0)
    assert table.shape == (4, 3, 3, 2)
    for t, param in enumerate(model.params):
        for i in range(3):
            for j in range(3):
                for og in range(2):
                    from zeitgeist.inference import _param_term
                    want = _param_term(param, env, 0, i, j, og)
                    got = table[t, i, j, og]
                    if np.isinf(want):
                        assert np.isinf(got)
                    else:
                        assert got == pytest.approx(want, abs=1e-12)


def test_singleton_model_truth_is_minimizer_at_any_share():
    env = coordination_env()
    model = singleton_model(env, env.kernels[0])
    for shares in [(1.0, 0.0), (0.5, 0.5), (0.2, 0.8)]:
        res = kl_minimizers(model, DataContext(0, shares, 0, (1, 1, 1, 1)), env)
        assert list(res.indices) == [0]
        assert not res.all_infinite
