import numpy as np
import pytest

from conftest import coordination_env, mismatch_env, random_env, random_model
from zeitgeist import catalog
from zeitgeist.games import MonitoringStructure, StageEnv
from zeitgeist.models import minimal_correct_model, singleton_model
from zeitgeist.solver import (
    SituationOutcome,
    Zeitgeist,
    conditional_fitness,
    enumerate_ez,
    enumerate_situation_ez,
    fitness,
    situation_fitness,
    verify_ez,
    zeitgeist_summary,
)


def _one_hot(n, i):
    v = np.zeros(n)
    v[i] = 1.0
    return v


def _singleton_state(env, model_a, model_b, situation, quad, i, j, shares):
    o = SituationOutcome(
        situation=situation, quadruple=quad,
        belief_a=_one_hot(model_a.n_params, i),
        belief_b=_one_hot(model_b.n_params, j),
        minimizers_a=(i,), minimizers_b=(j,),
        all_infinite_a=False, all_infinite_b=False,
        mixture_a=False, mixture_b=False)
    return Zeitgeist(tuple(shares), (o,))


def test_coordination_truth_models_reproduce_equilibria():
    env = coordination_env()
    model = minimal_correct_model(env)
    states = enumerate_ez(env, model, model, (0.5, 0.5))
    quads = sorted(z.outcomes[0].quadruple for z in states)
    # every directed matchup must be a mutual best reply, so within-group
    # play sits on an equilibrium and the cross pair coordinates on its own
    expected = sorted((i, j, j, l) for i in (0, 1) for j in (0, 1) for l in (0, 1))
    assert quads == expected
    for z in states:
        ok, cert = verify_ez(z, env, model, model)
        assert ok, cert.failures()


def test_no_state_is_legal():
    env = mismatch_env()
    model = minimal_correct_model(env)
    assert enumerate_ez(env, model, model, (0.5, 0.5)) == []


def test_enumerate_matches_brute_force_on_random_envs():
    # completeness/soundness sandwich against the independent verifier:
    # a quadruple appears in the enumeration exactly when some one-hot
    # belief pair certifies it
    rng = np.random.default_rng(7)
    for trial in range(12):
        env = random_env(rng, n_strategies=2, n_consequences=3)
        model_a = random_model(rng, env, 3, "a")
        model_b = random_model(rng, env, 3, "b")
        shares = (0.3, 0.7) if trial % 2 else (0.6, 0.4)
        found = {o.quadruple
                 for o in enumerate_situation_ez(env, model_a, model_b, "G0",
                                                 shares)}
        certified = set()
        for quad in np.ndindex(2, 2, 2, 2):
            for i in range(model_a.n_params):
                for j in range(model_b.n_params):
                    z = _singleton_state(env, model_a, model_b, "G0",
                                         tuple(int(x) for x in quad), i, j,
                                         shares)
                    ok, _ = verify_ez(z, env, model_a, model_b)
                    if ok:
                        certified.add(tuple(int(x) for x in quad))
                        break
                else:
                    continue
                break
        assert certified <= found, f"missing quadruples {certified - found}"
        # anything found beyond the one-hot certified set must be a
        # mixture-supported state and must itself verify
        for o in enumerate_situation_ez(env, model_a, model_b, "G0", shares):
            z = Zeitgeist(shares, (o,))
            ok, cert = verify_ez(z, env, model_a, model_b)
            assert ok, cert.failures()
            if o.quadruple not in certified:
                assert o.mixture_a or o.mixture_b


def test_investment_extreme_share_states():
    spec = catalog.InvestmentSpec(1.0, 5.5, 12.0)
    env, model_a, model_b, _ = catalog.build_investment_game(spec)
    at_a = enumerate_ez(env, model_a, model_b, (1.0, 0.0))
    assert [z.outcomes[0].quadruple for z in at_a] == [(0, 0, 1, 1)]
    z = at_a[0]
    assert conditional_fitness(z, env, "market", "A", "A") == pytest.approx(2.0)
    assert conditional_fitness(z, env, "market", "B", "A") == pytest.approx(0.5)
    assert conditional_fitness(z, env, "market", "A", "B") == pytest.approx(3.0)
    assert conditional_fitness(z, env, "market", "B", "B") == pytest.approx(2.5)
    assert fitness(z, env) == pytest.approx((2.0, 0.5), abs=1e-12)
    at_b = enumerate_ez(env, model_a, model_b, (0.0, 1.0))
    assert [z.outcomes[0].quadruple for z in at_b] == [(0, 0, 0, 1)]
    assert fitness(at_b[0], env) == pytest.approx((2.0, 2.5), abs=1e-12)
    # entrant belief sits on the slope matching the data it sees
    idx = int(np.argmax(at_b[0].outcomes[0].belief_b))
    assert model_b.params[idx].label == "slope=4"


def test_fitness_decomposition():
    rng = np.random.default_rng(21)
    env = random_env(rng, n_strategies=2, n_consequences=3, n_situations=3)
    model_a = random_model(rng, env, 2, "a")
    model_b = random_model(rng, env, 2, "b")
    shares = (0.4, 0.6)
    states = enumerate_ez(env, model_a, model_b, shares)
    assert states, "fixture needs at least one state"
    q = np.array([0.2, 0.5, 0.3])
    for z in states[:5]:
        total = fitness(z, env, q)
        parts = np.zeros(2)
        for gi, G in enumerate(env.situations):
            sf = situation_fitness(z.outcomes[gi], env, G, shares)
            parts += q[gi] * sf
            # situation fitness is the share blend of conditional fitness
            blend = [shares[0] * conditional_fitness(z, env, G, "A", "A")
                     + shares[1] * conditional_fitness(z, env, G, "A", "B"),
                     shares[1] * conditional_fitness(z, env, G, "B", "B")
                     + shares[0] * conditional_fitness(z, env, G, "B", "A")]
            assert np.allclose(sf, blend, atol=1e-12)
        assert np.allclose(total, parts, atol=1e-12)


def test_singleton_models_make_play_share_invariant():
    env = coordination_env()
    model = singleton_model(env, env.kernels[0])
    reference = None
    for p in np.linspace(0.0, 1.0, 11):
        quads = sorted(z.outcomes[0].quadruple
                       for z in enumerate_ez(env, model, model, (p, 1 - p)))
        if reference is None:
            reference = quads
        assert quads == reference


def test_strategic_certainty_requires_perfect_monitoring():
    env = coordination_env()
    noisy = StageEnv(env.strategies, env.consequences, env.situations,
                     [env.kernels[0].table], env.utility,
                     monitoring=MonitoringStructure.noisy(env.strategies, 0.9))
    model = minimal_correct_model(noisy)
    with pytest.raises(ValueError):
        enumerate_ez(noisy, model, model, (0.5, 0.5))


def test_summary_is_json_ready():
    env = coordination_env()
    model = minimal_correct_model(env)
    z = enumerate_ez(env, model, model, (0.5, 0.5))[0]
    s = zeitgeist_summary(z, env, model, model)
    assert s["shares"] == [0.5, 0.5]
    assert set(s["situations"][0]["play"]) == {"a_AA", "a_AB", "a_BA", "a_BB"}


def test_shares_must_be_distribution():
    env = coordination_env()
    model = minimal_correct_model(env)
    with pytest.raises(ValueError):
        enumerate_ez(env, model, model, (0.7, 0.7))
